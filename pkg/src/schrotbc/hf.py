"""Time stepping with the high-frequency boundary and corner conditions.

Two realizations of the half-order boundary operators: ``CQ`` keeps the
boundary traces of every step and forms convolution-quadrature sums, ``CP``
replaces them by the Padé auxiliary fields, which need constant memory.
Each comes with BDF1, BDF2 (started by one BDF1 step) and trapezoidal (TR)
steppers.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rational
from .base import Stepper
from .boundary import GrowingArray, boundary_action, build_lhs, bt_of, lr_of, mass_action
from .spectral import SpectralSpace

VARIANTS = ("CQ", "CP")
STEPPERS = ("BDF1", "BDF2", "TR")


@dataclass(frozen=True)
class HFConfig:
    variant: str = "CQ"
    stepper: str = "BDF1"
    dt: float = 1e-3
    K: int = 30

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"HF variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.stepper not in STEPPERS:
            raise ValueError(f"HF stepper must be one of {STEPPERS}, got {self.stepper!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.variant == "CP" and self.K < 1:
            raise ValueError("Padé order K must be >= 1")


class _Scheme:
    """Constants and the factored operator for one multistep method."""

    def __init__(self, space: SpectralSpace, cfg: HFConfig, scheme: str):
        dom = space.dom
        self.scheme = scheme
        self.rho = rational.rho_of(scheme, cfg.dt)
        self.a1 = rational.alpha_of(self.rho, dom.beta1)
        self.a2 = rational.alpha_of(self.rho, dom.beta2)
        if cfg.variant == "CP":
            self.pade = rational.discrete_pade(scheme, cfg.dt, dom.beta1, dom.beta2, cfg.K)
            wp, wm = self.pade.varpi_plus, self.pade.varpi_minus
        else:
            self.pade = None
            wp = wm = 1.0
        self.lhs = build_lhs(space, self.a1, self.a2, w_plus=wp, w_minus=wm, hf=True)
        self._w = {}

    def weights(self, nu: float, n: int) -> np.ndarray:
        w = self._w.get(nu)
        if w is None or w.size < n:
            w = rational.cq_weights(self.scheme, nu, max(n, 2 * (0 if w is None else w.size), 64)).omega
            self._w[nu] = w
        return w


class HFSolver(Stepper):
    """Stepper for the truncated problem with high-frequency boundary conditions."""

    def __init__(self, space: SpectralSpace, U0, cfg: HFConfig):
        super().__init__(space, U0, cfg.dt)
        self.cfg = cfg
        self._schemes = {}
        self.scheme(cfg.stepper)  # factor the main operator up front
        n1, n2 = space.shape
        if cfg.variant == "CQ":
            self._lr = GrowingArray((2, n2))
            self._bt = GrowingArray((n1, 2))
            self._lr.append(lr_of(self.U))
            self._bt.append(bt_of(self.U))
        else:
            K = cfg.K
            self.A0_lr = np.zeros((2, n2), complex)
            self.A0_bt = np.zeros((n1, 2), complex)
            self.A_lr = np.zeros((K, 2, n2), complex)
            self.A_bt = np.zeros((K, n1, 2), complex)
            self._prev_aux = None
        self._U_prev = None

    def scheme(self, name: str) -> _Scheme:
        if name not in self._schemes:
            self._schemes[name] = _Scheme(self.space, self.cfg, name)
        return self._schemes[name]

    # -- history terms -------------------------------------------------
    def _boundary_rhs(self, sch: _Scheme, p_lr, p_bt, m_lr, m_bt) -> np.ndarray:
        o1, o2 = self.space.ops1, self.space.ops2
        a1, a2 = sch.a1, sch.a2
        return (boundary_action(self.space, 1 / a1, p_lr, o2.M, 1 / a2, p_bt, o1.M)
                + boundary_action(self.space, 0.5 / (a1 * a2 ** 2), m_lr, o2.S,
                                  0.5 / (a1 ** 2 * a2), m_bt, o1.S))

    def cq_history(self, sch: _Scheme, n: int) -> np.ndarray:
        """Boundary history matrix at time level ``n`` (traces ``1..n-1``)."""
        if n <= 1:
            return np.zeros(self.space.shape, complex)
        wp = sch.weights(0.5, n)[n - 1:0:-1]
        wm = sch.weights(-0.5, n)[n - 1:0:-1]
        F_lr, F_bt = self._lr[1:n], self._bt[1:n]
        return self._boundary_rhs(
            sch,
            np.tensordot(wp, F_lr, 1), np.tensordot(wp, F_bt, 1),
            np.tensordot(wm, F_lr, 1), np.tensordot(wm, F_bt, 1))

    def cp_history(self, sch: _Scheme, aux) -> np.ndarray:
        A0_lr, A_lr, A0_bt, A_bt = aux
        c = sch.pade
        return self._boundary_rhs(
            sch,
            np.tensordot(c.gamma_plus, A_lr, 1), np.tensordot(c.gamma_plus, A_bt, 1),
            np.tensordot(c.gamma_minus, A_lr, 1) - c.d0_bar * A0_lr,
            np.tensordot(c.gamma_minus, A_bt, 1) - c.d0_bar * A0_bt)

    # -- stepping -------------------------------------------------------
    def _current_stepper(self) -> str:
        if self.cfg.stepper == "BDF2" and self.j == 0:
            return "BDF1"
        return self.cfg.stepper

    def step(self):
        name = self._current_stepper()
        sch = self.scheme(name)
        U = self.U
        if name == "BDF2":
            Ubar = (4 * U - self._U_prev) / 3
        else:
            Ubar = U
        rhs = mass_action(self.space, Ubar)
        n = self.j + 1
        if self.cfg.variant == "CQ":
            if name == "TR":
                rhs -= 0.5 * (self.cq_history(sch, n) + self.cq_history(sch, n - 1))
            else:
                rhs -= self.cq_history(sch, n)
            W = sch.lhs.solve(rhs)
            U_new = 2 * W - U if name == "TR" else W
            self._lr.append(lr_of(U_new))
            self._bt.append(bt_of(U_new))
        else:
            aux = (self.A0_lr, self.A_lr, self.A0_bt, self.A_bt)
            if name == "BDF2":
                prev = self._prev_aux
                aux_bar = tuple((4 * a - b) / 3 for a, b in zip(aux, prev))
            else:
                aux_bar = aux
            rhs += self.cp_history(sch, aux_bar)
            W = sch.lhs.solve(rhs)
            new = self._advance_aux(sch, aux_bar, W)
            if name == "TR":
                new = tuple(2 * m - a for m, a in zip(new, aux))
                U_new = 2 * W - U
            else:
                U_new = W
            self._prev_aux = aux
            self.A0_lr, self.A_lr, self.A0_bt, self.A_bt = new
        self._U_prev = U
        self.U = U_new
        self.j += 1
        return self.U

    @staticmethod
    def _advance_aux(sch: _Scheme, aux_bar, W):
        """One implicit step of ``A_k' = -eta_k^2 A_k + trace(W)`` from ``aux_bar``."""
        A0_lr, A_lr, A0_bt, A_bt = aux_bar
        G = sch.pade.G[:, None, None]
        f_lr, f_bt = lr_of(W) / sch.rho, bt_of(W) / sch.rho
        return A0_lr + f_lr, G * (A_lr + f_lr), A0_bt + f_bt, G * (A_bt + f_bt)

    def state_size(self) -> int:
        size = self.U.size
        if self.cfg.stepper == "BDF2":
            size *= 2
        if self.cfg.variant == "CQ":
            size += self._lr.view.size + self._bt.view.size
        else:
            aux = self.A0_lr.size + self.A_lr.size + self.A0_bt.size + self.A_bt.size
            size += aux * (2 if self.cfg.stepper == "BDF2" else 1)
        return size
