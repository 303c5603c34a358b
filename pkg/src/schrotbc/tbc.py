"""Time stepping with the exact transparent boundary conditions.

The exact condition couples the boundary traces across the two physical
directions, so its memory is organized on the two-time plane ``(tau1, tau2)``:
the field is known on the diagonal, and boundary traces are swept one step
into the off-diagonal region each time step.

``CQ`` keeps every off-diagonal trace and forms convolution-quadrature sums
(memory grows with the step count).  ``NP`` replaces both half-order
operators by the Padé auxiliary fields: per-segment fields ``A1`` (left/right),
``A2`` (bottom/top) and corner fields ``C[k, k']`` (``k`` the tau1 pole,
``k'`` the tau2 pole), which need constant memory.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rational
from .base import Stepper
from .boundary import build_lhs, bt_of, lr_of, mass_action, segment_operator
from .spectral import SpectralSpace

VARIANTS = ("CQ", "NP")
STEPPERS = ("BDF1", "TR")


@dataclass(frozen=True)
class TBCConfig:
    variant: str = "NP"
    stepper: str = "TR"
    dt: float = 1e-3
    K: int = 30

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"TBC variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.stepper not in STEPPERS:
            raise ValueError(
                f"TBC stepper must be one of {STEPPERS}, got {self.stepper!r}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.variant == "NP" and self.K < 1:
            raise ValueError("Padé order K must be >= 1")


def _put_cols(blocks, n2):
    """Embed ``(..., 2, 2)`` corner blocks into columns 0, 1 of ``(..., 2, n2)``."""
    out = np.zeros(blocks.shape[:-1] + (n2,), complex)
    out[..., :2] = blocks
    return out


def _put_rows(blocks, n1):
    """Embed ``(..., 2, 2)`` corner blocks into rows 0, 1 of ``(..., n1, 2)``."""
    out = np.zeros(blocks.shape[:-2] + (n1, 2), complex)
    out[..., :2, :] = blocks
    return out


class TBCSolver(Stepper):
    """Stepper for the truncated problem with exact transparent boundary conditions."""

    def __init__(self, space: SpectralSpace, U0, cfg: TBCConfig):
        super().__init__(space, U0, cfg.dt)
        self.cfg = cfg
        dom = space.dom
        self.rho = rational.rho_of(cfg.stepper, cfg.dt)
        self.a1 = rational.alpha_of(self.rho, dom.beta1)
        self.a2 = rational.alpha_of(self.rho, dom.beta2)
        if cfg.variant == "NP":
            self.pade = rational.discrete_pade(cfg.stepper, cfg.dt, dom.beta1, dom.beta2, cfg.K)
            w = self.pade.varpi_plus
        else:
            self.pade = None
            w = 1.0
        self.lhs = build_lhs(space, self.a1, self.a2, w_plus=w, hf=False)
        # P1 acts from the left on bottom/top arrays, P2 from the right on left/right arrays
        self.P1 = segment_operator(space.ops1, self.a1, w)
        self.P2 = segment_operator(space.ops2, self.a2, w)
        self.segment_solves = 0
        n1, n2 = space.shape
        if cfg.variant == "CQ":
            self._omega = rational.cq_weights(cfg.stepper, 0.5, 64).omega
            cap = 16
            self._phi1 = np.zeros((cap, 2, n2), complex)
            self._phi2 = np.zeros((cap, n1, 2), complex)
            self._corner = np.zeros((cap, cap, 2, 2), complex)
            self._phi1[0] = lr_of(self.U)
            self._phi2[0] = bt_of(self.U)
            self._corner[0, 0] = self.U[:2, :2]
        else:
            K = cfg.K
            self.A1 = np.zeros((K, 2, n2), complex)
            self.A2 = np.zeros((K, n1, 2), complex)
            self.C = np.zeros((K, K, 2, 2), complex)

    # -- CQ ------------------------------------------------------------
    def _weights(self, n: int) -> np.ndarray:
        if self._omega.size < n:
            self._omega = rational.cq_weights(self.cfg.stepper, 0.5, 2 * n).omega
        return self._omega

    def _ensure_capacity(self, n: int):
        cap = self._phi1.shape[0]
        if n <= cap:
            return
        new = max(n, 2 * cap)
        for name in ("_phi1", "_phi2"):
            old = getattr(self, name)
            grown = np.zeros((new,) + old.shape[1:], complex)
            grown[:cap] = old
            setattr(self, name, grown)
        grown = np.zeros((new, new, 2, 2), complex)
        grown[:cap, :cap] = self._corner
        self._corner = grown

    @property
    def phi1(self) -> np.ndarray:
        """Left/right traces ``Phi1[q]`` at ``tau1 = q``, ``tau2 = j`` for ``q <= j``."""
        return self._phi1[: self.j + 1]

    @property
    def phi2(self) -> np.ndarray:
        """Bottom/top traces ``Phi2[p]`` at ``tau1 = j``, ``tau2 = p`` for ``p <= j``."""
        return self._phi2[: self.j + 1]

    @property
    def corners(self) -> np.ndarray:
        """Corner values on the two-time grid, ``corners[q, p]`` for ``q, p <= j``."""
        return self._corner[: self.j + 1, : self.j + 1]

    def _corner_sums(self, n: int):
        """CQ corner histories at level ``n`` for every off-diagonal row and column."""
        j = self.j
        if n <= 1:
            z = np.zeros((j + 1, 2, 2), complex)
            return z, z.copy()
        w = self._weights(n)[n - 1:0:-1]
        cg = self._corner
        rows = np.einsum("k,qkab->qab", w, cg[: j + 1, 1:n])
        cols = np.einsum("k,kpab->pab", w, cg[1:n, : j + 1])
        return rows, cols

    def _cq_history(self, phi1, phi2, n: int) -> np.ndarray:
        out = np.zeros(self.space.shape, complex)
        if n <= 1:
            return out
        w = self._weights(n)[n - 1:0:-1]
        o1, o2 = self.space.ops1, self.space.ops2
        out[:2] += (np.tensordot(w, phi1[1:n], 1) @ o2.M) / self.a1
        out[:, :2] += (o1.M @ np.tensordot(w, phi2[1:n], 1)) / self.a2
        return out

    def _sweep(self, phi1, phi2, c_rows, c_cols):
        """Advance all off-diagonal traces by one (half) step of the segment problems."""
        o1, o2 = self.space.ops1, self.space.ops2
        n1, n2 = self.space.shape
        m = phi1.shape[0]
        rhs1 = phi1 @ o2.M - _put_cols(c_rows, n2) / self.a2
        new1 = self.P2.right(rhs1.reshape(2 * m, n2)).reshape(m, 2, n2)
        rhs2 = o1.M @ phi2 - _put_rows(c_cols, n1) / self.a1
        flat = rhs2.transpose(1, 0, 2).reshape(n1, 2 * m)
        new2 = self.P1.left(flat).reshape(n1, m, 2).transpose(1, 0, 2)
        self.segment_solves += 2 * m
        return new1, new2

    def _step_cq(self):
        j = self.j
        trap = self.cfg.stepper == "TR"
        self._ensure_capacity(j + 2)
        phi1, phi2 = self._phi1[: j + 1], self._phi2[: j + 1]
        rows, cols = self._corner_sums(j + 1)
        if trap:
            rows_old, cols_old = self._corner_sums(j)
            B_old = self._cq_history(phi1, phi2, j)
            h1, h2 = self._sweep(phi1, phi2, 0.5 * (rows + rows_old), 0.5 * (cols + cols_old))
            new1, new2 = 2 * h1 - phi1, 2 * h2 - phi2
        else:
            new1, new2 = self._sweep(phi1, phi2, rows, cols)
        B = self._cq_history(new1, new2, j + 1)
        rhs = mass_action(self.space, self.U)
        if trap:
            V = self.lhs.solve(rhs - 0.5 * (B + B_old))
            U_new = 2 * V - self.U
        else:
            U_new = self.lhs.solve(rhs - B)
        self._phi1[: j + 1] = new1
        self._phi2[: j + 1] = new2
        self._phi1[j + 1] = lr_of(U_new)
        self._phi2[j + 1] = bt_of(U_new)
        self._corner[: j + 1, j + 1] = new1[:, :, :2]
        self._corner[j + 1, : j + 1] = new2[:, :2, :]
        self._corner[j + 1, j + 1] = U_new[:2, :2]
        return U_new

    # -- NP ------------------------------------------------------------
    def _segment_pade(self, A1, A2, C):
        """Segment problems for the auxiliary fields, corner memory taken from ``C``."""
        n1, n2 = self.space.shape
        o1, o2 = self.space.ops1, self.space.ops2
        bG = self.pade.gamma_plus
        K = self.cfg.K
        corr1 = np.einsum("b,abxy->axy", bG, C)   # sum over tau2 poles
        corr2 = np.einsum("a,abxy->bxy", bG, C)   # sum over tau1 poles
        rhs1 = A1 @ o2.M + _put_cols(corr1, n2) / self.a2
        new1 = self.P2.right(rhs1.reshape(2 * K, n2)).reshape(K, 2, n2)
        rhs2 = o1.M @ A2 + _put_rows(corr2, n1) / self.a1
        flat = rhs2.transpose(1, 0, 2).reshape(n1, 2 * K)
        new2 = self.P1.left(flat).reshape(n1, K, 2).transpose(1, 0, 2)
        self.segment_solves += 2 * K
        return new1, new2

    def _segment_field(self, A1, A2):
        """Half-step of the field's own traces off the diagonal (TR only)."""
        n1, n2 = self.space.shape
        o1, o2 = self.space.ops1, self.space.ops2
        bG = self.pade.gamma_plus
        U = self.U
        c1 = np.tensordot(bG, A2[:, :2, :], 1)   # tau2 memory of the corners
        c2 = np.tensordot(bG, A1[:, :, :2], 1)   # tau1 memory of the corners
        h1 = self.P2.right(lr_of(U) @ o2.M + _put_cols(c1, n2) / self.a2)
        h2 = self.P1.left(o1.M @ bt_of(U) + _put_rows(c2, n1) / self.a1)
        self.segment_solves += 2
        return h1, h2

    def _step_np_bdf1(self):
        c = self.pade
        G, rho = c.G, self.rho
        o1, o2 = self.space.ops1, self.space.ops2
        A1h, A2h = self._segment_pade(self.A1, self.A2, self.C)
        rhs = mass_action(self.space, self.U)
        rhs[:2] += (np.tensordot(c.gamma_plus, A1h, 1) @ o2.M) / self.a1
        rhs[:, :2] += (o1.M @ np.tensordot(c.gamma_plus, A2h, 1)) / self.a2
        U_new = self.lhs.solve(rhs)
        Gk = G[:, None, None]
        self.A1 = Gk * (A1h + lr_of(U_new) / rho)
        self.A2 = Gk * (A2h + bt_of(U_new) / rho)
        C_mid = G[None, :, None, None] * (self.C + A1h[:, None, :, :2] / rho)
        self.C = G[:, None, None, None] * (C_mid + self.A2[None, :, :2, :] / rho)
        return U_new

    def _step_np_tr(self):
        c = self.pade
        G, H, rho = c.G, c.H, self.rho
        o1, o2 = self.space.ops1, self.space.ops2
        U = self.U
        A1, A2, C = self.A1, self.A2, self.C
        A1h, A2h = self._segment_pade(A1, A2, C)
        A1n, A2n = 2 * A1h - A1, 2 * A2h - A2
        P1h, P2h = self._segment_field(A1, A2)
        lr0, bt0 = lr_of(U), bt_of(U)
        P1n, P2n = 2 * P1h - lr0, 2 * P2h - bt0
        sbG = np.sum(c.gamma_plus)
        bH = c.b_bar * H
        hist1 = sbG / rho * 0.5 * (P1n - lr0) + 0.5 * (np.tensordot(bH, A1n, 1)
                                                      + np.tensordot(c.b_bar, A1, 1))
        hist2 = sbG / rho * 0.5 * (P2n - bt0) + 0.5 * (np.tensordot(bH, A2n, 1)
                                                      + np.tensordot(c.b_bar, A2, 1))
        rhs = mass_action(self.space, U)
        rhs[:2] += (hist1 @ o2.M) / self.a1
        rhs[:, :2] += (o1.M @ hist2) / self.a2
        V = self.lhs.solve(rhs)
        U_new = 2 * V - U
        Gk, Hk = G[:, None, None], H[:, None, None]
        self.A1 = Hk * A1n + (2 / rho) * Gk * (lr_of(V) + 0.5 * (P1n - lr0))
        self.A2 = Hk * A2n + (2 / rho) * Gk * (bt_of(V) + 0.5 * (P2n - bt0))
        # corner chain: tau2 step along tau1 = j, then tau1 step along tau2 = j + 1
        Gp, Hp = G[None, :, None, None], H[None, :, None, None]
        C_mid = Hp * C + (2 / rho) * Gp * A1h[:, None, :, :2]
        L1A2 = Hk * A2[:, :2, :] + (2 / rho) * Gk * P1h[None, :, :2]
        Gq, Hq = G[:, None, None, None], H[:, None, None, None]
        self.C = Hq * C_mid + (1 / rho) * Gq * (self.A2[None, :, :2, :] + L1A2[None])
        return U_new

    # -- driver -----------------------------------------------------------
    def step(self):
        if self.cfg.variant == "CQ":
            U_new = self._step_cq()
        elif self.cfg.stepper == "BDF1":
            U_new = self._step_np_bdf1()
        else:
            U_new = self._step_np_tr()
        self.U = U_new
        self.j += 1
        return self.U

    def state_breakdown(self) -> dict:
        """Complex scalars held between steps, by component."""
        out = {"field": self.U.size}
        if self.cfg.variant == "CQ":
            m = self.j + 1
            out["segment_traces"] = m * (self._phi1[0].size + self._phi2[0].size)
            out["corner_grid"] = m * m * 4
        else:
            out["segment_aux"] = self.A1.size + self.A2.size
            out["corner_aux"] = self.C.size
        return out

    def state_size(self) -> int:
        return sum(self.state_breakdown().values())
