"""Lobatto-Legendre spectral building blocks on rectangles.

The solution is expanded in the tensor basis ``phi_p(y1) phi_q(y2)`` on the
reference square ``[-1, 1]^2``.  ``phi_0`` and ``phi_1`` carry the values at
``y = -1`` and ``y = +1``; every higher mode vanishes at both ends.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np
import scipy.linalg as sla


class ConvergenceError(RuntimeError):
    """Raised when an iterative procedure fails to converge."""


@dataclass(frozen=True)
class DomainMap:
    """Affine map between the rectangle ``(x_l, x_r) x (x_b, x_t)`` and ``[-1, 1]^2``."""

    x_l: float
    x_r: float
    x_b: float
    x_t: float

    def __post_init__(self):
        if not (self.x_l < self.x_r and self.x_b < self.x_t):
            raise ValueError(
                f"degenerate domain ({self.x_l}, {self.x_r}) x ({self.x_b}, {self.x_t})")

    @classmethod
    def square(cls, half_width: float, center: tuple[float, float] = (0.0, 0.0)) -> "DomainMap":
        cx, cy = center
        return cls(cx - half_width, cx + half_width, cy - half_width, cy + half_width)

    @property
    def J1(self) -> float:
        return 0.5 * (self.x_r - self.x_l)

    @property
    def J2(self) -> float:
        return 0.5 * (self.x_t - self.x_b)

    @property
    def center(self) -> tuple[float, float]:
        return 0.5 * (self.x_r + self.x_l), 0.5 * (self.x_t + self.x_b)

    @property
    def beta1(self) -> float:
        return self.J1 ** -2

    @property
    def beta2(self) -> float:
        return self.J2 ** -2

    def to_physical(self, y1, y2):
        c1, c2 = self.center
        return c1 + self.J1 * np.asarray(y1), c2 + self.J2 * np.asarray(y2)

    def to_reference(self, x1, x2):
        c1, c2 = self.center
        return (np.asarray(x1) - c1) / self.J1, (np.asarray(x2) - c2) / self.J2


class QuadratureRule(NamedTuple):
    nodes: np.ndarray
    weights: np.ndarray


def legendre_table(n: int, y) -> tuple[np.ndarray, np.ndarray]:
    """Values and first derivatives of ``L_0 .. L_n`` at points ``y``.

    Returns two arrays of shape ``(n + 1, len(y))``.
    """
    y = np.atleast_1d(np.asarray(y, dtype=float))
    L = np.zeros((n + 1, y.size))
    dL = np.zeros((n + 1, y.size))
    L[0] = 1.0
    if n >= 1:
        L[1] = y
        dL[1] = 1.0
    for k in range(1, n):
        L[k + 1] = ((2 * k + 1) * y * L[k] - k * L[k - 1]) / (k + 1)
        dL[k + 1] = dL[k - 1] + (2 * k + 1) * L[k]
    return L, dL


@lru_cache(maxsize=None)
def _lgl_cached(N: int) -> QuadratureRule:
    if N < 1:
        raise ValueError("LGL rule needs N >= 1")
    j = np.arange(N + 1)
    y = -np.cos(np.pi * j / N)
    x = y[1:-1].copy()
    for _ in range(100):
        L, dL = legendre_table(N, x)
        # L_N'' from the Legendre ODE: (1 - x^2) L'' = 2x L' - N(N+1) L
        d2 = (2 * x * dL[N] - N * (N + 1) * L[N]) / (1 - x * x)
        dx = dL[N] / d2
        x -= dx
        if np.all(np.abs(dx) < 1e-14):
            break
    else:
        bad = int(np.argmax(np.abs(dx))) + 1
        raise ConvergenceError(f"LGL Newton iteration did not converge at node {bad}")
    interior = x
    y[1:-1] = interior
    # symmetrize to remove round-off bias
    y = 0.5 * (y - y[::-1])
    LN = legendre_table(N, y)[0][N]
    w = 2.0 / (N * (N + 1) * LN ** 2)
    y.setflags(write=False)
    w.setflags(write=False)
    return QuadratureRule(y, w)


def lgl_grid(N: int) -> QuadratureRule:
    """Legendre-Gauss-Lobatto nodes and weights with ``N + 1`` points."""
    return _lgl_cached(int(N))


def _norm_const(k):
    return 1.0 / np.sqrt(2.0 * (2.0 * k - 1.0))


def lobatto_table(N: int, y, order: int = 0) -> np.ndarray:
    """Matrix ``T[k, i] = phi_k^{(order)}(y_i)`` for ``k = 0..N``."""
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    L, dL = legendre_table(max(N, 1), y)
    T = np.empty((N + 1, L.shape[1]))
    if order == 0:
        T[0] = 0.5 * (L[0] - L[1])
        if N >= 1:
            T[1] = 0.5 * (L[0] + L[1])
        for k in range(2, N + 1):
            T[k] = _norm_const(k) * (L[k] - L[k - 2])
    else:
        T[0] = -0.5
        if N >= 1:
            T[1] = 0.5
        for k in range(2, N + 1):
            # L_k' - L_{k-2}' = (2k - 1) L_{k-1}
            T[k] = _norm_const(k) * (2 * k - 1) * L[k - 1]
    return T


def lobatto_eval(k: int, y, order: int = 0):
    """Value of ``phi_k`` (``order=0``) or ``phi_k'`` (``order=1``) at ``y``."""
    scalar = np.ndim(y) == 0
    out = lobatto_table(k, y, order)[k]
    return float(out[0]) if scalar else out


@dataclass(frozen=True)
class SpectralOperators:
    """One-dimensional mass, stiffness and boundary-selector matrices."""

    M: np.ndarray
    S: np.ndarray
    Lam: np.ndarray

    @property
    def N(self) -> int:
        return self.M.shape[0] - 1


@lru_cache(maxsize=None)
def _ops_cached(N: int) -> SpectralOperators:
    n = N + 1
    M = np.zeros((n, n))
    S = np.zeros((n, n))
    S[:2, :2] = [[0.5, -0.5], [-0.5, 0.5]]
    M[:2, :2] = [[2 / 3, 1 / 3], [1 / 3, 2 / 3]]
    for k in range(2, n):
        S[k, k] = 1.0
        M[k, k] = 2.0 / ((2 * k + 1) * (2 * k - 3))
        if k + 2 < n:
            off = -1.0 / ((2 * k + 1) * np.sqrt((2 * k - 1) * (2 * k + 3)))
            M[k, k + 2] = M[k + 2, k] = off
    # phi_0, phi_1 are linear, so only phi_2 and phi_3 couple to them
    if n > 2:
        c2 = _norm_const(2)
        M[0, 2] = M[2, 0] = -c2
        M[1, 2] = M[2, 1] = -c2
    if n > 3:
        c3 = _norm_const(3)
        M[0, 3] = M[3, 0] = c3 / 3
        M[1, 3] = M[3, 1] = -c3 / 3
    Lam = np.zeros((n, n))
    Lam[0, 0] = Lam[1, 1] = 1.0
    for a in (M, S, Lam):
        a.setflags(write=False)
    return SpectralOperators(M, S, Lam)


def assemble_ops(N: int) -> SpectralOperators:
    """Mass, stiffness and boundary selector for Lobatto degree ``N``."""
    if N < 3:
        raise ValueError("assemble_ops needs N >= 3")
    return _ops_cached(int(N))


@lru_cache(maxsize=None)
def _nodal_transform(N: int):
    """Vandermonde ``V[i, k] = phi_k(y_i)`` at the LGL nodes and its LU factors."""
    y = lgl_grid(N).nodes
    V = lobatto_table(N, y).T
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(f"nodal transform ill-conditioned (cond={cond:.3e})")
    lu = sla.lu_factor(V)
    V.setflags(write=False)
    return V, lu


def nodal_vandermonde(N: int) -> np.ndarray:
    return _nodal_transform(int(N))[0]


def interpolate(values, N1: int | None = None, N2: int | None = None) -> np.ndarray:
    """Coefficients reproducing nodal ``values`` given on the LGL x LGL grid."""
    values = np.asarray(values, dtype=complex)
    if values.ndim != 2:
        raise ValueError("nodal values must form a 2D grid")
    n1, n2 = values.shape[0] - 1, values.shape[1] - 1
    if (N1 is not None and N1 != n1) or (N2 is not None and N2 != n2):
        raise ValueError(f"grid shape {values.shape} does not match degrees ({N1}, {N2})")
    lu1 = _nodal_transform(n1)[1]
    lu2 = _nodal_transform(n2)[1]
    tmp = sla.lu_solve(lu1, values)
    return sla.lu_solve(lu2, tmp.T).T


def evaluate(U, y1, y2) -> np.ndarray:
    """Evaluate the expansion on the tensor grid ``y1 x y2`` (reference coordinates)."""
    U = np.asarray(U)
    T1 = lobatto_table(U.shape[0] - 1, y1)
    T2 = lobatto_table(U.shape[1] - 1, y2)
    return T1.T @ U @ T2


def evaluate_nodal(U) -> np.ndarray:
    """Values of the expansion on its own LGL x LGL grid."""
    U = np.asarray(U)
    V1 = nodal_vandermonde(U.shape[0] - 1)
    V2 = nodal_vandermonde(U.shape[1] - 1)
    return V1 @ U @ V2.T


class Segments(NamedTuple):
    l: np.ndarray
    r: np.ndarray
    b: np.ndarray
    t: np.ndarray


def restrict(U) -> Segments:
    """Coefficient vectors of the field on the four boundary segments."""
    U = np.asarray(U)
    return Segments(U[0].copy(), U[1].copy(), U[:, 0].copy(), U[:, 1].copy())


def corner_values(U) -> np.ndarray:
    """2x2 array of corner values ``[[lb, lt], [rb, rt]]``."""
    return np.asarray(U)[:2, :2].copy()


def weighted_l2(U, dom: DomainMap) -> float:
    """Physical-domain L2 norm via LGL quadrature on the expansion's own grid."""
    U = np.asarray(U)
    w1 = lgl_grid(U.shape[0] - 1).weights
    w2 = lgl_grid(U.shape[1] - 1).weights
    vals = evaluate_nodal(U)
    return float(np.sqrt(dom.J1 * dom.J2 * np.einsum("i,j,ij->", w1, w2, np.abs(vals) ** 2)))


@dataclass(frozen=True)
class SpectralSpace:
    """Discretization data for one rectangle and one pair of degrees."""

    dom: DomainMap
    N1: int
    N2: int
    ops1: SpectralOperators = field(init=False)
    ops2: SpectralOperators = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "ops1", assemble_ops(self.N1))
        object.__setattr__(self, "ops2", assemble_ops(self.N2))

    @property
    def shape(self) -> tuple[int, int]:
        return self.N1 + 1, self.N2 + 1

    def nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """Physical coordinates of the LGL nodes in each direction."""
        return self.dom.to_physical(lgl_grid(self.N1).nodes, lgl_grid(self.N2).nodes)

    def interpolate(self, func, t: float = 0.0) -> np.ndarray:
        """Coefficients of the interpolant of ``func(x1, x2, t)`` (broadcasting)."""
        x1, x2 = self.nodes()
        vals = func(x1[:, None], x2[None, :], t)
        return interpolate(np.broadcast_to(vals, self.shape))

    def nodal(self, U) -> np.ndarray:
        return evaluate_nodal(U)

    def norm(self, U) -> float:
        return weighted_l2(U, self.dom)

    def norm_nodal(self, values) -> float:
        w1 = lgl_grid(self.N1).weights
        w2 = lgl_grid(self.N2).weights
        return float(np.sqrt(self.dom.J1 * self.dom.J2
                             * np.einsum("i,j,ij->", w1, w2, np.abs(values) ** 2)))

    def evaluate(self, U, x1, x2) -> np.ndarray:
        y1, y2 = self.dom.to_reference(x1, x2)
        return evaluate(U, np.clip(y1, -1, 1), np.clip(y2, -1, 1))
