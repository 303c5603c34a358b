"""The Padé-approximated high-frequency system written as one linear ODE ``V' = A V``.

``V`` stacks ``vec(U)`` followed by the auxiliary fields ``A_{0,1}..A_{K,1}``
(left/right segments) and ``A_{0,2}..A_{K,2}`` (bottom/top segments), each
stored as a full coefficient matrix.  Stepping this ODE with a textbook
one-step method must reproduce the CP steppers of ``hf`` exactly, which makes
it an independent check of the discrete constants.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .rational import pade_sqrt
from .spectral import SpectralSpace

MAX_DEGREE = 16


@dataclass
class AutonomousSystem:
    matrix: np.ndarray
    space: SpectralSpace
    K: int
    _lu: dict = field(default_factory=dict, repr=False)

    @property
    def n_field(self) -> int:
        n1, n2 = self.space.shape
        return n1 * n2

    def block(self, r: int, c: int) -> np.ndarray:
        n = self.n_field
        return self.matrix[r * n:(r + 1) * n, c * n:(c + 1) * n]

    def pack(self, U, A0_lr=None, A_lr=None, A0_bt=None, A_bt=None) -> np.ndarray:
        """Stack a field and compact auxiliary arrays into one state vector."""
        n1, n2 = self.space.shape
        K = self.K
        blocks = [np.asarray(U, complex)]
        lr = [A0_lr] + list(A_lr if A_lr is not None else [None] * K)
        bt = [A0_bt] + list(A_bt if A_bt is not None else [None] * K)
        for rows in lr:
            X = np.zeros((n1, n2), complex)
            if rows is not None:
                X[:2] = rows
            blocks.append(X)
        for cols in bt:
            X = np.zeros((n1, n2), complex)
            if cols is not None:
                X[:, :2] = cols
            blocks.append(X)
        return np.concatenate([b.reshape(-1, order="F") for b in blocks])

    def unpack(self, V):
        """Inverse of :meth:`pack`: ``(U, A0_lr, A_lr, A0_bt, A_bt)``."""
        n1, n2 = self.space.shape
        K = self.K
        mats = [V[i * n1 * n2:(i + 1) * n1 * n2].reshape((n1, n2), order="F")
                for i in range(2 * K + 3)]
        U = mats[0]
        lr = np.array([m[:2] for m in mats[1:K + 2]])
        bt = np.array([m[:, :2] for m in mats[K + 2:]])
        return U, lr[0], lr[1:], bt[0], bt[1:]


def assemble_autonomous(space: SpectralSpace, K: int) -> AutonomousSystem:
    if max(space.N1, space.N2) > MAX_DEGREE:
        raise ValueError(f"dense block system limited to degrees <= {MAX_DEGREE}")
    dom = space.dom
    b1, b2 = dom.beta1, dom.beta2
    M1, S1, L1 = space.ops1.M, space.ops1.S, space.ops1.Lam
    M2, S2, L2 = space.ops2.M, space.ops2.S, space.ops2.Lam
    I1, I2 = np.eye(space.shape[0]), np.eye(space.shape[1])
    p = pade_sqrt(K)
    e = np.exp(0.25j * np.pi)
    # coefficients of the continuous boundary operator (see hf.lhs_terms)
    cp1, cp2 = e * np.sqrt(b1), e * np.sqrt(b2)
    cm1, cm2 = 0.5j * e * np.sqrt(b1) * b2, 0.5j * e * b1 * np.sqrt(b2)
    n = I1.shape[0] * I2.shape[0]
    nb = 2 * K + 3
    Mfull = np.zeros((nb * n, nb * n), complex)
    # modified stiffness matrices absorb the b0 part of the boundary operator
    S1m = S1 + np.exp(-0.25j * np.pi) * p.b0 / np.sqrt(b1) * L1
    S2m = S2 + np.exp(-0.25j * np.pi) * p.b0 / np.sqrt(b2) * L2
    row = [1j * b1 * np.kron(M2, S1m) + 1j * b2 * np.kron(S2m, M1)
           + 0.75j * np.sqrt(b1 * b2) * np.kron(L2, L1)]
    row.append(cm1 * p.d0 * np.kron(S2, I1))
    for k in range(K):
        row.append(-cp1 * p.b[k] * np.kron(M2, I1) - cm1 * p.d[k] * np.kron(S2, I1))
    row.append(cm2 * p.d0 * np.kron(I2, S1))
    for k in range(K):
        row.append(-cp2 * p.b[k] * np.kron(I2, M1) - cm2 * p.d[k] * np.kron(I2, S1))
    mass = np.kron(M2, M1)
    first = -np.linalg.solve(mass, np.hstack(row))
    Mfull[:n] = first
    eta2 = np.concatenate([[0.0], p.eta ** 2])
    for i in range(K + 1):
        r = (1 + i) * n
        Mfull[r:r + n, :n] = np.kron(I2, L1)
        Mfull[r:r + n, r:r + n] = -eta2[i] * np.eye(n)
        r2 = (K + 2 + i) * n
        Mfull[r2:r2 + n, :n] = np.kron(L2, I1)
        Mfull[r2:r2 + n, r2:r2 + n] = -eta2[i] * np.eye(n)
    return AutonomousSystem(Mfull, space, K)


def _factor(sys: AutonomousSystem, key, mat):
    if key not in sys._lu:
        lu = sla.lu_factor(mat)
        if np.any(np.diag(lu[0]) == 0):
            raise np.linalg.LinAlgError("singular one-step matrix")
        sys._lu[key] = lu
    return sys._lu[key]


def reference_step(sys: AutonomousSystem | np.ndarray, V, dt: float, scheme: str = "BDF1", V_prev=None):
    """One step of ``V' = A V``: BDF1, TR, or BDF2 (needs ``V_prev``)."""
    if isinstance(sys, np.ndarray):
        sys = AutonomousSystem(np.atleast_2d(sys), None, 0)
    A = sys.matrix
    V = np.asarray(V, complex)
    if V.shape[0] != A.shape[0]:
        raise ValueError(f"state has length {V.shape[0]}, system has {A.shape[0]}")
    I = np.eye(A.shape[0])
    if scheme == "BDF1":
        return sla.lu_solve(_factor(sys, ("BDF1", dt), I - dt * A), V)
    if scheme == "TR":
        return sla.lu_solve(_factor(sys, ("TR", dt), I - 0.5 * dt * A), V + 0.5 * dt * (A @ V))
    if scheme == "BDF2":
        if V_prev is None:
            raise ValueError("BDF2 needs the previous state")
        rhs = (4 * V - np.asarray(V_prev, complex)) / 3
        return sla.lu_solve(_factor(sys, ("BDF2", dt), I - 2 * dt / 3 * A), rhs)
    raise ValueError(f"unknown scheme {scheme!r}")


def spectral_abscissa(sys: AutonomousSystem | np.ndarray) -> float:
    A = sys.matrix if isinstance(sys, AutonomousSystem) else np.atleast_2d(sys)
    if A.shape[0] > 20000:
        raise ValueError("matrix too large for a dense eigen-solve")
    return float(np.max(np.linalg.eigvals(A).real))
