"""Linear systems of the form ``sum_i c_i A_i X B_i = F``.

Matrices are vectorized column-major, so the operator acts on ``vec(X)`` as
``sum_i c_i kron(B_i.T, A_i)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class LinearSolveError(RuntimeError):
    """Factorization or solve failure; ``cond`` carries a condition estimate if known."""

    def __init__(self, msg: str, cond: float = np.inf):
        super().__init__(f"{msg} (condition estimate {cond:.3e})")
        self.cond = cond


@dataclass(frozen=True)
class KronOperator:
    terms: tuple

    @property
    def shape(self) -> tuple[int, int]:
        _, A, B = self.terms[0]
        return A.shape[0], B.shape[0]

    def apply(self, X):
        X = np.asarray(X)
        return sum(c * (A @ X @ B) for c, A, B in self.terms)

    def sparse(self) -> sp.csc_matrix:
        n1, n2 = self.shape
        out = sp.csc_matrix((n1 * n2, n1 * n2), dtype=complex)
        for c, A, B in self.terms:
            out = out + c * sp.kron(sp.csc_matrix(B.T), sp.csc_matrix(A), format="csc")
        out.eliminate_zeros()
        return out.tocsc()

    def dense(self) -> np.ndarray:
        return sum(c * np.kron(B.T, A) for c, A, B in self.terms)


def assemble(terms: Sequence) -> KronOperator:
    """Validate ``(c, A, B)`` triples and wrap them."""
    terms = tuple((complex(c), np.asarray(A), np.asarray(B)) for c, A, B in terms)
    if not terms:
        raise ValueError("operator needs at least one term")
    n1, n2 = terms[0][1].shape[0], terms[0][2].shape[0]
    for _, A, B in terms:
        if A.shape != (n1, n1) or B.shape != (n2, n2):
            raise ValueError(f"term shapes {A.shape}, {B.shape} do not match ({n1}, {n2})")
    return KronOperator(terms)


@dataclass
class FactorStats:
    factorizations: int = 0
    solves: int = 0


stats = FactorStats()


@dataclass
class FactoredOperator:
    op: KronOperator
    _lu: object = field(repr=False)
    solves: int = 0

    def solve(self, F):
        F = np.asarray(F, dtype=complex)
        n1, n2 = self.op.shape
        if F.shape != (n1, n2):
            raise ValueError(f"right-hand side has shape {F.shape}, expected {(n1, n2)}")
        x = self._lu.solve(F.reshape(-1, order="F"))
        if not np.all(np.isfinite(x)):
            raise LinearSolveError("non-finite solution")
        self.solves += 1
        stats.solves += 1
        return x.reshape((n1, n2), order="F")


def factor(op: KronOperator) -> FactoredOperator:
    A = op.sparse()
    try:
        lu = spla.splu(A)
    except RuntimeError as exc:
        cond = np.inf
        if A.shape[0] <= 2000:
            cond = float(np.linalg.cond(A.toarray()))
        raise LinearSolveError(f"sparse LU failed: {exc}", cond) from exc
    stats.factorizations += 1
    return FactoredOperator(op, lu)


def solve(f: FactoredOperator, F):
    return f.solve(F)


def dense_solve(op: KronOperator, F):
    """Reference solve through the explicit Kronecker matrix (small sizes only)."""
    n1, n2 = op.shape
    x = np.linalg.solve(op.dense(), np.asarray(F, dtype=complex).reshape(-1, order="F"))
    return x.reshape((n1, n2), order="F")


class Factored1D:
    """LU factors of a small square matrix, reused for left and right solves."""

    def __init__(self, A):
        A = np.asarray(A, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        with np.errstate(all="ignore"), warnings.catch_warnings():
            warnings.simplefilter("ignore", sla.LinAlgWarning)
            lu, piv = sla.lu_factor(A, check_finite=True)
        if np.any(np.diag(lu) == 0):
            raise LinearSolveError("singular 1D matrix", np.inf)
        self.A = A
        self._lu = (lu, piv)
        self.solves = 0

    def left(self, F):
        """``X`` with ``A X = F``; columns of ``F`` are independent right-hand sides."""
        self.solves += 1
        return sla.lu_solve(self._lu, F)

    def right(self, F):
        """``X`` with ``X A = F``."""
        self.solves += 1
        return sla.lu_solve(self._lu, np.asarray(F).T, trans=1).T


def solve_1d_left(A, F):
    return Factored1D(A).left(F)


def solve_1d_right(B, F):
    return Factored1D(B).right(F)
