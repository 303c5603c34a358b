"""Helpers shared by the time-stepping engines.

Boundary data live in compact arrays: an ``lr`` array has shape
``(..., 2, N2 + 1)`` (rows 0 and 1 of a field, i.e. the left and right
segments) and a ``bt`` array has shape ``(..., N1 + 1, 2)`` (columns 0 and 1,
bottom and top).  A corner block ``[[lb, lt], [rb, rt]]`` is ``(..., 2, 2)``.
"""
from __future__ import annotations

import numpy as np

from . import kron
from .spectral import SpectralSpace


def embed_lr(rows, n1: int) -> np.ndarray:
    """Matrix with ``rows`` in rows 0 and 1 and zeros elsewhere."""
    out = np.zeros((n1, rows.shape[-1]), dtype=complex)
    out[:2] = rows
    return out


def embed_bt(cols, n2: int) -> np.ndarray:
    out = np.zeros((cols.shape[-2], n2), dtype=complex)
    out[:, :2] = cols
    return out


def lr_of(U) -> np.ndarray:
    return np.array(U[:2], dtype=complex)


def bt_of(U) -> np.ndarray:
    return np.array(U[:, :2], dtype=complex)


def boundary_action(space: SpectralSpace, coef_lr, rows, right_lr, coef_bt, cols, left_bt):
    """``coef_lr * E(rows) @ right_lr + coef_bt * left_bt @ E(cols)`` without dense embedding."""
    n1, n2 = space.shape
    out = np.zeros((n1, n2), dtype=complex)
    if rows is not None:
        out[:2] += coef_lr * (rows @ right_lr)
    if cols is not None:
        out[:, :2] += coef_bt * (left_bt @ cols)
    return out


def mass_action(space: SpectralSpace, U) -> np.ndarray:
    return space.ops1.M @ U @ space.ops2.M


def lhs_terms(space: SpectralSpace, a1: complex, a2: complex, *, w_plus: float = 1.0,
              w_minus: float = 1.0, hf: bool = True) -> list:
    """Kronecker terms of the implicit operator shared by all schemes.

    ``hf=True`` adds the two cross terms and the corner term of the
    high-frequency boundary condition; ``hf=False`` keeps the five terms of
    the exact condition.
    """
    o1, o2 = space.ops1, space.ops2
    M1, S1, L1 = o1.M, o1.S, o1.Lam
    M2, S2, L2 = o2.M, o2.S, o2.Lam
    terms = [
        (1.0, M1, M2),
        (a1 ** -2, S1, M2),
        (a2 ** -2, M1, S2),
        (w_plus / a1, L1, M2),
        (w_plus / a2, M1, L2),
    ]
    if hf:
        terms += [
            (0.5 * w_minus / (a1 * a2 ** 2), L1, S2),
            (0.5 * w_minus / (a1 ** 2 * a2), S1, L2),
            (0.75 / (a1 * a2), L1, L2),
        ]
    return terms


def build_lhs(space, a1, a2, **kw) -> kron.FactoredOperator:
    return kron.factor(kron.assemble(lhs_terms(space, a1, a2, **kw)))


def segment_operator(ops, a: complex, w: float = 1.0) -> kron.Factored1D:
    """``M + a^-2 S + w a^-1 Lam`` for one-dimensional boundary problems."""
    return kron.Factored1D(ops.M + a ** -2 * ops.S + (w / a) * ops.Lam)


class GrowingArray:
    """Append-only stack of equally shaped arrays with amortized growth."""

    def __init__(self, item_shape, dtype=complex, capacity: int = 16):
        self._data = np.zeros((capacity,) + tuple(item_shape), dtype=dtype)
        self._n = 0

    def append(self, item):
        if self._n == self._data.shape[0]:
            grown = np.zeros((2 * self._n,) + self._data.shape[1:], dtype=self._data.dtype)
            grown[: self._n] = self._data
            self._data = grown
        self._data[self._n] = item
        self._n += 1

    def __len__(self):
        return self._n

    def __getitem__(self, idx):
        return self._data[: self._n][idx]

    @property
    def view(self) -> np.ndarray:
        return self._data[: self._n]

    @property
    def nbytes(self) -> int:
        return self._data[: self._n].nbytes
