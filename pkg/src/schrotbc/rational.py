"""Discrete half-order time operators.

Two realizations are provided: convolution-quadrature (CQ) weights generated
by BDF1, BDF2 or the trapezoidal rule, and a diagonal Padé approximant of
``sqrt(z)`` whose partial fractions turn the half-derivative into a set of
decaying auxiliary ODEs.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SCHEMES = ("BDF1", "BDF2", "TR")


def rho_of(scheme: str, dt: float) -> float:
    """Scale ``rho`` with ``delta(zeta) = rho * (...)`` for the multistep method."""
    if dt <= 0:
        raise ValueError("time step must be positive")
    try:
        return {"BDF1": 1.0, "BDF2": 1.5, "TR": 2.0}[scheme] / dt
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}") from None


@dataclass(frozen=True)
class CQWeights:
    scheme: str
    nu: float
    rho: float
    omega: np.ndarray

    def __len__(self):
        return self.omega.size


def _weights(scheme: str, nu: float, n: int) -> np.ndarray:
    w = np.zeros(n)
    w[0] = 1.0
    if n == 1:
        return w
    if scheme == "BDF1":
        for k in range(1, n):
            w[k] = (k - 1 - nu) / k * w[k - 1]
    elif scheme == "BDF2":
        w[1] = -4.0 * nu / 3.0
        for k in range(2, n):
            w[k] = (4.0 * (k - 1 - nu) / (3.0 * k)) * w[k - 1] \
                - ((k - 2 - 2 * nu) / (3.0 * k)) * w[k - 2]
    elif scheme == "TR":
        w[1] = -2.0 * nu
        for k in range(1, n - 1):
            w[k + 1] = ((k - 1) * w[k - 1] - 2.0 * nu * w[k]) / (k + 1)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return w


def cq_weights(scheme: str, nu: float, n: int, dt: float = 1.0) -> CQWeights:
    """First ``n`` CQ weights of ``delta(zeta)**nu / rho**nu``."""
    if n < 1:
        raise ValueError("need at least one weight")
    if nu not in (0.5, -0.5):
        raise ValueError("nu must be +1/2 or -1/2")
    w = _weights(scheme, nu, n)
    w.setflags(write=False)
    return CQWeights(scheme, nu, rho_of(scheme, dt), w)


def cq_history(w: CQWeights, trace, n: int):
    """History part ``sum_{k=1}^{n-1} omega_{n-k} F^k`` of the CQ sum at level ``n``.

    ``trace[k]`` holds ``F^k``; entry 0 is never read.
    """
    if n < 1:
        raise ValueError("level must be >= 1")
    if len(trace) < n:
        raise IndexError(f"history holds {len(trace)} samples, level {n} needs {n}")
    if n > len(w):
        raise IndexError(f"only {len(w)} weights available for level {n}")
    F = np.asarray(trace[1:n])
    if F.shape[0] == 0:
        return np.zeros_like(np.asarray(trace[0]), dtype=complex)
    return np.tensordot(w.omega[n - 1:0:-1], F, axes=1)


def cq_apply(w: CQWeights, trace, j: int, history_only: bool = False):
    """Discrete half-order derivative ``rho^nu (F^{j+1} + sum omega_{j+1-k} F^k)``.

    ``trace`` is indexed from time level 0, so ``trace[j + 1]`` must exist.
    """
    if len(trace) < j + 2:
        raise IndexError(f"history holds {len(trace)} samples, step {j} needs {j + 2}")
    hist = cq_history(w, trace, j + 1)
    if history_only:
        return hist
    return w.rho ** w.nu * (np.asarray(trace[j + 1]) + hist)


@dataclass(frozen=True)
class PadeSqrt:
    """Partial-fraction data of the order-``K`` diagonal Padé approximant of ``sqrt(z)``.

    ``R(z) = b0 - sum b_k / (z + eta_k^2)`` and
    ``R(z)/z = d0/z - sum d_k / (z + eta_k^2)``.
    """

    K: int
    b0: float
    b: np.ndarray
    eta: np.ndarray
    d0: float
    d: np.ndarray


def pade_sqrt(K: int) -> PadeSqrt:
    if K < 1:
        raise ValueError("Padé order must be >= 1")
    k = np.arange(1, K + 1)
    b0 = 2.0 * K + 1
    eta = np.tan(k * np.pi / b0)
    b = 2.0 * eta ** 2 * (1 + eta ** 2) / b0
    d = -b / eta ** 2
    d0 = b0 + np.sum(d)
    for a in (eta, b, d):
        a.setflags(write=False)
    return PadeSqrt(K, b0, b, eta, float(d0), d)


def eval_rational(p: PadeSqrt, power: float, z):
    """Evaluate ``R^{1/2}`` (``power=0.5``) or ``R^{-1/2}`` (``power=-0.5``) at ``z``."""
    z = np.asarray(z, dtype=complex)
    denom = z[..., None] + p.eta ** 2
    hit = np.isclose(denom, 0.0, atol=1e-300, rtol=0.0)
    if np.any(hit):
        k = int(np.argwhere(hit)[0][-1]) + 1
        raise ZeroDivisionError(f"z hits the pole of term k={k}")
    if power == 0.5:
        return p.b0 - np.sum(p.b / denom, axis=-1)
    if power == -0.5:
        if np.any(z == 0):
            raise ZeroDivisionError("z = 0 is the pole of the d0 term")
        return p.d0 / z - np.sum(p.d / denom, axis=-1)
    raise ValueError("power must be +1/2 or -1/2")


@dataclass(frozen=True)
class DiscretePadeCoeffs:
    """Constants of a one-step discretization of the Padé auxiliary ODEs.

    ``b_bar = b/sqrt(rho)`` and ``d_bar = d*sqrt(rho)`` (likewise for b0, d0)
    make the fully discrete system equivalent to stepping the auxiliary
    ODE system; see ``autonomous`` for the check.
    """

    scheme: str
    dt: float
    rho: float
    K: int
    alpha1: complex
    alpha2: complex
    eta_bar: np.ndarray
    G: np.ndarray
    H: np.ndarray
    b_bar: np.ndarray
    d_bar: np.ndarray
    b0_bar: float
    d0_bar: float
    gamma_plus: np.ndarray
    gamma_minus: np.ndarray
    varpi_plus: float
    varpi_minus: float


def alpha_of(rho: float, beta: float) -> complex:
    return np.sqrt(rho / beta) * np.exp(-0.25j * np.pi)


def discrete_pade(scheme: str, dt: float, beta1: float, beta2: float, K: int) -> DiscretePadeCoeffs:
    rho = rho_of(scheme, dt)
    p = pade_sqrt(K)
    sr = np.sqrt(rho)
    eta_bar = p.eta / sr
    G = 1.0 / (1.0 + eta_bar ** 2)
    H = (1.0 - eta_bar ** 2) / (1.0 + eta_bar ** 2)
    b_bar, d_bar = p.b / sr, p.d * sr
    b0_bar, d0_bar = p.b0 / sr, p.d0 * sr
    gp, gm = b_bar * G, d_bar * G
    return DiscretePadeCoeffs(
        scheme=scheme, dt=dt, rho=rho, K=K,
        alpha1=alpha_of(rho, beta1), alpha2=alpha_of(rho, beta2),
        eta_bar=eta_bar, G=G, H=H, b_bar=b_bar, d_bar=d_bar,
        b0_bar=b0_bar, d0_bar=d0_bar, gamma_plus=gp, gamma_minus=gm,
        varpi_plus=float(b0_bar - gp.sum() / rho),
        varpi_minus=float(d0_bar / rho - gm.sum() / rho),
    )
