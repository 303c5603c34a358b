"""Closed-form solutions of ``i u_t + u_x1x1 + u_x2x2 = 0`` used as references.

A profile is a sum of ``n`` separable wave packets, each translated with
velocity ``c_j = c0 (cos theta_j, sin theta_j)`` and modulated by the matching
Galilean carrier ``exp(i c.x/2 - i |c|^2 t/4)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .spectral import DomainMap, lgl_grid

FAMILIES = ("CG", "HG")
TYPES = ("IIA", "IIB")

_TABLE_A = np.array([(1 / 2.5, 1 / 2.4), (1 / 2.3, 1 / 2.2), (1 / 2.7, 1 / 2.6), (1 / 2.2, 1 / 2.5)])
_TABLE_B = np.full((4, 2), 0.5)
_TABLE_M = np.array([(1, 2), (2, 1), (2, 1), (1, 2)])
_THETA_A = np.array([0.0, 0.5, 1.0, 1.5]) * np.pi


def chirped_gaussian_1d(x, t, a, b=0.0):
    """``(1 + 4i(a+ib)t)^{-1/2} exp(-(a+ib) x^2 / (1 + 4i(a+ib)t))``."""
    alpha = a + 1j * b
    s = 1 + 4j * alpha * t
    return np.exp(-alpha * np.asarray(x) ** 2 / s) / np.sqrt(s)


def hermite(m: int, x):
    """Physicists' Hermite polynomial ``H_m`` by the three-term recurrence."""
    x = np.asarray(x)
    h0, h1 = np.ones_like(x), 2.0 * x
    if m == 0:
        return h0
    for n in range(1, m):
        h0, h1 = h1, 2 * x * h1 - 2 * n * h0
    return h1


def hermite_gaussian_1d(x, t, a, m: int):
    """Normalized Hermite-Gaussian of order ``m`` with Gouy phase ``exp(-i m theta(t))``."""
    x = np.asarray(x)
    w = np.sqrt(1 + (4 * a * t) ** 2)
    mu = 1.0 / (1.0 / a + 4j * t)
    theta = np.arctan(4 * a * t)
    gamma = np.sqrt(2.0 ** m * factorial(m) * np.sqrt(np.pi) / np.sqrt(2 * a))
    return (hermite(m, np.sqrt(2 * a) * x / w) * np.sqrt(mu / a)
            * np.exp(-mu * x ** 2 - 1j * m * theta) / gamma)


@dataclass(frozen=True)
class Profile:
    """Superposition of moving chirped-Gaussian (``CG``) or Hermite-Gaussian (``HG``) packets."""

    family: str
    A0: float
    c0: float
    a: np.ndarray        # (n, 2) positive widths
    theta: np.ndarray    # (n,) directions
    b: np.ndarray | None = None   # (n, 2) chirps, CG only
    m: np.ndarray | None = None   # (n, 2) orders, HG only

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown profile family {self.family!r}")
        if np.any(np.asarray(self.a) <= 0):
            raise ValueError("widths a must be positive")
        if self.family == "CG" and self.b is None:
            raise ValueError("CG profile needs chirps b")
        if self.family == "HG" and self.m is None:
            raise ValueError("HG profile needs orders m")

    @property
    def velocities(self) -> np.ndarray:
        return self.c0 * np.stack([np.cos(self.theta), np.sin(self.theta)], axis=1)

    def _factor(self, j: int, p: int, x, t):
        if self.family == "CG":
            return chirped_gaussian_1d(x, t, self.a[j, p], self.b[j, p])
        return hermite_gaussian_1d(x, t, self.a[j, p], int(self.m[j, p]))

    def __call__(self, x1, x2, t: float = 0.0):
        """Evaluate at broadcastable coordinate arrays ``x1``, ``x2``."""
        x1, x2 = np.asarray(x1), np.asarray(x2)
        out = 0j
        for j, (c1, c2) in enumerate(self.velocities):
            carrier1 = np.exp(0.5j * c1 * x1 - 0.25j * c1 * c1 * t)
            carrier2 = np.exp(0.5j * c2 * x2 - 0.25j * c2 * c2 * t)
            out = out + (self._factor(j, 0, x1 - c1 * t, t) * carrier1) \
                * (self._factor(j, 1, x2 - c2 * t, t) * carrier2)
        return self.A0 * out


def eval_cg(profile: Profile, x1, x2, t: float = 0.0):
    if profile.family != "CG":
        raise ValueError("not a chirped-Gaussian profile")
    return profile(x1, x2, t)


def eval_hg(profile: Profile, x1, x2, t: float = 0.0):
    if profile.family != "HG":
        raise ValueError("not a Hermite-Gaussian profile")
    return profile(x1, x2, t)


def profile_from_table(family: str, kind: str, c0: float) -> Profile:
    """Four-packet test profiles: ``IIA`` moves along the axes, ``IIB`` along the diagonals."""
    if kind not in TYPES:
        raise ValueError(f"unknown profile type {kind!r}; expected one of {TYPES}")
    theta = _THETA_A + (0.25 * np.pi if kind == "IIB" else 0.0)
    if family == "CG":
        return Profile("CG", 2.0, float(c0), _TABLE_A.copy(), theta, b=_TABLE_B.copy())
    if family == "HG":
        return Profile("HG", 2.0, float(c0), _TABLE_A.copy(), theta, m=_TABLE_M.copy())
    raise ValueError(f"unknown profile family {family!r}")


def _box_energy(profile: Profile, dom: DomainMap, t: float, N: int) -> float:
    q = lgl_grid(N)
    x1, x2 = dom.to_physical(q.nodes, q.nodes)
    vals = profile(x1[:, None], x2[None, :], t)
    return dom.J1 * dom.J2 * float(q.weights @ (np.abs(vals) ** 2) @ q.weights)


def energy_content(profile: Profile, dom: DomainMap, t: float, N: int = 200) -> float:
    """Fraction of the initial ``|u|^2`` mass that lies inside ``dom`` at time ``t``."""
    e0 = _box_energy(profile, dom, 0.0, N)
    if e0 == 0.0:
        raise ZeroDivisionError("profile has zero energy in the domain at t = 0")
    return _box_energy(profile, dom, t, N) / e0
