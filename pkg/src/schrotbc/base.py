"""Common state handling for the time steppers."""
from __future__ import annotations

import warnings

import numpy as np

from .spectral import SpectralSpace

SUPPORT_TOL = 1e-8


class Stepper:
    """Mutable stepping state: field coefficients ``U`` at time level ``j``."""

    def __init__(self, space: SpectralSpace, U0, dt: float):
        U0 = np.array(U0, dtype=complex)
        if U0.shape != space.shape:
            raise ValueError(f"initial coefficients have shape {U0.shape}, expected {space.shape}")
        if not dt > 0:
            raise ValueError("time step must be positive")
        self.space = space
        self.dt = float(dt)
        self.U = U0
        self.j = 0
        norm = space.norm(U0)
        trace = np.sqrt(np.sum(np.abs(U0[:2]) ** 2) + np.sum(np.abs(U0[:, :2]) ** 2))
        if trace > SUPPORT_TOL * norm:
            warnings.warn(
                f"initial boundary trace {trace:.2e} exceeds {SUPPORT_TOL:g} x norm {norm:.2e};"
                " the boundary conditions assume data supported inside the domain",
                RuntimeWarning, stacklevel=3)

    @property
    def time(self) -> float:
        return self.j * self.dt

    def step(self):
        raise NotImplementedError

    def run(self, n_steps: int, callback=None):
        """Advance ``n_steps`` times, calling ``callback(solver)`` after each step."""
        for _ in range(int(n_steps)):
            self.step()
            if not np.all(np.isfinite(self.U)):
                raise FloatingPointError(f"non-finite field at step {self.j}")
            if callback is not None:
                callback(self)
        return self.U

    def state_size(self) -> int:
        """Number of complex scalars the stepper keeps between steps."""
        raise NotImplementedError
