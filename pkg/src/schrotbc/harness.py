"""Experiment drivers: run configuration, error evolution, convergence studies, field dumps."""
from __future__ import annotations

import csv
import dataclasses
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .exact import FAMILIES, TYPES, Profile, profile_from_table
from .hf import HFConfig, HFSolver
from .spectral import DomainMap, SpectralSpace
from .tbc import TBCConfig, TBCSolver

ENGINES = ("HF", "TBC")
DESK_T_MAX = 1.5
DESK_DTS = tuple(DESK_T_MAX * 2.0 ** -k for k in range(7, 12))
FLOAT_FMT = "{:.16e}"


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce one run.

    Defaults are the desk-scale setup; :meth:`paper_parity` gives the
    full-size configuration.
    """

    domain: tuple = (-6.0, 6.0, -6.0, 6.0)
    N1: int = 64
    N2: int = 64
    dt: float = DESK_T_MAX * 2.0 ** -11
    T_max: float = DESK_T_MAX
    engine: str = "TBC"
    variant: str = "NP"
    stepper: str = "TR"
    K: int = 30
    family: str = "CG"
    kind: str = "IIA"
    c0: float = 8.0
    out_dir: str = "out"
    dump_times: tuple = ()
    dts: tuple = DESK_DTS
    jobs: int = 1

    def __post_init__(self):
        try:
            DomainMap(*self.domain)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad domain {self.domain!r}: {exc}") from None
        if min(self.N1, self.N2) < 3:
            raise ConfigError("N1 and N2 must be >= 3")
        if not (self.dt > 0 and self.T_max > 0):
            raise ConfigError("dt and T_max must be positive")
        n = self.T_max / self.dt
        if abs(n - round(n)) > 1e-8 * max(1.0, n):
            raise ConfigError(f"T_max={self.T_max} is not a multiple of dt={self.dt}")
        if self.engine not in ENGINES:
            raise ConfigError(f"engine must be one of {ENGINES}")
        if self.family not in FAMILIES or self.kind not in TYPES:
            raise ConfigError(f"profile must be one of {FAMILIES} x {TYPES}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        try:
            self.solver_config()
        except ValueError as exc:
            raise ConfigError(f"invalid {self.engine} combination: {exc}") from None

    @classmethod
    def paper_parity(cls, **overrides) -> "RunConfig":
        """Full-size setup: (-10, 10)^2, 200 x 200 LGL points, T = 5, dt = 1e-3."""
        base = dict(domain=(-10.0, 10.0, -10.0, 10.0), N1=199, N2=199, dt=1e-3, T_max=5.0,
                    dts=tuple(2.0 ** -k for k in range(8, 17)))
        base.update(overrides)
        return cls(**base)

    @property
    def n_steps(self) -> int:
        return int(round(self.T_max / self.dt))

    @property
    def label(self) -> str:
        name = f"{self.variant}-{self.stepper}"
        return f"{name}(HF)" if self.engine == "HF" and self.variant == "CQ" else name

    def solver_config(self):
        if self.engine == "HF":
            return HFConfig(self.variant, self.stepper, self.dt, self.K)
        return TBCConfig(self.variant, self.stepper, self.dt, self.K)

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)


# -- config files --------------------------------------------------------

def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(";", ",").split(",") if v.strip())


_PARSERS: dict[str, Callable] = {
    "domain": _floats,
    "N1": int, "N2": int, "dt": float, "T_max": float, "K": int, "c0": float, "jobs": int,
    "engine": str.upper, "variant": str.upper, "stepper": str.upper,
    "family": str.upper, "kind": str.upper, "out_dir": str,
    "dump_times": _floats, "dts": _floats,
}
_ALIASES = {"profile": "family", "type": "kind", "t_max": "T_max", "out": "out_dir",
            "n1": "N1", "n2": "N2", "k": "K"}


def parse_assignments(items: Sequence[str]) -> dict:
    """Turn ``key=value`` strings into typed ``RunConfig`` fields.

    ``N`` sets both degrees and ``nt`` sets ``dt`` from ``T_max``.
    """
    out: dict = {}
    nt = None
    for raw in items:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, _ALIASES.get(key.lower(), key))
        try:
            if key == "N":
                out["N1"] = out["N2"] = int(value)
            elif key.lower() == "nt":
                nt = int(value)
            elif key in _PARSERS:
                out[key] = _PARSERS[key](value)
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None
    if nt is not None:
        if nt < 2:
            raise ConfigError("nt must be >= 2")
        out["dt"] = out.get("T_max", RunConfig.T_max) / (nt - 1)
    return out


def load_config(path: str | os.PathLike | None = None, overrides: Sequence[str] = ()) -> RunConfig:
    lines: list[str] = []
    if path is not None:
        try:
            lines = Path(path).read_text().splitlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
    values = parse_assignments(lines)
    values.update(parse_assignments(overrides))
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# -- building blocks --------------------------------------------------------

def build_space(cfg: RunConfig) -> SpectralSpace:
    return SpectralSpace(DomainMap(*cfg.domain), cfg.N1, cfg.N2)


def build_profile(cfg: RunConfig) -> Profile:
    return profile_from_table(cfg.family, cfg.kind, cfg.c0)


def build_solver(cfg: RunConfig, space: SpectralSpace, U0):
    solver_cls = HFSolver if cfg.engine == "HF" else TBCSolver
    return solver_cls(space, U0, cfg.solver_config())


class ErrorMonitor:
    """Relative L2 error against an exact solution on the solver's LGL grid."""

    def __init__(self, space: SpectralSpace, exact: Callable):
        self.space = space
        self.exact = exact
        x1, x2 = space.nodes()
        self._x1, self._x2 = x1[:, None], x2[None, :]
        self.norm0 = space.norm_nodal(exact(self._x1, self._x2, 0.0))
        if self.norm0 == 0.0:
            raise ZeroDivisionError("initial data has zero norm")

    def __call__(self, U, t: float) -> float:
        diff = self.space.nodal(U) - self.exact(self._x1, self._x2, t)
        return self.space.norm_nodal(diff) / self.norm0


@dataclass
class EvolutionResult:
    config: RunConfig
    t: np.ndarray
    error: np.ndarray

    @property
    def max_error(self) -> float:
        return float(np.max(self.error))

    def floor(self, t_from: float) -> float:
        """Median error over ``t >= t_from`` (the late-time error background)."""
        sel = self.t >= t_from - 1e-12
        if not np.any(sel):
            raise ValueError("no samples in the floor window")
        return float(np.median(self.error[sel]))


def write_csv(path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([FLOAT_FMT.format(v) if isinstance(v, float) else v for v in row])
    return path


def run_evolution(cfg: RunConfig, csv_path: str | os.PathLike | None = None) -> EvolutionResult:
    """Run to ``T_max`` and record ``e(t_j)`` after every step (``t_0`` included)."""
    space = build_space(cfg)
    exact = build_profile(cfg)
    U0 = space.interpolate(exact)
    solver = build_solver(cfg, space, U0)
    monitor = ErrorMonitor(space, exact)
    ts, errs = [0.0], [monitor(U0, 0.0)]

    def record(s):
        ts.append(s.time)
        errs.append(monitor(s.U, s.time))

    solver.run(cfg.n_steps, record)
    res = EvolutionResult(cfg, np.array(ts), np.array(errs))
    if csv_path is not None:
        write_csv(csv_path, ["t", "e"], zip(map(float, res.t), map(float, res.error)))
    return res


# -- convergence --------------------------------------------------------------

@dataclass
class SlopeFit:
    slope: float | None
    used: np.ndarray


def fit_slope(dts, errors, plateau_factor: float = 2.0, min_points: int = 3) -> SlopeFit:
    """Least-squares slope of ``log e`` against ``log dt`` before the plateau.

    Points within ``plateau_factor`` of the smallest error are treated as
    plateau and dropped; fewer than ``min_points`` survivors give ``None``.
    """
    dts = np.asarray(dts, float)
    errors = np.asarray(errors, float)
    if dts.shape != errors.shape or dts.size == 0:
        raise ValueError("dts and errors must be non-empty and of equal length")
    used = errors > plateau_factor * errors.min()
    if used.sum() < min_points:
        return SlopeFit(None, used)
    slope = np.polyfit(np.log(dts[used]), np.log(errors[used]), 1)[0]
    return SlopeFit(float(slope), used)


@dataclass
class ConvergenceResult:
    config: RunConfig
    dts: np.ndarray
    max_errors: np.ndarray
    fit: SlopeFit

    @property
    def slope(self) -> float | None:
        return self.fit.slope


def _max_error(cfg: RunConfig) -> float:
    return run_evolution(cfg).max_error


def run_convergence(cfg: RunConfig, dts: Sequence[float] | None = None,
                    csv_path: str | os.PathLike | None = None) -> ConvergenceResult:
    dts = tuple(cfg.dts if dts is None else dts)
    if len(dts) < 4:
        raise ConfigError("a convergence study needs at least 4 time steps")
    cfgs = [cfg.replace(dt=float(dt)) for dt in dts]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            errs = list(pool.map(_max_error, cfgs))
    else:
        errs = [_max_error(c) for c in cfgs]
    res = ConvergenceResult(cfg, np.array(dts), np.array(errs), fit_slope(dts, errs))
    if csv_path is not None:
        write_csv(csv_path, ["dt", "e_max", "used"],
                  [(float(d), float(e), int(u)) for d, e, u in zip(dts, errs, res.fit.used)])
        slope = "undefined" if res.slope is None else FLOAT_FMT.format(res.slope)
        Path(csv_path).with_suffix(".slope").write_text(f"{slope}\n")
    return res


# -- field dumps --------------------------------------------------------------

DUMP_POINTS = 256
LOG_FLOOR = -16.0


def write_field_dump(path, space: SpectralSpace, U, t: float, n: int = DUMP_POINTS) -> Path:
    dom = space.dom
    x1 = np.linspace(dom.x_l, dom.x_r, n)
    x2 = np.linspace(dom.x_b, dom.x_t, n)
    vals = space.evaluate(U, x1, x2)
    with np.errstate(divide="ignore"):
        logs = np.maximum(np.log10(np.abs(vals)), LOG_FLOOR)
    X1, X2 = np.meshgrid(x1, x2, indexing="ij")
    table = np.column_stack([X1.ravel(), X2.ravel(), vals.real.ravel(), vals.imag.ravel(), logs.ravel()])
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = (f"nx {n}\nny {n}\n"
              f"domain {FLOAT_FMT.format(dom.x_l)} {FLOAT_FMT.format(dom.x_r)} "
              f"{FLOAT_FMT.format(dom.x_b)} {FLOAT_FMT.format(dom.x_t)}\n"
              f"t {FLOAT_FMT.format(t)}\n"
              "columns x1 x2 re im log10abs")
    np.savetxt(path, table, fmt="%.16e", header=header, comments="# ")
    return path


@dataclass
class FieldDump:
    nx: int
    ny: int
    domain: tuple
    t: float
    data: np.ndarray = field(repr=False)


def read_field_dump(path) -> FieldDump:
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            parts = line[1:].split()
            if parts:
                meta[parts[0]] = parts[1:]
    try:
        nx, ny = int(meta["nx"][0]), int(meta["ny"][0])
        domain = tuple(float(v) for v in meta["domain"])
        t = float(meta["t"][0])
    except (KeyError, IndexError, ValueError) as exc:
        raise ValueError(f"malformed field dump header in {path}") from exc
    data = np.loadtxt(path, comments="#")
    return FieldDump(nx, ny, domain, t, data)


def dump_field(cfg: RunConfig, times: Sequence[float] | None = None, out_dir=None) -> list[Path]:
    """Write the numerical field on a uniform grid at each requested time."""
    times = sorted(cfg.dump_times if times is None else times)
    for t in times:
        if not 0 <= t <= cfg.T_max + 1e-12:
            raise ConfigError(f"dump time {t} outside [0, {cfg.T_max}]")
    out_dir = Path(cfg.out_dir if out_dir is None else out_dir)
    space = build_space(cfg)
    U0 = space.interpolate(build_profile(cfg))
    solver = build_solver(cfg, space, U0)
    paths = []
    for t in times:
        target = int(round(t / cfg.dt))
        solver.run(target - solver.j)
        name = f"field_{cfg.variant}-{cfg.stepper}_t{solver.time:.6f}.txt"
        paths.append(write_field_dump(out_dir / name, space, solver.U, solver.time))
    return paths


# -- operator dumps -----------------------------------------------------------

def write_triplets(path, matrix) -> Path:
    """Sparse triplet text file: ``rows cols nnz`` header, then ``i j re im`` (1-based)."""
    A = sp.coo_matrix(matrix)
    A.sum_duplicates()
    order = np.lexsort((A.row, A.col))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = A.data.astype(complex)
    with path.open("w") as fh:
        fh.write(f"# rows cols nnz\n{A.shape[0]} {A.shape[1]} {A.nnz}\n")
        for k in order:
            fh.write(f"{A.row[k] + 1} {A.col[k] + 1} "
                     f"{FLOAT_FMT.format(data[k].real)} {FLOAT_FMT.format(data[k].imag)}\n")
    return path


def read_triplets(path):
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows, cols, _ = (int(v) for v in lines[0].split())
    body = np.loadtxt(lines[1:], ndmin=2) if len(lines) > 1 else np.zeros((0, 4))
    vals = body[:, 2] + 1j * body[:, 3]
    return sp.coo_matrix((vals, (body[:, 0].astype(int) - 1, body[:, 1].astype(int) - 1)),
                         shape=(rows, cols))


def dump_matrices(cfg: RunConfig, out_dir=None) -> list[Path]:
    """Write the 1D operators and the factored left-hand side of the configured scheme."""
    out_dir = Path(cfg.out_dir if out_dir is None else out_dir)
    space = build_space(cfg)
    solver = build_solver(cfg, space, np.zeros(space.shape, complex))
    paths = []
    for p, ops in ((1, space.ops1), (2, space.ops2)):
        for name in ("M", "S", "Lam"):
            paths.append(write_triplets(out_dir / f"{name}{p}.txt", getattr(ops, name)))
    lhs = solver.lhs if cfg.engine == "TBC" else solver.scheme(cfg.stepper).lhs
    paths.append(write_triplets(out_dir / f"lhs_{cfg.variant}-{cfg.stepper}.txt", lhs.op.sparse()))
    return paths
