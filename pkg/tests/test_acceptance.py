"""Acceptance criteria 1-11.

Each test prints one ``criterion N: PASS|FAIL`` line (outside pytest's capture)
and then asserts the criterion as stated.  Criteria 7-9 run the full solvers at
desk scale and take several minutes together.
"""
import time
import warnings

import numpy as np
import pytest

from conftest import gram
from schrotbc import harness, kron
from schrotbc.autonomous import assemble_autonomous, reference_step
from schrotbc.exact import energy_content, profile_from_table
from schrotbc.harness import RunConfig
from schrotbc.hf import HFConfig, HFSolver
from schrotbc.rational import cq_weights, eval_rational, pade_sqrt
from schrotbc.spectral import DomainMap, SpectralSpace, assemble_ops
from schrotbc.tbc import TBCConfig, TBCSolver

from test_rational import taylor_oracle

PAPER_VARIANTS = [("TBC", "NP", "BDF1"), ("TBC", "NP", "TR"),
                  ("HF", "CQ", "BDF1"), ("HF", "CQ", "BDF2"), ("HF", "CQ", "TR"),
                  ("HF", "CP", "BDF1"), ("HF", "CP", "BDF2"), ("HF", "CP", "TR")]
HF_VARIANTS = [v for v in PAPER_VARIANTS if v[0] == "HF"]


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    return emit


def label(engine, variant, stepper):
    return f"{variant}-{stepper}" + ("(HF)" if engine == "HF" and variant == "CQ" else "")


# 1 ----------------------------------------------------------------------------

def closed_form_mass(N):
    n = N + 1
    M = np.zeros((n, n))
    M[:2, :2] = [[2 / 3, 1 / 3], [1 / 3, 2 / 3]]
    for k in range(2, n):
        M[k, k] = 2 / ((2 * k + 1) * (2 * k - 3))
        if k + 2 < n:
            M[k, k + 2] = M[k + 2, k] = -1 / ((2 * k + 1) * np.sqrt((2 * k - 1) * (2 * k + 3)))
    M[0, 2] = M[2, 0] = M[1, 2] = M[2, 1] = -1 / np.sqrt(6)
    M[0, 3] = M[3, 0] = 1 / (3 * np.sqrt(10))
    M[1, 3] = M[3, 1] = -1 / (3 * np.sqrt(10))
    return M


def test_criterion_01_matrix_closed_forms(report):
    t0 = time.perf_counter()
    worst_closed = worst_gram = 0.0
    printed_ratio_ok = True
    for N in (4, 8, 16, 32):
        ops = assemble_ops(N)
        S = np.eye(N + 1)
        S[:2, :2] = [[0.5, -0.5], [-0.5, 0.5]]
        worst_closed = max(worst_closed, np.abs(ops.M - closed_form_mass(N)).max(),
                           np.abs(ops.S - S).max())
        worst_gram = max(worst_gram, np.abs(ops.M - gram(N, 0)).max(), np.abs(ops.S - gram(N, 1)).max())
        for k in range(2, N - 1):
            printed = -1 / np.sqrt((2 * k - 1) * (2 * k + 3))
            printed_ratio_ok &= abs(printed / ops.M[k, k + 2] - (2 * k + 1)) < 1e-12
    elapsed = time.perf_counter() - t0
    ok = worst_closed <= 1e-14 and worst_gram <= 1e-13 and printed_ratio_ok and elapsed < 1
    report(1, ok, f"closed-form dev {worst_closed:.1e}, Gram dev {worst_gram:.1e}, "
                  f"printed M_k,k+2 off by (2k+1): {printed_ratio_ok}, {elapsed:.2f}s")
    assert ok


# 2 ----------------------------------------------------------------------------

def test_criterion_02_cq_weights(report):
    t0 = time.perf_counter()
    worst = 0.0
    for scheme in ("BDF1", "BDF2", "TR"):
        for nu in (0.5, -0.5):
            w = cq_weights(scheme, nu, 64).omega
            worst = max(worst, np.abs(w - taylor_oracle(scheme, nu, 64)).max())
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed < 1
    report(2, ok, f"max deviation {worst:.1e} over 3 schemes x 2 nu x 64 weights, {elapsed:.2f}s")
    assert ok


# 3 ----------------------------------------------------------------------------

def half_derivative_errors(scheme, ns=(128, 256, 512, 1024)):
    errs = []
    exact = lambda t: 2 * np.sqrt(t / np.pi)
    for n in ns:
        dt = 1.0 / n
        w = cq_weights(scheme, 0.5, n + 1, dt=dt)
        f = np.arange(n + 1) * dt
        def d(level):
            return w.rho ** 0.5 * np.dot(w.omega[:level + 1][::-1], f[:level + 1])
        if scheme == "TR":
            # the TR steppers use the mean of two consecutive levels
            errs.append(abs(0.5 * (d(n) + d(n - 1)) - 0.5 * (exact(1.0) + exact(1.0 - dt))))
        else:
            errs.append(abs(d(n) - exact(1.0)))
    return np.array(errs)


def test_criterion_03_half_derivative_convergence(report):
    t0 = time.perf_counter()
    slopes = {}
    for scheme in ("BDF1", "BDF2", "TR"):
        e = half_derivative_errors(scheme)
        slopes[scheme] = np.polyfit(np.log([1 / 128, 1 / 256, 1 / 512, 1 / 1024]), np.log(e), 1)[0]
    elapsed = time.perf_counter() - t0
    ok = (abs(slopes["BDF1"] - 1) <= 0.25 and abs(slopes["BDF2"] - 2) <= 0.25
          and abs(slopes["TR"] - 2) <= 0.25 and elapsed < 5)
    report(3, ok, ", ".join(f"{k} slope {v:.3f}" for k, v in slopes.items()) + f", {elapsed:.2f}s")
    assert ok


# 4 ----------------------------------------------------------------------------

def test_criterion_04_pade_identities(report):
    rng = np.random.default_rng(4)
    z = rng.uniform(1e-3, 10, 100) + 1j * rng.uniform(-10, 10, 100)
    at_one = max(abs(eval_rational(pade_sqrt(K), 0.5, 1.0) - 1) for K in range(1, 31))
    inverse = 0.0
    for K in range(1, 31):
        p = pade_sqrt(K)
        r = eval_rational(p, 0.5, z)
        inverse = max(inverse, np.max(np.abs(eval_rational(p, -0.5, z) - r / z) / np.maximum(1, np.abs(r / z))))
    ok = at_one <= 1e-12 and inverse <= 1e-12
    report(4, ok, f"|R(1)-1| max {at_one:.1e}, R^-1/2 vs R^1/2/z max {inverse:.1e}")
    assert ok


# 5 ----------------------------------------------------------------------------

def test_criterion_05_kronecker_solver(report):
    rng = np.random.default_rng(5)
    worst = 0.0
    for trial in range(40):
        n1, n2 = rng.integers(1, 9, size=2)
        terms = [(rng.standard_normal() + 1j * rng.standard_normal(),
                  rng.standard_normal((n1, n1)) + 1j * rng.standard_normal((n1, n1)),
                  rng.standard_normal((n2, n2)) + 1j * rng.standard_normal((n2, n2)))
                 for _ in range(4)]
        op = kron.assemble(terms)
        F = rng.standard_normal((n1, n2)) + 1j * rng.standard_normal((n1, n2))
        X = kron.factor(op).solve(F).reshape(-1, order="F")
        ref = np.linalg.inv(op.dense()) @ F.reshape(-1, order="F")
        worst = max(worst, np.abs(X - ref).max() / max(1.0, np.abs(ref).max()))
    op = kron.assemble([(1.0, np.eye(8) * 3 + rng.standard_normal((8, 8)), np.eye(7)),
                        (0.5j, np.eye(8), rng.standard_normal((7, 7)))])
    f0, s0 = kron.stats.factorizations, kron.stats.solves
    fac = kron.factor(op)
    for _ in range(100):
        fac.solve(rng.standard_normal((8, 7)))
    counts = (kron.stats.factorizations - f0, kron.stats.solves - s0)
    ok = worst <= 1e-11 and counts == (1, 100)
    report(5, ok, f"max relative deviation {worst:.1e}, (factorizations, solves) = {counts}")
    assert ok


# 6 ----------------------------------------------------------------------------

def test_criterion_06_autonomous_equivalence(report):
    t0 = time.perf_counter()
    space = SpectralSpace(DomainMap(-4.0, 5.0, -3.0, 4.0), 6, 6)
    rng = np.random.default_rng(6)
    worst = 0.0
    for K in (1, 2):
        sysm = assemble_autonomous(space, K)
        for scheme in ("BDF1", "TR"):
            U0 = np.zeros(space.shape, complex)
            U0[2:, 2:] = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
            dt = 0.02
            solver = HFSolver(space, U0, HFConfig("CP", scheme, dt, K=K))
            V = sysm.pack(U0)
            for _ in range(50):
                solver.step()
                V = reference_step(sysm, V, dt, scheme)
                U = sysm.unpack(V)[0]
                worst = max(worst, np.abs(solver.U - U).max() / np.abs(U).max())
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10
    report(6, ok, f"max relative deviation {worst:.1e} (K=1,2; BDF1, TR; 50 steps), {elapsed:.1f}s")
    assert ok


# 7 ----------------------------------------------------------------------------

def test_criterion_07_interior_accuracy(report):
    t0 = time.perf_counter()
    errs = {}
    for engine, variant, stepper in PAPER_VARIANTS:
        cfg = RunConfig(domain=(-10.0, 10.0, -10.0, 10.0), N1=64, N2=64, T_max=0.1, dt=1e-3,
                        engine=engine, variant=variant, stepper=stepper, c0=0.0)
        errs[label(engine, variant, stepper)] = harness.run_evolution(cfg).max_error
    elapsed = time.perf_counter() - t0
    ok = max(errs.values()) <= 1e-6 and elapsed < 120
    report(7, ok, ", ".join(f"{k} {v:.1e}" for k, v in errs.items()) + f", {elapsed:.0f}s")
    assert ok


# 8 ----------------------------------------------------------------------------

# Desk Δt set for the second-order steppers; BDF1 needs a finer window to leave
# its pre-asymptotic regime at c0 = 8 (see the decisions ledger).
DTS_SECOND_ORDER = harness.DESK_DTS
DTS_FIRST_ORDER = tuple(harness.DESK_T_MAX * 2.0 ** -k for k in range(10, 15))
CRITERION_8 = [
    (("TBC", "NP", "BDF1"), (0.8, 1.2), DTS_FIRST_ORDER),
    (("HF", "CQ", "BDF1"), (0.8, 1.2), DTS_FIRST_ORDER),
    (("TBC", "NP", "TR"), (1.7, 2.3), DTS_SECOND_ORDER),
    (("HF", "CQ", "TR"), (1.7, 2.3), DTS_SECOND_ORDER),
    (("HF", "CP", "TR"), (1.7, 2.3), DTS_SECOND_ORDER),
    (("HF", "CQ", "BDF2"), (1.6, 2.4), DTS_SECOND_ORDER),
    (("HF", "CP", "BDF2"), (1.6, 2.4), DTS_SECOND_ORDER),
]


def test_criterion_08_convergence_orders(report):
    t0 = time.perf_counter()
    results, ok = [], True
    for (engine, variant, stepper), (lo, hi), dts in CRITERION_8:
        cfg = RunConfig(engine=engine, variant=variant, stepper=stepper, N1=64, N2=64,
                        T_max=1.5, family="CG", kind="IIA", c0=8.0, K=30)
        res = harness.run_convergence(cfg, dts)
        good = res.slope is not None and lo <= res.slope <= hi
        ok &= good
        shown = "undefined" if res.slope is None else f"{res.slope:.2f}"
        results.append(f"{label(engine, variant, stepper)} {shown}")
    elapsed = time.perf_counter() - t0
    report(8, ok, "slopes " + ", ".join(results) + f", {elapsed:.0f}s")
    assert ok


# 9 ----------------------------------------------------------------------------

# Late-time windows for the error floor: the last sixth of each run.
FLOOR_FROM_A = 1.25
FLOOR_FROM_B = 2.5


@pytest.fixture(scope="module")
def diagonal_runs():
    runs = {}
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message="initial boundary trace")
        for engine, variant, stepper in PAPER_VARIANTS:
            cfg = RunConfig(engine=engine, variant=variant, stepper=stepper, kind="IIB", c0=12.0,
                            N1=80, N2=80)
            runs[label(engine, variant, stepper)] = harness.run_evolution(cfg)
    return runs


def test_criterion_09_qualitative_orderings(report, diagonal_runs):
    t0 = time.perf_counter()
    maxima = {k: r.max_error for k, r in diagonal_runs.items()}
    best = min(maxima, key=maxima.get)
    ok_a = best == "NP-TR"

    hf_labels = [label(*v) for v in HF_VARIANTS]
    floors_b = {k: [] for k in hf_labels}
    for c0 in (4.0, 8.0, 16.0):
        for engine, variant, stepper in HF_VARIANTS:
            cfg = RunConfig(engine=engine, variant=variant, stepper=stepper, kind="IIA", c0=c0,
                            N1=96, N2=96, dt=2e-3, T_max=3.0)
            floors_b[label(engine, variant, stepper)].append(
                harness.run_evolution(cfg).floor(FLOOR_FROM_B))
    ok_b = all(f[0] > f[1] > f[2] for f in floors_b.values())

    np_floor = diagonal_runs["NP-TR"].floor(FLOOR_FROM_A)
    hf_floor = min(diagonal_runs[k].floor(FLOOR_FROM_A) for k in hf_labels)
    ok_c = np_floor < hf_floor

    elapsed = time.perf_counter() - t0
    ok = ok_a and ok_b and ok_c
    trend = "; ".join(f"{k} " + " > ".join(f"{v:.1e}" for v in f) for k, f in floors_b.items())
    report(9, ok, f"(a) smallest max error {best} {maxima[best]:.1e}; "
                  f"(b) HF floors c0=4,8,16: {trend}; "
                  f"(c) NP-TR floor {np_floor:.1e} < best HF floor {hf_floor:.1e}: {ok_c}; "
                  f"{elapsed:.0f}s")
    assert ok_a, maxima
    assert ok_b, floors_b
    assert ok_c

# 10 ---------------------------------------------------------------------------

def test_criterion_10_energy_content(report):
    dom = DomainMap.square(10.0)
    p = profile_from_table("CG", "IIA", 16)
    e0, e5 = energy_content(p, dom, 0.0), energy_content(p, dom, 5.0)
    ok = e0 == 1.0 and e5 <= 1e-2
    report(10, ok, f"E(0) = {e0!r}, E(5) = {e5:.2e}")
    assert ok


# 11 ---------------------------------------------------------------------------

def _sizes(solver, n=100):
    out = []
    for _ in range(n):
        solver.step()
        out.append(solver.state_size())
    return np.array(out)


def test_criterion_11_storage(report):
    space = SpectralSpace(DomainMap.square(6.0), 12, 12)
    U0 = space.interpolate(lambda x1, x2, t: np.exp(-(x1 ** 2 + x2 ** 2)) + 0j)
    np_const = {s: bool(np.ptp(_sizes(TBCSolver(space, U0, TBCConfig("NP", s, 0.01)))) == 0)
                for s in ("BDF1", "TR")}
    cp_const = {s: bool(np.ptp(_sizes(HFSolver(space, U0, HFConfig("CP", s, 0.01)))) == 0)
                for s in ("BDF1", "BDF2", "TR")}
    cq_linear = {}
    for s in ("BDF1", "BDF2", "TR"):
        sizes = _sizes(HFSolver(space, U0, HFConfig("CQ", s, 0.01)))
        cq_linear[s] = bool(len(set(np.diff(sizes))) == 1 and np.diff(sizes)[0] > 0)
    # informational: the exact-TBC CQ reference engine stores a two-time corner grid
    tbc_cq = TBCSolver(space, U0, TBCConfig("CQ", "TR", 0.01))
    tbc_cq.run(100)
    parts = tbc_cq.state_breakdown()
    ok = all(np_const.values()) and all(cp_const.values()) and all(cq_linear.values())
    report(11, ok, f"NP constant {np_const}, CP constant {cp_const}, CQ(HF) linear {cq_linear}; "
                   f"CQ-TBC reference after 100 steps {parts}")
    assert ok
