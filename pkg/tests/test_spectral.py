import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import legendre

from conftest import gram
from schrotbc.spectral import (DomainMap, SpectralSpace, assemble_ops, corner_values, evaluate,
                               evaluate_nodal, interpolate, lgl_grid, lobatto_eval,
                               lobatto_table, restrict, weighted_l2)


@pytest.mark.parametrize("N", [1, 2, 5, 16, 64])
def test_lgl_nodes_match_roots_of_legendre_derivative(N):
    q = lgl_grid(N)
    interior = np.sort(legendre.Legendre.basis(N).deriv().roots().real) if N > 1 else []
    np.testing.assert_allclose(q.nodes, np.concatenate([[-1.0], interior, [1.0]]), atol=1e-13)
    assert q.weights.sum() == pytest.approx(2.0, abs=1e-13)
    np.testing.assert_allclose(q.nodes, -q.nodes[::-1], atol=0)


def test_lgl_weights_frozen():
    q = lgl_grid(4)
    np.testing.assert_allclose(q.nodes, [-1, -np.sqrt(3 / 7), 0, np.sqrt(3 / 7), 1], atol=1e-15)
    np.testing.assert_allclose(q.weights, [0.1, 49 / 90, 32 / 45, 49 / 90, 0.1], atol=1e-15)


@pytest.mark.parametrize("N", [3, 9, 20])
def test_lgl_exact_for_degree_2N_minus_1(N):
    q = lgl_grid(N)
    for deg in range(2 * N):
        exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
        assert q.weights @ q.nodes ** deg == pytest.approx(exact, abs=1e-13)


def test_lobatto_boundary_values():
    y = np.array([-1.0, 1.0])
    T = lobatto_table(12, y)
    np.testing.assert_allclose(T[0], [1, 0], atol=1e-15)
    np.testing.assert_allclose(T[1], [0, 1], atol=1e-15)
    np.testing.assert_allclose(T[2:], 0, atol=1e-14)


def test_lobatto_frozen_values():
    # phi_2 = (y^2 - 1) sqrt(3/8), phi_3 = y (y^2 - 1) sqrt(5/8)
    assert lobatto_eval(2, 0.3) == pytest.approx((0.09 - 1) * np.sqrt(3 / 8), abs=1e-15)
    assert lobatto_eval(3, 0.3) == pytest.approx(0.3 * (0.09 - 1) * np.sqrt(5 / 8), abs=1e-15)
    assert lobatto_eval(3, 0.3, order=1) == pytest.approx((3 * 0.09 - 1) * np.sqrt(5 / 8), abs=1e-15)


def test_lobatto_derivative_matches_finite_difference():
    y = np.linspace(-0.9, 0.9, 7)
    h = 1e-6
    d = (lobatto_table(10, y + h) - lobatto_table(10, y - h)) / (2 * h)
    np.testing.assert_allclose(lobatto_table(10, y, order=1), d, atol=1e-8)


def test_ops_require_degree_three():
    with pytest.raises(ValueError):
        assemble_ops(2)


@pytest.mark.parametrize("N", [3, 4, 7, 16, 48])
def test_mass_and_stiffness_match_gram_oracle(N):
    ops = assemble_ops(N)
    np.testing.assert_allclose(ops.M, gram(N, 0), atol=1e-13)
    np.testing.assert_allclose(ops.S, gram(N, 1), atol=1e-13)


def test_mass_entries_frozen():
    M = assemble_ops(8).M
    assert M[2, 2] == pytest.approx(2 / 5, abs=1e-16)
    assert M[3, 3] == pytest.approx(2 / 21, abs=1e-16)
    assert M[2, 4] == pytest.approx(-1 / (5 * np.sqrt(21)), abs=1e-16)
    assert M[0, 2] == pytest.approx(-1 / np.sqrt(6), abs=1e-16)
    assert M[0, 3] == pytest.approx(1 / (3 * np.sqrt(10)), abs=1e-16)
    assert M[1, 3] == pytest.approx(-1 / (3 * np.sqrt(10)), abs=1e-16)
    assert M[2, 3] == 0.0


def test_operators_are_symmetric_and_definite():
    ops = assemble_ops(30)
    for A in (ops.M, ops.S):
        np.testing.assert_array_equal(A, A.T)
    assert np.linalg.eigvalsh(ops.M).min() > 0
    assert np.linalg.eigvalsh(ops.S).min() > -1e-14
    np.testing.assert_array_equal(np.diag(ops.Lam), [1, 1] + [0] * 29)
    with pytest.raises(ValueError):
        ops.M[0, 0] = 1.0


def test_interpolation_is_exact_on_polynomials(rng):
    U = rng.standard_normal((7, 9)) + 1j * rng.standard_normal((7, 9))
    np.testing.assert_allclose(interpolate(evaluate_nodal(U)), U, atol=1e-12)
    y1, y2 = rng.uniform(-1, 1, 5), rng.uniform(-1, 1, 4)
    direct = np.einsum("ki,kl,lj->ij", lobatto_table(6, y1), U, lobatto_table(8, y2))
    np.testing.assert_allclose(evaluate(U, y1, y2), direct, atol=1e-13)


def test_interpolate_rejects_mismatched_degrees():
    with pytest.raises(ValueError):
        interpolate(np.zeros((5, 5)), N1=3)
    with pytest.raises(ValueError):
        interpolate(np.zeros(5))


def test_restrict_and_corners():
    U = np.arange(20.0).reshape(4, 5)
    seg = restrict(U)
    np.testing.assert_array_equal(seg.l, U[0])
    np.testing.assert_array_equal(seg.t, U[:, 1])
    np.testing.assert_array_equal(corner_values(U), [[0, 1], [5, 6]])
    # the boundary coefficient arrays are the boundary values of the field
    vals = evaluate(U, np.array([-1.0, 1.0]), lgl_grid(4).nodes)
    np.testing.assert_allclose(vals[0], lobatto_table(4, lgl_grid(4).nodes).T @ seg.l)


def test_domain_map_round_trip():
    dom = DomainMap(-3.0, 5.0, -1.0, 2.0)
    assert (dom.J1, dom.J2) == (4.0, 1.5)
    x1, x2 = dom.to_physical(np.array([-1.0, 0.0, 1.0]), np.array([-1.0, 1.0]))
    np.testing.assert_allclose(x1, [-3, 1, 5])
    np.testing.assert_allclose(x2, [-1, 2])
    np.testing.assert_allclose(dom.to_reference(x1, x2)[0], [-1, 0, 1])
    with pytest.raises(ValueError):
        DomainMap(1.0, 0.0, 0.0, 1.0)


def test_weighted_norm_of_gaussian():
    space = SpectralSpace(DomainMap.square(8.0), 48, 48)
    U = space.interpolate(lambda x1, x2, t: np.exp(-(x1 ** 2 + x2 ** 2) / 2))
    assert space.norm(U) == pytest.approx(np.sqrt(np.pi), rel=1e-12)
    assert weighted_l2(U, space.dom) == space.norm(U)


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 24), st.floats(-1, 1), st.floats(-1, 1))
def test_space_evaluate_matches_closed_form_polynomial(N, y1, y2):
    space = SpectralSpace(DomainMap(-2.0, 2.0, -1.0, 3.0), N, N)
    f = lambda x1, x2, t: (x1 ** 3 - 2 * x1 * x2 + 1j * x2 ** 2) + 0 * x1
    U = space.interpolate(f)
    x1, x2 = space.dom.to_physical(np.array([y1]), np.array([y2]))
    assert space.evaluate(U, x1, x2)[0, 0] == pytest.approx(f(x1[0], x2[0], 0), abs=1e-10)
