import math

import numpy as np
import pytest

from mbfem import (
    build_space,
    evaluate_expansion,
    gauss_legendre,
    interpolate,
    l2_norm,
    natural_cubic_spline,
    space_from_breakpoints,
)
from mbfem.discretization import lagrange_table


def test_gauss_rule_integrates_polynomials_exactly():
    # q points are exact through degree 2q-1
    for q in (1, 2, 3, 5):
        rule = gauss_legendre(q)
        assert rule.points.shape == (q,)
        assert rule.weights.sum() == pytest.approx(2.0, rel=1e-14)
        for deg in range(2 * q):
            quad = float(rule.weights @ rule.points**deg)
            exact = (1.0 - (-1.0) ** (deg + 1)) / (deg + 1)
            assert quad == pytest.approx(exact, abs=1e-13)


def test_space_shapes_linear():
    space = build_space(2, 1, 2)
    assert space.n_dofs == 3
    assert np.allclose(space.dof_positions, [0.0, 0.5, 1.0])
    assert space.n_elements == 2


def test_space_shapes_quadratic():
    space = build_space(4, 2, 3)
    assert space.n_dofs == 9
    assert space.h == pytest.approx(0.25)
    assert space.quad_points_per_element == 3


def test_space_rejects_bad_arguments():
    with pytest.raises(ValueError):
        build_space(0, 1)
    with pytest.raises(ValueError):
        build_space(4, 0)
    with pytest.raises(ValueError):
        space_from_breakpoints([0.0, 0.5, 0.4, 1.0], 1)
    with pytest.raises(ValueError):
        space_from_breakpoints([0.1, 0.5, 1.0], 1)  # must start at 0


def test_basis_cardinality():
    space = build_space(3, 3)
    nodes = np.linspace(-1.0, 1.0, 4)
    vals, _ = space.eval_basis(0, nodes)
    assert np.allclose(vals, np.eye(4), atol=1e-13)


def test_basis_linear_midpoint():
    space = build_space(2, 1)
    vals, _ = space.eval_basis(1, np.array([0.0]))
    assert np.allclose(vals, [[0.5, 0.5]], atol=1e-15)


def test_basis_quadratic_matches_closed_form():
    # cardinal quadratics on nodes {-1, 0, 1}
    space = build_space(4, 2)
    pts = gauss_legendre(3).points
    vals, ders = space.eval_basis(2, pts)
    expected = np.column_stack([pts * (pts - 1.0) / 2.0, 1.0 - pts**2, pts * (pts + 1.0) / 2.0])
    expected_d = np.column_stack([pts - 0.5, -2.0 * pts, pts + 0.5])
    assert np.allclose(vals, expected, atol=1e-13)
    assert np.allclose(ders, expected_d, atol=1e-13)


def test_lagrange_table_partition_of_unity():
    nodes = np.linspace(-1.0, 1.0, 6)
    x = np.linspace(-1.0, 1.0, 40)
    vals, ders = lagrange_table(nodes, x)
    assert np.allclose(vals.sum(axis=1), 1.0, atol=1e-12)
    assert np.allclose(ders.sum(axis=1), 0.0, atol=1e-11)


def test_interpolate_reproduces_polynomial():
    space = build_space(3, 2)
    coeffs = interpolate(space, lambda y: y * (1.0 - y))
    y = np.linspace(0.0, 1.0, 57)
    assert np.allclose(evaluate_expansion(space, coeffs, y), y * (1.0 - y), atol=1e-14)


def test_interpolate_zero():
    space = build_space(4, 3)
    assert np.all(interpolate(space, lambda y: 0.0 * y) == 0.0)


def test_interpolate_forces_boundary_dofs():
    space = build_space(2, 1)
    coeffs = interpolate(space, lambda y: np.ones_like(y))
    assert coeffs[0] == 0.0 and coeffs[-1] == 0.0
    assert coeffs[1] == 1.0


def test_interpolation_error_scales_with_degree():
    u = lambda y: np.sin(np.pi * y)
    for k in (1, 2, 3):
        errs = []
        for nt in (4, 8, 16):
            space = build_space(nt, k)
            coeffs = interpolate(space, u)
            diff = evaluate_expansion(space, coeffs, np.linspace(0, 1, 201)) - u(np.linspace(0, 1, 201))
            errs.append(np.max(np.abs(diff)))
        ratio = errs[0] / errs[1]
        assert 2.0 ** (k + 1) * 0.7 < ratio < 2.0 ** (k + 1) * 1.4


def test_l2_norm_values():
    space = build_space(4, 1)
    assert l2_norm(space, np.zeros(space.n_dofs)) == 0.0
    assert l2_norm(space, np.ones(space.n_dofs)) == pytest.approx(1.0, rel=1e-14)
    coeffs = space.dof_positions.copy()  # nodal interpolant of y
    assert l2_norm(space, coeffs) == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-13)


def test_evaluate_expansion_outside_domain_raises():
    space = build_space(2, 1)
    with pytest.raises(ValueError):
        evaluate_expansion(space, np.zeros(3), np.array([1.5]))


def test_natural_spline_through_collinear_knots_is_linear():
    spline = natural_cubic_spline([(0.0, 1.0), (0.4, 1.8), (1.0, 3.0)])
    x = np.linspace(0.0, 1.0, 33)
    assert np.allclose(spline(x), 1.0 + 2.0 * x, atol=1e-12)
    assert np.allclose(spline(x, 2), 0.0, atol=1e-10)


def test_natural_spline_interpolates_knots():
    knots = [(0.0, 0.0), (0.2, 1.0), (0.5, 0.5), (1.0, 0.0)]
    spline = natural_cubic_spline(knots)
    for x, v in knots:
        assert spline(x) == pytest.approx(v, abs=1e-14)
    # natural end conditions: vanishing second derivative
    assert spline(0.0, 2) == pytest.approx(0.0, abs=1e-10)
    assert spline(1.0, 2) == pytest.approx(0.0, abs=1e-10)


def test_natural_spline_rejects_bad_knots():
    with pytest.raises(ValueError):
        natural_cubic_spline([(0.0, 0.0), (1.0, 1.0)])
    with pytest.raises(ValueError):
        natural_cubic_spline([(0.0, 0.0), (0.5, 1.0), (0.5, 2.0), (1.0, 0.0)])
