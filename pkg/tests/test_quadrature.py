import numpy as np
import pytest

from swesphere import diff_matrix, gll_rule, lagrange_eval


def test_order_one_rule_is_endpoints():
    rule = gll_rule(1)
    assert rule.nodes.tolist() == [-1.0, 1.0]
    assert rule.weights.tolist() == [1.0, 1.0]


def test_order_two_rule():
    # Oracle: roots of (1 - x^2) P_2'(x) = (1 - x^2) 3x and Lobatto weights.
    rule = gll_rule(2)
    np.testing.assert_allclose(rule.nodes, [-1.0, 0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(rule.weights, [1 / 3, 4 / 3, 1 / 3], rtol=1e-15)


def test_order_three_rule():
    rule = gll_rule(3)
    s5 = 1.0 / np.sqrt(5.0)
    np.testing.assert_allclose(rule.nodes, [-1.0, -s5, s5, 1.0], rtol=1e-15)
    np.testing.assert_allclose(rule.weights, [1 / 6, 5 / 6, 5 / 6, 1 / 6], rtol=1e-14)


def test_invalid_order_rejected():
    with pytest.raises(ValueError):
        gll_rule(0)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 5, 8, 12, 16])
def test_rule_structure(m):
    rule = gll_rule(m)
    assert rule.nodes[0] == -1.0 and rule.nodes[-1] == 1.0
    assert np.all(np.diff(rule.nodes) > 0)
    assert np.all(rule.weights > 0)
    assert abs(np.sum(rule.weights) - 2.0) < 1e-14
    # bitwise +/- symmetry
    assert np.array_equal(rule.nodes, -rule.nodes[::-1])
    assert np.array_equal(rule.weights, rule.weights[::-1])


@pytest.mark.parametrize("m", [2, 3, 4, 6, 8])
def test_quadrature_exactness(m, rng):
    # Exact for degree <= 2m - 1: compare against the analytic monomial
    # integrals of random polynomials.
    rule = gll_rule(m)
    for _ in range(20):
        coeff = rng.standard_normal(2 * m)  # degree 2m - 1
        vals = np.polyval(coeff, rule.nodes)
        exact = sum(
            c * ((1.0 - (-1.0) ** (d + 1)) / (d + 1))
            for d, c in zip(range(len(coeff) - 1, -1, -1), coeff)
        )
        approx = float(rule.weights @ vals)
        assert abs(approx - exact) <= 1e-13 * max(1.0, abs(exact))


def test_cardinality_is_exact():
    rule = gll_rule(5)
    for i in range(6):
        for j in range(6):
            assert lagrange_eval(rule, i, rule.nodes[j]) == (1.0 if i == j else 0.0)


def test_lagrange_values():
    rule = gll_rule(3)
    assert lagrange_eval(rule, 0, -1.0) == 1.0
    assert lagrange_eval(rule, 0, rule.nodes[2]) == 0.0
    # m=2: l_1(x) = 1 - x^2
    assert abs(lagrange_eval(gll_rule(2), 1, 0.5) - 0.75) < 1e-15


def test_lagrange_index_out_of_range():
    rule = gll_rule(3)
    with pytest.raises(IndexError):
        lagrange_eval(rule, 4, 0.0)


def test_diff_matrix_order_one():
    d = diff_matrix(gll_rule(1))
    np.testing.assert_allclose(d, [[-0.5, 0.5], [-0.5, 0.5]], rtol=1e-15)


def test_diff_matrix_rows_sum_to_zero():
    # constants are annihilated to round-off (negative sum trick)
    for m in (1, 3, 7, 12):
        d = diff_matrix(gll_rule(m))
        assert np.max(np.abs(d.sum(axis=1))) <= 1e-13 * np.abs(d).max()
        assert np.max(np.abs(d @ np.ones(m + 1))) <= 1e-13 * np.abs(d).max()


def test_diff_matrix_exact_on_polynomials(rng):
    for m in (2, 4, 7):
        rule = gll_rule(m)
        d = diff_matrix(rule)
        coeff = rng.standard_normal(m + 1)  # degree m
        vals = np.polyval(coeff, rule.nodes)
        dvals = np.polyval(np.polyder(coeff), rule.nodes)
        np.testing.assert_allclose(d @ vals, dvals, atol=1e-12 * np.abs(dvals).max())


def test_diff_matrix_square_field():
    rule = gll_rule(2)
    d = diff_matrix(rule)
    np.testing.assert_allclose(d @ rule.nodes**2, [-2.0, 0.0, 2.0], atol=1e-14)


@pytest.mark.parametrize("m", [1, 2, 3, 4, 6, 8])
def test_one_dimensional_sbp(m, rng):
    # W D + D^T W = B with B = diag(-1, 0, ..., 0, 1), stated through nodal
    # samples: sum w (f Dg + g Df) = f(1) g(1) - f(-1) g(-1).
    rule = gll_rule(m)
    d = diff_matrix(rule)
    w = rule.weights
    for _ in range(10):
        f = rng.standard_normal(m + 1)
        g = rng.standard_normal(m + 1)
        lhs = float(w @ (f * (d @ g))) + float(w @ (g * (d @ f)))
        rhs = f[-1] * g[-1] - f[0] * g[0]
        assert abs(lhs - rhs) <= 1e-13 * max(1.0, abs(rhs), np.abs(f).max() * np.abs(g).max())
