import math

import numpy as np
import pytest

from crossmax.densemat import singular_values
from crossmax.errors import NotDominant, RankDeficient, UnknownFunction, ZeroNorm
from crossmax.maxvol import IndexPair, MaxvolConfig, brute_force_maxvol, dominance_check, maxvol
from crossmax.polylsq import (
    FUNCTIONS,
    Basis2D,
    SampleGrid,
    design_matrix,
    evaluate,
    fit_function,
    full_fit,
    pivotal_fit,
    relative_error,
    test_function,
    theorem8_bound,
)


class TestBasis:
    def test_order(self):
        assert Basis2D(2).terms == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))

    def test_size(self):
        assert Basis2D(10).size == len(Basis2D(10).terms) == 66
        assert Basis2D(0).size == 1

    def test_negative(self):
        with pytest.raises(ValueError):
            Basis2D(-1)


class TestDesignMatrix:
    def test_constant(self):
        a = design_matrix(Basis2D(0), SampleGrid(3))
        assert a.shape == (9, 1) and np.all(a == 1.0)

    def test_linear(self):
        a = design_matrix(Basis2D(1), [(0.0, 0.0), (1.0, -1.0)])
        assert a.tolist() == [[1.0, 0.0, 0.0], [1.0, 1.0, -1.0]]

    def test_full_size_has_full_rank(self):
        a = design_matrix(Basis2D(10), SampleGrid(51))
        assert a.shape == (2601, 66)
        assert singular_values(a)[-1] > 0

    def test_grid_ordering(self):
        g = SampleGrid(3)
        assert g.points[:3].tolist() == [[-1, -1], [-1, 0], [-1, 1]]
        assert len(g) == 9


class TestFullFit:
    def test_in_column_space(self, rng):
        a = rng.normal(size=(20, 4))
        c = rng.normal(size=4)
        fit = full_fit(a, a @ c)
        assert np.allclose(fit.coefficients, c, atol=1e-12)

    def test_orthogonal_rhs(self, rng):
        a = rng.normal(size=(20, 4))
        q, _ = np.linalg.qr(np.column_stack([a, rng.normal(size=20)]))
        assert np.allclose(full_fit(a, q[:, 4]).coefficients, 0.0, atol=1e-12)

    def test_polynomial_identity(self):
        basis = Basis2D(2)
        g = SampleGrid(5)
        x, y = g.points.T
        coeffs = full_fit(design_matrix(basis, g), x**2 + y).coefficients
        assert np.allclose(coeffs, [0, 0, 1, 1, 0, 0], atol=1e-9)

    def test_row_permutation_invariance(self, rng):
        basis = Basis2D(6)
        g = SampleGrid(15)
        a = design_matrix(basis, g)
        b = np.exp(g.points.sum(axis=1))
        perm = rng.permutation(len(b))
        c1 = full_fit(a, b).coefficients
        c2 = full_fit(a[perm], b[perm]).coefficients
        assert np.max(np.abs(c1 - c2)) <= 1e-8

    def test_rank_deficient(self):
        with pytest.raises(RankDeficient):
            full_fit(np.ones((5, 2)), np.ones(5))
        with pytest.raises(RankDeficient):
            full_fit(np.ones((1, 2)), np.ones(1))


class TestPivotalFit:
    def test_square(self, rng):
        a = rng.normal(size=(5, 5))
        b = rng.normal(size=5)
        fit = pivotal_fit(a, b)
        assert fit.pivotal_rows == list(range(5))
        assert np.allclose(fit.coefficients, full_fit(a, b).coefficients)

    def test_consistent(self, rng):
        a = rng.normal(size=(30, 6))
        c = rng.normal(size=6)
        fit = pivotal_fit(a, a @ c)
        assert np.allclose(fit.coefficients, c, atol=1e-10)
        assert len(fit.pivotal_rows) == 6

    def test_rows_are_dominant(self):
        a = design_matrix(Basis2D(6), SampleGrid(21))
        cfg = MaxvolConfig(mode="rows", epsilon=1e-2)
        fit = pivotal_fit(a, np.ones(len(a)), cfg)
        pair = IndexPair(tuple(fit.pivotal_rows), tuple(range(a.shape[1])))
        assert dominance_check(a, pair, cfg.epsilon).is_dominant


class TestRelativeError:
    def test_exact_polynomial(self):
        basis = Basis2D(3)
        coeffs = np.zeros(basis.size)
        coeffs[basis.terms.index((2, 1))] = 2.0
        coeffs[0] = -1.0
        err = relative_error(lambda x, y: 2 * x**2 * y - 1, coeffs, basis, SampleGrid(31))
        assert err <= 1e-9

    def test_zero_coefficients(self):
        assert relative_error(lambda x, y: x + 2.0, np.zeros(3), Basis2D(1), SampleGrid(7)) == 1.0

    def test_zero_function(self):
        with pytest.raises(ZeroNorm):
            relative_error(lambda x, y: 0 * x, np.zeros(1), Basis2D(0), SampleGrid(3))

    def test_evaluate_matches_design_matrix(self, rng):
        basis = Basis2D(4)
        g = SampleGrid(6)
        c = rng.normal(size=basis.size)
        assert np.allclose(evaluate(basis, c, g).ravel(), design_matrix(basis, g) @ c)


class TestPivotalResidualBound:
    def test_consistent_full_rank(self, rng):
        a = rng.normal(size=(12, 3))
        x = rng.normal(size=3)
        rep = maxvol(a, 3, MaxvolConfig(mode="rows"))
        bound, lhs, terms = theorem8_bound(a, rep.indices, x, a @ x)
        assert terms["cross_term"] == 0.0
        assert bound <= 1e-12 and lhs <= 1e-12

    @pytest.mark.parametrize("r", [2, 3, 5])
    def test_random_tall(self, r):
        g = np.random.default_rng(r)
        for _ in range(10):
            a = g.normal(size=(40, 5))
            b = g.normal(size=40)
            x_b = full_fit(a, b).coefficients
            rep = maxvol(a, r, MaxvolConfig(h=2))
            bound, lhs, _ = theorem8_bound(a, rep.indices, x_b, b)
            assert lhs <= bound

    def test_maximal_volume_pair_has_unit_coupling(self, rng):
        a = rng.normal(size=(8, 5))
        b = rng.normal(size=8)
        pair, _ = brute_force_maxvol(a, 2)
        bound, lhs, terms = theorem8_bound(a, pair, full_fit(a, b).coefficients, b)
        assert terms["coupling"] == pytest.approx(1.0)
        assert lhs <= bound

    def test_requires_dominance(self):
        a = np.array([[1.0], [3.0]])
        with pytest.raises(NotDominant):
            theorem8_bound(a, IndexPair((0,), (0,)), [1.0], [1.0, 1.0])


class TestFunctions:
    def test_values(self):
        assert test_function("exp_r2")(0.0, 0.0) == 1.0
        assert test_function("log_r2")(1.0, 1.0) == pytest.approx(math.log(3))
        assert test_function("rastrigin")(0.0, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert test_function("ackley")(0.0, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert test_function("wavy")(0.0, 0.0) == pytest.approx(0.0)

    def test_registry(self):
        assert len(FUNCTIONS) == 9
        with pytest.raises(UnknownFunction):
            test_function("rosenbrock")

    def test_vectorized(self):
        x = np.linspace(-1, 1, 5)
        for name, f in FUNCTIONS.items():
            assert f(x, x).shape == (5,), name


def test_franke_pivotal_close_to_full():
    cmp = fit_function("franke", 10, 51, 201)
    assert cmp.pivotal.rel_error <= 10 * cmp.full.rel_error
    assert len(cmp.pivotal.pivotal_rows) == 66
    assert cmp.pivotal.bound_terms["lhs"] <= cmp.pivotal.bound_terms["bound"]
