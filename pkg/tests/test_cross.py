import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossmax.cross import (
    BoundInputs,
    bound_certificate,
    build_cross,
    chebyshev_error,
    error_bound,
    measured_nu,
    reconstruct,
    residual_entry_det_ratio,
)
from crossmax.errors import InvalidNu, InvalidRank, SingularMatrix
from crossmax.maxvol import IndexPair, MaxvolConfig, brute_force_maxvol, maxvol

from oracles import bordered, cofactor_det


class TestBuildAndReconstruct:
    def test_rank_one_exact(self, rng):
        u, v = rng.normal(size=5), rng.normal(size=4)
        a = np.outer(u, v)
        f = build_cross(a, IndexPair((2,), (1,)))
        assert np.linalg.norm(reconstruct(f) - a) <= 1e-10 * np.linalg.norm(a)

    def test_identity(self):
        f = build_cross(np.eye(5), IndexPair((0, 1), (0, 1)))
        expected = np.zeros((5, 5))
        expected[0, 0] = expected[1, 1] = 1.0
        assert np.array_equal(reconstruct(f), expected)
        assert chebyshev_error(np.eye(5), f) == (1.0, (2, 2))

    def test_exact_rank_three(self, rng):
        a = rng.normal(size=(12, 3)) @ rng.normal(size=(3, 9))
        rep = maxvol(a, 3)
        f = build_cross(a, rep.indices)
        err, _ = chebyshev_error(a, f)
        assert err <= 1e-9

    def test_panels_share_core(self, rng):
        a = rng.normal(size=(7, 6))
        pair = IndexPair((1, 4, 5), (0, 2, 3))
        f = build_cross(a, pair)
        assert np.array_equal(f.col_panel[list(pair.I)], f.row_panel[:, list(pair.J)])
        assert f.rank == 3 and f.source_shape == (7, 6)

    def test_singular_core(self):
        with pytest.raises(SingularMatrix):
            build_cross(np.ones((3, 3)), IndexPair((0, 1), (0, 1)))

    def test_out_of_range(self):
        with pytest.raises(IndexError):
            build_cross(np.eye(3), IndexPair((0, 3), (0, 1)))


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 9), st.integers(3, 9), st.integers(1, 2), st.integers(0, 2**32 - 1))
def test_selected_rows_and_columns_are_reproduced(n, m, r, seed):
    g = np.random.default_rng(seed)
    a = g.normal(size=(n, m))
    pair = IndexPair(sorted(g.choice(n, r, replace=False)), sorted(g.choice(m, r, replace=False)))
    e = a - reconstruct(build_cross(a, pair))
    assert np.abs(e[list(pair.I), :]).max() <= 1e-10 * max(1.0, np.abs(a).max()) / \
        min(1.0, abs(np.linalg.det(pair.block(a))))
    assert np.abs(e[:, list(pair.J)]).max() <= 1e-10 * max(1.0, np.abs(a).max()) / \
        min(1.0, abs(np.linalg.det(pair.block(a))))


class TestResidualEntry:
    def test_two_by_two(self):
        assert residual_entry_det_ratio(np.eye(2), IndexPair((0,), (0,)), 1, 1) == 1.0

    def test_zero_on_selected_row(self, rng):
        a = rng.normal(size=(5, 5))
        assert abs(residual_entry_det_ratio(a, IndexPair((1, 3), (0, 4)), 3, 2)) <= 1e-12

    def test_cofactor_oracle(self, rng):
        a = rng.normal(size=(6, 6))
        pair = IndexPair((0, 3), (1, 5))
        direct = a - reconstruct(build_cross(a, pair))
        base = cofactor_det(pair.block(a))
        for i in range(6):
            for j in range(6):
                ratio = cofactor_det(bordered(a, pair.I, pair.J, i, j)) / base
                assert ratio == pytest.approx(residual_entry_det_ratio(a, pair, i, j), abs=1e-9)
                assert ratio == pytest.approx(direct[i, j], abs=1e-9)


class TestErrorBound:
    def test_closed_form(self):
        b = BoundInputs([1.0, 0.5], 1)
        assert abs(error_bound(b, "improved") - 2 * math.sqrt(5) / 5) <= 1e-12
        assert error_bound(b, "classic") == 1.0

    def test_zero_tail(self):
        for variant in ("classic", "improved", "nu_dominant"):
            assert error_bound(BoundInputs([2.0, 1.0, 0.0], 2, 0.5), variant) == 0.0

    @pytest.mark.parametrize("r", [3, 10, 50])
    def test_harmonic_spectrum(self, r):
        sigma = 1.0 / np.arange(1, r + 2)
        assert error_bound(BoundInputs(sigma, r)) <= math.sqrt(3) / math.sqrt(r + 1)

    def test_nu_scaling(self):
        b = BoundInputs([3.0, 2.0, 1.0], 2, 0.25)
        assert error_bound(b, "nu_dominant") == pytest.approx(4 * error_bound(b, "improved"))

    @pytest.mark.parametrize("r", [0, 2, 5])
    def test_invalid_rank(self, r):
        with pytest.raises(InvalidRank):
            BoundInputs([1.0, 0.5], r)

    @pytest.mark.parametrize("nu", [0.0, -1.0, 1.5])
    def test_invalid_nu(self, nu):
        with pytest.raises(InvalidNu):
            BoundInputs([1.0, 0.5], 1, nu)

    def test_not_descending(self):
        with pytest.raises(ValueError):
            BoundInputs([0.5, 1.0], 1)
        with pytest.raises(ValueError):
            error_bound(BoundInputs([1.0, 0.5], 1), "loose")


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.0, 100.0), min_size=2, max_size=12), st.data(),
       st.floats(1e-3, 1.0))
def test_bound_ordering(values, data, nu):
    sigma = np.sort(np.array(values))[::-1]
    r = data.draw(st.integers(1, len(sigma) - 1))
    if sigma[r] > 0 and np.any(sigma[:r] == 0):
        return
    b = BoundInputs(sigma, r, nu)
    classic = error_bound(b, "classic")
    improved = error_bound(b, "improved")
    assert improved <= classic
    assert error_bound(b, "nu_dominant") <= classic / nu * (1 + 1e-12)


class TestCertificate:
    def test_brute_force_pair_within_improved(self, rng):
        for _ in range(5):
            a = rng.normal(size=(8, 8))
            pair, _ = brute_force_maxvol(a, 2)
            cert = bound_certificate(a, build_cross(a, pair))
            assert cert.nu == pytest.approx(1.0) and cert.nu_source == "oracle"
            assert cert.error <= cert.improved

    def test_maxvol_pair_within_nu_bound(self, rng):
        a = rng.normal(size=(8, 8))
        rep = maxvol(a, 2, MaxvolConfig(h=2))
        cert = bound_certificate(a, build_cross(a, rep.indices))
        assert cert.nu == pytest.approx(measured_nu(a, rep.indices))
        assert cert.holds and cert.error <= cert.nu_dominant

    def test_exact_rank(self, rng):
        a = rng.normal(size=(6, 2)) @ rng.normal(size=(2, 6))
        rep = maxvol(a, 2)
        cert = bound_certificate(a, build_cross(a, rep.indices), nu=1.0)
        assert cert.error <= 1e-12 and cert.improved <= 1e-12 and cert.nu_source == "given"

    def test_floor_for_large_instances(self, rng):
        a = rng.normal(size=(60, 60))
        rep = maxvol(a, 4)
        cert = bound_certificate(a, build_cross(a, rep.indices))
        assert cert.nu_source == "floor" and cert.nu == pytest.approx(4.0**-2)

    def test_full_rank_selection(self, rng):
        a = rng.normal(size=(3, 3))
        cert = bound_certificate(a, build_cross(a, IndexPair(range(3), range(3))), nu=1.0)
        assert cert.classic == 0.0 and cert.error <= 1e-12
