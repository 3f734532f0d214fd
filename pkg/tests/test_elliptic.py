import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import invariant_sums, sigma_product, wp_sum, zeta_sum
from slitcap.elliptic import (
    BranchRegion,
    dzeta_domega2,
    inverse_wp,
    lattice_from_periods,
    sigma,
    theta1,
    wp,
    wp_prime,
    zeta_w,
)
from slitcap.errors import ConvergenceFailure, NoRootInRegion, OutOfRange, PoleProximity


class TestLattice:
    def test_square_lattice_g3_vanishes(self):
        lat = lattice_from_periods(1.0)
        assert abs(lat.g3) < 1e-13

    def test_square_lattice_eta1_is_pi(self):
        # independent check: truncated regularized zeta sum at z = 1/2
        oracle = 2.0 * zeta_sum(0.5, 1j, 200)
        assert oracle.real == pytest.approx(3.1415947265453927, abs=1e-12)  # frozen
        assert abs(oracle - math.pi) < 5e-6  # oracle truncation level
        lat = lattice_from_periods(1.0)
        assert abs(lat.eta1 - math.pi) < 1e-10

    def test_invariants_match_lattice_sums(self):
        g2_oracle, g3_oracle = invariant_sums(2j, radius=1200.0)
        assert g2_oracle.real == pytest.approx(129.98749508683435, abs=1e-9)  # frozen
        assert g3_oracle.real == pytest.approx(284.35533087654133, abs=1e-9)  # frozen
        lat = lattice_from_periods(2.0)
        assert abs(lat.g2 - g2_oracle) < 1e-8
        assert abs(lat.g3 - g3_oracle) < 1e-8

    def test_legendre_relation(self):
        for b in np.linspace(0.2, 5.0, 20):
            lat = lattice_from_periods(float(b))
            assert abs(lat.omega2 * lat.eta1 - lat.eta2 - 2j * math.pi) < 1e-12

    def test_rectangular_structure(self):
        lat = lattice_from_periods(1.7)
        assert lat.eta1.imag == 0.0
        assert lat.eta2.real == pytest.approx(0.0, abs=1e-14)
        assert lat.g2.imag == 0.0
        assert lat.g3.imag == 0.0
        assert 0.0 < lat.nome_q < 1.0

    @pytest.mark.parametrize("bad", [0.0, -1.0, 5e-5, 2e4, math.inf, math.nan])
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(OutOfRange):
            lattice_from_periods(bad)

    def test_extreme_but_legal_lattice_raises_convergence(self):
        # inside the accepted range yet beyond the 200-term series cap
        with pytest.raises(ConvergenceFailure):
            lattice_from_periods(1.2e-4)


class TestTheta1:
    def test_zero_at_origin(self):
        assert theta1(0.0, 2j) == 0.0

    def test_odd(self):
        z = 0.3 + 0.1j
        assert theta1(-z, 2j) == -theta1(z, 2j)

    def test_requires_upper_half_plane(self):
        with pytest.raises(OutOfRange):
            theta1(0.1, -1j)

    def test_derivative_normalization_vs_product(self):
        # sigma built from theta1'(0) must satisfy sigma(z)/z -> 1, which the
        # independent Weierstrass product also does; compare both at small z.
        lat = lattice_from_periods(2.0)
        z = 1e-3
        assert abs(sigma(z, lat) / z - 1.0) < 1e-6
        assert abs(sigma(z, lat) - sigma_product(z, 2j, 60)) < 1e-12

    def test_matches_sigma_through_connection(self):
        # theta1(pi z) * exp(eta1 z^2/2) / (pi theta1'(0)) == sigma(z)
        lat = lattice_from_periods(2.0)
        z = 0.23 + 0.11j
        h = 1e-6
        d0 = (theta1(math.pi * h, 2j) - theta1(-math.pi * h, 2j)) / (2.0 * h)
        val = theta1(math.pi * z, 2j) * np.exp(0.5 * lat.eta1 * z * z) / d0
        assert abs(val - sigma(z, lat)) < 1e-9


class TestSigma:
    def test_normalized_at_origin(self):
        lat = lattice_from_periods(2.0)
        assert abs(sigma(1e-8, lat) / 1e-8 - 1.0) < 1e-8

    def test_quasi_periodicity_period_one(self):
        lat = lattice_from_periods(2.0)
        z = 0.2 + 0.3j
        lhs = sigma(z + 1.0, lat)
        rhs = -sigma(z, lat) * np.exp(lat.eta1 * (z + 0.5))
        assert abs(lhs - rhs) < 1e-10 * abs(lhs)

    def test_quasi_periodicity_period_two(self):
        lat = lattice_from_periods(2.0)
        z = 0.2 + 0.3j
        lhs = sigma(z + lat.omega2, lat)
        rhs = -sigma(z, lat) * np.exp(lat.eta2 * (z + 0.5 * lat.omega2))
        assert abs(lhs - rhs) < 1e-10 * abs(lhs)

    def test_matches_product_oracle(self):
        val = sigma_product(0.3 + 0.2j, 2j, 60)
        assert val == pytest.approx(0.3033778952578543 + 0.19957008569107093j,
                                    abs=1e-12)  # frozen
        lat = lattice_from_periods(2.0)
        assert abs(sigma(0.3 + 0.2j, lat) - val) < 1e-6


class TestZeta:
    def test_odd(self):
        lat = lattice_from_periods(1.35)
        z = 0.25 + 0.4j
        assert zeta_w(-z, lat) == -zeta_w(z, lat)

    def test_period_shifts(self):
        lat = lattice_from_periods(2.0)
        z = 0.1 + 0.2j
        assert abs(zeta_w(z + 1.0, lat) - zeta_w(z, lat) - lat.eta1) < 1e-11
        assert abs(zeta_w(z + lat.omega2, lat) - zeta_w(z, lat) - lat.eta2) < 1e-11

    def test_half_period_value_square_lattice(self):
        lat = lattice_from_periods(1.0)
        assert abs(2.0 * zeta_w(0.5, lat) - math.pi) < 1e-12

    def test_matches_lattice_sum(self):
        lat = lattice_from_periods(2.0)
        z = 0.37 + 0.41j
        assert abs(zeta_w(z, lat) - zeta_sum(z, 2j, 200)) < 1e-6

    def test_pole_rejection(self):
        lat = lattice_from_periods(2.0)
        with pytest.raises(PoleProximity):
            zeta_w(1.0 + 1e-13j, lat)

    def test_log_derivative_of_sigma(self):
        lat = lattice_from_periods(1.5)
        z = 0.21 + 0.33j
        h = 1e-5
        fd = (sigma(z + h, lat) - sigma(z - h, lat)) / (2.0 * h) / sigma(z, lat)
        assert abs(fd - zeta_w(z, lat)) < 1e-8


class TestWp:
    def test_even(self):
        lat = lattice_from_periods(2.0)
        z = 0.31 + 0.17j
        assert wp(-z, lat) == wp(z, lat)

    def test_half_period_values_sum_to_zero(self):
        lat = lattice_from_periods(1.5)
        e = [wp(0.5, lat), wp(0.5 + 0.5 * lat.omega2, lat), wp(0.5 * lat.omega2, lat)]
        assert abs(sum(e)) < 1e-10

    def test_matches_lattice_sum(self):
        oracle = wp_sum(0.3, 2j, 300)
        assert oracle.real == pytest.approx(11.789905851564868, abs=1e-9)  # frozen
        lat = lattice_from_periods(2.0)
        assert abs(wp(0.3, lat) - oracle) < 1e-6
        assert abs(wp(0.31 + 0.17j, lat) - wp_sum(0.31 + 0.17j, 2j, 300)) < 1e-6

    def test_zeta_derivative(self):
        lat = lattice_from_periods(2.0)
        z = 0.2 + 0.3j
        h = 1e-5
        fd = (zeta_w(z + h, lat) - zeta_w(z - h, lat)) / (2.0 * h)
        assert abs(fd + wp(z, lat)) < 1e-8

    def test_cubic_identity(self):
        lat = lattice_from_periods(2.0)
        for z in (0.2 + 0.3j, 0.45 + 0.9j, 0.1 + 0.05j):
            p = wp(z, lat)
            pp = wp_prime(z, lat)
            assert abs(pp ** 2 - (4 * p ** 3 - lat.g2 * p - lat.g3)) < 1e-9 * abs(pp ** 2)

    def test_wp_prime_is_derivative(self):
        # Richardson-extrapolated central differences (plain h=1e-5 stalls at
        # the truncation level, above the 1e-8 target)
        lat = lattice_from_periods(2.0)
        z = 0.2 + 0.3j
        h = 1e-4
        d1 = (wp(z + h, lat) - wp(z - h, lat)) / (2 * h)
        d2 = (wp(z + h / 2, lat) - wp(z - h / 2, lat)) / h
        fd = (4.0 * d2 - d1) / 3.0
        assert abs(fd - wp_prime(z, lat)) < 1e-8


class TestInverseWp:
    REGION = BranchRegion((0.0, 0.5), (0.0, 1.0))

    def test_round_trip(self):
        lat = lattice_from_periods(2.0)
        z0 = 0.2 + 0.3j
        w = wp(z0, lat)
        z = inverse_wp(w, lat, self.REGION)
        assert abs(wp(z, lat) - w) < 1e-11 * max(1.0, abs(w))
        assert abs(z - z0) < 1e-10

    def test_quarter_period_square_lattice(self):
        lat = lattice_from_periods(1.0)
        w = wp(0.25, lat)
        z = inverse_wp(w, lat, BranchRegion((0.0, 0.5), (0.0, 0.5)))
        assert abs(z - 0.25) < 1e-10

    def test_no_root_reports_residual(self):
        lat = lattice_from_periods(1.0)
        # wp is real and >= e1 on (0, 1/2); a far-away complex target fails
        with pytest.raises(NoRootInRegion) as err:
            inverse_wp(1e6 + 1e6j, lat, BranchRegion((0.2, 0.3), (0.0, 0.05)))
        assert err.value.best_residual > 0.0

    def test_deterministic(self):
        lat = lattice_from_periods(1.4)
        w = wp(0.3 + 0.2j, lat)
        roots = {inverse_wp(w, lat, BranchRegion((0.0, 0.5), (0.0, 0.7)))
                 for _ in range(3)}
        assert len(roots) == 1


class TestDzetaDomega2:
    def test_finite_difference(self):
        z = 0.2 + 0.3j
        lat = lattice_from_periods(2.0)
        d = 1e-5
        fd = (zeta_w(z, lattice_from_periods(2.0 + d))
              - zeta_w(z, lattice_from_periods(2.0 - d))) / (2j * d)
        assert abs(dzeta_domega2(z, lat) - fd) < 1e-6

    def test_finite_difference_multiple_points(self):
        rng = np.random.default_rng(7)
        for b in (0.8, 1.6, 3.1):
            lat = lattice_from_periods(b)
            d = 1e-5
            lp = lattice_from_periods(b + d)
            lm = lattice_from_periods(b - d)
            for _ in range(4):
                z = complex(0.1 + 0.8 * rng.random(), b * (0.05 + 0.4 * rng.random()))
                fd = (zeta_w(z, lp) - zeta_w(z, lm)) / (2j * d)
                assert abs(dzeta_domega2(z, lat) - fd) < 1e-6

    def test_real_axis_gives_imaginary(self):
        lat = lattice_from_periods(2.0)
        val = dzeta_domega2(0.3, lat)
        assert abs(val.real) < 1e-10

    def test_odd(self):
        lat = lattice_from_periods(2.0)
        z = 0.17 + 0.29j
        assert abs(dzeta_domega2(z, lat) + dzeta_domega2(-z, lat)) < 1e-10


# ------------------------- property tests -------------------------

_lattices = st.floats(min_value=0.3, max_value=4.0)
_re = st.floats(min_value=0.05, max_value=0.95)
_imfrac = st.floats(min_value=0.05, max_value=0.45)


@settings(max_examples=25, deadline=None)
@given(_lattices, _re, _imfrac)
def test_parity_exact(b, x, yf):
    lat = lattice_from_periods(b)
    z = complex(x, yf * b)
    assert sigma(-z, lat) == -sigma(z, lat)
    assert zeta_w(-z, lat) == -zeta_w(z, lat)
    assert wp(-z, lat) == wp(z, lat)
    assert wp_prime(-z, lat) == -wp_prime(z, lat)


@settings(max_examples=25, deadline=None)
@given(_lattices, _re, _imfrac, st.integers(-2, 2), st.integers(-2, 2))
def test_wp_periodic(b, x, yf, mm, nn):
    lat = lattice_from_periods(b)
    z = complex(x, yf * b)
    shifted = z + mm + nn * lat.omega2
    assert abs(wp(shifted, lat) - wp(z, lat)) <= 1e-10 * max(1.0, abs(wp(z, lat)))


@settings(max_examples=25, deadline=None)
@given(_lattices, _re, _imfrac)
def test_sigma_quasi_periodicity(b, x, yf):
    lat = lattice_from_periods(b)
    z = complex(x, yf * b)
    for omega, eta in ((1.0, lat.eta1), (lat.omega2, lat.eta2)):
        lhs = sigma(z + omega, lat)
        rhs = -sigma(z, lat) * np.exp(eta * (z + 0.5 * omega))
        assert abs(lhs - rhs) <= 1e-10 * abs(lhs)
