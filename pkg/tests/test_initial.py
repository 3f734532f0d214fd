import math

import numpy as np
import pytest

from slitcap.elliptic import lattice_from_periods, sigma, wp, zeta_w
from slitcap.errors import BracketFailure, DegenerateGeometry
from slitcap.evolution import constraint_defects, initial_accessory_state
from slitcap.geometry import SlitConfig, normalize
from slitcap.initial import (
    critical_abscissa,
    initial_state_generic,
    initial_state_parallel,
    length_ratio,
    solve_symmetric_module,
)
from slitcap.reference import (
    SLIDE_SYMMETRIC_ABSCISSA,
    SLIDE_SYMMETRIC_LOG_RESIDUE,
    SLIDE_SYMMETRIC_MODULE,
    slide_config,
)

ALPHA = 0.125  # beta = pi/2


class TestCriticalAbscissa:
    def test_reference_value(self):
        x0 = critical_abscissa(SLIDE_SYMMETRIC_MODULE, ALPHA)
        assert x0 == pytest.approx(SLIDE_SYMMETRIC_ABSCISSA, abs=1e-6)

    def test_defining_residual(self):
        m = 0.7
        lat = lattice_from_periods(m)
        x0 = critical_abscissa(m, ALPHA)
        from slitcap.elliptic import wp_prime
        target = wp(ALPHA, lat) - wp_prime(ALPHA, lat) / (
            2.0 * (ALPHA * lat.eta1 - zeta_w(ALPHA, lat)))
        assert abs(wp(x0 + 0.5j * m, lat) - target) < 1e-9 * max(1.0, abs(target))

    def test_continuity_in_module(self):
        x0 = critical_abscissa(0.676, ALPHA)
        x1 = critical_abscissa(0.676 + 1e-6, ALPHA)
        assert abs(x1 - x0) < 1e-3


class TestLengthRatio:
    def test_reference_ratio(self):
        assert length_ratio(SLIDE_SYMMETRIC_MODULE, ALPHA) == pytest.approx(2.0, abs=1e-6)

    def test_strictly_monotone(self):
        vals = [length_ratio(m, ALPHA) for m in np.linspace(0.1, 3.0, 50)]
        diffs = np.diff(vals)
        assert np.all(diffs < 0)  # ratio decreases towards 1 as m grows

    def test_tip_product_is_scale_squared(self):
        # f(z2) f(z3) = c^2 > 0 for the symmetric closed form (unit near tip)
        m = SLIDE_SYMMETRIC_MODULE
        lat = lattice_from_periods(m)
        x0 = critical_abscissa(m, ALPHA)
        z2 = x0 + 0.5j * m
        eta1 = lat.eta1.real

        def f_unit(z):
            return np.exp(2 * ALPHA * eta1 * z) * sigma(z - ALPHA, lat) / sigma(z + ALPHA, lat)

        prod = f_unit(z2) * f_unit(-z2)
        assert prod.imag == pytest.approx(0.0, abs=1e-10)
        assert prod.real > 0.0


class TestSolveSymmetricModule:
    def test_reference_module(self):
        m0 = solve_symmetric_module(2.0, ALPHA)
        assert m0 == pytest.approx(SLIDE_SYMMETRIC_MODULE, abs=1e-7)

    def test_round_trip(self):
        target = length_ratio(1.0, ALPHA)
        assert solve_symmetric_module(target, ALPHA) == pytest.approx(1.0, abs=1e-9)

    def test_ratio_near_one_lands_near_upper_bracket(self):
        # length_ratio decreases to ~1.0005 at m=3, so targets just above 1
        # sit near the upper bracket end
        m0 = solve_symmetric_module(1.001, ALPHA)
        assert m0 > 2.5

    def test_unreachable_ratio_fails(self):
        with pytest.raises(BracketFailure):
            solve_symmetric_module(1.0000001, ALPHA)

    def test_ratio_below_one_rejected(self):
        with pytest.raises((BracketFailure, DegenerateGeometry)):
            solve_symmetric_module(0.5, ALPHA)


class TestInitialStateGeneric:
    @pytest.fixture(scope="class")
    def sym(self):
        return initial_state_generic(normalize(slide_config(1.5)))

    def test_reference_abscissas(self, sym):
        assert sym.x_init[0] == pytest.approx(0.34867571, abs=1e-6)
        assert sym.x_init[1] == pytest.approx(-0.09867571, abs=1e-6)
        assert sym.x_init[0] == sym.x_init[2]
        assert sym.x_init[1] == sym.x_init[3]

    def test_reference_log_residue(self, sym):
        assert sym.a0.real == pytest.approx(SLIDE_SYMMETRIC_LOG_RESIDUE.real, abs=1e-6)
        assert sym.a0.imag == math.pi

    def test_scale(self, sym):
        assert sym.c0 == pytest.approx(math.sqrt(2.0), abs=1e-12)

    def test_abscissa_sum_constraint(self, sym):
        beta = math.pi / 2
        assert sum(sym.x_init) == pytest.approx(beta / math.pi, abs=1e-12)

    def test_residue_identity_on_doubled_lattice(self, sym):
        state = initial_accessory_state(sym)
        d = constraint_defects(state, math.pi / 2)
        assert d["residue_defect"] < 1e-8
        assert d["sum_defect"] < 1e-12

    def test_tips_straddle_pole_column(self, sym):
        x1, x2, x3, x4 = sym.x_init
        assert x2 < 0.0 < x1 and x4 < 0.0 < x3
        assert all(abs(x) < 0.5 for x in sym.x_init)

    def test_log_residue_matches_scale_formula(self, sym):
        # Re a0 = log|d_-1| with d_-1 evaluated from the residue formula on
        # the doubled lattice using the recovered scale
        from slitcap.mapping import recover_scale
        state = initial_accessory_state(sym)
        lat = state.lattice()
        z = state.z_points()
        z0 = state.z0
        beta = math.pi / 2
        gam = (beta / math.pi) * lat.eta1.real
        c = recover_scale(state)
        vals = sigma(np.array([z0 - z[0], z0 - z[1], z0 - z[2], z0 - z[3], 2 * z0]), lat)
        d_minus1 = -c * np.exp(gam * z0) * vals[0] * vals[1] * vals[2] * vals[3] / vals[4] ** 2
        assert math.log(abs(d_minus1)) == pytest.approx(sym.a0.real, abs=1e-8)


class TestInitialStateParallel:
    def test_antisymmetric_abscissas(self):
        sym = initial_state_parallel(normalize(SlitConfig(1j, 2 + 1j, -2 - 1j, -1 - 1j)))
        assert sym.x_init[1] == -sym.x_init[0]
        assert sym.x_init[3] == -sym.x_init[2]
        assert sym.a0.imag == math.pi

    def test_mirror_symmetric_pair_is_final_answer(self):
        # static configuration: the initial module is already the answer
        ncfg = normalize(SlitConfig(1j, 3 + 1j, -1j, 3 - 1j))
        assert ncfg.is_static
        sym = initial_state_parallel(ncfg)
        assert 1.0 / sym.m0 == pytest.approx(2.69941565, abs=5e-5)

    def test_gap_sets_log_residue(self):
        ncfg = normalize(SlitConfig(1j, 2 + 1j, -2 - 1j, -1 - 1j))
        sym = initial_state_parallel(ncfg)
        assert sym.a0.real == pytest.approx(math.log(2.0 / (2.0 * math.pi)), abs=1e-12)

    def test_row1_initial_state_downstream(self, table2_reports):
        assert table2_reports[1].capacity == pytest.approx(1.44058466, abs=5e-5)


class TestConformalInvariance:
    def test_scaling_and_rotation_invariance(self):
        import cmath
        from slitcap.pipeline import solve
        base = solve(slide_config(2.0), trace=False).module
        factor = 3.0 * cmath.exp(0.7j)
        offset = 5.0 - 2.0j
        moved = solve(slide_config(2.0).scaled(factor, offset), trace=False).module
        assert moved == pytest.approx(base, abs=1e-8)
