"""Check batteries: reproducibility, pass behavior, fault injection."""

import math

import numpy as np
import pytest

from glperiod import (CutoffSpec, ForcingSpec, SolveOptions, realize_forcing,
                      solve_periodic)
from glperiod.verification import (check_bernstein, check_energy_inequality,
                                   check_hardy, check_high_freq_decay,
                                   check_high_freq_weighted_poincare,
                                   check_low_freq_smoothing,
                                   check_nonlinear_bound,
                                   check_period_inverse_bound,
                                   check_projection_completeness,
                                   random_band_field, reports_to_json,
                                   run_all_checks, sample_rngs)


@pytest.fixture(scope="module")
def solved(grid3d_module, op3d_module, cutoffs3d_module):
    grid, op, cut = grid3d_module, op3d_module, cutoffs3d_module
    g = realize_forcing(ForcingSpec(amplitude=1e-2, period=1.0), grid, 16)
    u, rep = solve_periodic(g, op, cut, SolveOptions(m_t=16))
    assert rep.converged
    return u, g


@pytest.fixture(scope="module")
def grid3d_module():
    from glperiod import GridConfig, make_grid
    return make_grid(GridConfig(dim=3, n_per_axis=16, box_length=32.0))


@pytest.fixture(scope="module")
def op3d_module(grid3d_module):
    from glperiod import make_operator
    return make_operator(grid3d_module, 1.0)


@pytest.fixture(scope="module")
def cutoffs3d_module(grid3d_module):
    from glperiod import auto_cutoffs
    return auto_cutoffs(grid3d_module, 1.0)


class TestRandomBandFields:
    def test_low_band_support(self, grid3d_module, cutoffs3d_module):
        rng = np.random.default_rng(1)
        f = random_band_field(grid3d_module, rng, "low", cutoffs3d_module)
        assert np.all(f.data[grid3d_module.xi_abs > cutoffs3d_module.r_inf] == 0)

    def test_high_band_support(self, grid3d_module, cutoffs3d_module):
        rng = np.random.default_rng(1)
        f = random_band_field(grid3d_module, rng, "high", cutoffs3d_module)
        assert np.all(f.data[grid3d_module.xi_abs < cutoffs3d_module.r1] == 0)

    def test_odd_symmetrization(self, grid3d_module, cutoffs3d_module):
        rng = np.random.default_rng(2)
        f = random_band_field(grid3d_module, rng, "low", cutoffs3d_module, odd=True)
        reflected = grid3d_module.reflect(f.data)
        np.testing.assert_allclose(reflected, -f.data, atol=1e-16)
        assert f.data.flat[0] == 0

    def test_seed_split_reproducible(self):
        a = [r.standard_normal() for r in sample_rngs(42, 4)]
        b = [r.standard_normal() for r in sample_rngs(42, 4)]
        assert a == b


class TestBatteries:
    def test_completeness_passes(self, grid3d_module, cutoffs3d_module):
        rep = check_projection_completeness(grid3d_module, cutoffs3d_module,
                                            samples=20, seed=0)
        assert rep.passed
        assert rep.fitted_constant <= 1e-14

    def test_completeness_fails_on_tampered_cutoff(self, grid3d_module,
                                                   cutoffs3d_module):
        band = (cutoffs3d_module.chi1 > 0) & (cutoffs3d_module.chi1 < 1)
        tampered_chi_inf = cutoffs3d_module.chi_inf.copy()
        tampered_chi_inf[band] += 1e-3
        bad = CutoffSpec(r1=cutoffs3d_module.r1, r_inf=cutoffs3d_module.r_inf,
                         chi1=cutoffs3d_module.chi1, chi_inf=tampered_chi_inf)
        rep = check_projection_completeness(grid3d_module, bad, samples=20, seed=0)
        assert not rep.passed

    def test_low_freq_smoothing_constant_bounded(self, op3d_module, cutoffs3d_module):
        rep = check_low_freq_smoothing(op3d_module, cutoffs3d_module,
                                       samples=200, seed=3)
        assert rep.passed
        hint = 1.0 + cutoffs3d_module.r_inf ** 2 * op3d_module.period
        assert rep.fitted_constant <= hint

    def test_period_inverse_bound_scale_invariant(self, op3d_module, cutoffs3d_module):
        rep = check_period_inverse_bound(op3d_module, cutoffs3d_module,
                                         samples=50, seed=4)
        assert rep.passed and math.isfinite(rep.fitted_constant)

    def test_high_freq_decay_cap(self, op3d_module, cutoffs3d_module):
        rep = check_high_freq_decay(op3d_module, cutoffs3d_module, samples=50, seed=5)
        assert rep.passed
        assert rep.fitted_constant <= 4.0

    def test_bernstein(self, grid3d_module, cutoffs3d_module):
        rep = check_bernstein(grid3d_module, cutoffs3d_module, samples=50, seed=6)
        assert rep.passed
        assert rep.worst_ratio <= 1.0 + 1e-12

    def test_hardy(self, grid3d_module):
        rep = check_hardy(grid3d_module, samples=50, seed=7)
        assert rep.passed and math.isfinite(rep.fitted_constant)

    def test_weighted_poincare(self, grid3d_module, cutoffs3d_module):
        rep = check_high_freq_weighted_poincare(grid3d_module, cutoffs3d_module,
                                                samples=50, seed=8)
        assert rep.passed

    def test_energy_inequality_on_solved_run(self, solved, op3d_module,
                                             cutoffs3d_module):
        u, g = solved
        rep = check_energy_inequality(u, g, op3d_module, cutoffs3d_module)
        assert rep.passed
        assert rep.extras["d"] > 0

    def test_energy_inequality_rejects_zero_trajectory(self, grid3d_module,
                                                       op3d_module,
                                                       cutoffs3d_module):
        from glperiod import FieldSeries
        zero = FieldSeries(grid3d_module, "frequency",
                           np.zeros((17,) + grid3d_module.shape, complex), 1.0)
        with pytest.raises(ValueError, match="degenerate"):
            check_energy_inequality(zero, zero, op3d_module, cutoffs3d_module)

    def test_nonlinear_bound_unit_constant_at_zero_solution(self, grid3d_module,
                                                            op3d_module,
                                                            cutoffs3d_module):
        from glperiod import FieldSeries
        g = realize_forcing(ForcingSpec(amplitude=1e-2, period=1.0),
                            grid3d_module, 16)
        zero = FieldSeries(grid3d_module, "frequency",
                           np.zeros((17,) + grid3d_module.shape, complex), 1.0)
        reports = check_nonlinear_bound(zero, g, op3d_module, cutoffs3d_module)
        for rep in reports:
            assert rep.fitted_constant == pytest.approx(1.0, rel=1e-10)

    def test_nonlinear_bound_on_solved_run(self, solved, op3d_module,
                                           cutoffs3d_module):
        u, g = solved
        for rep in check_nonlinear_bound(u, g, op3d_module, cutoffs3d_module):
            assert rep.passed and math.isfinite(rep.fitted_constant)

    def test_zero_sample_battery_rejected(self, op3d_module, cutoffs3d_module):
        with pytest.raises(ValueError, match="zero-sample"):
            check_low_freq_smoothing(op3d_module, cutoffs3d_module,
                                     samples=0, seed=0)


class TestRunAllChecks:
    def test_all_pass_and_deterministic(self, grid3d_module, op3d_module,
                                        cutoffs3d_module, solved):
        u, g = solved
        first = run_all_checks(grid3d_module, op3d_module, cutoffs3d_module,
                               samples=40, seed=99, u_series=u, g_series=g)
        second = run_all_checks(grid3d_module, op3d_module, cutoffs3d_module,
                                samples=40, seed=99, u_series=u, g_series=g)
        assert all(r.passed for r in first)
        assert reports_to_json(first) == reports_to_json(second)
        names = [r.check_name for r in first]
        assert "projection_completeness" in names
        assert "energy_inequality" in names

    def test_seed_change_keeps_verdicts(self, grid3d_module, op3d_module,
                                        cutoffs3d_module):
        a = run_all_checks(grid3d_module, op3d_module, cutoffs3d_module,
                           samples=40, seed=1)
        b = run_all_checks(grid3d_module, op3d_module, cutoffs3d_module,
                           samples=40, seed=2)
        assert [r.passed for r in a] == [r.passed for r in b]
        assert any(ra.fitted_constant != rb.fitted_constant
                   for ra, rb in zip(a, b))
