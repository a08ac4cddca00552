"""Randomized spot-check batteries for the operator estimates.

Each battery draws reproducible random fields (frequency-space complex
Gaussian amplitudes under a radial envelope, masked by the relevant cutoff
and odd-symmetrized where required), measures the ratio of the two sides of
an inequality, and reports the fitted constant = the worst observed ratio.
A battery passes when its fitted constant is finite (threshold batteries,
like projection completeness, pass against a fixed tolerance instead).

Per-sample seeds derive from the root seed via numpy's SeedSequence.spawn,
so reports are bit-reproducible for a fixed seed and grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .norms import NormSuite, lp_norm, sobolev_norm, x_weighted_gradient_norm, z_norm
from .operators import CutoffSpec, LinearOperatorSpec, period_inverse_symbol
from .periodic_solver import _rhs_series_data
from .spectral import FREQUENCY, FieldSeries, Grid, SpectralField

COMPLETENESS_TOL = 1e-14


@dataclass
class CheckReport:
    check_name: str
    samples: int
    worst_ratio: float
    fitted_constant: float
    passed: bool
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = {"check_name": self.check_name, "samples": self.samples,
             "worst_ratio": self.worst_ratio,
             "fitted_constant": self.fitted_constant, "passed": self.passed}
        if self.extras:
            d["extras"] = self.extras
        return d


def reports_to_json(reports: list[CheckReport]) -> str:
    return json.dumps([r.as_dict() for r in reports], indent=2, sort_keys=True)


def sample_rngs(seed: int, samples: int) -> list[np.random.Generator]:
    """Documented seed-splitting rule: SeedSequence(seed).spawn(samples)."""
    children = np.random.SeedSequence(seed).spawn(samples)
    return [np.random.default_rng(c) for c in children]


def random_band_field(grid: Grid, rng: np.random.Generator, band: str,
                      cutoffs: CutoffSpec, odd: bool = False) -> SpectralField:
    """Random frequency-space field with unit L2 norm.

    band 'low' masks by chi1 (support |xi| <= r_inf), 'high' by chi_inf
    (support |xi| >= r1), 'full' applies a broad envelope only. The Nyquist
    rows are always zeroed; odd=True antisymmetrizes under xi -> -xi.
    """
    data = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    if band == "low":
        envelope = np.exp(-((grid.xi_abs / cutoffs.r_inf) ** 2)) * cutoffs.chi1
    elif band == "high":
        envelope = np.exp(-((grid.xi_abs / (4.0 * cutoffs.r1)) ** 2)) * cutoffs.chi_inf
    elif band == "full":
        envelope = np.exp(-((grid.xi_abs / (2.0 * cutoffs.r_inf)) ** 2))
    else:
        raise ValueError(f"unknown band {band!r}")
    data = data * envelope * grid.keep_nyquist_free
    if odd:
        data = 0.5 * (data - grid.reflect(data))
        data.flat[0] = 0.0
    norm = np.sqrt((data.real ** 2 + data.imag ** 2).sum() * grid.parseval_factor)
    if norm > 0:
        data = data / norm
    return SpectralField(grid, FREQUENCY, data)


def _fitted_battery_report(name: str, ratios: list[float], extras: dict) -> CheckReport:
    if not ratios:
        raise ValueError(f"{name}: zero-sample battery")
    fitted = float(max(ratios))
    passed = math.isfinite(fitted)
    worst = 1.0 if fitted > 0 else 0.0  # ratios normalized by the fitted constant
    return CheckReport(check_name=name, samples=len(ratios), worst_ratio=worst,
                       fitted_constant=fitted, passed=passed, extras=extras)


def check_projection_completeness(grid: Grid, cutoffs: CutoffSpec,
                                  samples: int = 50, seed: int = 0,
                                  tol: float = COMPLETENESS_TOL) -> CheckReport:
    """P_low f + P_high f must reproduce f (relative L2, threshold battery)."""
    symbol_defect = float(np.abs(cutoffs.chi1 + cutoffs.chi_inf - 1.0).max())
    worst = symbol_defect
    for rng in sample_rngs(seed, samples):
        f = random_band_field(grid, rng, "full", cutoffs)
        recombined = (cutoffs.chi1 * f.data + cutoffs.chi_inf * f.data)
        resid = np.sqrt(np.sum(np.abs(recombined - f.data) ** 2) * grid.parseval_factor)
        worst = max(worst, float(resid))
    return CheckReport(check_name="projection_completeness", samples=samples,
                       worst_ratio=worst / tol, fitted_constant=worst,
                       passed=worst <= tol,
                       extras={"tolerance": tol, "symbol_defect": symbol_defect})


def check_low_freq_smoothing(op: LinearOperatorSpec, cutoffs: CutoffSpec,
                             samples: int = 200, seed: int = 0,
                             t_max: float | None = None) -> CheckReport:
    """(||e^{-tA} u|| + ||d/dt e^{-tA} u||) <= C ||u|| on low-frequency fields,
    t drawn from [0, t_max]; d/dt realized as multiplication by -lambda."""
    grid = op.grid
    horizon = t_max if t_max is not None else op.period
    ratios = []
    for rng in sample_rngs(seed, samples):
        u = random_band_field(grid, rng, "low", cutoffs)
        t = rng.uniform(0.0, horizon)
        decay = np.exp(-t * op.symbol)
        evolved = decay * u.data
        d_dt = -op.symbol * evolved
        pf = grid.parseval_factor
        num = (np.sqrt(np.sum(np.abs(evolved) ** 2) * pf)
               + np.sqrt(np.sum(np.abs(d_dt) ** 2) * pf))
        den = np.sqrt(np.sum(np.abs(u.data) ** 2) * pf)
        ratios.append(num / den)
    return _fitted_battery_report(
        "low_freq_smoothing", ratios,
        {"t_max": horizon, "bound_hint": 1.0 + cutoffs.r_inf ** 2 * horizon})


def check_period_inverse_bound(op: LinearOperatorSpec, cutoffs: CutoffSpec,
                               samples: int = 200, seed: int = 0) -> CheckReport:
    """(||u|| + || |x| grad u ||) <= C ||F||_{L1_w} where (1 - e^{-TA}) u = F,
    for odd low-frequency dipole mixtures F."""
    grid = op.grid
    from .forcing import gauss_dipole
    inv = period_inverse_symbol(op)
    keep = grid.keep_nyquist_free
    ratios = []
    widths = []
    L = grid.box_length
    for rng in sample_rngs(seed, samples):
        profile = np.zeros(grid.shape, dtype=complex)
        for _ in range(3):
            sigma = rng.uniform(L / 32.0, L / 10.0)
            axis = int(rng.integers(0, grid.dim))
            coeff = rng.standard_normal() + 1j * rng.standard_normal()
            profile += coeff * gauss_dipole(grid, sigma, axis)
            widths.append(sigma)
        f_hat = np.fft.fftn(profile) * cutoffs.chi1 * keep
        f_hat = 0.5 * (f_hat - grid.reflect(f_hat))  # exact lattice oddness
        f_hat.flat[0] = 0.0
        F = SpectralField(grid, FREQUENCY, f_hat)
        u = SpectralField(grid, FREQUENCY, inv * f_hat * keep)
        num = lp_norm(u, 2) + x_weighted_gradient_norm(u)
        den = lp_norm(F, 1, weighted=True)
        if den > 0:
            ratios.append(num / den)
    return _fitted_battery_report(
        "period_inverse_bound", ratios,
        {"dipoles_per_sample": 3, "sigma_range": [L / 32.0, L / 10.0]})


def check_high_freq_decay(op: LinearOperatorSpec, cutoffs: CutoffSpec,
                          samples: int = 200, seed: int = 0,
                          n_times: int = 16) -> CheckReport:
    """sup_t e^{a t} ||e^{-tA} u||_{H2_w} / ||u||_{H2_w} <= C with a = r1^2/2
    on high-frequency fields, t on a grid over [0, T]."""
    grid = op.grid
    a = cutoffs.r1 ** 2 / 2.0
    t_grid = np.linspace(0.0, op.period, n_times + 1)
    ratios = []
    for rng in sample_rngs(seed, samples):
        u = random_band_field(grid, rng, "high", cutoffs)
        base = sobolev_norm(u, 2, weighted=True)
        worst = 0.0
        for t in t_grid:
            evolved = SpectralField(grid, FREQUENCY,
                                    np.exp(-t * op.symbol) * u.data)
            val = math.exp(a * t) * sobolev_norm(evolved, 2, weighted=True) / base
            worst = max(worst, val)
        ratios.append(worst)
    return _fitted_battery_report(
        "high_freq_decay", ratios, {"decay_rate_a": a, "time_samples": n_times + 1})


def check_energy_inequality(u_series: FieldSeries, g_series: FieldSeries,
                            op: LinearOperatorSpec, cutoffs: CutoffSpec) -> CheckReport:
    """Dissipation inequality of the high-frequency part along a solved
    trajectory:

        1/2 d/dt ||u_high||_{H2_w}^2 + d ||u_high||_{H3_w}^2 <= C ||F_high||_{H1_w}^2.

    Convention: C is budgeted at twice the zero-dissipation constant (or 1.0
    when the derivative term is nonpositive) and d is the largest value
    admissible under that budget.
    """
    grid = u_series.grid
    U = u_series.to_frequency().data
    G = g_series.to_frequency().data
    F = _rhs_series_data(U, G, grid, True)
    keep = grid.keep_nyquist_free
    u_high = FieldSeries(grid, FREQUENCY, U * (cutoffs.chi_inf * keep), u_series.period)
    f_high = FieldSeries(grid, FREQUENCY, F * (cutoffs.chi_inf * keep), u_series.period)

    from .norms import _weighted_hk_node_norms
    hk = _weighted_hk_node_norms(u_high.data, grid, 3)
    e2_sq = hk[2] ** 2
    e3_sq = hk[3] ** 2
    f1_sq = _weighted_hk_node_norms(f_high.data, grid, 1)[1] ** 2
    if float(e2_sq.max()) == 0.0:
        raise ValueError("degenerate (all-zero) trajectory")

    m_t = u_series.n_steps
    h = u_series.dt
    body = e2_sq[:m_t]
    deriv = (np.roll(body, -1) - np.roll(body, 1)) / (2.0 * h)
    e3b, f1b = e3_sq[:m_t], np.maximum(f1_sq[:m_t], np.finfo(float).tiny)

    c0 = float((0.5 * deriv / f1b).max())
    c_budget = 2.0 * c0 if c0 > 0 else 1.0
    with np.errstate(divide="ignore"):
        d_candidates = (c_budget * f1b - 0.5 * deriv) / np.maximum(e3b, np.finfo(float).tiny)
    d_star = float(d_candidates.min())
    passed = math.isfinite(d_star) and d_star > 0 and math.isfinite(c_budget)
    return CheckReport(check_name="energy_inequality", samples=m_t,
                       worst_ratio=1.0, fitted_constant=c_budget, passed=passed,
                       extras={"d": d_star, "zero_dissipation_constant": c0})


def check_nonlinear_bound(u_series: FieldSeries, g_series: FieldSeries,
                          op: LinearOperatorSpec, cutoffs: CutoffSpec) -> list[CheckReport]:
    """Size of the projected right-hand side against the cubic power of the
    solution norm plus the matching projected forcing norm:

        ||F_low||_{L2(t;L1_w)}  <= C (||u||_Z^3 + ||g_low||_{L2(t;L1_w)}),
        ||F_high||_{L2(t;H1_w)} <= C (||u||_Z^3 + ||g_high||_{L2(t;H1_w)}).
    """
    from .norms import _trapz, _weighted_hk_node_norms, _spatial_axes
    grid = u_series.grid
    suite = NormSuite.for_grid(grid)
    axes = _spatial_axes(grid)
    U = u_series.to_frequency().data
    G = g_series.to_frequency().data
    F = _rhs_series_data(U, G, grid, True)
    keep = grid.keep_nyquist_free
    h = u_series.dt
    z = z_norm(u_series, cutoffs)

    def l2t_l1w(data):
        phys = np.fft.ifftn(data, axes=axes)
        node = (np.abs(phys) * suite.weight).sum(axis=axes) * grid.quad_weight
        return float(np.sqrt(_trapz(node ** 2, dx=h)))

    def l2t_h1w(data):
        node = _weighted_hk_node_norms(data, grid, 1)[1]
        return float(np.sqrt(_trapz(node ** 2, dx=h)))

    lhs_low = l2t_l1w(F * (cutoffs.chi1 * keep))
    g_low = l2t_l1w(G * (cutoffs.chi1 * keep))
    lhs_high = l2t_h1w(F * (cutoffs.chi_inf * keep))
    g_high = l2t_h1w(G * (cutoffs.chi_inf * keep))

    reports = []
    for name, lhs, g_term in (("nonlinear_bound_low_freq", lhs_low, g_low),
                              ("nonlinear_bound_high_freq", lhs_high, g_high)):
        rhs = z ** 3 + g_term
        c = lhs / rhs if rhs > 0 else float("inf")
        reports.append(CheckReport(
            check_name=name, samples=len(u_series), worst_ratio=1.0,
            fitted_constant=float(c), passed=math.isfinite(c),
            extras={"z_norm": z, "g_term": g_term, "lhs": lhs}))
    return reports


# ---------------------------------------------------------------------------
# Norm-level inequality spot-checks
# ---------------------------------------------------------------------------


def check_bernstein(grid: Grid, cutoffs: CutoffSpec, samples: int = 100,
                    seed: int = 0) -> CheckReport:
    """Low-frequency fields: ||grad f|| <= r_inf ||f|| exactly per mode, and
    ||f||_{L^p} <= C ||f||_{L2} with C measured for p in {3, 6, inf}."""
    grad_ratios = []
    lp_consts = {3: 0.0, 6: 0.0, math.inf: 0.0}
    for rng in sample_rngs(seed, samples):
        f = random_band_field(grid, rng, "low", cutoffs)
        l2 = lp_norm(f, 2)
        grad = math.sqrt(float((grid.xi_sq * (f.data.real ** 2 + f.data.imag ** 2)).sum())
                         * grid.parseval_factor)
        grad_ratios.append(grad / (cutoffs.r_inf * l2))
        for p in lp_consts:
            lp_consts[p] = max(lp_consts[p], lp_norm(f, p) / l2)
    worst = float(max(grad_ratios))
    fitted = float(lp_consts[math.inf])
    passed = worst <= 1.0 + 1e-12 and all(math.isfinite(v) for v in lp_consts.values())
    return CheckReport(check_name="bernstein_low_freq", samples=samples,
                       worst_ratio=worst, fitted_constant=fitted, passed=passed,
                       extras={"c_l3": lp_consts[3], "c_l6": lp_consts[6],
                               "c_linf": lp_consts[math.inf]})


def check_hardy(grid: Grid, samples: int = 100, seed: int = 0) -> CheckReport:
    """|| f/|x| ||_{L2} <= C ||grad f||_{L2} on smooth fields vanishing at the
    box edge; the origin node is excluded from the quadrature."""
    suite = NormSuite.for_grid(grid)
    window = np.exp(-grid.x_abs ** 2 / (2.0 * (grid.box_length / 8.0) ** 2))
    inv_x = np.zeros(grid.shape)
    nonzero = grid.x_abs > 0
    inv_x[nonzero] = 1.0 / grid.x_abs[nonzero]
    ratios = []
    for rng in sample_rngs(seed, samples):
        raw = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
        envelope = np.exp(-((grid.xi_abs * grid.box_length / (8.0 * np.pi)) ** 2))
        f_phys = np.fft.ifftn(raw * envelope * grid.keep_nyquist_free) * window
        f_hat = np.fft.fftn(f_phys)
        num_sq = ((np.abs(f_phys) * inv_x) ** 2).sum() * grid.quad_weight
        grad_sq = 0.0
        for axis in range(grid.dim):
            alpha = tuple(1 if a == axis else 0 for a in range(grid.dim))
            d = np.fft.ifftn(f_hat * suite.alpha_symbol(alpha))
            grad_sq += (np.abs(d) ** 2).sum() * grid.quad_weight
        if grad_sq > 0:
            ratios.append(math.sqrt(num_sq / grad_sq))
    return _fitted_battery_report("hardy_inequality", ratios,
                                  {"origin_node_excluded": True})


def check_high_freq_weighted_poincare(grid: Grid, cutoffs: CutoffSpec,
                                      samples: int = 100, seed: int = 0) -> CheckReport:
    """High-frequency fields: (r1^2/2) || |x| f ||^2 <= || |x| grad f ||^2 + C ||f||^2
    with C measured as the worst deficit."""
    consts = []
    for rng in sample_rngs(seed, samples):
        f = random_band_field(grid, rng, "high", cutoffs)
        phys = np.fft.ifftn(f.data)
        x_f_sq = ((np.abs(phys) * grid.x_abs) ** 2).sum() * grid.quad_weight
        xg = x_weighted_gradient_norm(f) ** 2
        l2_sq = lp_norm(f, 2) ** 2
        deficit = max(0.0, (cutoffs.r1 ** 2 / 2.0) * x_f_sq - xg)
        consts.append(deficit / l2_sq)
    return _fitted_battery_report("high_freq_weighted_poincare", consts,
                                  {"r1": cutoffs.r1})


def run_all_checks(grid: Grid, op: LinearOperatorSpec, cutoffs: CutoffSpec,
                   samples: int = 200, seed: int = 0,
                   u_series: FieldSeries | None = None,
                   g_series: FieldSeries | None = None) -> list[CheckReport]:
    """The full battery set; trajectory checks run only when a solved run is
    supplied. Sub-seeds are decorrelated by fixed offsets from the root."""
    ineq_samples = max(20, samples // 2)
    reports = [
        check_projection_completeness(grid, cutoffs, max(20, samples // 4), seed),
        check_low_freq_smoothing(op, cutoffs, samples, seed + 1),
        check_period_inverse_bound(op, cutoffs, samples, seed + 2),
        check_high_freq_decay(op, cutoffs, max(20, samples // 4), seed + 3),
        check_bernstein(grid, cutoffs, ineq_samples, seed + 4),
        check_hardy(grid, ineq_samples, seed + 5),
        check_high_freq_weighted_poincare(grid, cutoffs, ineq_samples, seed + 6),
    ]
    if u_series is not None and g_series is not None:
        reports.append(check_energy_inequality(u_series, g_series, op, cutoffs))
        reports.extend(check_nonlinear_bound(u_series, g_series, op, cutoffs))
    return reports
