"""Probe checks: residual formulas, exponent fitting, report invariants."""

import math

import numpy as np
import pytest

from sliceproj import (InvalidInputError, SolverConfig, curve_step,
                       fit_exponent, make_cone, normal_curve,
                       probe_semismoothness, report_from_json, report_to_csv,
                       report_to_json, residual_exact, residual_numeric)

CFG = SolverConfig()


@pytest.fixture(scope="module")
def models():
    return {n: make_cone(n) for n in range(2, 7)}


def test_residual_exact_frozen_value(models):
    # closed form 1 - (1 - 0.5^(4/3))^(1/4), cross-checked against the
    # direct dot product of the curve step with the normal generator
    model = models[2]
    vec, norm = residual_exact(model, 0.5)
    h = curve_step(model, 0.5)
    w = normal_curve(model, 0.5)
    direct = float(h.coords @ w.coords)
    assert direct == pytest.approx(0.11873547987203023, rel=1e-13)
    assert norm == pytest.approx(direct / w.norm(), rel=1e-13)
    assert norm == pytest.approx(0.06433106276481933, rel=1e-12)


def test_residual_exact_parallel_to_generator(models):
    for n, model in models.items():
        for t in (1e-3, 0.2, 0.8):
            vec, norm = residual_exact(model, t)
            w = normal_curve(model, t)
            cos = float(vec.coords @ w.coords) / (
                np.linalg.norm(vec.coords) * w.norm())
            assert cos == pytest.approx(1.0, abs=1e-12)
            assert norm == pytest.approx(np.linalg.norm(vec.coords), rel=1e-13)


def test_residual_exact_small_t_limit(models):
    # first-order expansion: norm / t^lam -> 1 / (kappa * ||w(0)||) with
    # ||w(0)||^2 = n + 1; deviation at t = 1e-6 is the higher-order tail
    t = 1e-6
    for n, rel_tol in ((2, 1e-4), (3, 5e-3)):
        model = models[n]
        _, norm = residual_exact(model, t)
        limit = 1.0 / (model.kappa * math.sqrt(n + 1))
        assert norm / t ** model.lam == pytest.approx(limit, rel=rel_tol)
        w0 = normal_curve(model, 0.0)
        assert w0.norm() ** 2 == pytest.approx(n + 1, rel=1e-14)


def test_residual_exact_endpoint_guard(models):
    for t in (0.0, 1.0, -0.1):
        with pytest.raises(InvalidInputError):
            residual_exact(models[2], t)


def test_residual_numeric_variants_agree(models):
    model = models[2]
    t, fd_step = 0.3, 1e-6
    res = residual_numeric(model, t, CFG, fd_step)
    _, exact_norm = residual_exact(model, t)
    # variant (i) is the analytic tangent projection: same formula
    assert res.norm_analytic == pytest.approx(exact_norm, rel=1e-12)
    # variant (ii) is the finite-difference oracle
    assert res.discrepancy <= max(1e-4, 5.0 * fd_step)
    h = curve_step(model, t)
    assert 0.0 < res.norm < h.norm()


def test_residual_numeric_guards(models):
    with pytest.raises(InvalidInputError):
        residual_numeric(models[2], 0.0, CFG)
    with pytest.raises(InvalidInputError):
        residual_numeric(models[2], 0.5, CFG, fd_step=0.0)


def test_fit_exponent_synthetic_power_laws():
    t = np.logspace(-4, -1, 12)
    slope, intercept, dev = fit_exponent(t, 0.7 * t ** 1.5)
    assert slope == pytest.approx(1.5, abs=1e-10)
    assert intercept == pytest.approx(math.log(0.7), abs=1e-10)
    assert dev <= 1e-12
    slope, _, _ = fit_exponent(t, 3.0 * t)
    assert slope == pytest.approx(1.0, abs=1e-10)


def test_fit_exponent_guards():
    t = np.logspace(-3, -1, 6)
    with pytest.raises(InvalidInputError):
        fit_exponent(t, np.zeros(6))
    with pytest.raises(InvalidInputError):
        fit_exponent(t[:4], t[:4])
    with pytest.raises(InvalidInputError):
        fit_exponent(t, -t)


def test_fit_recovers_exponent_from_exact_residuals(models):
    model = models[2]
    t = np.logspace(-4, -1, 20)
    residuals = np.array([residual_exact(model, ti)[1] for ti in t])
    slope, _, _ = fit_exponent(t, residuals)
    assert abs(slope - 4.0 / 3.0) <= 0.02


def test_probe_exact_implied_orders(models):
    report2 = probe_semismoothness(models[2], "exact")
    assert abs(report2.implied_order - 1.0 / 3.0) <= 0.02
    assert report2.implied_order == report2.fitted_slope - 1.0
    report5 = probe_semismoothness(models[5], "exact")
    assert abs(report5.implied_order - 1.0 / 31.0) <= 0.02


def test_probe_step_norm_ratios(models):
    # ||h|| = Theta(t): the exact bracket is [1, sqrt(2)] since the second
    # step component (1-t^lam)^(1/lam) - 1 is negative and smaller than t in
    # magnitude; for n = 2 the default grid stays within a tight band, while
    # larger n drift toward sqrt(2) at the top of the grid
    for n, model in models.items():
        report = probe_semismoothness(model, "exact")
        ratio = report.h_norms / report.t_grid
        assert np.all(ratio >= 1.0 - 1e-12)
        assert np.all(ratio <= math.sqrt(2.0) + 1e-12)
        if n == 2:
            assert np.all(ratio >= 0.9) and np.all(ratio <= 1.1)


def test_probe_monotone_degradation(models):
    orders = [probe_semismoothness(models[n], "exact").implied_order
              for n in range(2, 7)]
    assert all(a > b for a, b in zip(orders, orders[1:]))


def test_probe_scaling_sandwich(models):
    for n, model in models.items():
        report = probe_semismoothness(model, "exact")
        ratio = report.residual_norms / report.t_grid ** model.lam
        assert ratio.max() / ratio.min() <= 2.0


def test_probe_fit_quality(models):
    for n, model in models.items():
        report = probe_semismoothness(model, "exact")
        _, _, dev = fit_exponent(report.t_grid, report.residual_norms)
        assert dev <= 0.05


def test_probe_exact_numeric_consistency_spot(models):
    model = models[2]
    t = 1e-2
    _, exact_norm = residual_exact(model, t)
    numeric = residual_numeric(model, t, CFG, 1e-6)
    assert numeric.norm == pytest.approx(exact_norm, rel=0.05)


def test_probe_grid_validation(models):
    with pytest.raises(InvalidInputError):
        probe_semismoothness(models[2], "exact", t_min=0.0)
    with pytest.raises(InvalidInputError):
        probe_semismoothness(models[2], "exact", t_min=0.5, t_max=0.1)
    with pytest.raises(InvalidInputError):
        probe_semismoothness(models[2], "exact", points=4)
    with pytest.raises(InvalidInputError):
        probe_semismoothness(models[2], "spectral")


def test_report_serialization_round_trip(models):
    report = probe_semismoothness(models[3], "exact")
    again = report_from_json(report_to_json(report))
    assert np.array_equal(again.t_grid, report.t_grid)
    assert np.array_equal(again.residual_norms, report.residual_norms)
    assert again.fitted_slope == report.fitted_slope

    csv_text = report_to_csv(report)
    lines = csv_text.strip().splitlines()
    assert lines[0] == "t,h_norm,residual_norm"
    assert lines[-1].startswith("# slope=")
    for i, line in enumerate(lines[1:-1]):
        t, h, r = (float(tok) for tok in line.split(","))
        assert t == report.t_grid[i]
        assert h == report.h_norms[i]
        assert r == report.residual_norms[i]


def test_probe_numeric_mode_matches_exact_slope(models):
    model = models[2]
    report = probe_semismoothness(model, "numeric", points=6,
                                  t_min=1e-3, t_max=1e-1, cfg=CFG)
    assert abs(report.fitted_slope - model.lam) <= 0.05


def test_probe_numeric_parallel_evaluation_is_deterministic(models):
    model = models[2]
    serial = probe_semismoothness(model, "numeric", points=5,
                                  t_min=1e-2, t_max=1e-1, cfg=CFG, jobs=1)
    threaded = probe_semismoothness(model, "numeric", points=5,
                                    t_min=1e-2, t_max=1e-1, cfg=CFG, jobs=4)
    assert np.array_equal(serial.residual_norms, threaded.residual_norms)
    assert serial.fitted_slope == threaded.fitted_slope
