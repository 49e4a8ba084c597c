from __future__ import annotations

import csv
import io
import math
from fractions import Fraction

import numpy as np
import pytest

from pathsampler import metrics
from pathsampler.oracles import _fc_weight, enumerate_paths
from pathsampler.paths import ContractError, Model


def brute_entropy(kind, n, c):
    w = np.array([float(_fc_weight(p.text, c)) for p in enumerate_paths(Model.COLORED, kind, n)])
    p = w / w.sum()
    return float(-(p * np.log2(p)).sum())


@pytest.mark.parametrize("c", [Fraction(1, 2), Fraction(1), Fraction(3)])
def test_colored_entropy_matches_enumeration(c):
    for kind in ("positive", "excursion"):
        for n in range(1, 8):
            assert metrics.output_entropy(Model.COLORED, kind, n, c) == pytest.approx(brute_entropy(kind, n, c), abs=1e-9)


def test_plain_output_entropy_is_log_count():
    assert metrics.output_entropy("motzkin", "positive", 2) == pytest.approx(math.log2(5))
    with pytest.raises(ContractError):
        metrics.output_entropy(Model.COLORED, "positive", metrics.COLORED_ENTROPY_MAX_N + 1, 2)


def test_run_metered_report():
    rep = metrics.run_metered("motzkin-positive", 500, 40, seed=3)
    assert rep.trials == 40 and len(rep.time_factor) == 40
    assert 1.0 <= rep.mean_time_factor < 3.0
    assert 0 <= rep.first_try_rate <= 1
    assert rep.physical_bits.mean() >= rep.mean_entropy_bits
    s = rep.summary()
    for key in ("sampler", "n", "trials", "seed", "weight", "backend", "mean_time_factor",
                "std_time_factor", "time_factor_quantiles", "mean_entropy_bits", "mean_physical_bits",
                "entropy_factor", "success_rate", "mean_restarts", "mean_failed_work"):
        assert key in s
    assert s["success_rate"] == rep.first_try_rate
    assert 0.9 < s["entropy_factor"] < 1.3


def test_run_metered_is_deterministic_and_worker_invariant():
    a = metrics.run_metered("schroeder-excursion", 200, 12, seed=5)
    b = metrics.run_metered("schroeder-excursion", 200, 12, seed=5, workers=2)
    assert np.array_equal(a.time_factor, b.time_factor)
    assert np.array_equal(a.restarts, b.restarts)
    assert np.allclose(a.entropy_bits, b.entropy_bits)


def test_backends_give_identical_reports():
    from pathsampler import engine

    if "cython" not in engine.available_backends():
        pytest.skip("compiled core not built")
    a = metrics.run_metered("little-positive", 101, 10, seed=1, backend="python")
    b = metrics.run_metered("little-positive", 101, 10, seed=1, backend="cython")
    assert np.array_equal(a.time_factor, b.time_factor) and np.allclose(a.entropy_bits, b.entropy_bits)


def test_csv_rows():
    rep = metrics.run_metered("motzkin-excursion", 50, 5, seed=0)
    buf = io.StringIO()
    rep.write_csv(buf)
    rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert tuple(rows[0]) == metrics.CSV_FIELDS and len(rows) == 5
    assert [int(r["trial"]) for r in rows] == list(range(5))
    assert float(rows[2]["time_factor"]) == pytest.approx(rep.time_factor[2])


def test_success_rate_band():
    p, lo, hi = metrics.success_rate_band("motzkin", 1000, 10_000)
    assert lo < p < hi and hi - lo == pytest.approx(6 * math.sqrt(p * (1 - p) / 10_000))


def test_limit_law_moments():
    s = metrics.simulate_limit_law(200_000, seed=1)
    # E[S] = 1/4 and Var[S] = 1/12 for the process with density 1/(2x) on (0, 1]
    assert s.s.mean() == pytest.approx(0.25, abs=0.003)
    assert s.s.var() == pytest.approx(1 / 12, abs=0.003)
    assert s.one_plus_s_plus_u.mean() == pytest.approx(1.75, abs=0.005)
    assert s.points.mean() == pytest.approx(0.5 * math.log(1e6), rel=0.01)
    with pytest.raises(ContractError):
        metrics.simulate_limit_law(10, eps=0.5)


def test_distribution_tests_calibration():
    rng = np.random.default_rng(0)
    same = metrics.distribution_tests(rng.random(5000), rng.random(5000))
    assert same.ks < 0.035 and same.chi2_pvalue > 1e-3
    diff = metrics.distribution_tests(rng.random(5000), rng.random(5000) ** 1.3)
    assert diff.ks > 0.05 and diff.chi2_pvalue < 1e-3
    with pytest.raises(ContractError):
        metrics.distribution_tests([0.1] * 10, [0.2] * 10)


def test_chi_square_uniform():
    stat, p, dof = metrics.chi_square_uniform([100, 100, 100])
    assert stat == 0 and p == pytest.approx(1) and dof == 2
    stat, p, _ = metrics.chi_square_uniform([100, 200], weights=[1, 2])
    assert stat == pytest.approx(0)


def test_empirical_uniformity():
    stat, p, dof = metrics.empirical_uniformity("schroeder-positive", 5, 4000, seed=2)
    assert dof == 24 and p > 1e-3
    stat, p, dof = metrics.empirical_uniformity("colored-positive", 3, 4000, seed=2, c=Fraction(2))
    assert p > 1e-3
