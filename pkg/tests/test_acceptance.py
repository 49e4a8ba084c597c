"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v -s`` or ``python tests/test_acceptance.py``.
Criteria 5-7 draw about two billion steps; with the compiled core that is a few minutes.
"""

from __future__ import annotations

import math
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from pathsampler import cli, engine, metrics, oracles
from pathsampler.exact import R, entropy_bits, to_float
from pathsampler.paths import Model, Path, fold, is_positive, lift, unfold
from pathsampler.randomness import BitSource

SEED = 2024
FACTOR_N, FACTOR_TRIALS, FACTOR_TOL = 100_000, 2000, 0.02
ENTROPY_BAND = (1.0, 1.01)
FLORENTINE_N, FLORENTINE_TOL = 10_000, 0.1
KS_N, KS_TRIALS, KS_MAX = 100_000, 5000, 0.05
SUCCESS_N, SUCCESS_RUNS = 1000, 10_000


def _line(k: int, ok: bool, detail: str) -> str:
    return f"CRITERION {k}: {'PASS' if ok else 'FAIL'}  {detail}"


# -- criteria ---------------------------------------------------------------------------------


def criterion_1():
    t0 = time.perf_counter()
    checks = cli.suite_uniformity_exact(6)
    dt = time.perf_counter() - t0
    bad = [c["check"] for c in checks if not c["ok"]]
    ok = not bad and dt < 60
    return ok, f"exact uniformity: {len(checks) - len(bad)}/{len(checks)} laws exact in {dt:.1f} s (limit 60 s)" + (
        f"; failing {bad[:3]}" if bad else "")


def criterion_2():
    t0 = time.perf_counter()
    checks = cli.suite_lemmas(10)
    dt = time.perf_counter() - t0
    bad = [c["check"] for c in checks if not c["ok"]]
    ok = not bad and dt < 120
    return ok, f"lemma equalities: {len(checks) - len(bad)}/{len(checks)} exact in {dt:.1f} s (limit 120 s)" + (
        f"; failing {bad[:3]}" if bad else "")


def _unfold_is_bijective(model: Model, n: int) -> bool:
    images = []
    for w in oracles.enumerate_paths(model, "lukasiewicz", n):
        for j in range(len(w)):
            sigma, tau = Path.from_text(w.text[:j], model), Path.from_text(w.text[j:], model)
            u = unfold(sigma, tau)
            if [x.text for x in fold(u)] != [sigma.text, tau.text]:
                return False
            images.append(u.text)
    odd = {p.text for p in oracles.enumerate_paths(model, "positive", n) if p.height % 2}
    return len(images) == len(set(images)) and set(images) == odd


def _lift_is_bijective(n: int) -> bool:
    big = [w for w in oracles.enumerate_paths(Model.SCHROEDER, "excursion", n) if not w.little]
    images = {lift(w).text + "D" for w in big}
    little = {w.text for w in oracles.enumerate_paths(Model.SCHROEDER, "little-excursion", n)}
    return len(images) == len(big) and images == little


def criterion_3():
    unfold_ok = all(_unfold_is_bijective(m, n) for m in (Model.MOTZKIN, Model.SCHROEDER) for n in range(1, 13))
    lift_ok = all(_lift_is_bijective(n) for n in range(2, 15, 2))
    twice_ok = all(oracles.count(Model.SCHROEDER, "excursion", n)
                   == 2 * oracles.count(Model.SCHROEDER, "little-excursion", n) for n in range(2, 15))
    ok = unfold_ok and lift_ok and twice_ok
    return ok, (f"unfold/fold bijection n<=12: {unfold_ok}; lift bijection n<=14: {lift_ok}; "
                f"count = 2*little for 2<=n<=14: {twice_ok}")


def criterion_4():
    checks = cli.suite_counts(12)
    bad = [c["check"] for c in checks if not c["ok"]]
    mot = [oracles.count(Model.MOTZKIN, "excursion", n) for n in range(8)]
    sch = [oracles.count(Model.SCHROEDER, "excursion", n) for n in range(0, 9, 2)]
    lit = [oracles.count(Model.SCHROEDER, "little-excursion", n) for n in range(0, 9, 2)]
    seq_ok = (mot == [1, 1, 2, 4, 9, 21, 51, 127] and sch == [1, 2, 6, 22, 90] and lit == [1, 1, 3, 11, 45])
    ok = not bad and seq_ok
    return ok, f"counts: DP = enumeration for {len(checks) - len(bad)}/{len(checks)} classes; motzkin {mot}, schroeder {sch}, little {lit}"


def criterion_5():
    parts, ok = [], True
    for n in (100, 1000, 10_000):
        s = oracles.success_probability_exact(Model.MOTZKIN, n)[1]
        ok &= 0.86 < s < 0.90
        parts.append(f"M({n})={s:.5f}")
    for n in (100, 1000, 10_000):
        s = oracles.success_probability_exact(Model.SCHROEDER, n)[1]
        ok &= s > 0.94
        parts.append(f"S({n})={s:.5f}")
    for model, name in ((Model.MOTZKIN, "motzkin-positive"), (Model.SCHROEDER, "schroeder-approx")):
        p, lo, hi = metrics.success_rate_band(model, SUCCESS_N, SUCCESS_RUNS)
        rate = metrics.run_metered(name, SUCCESS_N, SUCCESS_RUNS, seed=SEED).first_try_rate
        ok &= lo <= rate <= hi
        parts.append(f"{model.value} first-try {rate:.4f} in [{lo:.4f}, {hi:.4f}]")
    return ok, "success: " + ", ".join(parts)


def criterion_6():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, target in (("motzkin-positive", 1.25), ("schroeder-positive", 1.25),
                         ("motzkin-excursion", 1.75), ("schroeder-excursion", 1.75)):
        rep = metrics.run_metered(name, FACTOR_N, FACTOR_TRIALS, seed=SEED)
        tf, ef = rep.mean_time_factor, metrics.entropy_factor(rep)
        good = abs(tf - target) <= FACTOR_TOL and ENTROPY_BAND[0] <= ef <= ENTROPY_BAND[1]
        ok &= good
        parts.append(f"{name} time {tf:.4f} (target {target}) entropy {ef:.4f}")
    rep = metrics.run_metered("florentine-motzkin", FLORENTINE_N, FACTOR_TRIALS, seed=SEED)
    tf, ef = rep.mean_time_factor, metrics.entropy_factor(rep)
    ok &= abs(tf - 2) <= FLORENTINE_TOL and abs(ef - 2) <= FLORENTINE_TOL
    parts.append(f"florentine time {tf:.4f} entropy {ef:.4f}")
    dt = time.perf_counter() - t0
    ok &= dt < 600
    return ok, "factors: " + "; ".join(parts) + f"; {dt:.0f} s (limit 600 s)"


def criterion_7():
    rep = metrics.run_metered("motzkin-positive", KS_N, KS_TRIALS, seed=SEED + 1)
    law = metrics.simulate_limit_law(KS_TRIALS, eps=1e-6, seed=SEED)
    ks, _ = metrics.ks_distance(rep.time_factor - 1, law.s)
    big = metrics.simulate_limit_law(200_000, eps=1e-6, seed=SEED)
    mean, var = float(big.s.mean()), float(big.s.var())
    ok = ks < KS_MAX and abs(mean - 0.25) <= 0.01 and abs(var - 1 / 12) <= 0.01
    return ok, f"limit law: KS {ks:.4f} (limit {KS_MAX}), E[S] {mean:.4f}, Var[S] {var:.4f}"


def criterion_8():
    src = BitSource(SEED)
    draws = 300_000
    hits = sum(src.bernoulli(R) for _ in range(draws))
    r = to_float(R)
    sigma = math.sqrt(r * (1 - r) / draws)
    h = entropy_bits([R, 1 - R])
    per = src.meter.physical_bits / draws
    ok = abs(hits / draws - r) <= 3 * sigma and per <= h + 2
    return ok, (f"bernoulli(r): freq {hits / draws:.5f} vs {r:.5f} (3 sigma {3 * sigma:.5f}), "
                f"{per:.3f} bits per draw vs entropy {h:.3f}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8]


# -- pytest wiring ---------------------------------------------------------------------------


@pytest.mark.parametrize("k", range(1, 9))
def test_criterion(k, capsys):
    ok, detail = CRITERIA[k - 1]()
    with capsys.disabled():
        print("\n" + _line(k, ok, detail))
    assert ok, detail


if __name__ == "__main__":
    print(f"backend: {engine.BACKEND}")
    failed = 0
    for k, fn in enumerate(CRITERIA, 1):
        ok, detail = fn()
        failed += not ok
        print(_line(k, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
