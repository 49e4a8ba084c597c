from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from pathsampler.exact import R, entropy_bits
from pathsampler.paths import ContractError, Model
from pathsampler.randomness import (LOG2_3, SCHROEDER_STEP_ENTROPY, BitSource, bernoulli, categorical,
                                    colored_step_entropy, draw_step, next_bit, parse_seed, uniform_int)


def within_3sigma(hits, trials, p):
    return abs(hits / trials - p) <= 3 * math.sqrt(p * (1 - p) / trials)


def test_parse_seed():
    assert parse_seed("42") == 42
    assert parse_seed("0x2A") == 42
    assert parse_seed(7) == 7
    for bad in ("-1", str(2**64), "zz"):
        with pytest.raises(ValueError):
            parse_seed(bad)


def test_determinism_and_distinct_seeds():
    a = [next_bit(BitSource(5)) for _ in range(1)]
    b = [next_bit(BitSource(5)) for _ in range(1)]
    assert a == b
    s, t = BitSource(1), BitSource(2)
    assert [s.next_bit() for _ in range(64)] != [t.next_bit() for _ in range(64)]
    u, v = BitSource(1, trial=0), BitSource(1, trial=1)
    assert [u.next_bit() for _ in range(64)] != [v.next_bit() for _ in range(64)]


def test_next_bit_balance_and_meters():
    src = BitSource(3)
    bits = [src.next_bit() for _ in range(10**6)]
    assert abs(np.mean(bits) - 0.5) < 0.002
    assert src.meter.physical_bits == 10**6 and src.meter.model_entropy_bits == 10**6


def test_bernoulli_edges():
    src = BitSource(0)
    assert bernoulli(src, 0) is False and bernoulli(src, 1) is True
    assert src.meter.physical_bits == 0 and src.meter.model_entropy_bits == 0
    bernoulli(src, Fraction(1, 2))
    assert src.meter.physical_bits == 1
    with pytest.raises(ContractError):
        bernoulli(src, Fraction(3, 2))
    with pytest.raises(ContractError):
        bernoulli(src, -R)


def test_bernoulli_r_first_bit_one_is_false():
    for seed in range(200):
        src = BitSource(seed)
        first = BitSource(seed).next_bit()
        out = bernoulli(src, R)
        if first == 1:
            assert out is False and src.meter.physical_bits == 1


@pytest.mark.parametrize("p", [Fraction(1, 4), Fraction(1, 2), R, R * R, 1 / (1 + R), 5 / (5 + R)])
def test_bernoulli_frequencies_and_cost(p):
    src = BitSource(11)
    n = 300_000
    hits = sum(src.bernoulli(p) for _ in range(n))
    assert within_3sigma(hits, n, float(p))
    h = entropy_bits([p, 1 - p])
    assert math.isclose(src.meter.model_entropy_bits, n * h, rel_tol=1e-9)
    assert src.meter.physical_bits / n <= h + 2


def test_uniform_int():
    src = BitSource(0)
    assert uniform_int(src, 1) == 0 and src.meter.physical_bits == 0
    assert src.meter.model_entropy_bits == 0
    uniform_int(src, 2)
    assert src.meter.physical_bits == 1
    with pytest.raises(ContractError):
        uniform_int(src, 0)
    src = BitSource(1)
    n = 300_000
    counts = np.bincount([src.uniform_int(3) for _ in range(n)], minlength=3)
    assert np.all(np.abs(counts / n - 1 / 3) < 0.005)
    assert math.isclose(src.meter.model_entropy_bits, n * math.log2(3), rel_tol=1e-9)
    assert src.meter.physical_bits / n < math.log2(3) + 2


def test_categorical():
    src = BitSource(0)
    assert categorical(src, [1]) == 0 and src.meter.physical_bits == 0
    n = 100_000
    out = [src.categorical([Fraction(1, 3), Fraction(1, 3)]) for _ in range(n)]
    assert abs(out.count(None) / n - 1 / 3) < 0.005
    src = BitSource(2)
    p = 1 / (1 + R)
    rej = sum(src.categorical([p]) is None for _ in range(100_000))
    assert within_3sigma(rej, 100_000, float(1 - p))
    assert src.meter.physical_bits / 100_000 <= entropy_bits([p, 1 - p]) + 2
    with pytest.raises(ContractError):
        categorical(src, [Fraction(2, 3), Fraction(2, 3)])
    with pytest.raises(ContractError):
        categorical(src, [Fraction(-1, 3)])


def test_draw_step_schroeder():
    src = BitSource(4)
    n = 10**6
    steps = [src.draw_step(Model.SCHROEDER) for _ in range(n)]
    r = float(R)
    assert abs(steps.count("U") / n - r) < 0.002
    assert abs(steps.count("F") / n - r * r) < 0.002
    assert math.isclose(src.meter.model_entropy_bits, n * SCHROEDER_STEP_ENTROPY, rel_tol=1e-9)


def test_draw_step_motzkin_and_colored():
    src = BitSource(5)
    draw_step(src, Model.MOTZKIN)
    assert src.meter.model_entropy_bits == LOG2_3
    src = BitSource(6)
    n = 10**6
    steps = [src.draw_step(Model.COLORED, Fraction(1)) for _ in range(n)]
    for s in "UFDC":
        assert abs(steps.count(s) / n - 0.25) < 0.002
    assert colored_step_entropy(Fraction(1)) == 2.0
    with pytest.raises(ContractError):
        src.draw_step(Model.COLORED)


def test_meter_identity_over_mixed_calls():
    src = BitSource(9)
    rng = np.random.default_rng(0)
    expected = 0.0
    for _ in range(2000):
        k = rng.integers(4)
        if k == 0:
            m = int(rng.integers(1, 50))
            src.uniform_int(m)
            expected += math.log2(m) if m > 1 else 0.0
        elif k == 1:
            src.bernoulli(R)
            expected += entropy_bits([R, 1 - R])
        elif k == 2:
            src.categorical([R, R])
            expected += entropy_bits([R, R, 1 - 2 * R])
        else:
            src.draw_step(Model.SCHROEDER)
            expected += entropy_bits([R, R * R, R])
    assert math.isclose(src.meter.model_entropy_bits, expected, rel_tol=1e-12)
    assert set(src.meter.to_dict()) == {"model_entropy_bits", "physical_bits"}
