from __future__ import annotations

from fractions import Fraction

import pytest

from pathsampler import engine
from pathsampler.motzkin import MotzkinParams, recover_colored, recover_motzkin, sample_excursion, sample_positive
from pathsampler.oracles import ScriptedSource, enumerate_paths, exact_recover_dist, exact_sampler_dist
from pathsampler.paths import ContractError, Model, Path, is_positive
from pathsampler.randomness import BitSource

M, C = Model.MOTZKIN, Model.COLORED


def test_params():
    assert MotzkinParams(3).q_n == Fraction(1, 7)
    assert MotzkinParams(3, Fraction(2)).q_n == Fraction(1, 8)
    assert MotzkinParams(3, Fraction(1, 2)).q_n == Fraction(1, 7)
    assert MotzkinParams(0).q_n == 1
    with pytest.raises(ContractError):
        MotzkinParams(-1)
    with pytest.raises(ContractError):
        MotzkinParams(2, Fraction(-1))


def test_recover_examples():
    d = exact_recover_dist(M, "D")
    assert d.entries == {"U": Fraction(1, 3), "F": Fraction(1, 3)} and d.reject_mass == Fraction(1, 3)
    d = exact_recover_dist(M, "FD")
    assert d.entries == {t: Fraction(1, 5) for t in ("UF", "FU", "UU", "FF", "UD")} and d.reject_mass == 0
    # the last case flips UDD into FDD, which dips below zero
    assert recover_motzkin(Path.from_text("UDD"), ScriptedSource((6,))) is None


def test_recover_colored_examples():
    d = exact_recover_dist(C, "FD", Fraction(1))
    assert d.entries == {t: Fraction(1, 5) for t in ("UF", "FU", "UU", "FF", "UD")}
    d = exact_recover_dist(C, "CD", Fraction(2))
    assert d.entries["CC"] == Fraction(2, 6)
    d = exact_recover_dist(C, "UDD", Fraction(1, 2))
    q = 1 / (6 + Fraction(1))
    assert d.entries["UDC"] == q / 2 and d.reject_mass == q / 2


def test_recover_needs_lukasiewicz():
    with pytest.raises(ContractError):
        recover_motzkin(Path.from_text("UD"), BitSource(0))
    with pytest.raises(ContractError):
        recover_colored(Path.from_text("UD", C), MotzkinParams(2, Fraction(2)), BitSource(0))


def test_recover_meters_case_a():
    w = Path.from_text("UUDDD")
    out = recover_motzkin(w, ScriptedSource((1,)))  # unfold after the first step
    assert out.text == "UUUDU" and out.writes == 4 and out.reads == 0


def test_exact_sampler_examples():
    assert exact_sampler_dist("motzkin-positive", 1).entries == {"U": Fraction(1, 2), "F": Fraction(1, 2)}
    assert exact_sampler_dist("motzkin-positive", 2).is_uniform_over(
        [p.text for p in enumerate_paths(M, "positive", 2)])
    assert exact_sampler_dist("motzkin-excursion", 0).entries == {"": 1}
    assert exact_sampler_dist("motzkin-excursion", 2).entries == {"UD": Fraction(1, 2), "FF": Fraction(1, 2)}
    assert len(exact_sampler_dist("motzkin-excursion", 4).entries) == 9


def test_replay_and_merged_agree():
    for name, lo in (("motzkin-positive", 1), ("motzkin-excursion", 0)):
        for n in range(lo, 5):
            a = exact_sampler_dist(name, n, conditional=False, method="replay")
            b = exact_sampler_dist(name, n, conditional=False, method="merged")
            assert a.entries == b.entries and a.reject_mass == b.reject_mass
    a = exact_sampler_dist("colored-positive", 3, Fraction(2), conditional=False, method="replay")
    b = exact_sampler_dist("colored-positive", 3, Fraction(2), conditional=False, method="merged")
    assert a.entries == b.entries


def test_colored_c1_n2_is_uniform_over_10():
    # U can be followed by any of four steps, F and C by three each
    d = exact_sampler_dist("colored-positive", 2, Fraction(1))
    assert len(d.entries) == 10 and set(d.entries.values()) == {Fraction(1, 10)}


def test_samplers_produce_valid_paths(backend):
    for t in range(50):
        p = sample_positive(MotzkinParams(40), BitSource(3, trial=t))
        assert len(p) == 40 and is_positive(p)
        e = sample_excursion(MotzkinParams(41, Fraction(3, 2)), BitSource(3, trial=t))
        assert len(e) == 41 and is_positive(e) and e.height == 0 and set(e.text) <= set("UFDC")
        s = engine.sample("motzkin-excursion", 30, BitSource(4, trial=t), backend=backend)
        assert len(s) == 30 and s.height == 0 and is_positive(s)


def test_sampler_is_deterministic():
    a = sample_positive(MotzkinParams(200), BitSource(9))
    b = sample_positive(MotzkinParams(200), BitSource(9))
    assert a.text == b.text and (a.reads, a.writes) == (b.reads, b.writes)
