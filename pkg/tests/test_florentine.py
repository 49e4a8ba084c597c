from __future__ import annotations

import numpy as np
import pytest
from scipy.stats import chi2_contingency

from pathsampler import engine
from pathsampler.exact import R
from pathsampler.florentine import florentine_positive
from pathsampler.oracles import enumerate_paths, exact_sampler_dist
from pathsampler.paths import ContractError, Model, is_positive
from pathsampler.randomness import BitSource


def test_small_laws_are_exact():
    d = exact_sampler_dist("florentine-motzkin", 2)
    assert d.is_uniform_over(p.text for p in enumerate_paths(Model.MOTZKIN, "positive", 2))
    assert exact_sampler_dist("florentine-dyck", 2).is_uniform_over(["UU", "UD"])


def test_schroeder_baseline_matches_the_approx_law():
    d = exact_sampler_dist("florentine-schroeder", 2, conditional=False)
    assert d.entries == {"UU": R * R, "UD": R * R, "F": R * R, "U": R**3}
    a = exact_sampler_dist("florentine-schroeder", 4)
    b = exact_sampler_dist("schroeder-approx", 4)
    assert a.entries == b.entries


def test_contracts():
    with pytest.raises(ContractError):
        florentine_positive("motzkin", 0, BitSource(0))
    with pytest.raises(ContractError):
        florentine_positive(Model.COLORED, 3, BitSource(0))


def test_outputs_are_positive(backend):
    for t in range(30):
        p = engine.sample("florentine-motzkin", 50, BitSource(1, trial=t), backend=backend)
        assert len(p) == 50 and is_positive(p)
        d = engine.sample("florentine-dyck", 50, BitSource(1, trial=t), backend=backend)
        assert len(d) == 50 and is_positive(d) and set(d.text) <= set("UD")


def test_same_output_law_as_recovery_at_n8():
    # two-sample chi-square over the whole positive class
    n, draws = 8, 20_000
    support = [p.text for p in enumerate_paths(Model.MOTZKIN, "positive", n)]
    idx = {s: i for i, s in enumerate(support)}
    table = np.zeros((2, len(support)))
    for row, name in enumerate(("florentine-motzkin", "motzkin-positive")):
        for t in range(draws):
            table[row, idx[engine.sample(name, n, BitSource(11 + row, trial=t)).text]] += 1
    assert chi2_contingency(table)[1] > 1e-3


def test_time_factor_near_two():
    # each drawn step is one write, so the time factor counts drawn steps per output step
    tf = [engine.run_stats("florentine-motzkin", 10_000, BitSource(3, trial=t)).time_factor
          for t in range(300)]
    assert abs(np.mean(tf) - 2.0) < 0.1
