"""Benchmark harness: time and entropy factors, first-try rates, and the 1 + S limit law."""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from . import engine
from .oracles import log2_count, success_probability_exact
from .paths import ContractError, Model
from .randomness import BitSource

CSV_FIELDS = ("trial", "n", "time_factor", "entropy_bits", "physical_bits", "restarts")
DEFAULT_EPS = 1e-6
COLORED_ENTROPY_MAX_N = 20_000

# class whose size measures the output entropy of each sampler
_OUTPUT_CLASS = {
    "motzkin-positive": "positive",
    "motzkin-excursion": "excursion",
    "colored-positive": "positive",
    "colored-excursion": "excursion",
    "schroeder-approx": "positive",
    "schroeder-positive": "positive",
    "schroeder-excursion": "excursion",
    "little-excursion": "little-excursion",
    "little-positive": "little-positive",
    "florentine-motzkin": "positive",
    "florentine-schroeder": "positive",
    "florentine-dyck": "positive",
}


@dataclass
class FactorReport:
    """Per-trial meters of one sampler at one length."""

    sampler: str
    n: int
    seed: int
    c: Optional[Fraction]
    time_factor: np.ndarray
    entropy_bits: np.ndarray
    physical_bits: np.ndarray
    restarts: np.ndarray
    wasted: np.ndarray  # reads + writes spent in rejected attempts
    backend: str = "python"
    seconds: float = 0.0  # wall clock, informational only

    @property
    def trials(self) -> int:
        return len(self.time_factor)

    @property
    def mean_time_factor(self) -> float:
        return float(self.time_factor.mean())

    @property
    def std_time_factor(self) -> float:
        return float(self.time_factor.std(ddof=1)) if self.trials > 1 else 0.0

    @property
    def mean_entropy_bits(self) -> float:
        return float(self.entropy_bits.mean())

    @property
    def first_try_rate(self) -> float:
        return float((self.restarts == 0).mean())

    @property
    def mean_wasted(self) -> float:
        return float(self.wasted.mean())

    def quantiles(self, qs: Sequence[float] = (0.05, 0.25, 0.5, 0.75, 0.95)) -> dict[str, float]:
        return {f"q{round(q * 100):02d}": float(v) for q, v in zip(qs, np.quantile(self.time_factor, qs))}

    def rows(self) -> Iterable[dict]:
        for i in range(self.trials):
            yield {
                "trial": i,
                "n": self.n,
                "time_factor": float(self.time_factor[i]),
                "entropy_bits": float(self.entropy_bits[i]),
                "physical_bits": int(self.physical_bits[i]),
                "restarts": int(self.restarts[i]),
            }

    def write_csv(self, fh) -> None:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for row in self.rows():
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})

    def summary(self, with_entropy_factor: bool = True) -> dict:
        out = {
            "sampler": self.sampler,
            "n": self.n,
            "trials": self.trials,
            "seed": self.seed,
            "weight": None if self.c is None else str(self.c),
            "backend": self.backend,
            "mean_time_factor": self.mean_time_factor,
            "std_time_factor": self.std_time_factor,
            "time_factor_quantiles": self.quantiles(),
            "mean_entropy_bits": self.mean_entropy_bits,
            "mean_physical_bits": float(self.physical_bits.mean()),
            "entropy_factor": None,
            "success_rate": self.first_try_rate,
            "mean_restarts": float(self.restarts.mean()),
            "mean_failed_work": self.mean_wasted,
        }
        if with_entropy_factor:
            out["entropy_factor"] = entropy_factor(self)
        return out


def _trial_chunk(args) -> list[tuple]:
    name, n, seed, c, backend, lo, hi = args
    out = []
    for t in range(lo, hi):
        r = engine.run_stats(name, n, BitSource(seed, trial=t), c, backend=backend)
        out.append((r.time_factor, r.entropy_bits, r.physical_bits, r.restarts, r.wasted))
    return out


def run_metered(sampler: str, n: int, trials: int, seed: int = 0, c=None,
                backend: Optional[str] = None, workers: int = 1) -> FactorReport:
    """Run ``trials`` independent samples, trial ``i`` drawing from ``BitSource(seed, trial=i)``.

    The result does not depend on ``workers``: trial sources are fixed by index.
    """
    if trials < 1:
        raise ContractError("trials must be >= 1")
    spec = engine.get_spec(sampler)
    c = spec.validate(n, c)
    probe = BitSource(seed, trial=0)
    used = engine._resolve(backend, probe)
    t0 = time.perf_counter()
    if workers <= 1:
        rows = _trial_chunk((sampler, n, seed, c, used, 0, trials))
    else:
        step = -(-trials // (4 * workers))
        jobs = [(sampler, n, seed, c, used, lo, min(lo + step, trials)) for lo in range(0, trials, step)]
        with ProcessPoolExecutor(workers) as pool:
            rows = [r for chunk in pool.map(_trial_chunk, jobs) for r in chunk]
    a = np.array(rows, dtype=float).reshape(-1, 5)
    return FactorReport(
        sampler, n, seed, c,
        time_factor=a[:, 0],
        entropy_bits=a[:, 1],
        physical_bits=a[:, 2].astype(np.int64),
        restarts=a[:, 3].astype(np.int64),
        wasted=a[:, 4].astype(np.int64),
        backend=used,
        seconds=time.perf_counter() - t0,
    )


# -- entropy -----------------------------------------------------------------------


def _colored_entropy(kind: str, n: int, c: Fraction) -> float:
    """Entropy of the weight-proportional law on colored paths, by a scaled float DP."""
    if n > COLORED_ENTROPY_MAX_N:
        raise ContractError(f"colored output entropy is only computed for n <= {COLORED_ENTROPY_MAX_N}")
    cf = float(c)
    v = np.zeros(n + 2)  # total weight by height
    m = np.zeros(n + 2)  # weight times number of C steps, by height
    v[0] = 1.0
    log_scale = 0.0
    for _ in range(n):
        nv = (1 + cf) * v
        nm = (1 + cf) * m + cf * v
        nv[1:] += v[:-1]
        nm[1:] += m[:-1]
        nv[:-1] += v[1:]
        nm[:-1] += m[1:]
        s = nv.sum()
        v, m = nv / s, nm / s
        log_scale += math.log2(s)
    if kind == "excursion":
        z, k = v[0], m[0]
    else:
        z, k = v.sum(), m.sum()
    return log_scale + math.log2(z) - math.log2(cf) * (k / z)


def output_entropy(model: Model | str, kind: str, n: int, c=None) -> float:
    """Entropy in bits of the target law: ``log2`` of the class size, or the weighted entropy."""
    model = Model(model)
    if model is Model.COLORED:
        return _colored_entropy(kind, n, Fraction(c))
    return log2_count(model, kind, n)


def entropy_factor(report: FactorReport, model=None, kind: Optional[str] = None,
                   n: Optional[int] = None) -> float:
    """Mean model-entropy bits per trial divided by the entropy of the output law."""
    spec = engine.get_spec(report.sampler)
    model = spec.model if model is None else Model(model)
    kind = _OUTPUT_CLASS[report.sampler] if kind is None else kind
    n = report.n if n is None else n
    h = output_entropy(model, kind, n, report.c)
    if h <= 0:
        raise ContractError("the output law has zero entropy")
    return report.mean_entropy_bits / h


def success_rate_band(model: Model | str, n: int, runs: int, sigmas: float = 3.0) -> tuple[float, float, float]:
    """``(exact, lo, hi)``: exact first-try probability with a binomial ``sigmas`` band for ``runs`` runs."""
    p = success_probability_exact(model, n)[1]
    half = sigmas * math.sqrt(p * (1 - p) / runs)
    return p, p - half, p + half


# -- limit law -----------------------------------------------------------------------------


@dataclass
class LimitLawSample:
    eps: float
    s: np.ndarray  # values of S, tail correction included
    u: np.ndarray  # independent uniforms for the excursion law
    points: np.ndarray = field(repr=False)  # number of Poisson points per draw

    @property
    def one_plus_s(self) -> np.ndarray:
        return 1.0 + self.s

    @property
    def one_plus_s_plus_u(self) -> np.ndarray:
        return 1.0 + self.s + self.u


def simulate_limit_law(trials: int, eps: float = DEFAULT_EPS, seed: int = 0) -> LimitLawSample:
    """Draw ``trials`` values of S.

    Points of the Poisson process with density ``1/(2x)`` on ``(eps, 1]`` are uniform
    in ``log x``, so they are ``eps**u`` for uniform ``u``; their count has mean
    ``ln(1/eps) / 2``.  Each point ``x`` contributes a uniform draw on ``[0, x]``, and
    the missing mass on ``(0, eps)`` is replaced by its mean ``eps / 4``.
    """
    if not 0 < eps <= 0.01:
        raise ContractError("eps must lie in (0, 0.01]")
    if trials < 1:
        raise ContractError("trials must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    k = rng.poisson(0.5 * math.log(1 / eps), size=trials)
    x = eps ** rng.random(k.sum())
    contrib = rng.random(k.sum()) * x
    s = np.bincount(np.repeat(np.arange(trials), k), weights=contrib, minlength=trials) + eps / 4
    return LimitLawSample(eps, s, rng.random(trials), k)


# -- distribution tests --------------------------------------------------------------------


@dataclass
class DistributionTests:
    ks: float
    ks_pvalue: float
    chi2: float
    chi2_pvalue: float
    dof: int

    def to_dict(self) -> dict:
        return dict(vars(self))


def ks_distance(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    r = stats.ks_2samp(np.asarray(a, float), np.asarray(b, float))
    return float(r.statistic), float(r.pvalue)


def chi_square_uniform(observed: Sequence[int], weights: Optional[Sequence] = None) -> tuple[float, float, int]:
    """Chi-square goodness of fit of category counts against uniform (or weight-proportional) law."""
    obs = np.asarray(observed, float)
    if weights is None:
        exp = np.full(len(obs), obs.sum() / len(obs))
    else:
        w = np.asarray([float(x) for x in weights])
        exp = obs.sum() * w / w.sum()
    r = stats.chisquare(obs, exp)
    return float(r.statistic), float(r.pvalue), len(obs) - 1


def distribution_tests(sample_a: Sequence[float], sample_b: Sequence[float], bins: int = 20) -> DistributionTests:
    """Two-sample KS distance plus a chi-square homogeneity test on pooled-quantile bins."""
    a = np.asarray(sample_a, float)
    b = np.asarray(sample_b, float)
    if len(a) < 1000 or len(b) < 1000:
        raise ContractError("distribution tests need at least 1000 samples per side")
    ks, ks_p = ks_distance(a, b)
    edges = np.unique(np.quantile(np.concatenate([a, b]), np.linspace(0, 1, bins + 1)))
    edges[0], edges[-1] = -np.inf, np.inf
    table = np.array([np.histogram(a, edges)[0], np.histogram(b, edges)[0]])
    table = table[:, table.sum(axis=0) > 0]
    chi2, p, dof, _ = stats.chi2_contingency(table)
    return DistributionTests(ks, ks_p, float(chi2), float(p), int(dof))


def empirical_uniformity(sampler: str, n: int, draws: int, seed: int = 0, c=None) -> tuple[float, float, int]:
    """Chi-square test of sampled paths against the exact target law over the enumerated class."""
    from .oracles import _fc_weight, enumerate_paths

    spec = engine.get_spec(sampler)
    c = spec.validate(n, c)
    kind = _OUTPUT_CLASS[sampler]
    support = [p.text for p in enumerate_paths(spec.model, kind, n)]
    index = {t: i for i, t in enumerate(support)}
    counts = np.zeros(len(support), dtype=np.int64)
    for t in range(draws):
        w = engine.sample(sampler, n, BitSource(seed, trial=t), c)
        counts[index[w.text]] += 1
    weights = [_fc_weight(t, c) for t in support] if spec.colored else None
    return chi_square_uniform(counts, weights)

