"""Ground truth: enumeration, counting, and exact output laws of the randomized code.

The exact laws come from a choice-tree explorer.  A :class:`ScriptedSource`
stands in for the bit source and answers each random primitive from a script
of outcomes; when the script runs out it raises with the list of possible
outcomes and their exact probabilities.  Depth-first replay of every prefix
then enumerates every leaf of the real sampler code with its exact
probability (a rational, or an element of Q(sqrt 2) for Schröder models).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Optional

from .exact import R, ExactNumber, QSqrt2, exact, to_float
from .paths import D, F, FC, HEIGHT, U, ContractError, Model, Path, Rejected, classify
from .randomness import Meter

KINDS = ("positive", "excursion", "lukasiewicz", "little-positive", "little-excursion")
MAX_ENUM = 14


# -- distribution tables -----------------------------------------------------------


@dataclass
class DistTable:
    """Finite law over path texts, plus the mass of rejection."""

    entries: dict[str, ExactNumber] = field(default_factory=dict)
    reject_mass: ExactNumber = Fraction(0)

    def add(self, key: Optional[str], p: ExactNumber) -> None:
        if key is None:
            self.reject_mass = self.reject_mass + p
        else:
            self.entries[key] = self.entries.get(key, Fraction(0)) + p

    def total(self) -> ExactNumber:
        t = self.reject_mass
        for p in self.entries.values():
            t = t + p
        return t

    def scaled(self, k: ExactNumber) -> "DistTable":
        return DistTable({s: p * k for s, p in self.entries.items()}, self.reject_mass * k)

    def conditional(self) -> "DistTable":
        """The law given no rejection."""
        ok = self.total() - self.reject_mass
        if not ok:
            raise ZeroDivisionError("every branch rejects")
        inv = 1 / ok
        return DistTable({s: p * inv for s, p in self.entries.items()}, Fraction(0))

    def is_uniform_over(self, support: Iterable[str]) -> bool:
        support = set(support)
        if set(self.entries) != support or not support:
            return False
        target = (1 - self.reject_mass) / len(support)
        return all(p == target for p in self.entries.values())

    def to_json(self) -> dict:
        return {
            "entries": {s: {"exact": str(p), "float": to_float(p)} for s, p in sorted(self.entries.items())},
            "reject_mass": {"exact": str(self.reject_mass), "float": to_float(self.reject_mass)},
        }


@dataclass
class CountTable:
    model: str
    kind: str
    values: list

    def to_json(self) -> dict:
        return {"model": self.model, "kind": self.kind, "values": [str(v) for v in self.values]}


# -- choice-tree exploration ---------------------------------------------------------


class _Branch(Exception):
    def __init__(self, outcomes):
        self.outcomes = outcomes


def _step_law(model: Model, c) -> list:
    if model is Model.MOTZKIN:
        third = Fraction(1, 3)
        return [(U, third), (F, third), (D, third)]
    if model is Model.SCHROEDER:
        return [(U, R), (F, R * R), (D, R)]
    if model is Model.COLORED:
        c = Fraction(c)
        w = 1 / (3 + c)
        return [(U, w), (F, w), (D, w), (FC, c * w)]
    return [(U, Fraction(1, 2)), (D, Fraction(1, 2))]


class ScriptedSource:
    """Drop-in for :class:`BitSource` that follows a fixed script of outcomes."""

    def __init__(self, script: tuple = ()):
        self.script = script
        self.pos = 0
        self.meter = Meter()

    def _choose(self, outcomes: Callable[[], list]):
        if self.pos < len(self.script):
            v = self.script[self.pos]
            self.pos += 1
            return v
        raise _Branch(outcomes())

    def next_bit(self) -> int:
        return self._choose(lambda: [(0, Fraction(1, 2)), (1, Fraction(1, 2))])

    def uniform_int(self, m: int) -> int:
        if m == 1:
            return 0
        return self._choose(lambda: [(i, Fraction(1, m)) for i in range(m)])

    def bernoulli(self, p) -> bool:
        p = exact(p)
        if p == 0:
            return False
        if p == 1:
            return True
        return self._choose(lambda: [(True, p), (False, 1 - p)])

    def categorical(self, atoms):
        def law():
            out = [(i, exact(a)) for i, a in enumerate(atoms) if exact(a) != 0]
            rest = 1 - sum((exact(a) for a in atoms), Fraction(0))
            if rest != 0:
                out.append((None, rest))
            return out

        return self._choose(law)

    def draw_step(self, model, c=None) -> str:
        return self._choose(lambda: _step_law(Model(model), c))


def explore(run: Callable[[ScriptedSource], Optional[str]]) -> DistTable:
    """Exact law of ``run(src)``; ``run`` returns a path text, ``None`` or raises Rejected."""
    table = DistTable()
    stack: list[tuple[tuple, ExactNumber]] = [((), Fraction(1))]
    while stack:
        script, prob = stack.pop()
        try:
            out = run(ScriptedSource(script))
        except _Branch as b:
            for v, pv in b.outcomes:
                stack.append((script + (v,), prob * pv))
            continue
        except Rejected:
            out = None
        table.add(out, prob)
    return table


def _text(p: Optional[Path]) -> Optional[str]:
    return None if p is None else p.text


def exact_recover_dist(model: Model | str, w: Path | str, c=None) -> DistTable:
    """Exact law of one recover call on the Łukasiewicz path ``w``."""
    from . import motzkin, schroeder

    model = Model(model)
    if isinstance(w, str):
        w = Path.from_text(w, model)
    if model is Model.MOTZKIN:
        return explore(lambda s: _text(motzkin.recover_motzkin(w, s)))
    if model is Model.COLORED:
        params = motzkin.MotzkinParams(len(w), Fraction(c))
        return explore(lambda s: _text(motzkin.recover_colored(w, params, s)))
    if model is Model.SCHROEDER:
        return explore(lambda s: _text(schroeder.recover_schroeder(w, s)))
    raise ContractError(f"no recover for the {model.value} model")


def exact_extend_dist(w: Path | str) -> DistTable:
    from . import schroeder

    if isinstance(w, str):
        w = Path.from_text(w, Model.SCHROEDER)
    return explore(lambda s: _text(schroeder.extend(w, s)))


def _through(law: DistTable, model: Model, fn, done=None) -> DistTable:
    """Push a law over paths through the randomized stage ``fn(w, src)``.

    With ``done`` given, the stage is repeated on every path until ``done``
    holds.  Paths reached along different branches are merged, which is exact
    because each stage depends on nothing but the current path.
    """
    out = DistTable(reject_mass=law.reject_mass)
    frontier = dict(law.entries)
    while frontier:
        nxt = DistTable()
        for text, p in frontier.items():
            if done is not None and done(Path.from_text(text, model)):
                out.add(text, p)
                continue

            def run(src, text=text):
                w = Path.from_text(text, model)
                fn(w, src)
                return w.text

            t = explore(run)
            target = out if done is None else nxt
            for k, q in t.entries.items():
                target.add(k, p * q)
            out.add(None, p * t.reject_mass)
        frontier = nxt.entries if done is not None else {}
    return out


def _mix(p: ExactNumber, a: DistTable, b: DistTable) -> DistTable:
    out = a.scaled(p)
    for k, q in b.entries.items():
        out.add(k, (1 - p) * q)
    out.add(None, (1 - p) * b.reject_mass)
    return out


def _merged_law(name: str, n: int, c=None) -> DistTable:
    from . import florentine, motzkin, schroeder

    start = DistTable({"": Fraction(1)})
    S = Model.SCHROEDER

    def approx(m):
        law = _through(start, S, schroeder.advance, lambda w: w.geo_len >= m)
        return _through(law, S, lambda w, src: schroeder.trim_overshoot(w, m))

    def excursion(m):
        return _through(approx(m), S, lambda w, src: schroeder.finish_excursion(w, m, src))

    def positive(m):
        if m % 2:
            return _through(approx(m), S, lambda w, src: schroeder.finish_odd(w, m, src))
        first = _through(approx(m), S, lambda w, src: schroeder.finish_even(w, m, src))
        return _mix(schroeder.branch_probability(m), first, excursion(m))

    def little_positive(m):
        if m % 2:
            law = little_positive(m - 1) if m > 1 else start
            return _through(law, S, schroeder.finish_little_odd)
        return _through(positive(m), S, schroeder.finish_little_even)

    if name in ("motzkin-positive", "motzkin-excursion", "colored-positive", "colored-excursion"):
        model = Model.COLORED if name.startswith("colored") else Model.MOTZKIN
        m = n if name.endswith("positive") else n + 1
        law = _through(start, model, lambda w, src: motzkin.advance(w, src, c), lambda w: len(w) >= m)
        if name.endswith("excursion"):
            law = _through(law, model, motzkin.finish_excursion)
        return law
    if name == "schroeder-approx":
        return approx(n)
    if name == "schroeder-positive":
        return positive(n)
    if name == "schroeder-excursion":
        return excursion(n)
    if name == "little-excursion":
        return _through(excursion(n), S, schroeder.finish_little_excursion)
    if name == "little-positive":
        return little_positive(n)
    if name.startswith("florentine-"):
        model = Model(name[len("florentine-"):])
        law = _through(start, model, florentine.advance, lambda w: w.geo_len >= n)
        return _through(law, model, lambda w, src: florentine.trim_overshoot(w, n))
    raise ContractError(f"no exact law for {name!r}")


def exact_sampler_dist(sampler: str, n: int, c=None, conditional: bool = True,
                       method: str = "merged") -> DistTable:
    """Exact output law of one attempt of a registered sampler.

    Restarts begin from scratch, so the law of a completed run is the law of
    one attempt conditioned on success (the default).  ``method="replay"``
    walks the literal choice tree of the attempt function; ``"merged"`` walks
    the same tree stage by stage, merging equal intermediate paths.
    """
    from .engine import get_spec

    spec = get_spec(sampler)
    c = spec.validate(n, c)
    if method == "merged":
        table = _merged_law(sampler, n, c)
    elif method == "replay":

        def run(src):
            w = Path(spec.model)
            if spec.colored:
                spec.attempt(w, n, src, c)
            else:
                spec.attempt(w, n, src)
            return w.text

        table = explore(run)
    else:
        raise ContractError(f"unknown method {method!r}")
    return table.conditional() if conditional else table


# -- enumeration and counting ----------------------------------------------------------


def _alphabet(model: Model) -> str:
    return model.alphabet


def _glen(model: Model, s: str) -> int:
    return 2 if (s == F and model is Model.SCHROEDER) else 1


def enumerate_paths(model: Model | str, kind: str, n: int, bound: int = MAX_ENUM) -> list[Path]:
    """All paths of a class at (geometric) length ``n``, in lexicographic order."""
    model = Model(model)
    if kind not in KINDS:
        raise ContractError(f"unknown kind {kind!r}")
    if n > bound:
        raise ContractError(f"enumeration is limited to n <= {bound}")
    if n < 0:
        return []
    little = kind.startswith("little")
    if little and model is not Model.SCHROEDER:
        raise ContractError("little paths are Schröder paths")
    out: list[str] = []
    alpha = sorted(_alphabet(model))

    def rec(prefix: list, length: int, h: int) -> None:
        if length == n:
            if kind == "lukasiewicz":
                ok = h == -1
            elif kind.endswith("excursion"):
                ok = h == 0
            else:
                ok = True
            if ok:
                out.append("".join(prefix))
            return
        for s in alpha:
            g = _glen(model, s)
            if length + g > n:
                continue
            if little and s == F and h == 0:
                continue
            h2 = h + HEIGHT[s]
            if h2 < 0:
                if kind == "lukasiewicz" and h2 == -1 and length + g == n:
                    prefix.append(s)
                    rec(prefix, length + g, h2)
                    prefix.pop()
                continue
            prefix.append(s)
            rec(prefix, length + g, h2)
            prefix.pop()

    rec([], 0, 0)
    out.sort()
    return [Path.from_text(t, model) for t in out]


def _weight(model: Model, s: str, c) -> ExactNumber:
    return c if (model is Model.COLORED and s == FC) else 1


def count_dp(model: Model | str, kind: str, n: int, c=None) -> int | Fraction:
    """Count (or total weight, colored model) of a class by dynamic programming over height."""
    model = Model(model)
    if kind == "lukasiewicz":
        if n < 1:
            return 0
        # a Łukasiewicz path is an excursion followed by one D
        return count_dp(model, "excursion", n - 1, c)
    little = kind.startswith("little")
    if model is Model.COLORED:
        c = Fraction(c if c is not None else 1)
    if n < 0:
        return 0
    # rows[length] = {height: weight}
    rows: list[dict] = [dict() for _ in range(n + 1)]
    rows[0][0] = 1
    for length in range(n + 1):
        for h, v in rows[length].items():
            for s in model.alphabet:
                g = _glen(model, s)
                if length + g > n:
                    continue
                if little and s == F and h == 0:
                    continue
                h2 = h + HEIGHT[s]
                if h2 < 0:
                    continue
                row = rows[length + g]
                row[h2] = row.get(h2, 0) + v * _weight(model, s, c)
    last = rows[n]
    if kind.endswith("excursion"):
        return last.get(0, 0)
    return sum(last.values())


@lru_cache(maxsize=None)
def _motzkin_tables(n: int) -> tuple[list[int], list[int]]:
    """Motzkin numbers E_k and positive-path counts P_k for k <= n."""
    E = [1, 1]
    for k in range(2, n + 1):
        E.append(((2 * k + 1) * E[k - 1] + 3 * (k - 1) * E[k - 2]) // (k + 2))
    P = [1]
    for k in range(1, n + 1):
        P.append(3 * P[k - 1] - E[k - 1])
    return E[: n + 1], P


@lru_cache(maxsize=None)
def _schroeder_tables(n: int) -> tuple[list[int], list[int], list[int], list[int]]:
    """Excursions E, positive S, little excursions LE and little positive L by geometric length."""
    half = n // 2 + 2
    big = [1, 2]  # large Schröder numbers by semilength
    for k in range(2, half + 1):
        big.append((3 * (2 * k - 1) * big[k - 1] - (k - 2) * big[k - 2]) // (k + 1))
    E = [big[k // 2] if k % 2 == 0 else 0 for k in range(n + 1)]
    S = [1, 1]
    for k in range(2, n + 1):
        S.append(2 * S[k - 1] - E[k - 1] + S[k - 2])
    LE = [1] + [E[k] // 2 for k in range(1, n + 1)]
    L = [1]
    for k in range(1, n + 1):
        L.append(S[k] - L[k - 1] + LE[k - 1])
    return E, S[: n + 1], LE, L


def count(model: Model | str, kind: str, n: int, c=None) -> int | Fraction:
    """Size of a class (total weight for colored paths)."""
    model = Model(model)
    if kind not in KINDS:
        raise ContractError(f"unknown kind {kind!r}")
    if n < 0:
        return 0
    if kind == "lukasiewicz":
        return count(model, "excursion", n - 1, c) if n >= 1 else 0
    if model is Model.MOTZKIN and not kind.startswith("little"):
        E, P = _motzkin_tables(max(n, 1))
        return E[n] if kind == "excursion" else P[n]
    if model is Model.SCHROEDER:
        E, S, LE, L = _schroeder_tables(max(n, 2))
        return {"excursion": E, "positive": S, "little-excursion": LE, "little-positive": L}[kind][n]
    return count_dp(model, kind, n, c)


def count_table(model: Model | str, kind: str, upto: int, c=None) -> CountTable:
    model = Model(model)
    return CountTable(model.value, kind, [count(model, kind, k, c) for k in range(upto + 1)])


def log2_count(model: Model | str, kind: str, n: int, c=None) -> float:
    v = count(model, kind, n, c)
    if isinstance(v, Fraction):
        return math.log2(v.numerator) - math.log2(v.denominator)
    return math.log2(v)


# -- first-try success -----------------------------------------------------------------


def motzkin_p(n: int) -> Fraction:
    """Probability that one attempt of the Motzkin positive sampler outputs a given path."""
    num, den = 1, 3**n
    for i in range(1, n + 1):
        num *= 2 * i + 2
        den *= 2 * i + 1
    return Fraction(num, den)


def schroeder_p(n: int) -> QSqrt2:
    """Probability that one attempt of the approximate Schröder sampler outputs a given length-n path."""
    # numerator and denominator stay in Z[sqrt 2] as integer pairs; one division at the end
    def mul(x, y):
        return x[0] * y[0] + 2 * x[1] * y[1], x[0] * y[1] + x[1] * y[0]

    num, den = (1, 0), (1, 0)
    for m in range(1, n + 1):
        num = mul(num, (-1, 1))  # r = sqrt2 - 1
        if m % 2:
            num = mul(num, (m, 1))  # m + 1 + r
            den = mul(den, (m - 1, 1))  # m + r
    return QSqrt2(*num) / QSqrt2(*den)


def success_probability_exact(model: Model | str, n: int) -> tuple[ExactNumber, float]:
    """``(p_n, success)`` for one attempt of the positive sampler of ``model``."""
    model = Model(model)
    if model is Model.MOTZKIN:
        p = motzkin_p(n)
        return p, float(p * count(model, "positive", n))
    if model is Model.SCHROEDER:
        p = schroeder_p(n)
        S = count(model, "positive", n)
        S1 = count(model, "positive", n - 1) if n >= 1 else 0
        return p, to_float(p * S + p * R * S1)
    raise ContractError(f"no success formula for the {model.value} model")


def schroeder_success_limit() -> float:
    """The limit of the Schröder first-try success probability."""
    s2 = math.sqrt(2)
    return 2**0.25 / math.sqrt(math.pi) * math.gamma(s2 / 2) / math.gamma((1 + s2) / 2)


MOTZKIN_SUCCESS_LIMIT = math.sqrt(3) / 2


# -- lemma checks --------------------------------------------------------------------------


def _aggregate(inputs: Iterable[tuple[Path, ExactNumber]], law: Callable[[Path], DistTable]) -> DistTable:
    agg = DistTable()
    for w, weight in inputs:
        t = law(w)
        for s, p in t.entries.items():
            agg.add(s, p * weight)
        agg.add(None, t.reject_mass * weight)
    return agg


def _fc_weight(text: str, c) -> ExactNumber:
    return Fraction(c) ** text.count(FC)


def lemma_motzkin_recover(n: int, c=None) -> bool:
    """Recover maps a uniform (weighted) Łukasiewicz input to a uniform (weighted) positive output."""
    model = Model.MOTZKIN if c is None else Model.COLORED
    c = None if c is None else Fraction(c)
    ins = [(w, _fc_weight(w.text, c) if c else 1) for w in enumerate_paths(model, "lukasiewicz", n)]
    agg = _aggregate(ins, lambda w: exact_recover_dist(model, w, c))
    q = Fraction(1, 2 * n + 1) if c is None else 1 / (2 * n + max(Fraction(1), c))
    targets = {p.text: q * (_fc_weight(p.text, c) if c else 1)
               for p in enumerate_paths(model, "positive", n)}
    return agg.entries == targets


def lemma_extend(m: int, little: bool = False) -> bool:
    """Extend over uniform positive (little) inputs of length m: mass r on the target outputs."""
    kind = "little-positive" if little else "positive"
    ins = [(w, 1) for w in enumerate_paths(Model.SCHROEDER, kind, m)]
    agg = _aggregate(ins, exact_extend_dist)
    for p in enumerate_paths(Model.SCHROEDER, kind, m + 1):
        if little:
            if p.height == 1 and p.text.endswith(F):
                continue
        elif p.height <= 0:
            continue
        if agg.entries.get(p.text, 0) != R:
            return False
    return True


def lemma_schroeder_recover(m: int) -> bool:
    """Recover over uniform Łukasiewicz inputs of odd length m: q per length-m path, q*r per ...F of length m+1."""
    if m % 2 == 0:
        raise ContractError("the Schröder recover lemma is about odd lengths")
    ins = [(w, 1) for w in enumerate_paths(Model.SCHROEDER, "lukasiewicz", m)]
    agg = _aggregate(ins, lambda w: exact_recover_dist(Model.SCHROEDER, w))
    q = 1 / (m + R)
    targets = {p.text: q for p in enumerate_paths(Model.SCHROEDER, "positive", m)}
    for p in enumerate_paths(Model.SCHROEDER, "positive", m + 1):
        if p.text.endswith(F):
            targets[p.text] = q * R
    return agg.entries == targets


def classify_text(model: Model | str, text: str) -> str:
    return classify(Path.from_text(text, model))
