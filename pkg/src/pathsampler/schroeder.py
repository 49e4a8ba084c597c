"""Extend and recover for Schröder paths, and the Schröder / little Schröder samplers.

Lengths are geometric (a flat step counts 2).  Steps are drawn with
probabilities ``r, r**2, r`` where ``r = sqrt(2) - 1``.  As in
:mod:`pathsampler.motzkin`, ``*_attempt`` functions raise
:class:`~pathsampler.paths.Rejected` and the public samplers restart them.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional

from .exact import R, QSqrt2
from .paths import D, F, U, ContractError, Model, Path, Rejected, classify, is_positive

SCHROEDER = Model.SCHROEDER
EXTEND_ATOMS = (R, R)  # append U, append D; the residual r**2 is the flat transform


@lru_cache(maxsize=None)
def slot_probability(m: int) -> QSqrt2:
    """``m / (m + r)``: probability that recover picks a factorization slot."""
    return Fraction(m) / (m + R)


@lru_cache(maxsize=None)
def branch_probability(n: int) -> QSqrt2:
    """``(n + 1) / (n + 1 + r)``: first branch of the even positive sampler."""
    return Fraction(n + 1) / (n + 1 + R)


@dataclass(frozen=True)
class SchroederParams:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ContractError("length must be nonnegative")

    @property
    def parity(self) -> int:
        return self.n % 2

    @property
    def r(self) -> QSqrt2:
        return R

    def q(self, m: Optional[int] = None) -> QSqrt2:
        """``1 / (m + r)`` for the odd length ``m`` at which recovery fires."""
        return 1 / ((self.n if m is None else m) + R)


# -- extend and recover ------------------------------------------------------------


def extend_inplace(w: Path, src) -> None:
    """Extend ``w`` by one unit of length, scanning its trailing flat run once."""
    run = 0
    while True:
        o = src.categorical(EXTEND_ATOMS)
        if o is not None:
            w.place_before_run(run, D if o else U)
            return
        pos = len(w) - run - 1
        if pos < 0:
            raise Rejected
        if w.steps[pos] != F:
            w.flatten_at(pos)
            return
        w.reads += 1
        run += 1


def recover_inplace(w: Path, src) -> None:
    m = w.geo_len
    if not src.bernoulli(slot_probability(m)):
        w.replace_last(F)
        return
    i = src.uniform_int(m)
    steps = len(w)
    if i < steps:
        w.unfold_at(i)
        return
    # flat slots are numbered from the right, which saves a pass
    w.unfold_flat_from_right(i - steps + 1)
    extend_inplace(w, src)
    if w.height < 2:
        raise Rejected
    w.push(F)


def extend(w: Path, src) -> Optional[Path]:
    """Return an extended copy of the positive path ``w``, or ``None`` on rejection."""
    if w.model is not SCHROEDER or not is_positive(w):
        raise ContractError("extend needs a positive Schröder path")
    out = w.copy()
    try:
        extend_inplace(out, src)
    except Rejected:
        return None
    return out


def recover_schroeder(w: Path, src) -> Optional[Path]:
    if w.model is not SCHROEDER:
        raise ContractError("recover_schroeder needs a Schröder path")
    if classify(w) != "lukasiewicz" or w.height != -1 or w.geo_len % 2 == 0:
        raise ContractError("recover needs a Łukasiewicz path of odd length")
    out = w.copy()
    try:
        recover_inplace(out, src)
    except Rejected:
        return None
    return out


# -- sampler attempts ------------------------------------------------------------


def advance(w: Path, src) -> None:
    """Append one random step; recover if the path just reached height -1."""
    w.push(src.draw_step(SCHROEDER))
    if w.height == -1:
        recover_inplace(w, src)


def trim_overshoot(w: Path, n: int, src=None) -> None:
    if w.geo_len == n + 1:
        w.truncate()  # always a flat step


def approx_attempt(w: Path, n: int, src) -> Path:
    """Positive path of length ``n`` (weight 1) or ``n - 1`` (weight r)."""
    while w.geo_len < n:
        advance(w, src)
    trim_overshoot(w, n)
    return w


def finish_odd(w: Path, n: int, src) -> None:
    if w.geo_len == n - 1:
        extend_inplace(w, src)
        if w.height < 1:
            raise Rejected


def finish_excursion(w: Path, n: int, src) -> None:
    if w.geo_len == n:
        extend_inplace(w, src)
        if w.height < 1:
            raise Rejected
        w.fold_excursion(flat=False)
    else:
        w.fold_excursion(flat=True)


def finish_even(w: Path, n: int, src) -> None:
    if w.geo_len == n - 1:
        extend_inplace(w, src)
        if w.height < 2:
            raise Rejected


def first_branch(n: int, src) -> bool:
    return src.bernoulli(branch_probability(n))


def finish_little_excursion(w: Path, src=None) -> None:
    if not w.little:
        w.lift()
        w.push(D)


def finish_little_even(w: Path, src) -> None:
    if not w.little:
        w.lift()
        extend_inplace(w, src)
        if not w.little:
            raise Rejected


def finish_little_odd(w: Path, src) -> None:
    extend_inplace(w, src)
    if w.height == 1 and w.steps[-1] == F:
        raise Rejected
    if w.height == -1:
        # only the empty start can yield a lone D here
        if len(w) < 2:
            raise Rejected
        w.collapse_dd()


def odd_attempt(w: Path, n: int, src) -> Path:
    approx_attempt(w, n, src)
    finish_odd(w, n, src)
    return w


def excursion_attempt(w: Path, n: int, src) -> Path:
    approx_attempt(w, n, src)
    finish_excursion(w, n, src)
    return w


def even_attempt(w: Path, n: int, src) -> Path:
    if first_branch(n, src):
        approx_attempt(w, n, src)
        finish_even(w, n, src)
        return w
    return excursion_attempt(w, n, src)


def positive_attempt(w: Path, n: int, src) -> Path:
    return odd_attempt(w, n, src) if n % 2 else even_attempt(w, n, src)


def little_excursion_attempt(w: Path, n: int, src) -> Path:
    excursion_attempt(w, n, src)
    finish_little_excursion(w)
    return w


def little_even_attempt(w: Path, n: int, src) -> Path:
    even_attempt(w, n, src)
    finish_little_even(w, src)
    return w


def little_odd_attempt(w: Path, n: int, src) -> Path:
    if n > 1:
        little_even_attempt(w, n - 1, src)
    finish_little_odd(w, src)
    return w


def little_positive_attempt(w: Path, n: int, src) -> Path:
    return little_odd_attempt(w, n, src) if n % 2 else little_even_attempt(w, n, src)


# -- public samplers -------------------------------------------------------------


def _run(name: str, n: int, src) -> Path:
    from .engine import sample

    return sample(name, n, src)


def sample_pos_approx(n: int, src) -> Path:
    return _run("schroeder-approx", n, src)


def sample_pos_odd(n: int, src) -> Path:
    if n % 2 == 0:
        raise ContractError("sample_pos_odd needs odd n")
    return _run("schroeder-positive", n, src)


def sample_pos_even(n: int, src) -> Path:
    if n % 2 or n < 2:
        raise ContractError("sample_pos_even needs even n >= 2")
    return _run("schroeder-positive", n, src)


def sample_excursion(n: int, src) -> Path:
    return _run("schroeder-excursion", n, src)


def sample_little_excursion(n: int, src) -> Path:
    return _run("little-excursion", n, src)


def sample_little_even(n: int, src) -> Path:
    if n % 2 or n < 2:
        raise ContractError("sample_little_even needs even n >= 2")
    return _run("little-positive", n, src)


def sample_little_odd(n: int, src) -> Path:
    if n % 2 == 0:
        raise ContractError("sample_little_odd needs odd n")
    return _run("little-positive", n, src)
