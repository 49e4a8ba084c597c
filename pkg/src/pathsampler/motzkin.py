"""Recovery samplers for Motzkin and colored Motzkin positive paths and excursions.

The ``*_attempt`` functions run one pass of a sampler on a cleared
:class:`~pathsampler.paths.Path` buffer and raise
:class:`~pathsampler.paths.Rejected` when a partial operation is undefined;
:func:`sample_positive` and :func:`sample_excursion` restart them until they
succeed (through the compiled kernel when it is available).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .paths import F, FC, ContractError, Model, Path, Rejected, classify


@dataclass(frozen=True)
class MotzkinParams:
    n: int
    c: Optional[Fraction] = None

    def __post_init__(self):
        if self.n < 0:
            raise ContractError("length must be nonnegative")
        if self.c is not None:
            c = Fraction(self.c)
            if c <= 0:
                raise ContractError("the flat weight c must be positive")
            object.__setattr__(self, "c", c)

    @property
    def model(self) -> Model:
        return Model.MOTZKIN if self.c is None else Model.COLORED

    @property
    def q_n(self) -> Fraction:
        if self.c is None:
            return Fraction(1, 2 * self.n + 1)
        return 1 / (2 * self.n + max(Fraction(1), self.c))


# -- recover -------------------------------------------------------------------


def recover_plain_inplace(w: Path, src) -> None:
    n = len(w)
    j = src.uniform_int(2 * n + 1)
    if j < n:
        w.unfold_at(j)
    elif j < 2 * n:
        w.unfold_at(j - n)
        w.flip()
    elif not w.flip() or w.height < 0:
        raise Rejected


def recover_colored_inplace(w: Path, src, c: Fraction) -> None:
    # Every atom of the case distribution is a multiple of 1/T, so one
    # uniform draw over T cells selects the case.
    n = len(w)
    p, q = c.numerator, c.denominator
    j = src.uniform_int(2 * n * q + max(p, q))
    if j < 2 * n * q:
        j //= q
        if j < n:
            w.unfold_at(j)
        else:
            w.unfold_at(j - n)
            w.flip()
        return
    j -= 2 * n * q
    pos, skipped = w._scan_flippable()
    w.reads += skipped
    if pos is not None and w.steps[pos] == F:
        if j >= q:
            w.reads += 1
            raise Rejected
        w.flip_at(pos)
        return
    w.reads += pos is not None
    if j >= p:
        raise Rejected
    w.replace_last(FC)


def _check_lukasiewicz(w: Path) -> None:
    if classify(w) != "lukasiewicz" or w.height != -1:
        raise ContractError("recover needs a Łukasiewicz path ending at height -1")


def recover_motzkin(w: Path, src) -> Optional[Path]:
    """Return a recovered copy of ``w``, or ``None`` on rejection."""
    if w.model is not Model.MOTZKIN:
        raise ContractError("recover_motzkin needs a plain Motzkin path")
    _check_lukasiewicz(w)
    out = w.copy()
    try:
        recover_plain_inplace(out, src)
    except Rejected:
        return None
    return out


def recover_colored(w: Path, params: MotzkinParams, src) -> Optional[Path]:
    if w.model is not Model.COLORED or params.c is None:
        raise ContractError("recover_colored needs a colored path and a weight")
    _check_lukasiewicz(w)
    out = w.copy()
    try:
        recover_colored_inplace(out, src, params.c)
    except Rejected:
        return None
    return out


# -- sampler attempts ------------------------------------------------------------


def advance(w: Path, src, c: Optional[Fraction] = None) -> None:
    """Append one random step; recover if the path just reached height -1."""
    w.push(src.draw_step(w.model, c))
    if w.height == -1:
        if w.model is Model.COLORED:
            recover_colored_inplace(w, src, c)
        else:
            recover_plain_inplace(w, src)


def finish_excursion(w: Path, src=None) -> None:
    """Turn a positive path of length n+1 into an excursion of length n."""
    if w.height % 2 == 0:
        if not w.flip() or w.height < 1:
            raise Rejected
    w.fold_excursion(flat=False)


def positive_attempt(w: Path, n: int, src, c: Optional[Fraction] = None) -> Path:
    while len(w) < n:
        advance(w, src, c)
    return w


def excursion_attempt(w: Path, n: int, src, c: Optional[Fraction] = None) -> Path:
    positive_attempt(w, n + 1, src, c)
    finish_excursion(w, src)
    return w


# -- public samplers -------------------------------------------------------------


def sample_positive(params: MotzkinParams, src) -> Path:
    """Uniform (or weight-proportional) positive path of length ``params.n``."""
    from .engine import sample

    if params.n < 1:
        raise ContractError("positive paths need n >= 1")
    name = "motzkin-positive" if params.c is None else "colored-positive"
    return sample(name, params.n, src, c=params.c)


def sample_excursion(params: MotzkinParams, src) -> Path:
    """Uniform (or weight-proportional) excursion of length ``params.n``."""
    from .engine import sample

    name = "motzkin-excursion" if params.c is None else "colored-excursion"
    return sample(name, params.n, src, c=params.c)
