"""Seeded fair-bit source with exact discrete sampling and dual cost metering.

Raw bits come from numpy's PCG64, consumed one 64-bit word at a time, most
significant bit first.  Every primitive is exact:

* :meth:`BitSource.uniform_int` is the Fast Dice Roller over fair bits;
* :meth:`BitSource.categorical` (and :meth:`bernoulli`) is the interval method:
  bits of a uniform ``U`` are drawn until the dyadic interval they pin down
  contains no cumulative boundary, boundaries being compared digit by digit in
  exact arithmetic.

The meter keeps two totals: ``model_entropy_bits`` grows by the entropy of each
primitive's distribution, ``physical_bits`` by the raw bits actually drawn.
The compiled kernel reproduces this consumption bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from .exact import R, ExactNumber, QSqrt2, digit_table, entropy_bits, exact, is_dyadic_at, sign
from .paths import D, F, FC, U, ContractError, Model

MASK64 = (1 << 64) - 1
LOG2_3 = math.log2(3)
#: entropy of the Schröder step law (r, r**2, r)
SCHROEDER_STEP_ENTROPY = entropy_bits([R, R * R, R])

_SCHROEDER_BOUNDS = (R, 1 - R)  # U on [0, r), F on [r, 2 - sqrt 2), D beyond


def parse_seed(text: str | int) -> int:
    """Accept a decimal or ``0x`` hexadecimal 64-bit seed."""
    if isinstance(text, int):
        seed = text
    else:
        t = text.strip().lower()
        seed = int(t, 16) if t.startswith("0x") else int(t, 10)
    if not 0 <= seed <= MASK64:
        raise ContractError("seed must fit in 64 unsigned bits")
    return seed


@dataclass
class Meter:
    model_entropy_bits: float = 0.0
    physical_bits: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


@lru_cache(maxsize=None)
def _digit(x: ExactNumber, k: int) -> int:
    size = 64
    while size < k:
        size *= 2
    return digit_table(x, size)[k - 1]


@lru_cache(maxsize=4096)
def _interval_plan(bounds: tuple) -> tuple[int, tuple]:
    """Boundaries at or below 0 (always passed) and those in (0, 1) still to compare."""
    above = sum(1 for b in bounds if b <= 0)
    ties = tuple((b, isinstance(b, QSqrt2) and b.b != 0, digit_table(b, 64))
                 for b in bounds if 0 < b < 1)
    return above, ties


@lru_cache(maxsize=4096)
def bernoulli_entropy(p: ExactNumber) -> float:
    return entropy_bits([p, 1 - p])


@lru_cache(maxsize=256)
def _colored_plan(c) -> tuple[int, int, float]:
    """``(q, 3q + p, entropy)`` for the step law ``(1, 1, 1, c) / (3 + c)`` with ``c = p/q``."""
    c = Fraction(c)
    if c <= 0:
        raise ContractError("the colored model needs a weight c > 0")
    return c.denominator, 3 * c.denominator + c.numerator, colored_step_entropy(c)


@lru_cache(maxsize=4096)
def _bernoulli_plan(p: ExactNumber) -> tuple[float, int, tuple]:
    if sign(p) < 0 or p > 1:
        raise ContractError("bernoulli needs 0 <= p <= 1")
    return (bernoulli_entropy(p),) + _interval_plan((p,))


@lru_cache(maxsize=256)
def colored_step_entropy(c: Fraction) -> float:
    return entropy_bits([1 / (3 + c)] * 3 + [c / (3 + c)])


@lru_cache(maxsize=1024)
def categorical_plan(atoms: tuple) -> tuple[tuple, float]:
    """Cumulative boundaries and distribution entropy for ``categorical``."""
    total = Fraction(0)
    bounds = []
    for a in atoms:
        if sign(a) < 0:
            raise ContractError("negative atom")
        total = total + a
        bounds.append(total)
    if total > 1:
        raise ContractError("atoms sum to more than 1")
    return tuple(bounds), entropy_bits(list(atoms) + [1 - total])


class BitSource:
    """Deterministic fair-bit stream over PCG64 with a :class:`Meter`.

    ``BitSource(seed)`` and ``BitSource(seed, trial=i)`` give independent,
    reproducible streams; per-trial streams use numpy's SeedSequence spawn key.
    """

    def __init__(self, seed: int | str = 0, trial: Optional[int] = None):
        self.seed = parse_seed(seed)
        self.trial = trial
        if trial is None:
            ss = np.random.SeedSequence(self.seed)
        else:
            ss = np.random.SeedSequence(self.seed, spawn_key=(int(trial),))
        self.bit_generator = np.random.PCG64(ss)
        self._word = 0
        self._nleft = 0
        self.meter = Meter()

    def __repr__(self) -> str:
        return f"BitSource(seed={self.seed:#x}, trial={self.trial})"

    # -- raw bits ------------------------------------------------------------

    def _bit(self) -> int:
        if not self._nleft:
            self._word = int(self.bit_generator.random_raw())
            self._nleft = 64
        self._nleft -= 1
        self.meter.physical_bits += 1
        return (self._word >> self._nleft) & 1

    def next_bit(self) -> int:
        self.meter.model_entropy_bits += 1.0
        return self._bit()

    def _dice(self, m: int) -> int:
        # Fast Dice Roller
        if m == 1:
            return 0
        v, c = 1, 0
        while True:
            v <<= 1
            c = (c << 1) | self._bit()
            if v >= m:
                if c < m:
                    return c
                v -= m
                c -= m

    def _interval(self, bounds: Sequence[ExactNumber]) -> int:
        """Number of cumulative boundaries lying at or below a lazily drawn U."""
        return self._resolve(*_interval_plan(tuple(bounds)))

    def _resolve(self, above: int, ties: tuple) -> int:
        k = 0
        while ties:
            k += 1
            u = self._bit()
            still = []
            for t in ties:
                b, irrational, table = t
                d = table[k - 1] if k <= len(table) else _digit(b, k)
                if u > d or (u == d and not irrational and is_dyadic_at(b, k)):
                    above += 1
                elif u == d:
                    still.append(t)
            ties = still
        return above

    # -- primitives ------------------------------------------------------------

    def uniform_int(self, m: int) -> int:
        if not isinstance(m, int) or m < 1:
            raise ContractError("uniform_int needs m >= 1")
        if m > 1:
            self.meter.model_entropy_bits += math.log2(m)
        return self._dice(m)

    def bernoulli(self, p: ExactNumber) -> bool:
        h, above, ties = _bernoulli_plan(exact(p))
        self.meter.model_entropy_bits += h
        return self._resolve(above, ties) == 0

    def categorical(self, atoms: Sequence[ExactNumber]) -> Optional[int]:
        """Index ``i`` with probability ``atoms[i]``; ``None`` with the residual mass."""
        bounds, h = categorical_plan(tuple(exact(a) for a in atoms))
        self.meter.model_entropy_bits += h
        i = self._resolve(*_interval_plan(bounds))
        return i if i < len(bounds) else None

    def draw_step(self, model: Model | str, c: Optional[Fraction] = None) -> str:
        model = Model(model)
        if model is Model.MOTZKIN:
            self.meter.model_entropy_bits += LOG2_3
            return "UFD"[self._dice(3)]
        if model is Model.SCHROEDER:
            self.meter.model_entropy_bits += SCHROEDER_STEP_ENTROPY
            return "UFD"[self._resolve(*_SCHROEDER_PLAN)]
        if model is Model.COLORED:
            if c is None:
                raise ContractError("the colored model needs a weight c > 0")
            q, m, h = _colored_plan(c)
            self.meter.model_entropy_bits += h
            j = self._dice(m)
            return "UFD"[j // q] if j < 3 * q else FC
        self.meter.model_entropy_bits += 1.0
        return U if self._bit() else D


_SCHROEDER_PLAN = _interval_plan(_SCHROEDER_BOUNDS)


# Functional aliases -----------------------------------------------------------


def next_bit(src: BitSource) -> int:
    return src.next_bit()


def bernoulli(src, p: ExactNumber) -> bool:
    return src.bernoulli(p)


def uniform_int(src, m: int) -> int:
    return src.uniform_int(m)


def categorical(src, atoms: Sequence[ExactNumber]) -> Optional[int]:
    return src.categorical(atoms)


def draw_step(src, model: Model | str, c: Optional[Fraction] = None) -> str:
    return src.draw_step(model, c)
