"""Sampler registry and backend dispatch.

Every sampler is registered under a name with its single-attempt function.
:func:`sample` restarts attempts until one succeeds.  When the compiled
``_core`` extension imports and the source is a real :class:`BitSource`, the
kernel runs instead; it consumes exactly the same bits and charges the same
meters as the Python code.  Set ``PATHSAMPLER_BACKEND=python`` to force the
fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from . import florentine, motzkin, schroeder
from .paths import ContractError, Model, Path, run_with_restarts
from .randomness import BitSource

try:  # pragma: no cover - depends on the build
    from . import _core
except ImportError:  # pragma: no cover
    _core = None


@dataclass(frozen=True)
class SamplerSpec:
    name: str
    model: Model
    kind: str
    attempt: Callable
    min_n: int = 0
    parity: Optional[int] = None
    colored: bool = False
    code: int = 0  # kernel dispatch code

    def validate(self, n: int, c=None) -> Optional[Fraction]:
        if not isinstance(n, int) or n < self.min_n:
            raise ContractError(f"{self.name} needs length n >= {self.min_n}")
        if self.parity is not None and n % 2 != self.parity:
            raise ContractError(f"{self.name} needs {'even' if self.parity == 0 else 'odd'} length")
        if self.name == "schroeder-positive" and n % 2 == 0 and n < 2:
            raise ContractError("even Schröder positive paths need n >= 2")
        if self.colored:
            if c is None:
                raise ContractError("the colored model needs a weight c")
            c = Fraction(c)
            if c <= 0:
                raise ContractError("the weight c must be positive")
            return c
        if c is not None:
            raise ContractError("a weight only applies to colored Motzkin paths")
        return None


def _spec(name, model, kind, attempt, code, **kw) -> SamplerSpec:
    return SamplerSpec(name, model, kind, attempt, code=code, **kw)


SAMPLERS: dict[str, SamplerSpec] = {
    s.name: s
    for s in [
        _spec("motzkin-positive", Model.MOTZKIN, "positive", motzkin.positive_attempt, 1, min_n=1),
        _spec("motzkin-excursion", Model.MOTZKIN, "excursion", motzkin.excursion_attempt, 2),
        _spec("colored-positive", Model.COLORED, "positive", motzkin.positive_attempt, 3,
              min_n=1, colored=True),
        _spec("colored-excursion", Model.COLORED, "excursion", motzkin.excursion_attempt, 4,
              colored=True),
        _spec("schroeder-approx", Model.SCHROEDER, "approx", schroeder.approx_attempt, 5, min_n=1),
        _spec("schroeder-positive", Model.SCHROEDER, "positive", schroeder.positive_attempt, 6,
              min_n=1),
        _spec("schroeder-excursion", Model.SCHROEDER, "excursion", schroeder.excursion_attempt, 7,
              parity=0),
        _spec("little-excursion", Model.SCHROEDER, "excursion", schroeder.little_excursion_attempt,
              8, parity=0),
        _spec("little-positive", Model.SCHROEDER, "positive", schroeder.little_positive_attempt, 9,
              min_n=1),
        _spec("florentine-motzkin", Model.MOTZKIN, "positive", florentine.florentine_attempt, 10,
              min_n=1),
        _spec("florentine-schroeder", Model.SCHROEDER, "approx", florentine.florentine_attempt, 11,
              min_n=1),
        _spec("florentine-dyck", Model.DYCK, "positive", florentine.florentine_attempt, 12,
              min_n=1),
    ]
}


def get_spec(name: str) -> SamplerSpec:
    try:
        return SAMPLERS[name]
    except KeyError:
        raise ContractError(f"unknown sampler {name!r}") from None


def make_attempt(name: str, n: int, src, c=None) -> Callable[[Path], Path]:
    """Bind one attempt of sampler ``name`` to ``(n, src, c)``."""
    spec = get_spec(name)
    c = spec.validate(n, c)
    if spec.colored:
        return lambda w: spec.attempt(w, n, src, c)
    return lambda w: spec.attempt(w, n, src)


# -- backends ------------------------------------------------------------------


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _core is not None else [])


def default_backend() -> str:
    want = os.environ.get("PATHSAMPLER_BACKEND", "auto").lower()
    if want == "python":
        return "python"
    if want == "cython":
        if _core is None:
            raise ImportError("PATHSAMPLER_BACKEND=cython but the compiled core is not built")
        return "cython"
    return "cython" if _core is not None else "python"


BACKEND = default_backend()


def _resolve(backend: Optional[str], src) -> str:
    b = backend or BACKEND
    if b == "cython":
        if _core is None:
            raise ContractError("the compiled core is not available")
        if type(src) is not BitSource:
            return "python"  # scripted sources (oracles) only speak Python
    elif b != "python":
        raise ContractError(f"unknown backend {b!r}")
    return b


@dataclass
class RunStats:
    """Meters of one completed sampler run, including its restarted attempts."""

    steps: int
    geo_len: int
    reads: int
    writes: int
    restarts: int
    wasted: int
    entropy_bits: float
    physical_bits: int

    @property
    def time_factor(self) -> float:
        return (self.reads + self.writes) / max(self.steps, 1)


def sample(name: str, n: int, src, c=None, backend: Optional[str] = None) -> Path:
    """Run sampler ``name`` to completion and return the metered path."""
    spec = get_spec(name)
    c = spec.validate(n, c)
    if _resolve(backend, src) == "cython":
        return _core.run_path(spec.code, n, src, c)
    w = Path(spec.model)
    return run_with_restarts(make_attempt(name, n, src, c), w)


def run_stats(name: str, n: int, src, c=None, backend: Optional[str] = None) -> RunStats:
    """Like :func:`sample` but return only the meters (no path is materialized)."""
    spec = get_spec(name)
    c = spec.validate(n, c)
    e0, b0 = src.meter.model_entropy_bits, src.meter.physical_bits
    if _resolve(backend, src) == "cython":
        steps, geo, reads, writes, restarts, wasted = _core.run_stats(spec.code, n, src, c)
    else:
        w = run_with_restarts(make_attempt(name, n, src, c), Path(spec.model))
        steps, geo = len(w), w.geo_len
        reads, writes, restarts, wasted = w.reads, w.writes, w.restarts, w.wasted
    return RunStats(steps, geo, reads, writes, restarts, wasted,
                    src.meter.model_entropy_bits - e0, src.meter.physical_bits - b0)
