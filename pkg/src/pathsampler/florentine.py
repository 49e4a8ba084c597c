"""Anticipated-rejection baseline: draw steps, start over as soon as the path dips below 0."""

from __future__ import annotations

from .paths import ContractError, Model, Path, Rejected

BASELINE_MODELS = (Model.MOTZKIN, Model.SCHROEDER, Model.DYCK)


def advance(w: Path, src) -> None:
    w.push(src.draw_step(w.model))
    if w.height < 0:
        raise Rejected


def trim_overshoot(w: Path, n: int, src=None) -> None:
    if w.geo_len == n + 1:
        w.truncate()  # Schröder overshoot by a flat step, trimmed as in the recovery sampler


def florentine_attempt(w: Path, n: int, src) -> Path:
    while w.geo_len < n:
        advance(w, src)
    trim_overshoot(w, n)
    return w


def florentine_positive(model: Model | str, n: int, src) -> Path:
    from .engine import sample

    model = Model(model)
    if model not in BASELINE_MODELS:
        raise ContractError(f"no baseline for the {model.value} model")
    if n < 1:
        raise ContractError("positive paths need n >= 1")
    return sample(f"florentine-{model.value}", n, src)
