"""Step alphabet, the instrumented path buffer, and the structural bijections.

A :class:`Path` is an append/rewrite-in-place buffer of one-character step tags
(``U``, ``F``, ``D`` and ``C`` for the weighted flat step of colored Motzkin
paths).  Height, flat count and, for Schröder paths, the index of the first flat
step at height 0 are cached and kept current by every operation.

Time metering follows one rule: an operation charges every step cell it touches
exactly once, to ``writes`` if it stores into the cell (appends included) and to
``reads`` otherwise.  Dropping the last cell is an unmetered length decrement.
"""

from __future__ import annotations

import enum
from typing import Callable, Iterable, Optional

U, F, D, FC = "U", "F", "D", "C"

HEIGHT = {U: 1, F: 0, D: -1, FC: 0}


class Step(str, enum.Enum):
    U = U
    F = F
    D = D
    FC = FC

    @property
    def height(self) -> int:
        return HEIGHT[self.value]

    def geo_length(self, model: "Model") -> int:
        return 2 if (self is Step.F and model is Model.SCHROEDER) else 1


class Model(str, enum.Enum):
    MOTZKIN = "motzkin"
    COLORED = "colored-motzkin"
    SCHROEDER = "schroeder"
    DYCK = "dyck"

    @property
    def alphabet(self) -> str:
        return _ALPHABETS[self]


_ALPHABETS = {
    Model.MOTZKIN: "UFD",
    Model.COLORED: "UFDC",
    Model.SCHROEDER: "UFD",
    Model.DYCK: "UD",
}


class ContractError(ValueError):
    """A precondition of a public operation was violated."""


class Rejected(Exception):
    """Raised inside a sampler attempt when a partial function is undefined."""


class Path:
    """Instrumented step sequence.

    ``steps`` is a list of one-character tags.  ``reads`` and ``writes`` are the
    time meters; ``restarts`` counts whole-sampler restarts that reused this
    buffer and ``wasted`` the part of ``reads + writes`` spent in them.
    ``ffz`` is the index of the first F step at height 0 (Schröder model
    only), ``None`` when the path is little.
    """

    __slots__ = ("model", "steps", "height", "flats", "ffz", "reads", "writes", "restarts",
                 "wasted")

    def __init__(self, model: Model | str = Model.MOTZKIN):
        self.model = Model(model)
        self.steps: list[str] = []
        self.height = 0
        self.flats = 0
        self.ffz: Optional[int] = None
        self.reads = 0
        self.writes = 0
        self.restarts = 0
        self.wasted = 0

    @classmethod
    def from_text(cls, text: str | Iterable[str], model: Model | str = Model.MOTZKIN) -> "Path":
        """Build a path from tags with meters left at zero."""
        p = cls(model)
        for s in text:
            p.push(s)
        p.reads = p.writes = 0
        return p

    def copy(self) -> "Path":
        p = Path(self.model)
        p.steps = self.steps.copy()
        p.height, p.flats, p.ffz = self.height, self.flats, self.ffz
        p.reads, p.writes, p.restarts = self.reads, self.writes, self.restarts
        p.wasted = self.wasted
        return p

    def clear(self) -> None:
        """Drop all steps but keep the meters (used when a sampler restarts)."""
        self.steps.clear()
        self.height = 0
        self.flats = 0
        self.ffz = None

    # -- views -------------------------------------------------------------

    def __len__(self) -> int:
        return len(self.steps)

    def __str__(self) -> str:
        return "".join(self.steps)

    def __repr__(self) -> str:
        return f"Path({str(self)!r}, model={self.model.value})"

    def __eq__(self, other) -> bool:
        if isinstance(other, Path):
            return self.model is other.model and self.steps == other.steps
        return NotImplemented

    __hash__ = None  # mutable

    @property
    def text(self) -> str:
        return "".join(self.steps)

    @property
    def geo_len(self) -> int:
        if self.model is Model.SCHROEDER:
            return len(self.steps) + self.flats
        return len(self.steps)

    @property
    def little(self) -> bool:
        return self.ffz is None

    def to_json(self) -> dict:
        d = {"model": self.model.value, "steps": self.text, "height": self.height,
             "geo_len": self.geo_len}
        d["little"] = self.little if self.model is Model.SCHROEDER else None
        return d

    # -- growth ------------------------------------------------------------

    def push(self, s: str) -> None:
        if s not in self.model.alphabet:
            raise ContractError(f"step {s!r} is not legal in the {self.model.value} model")
        if s == F and self.height == 0 and self.ffz is None and self.model is Model.SCHROEDER:
            self.ffz = len(self.steps)
        self.steps.append(s)
        self.height += HEIGHT[s]
        if s == F:
            self.flats += 1
        self.writes += 1

    def truncate(self) -> str:
        """Drop the last step (unmetered)."""
        s = self.steps.pop()
        self.height -= HEIGHT[s]
        if s == F:
            self.flats -= 1
        if self.ffz is not None and self.ffz >= len(self.steps):
            self.ffz = None
        return s

    def replace_last(self, s: str) -> None:
        """Overwrite the final step (one write)."""
        old = self.steps[-1]
        self.steps[-1] = s
        self.writes += 1
        self.height += HEIGHT[s] - HEIGHT[old]
        self.flats += (s == F) - (old == F)
        if self.model is Model.SCHROEDER:
            last = len(self.steps) - 1
            if self.ffz == last and s != F:
                self.ffz = None
            elif s == F and self.ffz is None and self.height == 0:
                self.ffz = last

    # -- bijections --------------------------------------------------------

    def unfold_at(self, j: int) -> None:
        """Rewrite the Łukasiewicz path ``σ τ`` (``|σ| = j``) into ``σ τ̃`` in place.

        One forward pass over τ: every cell is shifted right by one, the
        first-passage D steps become U, a U is inserted in front and the final
        D falls off.  Charges ``|τ|`` writes.
        """
        st = self.steps
        n = len(st)
        if not 0 <= j < n:
            raise ContractError("unfold needs a nonempty right factor")
        prev = U
        rel = low = 0
        dh = 0
        for t in range(j, n):
            s = st[t]
            st[t] = prev
            dh += HEIGHT[prev] - HEIGHT[s]
            if s == D:
                rel -= 1
                if rel < low:
                    low = rel
                    prev = U
                    continue
            else:
                rel += HEIGHT[s]
            prev = s
        self.height += dh
        self.writes += n - j
        if self.ffz is not None and self.ffz >= j:
            self.ffz = None

    def unfold_flat_from_right(self, i: int) -> None:
        """Rewrite ``σ F τ`` into ``σ τ̃`` in place, F being the i-th flat from the right.

        A single backward pass from the end locates the flat step and, for each
        level, remembers the leftmost D that enters it; those are exactly the
        first-passage D steps of τ.  Only the F and those D steps are rewritten
        (to U) and the final D is dropped.  Charges ``|τ| + 1`` cells.
        """
        st = self.steps
        n = len(st)
        if not 1 <= i <= self.flats:
            raise ContractError("no such flat step")
        entry: dict[int, int] = {}
        h = self.height
        seen = 0
        p = n - 1
        while True:
            s = st[p]
            if s == F:
                seen += 1
                if seen == i:
                    break
            elif s == D:
                entry[h] = p
            h -= HEIGHT[s]
            p -= 1
        k = h  # height of σ
        st[p] = U
        for level in range(k):
            st[entry[level]] = U
        st.pop()  # the final D, first passage to -1
        self.writes += 1 + k
        self.reads += (n - p) - 1 - k
        self.flats -= 1
        self.height = 2 * k + 1
        if self.ffz is not None and self.ffz >= p:
            self.ffz = None

    def fold_excursion(self, flat: bool = False) -> int:
        """Fold a positive path of odd height ``2k+1`` into an excursion, in place.

        With ``σ τ̃`` the mid-height factorization, produces ``σ τ`` minus its
        final D (``flat=False``) or ``σ F τ`` minus its final D (``flat=True``).
        One backward pass from the end finds the last-passage U steps of τ̃;
        returns ``|σ|``.  Charges ``|τ̃|`` cells.
        """
        st = self.steps
        n = len(st)
        h = self.height
        if h < 1 or h % 2 == 0:
            raise ContractError("fold needs a positive path of odd height")
        k = (h - 1) // 2
        low = h
        out_h = 0
        zero_flat = None
        carry = None
        p = n - 1
        while True:
            if p < 0:
                raise ContractError("fold needs a positive path")
            s = st[p]
            hb = h - HEIGHT[s]
            lead = False
            if s == U and hb < low:
                low = hb
                lead = hb == k
                conv = F if (lead and flat) else D
            else:
                conv = s
            if flat:
                if conv != s:
                    st[p] = conv
                    self.writes += 1
                else:
                    self.reads += 1
                new = conv
            else:
                new = carry
                if carry is not None:
                    st[p] = carry
                    self.writes += 1
                else:
                    self.reads += 1
            if new is not None:
                if new == F and out_h == 0:
                    zero_flat = p
                out_h -= HEIGHT[new]
            if lead:
                break
            carry = conv
            h = hb
            p -= 1
        if flat:
            self.flats += 1
        else:
            st.pop()
        self.height = 0
        if self.model is Model.SCHROEDER and not (self.ffz is not None and self.ffz < p):
            self.ffz = zero_flat
        return p

    def _scan_flippable(self) -> tuple[Optional[int], int]:
        st = self.steps
        skip = (D, FC) if self.model is Model.COLORED else (D,)
        p = len(st) - 1
        while p >= 0 and st[p] in skip:
            p -= 1
        return (p if p >= 0 else None), len(st) - 1 - p

    def flippable_step(self) -> Optional[str]:
        """The flippable step (last U or F before trailing D, and C, steps), or None."""
        p, skipped = self._scan_flippable()
        self.reads += skipped + (p is not None)
        return None if p is None else self.steps[p]

    def flip(self) -> bool:
        """Swap the flippable step between U and F; False when it does not exist."""
        p, skipped = self._scan_flippable()
        self.reads += skipped
        if p is None:
            return False
        self.flip_at(p)
        return True

    def flip_at(self, p: int) -> None:
        if self.steps[p] == U:
            self.steps[p] = F
            self.height -= 1
            self.flats += 1
        else:
            self.steps[p] = U
            self.height += 1
            self.flats -= 1
        self.writes += 1

    def lift(self) -> None:
        """Turn the first flat step at height 0 into U (constant time)."""
        if self.model is not Model.SCHROEDER or self.ffz is None:
            raise ContractError("lift needs a non-little Schröder path")
        self.steps[self.ffz] = U
        self.writes += 1
        self.height += 1
        self.flats -= 1
        self.ffz = None

    # -- helpers for extend -----------------------------------------------

    def place_before_run(self, j: int, s: str) -> None:
        """Insert U or D in front of the last ``j`` steps, which are all F."""
        if j == 0:
            self.push(s)
            return
        st = self.steps
        n = len(st)
        pos = n - j
        st[pos] = s
        st.append(F)
        self.writes += 2
        self.height += HEIGHT[s]
        if self.model is Model.SCHROEDER and not (self.ffz is not None and self.ffz < pos):
            self.ffz = pos + 1 if self.height == 0 else None

    def flatten_at(self, pos: int) -> None:
        """Turn the U or D at ``pos`` (followed only by F steps) into F."""
        st = self.steps
        old = st[pos]
        st[pos] = F
        self.writes += 1
        self.height -= HEIGHT[old]
        self.flats += 1
        if self.model is Model.SCHROEDER and not (self.ffz is not None and self.ffz < pos):
            self.ffz = pos if self.height == 0 else None

    def collapse_dd(self) -> None:
        """``σDD -> σF``: rewrite the penultimate D and drop the last one."""
        st = self.steps
        st[-2] = F
        st.pop()
        self.writes += 1
        self.height += 2
        self.flats += 1


# -- functional API ------------------------------------------------------------


def _prefix_heights(steps: Iterable[str]) -> list[int]:
    hs = [0]
    for s in steps:
        hs.append(hs[-1] + HEIGHT[s])
    return hs


def is_positive(p: Path | str) -> bool:
    return min(_prefix_heights(str(p))) >= 0


def classify(p: Path | str) -> str:
    """One of ``"excursion"``, ``"positive"``, ``"lukasiewicz"`` or ``"other"``."""
    hs = _prefix_heights(str(p))
    if min(hs) >= 0:
        return "excursion" if hs[-1] == 0 else "positive"
    if hs[-1] < 0 and min(hs[:-1]) >= 0:
        return "lukasiewicz"
    return "other"


def first_flat_at_zero(p: Path | str) -> Optional[int]:
    """Rescan for the first F whose prefix has height 0."""
    h = 0
    for i, s in enumerate(str(p)):
        if s == F and h == 0:
            return i
        h += HEIGHT[s]
    return None


def push_step(p: Path, s: str) -> Path:
    p.push(s)
    return p


def unfold(sigma: Path, tau: Path) -> Path:
    """Return ``σ τ̃`` for a Łukasiewicz concatenation ``σ τ`` with ``τ`` nonempty."""
    if not len(tau):
        raise ContractError("unfold needs a nonempty right factor")
    if sigma.model is not tau.model:
        raise ContractError("factors come from different models")
    whole = Path.from_text(sigma.text + tau.text, sigma.model)
    if classify(whole) != "lukasiewicz" or whole.height != -1:
        raise ContractError("unfold needs a Łukasiewicz concatenation")
    whole.unfold_at(len(sigma))
    return whole


def fold(p: Path) -> tuple[Path, Path]:
    """Inverse of :func:`unfold`: split a positive odd-height path into ``(σ, τ)``."""
    if not is_positive(p) or p.height % 2 == 0:
        raise ContractError("fold needs a positive path of odd height")
    w = p.copy()
    cut = w.fold_excursion(flat=False)
    w.push(D)
    return Path.from_text(w.steps[:cut], p.model), Path.from_text(w.steps[cut:], p.model)


def flip(p: Path) -> Optional[Path]:
    if p.model not in (Model.MOTZKIN, Model.COLORED):
        raise ContractError("flip is defined on Motzkin paths")
    w = p.copy()
    return w if w.flip() else None


def lift(p: Path) -> Path:
    w = p.copy()
    w.lift()
    return w


def is_little(p: Path) -> bool:
    if p.model is not Model.SCHROEDER:
        raise ContractError("littleness is a Schröder notion")
    return p.ffz is None


def run_with_restarts(attempt: Callable[[Path], Path], path: Path) -> Path:
    """Call ``attempt`` on a cleared buffer until it returns without rejecting."""
    while True:
        before = path.reads + path.writes
        try:
            return attempt(path)
        except Rejected:
            path.wasted += path.reads + path.writes - before
            path.clear()
            path.restarts += 1
