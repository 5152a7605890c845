"""Finite unions of intervals and the two congruence tests used for spectral sets.

Sets are identified up to null sets, so endpoints carry no open/closed flag:
``[-1,-0.5)u(0.5,1]`` and ``(-1,-0.5]u[0.5,1)`` are the same
:class:`IntervalUnion`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "IntervalUnion",
    "CongruenceResult",
    "SHANNON_BAND",
    "UNIT_INTERVAL",
    "parse_set",
    "measure",
    "intersect",
    "shift",
    "dyadic_scale",
    "union",
    "is_translation_congruent_unit",
    "is_dilation_congruent_shannon",
    "dyadic_cover_multiplicity",
]

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class IntervalUnion:
    """Sorted, disjoint intervals ``(lo, hi)`` with ``lo < hi``; touching pieces merged."""

    intervals: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        pieces = sorted((float(lo), float(hi)) for lo, hi in self.intervals)
        merged: list[list[float]] = []
        for lo, hi in pieces:
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError("interval endpoints must be finite")
            if hi < lo:
                raise ValueError(f"interval ({lo}, {hi}) runs backwards")
            if hi == lo:
                continue
            if merged and lo <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], hi)
            else:
                merged.append([lo, hi])
        object.__setattr__(self, "intervals", tuple((lo, hi) for lo, hi in merged))

    @classmethod
    def of(cls, *pieces: Sequence[float]) -> "IntervalUnion":
        return cls(tuple(tuple(p) for p in pieces))

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __bool__(self):
        return bool(self.intervals)

    @property
    def lo(self) -> float:
        return self.intervals[0][0]

    @property
    def hi(self) -> float:
        return self.intervals[-1][1]

    def contains(self, t: float) -> bool:
        return any(lo <= t <= hi for lo, hi in self.intervals)

    def distance_from_zero(self) -> float:
        if not self.intervals:
            return math.inf
        if self.contains(0.0):
            return 0.0
        return min(min(abs(lo), abs(hi)) for lo, hi in self.intervals)

    def to_text(self) -> str:
        """Render with the convention ``[lo,hi)`` below zero and ``(lo,hi]`` above."""
        parts = []
        for lo, hi in self.intervals:
            if hi <= 0:
                parts.append(f"[{lo!r},{hi!r})")
            else:
                parts.append(f"({lo!r},{hi!r}]")
        return "u".join(parts) if parts else "{}"

    def __str__(self):
        return self.to_text()


_PIECE = re.compile(r"^\s*[\[(]\s*([^,\s]+)\s*,\s*([^\])\s]+)\s*[\])]\s*$")


def _number(token: str) -> float:
    token = token.strip()
    if "/" in token:
        num, den = token.split("/", 1)
        return float(num) / float(den)
    return float(token)


def parse_set(text: str) -> IntervalUnion:
    """Parse ``"[-1,-0.5)u(0.5,1]"``; pieces joined by ``u``/``U``/``∪``.

    Pieces that overlap in positive length are rejected; touching pieces merge.
    Endpoints may be written as fractions, e.g. ``(1/4,1/2]``.
    """
    text = text.strip()
    if text in ("", "{}"):
        return IntervalUnion()
    pieces = []
    for chunk in re.split(r"[uU∪]", text):
        m = _PIECE.match(chunk)
        if not m:
            raise ValueError(f"cannot parse interval {chunk!r}")
        lo, hi = _number(m.group(1)), _number(m.group(2))
        if not lo < hi:
            raise ValueError(f"interval {chunk!r} is empty or reversed")
        pieces.append((lo, hi))
    pieces.sort()
    for (a0, a1), (b0, b1) in zip(pieces, pieces[1:]):
        if b0 < a1:
            raise ValueError(f"pieces ({a0},{a1}) and ({b0},{b1}) overlap")
    return IntervalUnion(tuple(pieces))


SHANNON_BAND = IntervalUnion(((-1.0, -0.5), (0.5, 1.0)))
UNIT_INTERVAL = IntervalUnion(((0.0, 1.0),))


def measure(s: IntervalUnion) -> float:
    return math.fsum(hi - lo for lo, hi in s.intervals)


def intersect(s: IntervalUnion, t: IntervalUnion) -> IntervalUnion:
    out = []
    for a0, a1 in s.intervals:
        for b0, b1 in t.intervals:
            lo, hi = max(a0, b0), min(a1, b1)
            if hi > lo:
                out.append((lo, hi))
    return IntervalUnion(tuple(out))


def union(s: IntervalUnion, t: IntervalUnion) -> IntervalUnion:
    return IntervalUnion(s.intervals + t.intervals)


def shift(s: IntervalUnion, k: float) -> IntervalUnion:
    return IntervalUnion(tuple((lo + k, hi + k) for lo, hi in s.intervals))


def dyadic_scale(s: IntervalUnion, j: int) -> IntervalUnion:
    """Multiply every endpoint by ``2**j``."""
    f = math.ldexp(1.0, j)
    return IntervalUnion(tuple((lo * f, hi * f) for lo, hi in s.intervals))


@dataclass
class CongruenceResult:
    """Outcome of a congruence test.

    ``witness`` lists ``((lo, hi), k)``: the piece of the input set and the
    integer shift (translation) or dyadic exponent (dilation) that moves it
    into the target.
    """

    ok: bool
    witness: list[tuple[tuple[float, float], int]] = field(default_factory=list)
    reason: str = ""

    def __bool__(self):
        return self.ok

    def shifts(self) -> list[int]:
        return [k for _, k in self.witness]


def _overlap_total(images: list[tuple[float, float]]) -> float:
    """Total pairwise overlap length of a list of intervals."""
    images = sorted(images)
    total = 0.0
    for i, (a0, a1) in enumerate(images):
        for b0, b1 in images[i + 1:]:
            if b0 >= a1:
                break
            total += min(a1, b1) - b0
    return total


def _covers(images: list[tuple[float, float]], target: IntervalUnion, tol: float) -> tuple[bool, str]:
    overlap = _overlap_total(images)
    if overlap > tol:
        return False, f"images overlap on a set of measure {overlap:.3g}"
    inside = measure(intersect(IntervalUnion(tuple(images)), target))
    total = math.fsum(hi - lo for lo, hi in images)
    if total - inside > tol:
        return False, f"images leave the target on a set of measure {total - inside:.3g}"
    gap = measure(target) - inside
    if gap > tol:
        return False, f"images miss a set of measure {gap:.3g}"
    return True, ""


def is_translation_congruent_unit(s: IntervalUnion, tol: float = DEFAULT_TOL) -> CongruenceResult:
    """Do the integer shifts of ``s`` partition ``(0, 1]`` up to measure ``tol``?"""
    witness = []
    images = []
    for lo, hi in s.intervals:
        n = math.floor(lo)
        while n < hi:
            a, b = max(lo, n), min(hi, n + 1)
            if b - a > 0:
                witness.append(((a, b), -n))
                images.append((a - n, b - n))
            n += 1
    ok, reason = _covers(images, UNIT_INTERVAL, tol)
    return CongruenceResult(ok, witness, reason)


def is_dilation_congruent_shannon(s: IntervalUnion, tol: float = DEFAULT_TOL) -> CongruenceResult:
    """Do dyadic rescalings of the pieces of ``s`` partition the Shannon band?

    A set reaching down to 0 needs infinitely many dyadic pieces and is
    reported as not congruent.
    """
    if s.distance_from_zero() == 0.0:
        return CongruenceResult(False, [], "set touches 0; no finite dyadic tiling exists")
    witness = []
    images = []
    for lo, hi in s.intervals:
        sign = 1.0 if lo > 0 else -1.0
        a, b = sorted((abs(lo), abs(hi)))
        # split [a, b) at powers of two; piece in (2^(e-1), 2^e] maps by 2^-e
        e = math.ceil(math.log2(a))
        if math.ldexp(1.0, e) == a:
            e += 1
        cur = a
        while cur < b:
            top = min(b, math.ldexp(1.0, e))
            if top > cur:
                j = -e
                f = math.ldexp(1.0, j)
                if sign > 0:
                    piece = (cur, top)
                    image = (cur * f, top * f)
                else:
                    piece = (-top, -cur)
                    image = (-top * f, -cur * f)
                witness.append((piece, j))
                images.append(image)
            cur = top
            e += 1
    ok, reason = _covers(images, SHANNON_BAND, tol)
    witness.sort()
    return CongruenceResult(ok, witness, reason)


def dyadic_cover_multiplicity(s: IntervalUnion, target: IntervalUnion, m_range: Iterable[int]) -> tuple[float, float]:
    """How ``{2^-m s}`` covers ``target``.

    Returns ``(covered, overlap)``: the total measure of ``target`` hit by the
    union of the scaled copies, and the total pairwise overlap between copies
    inside ``target``.
    """
    pieces = []
    for m in m_range:
        pieces.extend(intersect(dyadic_scale(s, -m), target).intervals)
    overlap = _overlap_total(pieces)
    covered = measure(IntervalUnion(tuple(pieces)))
    return covered, overlap
