"""Exact piecewise complex-exponential functions on the line.

A :class:`PiecewiseExpFunction` is a finite sum of segments
``c * exp(2*pi*i*omega*t)`` restricted to half-open intervals ``[t0, t1)``.
The class is closed under translation, modulation, scaling and dilation, so
every Schroedinger-representation orbit of an interval indicator stays inside
it and all inner products are available in closed form.

:class:`SampledFunction` is a rectangle-rule fallback for windows with no
exact representation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PiecewiseExpFunction",
    "SampledFunction",
    "indicator",
    "inner_product",
    "modulated_inner",
    "norm",
    "translate",
    "modulate",
    "scale",
    "dilate",
    "conjugate_fn",
    "add",
    "sup_distance",
    "random_piecewise",
]

TWO_PI = 2.0 * math.pi


def _frozen(arr, dtype):
    out = np.array(arr, dtype=dtype).reshape(-1)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PiecewiseExpFunction:
    """Sum of segments ``c * e^{2 pi i omega t}`` on ``[t0, t1)``.

    Overlapping segments add. Arrays are read-only; every operation returns a
    new instance.
    """

    t0: np.ndarray
    t1: np.ndarray
    c: np.ndarray
    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t0", _frozen(self.t0, float))
        object.__setattr__(self, "t1", _frozen(self.t1, float))
        object.__setattr__(self, "c", _frozen(self.c, complex))
        object.__setattr__(self, "omega", _frozen(self.omega, float))
        n = len(self.t0)
        if not (len(self.t1) == len(self.c) == len(self.omega) == n):
            raise ValueError("segment arrays must have equal length")
        if np.any(self.t1 <= self.t0):
            raise ValueError("every segment needs t0 < t1")
        if not (np.all(np.isfinite(self.t0)) and np.all(np.isfinite(self.t1))
                and np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.omega))):
            raise ValueError("segment data must be finite")

    @classmethod
    def from_segments(cls, segments: Iterable[Sequence]) -> "PiecewiseExpFunction":
        """Build from ``(t0, t1, c, omega)`` tuples."""
        segs = list(segments)
        if not segs:
            return cls.zero()
        t0, t1, c, om = zip(*segs)
        return cls(t0, t1, c, om)

    @classmethod
    def zero(cls) -> "PiecewiseExpFunction":
        return cls([], [], [], [])

    @property
    def n_segments(self) -> int:
        return len(self.t0)

    @property
    def segments(self) -> list[tuple[float, float, complex, float]]:
        return [(float(a), float(b), complex(c), float(w))
                for a, b, c, w in zip(self.t0, self.t1, self.c, self.omega)]

    def support(self) -> tuple[float, float] | None:
        """Convex hull of the segments with nonzero amplitude, or ``None``."""
        live = self.c != 0
        if not np.any(live):
            return None
        return float(self.t0[live].min()), float(self.t1[live].max())

    def breakpoints(self) -> np.ndarray:
        return np.unique(np.concatenate([self.t0, self.t1]))

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        flat = t.reshape(-1, 1)
        inside = (flat >= self.t0) & (flat < self.t1)
        vals = np.where(inside, self.c * np.exp(1j * TWO_PI * self.omega * flat), 0)
        return vals.sum(axis=1).reshape(t.shape)

    def norm(self) -> float:
        return norm(self)

    def normal_form(self) -> "PiecewiseExpFunction":
        """Sorted segments; equal ``(t0, t1, omega)`` combined; zeros dropped."""
        acc: dict[tuple[float, float, float], complex] = {}
        for a, b, c, w in self.segments:
            key = (a, b, w)
            acc[key] = acc.get(key, 0j) + c
        segs = [(a, b, c, w) for (a, b, w), c in sorted(acc.items()) if c != 0]
        return PiecewiseExpFunction.from_segments(segs)

    def to_records(self) -> list[list[float]]:
        return [[a, b, c.real, c.imag, w] for a, b, c, w in self.segments]

    @classmethod
    def from_records(cls, records) -> "PiecewiseExpFunction":
        return cls.from_segments((r[0], r[1], complex(r[2], r[3]), r[4]) for r in records)

    def __add__(self, other: "PiecewiseExpFunction") -> "PiecewiseExpFunction":
        return add(self, other)

    def __neg__(self) -> "PiecewiseExpFunction":
        return scale(self, -1)

    def __sub__(self, other: "PiecewiseExpFunction") -> "PiecewiseExpFunction":
        return add(self, scale(other, -1))

    def __repr__(self):
        return f"PiecewiseExpFunction({self.segments!r})"


def indicator(lo: float = 0.0, hi: float = 1.0, amplitude: complex = 1.0) -> PiecewiseExpFunction:
    """``amplitude * chi_[lo, hi)``."""
    return PiecewiseExpFunction([lo], [hi], [amplitude], [0.0])


def _pair_data(f: PiecewiseExpFunction, g: PiecewiseExpFunction):
    """Overlapping segment pairs: amplitude product, base frequency, overlap."""
    s0 = np.maximum.outer(f.t0, g.t0)
    s1 = np.minimum.outer(f.t1, g.t1)
    mask = s1 > s0
    amp = np.multiply.outer(f.c, np.conj(g.c))[mask]
    beta = np.subtract.outer(f.omega, g.omega)[mask]
    return amp, beta, s0[mask], s1[mask]


def _segment_integral(amp, beta, s0, s1):
    # amp * int_{s0}^{s1} e^{2 pi i beta t} dt written as midpoint phase times a sinc;
    # algebraically the closed form, and its own beta -> 0 limit.
    length = s1 - s0
    mid = s0 + s1
    return amp * length * np.exp(1j * math.pi * beta * mid) * np.sinc(beta * length)


def inner_product(f: PiecewiseExpFunction, g: PiecewiseExpFunction) -> complex:
    """``int f(t) conj(g(t)) dt``, exact up to rounding."""
    amp, beta, s0, s1 = _pair_data(f, g)
    if amp.size == 0:
        return 0j
    return complex(np.sum(_segment_integral(amp, beta, s0, s1)))


def modulated_inner(f: PiecewiseExpFunction, g: PiecewiseExpFunction, nus) -> np.ndarray:
    """``<f, modulate(g, nu)>`` for every ``nu`` in ``nus`` at once."""
    nus = np.asarray(nus, dtype=float)
    amp, beta, s0, s1 = _pair_data(f, g)
    if amp.size == 0:
        return np.zeros(nus.shape, dtype=complex)
    b = beta[:, None] - nus.reshape(1, -1)
    vals = _segment_integral(amp[:, None], b, s0[:, None], s1[:, None])
    return vals.sum(axis=0).reshape(nus.shape)


def norm(f: PiecewiseExpFunction) -> float:
    return math.sqrt(max(inner_product(f, f).real, 0.0))


def translate(f: PiecewiseExpFunction, x: float) -> PiecewiseExpFunction:
    """``t -> f(t - x)``."""
    if x == 0:
        return f
    return PiecewiseExpFunction(f.t0 + x, f.t1 + x,
                                f.c * np.exp(-1j * TWO_PI * f.omega * x), f.omega)


def modulate(f: PiecewiseExpFunction, omega: float) -> PiecewiseExpFunction:
    """``t -> e^{2 pi i omega t} f(t)``."""
    if omega == 0:
        return f
    return PiecewiseExpFunction(f.t0, f.t1, f.c, f.omega + omega)


def scale(f: PiecewiseExpFunction, c: complex) -> PiecewiseExpFunction:
    if c == 1:
        return f
    return PiecewiseExpFunction(f.t0, f.t1, f.c * c, f.omega)


def dilate(f: PiecewiseExpFunction, a: float) -> PiecewiseExpFunction:
    """``t -> |a|^{-1/2} f(t / a)``; unitary on L2."""
    if a == 0:
        raise ValueError("dilation factor must be nonzero")
    if a == 1:
        return f
    lo, hi = a * f.t0, a * f.t1
    if a < 0:
        lo, hi = hi, lo
    return PiecewiseExpFunction(lo, hi, f.c / math.sqrt(abs(a)), f.omega / a)


def conjugate_fn(f: PiecewiseExpFunction) -> PiecewiseExpFunction:
    """Pointwise complex conjugate."""
    return PiecewiseExpFunction(f.t0, f.t1, np.conj(f.c), -f.omega)


def add(f: PiecewiseExpFunction, g: PiecewiseExpFunction) -> PiecewiseExpFunction:
    return PiecewiseExpFunction(np.concatenate([f.t0, g.t0]), np.concatenate([f.t1, g.t1]),
                                np.concatenate([f.c, g.c]), np.concatenate([f.omega, g.omega]))


def sup_distance(f: PiecewiseExpFunction, g: PiecewiseExpFunction, min_cell: float = 1e-9) -> float:
    """Largest pointwise gap, sampled on every elementary cell.

    Cells shorter than ``min_cell`` are skipped: they only arise from
    floating-point jitter between breakpoints and carry no L2 mass.
    Within a cell both functions are trigonometric sums, so the cell is
    sampled at several interior points.
    """
    pts = np.unique(np.concatenate([f.breakpoints(), g.breakpoints()]))
    if pts.size < 2:
        return 0.0
    lo, hi = pts[:-1], pts[1:]
    keep = hi - lo > min_cell
    lo, hi = lo[keep], hi[keep]
    if lo.size == 0:
        return 0.0
    fractions = np.array([0.1, 0.3, 0.5, 0.7, 0.9])
    samples = (lo[:, None] + fractions[None, :] * (hi - lo)[:, None]).ravel()
    return float(np.max(np.abs(f(samples) - g(samples))))


def random_piecewise(rng: np.random.Generator, n_segments: int | None = None,
                     span: tuple[float, float] = (-2.0, 2.0),
                     max_freq: float = 3.0) -> PiecewiseExpFunction:
    """Seeded random test function with a handful of segments."""
    if n_segments is None:
        n_segments = int(rng.integers(1, 5))
    segs = []
    for _ in range(n_segments):
        a, b = np.sort(rng.uniform(*span, size=2))
        if b - a < 0.05:
            b = a + 0.05
        amp = complex(rng.normal(), rng.normal())
        segs.append((a, b, amp, rng.uniform(-max_freq, max_freq)))
    return PiecewiseExpFunction.from_segments(segs)


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Samples ``f(start + k*step)`` standing for a function on a uniform grid."""

    start: float
    step: float
    samples: np.ndarray

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        object.__setattr__(self, "samples", _frozen(self.samples, complex))

    @classmethod
    def from_function(cls, f: PiecewiseExpFunction, start: float, stop: float,
                      step: float) -> "SampledFunction":
        n = int(math.ceil((stop - start) / step))
        t = start + step * np.arange(n)
        return cls(start, step, f(t))

    def grid(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.samples.size)

    def inner(self, other: "SampledFunction") -> complex:
        """Rectangle rule on the common grid; grids must coincide."""
        if not (math.isclose(self.step, other.step, rel_tol=1e-12)):
            raise ValueError("sampled functions use different steps")
        offset = (other.start - self.start) / self.step
        shift = int(round(offset))
        if abs(offset - shift) > 1e-9:
            raise ValueError("sampled grids are not aligned")
        a, b = self.samples, other.samples
        lo = max(0, shift)
        hi = min(a.size, shift + b.size)
        if hi <= lo:
            return 0j
        return complex(np.sum(a[lo:hi] * np.conj(b[lo - shift:hi - shift])) * self.step)

    def norm(self) -> float:
        return math.sqrt(float(np.sum(np.abs(self.samples) ** 2) * self.step))
