"""Heisenberg group arithmetic in exponential coordinates.

A point ``(x, y, z)`` stands for ``M(x, y, z) = exp(zZ) exp(yY) exp(xX)``,
embedded in GL(4, R) as::

    [[1, x, -y, z],
     [0, 1,  0, y],
     [0, 0,  1, 0],
     [0, 0,  0, 1]]

Coordinates are the working representation; the matrix form is kept as an
oracle for tests and checks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "GroupElement",
    "LatticePoint",
    "LambdaPair",
    "DilationAutomorphism",
    "IDENTITY",
    "multiply",
    "inverse",
    "to_matrix",
    "from_matrix",
    "conjugate",
    "enumerate_lambda",
]

AB_TOLERANCE = 1e-12


@dataclass(frozen=True)
class GroupElement:
    x: Real
    y: Real
    z: Real

    def __post_init__(self):
        for name in ("x", "y", "z"):
            value = getattr(self, name)
            if not isinstance(value, Fraction) and not math.isfinite(value):
                raise ValueError(f"coordinate {name} must be finite, got {value!r}")

    def __iter__(self):
        return iter((self.x, self.y, self.z))

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return multiply(self, other)

    def as_tuple(self) -> tuple:
        return (self.x, self.y, self.z)


IDENTITY = GroupElement(0, 0, 0)


@dataclass(frozen=True)
class LatticePoint:
    """Element of the discrete subgroup Gamma.

    The matrix has first row ``(1, k3, -k2, k1)`` and ``(2, 4)`` entry ``k2``,
    so in coordinates it is ``(x, y, z) = (k3, k2, k1)``.
    """

    k1: int
    k2: int
    k3: int

    def __post_init__(self):
        for name in ("k1", "k2", "k3"):
            value = getattr(self, name)
            if int(value) != value:
                raise ValueError(f"{name} must be an integer, got {value!r}")

    @property
    def element(self) -> GroupElement:
        return GroupElement(int(self.k3), int(self.k2), int(self.k1))


@dataclass(frozen=True)
class LambdaPair:
    """A pair ``(gamma, eta)`` in Lambda; ``eta`` has no central part."""

    left: LatticePoint
    right: LatticePoint

    def __post_init__(self):
        if self.right.k1 != 0:
            raise ValueError("right factor of a Lambda pair must have k1 = 0")

    @classmethod
    def from_indices(cls, k1: int, k2: int, k3: int, m2: int, m3: int) -> "LambdaPair":
        return cls(LatticePoint(k1, k2, k3), LatticePoint(0, m2, m3))

    @property
    def indices(self) -> tuple[int, int, int, int, int]:
        return (self.left.k1, self.left.k2, self.left.k3, self.right.k2, self.right.k3)

    @property
    def in_lambda1(self) -> bool:
        return self.left.k1 == 0

    @property
    def elements(self) -> tuple[GroupElement, GroupElement]:
        return self.left.element, self.right.element


def multiply(g: GroupElement, h: GroupElement) -> GroupElement:
    """Group law ``(x, y, z) * (w, v, u) = (w + x, v + y, u + z + v x)``."""
    return GroupElement(g.x + h.x, g.y + h.y, g.z + h.z + h.y * g.x)


def inverse(g: GroupElement) -> GroupElement:
    return GroupElement(-g.x, -g.y, g.x * g.y - g.z)


def to_matrix(g: GroupElement, dtype=float) -> np.ndarray:
    if dtype is object:
        m = np.array([[Fraction(int(i == j)) for j in range(4)] for i in range(4)], dtype=object)
    else:
        m = np.eye(4, dtype=dtype)
    m[0, 1] = g.x
    m[0, 2] = -g.y
    m[0, 3] = g.z
    m[1, 3] = g.y
    return m


def from_matrix(m) -> GroupElement:
    """Read coordinates back from an embedded matrix (no validation of shape)."""
    m = np.asarray(m)
    return GroupElement(m[0, 1], m[1, 3], m[0, 3])


@dataclass(frozen=True)
class DilationAutomorphism:
    """Conjugation by ``A^m`` with ``A = diag(ab, b, a, 1)`` and ``ab = 2``.

    ``a`` and ``b`` may be floats or Fractions; with Fractions the constraint
    is checked exactly.
    """

    a: Real
    b: Real
    m: int = 1

    def __post_init__(self):
        if self.a == 0 or self.b == 0:
            raise ValueError("a and b must be nonzero")
        if int(self.m) != self.m:
            raise ValueError(f"power m must be an integer, got {self.m!r}")
        product = self.a * self.b
        if isinstance(product, Fraction):
            if product != 2:
                raise ValueError(f"a*b must equal 2, got {product}")
        elif abs(product - 2) > AB_TOLERANCE:
            raise ValueError(f"a*b must equal 2 within {AB_TOLERANCE}, got {product!r}")

    @property
    def det_a(self):
        """``|det A|`` for the unit power; always 4 under the constraint."""
        return abs((self.a * self.b) ** 2)

    @property
    def jacobian(self):
        """Volume factor ``|det A|^m`` of the coordinate scaling."""
        return self.det_a ** self.m if self.m >= 0 else 1 / self.det_a ** (-self.m)

    def power(self, m: int) -> "DilationAutomorphism":
        return DilationAutomorphism(self.a, self.b, m)

    def inverse(self) -> "DilationAutomorphism":
        return DilationAutomorphism(self.a, self.b, -self.m)

    def scale_factors(self):
        """Per-coordinate factors ``(a^m, b^m, (ab)^m)``."""
        return (_pow(self.a, self.m), _pow(self.b, self.m), _pow(self.a * self.b, self.m))

    def matrix(self, dtype=float) -> np.ndarray:
        fx, fy, fz = self.scale_factors()
        if dtype is object:
            out = np.array([[Fraction(0)] * 4 for _ in range(4)], dtype=object)
            out[0, 0], out[1, 1], out[2, 2], out[3, 3] = fz, fy, fx, Fraction(1)
            return out
        return np.diag([fz, fy, fx, 1.0]).astype(dtype)


def _pow(base, m: int):
    if m >= 0:
        return base ** m
    return 1 / base ** (-m)


def conjugate(d: DilationAutomorphism, g: GroupElement) -> GroupElement:
    """``A^m g A^-m`` in coordinates: ``(a^m x, b^m y, (ab)^m z)``."""
    fx, fy, fz = d.scale_factors()
    return GroupElement(fx * g.x, fy * g.y, fz * g.z)


def enumerate_lambda(bounds: Sequence[int]) -> Iterator[LambdaPair]:
    """All pairs with ``|k1|,|k2|,|k3|,|m2|,|m3|`` within ``bounds``.

    Order is lexicographic in ``(k1, k2, k3, m2, m3)``, each from ``-b`` to ``b``.
    """
    if len(bounds) != 5:
        raise ValueError("expected five bounds (k1, k2, k3, m2, m3)")
    if any(b < 0 for b in bounds):
        raise ValueError("bounds must be nonnegative")
    ranges = [range(-b, b + 1) for b in bounds]
    for idx in itertools.product(*ranges):
        yield LambdaPair.from_indices(*idx)
