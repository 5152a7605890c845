"""Schroedinger representations, their contragredients, and rank-one operators.

For ``g = (x, y, z)`` and nonzero ``lam``::

    [pi_lam(g) f](t) = e^{2 pi i lam z} e^{-2 pi i lam y t} f(t - x)

The contragredient is realized as ``conj o pi_lam(g) o conj``, which is the
transpose of ``pi_lam(g^-1)`` for these real-kernel unitaries.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .group import GroupElement, LambdaPair
from .linefn import (
    PiecewiseExpFunction,
    conjugate_fn,
    dilate,
    inner_product,
    modulate,
    norm,
    scale,
    translate,
)

__all__ = [
    "RankOneOperator",
    "apply_pi",
    "apply_pi_bar",
    "apply_dilation_C",
    "tensor_apply",
    "hs_inner",
    "hs_norm",
]


def _check_lambda(lam: float) -> None:
    if lam == 0:
        raise ValueError("lambda must be nonzero")


def apply_pi(lam: float, g: GroupElement, f: PiecewiseExpFunction) -> PiecewiseExpFunction:
    _check_lambda(lam)
    x, y, z = float(g.x), float(g.y), float(g.z)
    out = translate(f, x)
    out = modulate(out, -lam * y)
    if z != 0:
        out = scale(out, cmath.exp(2j * math.pi * lam * z))
    return out


def apply_pi_bar(lam: float, g: GroupElement, f: PiecewiseExpFunction) -> PiecewiseExpFunction:
    _check_lambda(lam)
    return conjugate_fn(apply_pi(lam, g, conjugate_fn(f)))


def apply_dilation_C(a: float, m: int, f: PiecewiseExpFunction) -> PiecewiseExpFunction:
    """``C(A)^m f`` with ``C(A) phi(t) = |a|^{-1/2} phi(t / a)``."""
    if a == 0:
        raise ValueError("dilation parameter a must be nonzero")
    if m == 0:
        return f
    return dilate(f, float(a) ** m)


@dataclass(frozen=True)
class RankOneOperator:
    """``u (x) v``, the map ``w -> <w, v> u``."""

    u: PiecewiseExpFunction
    v: PiecewiseExpFunction

    def apply(self, w: PiecewiseExpFunction) -> PiecewiseExpFunction:
        return scale(self.u, inner_product(w, self.v))

    def scaled(self, c: complex) -> "RankOneOperator":
        return RankOneOperator(scale(self.u, c), self.v)


def _pair_elements(pair):
    if isinstance(pair, LambdaPair):
        return pair.elements
    kappa, eta = pair
    return kappa, eta


def tensor_apply(lam: float, pair, T: RankOneOperator) -> RankOneOperator:
    """``[pi(kappa) (x) pi_bar(eta)] (u (x) v) = pi(kappa) u (x) pi_bar(eta) v``.

    ``pair`` is a :class:`LambdaPair` or a ``(kappa, eta)`` tuple of group elements.
    """
    _check_lambda(lam)
    kappa, eta = _pair_elements(pair)
    return RankOneOperator(apply_pi(lam, kappa, T.u), apply_pi_bar(lam, eta, T.v))


def hs_inner(T1: RankOneOperator, T2: RankOneOperator) -> complex:
    """``<u (x) v, w (x) y>_HS = <u, w> <y, v>``."""
    return inner_product(T1.u, T2.u) * inner_product(T2.v, T1.v)


def hs_norm(T: RankOneOperator) -> float:
    return norm(T.u) * norm(T.v)
