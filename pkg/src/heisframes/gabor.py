"""Gabor systems ``G(w, alpha Z x beta Z)`` and their Parseval checks.

Atoms are ``e^{2 pi i beta k t} w(t - alpha n)``. Two verification tiers are
provided: an exact tiling criterion for windows supported inside one
modulation period, and a truncated frame-operator defect for everything else.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linefn import PiecewiseExpFunction, indicator, modulate, modulated_inner, norm, translate

__all__ = [
    "GaborLattice",
    "CriterionInapplicable",
    "gabor_atom",
    "density_admissible",
    "tiling_parseval_check",
    "translation_range",
    "gabor_sum",
    "parseval_defect",
    "window_norm_law_check",
    "shannon_window",
]

DEFAULT_K = 2000
TILING_TOL = 1e-12
NORM_LAW_TOL = 1e-10


class CriterionInapplicable(ValueError):
    """The exact tiling criterion does not apply to this window."""


@dataclass(frozen=True)
class GaborLattice:
    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError("translation step alpha must be positive")
        if self.beta == 0:
            raise ValueError("modulation step beta must be nonzero")

    @property
    def volume(self) -> float:
        return abs(self.alpha * self.beta)

    @property
    def density(self) -> float:
        return 1.0 / self.volume


def shannon_window(lam: float) -> PiecewiseExpFunction:
    """``|lam|^{1/2} chi_[0,1)``, the Parseval window for ``Z x lam Z``."""
    return indicator(0.0, 1.0, math.sqrt(abs(lam)))


def gabor_atom(w: PiecewiseExpFunction, lat: GaborLattice, k: int, n: int) -> PiecewiseExpFunction:
    return modulate(translate(w, lat.alpha * n), lat.beta * k)


def density_admissible(lat: GaborLattice) -> bool:
    return lat.volume <= 1.0 + 1e-12


def tiling_parseval_check(w: PiecewiseExpFunction, lat: GaborLattice, tol: float = TILING_TOL) -> bool:
    """Exact test of ``(1/|beta|) sum_n |w(t - alpha n)|^2 == 1`` almost everywhere.

    Valid when ``w`` lives in an interval of length at most ``1/|beta|``;
    otherwise raises :class:`CriterionInapplicable`.

    On each elementary cell of ``[0, alpha)`` the periodized square modulus is
    a trigonometric sum ``sum_nu A_nu e^{2 pi i nu t}``. It is constant
    exactly when every ``A_nu`` with ``nu != 0`` vanishes, which is decided
    coefficient by coefficient.
    """
    supp = w.support()
    if supp is None:
        return False
    period = 1.0 / abs(lat.beta)
    if supp[1] - supp[0] > period * (1 + 1e-12):
        raise CriterionInapplicable(
            f"window support length {supp[1] - supp[0]:g} exceeds 1/|beta| = {period:g}")
    alpha = lat.alpha
    cuts = np.concatenate([np.mod(w.t0, alpha), np.mod(w.t1, alpha), [0.0, alpha]])
    cuts = np.unique(np.clip(cuts, 0.0, alpha))
    n_lo = math.floor((supp[0]) / alpha) - 1
    n_hi = math.ceil((supp[1]) / alpha) + 1
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        if hi - lo <= 1e-14:
            continue
        mid = 0.5 * (lo + hi)
        coeffs: dict[float, complex] = defaultdict(complex)
        for n in range(n_lo, n_hi + 1):
            # active segments of w at t - alpha*n for t in the cell
            s = mid - alpha * n
            live = (w.t0 <= s) & (s < w.t1)
            if not np.any(live):
                continue
            c = w.c[live] * np.exp(-2j * math.pi * w.omega[live] * alpha * n)
            om = w.omega[live]
            for ci, oi in zip(c, om):
                for cj, oj in zip(c, om):
                    coeffs[round(oi - oj, 12)] += ci * np.conj(cj)
        scale = 1.0 / abs(lat.beta)
        const = coeffs.pop(0.0, 0j) * scale
        if abs(const - 1.0) > tol:
            return False
        if any(abs(v) * scale > tol for v in coeffs.values()):
            return False
    return True


def translation_range(w: PiecewiseExpFunction, g: PiecewiseExpFunction, alpha: float) -> range:
    """Every ``n`` for which ``w(. - alpha n)`` can overlap ``g``; exact from supports."""
    sw, sg = w.support(), g.support()
    if sw is None or sg is None:
        return range(0)
    lo = math.floor((sg[0] - sw[1]) / alpha)
    hi = math.ceil((sg[1] - sw[0]) / alpha)
    return range(lo, hi + 1)


def gabor_sum(w: PiecewiseExpFunction, lat: GaborLattice, g: PiecewiseExpFunction, K: int,
              per_k: bool = False):
    """``sum_{|k| <= K} sum_n |<g, atom(k, n)>|^2``.

    With ``per_k`` the array of per-``k`` contributions (indexed ``k + K``) is
    returned instead, so partial sums at smaller truncations come for free.
    """
    ks = np.arange(-K, K + 1)
    nus = lat.beta * ks
    acc = np.zeros(ks.size)
    for n in translation_range(w, g, lat.alpha):
        vals = modulated_inner(g, translate(w, lat.alpha * n), nus)
        acc += np.abs(vals) ** 2
    return acc if per_k else float(np.sum(acc))


def parseval_defect(w: PiecewiseExpFunction, lat: GaborLattice,
                    tests: Sequence[PiecewiseExpFunction], K: int = DEFAULT_K) -> float:
    """Largest relative gap ``|sum |<g, atom>|^2 - ||g||^2| / ||g||^2`` over ``tests``.

    Modulations run over ``|k| <= K``; translations are never truncated.
    """
    if not tests:
        raise ValueError("need at least one test function")
    if K < 1:
        raise ValueError("truncation K must be at least 1")
    worst = 0.0
    for g in tests:
        g_norm_sq = norm(g) ** 2
        if g_norm_sq == 0:
            raise ValueError("test functions must be nonzero")
        worst = max(worst, abs(gabor_sum(w, lat, g, K) - g_norm_sq) / g_norm_sq)
    return worst


def window_norm_law_check(w: PiecewiseExpFunction, lat: GaborLattice, tol: float = NORM_LAW_TOL) -> bool:
    """``||w||^2 == vol(lattice)``, necessary for a Parseval window."""
    return abs(norm(w) ** 2 - lat.volume) <= tol
