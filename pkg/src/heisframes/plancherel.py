"""Rank-one Plancherel fields over a spectral set.

A field assigns to each quadrature node ``lam`` of a spectral set ``S`` the
rank-one operator ``u_lam (x) v_lam``. Group-side quantities are obtained
from the Plancherel measure ``|lam| d lam``:

* ``||f||^2 = int_S ||u||^2 ||v||^2 |lam| d lam``
* ``f(g) = int_S <u_lam, pi_lam(g) v_lam> |lam| d lam``

Nothing is ever integrated over the group itself.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .group import DilationAutomorphism, GroupElement
from .linefn import PiecewiseExpFunction, indicator, inner_product, norm, scale
from .schrodinger import apply_dilation_C, apply_pi
from .spectral import (
    IntervalUnion,
    SHANNON_BAND,
    dyadic_scale,
    is_translation_congruent_unit,
    parse_set,
)

__all__ = [
    "QuadratureGrid",
    "RankOneField",
    "gauss_grid",
    "midpoint_grid",
    "make_grid",
    "grid_resolves",
    "shannon_field",
    "field_norm_sq",
    "inverse_transform",
    "eval_example_closed_form",
    "example_integrand",
    "dilate_field",
    "character_basis_parseval",
    "field_to_dict",
    "field_from_dict",
    "save_field",
    "load_field",
    "write_eval_csv",
]

DEFAULT_NODES = 64
EXAMPLE_CONSTANT = (8.0 - math.sqrt(2.0)) / 10.0


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Nodes and positive weights covering a spectral set."""

    nodes: np.ndarray
    weights: np.ndarray
    spectral_set: IntervalUnion
    rule: dict

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float).reshape(-1)
        weights = np.array(self.weights, dtype=float).reshape(-1)
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if nodes.shape != weights.shape:
            raise ValueError("nodes and weights differ in length")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if np.any(nodes == 0):
            raise ValueError("quadrature nodes must avoid 0")

    def __len__(self):
        return self.nodes.size


def gauss_grid(s: IntervalUnion, nodes_per_interval: int = DEFAULT_NODES, panels: int = 1) -> QuadratureGrid:
    """Composite Gauss-Legendre: ``panels`` equal panels per interval of ``s``."""
    x, w = np.polynomial.legendre.leggauss(nodes_per_interval)
    all_nodes, all_weights = [], []
    for lo, hi in s.intervals:
        edges = np.linspace(lo, hi, panels + 1)
        for a, b in zip(edges[:-1], edges[1:]):
            half = 0.5 * (b - a)
            all_nodes.append(a + half * (x + 1.0))
            all_weights.append(half * w)
    if not all_nodes:
        return QuadratureGrid(np.empty(0), np.empty(0), s, _rule("gauss", nodes_per_interval, panels))
    return QuadratureGrid(np.concatenate(all_nodes), np.concatenate(all_weights), s,
                          _rule("gauss", nodes_per_interval, panels))


def midpoint_grid(s: IntervalUnion, nodes_per_interval: int = DEFAULT_NODES) -> QuadratureGrid:
    all_nodes, all_weights = [], []
    for lo, hi in s.intervals:
        h = (hi - lo) / nodes_per_interval
        all_nodes.append(lo + h * (np.arange(nodes_per_interval) + 0.5))
        all_weights.append(np.full(nodes_per_interval, h))
    if not all_nodes:
        return QuadratureGrid(np.empty(0), np.empty(0), s, _rule("midpoint", nodes_per_interval, 1))
    return QuadratureGrid(np.concatenate(all_nodes), np.concatenate(all_weights), s,
                          _rule("midpoint", nodes_per_interval, 1))


def _rule(name: str, n: int, panels: int) -> dict:
    return {"name": name, "nodes_per_interval": int(n), "panels": int(panels)}


def grid_resolves(grid: QuadratureGrid, max_freq: float) -> bool:
    """Heuristic: can ``grid`` integrate ``e^{2 pi i max_freq lam}`` times smooth data?

    Gauss-Legendre with ``n`` nodes per panel of length ``L`` is treated as
    adequate when ``n >= pi max_freq L / 2 + 8``; the midpoint rule when its
    spacing keeps 16 nodes per period.
    """
    s = grid.spectral_set
    if not s:
        return True
    rule = grid.rule or {}
    n = int(rule.get("nodes_per_interval", 0))
    panels = int(rule.get("panels", 1))
    longest = max(hi - lo for lo, hi in s.intervals)
    if rule.get("name") == "gauss":
        return n >= math.pi * max_freq * (longest / panels) / 2 + 8
    if rule.get("name") == "midpoint":
        return longest / max(n * panels, 1) * max_freq <= 1 / 16
    return True


def make_grid(s: IntervalUnion, rule: str = "gauss", nodes_per_interval: int = DEFAULT_NODES,
              panels: int = 1) -> QuadratureGrid:
    if rule == "gauss":
        return gauss_grid(s, nodes_per_interval, panels)
    if rule == "midpoint":
        return midpoint_grid(s, nodes_per_interval * panels)
    raise ValueError(f"unknown quadrature rule {rule!r}")


@dataclass(frozen=True, eq=False)
class RankOneField:
    grid: QuadratureGrid
    u: tuple[PiecewiseExpFunction, ...]
    v: tuple[PiecewiseExpFunction, ...]

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(self.u))
        object.__setattr__(self, "v", tuple(self.v))
        if not (len(self.u) == len(self.v) == len(self.grid)):
            raise ValueError("need one (u, v) pair per quadrature node")

    def __len__(self):
        return len(self.grid)

    @property
    def nodes(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    @property
    def spectral_set(self) -> IntervalUnion:
        return self.grid.spectral_set


def shannon_field(s: IntervalUnion = SHANNON_BAND, rule: str = "gauss",
                  nodes_per_interval: int = DEFAULT_NODES, panels: int = 1) -> RankOneField:
    """Field with ``u = v = |lam|^{1/4} chi_[0,1)`` at every node of ``s``."""
    if s and s.distance_from_zero() == 0.0:
        raise ValueError("spectral set must stay away from 0")
    if any(lo < -1 or hi > 1 for lo, hi in s.intervals):
        raise ValueError("spectral set must lie in [-1, 1]; the density condition fails beyond")
    grid = make_grid(s, rule, nodes_per_interval, panels)
    window = [indicator(0.0, 1.0, abs(lam) ** 0.25) for lam in grid.nodes]
    return RankOneField(grid, window, window)


def field_norm_sq(f: RankOneField) -> float:
    """``int ||u||^2 ||v||^2 |lam| d lam`` by the field's quadrature."""
    if len(f) == 0:
        return 0.0
    nu = np.array([norm(u) ** 2 for u in f.u])
    nv = np.array([norm(v) ** 2 for v in f.v])
    return float(np.sum(f.weights * np.abs(f.nodes) * nu * nv))


def inverse_transform(f: RankOneField, g: GroupElement) -> complex:
    """Group-side value ``int <u_lam, pi_lam(g) v_lam> |lam| d lam``."""
    total = 0j
    terms = [w * abs(lam) * inner_product(u, apply_pi(lam, g, v))
             for lam, w, u, v in zip(f.nodes, f.weights, f.u, f.v)]
    if terms:
        total = complex(np.sum(terms))
    return total


def example_integrand(lam, x: float, y: float, z: float):
    """Integrand of the closed-form example for ``y != 0`` and ``|x| < 1``."""
    lam = np.asarray(lam, dtype=float)
    if 0 <= x < 1:
        num = np.exp(2j * np.pi * lam * (y - z)) - np.exp(2j * np.pi * lam * (y * x - z))
    elif -1 < x < 0:
        num = np.exp(2j * np.pi * lam * (y * (x + 1) - z)) - np.exp(-2j * np.pi * lam * z)
    else:
        return np.zeros_like(lam, dtype=complex)
    return num * np.abs(lam) ** 1.5 / (2j * np.pi * lam * y)


def _power_moment(s: IntervalUnion, p: float) -> float:
    """``int_S |lam|^p d lam`` in closed form."""
    total = 0.0
    for lo, hi in s.intervals:
        if lo >= 0:
            total += (hi ** (p + 1) - lo ** (p + 1)) / (p + 1)
        elif hi <= 0:
            total += ((-lo) ** (p + 1) - (-hi) ** (p + 1)) / (p + 1)
        else:
            total += ((-lo) ** (p + 1) + hi ** (p + 1)) / (p + 1)
    return total


def eval_example_closed_form(x: float, y: float, z: float, s: IntervalUnion = SHANNON_BAND,
                             nodes_per_interval: int = DEFAULT_NODES, panels: int = 1) -> complex:
    """Five-branch closed form of the Shannon example.

    For ``y != 0`` the one-dimensional oscillatory integral is done by
    composite Gauss-Legendre on ``s``. For ``y == 0`` the linear branch
    ``(1 - |x|) int_S |lam|^{3/2}`` is returned independently of ``z``; on the
    Shannon band this is ``(8 - sqrt 2)(1 - |x|)/10``. The ``y == 0`` branch
    matches the group-side function only at ``z = 0``.
    """
    if abs(x) >= 1:
        return 0j
    if y == 0:
        return complex((1.0 - abs(x)) * _power_moment(s, 1.5))
    grid = gauss_grid(s, nodes_per_interval, panels)
    vals = example_integrand(grid.nodes, x, y, z)
    return complex(np.sum(grid.weights * vals))


def dilate_field(f: RankOneField, d: DilationAutomorphism) -> RankOneField:
    """Plancherel image of ``D_{A^m} h``.

    New node ``2^-m lam`` carries ``2^m C(A)^m u_lam (x) C(A)^m v_lam`` with
    weight ``2^-m w``; the ``|det A|^{m/2} = 2^m`` factor rides on ``u``.
    """
    m = d.m
    if m == 0:
        return f
    shrink = math.ldexp(1.0, -m)
    grid = QuadratureGrid(f.nodes * shrink, f.weights * shrink,
                          dyadic_scale(f.spectral_set, -m), dict(f.grid.rule))
    a = float(d.a)
    u = [scale(apply_dilation_C(a, m, ui), math.ldexp(1.0, m)) for ui in f.u]
    v = [apply_dilation_C(a, m, vi) for vi in f.v]
    return RankOneField(grid, u, v)


def character_basis_parseval(s: IntervalUnion, F, K: int, grid: QuadratureGrid | None = None,
                             order: int = 24) -> float:
    """``sum_{|k|<=K} |int_S e^{2 pi i lam k} F|^2 / int_S |F|^2 - 1``.

    ``F`` is either a vectorized callable of ``lam`` or an array of values on
    ``grid``. Without a grid, a composite Gauss-Legendre rule fine enough to
    resolve frequency ``K`` is built.
    """
    congruent = is_translation_congruent_unit(s)
    if not congruent:
        raise ValueError(f"set is not translation congruent to (0,1]: {congruent.reason}")
    if grid is None:
        if not callable(F):
            raise ValueError("sampled F needs the grid it was sampled on")
        longest = max(hi - lo for lo, hi in s.intervals)
        panels = max(1, math.ceil(2 * K * longest / order) + 1)
        grid = gauss_grid(s, order, panels)
    values = np.asarray(F(grid.nodes) if callable(F) else F, dtype=complex)
    if values.shape != grid.nodes.shape:
        raise ValueError("F values do not match the grid")
    wf = grid.weights * values
    energy = float(np.sum(grid.weights * np.abs(values) ** 2))
    if energy == 0:
        raise ValueError("F vanishes on the grid")
    total = 0.0
    # chunk over k to bound memory on fine grids
    ks = np.arange(-K, K + 1)
    for start in range(0, ks.size, 256):
        kk = ks[start:start + 256]
        phase = np.exp(2j * np.pi * np.outer(kk, grid.nodes))
        total += float(np.sum(np.abs(phase @ wf) ** 2))
    return total / energy - 1.0


# serialization -------------------------------------------------------------

def field_to_dict(f: RankOneField) -> dict:
    return {
        "set": f.spectral_set.to_text(),
        "rule": dict(f.grid.rule),
        "nodes": [
            {"lambda": float(lam), "weight": float(w), "u": u.to_records(), "v": v.to_records()}
            for lam, w, u, v in zip(f.nodes, f.weights, f.u, f.v)
        ],
    }


def field_from_dict(doc: dict) -> RankOneField:
    s = parse_set(doc["set"])
    nodes = doc["nodes"]
    grid = QuadratureGrid([n["lambda"] for n in nodes], [n["weight"] for n in nodes], s,
                          dict(doc.get("rule", {})))
    u = [PiecewiseExpFunction.from_records(n["u"]) for n in nodes]
    v = [PiecewiseExpFunction.from_records(n["v"]) for n in nodes]
    return RankOneField(grid, u, v)


def save_field(f: RankOneField, path) -> None:
    with open(path, "w") as fh:
        json.dump(field_to_dict(f), fh, indent=1)
        fh.write("\n")


def load_field(path) -> RankOneField:
    with open(path) as fh:
        return field_from_dict(json.load(fh))


EVAL_COLUMNS = ("x", "y", "z", "Re(f)", "Im(f)", "abs_err_vs_closed_form")


def write_eval_csv(fh, rows: Sequence[Sequence[float]]) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(EVAL_COLUMNS)
    for row in rows:
        writer.writerow([repr(float(v)) for v in row])
