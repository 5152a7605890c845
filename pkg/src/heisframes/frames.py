"""Truncated analysis and synthesis for ``{D_{A^m} tau(gamma, eta) f}``.

Every group-side inner product is evaluated on the Plancherel side:

    <h, D_{A^m} tau(gamma, eta) f>
        = int <Ph(lam), [pi(gamma') (x) pi_bar(eta')] P(D_{A^m} f)(lam)>_HS |lam| d lam

with ``gamma' = A^m gamma A^-m`` and ``eta' = A^m eta A^-m``, because
``D_{A^m} tau(gamma, eta) = tau(gamma', eta') D_{A^m}``.

For rank-one fields the HS pairing factorizes into a Gabor-type factor
(``k2, k3``) times a contragredient factor (``m2, m3``), and the central
index ``k1`` only contributes the phase ``e^{-2 pi i lam (ab)^m k1}``. The
full five-index sum is therefore a stack of small matrix products.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .gabor import GaborLattice, tiling_parseval_check, translation_range, CriterionInapplicable
from .group import DilationAutomorphism, GroupElement, LambdaPair, conjugate
from .linefn import (
    PiecewiseExpFunction,
    conjugate_fn,
    modulated_inner,
    norm,
    translate,
)
from .plancherel import RankOneField, dilate_field, field_norm_sq, grid_resolves
from .schrodinger import RankOneOperator, apply_pi_bar, hs_inner, tensor_apply
from .spectral import intersect, measure

__all__ = [
    "FrameConfig",
    "BandCoefficients",
    "DEFAULT_DILATION",
    "analysis_coefficient",
    "band_coefficients",
    "parseval_sum",
    "partial_sum",
    "convergence_table",
    "per_lambda_tensor_parseval",
    "tensor_parseval_components",
    "lemma_lem_check",
    "lemma_lem_sum",
    "Reconstruction",
    "reconstruct",
    "atom_field",
]

DEFAULT_DILATION = DilationAutomorphism(math.sqrt(2.0), math.sqrt(2.0))
GRID_RTOL = 1e-12


@dataclass(frozen=True)
class FrameConfig:
    """Truncation of the frame: ``|k1| <= k1`` and so on, and the dilation powers."""

    k1: int = 8
    k2: int = 8
    k3: int = 8
    m2: int = 8
    m3: int = 8
    m_values: tuple[int, ...] = (0,)
    tol: float = 0.05

    def __post_init__(self):
        if any(b < 0 for b in self.bounds):
            raise ValueError("truncation bounds must be nonnegative")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))

    @classmethod
    def from_range(cls, bounds: Sequence[int], m_lo: int, m_hi: int, tol: float = 0.05) -> "FrameConfig":
        return cls(*bounds, m_values=tuple(range(m_lo, m_hi + 1)), tol=tol)

    @property
    def bounds(self) -> tuple[int, int, int, int, int]:
        return (self.k1, self.k2, self.k3, self.m2, self.m3)

    def with_bounds(self, bounds: Sequence[int]) -> "FrameConfig":
        return replace(self, k1=bounds[0], k2=bounds[1], k3=bounds[2], m2=bounds[3], m3=bounds[4])


def _grid_relation(h: RankOneField, fm: RankOneField) -> str:
    """``"same"`` for matching node sets, ``"disjoint"`` for orthogonal bands."""
    overlap = measure(intersect(h.spectral_set, fm.spectral_set))
    if overlap <= 1e-12 * max(measure(h.spectral_set), 1.0):
        return "disjoint"
    if len(h) == len(fm) and np.allclose(h.nodes, fm.nodes, rtol=GRID_RTOL, atol=0):
        return "same"
    raise ValueError(
        "incommensurate grids: the fields overlap spectrally but their quadrature nodes differ "
        f"({len(h)} vs {len(fm)} nodes); build both on the same rule, dilated by 2^-m")


def analysis_coefficient(h: RankOneField, f: RankOneField, p: LambdaPair, m: int,
                         d: DilationAutomorphism = DEFAULT_DILATION) -> complex:
    """``<h, D_{A^m} tau(p) f>`` by direct per-node HS pairings."""
    dm = d.power(m)
    fm = dilate_field(f, dm)
    if _grid_relation(h, fm) == "disjoint":
        return 0j
    kappa, eta = p.elements
    pair = (conjugate(dm, kappa), conjugate(dm, eta))
    terms = []
    for lam, w, a, b, u, v in zip(h.nodes, h.weights, h.u, h.v, fm.u, fm.v):
        atom = tensor_apply(lam, pair, RankOneOperator(u, v))
        terms.append(w * abs(lam) * hs_inner(RankOneOperator(a, b), atom))
    return complex(np.sum(terms))


@dataclass
class BandCoefficients:
    """All truncated coefficients of one dilation band.

    ``coeffs[i, p, q]`` is the coefficient for ``k1 = k1_values[i]``,
    ``(k2, k3) = kappa[p]`` and ``(m2, m3) = eta[q]``. Index pairs whose
    factor vanishes at every node (translates with no support overlap) are
    dropped, so their coefficients are exactly zero by construction.
    """

    m: int
    k1_values: np.ndarray
    kappa: np.ndarray
    eta: np.ndarray
    coeffs: np.ndarray
    gabor_factor: np.ndarray  # (nodes, kappa): <a_j, pi(kappa') U_j>
    lem_factor: np.ndarray  # (nodes, eta): <pi_bar(eta') V_j, b_j>
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def energy(self) -> np.ndarray:
        return np.abs(self.coeffs) ** 2

    def density(self) -> np.ndarray:
        """``F_{kappa,eta}(lam_j) = |lam_j| <Ph, [pi (x) pi_bar] Pf>`` on the nodes."""
        return np.abs(self.nodes)[:, None, None] * self.gabor_factor[:, :, None] * self.lem_factor[:, None, :]

    def mask_sum(self, bounds: Sequence[int]) -> float:
        b1, b2, b3, b4, b5 = bounds
        i = np.abs(self.k1_values) <= b1
        p = (np.abs(self.kappa[:, 0]) <= b2) & (np.abs(self.kappa[:, 1]) <= b3)
        q = (np.abs(self.eta[:, 0]) <= b4) & (np.abs(self.eta[:, 1]) <= b5)
        if not (i.any() and p.any() and q.any()):
            return 0.0
        return float(np.sum(self.energy[np.ix_(i, p, q)]))


def _support_k_range(a: PiecewiseExpFunction, u: PiecewiseExpFunction, step: float, bound: int) -> list[int]:
    """Indices ``|k| <= bound`` for which ``translate(u, step*k)`` can overlap ``a``."""
    r = translation_range(u, a, abs(step))
    if not r:
        return []
    ks = range(max(r.start, -bound), min(r.stop - 1, bound) + 1)
    return list(ks) if step > 0 else sorted(-k for k in ks)


def _node_factors(lam, a, b, u, v, fx, fy, bounds):
    """Gabor and contragredient factors at one node, keyed by translation index."""
    _, K2, K3, M2, M3 = bounds
    k2s = np.arange(-K2, K2 + 1)
    m2s = np.arange(-M2, M2 + 1)
    g_rows = {}
    for k3 in _support_k_range(a, u, abs(fx), K3):
        g_rows[k3] = modulated_inner(a, translate(u, fx * k3), -lam * fy * k2s)
    cb, cv = conjugate_fn(b), conjugate_fn(v)
    h_rows = {}
    for m3 in _support_k_range(cb, cv, abs(fx), M3):
        h_rows[m3] = modulated_inner(cb, translate(cv, fx * m3), -lam * fy * m2s)
    return g_rows, h_rows


def band_coefficients(h: RankOneField, f: RankOneField, m: int, bounds: Sequence[int],
                      d: DilationAutomorphism = DEFAULT_DILATION,
                      workers: int = 1) -> BandCoefficients | None:
    """Coefficient tensor for one dilation power, or ``None`` for an orthogonal band."""
    dm = d.power(m)
    fm = dilate_field(f, dm)
    if _grid_relation(h, fm) == "disjoint":
        return None
    K1, K2, K3, M2, M3 = bounds
    fx, fy, fz = (float(s) for s in dm.scale_factors())
    reach = max((max(abs(t) for t in (fn.support() or (0.0, 0.0))) for fn in h.u + h.v + fm.u + fm.v),
                default=1.0)
    max_freq = abs(fz) * K1 + abs(fy) * (K2 + M2) * max(reach, 1.0)
    if not grid_resolves(h.grid, max_freq):
        warnings.warn(f"quadrature grid {h.grid.rule} may not resolve lambda-frequency {max_freq:g}; "
                      "refine the grid (more panels) for these bounds", stacklevel=2)
    args = list(zip(h.nodes, h.u, h.v, fm.u, fm.v))

    def work(item):
        lam, a, b, u, v = item
        return _node_factors(lam, a, b, u, v, fx, fy, bounds)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            factors = list(pool.map(work, args))
    else:
        factors = [work(item) for item in args]

    k3_keys = sorted(set().union(*(g.keys() for g, _ in factors))) if factors else []
    m3_keys = sorted(set().union(*(hh.keys() for _, hh in factors))) if factors else []
    n2, nm2 = 2 * K2 + 1, 2 * M2 + 1
    N = len(h)
    G = np.zeros((N, len(k3_keys) * n2), dtype=complex)
    H = np.zeros((N, len(m3_keys) * nm2), dtype=complex)
    for j, (g_rows, h_rows) in enumerate(factors):
        for c, k3 in enumerate(k3_keys):
            if k3 in g_rows:
                G[j, c * n2:(c + 1) * n2] = g_rows[k3]
        for c, m3 in enumerate(m3_keys):
            if m3 in h_rows:
                H[j, c * nm2:(c + 1) * nm2] = h_rows[m3]
    kappa = np.array([(k2, k3) for k3 in k3_keys for k2 in range(-K2, K2 + 1)], dtype=int).reshape(-1, 2)
    eta = np.array([(m2, m3) for m3 in m3_keys for m2 in range(-M2, M2 + 1)], dtype=int).reshape(-1, 2)

    k1s = np.arange(-K1, K1 + 1)
    base = h.weights * np.abs(h.nodes)
    coeffs = np.empty((k1s.size, G.shape[1], H.shape[1]), dtype=complex)
    for i, k1 in enumerate(k1s):
        wk = base * np.exp(-2j * np.pi * h.nodes * fz * k1)
        coeffs[i] = (G.T * wk) @ H
    return BandCoefficients(m, k1s, kappa, eta, coeffs, G, H, h.nodes.copy(), h.weights.copy())


def parseval_sum(h: RankOneField, f: RankOneField, cfg: FrameConfig,
                 d: DilationAutomorphism = DEFAULT_DILATION, workers: int = 1) -> tuple[float, float]:
    """Truncated ``sum_m sum_Lambda |<h, D_{A^m} tau f>|^2`` and its relative defect."""
    bands = [band_coefficients(h, f, m, cfg.bounds, d, workers) for m in cfg.m_values]
    total = partial_sum(bands, cfg.bounds)
    target = field_norm_sq(h)
    if target == 0:
        raise ValueError("h has zero norm")
    return total, abs(total - target) / target


def partial_sum(bands: Sequence[BandCoefficients | None], bounds: Sequence[int]) -> float:
    return math.fsum(b.mask_sum(bounds) for b in bands if b is not None)


def convergence_table(h: RankOneField, f: RankOneField, cfg: FrameConfig, levels: int = 3,
                      d: DilationAutomorphism = DEFAULT_DILATION, workers: int = 1) -> list[dict]:
    """Partial sums at ``cfg.bounds * 2^i`` for ``i < levels``, plus single-index doublings.

    Coefficients are computed once at the largest bounds; smaller truncations
    are read off as sub-boxes.
    """
    base = np.array(cfg.bounds)
    top = tuple(int(b) for b in base * 2 ** (levels - 1))
    bands = [band_coefficients(h, f, m, top, d, workers) for m in cfg.m_values]
    target = field_norm_sq(h)
    rows = []
    names = ("k1", "k2", "k3", "m2", "m3")
    for i in range(levels):
        bounds = tuple(int(b) for b in base * 2 ** i)
        s = partial_sum(bands, bounds)
        rows.append({"bounds": list(bounds), "doubled": "all" if i else "none",
                     "sum": s, "defect": abs(s - target) / target})
        if i + 1 < levels:
            for axis, name in enumerate(names):
                single = list(bounds)
                single[axis] *= 2
                s1 = partial_sum(bands, single)
                rows.append({"bounds": single, "doubled": name, "sum": s1,
                             "defect": abs(s1 - target) / target})
    return rows


# per-lambda checks -----------------------------------------------------------

def _unpack_bounds(bounds):
    if isinstance(bounds, int):
        return bounds, bounds, bounds, bounds
    k2, k3, m2, m3 = bounds
    return k2, k3, m2, m3


def _node_index(f: RankOneField, node) -> int:
    if isinstance(node, (int, np.integer)):
        return int(node)
    hits = np.flatnonzero(np.isclose(f.nodes, node, rtol=1e-12, atol=0))
    if hits.size == 0:
        raise ValueError(f"lambda = {node!r} is not a node of the field")
    return int(hits[0])


def _gabor_factor_sum(lam: float, window: PiecewiseExpFunction, target: PiecewiseExpFunction,
                      K_mod: int, K_tr: int) -> float:
    """``sum |<target, pi_lam(n, k, 0) window>|^2`` over ``|k| <= K_mod`` and overlapping ``|n| <= K_tr``."""
    ks = np.arange(-K_mod, K_mod + 1)
    total = np.zeros(ks.size)
    for n in _support_k_range(target, window, 1.0, K_tr):
        total += np.abs(modulated_inner(target, translate(window, n), -lam * ks)) ** 2
    return float(np.sum(total))


def tensor_parseval_components(f: RankOneField, node, T: RankOneOperator, bounds=2000):
    """``(gabor_sum, lem_sum, ||a||^2, ||b||^2)`` for ``T = a (x) b`` at one node.

    The double sum over ``Lambda_1`` equals ``gabor_sum * lem_sum``.
    """
    j = _node_index(f, node)
    lam = float(f.nodes[j])
    K2, K3, M2, M3 = _unpack_bounds(bounds)
    s = abs(lam) ** 0.25
    u = f.u[j]
    v = f.v[j]
    u_s = PiecewiseExpFunction(u.t0, u.t1, u.c * s, u.omega)
    v_s = PiecewiseExpFunction(v.t0, v.t1, v.c * s, v.omega)
    gabor = _gabor_factor_sum(lam, u_s, T.u, K2, K3)
    lem = lemma_lem_sum(lam, v_s, T.v, M2, M3)
    return gabor, lem, norm(T.u) ** 2, norm(T.v) ** 2


def per_lambda_tensor_parseval(f: RankOneField, node, T: RankOneOperator, bounds=2000) -> float:
    """Relative defect of the Lambda_1 tensor system at one node against ``T``."""
    gabor, lem, na, nb = tensor_parseval_components(f, node, T, bounds)
    t_sq = na * nb
    if t_sq == 0:
        raise ValueError("T must be nonzero")
    return abs(gabor * lem - t_sq) / t_sq


def lemma_lem_sum(lam: float, v: PiecewiseExpFunction, u: PiecewiseExpFunction,
                  K: int, K_tr: int | None = None) -> float:
    """``sum_eta |<pi_bar_lam(eta) v, u>|^2`` for ``eta = (m3, m2, 0)``, ``|m2| <= K``.

    Translations ``m3`` are limited to those whose support overlaps ``u``.
    ``pi_bar(m3, m2, 0) = modulate(pi_bar(m3, 0, 0) ., lam m2)`` lets the
    modulation index be vectorized.
    """
    if K_tr is None:
        K_tr = 10 ** 9
    m2s = np.arange(-K, K + 1)
    total = np.zeros(m2s.size)
    for m3 in _support_k_range(u, v, 1.0, K_tr):
        shifted = apply_pi_bar(lam, GroupElement(m3, 0, 0), v)
        # <modulate(s, nu), u> = conj <u, modulate(s, nu)>
        total += np.abs(modulated_inner(u, shifted, lam * m2s)) ** 2
    return float(np.sum(total))


def lemma_lem_check(lam: float, v: PiecewiseExpFunction, u: PiecewiseExpFunction, K: int = 2000) -> float:
    """Relative defect ``|sum_eta |<pi_bar(eta) v, u>|^2 - ||u||^2| / ||u||^2``.

    Requires ``G(conj v, Z x lam Z)`` to pass the exact tiling criterion.
    """
    lat = GaborLattice(1.0, lam)
    try:
        ok = tiling_parseval_check(conjugate_fn(v), lat)
    except CriterionInapplicable as exc:
        raise ValueError(f"cannot certify G(conj v, Z x {lam}Z) as Parseval: {exc}") from exc
    if not ok:
        raise ValueError(f"G(conj v, Z x {lam}Z) is not a Parseval frame")
    u_sq = norm(u) ** 2
    if u_sq == 0:
        raise ValueError("u must be nonzero")
    return abs(lemma_lem_sum(lam, v, u, K) - u_sq) / u_sq


# synthesis -------------------------------------------------------------------

def atom_field(f: RankOneField, p: LambdaPair, m: int,
               d: DilationAutomorphism = DEFAULT_DILATION) -> RankOneField:
    """Plancherel field of ``D_{A^m} tau(p) f``."""
    dm = d.power(m)
    fm = dilate_field(f, dm)
    kappa, eta = p.elements
    pair = (conjugate(dm, kappa), conjugate(dm, eta))
    us, vs = [], []
    for lam, u, v in zip(fm.nodes, fm.u, fm.v):
        t = tensor_apply(lam, pair, RankOneOperator(u, v))
        us.append(t.u)
        vs.append(t.v)
    return RankOneField(fm.grid, us, vs)


@dataclass
class Reconstruction:
    """Truncated synthesis ``sum c_i phi_i`` and its distance to ``h``.

    ``terms`` holds ``(coefficient, m, LambdaPair)`` for every retained atom;
    :func:`atom_field` materializes any of them.
    """

    terms: list[tuple[complex, int, LambdaPair]]
    h_norm_sq: float
    coefficient_energy: float
    synthesis_norm_sq: float
    cross: float
    residual: float

    @property
    def bessel_gap(self) -> float:
        """``||h||^2 - sum |c_i|^2``."""
        return self.h_norm_sq - self.coefficient_energy

    @property
    def identity_gap(self) -> float:
        """``residual^2 - (||h||^2 - 2 sum |c|^2 + ||s||^2)``; zero at any truncation."""
        return self.residual ** 2 - (self.h_norm_sq - 2.0 * self.coefficient_energy + self.synthesis_norm_sq)

    @property
    def discrepancy(self) -> float:
        """``residual^2 - (||h||^2 - sum |c|^2)``; zero only for orthonormal truncations."""
        return self.residual ** 2 - self.bessel_gap


def _translate_gram(x_shifts: Sequence[float], nus: np.ndarray, w: PiecewiseExpFunction) -> np.ndarray:
    """Gram matrix of ``modulate(translate(w, x), nu)`` over the product grid ``x_shifts x nus``."""
    nx, nn = len(x_shifts), nus.size
    gram = np.zeros((nx, nn, nx, nn), dtype=complex)
    dn = nus[None, :] - nus[:, None]  # dn[i, k] = nu_k - nu_i
    shifted = [translate(w, x) for x in x_shifts]
    for i, si in enumerate(shifted):
        for k, sk in enumerate(shifted):
            # <M_{nu_i} s_i, M_{nu_k} s_k> = <s_i, M_{nu_k - nu_i} s_k>
            gram[i, :, k, :] = modulated_inner(si, sk, dn)
    return gram.reshape(nx * nn, nx * nn)


def reconstruct(h: RankOneField, f: RankOneField, cfg: FrameConfig,
                d: DilationAutomorphism = DEFAULT_DILATION, workers: int = 1) -> Reconstruction:
    """Synthesize from the truncated coefficients and measure the residual spectrally.

    ``cross = Re <h, s>`` is computed node by node from the synthesis and
    should equal ``sum |c|^2``; the residual uses
    ``||h - s||^2 = ||h||^2 - 2 cross + ||s||^2``.
    """
    h_sq = field_norm_sq(h)
    terms: list[tuple[complex, int, LambdaPair]] = []
    energy = 0.0
    synth_sq = 0.0
    cross = 0.0
    for m in cfg.m_values:
        band = band_coefficients(h, f, m, cfg.bounds, d, workers)
        if band is None or band.coeffs.size == 0:
            continue
        for i, k1 in enumerate(band.k1_values):
            for p, (k2, k3) in enumerate(band.kappa):
                for q, (m2, m3) in enumerate(band.eta):
                    terms.append((complex(band.coeffs[i, p, q]), m,
                                  LambdaPair.from_indices(int(k1), int(k2), int(k3), int(m2), int(m3))))
        energy += float(np.sum(band.energy))
        dm = d.power(m)
        fx, fy, fz = (float(s) for s in dm.scale_factors())
        fm = dilate_field(f, dm)
        k3_keys = sorted(set(band.kappa[:, 1].tolist()))
        m3_keys = sorted(set(band.eta[:, 1].tolist()))
        k2s = np.arange(-cfg.k2, cfg.k2 + 1)
        m2s = np.arange(-cfg.m2, cfg.m2 + 1)
        band_sq = 0.0
        band_cross = 0.0
        for j, (lam, w, u, v) in enumerate(zip(fm.nodes, fm.weights, fm.u, fm.v)):
            # D[kappa, eta] gathers the k1 phases of pi(gamma') on the u slot
            phase = np.exp(2j * np.pi * lam * fz * band.k1_values)
            D = np.tensordot(phase, band.coeffs, axes=(0, 0))
            gu = _translate_gram([fx * k for k in k3_keys], -lam * fy * k2s, u)
            cv = conjugate_fn(v)
            # <V_d, V_b> with V = conj(M T conj v)  ->  conj of the Gram of M T conj v
            gv = np.conj(_translate_gram([fx * k for k in m3_keys], -lam * fy * m2s, cv))
            s_sq = np.einsum("ab,ac,cd,db->", D, gu, np.conj(D), gv).real
            hs = np.sum(np.conj(D) * band.gabor_factor[j][:, None] * band.lem_factor[j][None, :])
            band_sq += w * abs(lam) * s_sq
            band_cross += w * abs(lam) * hs.real
        synth_sq += band_sq
        cross += band_cross
    residual_sq = h_sq - 2.0 * cross + synth_sq
    return Reconstruction(terms, h_sq, energy, synth_sq, cross, math.sqrt(max(residual_sq, 0.0)))
