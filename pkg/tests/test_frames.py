import math
import warnings

import numpy as np
import pytest

from heisframes.frames import (
    DEFAULT_DILATION as D,
    FrameConfig,
    analysis_coefficient,
    atom_field,
    band_coefficients,
    convergence_table,
    lemma_lem_check,
    lemma_lem_sum,
    parseval_sum,
    per_lambda_tensor_parseval,
    reconstruct,
    tensor_parseval_components,
)
from heisframes.gabor import GaborLattice, gabor_sum, shannon_window
from heisframes.group import GroupElement, LambdaPair, conjugate, inverse, multiply
from heisframes.linefn import conjugate_fn, indicator, norm, random_piecewise, scale, sup_distance
from heisframes.plancherel import (
    QuadratureGrid,
    RankOneField,
    character_basis_parseval,
    dilate_field,
    field_norm_sq,
    inverse_transform,
    shannon_field,
)
from heisframes.schrodinger import RankOneOperator, apply_pi, apply_pi_bar, hs_inner
from heisframes.spectral import SHANNON_BAND, parse_set

IDENTITY_PAIR = LambdaPair.from_indices(0, 0, 0, 0, 0)
CHI = indicator(0.0, 1.0)


def single_node_field(lam):
    """Shannon-type field with one node at ``lam``, for per-node checks."""
    s = parse_set("(0.5,1]") if lam > 0 else parse_set("[-1,-0.5)")
    grid = QuadratureGrid([lam], [0.5], s, {"name": "custom"})
    w = indicator(0.0, 1.0, abs(lam) ** 0.25)
    return RankOneField(grid, [w], [w])


def random_field_on(grid, rng, span=(-1.5, 2.5)):
    us = [random_piecewise(rng, n_segments=2, span=span, max_freq=1.0) for _ in grid.nodes]
    vs = [random_piecewise(rng, n_segments=2, span=span, max_freq=1.0) for _ in grid.nodes]
    return RankOneField(grid, us, vs)


def group_side_atom(f, p, m, g):
    """``2^-m f(kappa^-1 A^-m g A^m sigma(eta))`` with ``sigma(x, y, z) = (x, -y, -z)``."""
    kappa, eta = p.elements
    inner = conjugate(D.power(m).inverse(), g)
    sigma_eta = GroupElement(eta.x, -eta.y, -eta.z)
    return 2.0 ** (-m) * inverse_transform(f, multiply(multiply(inverse(kappa), inner), sigma_eta))


class TestConfig:
    def test_defaults_and_ranges(self):
        cfg = FrameConfig.from_range((1, 2, 3, 4, 5), -1, 2)
        assert cfg.bounds == (1, 2, 3, 4, 5)
        assert cfg.m_values == (-1, 0, 1, 2)
        assert cfg.with_bounds((0,) * 5).bounds == (0,) * 5

    @pytest.mark.parametrize("kwargs", [{"k1": -1}, {"tol": 0.0}, {"m3": -2}])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            FrameConfig(**kwargs)


class TestAnalysisCoefficient:
    def test_identity_atom_gives_norm(self, shannon):
        c = analysis_coefficient(shannon, shannon, IDENTITY_PAIR, 0)
        assert c == pytest.approx(7 / 12, abs=1e-12)

    @pytest.mark.parametrize("m", [-2, -1, 1, 2])
    def test_disjoint_band_is_exactly_zero(self, shannon, m):
        assert analysis_coefficient(shannon, shannon, LambdaPair.from_indices(1, 0, 0, 1, 0), m) == 0j

    def test_cauchy_schwarz(self, shannon, rng):
        h = random_field_on(shannon.grid, rng)
        bound = math.sqrt(field_norm_sq(h) * field_norm_sq(shannon))
        for _ in range(10):
            p = LambdaPair.from_indices(*rng.integers(-3, 4, 5))
            assert abs(analysis_coefficient(h, shannon, p, 0)) <= bound * (1 + 1e-12)

    def test_incommensurate_grids(self, shannon):
        other = shannon_field(nodes_per_interval=32)
        with pytest.raises(ValueError, match="incommensurate"):
            analysis_coefficient(shannon, other, IDENTITY_PAIR, 0)

    @pytest.mark.parametrize("m", [-1, 0, 1])
    def test_matches_group_side(self, shannon, m, rng):
        # <h, phi> with h on the same band: compare the atom's group-side values
        for _ in range(4):
            k3 = int(rng.integers(-2, 3))
            k1, k2, m2 = (int(v) for v in rng.integers(-2, 3, 3))
            p = LambdaPair.from_indices(k1, k2, k3, m2, k3)
            atom = atom_field(shannon, p, m)
            for _ in range(3):
                g = GroupElement(*rng.uniform(-0.6, 0.6, 3))
                assert inverse_transform(atom, g) == pytest.approx(group_side_atom(shannon, p, m, g), abs=1e-12)

    @pytest.mark.parametrize("m", [-1, 0, 1])
    def test_atom_field_is_covariant_transport(self, shannon, m):
        # D tau(p) f built by dilating the tau-moved field node by node
        p = LambdaPair.from_indices(1, -2, 1, 3, -1)
        kappa, eta = p.elements
        dm = D.power(m)
        moved = RankOneField(shannon.grid,
                             [apply_pi(lam, kappa, u) for lam, u in zip(shannon.nodes, shannon.u)],
                             [apply_pi_bar(lam, eta, v) for lam, v in zip(shannon.nodes, shannon.v)])
        expected = dilate_field(moved, dm)
        got = atom_field(shannon, p, m)
        for j in range(0, len(got), 7):
            assert sup_distance(got.u[j], expected.u[j]) < 1e-12
            assert sup_distance(got.v[j], expected.v[j]) < 1e-12

    @pytest.mark.parametrize("m", [-1, 0, 1])
    def test_band_tensor_matches_direct_route(self, shannon, rng, m):
        h = dilate_field(shannon, D.power(m))
        hr = RankOneField(h.grid, [scale(u, 1 + 0.5j) for u in h.u], h.v)
        band = band_coefficients(hr, shannon, m, (2, 2, 3, 2, 3))
        for _ in range(12):
            i = int(rng.integers(len(band.k1_values)))
            p = int(rng.integers(len(band.kappa)))
            q = int(rng.integers(len(band.eta)))
            (k2, k3), (m2, m3) = band.kappa[p], band.eta[q]
            pair = LambdaPair.from_indices(int(band.k1_values[i]), int(k2), int(k3), int(m2), int(m3))
            assert band.coeffs[i, p, q] == pytest.approx(analysis_coefficient(hr, shannon, pair, m), abs=1e-13)

    def test_pruned_translates_really_vanish(self, shannon):
        band = band_coefficients(shannon, shannon, 0, (0, 0, 4, 0, 4))
        kept = set(band.kappa[:, 1].tolist())
        for k3 in range(-4, 5):
            c = analysis_coefficient(shannon, shannon, LambdaPair.from_indices(0, 0, k3, 0, 0), 0)
            if k3 not in kept:
                assert c == 0


class TestParsevalSum:
    def test_default_truncation(self, shannon):
        total, defect = parseval_sum(shannon, shannon, FrameConfig(m_values=(-1, 0, 1)))
        assert total <= 7 / 12 * (1 + 1e-9)
        assert defect < 0.05

    def test_orthogonal_band_gives_zero(self, shannon):
        h = dilate_field(shannon, D)
        total, defect = parseval_sum(h, shannon, FrameConfig(m_values=(0,)))
        assert total == 0.0 and defect == 1.0

    def test_bessel_for_random_h(self, shannon, rng):
        for _ in range(3):
            h = random_field_on(shannon.grid, rng)
            total, _ = parseval_sum(h, shannon, FrameConfig(4, 4, 4, 4, 4, m_values=(0,)))
            assert total <= field_norm_sq(h) * (1 + 1e-9)

    def test_monotone_under_doubling(self, shannon):
        rows = convergence_table(shannon, shannon, FrameConfig(2, 2, 2, 2, 2, m_values=(-1, 0, 1)), levels=3)
        by_bounds = {tuple(r["bounds"]): r["sum"] for r in rows}
        for r in rows:
            if r["doubled"] not in ("none", "all"):
                base = tuple(b // 2 if n == r["doubled"] else b
                             for b, n in zip(r["bounds"], ("k1", "k2", "k3", "m2", "m3")))
                assert r["sum"] >= by_bounds[base] - 1e-15
        alls = [r["sum"] for r in rows if r["doubled"] in ("none", "all")]
        assert alls == sorted(alls)
        assert all(r["sum"] <= 7 / 12 * (1 + 1e-9) for r in rows)

    def test_parallel_is_deterministic(self, shannon):
        cfg = FrameConfig(4, 4, 4, 4, 4, m_values=(0,))
        assert parseval_sum(shannon, shannon, cfg, workers=1) == parseval_sum(shannon, shannon, cfg, workers=4)

    def test_warns_on_underresolved_grid(self, shannon):
        with pytest.warns(UserWarning, match="quadrature grid"):
            band_coefficients(shannon, shannon, 0, (64, 32, 1, 32, 1))
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            band_coefficients(shannon, shannon, 0, (8, 8, 1, 8, 1))

    def test_k1_sum_is_character_expansion(self):
        # for fixed (kappa, eta), the k1 sum is the character-basis sum of F_{kappa,eta}
        f = shannon_field(nodes_per_interval=24, panels=48)
        band = band_coefficients(f, f, 0, (200, 1, 1, 1, 1))
        density = band.density()
        for p, q in [(0, 0), (3, 4), (5, 2)]:
            F = density[:, p, q]
            energy = float(np.sum(f.weights * np.abs(F) ** 2))
            total = float(np.sum(band.energy[:, p, q]))
            if energy == 0:
                assert total == 0
                continue
            defect = character_basis_parseval(SHANNON_BAND, F, 200, grid=f.grid)
            assert total == pytest.approx((1 + defect) * energy, rel=1e-10)
            assert abs(defect) < 1e-2


class TestPerLambda:
    def test_example_defect(self):
        f = single_node_field(0.75)
        T = RankOneOperator(CHI, CHI)
        defects = [per_lambda_tensor_parseval(f, 0.75, T, K) for K in (250, 500, 1000, 2000)]
        assert all(b < a for a, b in zip(defects, defects[1:]))
        assert defects[-1] < 1e-2

    def test_factorization_matches_double_sum(self, rng):
        # brute double sum over a small Lambda_1 box against the factored product
        f = single_node_field(0.6)
        T = RankOneOperator(random_piecewise(rng, span=(-1, 1)), random_piecewise(rng, span=(-1, 1)))
        gabor, lem, _, _ = tensor_parseval_components(f, 0, T, (4, 3, 4, 3))
        u = indicator(0.0, 1.0, 0.6 ** 0.5)
        total = 0.0
        for k2 in range(-4, 5):
            for k3 in range(-3, 4):
                for m2 in range(-4, 5):
                    for m3 in range(-3, 4):
                        atom = RankOneOperator(apply_pi(0.6, GroupElement(k3, k2, 0), u),
                                               apply_pi_bar(0.6, GroupElement(m3, m2, 0), u))
                        total += abs(hs_inner(T, atom)) ** 2
        assert gabor * lem == pytest.approx(total, rel=1e-10)

    def test_homogeneous_and_rejects_zero(self):
        f = single_node_field(-0.6)
        T = RankOneOperator(random_piecewise(np.random.default_rng(2)), CHI)
        d1 = per_lambda_tensor_parseval(f, 0, T, 300)
        d2 = per_lambda_tensor_parseval(f, 0, T.scaled(-3.5 + 2j), 300)
        assert d1 == pytest.approx(d2, rel=1e-10)
        with pytest.raises(ValueError):
            per_lambda_tensor_parseval(f, 0, RankOneOperator(CHI, scale(CHI, 0)), 300)

    def test_unknown_node(self, shannon):
        with pytest.raises(ValueError):
            per_lambda_tensor_parseval(shannon, 0.123, RankOneOperator(CHI, CHI), 10)

    def test_factorization_consistency(self, rng):
        f = single_node_field(0.75)
        for _ in range(3):
            T = RankOneOperator(random_piecewise(rng), random_piecewise(rng))
            for K in (100, 400):
                gabor, lem, na, nb = tensor_parseval_components(f, 0, T, K)
                dg, dl = abs(gabor - na) / na, abs(lem - nb) / nb
                assert per_lambda_tensor_parseval(f, 0, T, K) <= dg + dl + dg * dl + 1e-12


class TestLemmaLEM:
    @pytest.mark.parametrize("lam", [0.6, 0.75, 1.0, -0.6])
    def test_defect_small_and_decreasing(self, lam, rng):
        v = shannon_window(lam)
        u = random_piecewise(rng)
        defects = [lemma_lem_check(lam, v, u, K) for K in (250, 500, 1000, 2000)]
        assert all(b < a for a, b in zip(defects, defects[1:]))
        assert defects[-1] < 1e-2

    def test_equals_gabor_sum_on_conjugated_data(self, rng):
        lam = 0.6
        v = scale(shannon_window(lam), 1j)
        u = random_piecewise(rng)
        lem = lemma_lem_sum(lam, v, u, 300)
        oracle = gabor_sum(conjugate_fn(v), GaborLattice(1.0, lam), conjugate_fn(u), 300)
        assert lem == pytest.approx(oracle, rel=1e-12)

    def test_phase_invariance(self, rng):
        v, u = shannon_window(0.75), random_piecewise(rng)
        a = lemma_lem_check(0.75, v, u, 500)
        b = lemma_lem_check(0.75, v, scale(u, np.exp(1.234j)), 500)
        assert a == pytest.approx(b, rel=1e-12)

    def test_precondition(self):
        with pytest.raises(ValueError, match="not a Parseval"):
            lemma_lem_check(0.75, CHI, CHI, 100)
        with pytest.raises(ValueError, match="cannot certify"):
            lemma_lem_check(1.25, shannon_window(1.25), CHI, 100)


class TestReconstruct:
    def test_exact_residual_identity(self, shannon):
        r = reconstruct(shannon, shannon, FrameConfig(2, 2, 2, 2, 2, m_values=(-1, 0, 1)))
        assert r.cross == pytest.approx(r.coefficient_energy, rel=1e-12)
        assert abs(r.identity_gap) < 1e-12
        assert r.coefficient_energy <= r.h_norm_sq * (1 + 1e-9)
        # translates with provably vanishing coefficients are pruned
        assert 0 < len(r.terms) <= 3 * 5 ** 5

    def test_truncated_parseval_family_is_not_orthonormal(self, shannon):
        # residual^2 + sum|c|^2 = ||h||^2 would need ||s||^2 = sum|c|^2
        r = reconstruct(shannon, shannon, FrameConfig(2, 2, 2, 2, 2, m_values=(0,)))
        assert r.synthesis_norm_sq < r.coefficient_energy
        assert r.discrepancy < -1e-3

    def test_synthesis_norm_by_gram_matrix(self):
        f = shannon_field(nodes_per_interval=12)
        cfg = FrameConfig(1, 1, 0, 1, 0, m_values=(0,))
        r = reconstruct(f, f, cfg)
        atoms = [atom_field(f, p, m) for _, m, p in r.terms]
        coeffs = np.array([c for c, _, _ in r.terms])
        n = len(atoms)
        gram = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(i, n):
                val = sum(w * abs(lam) * hs_inner(RankOneOperator(ai, bi), RankOneOperator(aj, bj))
                          for lam, w, ai, bi, aj, bj in zip(f.nodes, f.weights, atoms[i].u, atoms[i].v,
                                                            atoms[j].u, atoms[j].v))
                gram[i, j], gram[j, i] = val, np.conj(val)
        # ||sum c_i phi_i||^2 = sum c_i conj(c_j) <phi_i, phi_j>
        assert r.synthesis_norm_sq == pytest.approx(float((coeffs @ gram.T @ np.conj(coeffs)).real), rel=1e-10)

    def test_empty_configuration(self, shannon):
        r = reconstruct(shannon, shannon, FrameConfig(m_values=()))
        assert r.terms == []
        assert r.residual == pytest.approx(math.sqrt(7 / 12))

    def test_single_atom(self, shannon):
        p = LambdaPair.from_indices(1, 0, 0, 1, 0)
        h = atom_field(shannon, p, 0)
        c = analysis_coefficient(h, shannon, p, 0)
        assert c == pytest.approx(field_norm_sq(h), abs=1e-12)
        r = reconstruct(h, shannon, FrameConfig(1, 1, 1, 1, 1, m_values=(0,)))
        assert r.coefficient_energy >= abs(c) ** 2 - 1e-15
        assert r.coefficient_energy <= field_norm_sq(h) * (1 + 1e-9)
        assert abs(r.identity_gap) < 1e-12
