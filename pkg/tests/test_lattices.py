"""Lattice quantizer tests against brute-force enumeration oracles."""

import itertools

import numpy as np
import pytest
from scipy import stats

from latticecf.lattices import (
    COMMON,
    REFINEMENT,
    FAMILY_D4,
    FAMILY_E8,
    FAMILY_Z,
    LatticeSpec,
    NestedChain,
    cell_volume,
    chain_rates,
    coset_index,
    coset_leader_of,
    dither_batch,
    generator_matrix,
    make_lattice,
    mod_lattice,
    nearest_point,
    sample_dither,
    scaled,
    second_moment,
    second_moment_estimate,
)


def lex_min(rows: np.ndarray) -> np.ndarray:
    order = np.lexsort(rows.T[::-1])
    return rows[order[0]]


def z_candidates(x: np.ndarray) -> np.ndarray:
    base = np.floor(x).astype(int)
    offs = np.array(list(itertools.product(range(-2, 3), repeat=x.size)))
    return (base + offs).astype(float)


def d4_candidates(x: np.ndarray) -> np.ndarray:
    pts = z_candidates(x)
    return pts[pts.sum(axis=1) % 2 == 0]


def e8_candidates(x: np.ndarray) -> np.ndarray:
    offs = np.array(list(itertools.product(range(-1, 3), repeat=8)))
    ints = np.floor(x).astype(int) + offs
    ints = ints[ints.sum(axis=1) % 2 == 0].astype(float)
    halves = np.floor(x - 0.5).astype(int) + offs
    halves = halves[halves.sum(axis=1) % 2 == 0].astype(float) + 0.5
    return np.vstack([ints, halves])


def brute_force(cands: np.ndarray, x: np.ndarray):
    d = ((cands - x) ** 2).sum(axis=1)
    best = d.min()
    return best, cands[d == best]


def check_against_oracle(lattice, cands_of, points):
    for x in points:
        got = nearest_point(lattice, x)
        best, tied = brute_force(cands_of(x), x)
        d_got = float(((got - x) ** 2).sum())
        assert d_got <= best + 1e-12, (x, got, best, d_got)
        if len(tied) == 1:
            assert np.array_equal(got, tied[0]), (x, got, tied[0])
        else:
            assert np.array_equal(got, lex_min(tied)), (x, got, tied)


def dyadic_points(rng, n, count):
    """Points on a quarter-integer grid, dense in exact-tie territory."""
    grid = np.array([0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, -0.25, -0.5,
                     -0.75, -1.0, -1.5])
    return grid[rng.integers(0, len(grid), size=(count, n))]


def test_nearest_z_matches_exhaustive_search():
    rng = np.random.default_rng(101)
    lat = make_lattice(FAMILY_Z, 4)
    pts = list(rng.uniform(-4, 4, size=(100, 4))) + list(dyadic_points(rng, 4, 200))
    check_against_oracle(lat, z_candidates, pts)


def test_nearest_d4_matches_exhaustive_search():
    rng = np.random.default_rng(102)
    lat = make_lattice(FAMILY_D4)
    pts = list(rng.uniform(-4, 4, size=(100, 4))) + list(dyadic_points(rng, 4, 200))
    check_against_oracle(lat, d4_candidates, pts)


def test_nearest_e8_matches_exhaustive_search():
    rng = np.random.default_rng(103)
    lat = make_lattice(FAMILY_E8)
    pts = list(rng.uniform(-2, 2, size=(100, 8))) + list(dyadic_points(rng, 8, 100))
    check_against_oracle(lat, e8_candidates, pts)


def test_nearest_hand_cases():
    z = make_lattice(FAMILY_Z, 1)
    # exact halves round toward the smaller integer (the lex-min point)
    assert nearest_point(z, [0.5]) == 0.0
    assert nearest_point(z, [1.5]) == 1.0
    assert nearest_point(z, [-0.5]) == -1.0
    assert nearest_point(z, [2.51]) == 3.0

    d4 = make_lattice(FAMILY_D4)
    assert np.array_equal(nearest_point(d4, [0.6, 0.6, 0.0, 0.0]),
                          [1.0, 1.0, 0.0, 0.0])
    assert np.array_equal(nearest_point(d4, [1.0, 0.0, 0.0, 0.0]),
                          [0.0, 0.0, 0.0, 0.0])

    e8 = make_lattice(FAMILY_E8)
    assert np.array_equal(nearest_point(e8, [0.25] * 8), [0.0] * 8)
    assert np.array_equal(nearest_point(e8, [1.0] + [0.0] * 7), [0.0] * 8)


def test_nearest_scale_consistency():
    rng = np.random.default_rng(104)
    x = rng.normal(size=(50, 8))
    base = make_lattice(FAMILY_E8)
    big = scaled(base, 2.5)
    assert np.allclose(nearest_point(big, 2.5 * x),
                       2.5 * nearest_point(base, x), atol=1e-12)


def test_translation_invariance_is_exact():
    # shifting by a lattice point moves the quantizer output by exactly
    # that point, which is what makes the mod arithmetic distributive
    rng = np.random.default_rng(105)
    for lat in (make_lattice(FAMILY_Z, 4), make_lattice(FAMILY_D4),
                make_lattice(FAMILY_E8)):
        n = lat.dimension
        gen = generator_matrix(lat)
        x = rng.uniform(-2, 2, size=(200, n))
        shift = rng.integers(-3, 4, size=(200, n)) @ gen
        assert np.array_equal(nearest_point(lat, x + shift),
                              nearest_point(lat, x) + shift)


def test_mod_distributive_law():
    rng = np.random.default_rng(106)
    for lat in (make_lattice(FAMILY_Z, 4), make_lattice(FAMILY_D4),
                scaled(make_lattice(FAMILY_E8), 3.0)):
        n = lat.dimension
        gen = generator_matrix(lat)
        x = rng.uniform(-9, 9, size=(500, n))
        shift = rng.integers(-3, 4, size=(500, n)) @ gen
        assert np.allclose(mod_lattice(lat, x + shift), mod_lattice(lat, x),
                           atol=1e-12)
        # the reduced point lies in the cell of the zero point
        assert np.all(nearest_point(lat, mod_lattice(lat, x)) == 0.0)


def test_nesting_idempotence_exact_on_odd_integer_chains():
    # quantizing first at the fine lattice never changes the coarse cell
    # for integer lattices with an odd nesting ratio
    rng = np.random.default_rng(107)
    for k in (3, 5):
        chain = NestedChain(make_lattice(FAMILY_Z, 4), k)
        x = rng.uniform(-3 * k, 3 * k, size=(2000, 4))
        fine_first = nearest_point(chain.coarse, nearest_point(chain.mid, x))
        direct = nearest_point(chain.coarse, x)
        assert np.array_equal(fine_first, direct)


def test_nesting_composition_near_optimal_elsewhere():
    """For D4/E8 (and even ratios) composition can land in a neighboring
    coarse cell when the fine point straddles the boundary, but the cell
    it lands in is never worse than the fine quantization step allows."""
    rng = np.random.default_rng(108)
    for lat, k in ((make_lattice(FAMILY_D4), 2), (make_lattice(FAMILY_E8), 2),
                   (make_lattice(FAMILY_Z, 4), 4)):
        chain = NestedChain(lat, k)
        x = rng.uniform(-3 * k, 3 * k, size=(2000, lat.dimension))
        q_fine = nearest_point(chain.mid, x)
        composed = nearest_point(chain.coarse, q_fine)
        direct = nearest_point(chain.coarse, x)
        d_comp = np.sqrt(((x - composed) ** 2).sum(axis=1))
        d_dir = np.sqrt(((x - direct) ** 2).sum(axis=1))
        d_step = np.sqrt(((x - q_fine) ** 2).sum(axis=1))
        assert np.all(d_comp <= d_dir + 2.0 * d_step + 1e-9)
        disagree = np.any(composed != direct, axis=1)
        # the disagreement set is real; this documents it rather than
        # pretending the textbook identity holds in low dimension
        assert disagree.any()
        assert not disagree.all()


def test_dither_uniformity_crypto_lemma():
    # (x0 + T) mod L must be distributed like T itself for any fixed x0
    lat = make_lattice(FAMILY_E8)
    t_ref = dither_batch(lat, 1 << 14, np.random.default_rng(109))
    t_new = dither_batch(lat, 1 << 14, np.random.default_rng(110))
    x0 = np.array([0.37, -1.22, 0.05, 2.6, -0.4, 0.9, 1.11, -2.03])
    folded = mod_lattice(lat, x0 + t_new)
    for i in range(8):
        p = stats.ks_2samp(t_ref[:, i], folded[:, i]).pvalue
        assert p > 0.01, (i, p)
    # second moment of the dither matches the lattice
    per_dim = float((t_ref ** 2).sum() / t_ref.size)
    assert abs(per_dim - second_moment(lat)) < 0.01 * second_moment(lat) + 5e-4


def test_sample_dither_deterministic_and_in_cell():
    lat = scaled(make_lattice(FAMILY_D4), 1.7)
    t1 = sample_dither(lat, 42)
    t2 = sample_dither(lat, 42)
    assert np.array_equal(t1.values, t2.values)
    assert np.all(nearest_point(lat, t1.values) == 0.0)
    assert not np.array_equal(t1.values, sample_dither(lat, 43).values)


def test_second_moment_estimate_agrees_with_exact():
    for lat, exact in ((make_lattice(FAMILY_Z, 2), 1.0 / 12.0),
                       (make_lattice(FAMILY_D4), 13.0 / 120.0),
                       (make_lattice(FAMILY_E8), 929.0 / 12960.0)):
        est = second_moment_estimate(lat, 200_000, seed=1234)
        assert abs(est.estimate - exact) < 4.0 * est.std_error + 1e-6
        assert abs(est.estimate - exact) < 0.01 * exact
        assert est.std_error > 0.0
    scaled_est = second_moment_estimate(scaled(make_lattice(FAMILY_Z, 2), 2.0),
                                        50_000, seed=5)
    assert abs(scaled_est.estimate - 4.0 / 12.0) < 0.01


def test_second_moment_estimate_rejects_tiny_sample():
    with pytest.raises(ValueError):
        second_moment_estimate(make_lattice(FAMILY_Z, 2), 999, seed=0)


def test_lattice_spec_validation():
    with pytest.raises(ValueError):
        make_lattice("hexagonal")
    with pytest.raises(ValueError):
        make_lattice(FAMILY_D4, dimension=5)
    with pytest.raises(ValueError):
        make_lattice(FAMILY_Z, 4, scale=0.0)
    with pytest.raises(ValueError):
        LatticeSpec(family=FAMILY_E8, dimension=8, scale=1.0,
                    base_second_moment=-1.0, base_volume=1.0)
    assert make_lattice("zn", 3).family == FAMILY_Z
    assert make_lattice("d4").dimension == 4
    assert make_lattice(FAMILY_E8).dimension == 8


def test_constants_and_scaling():
    e8 = make_lattice(FAMILY_E8)
    assert second_moment(e8) == pytest.approx(929.0 / 12960.0)
    assert cell_volume(e8) == pytest.approx(1.0)
    d4 = make_lattice(FAMILY_D4)
    assert second_moment(d4) == pytest.approx(13.0 / 120.0)
    assert cell_volume(d4) == pytest.approx(2.0)
    big = scaled(d4, 3.0)
    assert second_moment(big) == pytest.approx(9.0 * 13.0 / 120.0)
    assert cell_volume(big) == pytest.approx(3.0 ** 4 * 2.0)
    # generator rows must themselves be lattice points
    for lat in (e8, d4, make_lattice(FAMILY_Z, 4)):
        gen = generator_matrix(lat)
        assert np.array_equal(nearest_point(lat, gen), gen)


def test_nested_chain_structure():
    chain = NestedChain(make_lattice(FAMILY_Z, 2), k_mid_to_coarse=3,
                        k_fine_to_mid=2, levels=3)
    assert chain.fine.scale == 1.0
    assert chain.mid.scale == 2.0
    assert chain.coarse.scale == 6.0
    r = chain_rates(chain)
    assert r.common == pytest.approx(np.log2(3.0))
    assert r.refinement == pytest.approx(1.0)
    assert r.total == pytest.approx(np.log2(6.0))
    with pytest.raises(ValueError):
        NestedChain(make_lattice(FAMILY_Z, 2), 0)
    with pytest.raises(ValueError):
        NestedChain(make_lattice(FAMILY_Z, 2), 2, k_fine_to_mid=2, levels=2)
    with pytest.raises(ValueError):
        NestedChain(make_lattice(FAMILY_Z, 2), 2, levels=4)


def test_coset_roundtrip_small_integer_chain():
    chain = NestedChain(make_lattice(FAMILY_Z, 2), 3)
    leaders = []
    for idx in range(9):
        leader = coset_leader_of(chain, idx)
        assert np.array_equal(nearest_point(chain.mid, leader), leader)
        assert np.allclose(mod_lattice(chain.coarse, leader), leader)
        assert coset_index(chain, leader) == idx
        leaders.append(tuple(leader))
    assert len(set(leaders)) == 9


def test_coset_roundtrip_e8_and_refinement_level():
    chain = NestedChain(make_lattice(FAMILY_E8), k_mid_to_coarse=2,
                        k_fine_to_mid=2, levels=3)
    rng = np.random.default_rng(111)
    for level, count in ((COMMON, 2 ** 8), (REFINEMENT, 2 ** 8)):
        for idx in rng.integers(0, count, size=40):
            leader = coset_leader_of(chain, int(idx), level)
            assert coset_index(chain, leader, level) == idx
        assert coset_index(chain, coset_leader_of(chain, 0, level), level) == 0
        assert coset_index(chain, coset_leader_of(chain, count - 1, level),
                           level) == count - 1


def test_coset_index_rejects_bad_leaders():
    chain = NestedChain(make_lattice(FAMILY_Z, 2), 3)
    with pytest.raises(ValueError):
        coset_index(chain, [0.5, 0.0])  # not a lattice point
    with pytest.raises(ValueError):
        coset_index(chain, [3.0, 0.0])  # a coarse point, reduces to zero
    with pytest.raises(ValueError):
        coset_leader_of(chain, 9)
    with pytest.raises(ValueError):
        coset_leader_of(chain, -1)
    with pytest.raises(ValueError):
        coset_index(chain, [1.0, 0.0], level=REFINEMENT)  # two-level chain
    with pytest.raises(ValueError):
        coset_index(chain, [1.0, 0.0], level="finest")
