import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import cdist

from q3p.constants import C6_DEFAULT, OMEGA_MAX_DEFAULT
from q3p.field import GaussianComponent, ScalarField, synthesize_mixture
from q3p.register import (
    BlockadeGraph,
    Register,
    RegisterError,
    blockade_graph,
    build_register,
    fit_cost,
    fit_to_traps,
    maximum_independent_sets,
    mis_bruteforce,
    triangular_lattice,
    triangular_layout,
)

FAST = settings(max_examples=30, deadline=None)


def test_default_blockade_radius():
    r = Register(np.array([[0.0, 0.0], [5.0, 0.0]]))
    assert r.blockade_radius == pytest.approx((C6_DEFAULT / OMEGA_MAX_DEFAULT) ** (1 / 6))
    assert 8.0 < r.blockade_radius < 9.5


def test_register_validation():
    with pytest.raises(RegisterError, match="duplicate"):
        Register(np.array([[0.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(RegisterError):
        Register(np.zeros((0, 2)))
    with pytest.raises(RegisterError):
        Register(np.arange(52.0).reshape(26, 2))


def test_register_json_round_trip():
    r = Register(np.array([[0.0, 0.0], [5.0, 1.0]]), field_sites=[[1, 1], [3, 1.4]], scale=2.5)
    back = Register.from_dict(r.to_dict())
    assert np.array_equal(back.sites, r.sites)
    assert np.array_equal(back.field_sites, r.field_sites)
    assert back.blockade_radius == r.blockade_radius


def test_interactions_are_c6_over_r6():
    r = Register(np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 7.0]]))
    u = r.interactions()
    assert u[0, 1] == pytest.approx(C6_DEFAULT / 5**6)
    assert u[1, 2] == pytest.approx(C6_DEFAULT / math.hypot(5, 7) ** 6)
    assert np.all(np.diag(u) == 0)


# -- build_register ---------------------------------------------------------


def test_constant_field_selects_every_candidate():
    f = ScalarField(np.ones((41, 31)), (0.5, 0.5))
    reg = build_register(f, 0.5, pitch=5.0)
    lo, hi = f.bounds()
    cand = triangular_lattice(lo[0], hi[0], lo[1], hi[1], 5.0)
    assert len(reg) == len(cand)
    np.testing.assert_allclose(np.sort(reg.field_sites, axis=0), np.sort(cand, axis=0))


def test_nearest_neighbour_spacing_is_lattice_spacing():
    f = ScalarField(np.ones((41, 31)), (0.5, 0.5))
    reg = build_register(f, 0.5, lattice_spacing=5.0, pitch=5.0)
    d = cdist(reg.sites, reg.sites)
    np.fill_diagonal(d, np.inf)
    assert d.min() == pytest.approx(5.0)
    np.testing.assert_allclose(reg.to_um(reg.field_sites), reg.sites, atol=1e-12)


def test_small_blob_selects_nearest_trap():
    n = 101
    pitch = 1.0
    cand = triangular_lattice(0, 10, 0, 10, pitch)
    # a blob much narrower than the pitch, slightly off one trap
    blob = tuple(cand[57] + [0.04, -0.03])
    f = synthesize_mixture(
        [GaussianComponent(blob, 0.0625)], ScalarField(np.zeros((n, n)), (0.1, 0.1))
    )
    reg = build_register(f, 0.9, pitch=pitch)
    xs = f.coordinates().reshape(-1, 2)
    argmax = xs[np.argmax(f.values.reshape(-1))]
    nearest = cand[np.argmin(np.linalg.norm(cand - argmax, axis=1))]
    assert len(reg) == 1
    np.testing.assert_allclose(reg.field_sites[0], nearest)


def test_two_blobs_give_two_clusters():
    n = 121
    f = ScalarField(np.zeros((n, n)), (0.1, 0.1))
    f = synthesize_mixture(
        [GaussianComponent((3.0, 6.0), 0.6), GaussianComponent((9.0, 6.0), 0.6)], f
    )
    reg = build_register(f, 0.5, pitch=1.0)
    sites = reg.field_sites
    adj = cdist(sites, sites) <= 1.0 * 1.01
    n_comp, labels = connected_components(adj, directed=False)
    assert n_comp == 2
    # nothing in the valley between the blobs
    assert not np.any(np.abs(sites[:, 0] - 6.0) < 1.0)
    for k in range(2):
        cx = sites[labels == k, 0].mean()
        assert min(abs(cx - 3.0), abs(cx - 9.0)) < 0.5


def test_build_register_errors():
    f = ScalarField(np.zeros((20, 20)), (1.0, 1.0))
    with pytest.raises(RegisterError):
        build_register(f, 0.5)
    g = ScalarField(np.ones((60, 60)), (1.0, 1.0))
    with pytest.raises(RegisterError, match="ceiling"):
        build_register(g, 0.5, pitch=2.0)
    with pytest.raises(RegisterError):
        build_register(g, 1.5)


@FAST
@given(st.integers(0, 10_000), st.floats(0.05, 0.9), st.floats(0.05, 0.9))
def test_raising_threshold_never_adds_sites(seed, t1, t2):
    lo_t, hi_t = sorted((t1, t2))
    rng = np.random.default_rng(seed)
    comps = [
        GaussianComponent(tuple(rng.uniform(2, 8, 2)), rng.uniform(0.5, 2.0))
        for _ in range(rng.integers(1, 4))
    ]
    f = synthesize_mixture(comps, ScalarField(np.zeros((51, 51)), (0.2, 0.2)))
    try:
        big = build_register(f, lo_t, pitch=1.5)
    except RegisterError:
        return
    try:
        small = build_register(f, hi_t, pitch=1.5)
    except RegisterError:
        return  # nothing left: trivially a subset
    big_set = {tuple(np.round(p, 9)) for p in big.field_sites}
    assert all(tuple(np.round(p, 9)) in big_set for p in small.field_sites)


# -- fit_to_traps ------------------------------------------------------------


def test_subset_of_layout_unchanged():
    layout = triangular_layout(4, 4, 5.0)
    reg = Register(layout[[1, 5, 6, 10]].copy())
    fitted = fit_to_traps(reg, layout)
    np.testing.assert_allclose(fitted.sites, reg.sites)


def test_single_site_snaps_to_nearest_trap():
    layout = np.array([[0.0, 0.0], [5.0, 0.0], [2.5, 4.33]])
    reg = Register(np.array([[3.9, 0.4]]))
    fitted = fit_to_traps(reg, layout)
    # a lone site can always be translated onto any trap at zero cost
    assert any(np.allclose(fitted.sites[0], t) for t in layout)
    assert fit_cost(reg.sites, fitted.sites) == pytest.approx(0.0)


def test_square_matches_exhaustive_subset_search():
    layout = triangular_layout(4, 4, 5.0)
    square = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0], [5.0, 5.0]]) + [0.7, -0.3]
    reg = Register(square)
    fitted = fit_to_traps(reg, layout)
    best = math.inf
    for combo in itertools.combinations(range(len(layout)), 4):
        for perm in itertools.permutations(combo):
            best = min(best, fit_cost(square, layout[list(perm)]))
    assert fit_cost(square, fitted.sites) == pytest.approx(best, abs=1e-9)
    assert all(any(np.allclose(p, t) for t in layout) for p in fitted.sites)


def test_fit_keeps_field_sites_and_count():
    layout = triangular_layout(5, 5, 5.0)
    reg = Register(np.array([[0.0, 0.0], [5.2, 0.3], [2.0, 4.0]]), field_sites=[[0, 0], [2, 0], [1, 2]])
    fitted = fit_to_traps(reg, layout)
    assert len(fitted) == 3
    assert np.array_equal(fitted.field_sites, reg.field_sites)


def test_layout_too_small():
    with pytest.raises(RegisterError):
        fit_to_traps(Register(np.array([[0.0, 0.0], [5.0, 0.0]])), np.array([[0.0, 0.0]]))


# -- blockade graph and MIS ------------------------------------------------------


def test_blockade_edges_by_distance():
    assert blockade_graph(Register(np.array([[0.0, 0], [4.0, 0]])), 5.0).edges == ((0, 1),)
    assert blockade_graph(Register(np.array([[0.0, 0], [6.0, 0]])), 5.0).edges == ()


def test_grid_rook_adjacency():
    xs, ys = np.meshgrid(np.arange(3) * 5.0, np.arange(3) * 5.0)
    reg = Register(np.column_stack([xs.ravel(), ys.ravel()]))
    g = blockade_graph(reg, 5.1)
    d = reg.distances()
    brute = {(i, j) for i in range(9) for j in range(i + 1, 9) if d[i, j] <= 5.1}
    assert len(g.edges) == 12
    assert set(g.edges) == brute


def test_graph_rejects_self_loops():
    with pytest.raises(ValueError):
        BlockadeGraph(3, ((1, 1),))


def test_mis_edgeless():
    assert mis_bruteforce(BlockadeGraph(5, ())) == {0, 1, 2, 3, 4}


def test_mis_clique_lowest_index():
    edges = tuple(itertools.combinations(range(4), 2))
    assert mis_bruteforce(BlockadeGraph(4, edges)) == {0}


def test_mis_path_alternating():
    g = BlockadeGraph(6, tuple((i, i + 1) for i in range(5)))
    best = max(
        (s for k in range(7) for s in itertools.combinations(range(6), k) if g.is_independent(s)),
        key=len,
    )
    mis = mis_bruteforce(g)
    assert len(mis) == len(best) == 3
    assert g.is_independent(mis)
    assert mis == {0, 2, 4}


def test_mis_weights_break_ties():
    g = BlockadeGraph(3, ((0, 1), (1, 2), (0, 2)), weights=[0.1, 0.5, 0.2])
    assert mis_bruteforce(g) == {1}


@FAST
@given(st.integers(2, 10), st.integers(0, 100_000), st.floats(0.1, 0.7))
def test_mis_is_maximum_and_maximal(n, seed, p):
    rng = np.random.default_rng(seed)
    edges = tuple((i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p)
    g = BlockadeGraph(n, edges)
    mis = mis_bruteforce(g)
    assert g.is_independent(mis)
    for extra in set(range(n)) - mis:
        assert not g.is_independent(mis | {extra})
    all_max = maximum_independent_sets(g)
    assert len(mis) == len(next(iter(all_max)))
    assert frozenset(mis) in all_max
    # unweighted tie-break: lexicographically smallest index tuple
    assert tuple(sorted(mis)) == min(tuple(sorted(s)) for s in all_max)
