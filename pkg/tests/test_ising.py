import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from q3p.bits import occupation_table
from q3p.field import GaussianComponent, ScalarField, SliceFrame, gaussian, integrate, normalize, synthesize_mixture
from q3p.ising import (
    PlacementProblem,
    compile_problem,
    cost,
    costs,
    diagonal,
    exact_solve,
    extract_placement,
    interaction,
    local_amplitudes,
)

from cases import brute_force, mixture_problem, random_problem

FAST = settings(max_examples=40, deadline=None)


def box(n=161, h=0.1, lo=-8.0):
    return ScalarField(np.zeros((n, n)), (h, h), (lo, lo))


# -- interaction ----------------------------------------------------------------


def test_self_overlap():
    assert interaction(1.7, 2, 0.0) == pytest.approx(1 / (4 * math.pi * 1.7))
    assert interaction(1.7, 3, 0.0) == pytest.approx((4 * math.pi * 1.7) ** -1.5)


def test_decays_past_ten_sigma():
    var = 2.0
    assert interaction(var, 2, 10 * math.sqrt(var)) < 1e-10 * interaction(var, 2, 0.0)


@pytest.mark.parametrize("r", [0.0, 1.0, 3.0])
def test_interaction_matches_quadrature(r):
    var = 5.0
    sd = math.sqrt(var)
    h = 0.05
    half = 10 * sd
    n = int(round(2 * half / h)) + 1
    f = ScalarField(np.zeros((n, n)), (h, h), (-half, -half))
    pts = f.coordinates()
    num = integrate(gaussian(pts, (0.0, 0.0), var) * gaussian(pts, (r, 0.0), var), f.spacing)
    assert interaction(var, 2, r) == pytest.approx(num, rel=1e-6)


@FAST
@given(st.floats(0.05, 10.0), st.floats(0.0, 20.0), st.floats(0.0, 20.0), st.integers(1, 3))
def test_interaction_monotone_and_log_linear_in_r2(var, a, b, d):
    lo, hi = sorted((a, b))
    assert interaction(var, d, hi) <= interaction(var, d, lo)
    # log V is affine in r^2 (hence log-concave)
    mid = math.sqrt((lo**2 + hi**2) / 2)
    la, lb, lm = (math.log(max(interaction(var, d, x), 1e-300)) for x in (lo, hi, mid))
    if max(la, lb) > -690 and min(la, lb) > -690:
        assert lm == pytest.approx((la + lb) / 2, rel=1e-9, abs=1e-9)


def test_interaction_rejects_bad_input():
    with pytest.raises(ValueError):
        interaction(0.0, 2, 1.0)
    with pytest.raises(ValueError):
        interaction(1.0, 2, -1.0)


# -- compilation ----------------------------------------------------------------


def test_gamma_at_matching_gaussian():
    var = 1.2
    g = normalize(synthesize_mixture([GaussianComponent((0.0, 0.0), var)], box()))
    p = compile_problem(g, [[0.0, 0.0]], var)
    assert p.gamma[0] == pytest.approx(1 / (4 * math.pi * var), rel=1e-4)
    assert p.v[0, 0] == pytest.approx(1 / (4 * math.pi * var))
    assert not p.warnings


def test_gamma_where_density_vanishes():
    var = 0.5
    g = normalize(synthesize_mixture([GaussianComponent((6.0, 6.0), 0.3)], box()))
    p = compile_problem(g, [[-5.0, -5.0]], var)
    assert p.gamma[0] == pytest.approx(-1 / (4 * math.pi * var), rel=1e-4)


def test_gamma_ranking_follows_density():
    g, p, _ = mixture_problem(3, 3, [0, 8])
    sites = p.sites
    idx = (sites - g.origin) / g.spacing
    dens = np.array([g.values[int(round(i)), int(round(j))] for i, j in idx])
    for i in range(9):
        for j in range(9):
            if dens[i] > dens[j] * (1 + 1e-3):
                assert p.gamma[i] > p.gamma[j]


def test_compile_requires_normalized_density_and_inside_sites():
    raw = synthesize_mixture([GaussianComponent((0.0, 0.0), 1.0, 2.0)], box())
    with pytest.raises(ValueError, match="normalized"):
        compile_problem(raw, [[0.0, 0.0]], 1.0)
    g = normalize(raw)
    with pytest.raises(ValueError, match="outside"):
        compile_problem(g, [[20.0, 0.0]], 1.0)


def test_truncated_gaussian_warns():
    g = normalize(synthesize_mixture([GaussianComponent((0.0, 0.0), 1.0)], box()))
    p = compile_problem(g, [[7.5, 0.0]], 1.0)
    assert p.warnings and "site 0" in p.warnings[0]


def test_amplitudes_scale_terms():
    var = 1.0
    g = normalize(synthesize_mixture([GaussianComponent((0.0, 0.0), var)], box()))
    sites = [[0.0, 0.0], [1.5, 0.0]]
    unit = compile_problem(g, sites, var)
    scaled = compile_problem(g, sites, var, amplitudes=[2.0, 0.5])
    cross = (unit.gamma + unit.v.diagonal()) / 2
    np.testing.assert_allclose(
        scaled.gamma,
        2 * np.array([2.0, 0.5]) * cross - np.array([4.0, 0.25]) * unit.v.diagonal(),
        rtol=1e-9,
        atol=1e-12,
    )
    assert scaled.v[0, 1] == pytest.approx(unit.v[0, 1])


def test_local_amplitudes_match_peak_to_density():
    var = 0.5
    g = normalize(synthesize_mixture([GaussianComponent((0.0, 0.0), var)], box()))
    a = local_amplitudes(g, np.array([[0.0, 0.0]]), var)
    # the local rule reproduces the generating amplitude at its center
    assert a[0] == pytest.approx(1.0, rel=1e-6)
    p = compile_problem(g, [[0.0, 0.0], [1.0, 1.0]], var, amplitudes="local")
    assert p.amplitudes[1] < p.amplitudes[0]


@FAST
@given(st.integers(0, 100_000))
def test_problem_invariants(seed):
    rng = np.random.default_rng(seed)
    comps = [
        GaussianComponent(tuple(rng.uniform(-4, 4, 2)), rng.uniform(0.2, 2.0), rng.uniform(0.1, 1))
        for _ in range(rng.integers(1, 4))
    ]
    g = normalize(synthesize_mixture(comps, box(n=81, h=0.2)))
    sites = rng.uniform(-5, 5, (rng.integers(1, 7), 2))
    amps = rng.uniform(0.1, 2.0, len(sites))
    p = compile_problem(g, sites, rng.uniform(0.2, 3.0), amps)
    assert np.array_equal(p.v, p.v.T)
    assert np.all(p.v >= 0)
    # Cauchy-Schwarz; for equal amplitudes this is V_ij <= V_ii
    assert np.all(p.v <= np.sqrt(np.outer(p.v.diagonal(), p.v.diagonal())) * (1 + 1e-12))
    assert np.all(p.gamma >= -p.v.diagonal() * (1 + 1e-9))


def test_problem_json_round_trip():
    p = random_problem(5, 1, exclusion=1.0)
    q = PlacementProblem.from_dict(p.to_dict())
    assert q.to_dict() == p.to_dict()
    assert exact_solve(q).bitstring == exact_solve(p).bitstring


# -- costs ---------------------------------------------------------------------


def test_cost_examples():
    p = random_problem(4, 2)
    assert cost(p, "0000") == 0.0
    assert cost(p, "0100") == pytest.approx(-p.gamma[1])
    assert cost(p, "1001") == pytest.approx(-p.gamma[0] - p.gamma[3] + 2 * p.v[0, 3])


def test_half_pair_flag():
    p = random_problem(3, 3, double_count=False)
    assert cost(p, "110") == pytest.approx(-p.gamma[0] - p.gamma[1] + p.v[0, 1])


def test_cost_length_mismatch():
    with pytest.raises(ValueError):
        cost(random_problem(3, 0), "10")


@FAST
@given(st.integers(1, 10), st.integers(0, 100_000), st.booleans())
def test_pair_sum_equals_quadratic_form(m, seed, double):
    p = random_problem(m, seed, double_count=double)
    rows = occupation_table(m)
    pick = np.random.default_rng(seed).integers(0, len(rows), 8)
    v0 = p.coupling()
    for r in rows[pick]:
        n = r.astype(float)
        quad = n @ (-p.gamma) + p.pair_factor * n @ v0 @ n
        assert cost(p, r) == pytest.approx(quad, rel=1e-12, abs=1e-15)
    np.testing.assert_allclose(diagonal(p)[pick], costs(p, rows[pick]))


# -- exact solver ----------------------------------------------------------------


def test_all_negative_gamma_places_nothing():
    p = random_problem(6, 4)
    p = PlacementProblem(p.sites, p.variance, p.amplitudes, -np.abs(p.gamma) - 1e-3, p.v)
    assert exact_solve(p).bitstring == "000000"


def test_distant_positive_sites_both_placed():
    sites = np.array([[0.0, 0.0], [30.0, 0.0]])
    v = interaction(1.0, 2, np.linalg.norm(sites[:, None] - sites[None], axis=2))
    p = PlacementProblem(sites, 1.0, np.ones(2), np.array([0.05, 0.02]), v)
    assert exact_solve(p).bitstring == "11"


def test_exclusion_keeps_larger_gamma():
    sites = np.array([[0.0, 0.0], [0.5, 0.0]])
    # negligible overlap so only the constraint separates 11 from 10
    v = np.diag([1.0, 1.0]) * 0.1
    p = PlacementProblem(sites, 1.0, np.ones(2), np.array([0.3, 0.2]), v, exclusion_radius=1.0)
    assert exact_solve(p).bitstring == "10"
    assert exact_solve(p, enforce_exclusion=False).bitstring == "11"


def test_ties_prefer_fewer_then_lower_indices():
    sites = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    v = np.array([[1.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 1.0]])
    # 110 costs -2 + 1 = -1, same as 100 and 010
    p = PlacementProblem(sites, 1.0, np.ones(3), np.array([1.0, 1.0, -1.0]), v)
    assert exact_solve(p).bitstring == "100"


@FAST
@given(st.integers(1, 11), st.integers(0, 100_000), st.sampled_from([0.0, 1.0, 2.5]), st.booleans())
def test_exact_matches_enumeration(m, seed, radius, double):
    p = random_problem(m, seed, exclusion=radius, double_count=double)
    got = exact_solve(p)
    want, best = brute_force(p)
    assert got.cost == pytest.approx(best, rel=1e-9, abs=1e-15)
    assert got.bitstring == want
    assert p.is_admissible(got.bitstring)


@FAST
@given(st.integers(2, 9), st.integers(0, 100_000), st.floats(0.01, 100.0))
def test_argmin_invariant_under_joint_scaling(m, seed, c):
    p = random_problem(m, seed)
    q = PlacementProblem(p.sites, p.variance, p.amplitudes, c * p.gamma, c * p.v)
    assert exact_solve(q).bitstring == exact_solve(p).bitstring


# -- placements -----------------------------------------------------------------


def test_extract_empty():
    p = random_problem(4, 5)
    pl = extract_placement(p, "0000")
    assert pl.count == 0 and len(pl.positions) == 0 and pl.cost == 0.0


def test_extract_six_site_pattern():
    p = random_problem(6, 6)
    pl = extract_placement(p, "101001")
    assert pl.count == 3
    np.testing.assert_allclose(pl.positions, p.sites[[0, 2, 5]])


def test_extract_identity_frame_and_lift():
    p = random_problem(3, 7)
    ident = SliceFrame([0, 0, 0], [1, 0, 0], [0, 1, 0])
    pl = extract_placement(p, "110", ident)
    np.testing.assert_allclose(pl.positions[:, :2], p.sites[:2])
    np.testing.assert_allclose(pl.positions[:, 2], 0.0)
    tilted = SliceFrame([1, 2, 3], [0, 1, 0], [0, 0, 1])
    pl = extract_placement(p, "100", tilted)
    np.testing.assert_allclose(pl.positions[0], [1, 2 + p.sites[0, 0], 3 + p.sites[0, 1]])
