"""Extension (chain space) tests: chain validation, the extended dynamics
and its inverse, the factor map, stratum sampling, the chain metric with a
brute-force Hausdorff oracle, and the semiconjugacy lift."""

import json
import math
import random

import pytest

from revext.core import (FactorMapSample, check_semiconjugacy,
                         make_constant_system, make_rotation_system)
from revext.extension import (INF, Chain, ChainExtensionSystem, EmptyStratum,
                              ExtensionSpec, InvalidLift,
                              InverseOrbitRecord, NotInImage, alpha_tilde,
                              alpha_tilde_inv, chain_distance, factor_map,
                              hausdorff, lift_semiconjugacy, sample_stratum,
                              stratum_from_json, stratum_to_json,
                              validate_chain, StratumSample)
from revext.logistic import attractor_points, eval_map, extension_spec


SPEC06 = extension_spec(0.6)


def test_validate_chain_accepts_backward_orbit():
    y = 0.8
    c = Chain((eval_map(0.6, y), y), True)
    assert validate_chain(SPEC06, c)


def test_validate_chain_rejects_broken_link():
    assert not validate_chain(SPEC06, Chain((0.5, 0.8), True))


def test_validate_chain_rejects_terminal_outside_Y():
    # Y = [0.6, 1]; a terminal chain must end there
    assert not validate_chain(SPEC06, Chain((0.1,), True))
    assert validate_chain(SPEC06, Chain((0.7,), True))


def test_alpha_tilde_prepends_image():
    # alpha_0.6(0.8) = 4*0.6*0.8*0.2 = 0.384 exactly
    c = Chain((0.8,), True)
    img = alpha_tilde(SPEC06, c)
    assert img.coords == pytest.approx((0.384, 0.8))
    assert img.terminal and img.depth == 1
    assert validate_chain(SPEC06, img)


def test_alpha_tilde_inverse_is_shift():
    c = Chain((0.384, 0.8), True)
    assert alpha_tilde_inv(SPEC06, c).coords == (0.8,)
    with pytest.raises(NotInImage):
        alpha_tilde_inv(SPEC06, Chain((0.8,), True))


def test_round_trip_identity_random_chains():
    rng = random.Random(7)
    for _ in range(200):
        y = 0.6 + 0.4 * rng.random()
        coords = [y]
        for _ in range(rng.randrange(4)):
            coords.insert(0, eval_map(0.6, coords[0]))
        c = Chain(tuple(coords), True)
        assert validate_chain(SPEC06, c)
        assert alpha_tilde_inv(SPEC06, alpha_tilde(SPEC06, c)) == c


def test_factor_map_semiconjugates_extension():
    sample_pts = []
    rng = random.Random(3)
    for _ in range(100):
        y = 0.6 + 0.4 * rng.random()
        coords = [y]
        for _ in range(rng.randrange(5)):
            coords.insert(0, eval_map(0.6, coords[0]))
        sample_pts.append(Chain(tuple(coords), True))
    sample = FactorMapSample(factor_map, tuple(sample_pts))
    report = check_semiconjugacy(sample, ChainExtensionSystem(SPEC06),
                                 SPEC06.system)
    assert report.domain_violations == 0
    assert report.max_residual < 1e-12


def test_stratum_shift():
    s5 = sample_stratum(SPEC06, 5, 20)
    for c in s5.chains:
        img = alpha_tilde(SPEC06, c)
        assert img.terminal and img.depth == 6
        assert validate_chain(SPEC06, img)


def test_sample_stratum_M0_is_Y():
    s0 = sample_stratum(SPEC06, 0, 10)
    for c in s0.chains:
        assert c.depth == 0 and SPEC06.in_Y(c.coords[0], 1e-9)
    heads = sorted(c.coords[0] for c in s0.chains)
    assert heads[0] == pytest.approx(0.6) and heads[-1] == pytest.approx(1.0)


def test_sample_stratum_chains_all_validate():
    for N in (0, 3, INF):
        s = sample_stratum(SPEC06, N, 25, depth=12,
                           extra_seeds=attractor_points(0.6))
        assert s.chains
        for c in s.chains:
            assert validate_chain(SPEC06, c)
            assert c.terminal == (N != INF)


def test_lambda_one_strata_empty_but_inverse_limit_nonempty():
    spec1 = extension_spec(1.0)
    for N in range(4):
        with pytest.raises(EmptyStratum):
            sample_stratum(spec1, N, 10)
    s = sample_stratum(spec1, INF, 10, depth=8)
    assert len(s.chains) > 1
    for c in s.chains:
        assert validate_chain(spec1, c) and not c.terminal


def test_constant_map_full_strata_singleton_infinity():
    p = 1.0 / 3.0
    spec = ExtensionSpec(make_constant_system(p), ((0.0, 1.0),))
    s2 = sample_stratum(spec, 2, 15)
    # every chain is (p, p, y): a full copy of M parametrized by y
    for c in s2.chains:
        assert c.coords[0] == pytest.approx(p)
        assert c.coords[1] == pytest.approx(p)
    assert len({round(c.coords[-1], 9) for c in s2.chains}) == len(s2.chains)
    si = sample_stratum(spec, INF, 15, depth=10)
    assert len(si.chains) == 1
    assert all(x == pytest.approx(p) for x in si.chains[0].coords)


# ---------------------------------------------------------------------------
# Metric


def test_chain_distance_is_a_metric_on_samples():
    s = sample_stratum(SPEC06, 4, 12)
    chains = s.chains[:8]
    for a in chains:
        assert chain_distance(a, a) == 0.0
        for b in chains:
            assert chain_distance(a, b) == pytest.approx(chain_distance(b, a))
            for c in chains:
                assert (chain_distance(a, c)
                        <= chain_distance(a, b) + chain_distance(b, c) + 1e-12)


def test_chain_distance_product_topology_weights():
    a = Chain((0.7, 0.9), True)
    b = Chain((0.7, 0.9, 0.6), True)  # not valid dynamics; metric only
    # coordinate 2: a has terminated while b still has a value -> one
    # terminal-gap contribution with weight 2^-2; afterwards both have
    # terminated and contribute nothing further
    assert chain_distance(a, b) == pytest.approx(0.25)


def test_chain_distance_nonterminal_truncation_costs_nothing():
    a = Chain((0.3, 0.5), False)
    b = Chain((0.3, 0.5, 0.2, 0.4), False)
    assert chain_distance(a, b) == 0.0


def test_terminal_flag_separates_equal_coordinates():
    a = Chain((0.6, 0.8), True)
    b = Chain((0.6, 0.8), False)
    assert chain_distance(a, b) > 0.1


def test_hausdorff_matches_bruteforce_oracle():
    sA = sample_stratum(SPEC06, 3, 8)
    sB = sample_stratum(SPEC06, 5, 8)
    got = hausdorff(sA, sB)

    def brute(A, B):
        worst = 0.0
        for a in A:
            worst = max(worst, min(chain_distance(a, b) for b in B))
        return worst

    expected = max(brute(sA.chains, sB.chains), brute(sB.chains, sA.chains))
    assert got == pytest.approx(expected, abs=1e-12)


def test_hausdorff_converges_for_logistic():
    seeds = attractor_points(0.6)
    minf = sample_stratum(SPEC06, INF, 40, depth=25, extra_seeds=seeds)
    d_prev = None
    for N in (5, 10, 15):
        mn = sample_stratum(SPEC06, N, 40, depth=25, extra_seeds=seeds)
        d = hausdorff(mn, minf)
        if d_prev is not None:
            assert d < d_prev
        d_prev = d
    assert d_prev < 0.02


# ---------------------------------------------------------------------------
# Lift of a semiconjugacy


def test_lift_semiconjugacy_rotation():
    tau = 0.25
    spec = ExtensionSpec(make_rotation_system(tau), ())
    psi = FactorMapSample(lambda t: t % 1.0,
                          tuple(j / 10 for j in range(10)))
    records = []
    for t in psi.points:
        back = tuple((t - (k + 1) * tau) % 1.0 for k in range(6))
        records.append(InverseOrbitRecord(t, back, False))
    lifted = lift_semiconjugacy(psi, records, spec)
    assert len(lifted) == len(records)
    for src, c in lifted:
        assert validate_chain(spec, c)
        assert factor_map(c) == pytest.approx(src % 1.0)


def test_lift_semiconjugacy_rejects_non_semiconjugacy():
    tau = 0.25
    spec = ExtensionSpec(make_rotation_system(tau), ())
    psi = FactorMapSample(lambda t: (t * t) % 1.0, (0.3,))
    records = [InverseOrbitRecord(0.3, ((0.3 - tau) % 1.0,), False)]
    with pytest.raises(InvalidLift):
        lift_semiconjugacy(psi, records, spec)


def test_stratum_json_round_trip(tmp_path):
    s = sample_stratum(SPEC06, 3, 10)
    doc = stratum_to_json(s)
    assert doc["N"] == 3 and doc["chains"]
    text = json.dumps(doc)
    back = stratum_from_json(json.loads(text))
    assert back.N == s.N and back.depth == s.depth
    assert back.chains == s.chains
    si = sample_stratum(SPEC06, INF, 10, depth=6)
    assert stratum_to_json(si)["N"] == "inf"
    assert stratum_from_json(stratum_to_json(si)).N == INF
