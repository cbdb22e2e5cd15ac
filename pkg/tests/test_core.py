"""Core system tests: preimages against an independent bisection oracle,
orbits and omega-limit sets against brute iteration, and semiconjugacy
checking on the classical tent-to-quadratic conjugacy."""

import math

import pytest

from revext.core import (Branch, FactorMapSample, OutsideDomain,
                         PartialMapSystem, UNIT_INTERVAL, apply,
                         check_semiconjugacy, make_constant_system,
                         make_rotation_system, omega_limit, orbit, preimages)
from revext.logistic import make_system


def bisect_preimage(f, y, lo, hi, tol=1e-13):
    """Independent root bracket for f(x) = y on a monotone piece."""
    flo, fhi = f(lo) - y, f(hi) - y
    if flo * fhi > 0:
        return None
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        fm = f(mid) - y
        if hi - lo < tol:
            break
        if flo * fm <= 0:
            hi, fhi = mid, fm
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


@pytest.mark.parametrize("lam", [0.3, 0.6, 0.9])
def test_preimages_match_bisection_oracle(lam):
    system = make_system(lam)
    f = lambda x: 4.0 * lam * x * (1.0 - x)
    for j in range(40):
        y = j / 39 * lam * 0.999  # strictly below the critical value
        got = dict(preimages(system, y))
        left = bisect_preimage(f, y, 0.0, 0.5)
        right = bisect_preimage(f, y, 0.5, 1.0)
        assert set(got) == {"L", "R"}
        assert got["L"] == pytest.approx(left, abs=1e-10)
        assert got["R"] == pytest.approx(right, abs=1e-10)


def test_preimages_above_critical_value_empty():
    system = make_system(0.6)
    assert preimages(system, 0.7) == []


def test_preimages_at_critical_value_merge_to_C():
    system = make_system(0.6)
    got = preimages(system, 0.6)
    assert len(got) == 1
    label, x = got[0]
    assert label == "C"
    assert x == pytest.approx(0.5, abs=1e-8)


def test_apply_outside_domain_raises():
    half = PartialMapSystem(
        space=UNIT_INTERVAL, domain=((0.0, 0.5),),
        forward_map=lambda x: 2.0 * x, branches=(), name="half")
    assert apply(half, 0.25) == pytest.approx(0.5)
    with pytest.raises(OutsideDomain):
        apply(half, 0.75)


def test_orbit_records_escape():
    half = PartialMapSystem(
        space=UNIT_INTERVAL, domain=((0.0, 0.5),),
        forward_map=lambda x: 2.0 * x, branches=(), name="half")
    rec = orbit(half, 0.2, 10)
    assert rec.escaped
    assert rec.points[-1] == pytest.approx(0.8)


def test_omega_limit_matches_brute_iteration():
    # lam = 0.8: attracting 2-cycle; brute-force the cycle independently
    lam = 0.8
    x = 0.3
    for _ in range(100000):
        x = 4.0 * lam * x * (1.0 - x)
    cycle = sorted({round(x, 9), round(4.0 * lam * x * (1.0 - x), 9)})
    got = omega_limit(make_system(lam), 0.3)
    assert len(got) == 2
    for g, c in zip(got, cycle):
        assert g == pytest.approx(c, abs=1e-6)


def test_omega_limit_rotation_third():
    got = omega_limit(make_rotation_system(1.0 / 3.0), 0.05)
    assert len(got) == 3


def test_tent_quadratic_semiconjugacy():
    # Psi(t) = sin^2(pi t / 2) intertwines the tent map and the full
    # quadratic map: a classical exact conjugacy.
    tent = PartialMapSystem(
        space=UNIT_INTERVAL, domain=((0.0, 1.0),),
        forward_map=lambda t: 2.0 * t if t <= 0.5 else 2.0 - 2.0 * t,
        branches=(), name="tent")
    psi = lambda t: math.sin(math.pi * t / 2.0) ** 2
    sample = FactorMapSample(psi, tuple(j / 200 for j in range(201)))
    report = check_semiconjugacy(sample, tent, make_system(1.0))
    assert report.domain_violations == 0
    assert report.max_residual < 1e-12


def test_semiconjugacy_detects_wrong_factor_map():
    tent = PartialMapSystem(
        space=UNIT_INTERVAL, domain=((0.0, 1.0),),
        forward_map=lambda t: 2.0 * t if t <= 0.5 else 2.0 - 2.0 * t,
        branches=(), name="tent")
    sample = FactorMapSample(lambda t: t, tuple(j / 50 for j in range(51)))
    report = check_semiconjugacy(sample, tent, make_system(1.0))
    assert report.max_residual > 0.1


def test_constant_system_preimage_is_target_only():
    system = make_constant_system(0.3)
    assert apply(system, 0.9) == pytest.approx(0.3)
    assert preimages(system, 0.3) == [("only", 0.3)]
    assert preimages(system, 0.4) == []


def test_circle_metric_wraps():
    rot = make_rotation_system(0.25)
    assert rot.space.metric(0.95, 0.05) == pytest.approx(0.1)
    assert apply(rot, 0.9) == pytest.approx(0.15)
