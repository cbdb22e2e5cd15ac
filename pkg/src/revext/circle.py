"""Orientation-preserving circle homeomorphisms via lifts: rotation
numbers, Poincare-style classification, the compression trichotomy, and
extension-space shapes.

A homeomorphism alpha of S^1 is represented by a lift: a strictly
increasing gamma on R with gamma(t+1) = gamma(t) + 1.  The lift determines
alpha and, through the sign of gamma(0), which kind of generating operator
(isometry / unitary / coisometry) the associated crossed-product-like
algebra has, hence the shape of the reversible extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

GRID_KNOTS = 2 ** 12


class NotCoisometry(ValueError):
    """extension_shape requires gamma(0) > 0."""


class InvalidConjugacy(ValueError):
    """The sampled conjugacy does not intertwine the two maps."""


def _frac(t: float) -> float:
    f = t - math.floor(t)
    if f >= 1.0:
        f = 0.0
    return f


@dataclass(frozen=True)
class CircleHomeo:
    """A circle homeomorphism given by the restriction of its lift to [0,1].

    ``base`` maps [0,1] -> R with base(1) = base(0) + 1; the full lift is
    gamma(t) = base({t}) + floor(t).
    """

    base: Callable[[float], float]
    label: str = "homeo"

    def lift(self, t: float) -> float:
        k = math.floor(t)
        return self.base(t - k) + k

    def lift_iter(self, t: float, n: int) -> float:
        for _ in range(n):
            t = self.lift(t)
        return t

    def gamma0(self) -> float:
        return self.base(0.0)

    def circle_map(self, x: float) -> float:
        return _frac(self.lift(x))

    def inverse_lift(self, y: float, tol: float = 1e-14) -> float:
        """Solve gamma(t) = y by bisection (gamma is strictly increasing)."""
        lo, hi = y - 2.0, y + 2.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if hi - lo < tol:
                break
            if self.lift(mid) < y:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def rigid_rotation(tau: float, offset: int = 0) -> CircleHomeo:
    """Lift t -> t + tau (+ integer offset; lifts are determined only up to
    integer translation)."""

    def base(f: float) -> float:
        return f + tau + offset

    return CircleHomeo(base, label=f"rotation(tau={tau})")


def perturbed_rotation(tau: float, a: float, offset: int = 0) -> CircleHomeo:
    """Lift t -> t + tau + a*sin(2*pi*t)/(2*pi); a diffeomorphism for |a|<1."""
    if abs(a) >= 1.0:
        raise ValueError("|a| must be < 1 for monotonicity")
    twopi = 2.0 * math.pi

    def base(f: float) -> float:
        return f + tau + a * math.sin(twopi * f) / twopi + offset

    return CircleHomeo(base, label=f"perturbed(tau={tau},a={a})")


def grid_homeo(values: Sequence[float], label: str = "grid") -> CircleHomeo:
    """Monotone piecewise-linear lift through values at knots j/K, j=0..K
    (values[-1] must equal values[0] + 1)."""
    v = np.asarray(values, dtype=float)
    if len(v) < 2 or abs((v[-1] - v[0]) - 1.0) > 1e-9:
        raise ValueError("grid lift must satisfy gamma(1) = gamma(0) + 1")
    if np.any(np.diff(v) < 0):
        raise ValueError("grid lift must be monotone")
    knots = np.linspace(0.0, 1.0, len(v))

    def base(f: float) -> float:
        return float(np.interp(f, knots, v))

    return CircleHomeo(base, label=label)


def sampled_conjugate(h: CircleHomeo, phi: CircleHomeo,
                      knots: int = GRID_KNOTS) -> CircleHomeo:
    """The conjugated homeomorphism phi o h o phi^-1 as a grid lift
    (sampling once keeps long-orbit computations cheap)."""
    ts = np.linspace(0.0, 1.0, knots + 1)
    vals = [phi.lift(h.lift(phi.inverse_lift(float(t)))) for t in ts]
    vals = np.asarray(vals)
    # re-anchor so the base is exactly periodic at the endpoints
    vals[-1] = vals[0] + 1.0
    vals = np.maximum.accumulate(vals)  # clip tiny monotonicity violations
    return grid_homeo(vals, label=f"conj({h.label})")


# ---------------------------------------------------------------------------
# Rotation number and compression trichotomy


def rotation_number(h: CircleHomeo, n_iter: int = 100_000,
                    seed: float = 0.0, debug_seeds: int = 1) -> float:
    """Fractional part of gamma^n(t)/n at t = seed; error bound 1/n_iter.

    With debug_seeds > 1 the estimate is averaged over several seeds (the
    limit itself is seed-independent)."""
    seeds = [seed] if debug_seeds <= 1 else \
        [seed + j / debug_seeds for j in range(debug_seeds)]
    ests = []
    for s in seeds:
        t = h.lift_iter(s, n_iter)
        ests.append((t - s) / n_iter)
    return _frac(sum(ests) / len(ests))


@dataclass(frozen=True)
class CompressionCase:
    case: str          # "Coisometry" | "Unitary" | "Isometry"
    gamma0: float
    cosurjectivity_arc: Optional[tuple[float, float]]


def compression_case(h: CircleHomeo) -> CompressionCase:
    """Trichotomy by the sign of gamma(0): positive means the generating
    operator is a non-invertible coisometry with cosurjectivity arc
    [0, gamma(0)], zero means unitary, negative a non-invertible isometry
    with arc [0, gamma^-1(0)]."""
    g0 = h.gamma0()
    if g0 > 0.0:
        return CompressionCase("Coisometry", g0, (0.0, g0))
    if g0 < 0.0:
        return CompressionCase("Isometry", g0, (0.0, h.inverse_lift(0.0)))
    return CompressionCase("Unitary", g0, None)


@dataclass(frozen=True)
class CircleExtensionShape:
    kind: str                                   # "FullCylinder" | "ArcLadder"
    arcs: tuple[tuple[int, float, float], ...]  # (N, origin, end)
    limit_set: tuple[float, ...]

    def to_json(self) -> dict:
        return {
            "space": "circle",
            "kind": self.kind,
            "arcs": [{"N": n, "origin": o, "end": e}
                     for n, o, e in self.arcs],
            "limit_set": list(self.limit_set),
        }


def extension_shape(h: CircleHomeo, N_max: int = 50,
                    limit_iters: int = 2000,
                    cluster_eps: float = 1e-6) -> CircleExtensionShape:
    """Shape of the reversible extension in the coisometry case.

    gamma(0) >= 1 gives the full cylinder over the circle; gamma(0) in
    (0,1) gives the ladder of arcs [alpha^N(1), alpha^{N+1}(1)] traced by
    the orbit of the point 1 (t = 0).  The limit set samples the
    accumulation points of the arc endpoints."""
    g0 = h.gamma0()
    if g0 <= 0.0:
        raise NotCoisometry("extension_shape requires gamma(0) > 0")
    ends = [0.0]
    t = 0.0
    for _ in range(max(N_max + 1, limit_iters)):
        t = h.lift(t)
        ends.append(t)
    if g0 >= 1.0:
        return CircleExtensionShape("FullCylinder", (), ())
    arcs = tuple((N, _frac(ends[N]), _frac(ends[N + 1]))
                 for N in range(N_max + 1))
    tail = sorted(_frac(e) for e in ends[limit_iters // 2:])
    reps: list[float] = []
    for p in tail:
        if all(min(abs(p - r), 1.0 - abs(p - r)) > cluster_eps for r in reps):
            reps.append(p)
    return CircleExtensionShape("ArcLadder", arcs, tuple(reps))


# ---------------------------------------------------------------------------
# Classification


def _convergents(x: float, max_den: int):
    """Continued-fraction convergents m/n of x with n <= max_den."""
    out = []
    a = math.floor(x)
    h0, k0, h1, k1 = 1, 0, a, 1
    frac = x - a
    out.append((h1, k1))
    for _ in range(64):
        if frac < 1e-12:
            break
        x = 1.0 / frac
        a = math.floor(x)
        frac = x - a
        h0, k0, h1, k1 = h1, k1, a * h1 + h0, a * k1 + k0
        if k1 > max_den:
            break
        out.append((h1, k1))
    return out


def _find_periodic_point(h: CircleHomeo, n: int, m: int,
                         tol: float = 1e-9) -> Optional[float]:
    """A root of gamma^n(t) - t - m in [0,1), or None."""

    def F(t: float) -> float:
        return h.lift_iter(t, n) - t - m

    grid = 512
    prev, fprev = 0.0, F(0.0)
    if abs(fprev) < tol:
        return 0.0
    for j in range(1, grid + 1):
        t = j / grid
        ft = F(t)
        if abs(ft) < tol:
            return _frac(t)
        if fprev * ft < 0.0:
            a, b, fa = prev, t, fprev
            for _ in range(80):
                mid = 0.5 * (a + b)
                fm = F(mid)
                if abs(fm) < tol:
                    return _frac(mid)
                if fa * fm <= 0.0:
                    b = mid
                else:
                    a, fa = mid, fm
            return None
        prev, fprev = t, ft
    return None


@dataclass(frozen=True)
class RotationClassification:
    tau: float
    kind: str   # "RationalPeriodic" | "IrrationalTransitive" |
                # "IrrationalNonTransitive"
    m: Optional[int] = None
    n: Optional[int] = None
    evidence: dict = field(default_factory=dict)


def classify(h: CircleHomeo, n_iter: int = 100_000, max_den: int = 64,
             orbit_sample: int = 4096) -> RotationClassification:
    """Rational rotation number (confirmed by a genuine periodic point)
    versus irrational; irrational transitivity decided by a gap statistic
    on the sampled orbit (heuristic evidence, not proof)."""
    tau = rotation_number(h, n_iter)
    for m, n in _convergents(tau, max_den):
        if n < 1:
            continue
        if abs(tau - m / n) <= 2.0 / n_iter + 1e-12:
            pt = _find_periodic_point(h, n, m)
            if pt is not None:
                g = math.gcd(m, n) if m else 1
                return RotationClassification(
                    tau, "RationalPeriodic", m=m // g, n=n // g,
                    evidence={"periodic_point": pt})
    # irrational: gap statistic of the orbit closure sample
    pts = []
    t = 0.0
    for _ in range(orbit_sample):
        t = h.lift(t)
        pts.append(_frac(t))
    pts.sort()
    gaps = [pts[j + 1] - pts[j] for j in range(len(pts) - 1)]
    gaps.append(1.0 - pts[-1] + pts[0])
    max_gap = max(gaps)
    threshold = 10.0 / math.sqrt(orbit_sample)
    kind = ("IrrationalTransitive" if max_gap < threshold
            else "IrrationalNonTransitive")
    return RotationClassification(tau, kind,
                                  evidence={"max_gap": max_gap,
                                            "gap_threshold": threshold})


@dataclass(frozen=True)
class RotationInvariantReport:
    tau1: float
    tau2: float
    difference: float
    bound: float
    conjugacy_residual: Optional[float]

    def ok(self) -> bool:
        return self.difference <= self.bound


def check_rotation_invariant(h1: CircleHomeo, h2: CircleHomeo,
                             conj: Optional[CircleHomeo] = None,
                             n_iter: int = 100_000,
                             tol: float = 1e-4) -> RotationInvariantReport:
    """Compare rotation numbers of two homeomorphisms; when a sampled
    conjugacy phi with phi o alpha = beta o phi is supplied, its
    intertwining residual is verified first and the rotation numbers must
    then agree within the estimator bound 2/n_iter."""
    residual = None
    if conj is not None:
        worst = 0.0
        for j in range(257):
            t = j / 256
            lhs = conj.lift(h1.lift(t))
            rhs = h2.lift(conj.lift(t))
            d = abs(lhs - rhs)
            worst = max(worst, min(d - math.floor(d), 1.0 - (d - math.floor(d))))
        residual = worst
        if worst > tol:
            raise InvalidConjugacy(f"intertwining residual {worst} > {tol}")
    t1 = rotation_number(h1, n_iter)
    t2 = rotation_number(h2, n_iter)
    d = abs(t1 - t2)
    d = min(d, 1.0 - d)
    return RotationInvariantReport(t1, t2, d, 2.0 / n_iter, residual)
