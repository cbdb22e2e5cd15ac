"""State spaces, partial maps with enumerable preimage branches, orbits,
omega-limit sets, and semiconjugacy checking.

A partial dynamical system here is a compact state space M (the unit
interval or the circle), a domain Delta given as a finite union of closed
intervals, a forward map alpha defined on Delta, and an explicit list of
preimage branches so that backward orbits can be enumerated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

# Residual tolerance for chain/branch arithmetic (backward iteration with
# exact branch inverses stays near machine precision).
EPS_CHAIN = 1e-9
# Tolerance for domain-boundary membership.
EPS_DOM = 1e-12


class OutsideDomain(ValueError):
    """Raised when a map is evaluated outside its domain Delta."""


class OrbitEscaped(RuntimeError):
    """Raised when an orbit leaves the domain before the requested length."""


@dataclass(frozen=True)
class StateSpace:
    """The unit interval [0,1] or the circle R/Z with its induced metric."""

    kind: str  # "interval" | "circle"

    def normalize(self, x: float) -> float:
        if self.kind == "circle":
            x = x % 1.0
            if x >= 1.0:  # guard against x % 1.0 == 1.0 from rounding
                x -= 1.0
            return x
        return float(x)

    def metric(self, x: float, y: float) -> float:
        if self.kind == "circle":
            d = abs((x % 1.0) - (y % 1.0))
            return min(d, 1.0 - d)
        return abs(x - y)


UNIT_INTERVAL = StateSpace("interval")
CIRCLE = StateSpace("circle")


@dataclass(frozen=True)
class Branch:
    """One monotone preimage branch of the forward map.

    ``inverse`` maps a point of the image back into ``domain``; it may
    return None where the branch has no preimage.
    """

    label: str
    domain: tuple[float, float]
    inverse: Callable[[float], Optional[float]]

    def contains(self, x: float, eps: float = EPS_DOM) -> bool:
        lo, hi = self.domain
        return lo - eps <= x <= hi + eps


@dataclass(frozen=True)
class PartialMapSystem:
    """(M, Delta, alpha) with enumerable preimage branches."""

    space: StateSpace
    domain: tuple[tuple[float, float], ...]
    forward_map: Callable[[float], float]
    branches: tuple[Branch, ...]
    name: str = "system"

    def in_domain(self, x: float, eps: float = EPS_DOM) -> bool:
        x = self.space.normalize(x)
        for lo, hi in self.domain:
            if lo - eps <= x <= hi + eps:
                return True
            # circle intervals may wrap: interpret (lo, hi) with hi < lo
            if self.space.kind == "circle" and hi < lo:
                if x >= lo - eps or x <= hi + eps:
                    return True
        return False

    def forward(self, x: float) -> float:
        return apply(self, x)


def apply(system: PartialMapSystem, x: float) -> float:
    """Evaluate alpha(x).  Raises OutsideDomain when x is not in Delta."""
    x = system.space.normalize(x)
    if not system.in_domain(x):
        raise OutsideDomain(f"{x!r} is not in the domain of {system.name}")
    return system.space.normalize(system.forward_map(x))


def preimages(system: PartialMapSystem, y: float) -> list[tuple[str, float]]:
    """All x in Delta with alpha(x) = y, one per branch, labelled.

    Two branches meeting at a critical value (coincident preimages) are
    merged into a single entry with label "C".  The empty list means y has
    no preimage.
    """
    y = system.space.normalize(y)
    found: list[tuple[str, float]] = []
    for br in system.branches:
        x = br.inverse(y)
        if x is None:
            continue
        x = system.space.normalize(x)
        if not br.contains(x, 1e-9):
            continue
        if not system.in_domain(x):
            continue
        try:
            back = apply(system, x)
        except OutsideDomain:
            continue
        if system.space.metric(back, y) > EPS_CHAIN:
            continue
        found.append((br.label, x))
    # merge coincident double points (critical values)
    merged: list[tuple[str, float]] = []
    for label, x in found:
        dup = False
        for k, (mlabel, mx) in enumerate(merged):
            if system.space.metric(x, mx) <= 10 * EPS_CHAIN:
                merged[k] = ("C", 0.5 * (x + mx))
                dup = True
                break
        if not dup:
            merged.append((label, x))
    return merged


@dataclass(frozen=True)
class OrbitRecord:
    points: tuple[float, ...]
    escaped: bool


def orbit(system: PartialMapSystem, x: float, n: int) -> OrbitRecord:
    """Forward orbit x, alpha(x), ..., up to n steps; records escape."""
    pts = [system.space.normalize(x)]
    escaped = False
    for _ in range(n):
        if not system.in_domain(pts[-1]):
            escaped = True
            break
        pts.append(apply(system, pts[-1]))
    return OrbitRecord(tuple(pts), escaped)


def omega_limit(system: PartialMapSystem, x: float, transient: int = 2000,
                iters: int = 512, cluster_eps: float = 1e-6) -> list[float]:
    """Cluster representatives of the tail of the forward orbit of x."""
    rec = orbit(system, x, transient + iters)
    if rec.escaped:
        raise OrbitEscaped(f"orbit of {x} left the domain after "
                           f"{len(rec.points) - 1} steps")
    tail = rec.points[transient:]
    reps: list[float] = []
    for p in tail:
        if all(system.space.metric(p, r) > cluster_eps for r in reps):
            reps.append(p)
    return sorted(reps)


@dataclass(frozen=True)
class FactorMapSample:
    """A sampled factor map Psi together with the points it was sampled on."""

    psi: Callable[[object], float]
    points: tuple
    tolerance: float = 10 * EPS_CHAIN

    @property
    def pairs(self):
        return tuple((p, self.psi(p)) for p in self.points)


@dataclass(frozen=True)
class SemiconjugacyReport:
    max_residual: float
    domain_violations: int
    checked: int

    def ok(self, tol: float) -> bool:
        return self.max_residual <= tol and self.domain_violations == 0


def check_semiconjugacy(sample: FactorMapSample, upstairs,
                        downstairs: PartialMapSystem) -> SemiconjugacyReport:
    """Check alpha(Psi(x)) = Psi(beta(x)) over the sampled points.

    ``upstairs`` only needs ``in_domain`` and ``forward``; in particular a
    chain-extension system qualifies.  Residuals are measured downstairs.
    Domain correspondence (x in Delta_beta iff Psi(x) in Delta_alpha) is
    counted, not thrown.
    """
    worst = 0.0
    violations = 0
    checked = 0
    for x in sample.points:
        up_in = upstairs.in_domain(x)
        down_in = downstairs.in_domain(sample.psi(x))
        if up_in != down_in:
            violations += 1
        if not up_in:
            continue
        lhs = apply(downstairs, sample.psi(x))
        rhs = sample.psi(upstairs.forward(x))
        worst = max(worst, downstairs.space.metric(lhs, rhs))
        checked += 1
    return SemiconjugacyReport(worst, violations, checked)


# ---------------------------------------------------------------------------
# Stock systems


def make_rotation_system(tau: float) -> PartialMapSystem:
    """Rigid rotation of the circle by tau (a homeomorphism, Delta = S^1)."""
    tau = tau % 1.0

    def fwd(x: float) -> float:
        return (x + tau) % 1.0

    def inv(y: float) -> Optional[float]:
        return (y - tau) % 1.0

    return PartialMapSystem(
        space=CIRCLE,
        domain=((0.0, 1.0),),
        forward_map=fwd,
        branches=(Branch("only", (0.0, 1.0), inv),),
        name=f"rotation(tau={tau})",
    )


def make_constant_system(p: float) -> PartialMapSystem:
    """The constant map of [0,1] onto the (non-isolated) point p.

    The preimage of p is all of [0,1]; the single branch returns the
    canonical representative p, which is the only point with an infinite
    backward orbit.
    """

    def fwd(x: float) -> float:
        return p

    def inv(y: float) -> Optional[float]:
        if abs(y - p) <= EPS_CHAIN:
            return p
        return None

    return PartialMapSystem(
        space=UNIT_INTERVAL,
        domain=((0.0, 1.0),),
        forward_map=fwd,
        branches=(Branch("only", (0.0, 1.0), inv),),
        name=f"constant(p={p})",
    )
