"""Finite-dimensional operator models of the extension dynamics.

On the span of a finite set of chains, the operator (Uf)(c) = f(extended
dynamics of c) is a partial permutation matrix, and functions of the zeroth
coordinate act as the diagonal algebra A.  Every structural identity of the
coefficient-algebra framework (partial isometry, Ua = delta(a)U, generalized
inverses, kernel/annihilator and carrier relations, commutativity of the
generated algebra B) then becomes a machine-checkable matrix identity.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import EPS_CHAIN, PartialMapSystem, UNIT_INTERVAL, Branch, apply
from .extension import (Chain, ExtensionSpec, alpha_tilde, validate_chain)
from . import logistic as _logistic

THRESHOLD = 1e-12


class ClosureOverflow(RuntimeError):
    """The chain basis exceeded the size cap during closure."""


def _norm(M: np.ndarray) -> float:
    return float(np.linalg.norm(M, 2)) if M.size else 0.0


def _offdiag(M: np.ndarray) -> np.ndarray:
    return M - np.diag(np.diag(M))


DEFAULT_A_FUNCS = {
    "one": lambda x: 1.0,
    "x0": lambda x: x,
    "x0sq": lambda x: x * x,
    "bump": lambda x: math.exp(-((x - 0.5) / 0.2) ** 2),
}


@dataclass(frozen=True)
class FiniteModel:
    spec: ExtensionSpec
    chains: tuple[Chain, ...]
    U: np.ndarray
    a_gens: dict                    # name -> diagonal vector
    closure_depth: int

    @property
    def dim(self) -> int:
        return len(self.chains)

    def a_matrix(self, name: str) -> np.ndarray:
        return np.diag(self.a_gens[name])


def _canonical(spec: ExtensionSpec, c: Chain, depth: int) -> Chain:
    """Terminal chains keep their length; non-terminal truncations are
    stored at exactly ``depth`` coordinates past the head."""
    if c.terminal or c.depth == depth:
        return c
    if c.depth > depth:
        return Chain(c.coords[:depth + 1], False)
    # extend deterministically by the first available preimage branch
    coords = list(c.coords)
    from .core import preimages
    while len(coords) - 1 < depth:
        opts = preimages(spec.system, coords[-1])
        if not opts:
            raise ValueError("non-terminal chain cannot be extended to the "
                             "canonical depth")
        opts.sort(key=lambda lx: ({"L": 0, "R": 1, "C": 2}.get(lx[0], 9),
                                  lx[0]))
        coords.append(opts[0][1])
    return Chain(tuple(coords), False)


def build_model(spec: ExtensionSpec, seed_chains: Sequence[Chain],
                closure_depth: int, size_cap: int = 5000,
                a_funcs: Optional[dict] = None) -> FiniteModel:
    """Close the seeds under the extension dynamics and its inverse (up to
    ``closure_depth``), then assemble U and the diagonal generators.

    U[i, j] = 1 iff chain j is the image of chain i under the extension
    dynamics; rows of chains whose image leaves the basis stay zero
    (finite-dimensional compression)."""
    a_funcs = dict(DEFAULT_A_FUNCS) if a_funcs is None else a_funcs
    basis: list[Chain] = []
    index: dict = {}

    def add(c: Chain) -> bool:
        c = _canonical(spec, c, closure_depth)
        if not validate_chain(spec, c):
            raise ValueError(f"invalid chain in model basis: {c}")
        k = c.key()
        if k in index:
            return False
        if len(basis) >= size_cap:
            raise ClosureOverflow(f"basis exceeded size cap {size_cap}")
        index[k] = len(basis)
        basis.append(c)
        return True

    work = [
        _canonical(spec, c, closure_depth) for c in seed_chains]
    for c in work:
        add(c)
    pending = list(basis)
    while pending:
        c = pending.pop()
        images = []
        if spec.system.in_domain(c.coords[0]):
            img = alpha_tilde(spec, c)
            if img.terminal and img.depth > closure_depth:
                pass  # not addable: depth cap
            else:
                images.append(img)
        if len(c.coords) >= 2:
            images.append(Chain(c.coords[1:], c.terminal))
        for img in images:
            try:
                img = _canonical(spec, img, closure_depth)
            except ValueError:
                continue
            if add(img):
                pending.append(img)

    dim = len(basis)
    U = np.zeros((dim, dim))
    for i, c in enumerate(basis):
        if not spec.system.in_domain(c.coords[0]):
            continue
        img = alpha_tilde(spec, c)
        if img.terminal and img.depth > closure_depth:
            continue
        img = _canonical(spec, img, closure_depth)
        j = index.get(img.key())
        if j is not None:
            U[i, j] = 1.0

    gens = {name: np.array([f(c.coords[0]) for c in basis])
            for name, f in a_funcs.items()}
    return FiniteModel(spec, tuple(basis), U, gens, closure_depth)


# ---------------------------------------------------------------------------
# Reports


@dataclass
class OperatorCheckReport:
    residuals: dict = field(default_factory=dict)
    threshold: float = THRESHOLD

    def record(self, name: str, value: float) -> None:
        self.residuals[name] = float(value)

    def passes(self, name: str) -> bool:
        return self.residuals[name] <= self.threshold

    def all_pass(self) -> bool:
        return all(v <= self.threshold for v in self.residuals.values())

    def merge(self, other: "OperatorCheckReport") -> "OperatorCheckReport":
        out = OperatorCheckReport(threshold=self.threshold)
        out.residuals = {**self.residuals, **other.residuals}
        return out

    def to_json(self) -> dict:
        return {name: {"residual": res, "pass": res <= self.threshold}
                for name, res in self.residuals.items()}

    def dump(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)


def _delta(U: np.ndarray, b: np.ndarray) -> np.ndarray:
    return U @ b @ U.T


def _delta_star(U: np.ndarray, b: np.ndarray) -> np.ndarray:
    return U.T @ b @ U


def verify_coefficient_relations(m: FiniteModel) -> OperatorCheckReport:
    """The defining relations of a coefficient algebra: conjugation by U
    and U* keeps A diagonal, Ua = delta(a)U, U is a partial isometry, and
    U*U lies in the commutant of A."""
    U = m.U
    rep = OperatorCheckReport()
    r_diag = r_star_diag = r_inter = r_comm = 0.0
    UstarU = U.T @ U
    for name in m.a_gens:
        a = m.a_matrix(name)
        d = _delta(U, a)
        r_diag = max(r_diag, _norm(_offdiag(d)))
        r_star_diag = max(r_star_diag, _norm(_offdiag(_delta_star(U, a))))
        r_inter = max(r_inter, _norm(U @ a - d @ U))
        r_comm = max(r_comm, _norm(UstarU @ a - a @ UstarU))
    rep.record("UaU*_diagonal", r_diag)
    rep.record("U*aU_diagonal", r_star_diag)
    rep.record("Ua_equals_delta(a)U", r_inter)
    rep.record("partial_isometry_UU*U=U", _norm(U @ U.T @ U - U))
    rep.record("U*U_in_commutant_of_A", r_comm)
    one = np.eye(m.dim)
    rep.record("delta(1)_equals_UU*", _norm(_delta(U, one) - U @ U.T))
    return rep


@dataclass(frozen=True)
class BAlgebra:
    mats: tuple           # diagonal matrices U*^n a U^n
    names: tuple
    commutativity_defect: float
    class_projections: tuple  # projections of the joint-eigenvalue partition


def build_B(m: FiniteModel, n_max: int) -> BAlgebra:
    """Generators of B = C*(union of U*^n A U^n), their commutativity
    defect, and the lattice of minimal projections B induces on the basis
    (chains with equal joint eigenvalue tuples)."""
    mats = []
    names = []
    Un = np.eye(m.dim)
    for n in range(n_max + 1):
        for name in m.a_gens:
            mats.append(Un.T @ m.a_matrix(name) @ Un)
            names.append(f"U*^{n} {name} U^{n}")
        Un = Un @ m.U
    defect = 0.0
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            defect = max(defect, _norm(mats[i] @ mats[j] - mats[j] @ mats[i]))
    # joint-eigenvalue partition
    tuples = {}
    for i in range(m.dim):
        key = tuple(round(float(M[i, i]), 8) for M in mats)
        tuples.setdefault(key, []).append(i)
    projections = []
    for key, idxs in tuples.items():
        P = np.zeros((m.dim, m.dim))
        for i in idxs:
            P[i, i] = 1.0
        projections.append(P)
    return BAlgebra(tuple(mats), tuple(names), defect, tuple(projections))


def verify_reversibility(m: FiniteModel, B: BAlgebra) -> OperatorCheckReport:
    """Generalized-inverse identities of delta(b) = UbU* on B, and
    invariance of B under conjugation by U and U*."""
    U = m.U
    rep = OperatorCheckReport()
    diag_basis = np.array([np.diag(M) for M in B.mats])  # rows span diag(B)
    r1 = r2 = r_mem_down = r_mem_up = r_ideal = 0.0
    for M in B.mats:
        d = _delta(U, M)
        ds = _delta_star(U, M)
        r1 = max(r1, _norm(_delta(U, _delta_star(U, d)) - d))
        r2 = max(r2, _norm(_delta_star(U, _delta(U, ds)) - ds))
        for cand, which in ((d, "down"), (ds, "up")):
            off = _norm(_offdiag(cand))
            v = np.diag(cand)
            coef, res, *_ = np.linalg.lstsq(diag_basis.T, v, rcond=None)
            dist = float(np.linalg.norm(diag_basis.T @ coef - v))
            if which == "down":
                r_mem_down = max(r_mem_down, off + dist)
            else:
                r_mem_up = max(r_mem_up, off + dist)
        r_ideal = max(r_ideal, _norm(_delta(U, ds) - U @ U.T @ M))
    rep.record("delta_dstar_delta=delta", r1)
    rep.record("dstar_delta_dstar=dstar", r2)
    rep.record("UBU*_in_B", r_mem_down)
    rep.record("U*BU_in_B", r_mem_up)
    rep.record("delta_range_is_UU*B", r_ideal)
    rep.record("B_commutative", B.commutativity_defect)
    return rep


@dataclass(frozen=True)
class IdealData:
    UstarU: np.ndarray
    UUstar: np.ndarray
    Q: np.ndarray
    P: np.ndarray
    kernel_classes: tuple      # index sets of x0-classes with delta = 0
    ideal_classes: tuple       # index sets annihilated by U*U


def _x0_classes(m: FiniteModel) -> list[tuple[int, ...]]:
    classes: dict = {}
    for i, c in enumerate(m.chains):
        classes.setdefault(round(c.coords[0], 9), []).append(i)
    return [tuple(v) for _, v in sorted(classes.items())]


def kernel_annihilator_check(m: FiniteModel):
    """ker(delta restricted to A) versus the ideal (1-U*U)A intersected
    with A, the carrier Q of that ideal, and the bound U*U <= P = 1 - Q.

    A is the algebra of functions of the zeroth coordinate, i.e. diagonal
    matrices constant on x0-classes of the basis."""
    U = m.U
    rep = OperatorCheckReport()
    UstarU = U.T @ U
    UUstar = U @ U.T
    classes = _x0_classes(m)
    kernel, ideal = [], []
    for cls in classes:
        e = np.zeros((m.dim, m.dim))
        for i in cls:
            e[i, i] = 1.0
        if _norm(_delta(U, e)) <= THRESHOLD:
            kernel.append(cls)
        if _norm(UstarU @ e) <= THRESHOLD:
            ideal.append(cls)
    rep.record("ker_delta_equals_(1-U*U)A_cap_A",
               0.0 if kernel == ideal else 1.0)
    support = sorted(i for cls in kernel for i in cls)
    Q = np.zeros((m.dim, m.dim))
    for i in support:
        Q[i, i] = 1.0
    P = np.eye(m.dim) - Q
    gap = np.diag(P - UstarU)
    rep.record("U*U_leq_P", float(max(0.0, -gap.min())) if gap.size else 0.0)
    r_comm = max((_norm(Q @ m.a_matrix(n) - m.a_matrix(n) @ Q)
                  for n in m.a_gens), default=0.0)
    rep.record("Q_in_commutant_of_A", r_comm)
    data = IdealData(UstarU, UUstar, Q, P, tuple(kernel), tuple(ideal))
    return data, rep


def spectrum_matches_extension(m: FiniteModel, B: BAlgebra) -> OperatorCheckReport:
    """The finite Gelfand shadow: joint eigenvalue tuples of B separate
    exactly the distinct chains, and conjugation by U implements the
    extension dynamics on the index set."""
    rep = OperatorCheckReport()
    tuples = set()
    for i in range(m.dim):
        tuples.add(tuple(round(float(M[i, i]), 8) for M in B.mats))
    rep.record("B_separates_chains",
               0.0 if len(tuples) == m.dim else 1.0)
    index = {c.key(): j for j, c in enumerate(m.chains)}
    bad = 0
    for i, c in enumerate(m.chains):
        row = np.nonzero(m.U[i])[0]
        if not m.spec.system.in_domain(c.coords[0]):
            if len(row) != 0:
                bad += 1
            continue
        img = alpha_tilde(m.spec, c)
        if img.terminal and img.depth > m.closure_depth:
            continue
        img = _canonical(m.spec, img, m.closure_depth)
        j = index.get(img.key())
        if j is None:
            continue
        if len(row) != 1 or row[0] != j:
            bad += 1
    rep.record("U_implements_chain_shift", float(bad))
    return rep


def full_report(m: FiniteModel, n_max: Optional[int] = None) -> OperatorCheckReport:
    """All registered checks on one model."""
    if n_max is None:
        n_max = max(c.depth for c in m.chains)
    rep = verify_coefficient_relations(m)
    B = build_B(m, n_max)
    rep = rep.merge(verify_reversibility(m, B))
    _, krep = kernel_annihilator_check(m)
    rep = rep.merge(krep)
    rep = rep.merge(spectrum_matches_extension(m, B))
    return rep


# ---------------------------------------------------------------------------
# Reference models


def constant_model(p: float = 1.0 / 3.0, n_points: int = 3,
                   depth: int = 3) -> FiniteModel:
    """The constant map onto p with Y = M: each finite stratum is a copy
    of M, and the infinite part is the single constant chain.

    p should stay off the sample grid: a grid point y = p would make the
    terminal chain (p, ..., p) and the depth-capped constant chain agree
    in every stored coordinate, and no function of the coordinates can
    separate them at finite depth."""
    from .core import make_constant_system
    spec = ExtensionSpec(make_constant_system(p), ((0.0, 1.0),))
    seeds = [Chain((j / (n_points - 1),), True) for j in range(n_points)]
    seeds.append(Chain((p,) * (depth + 1), False))
    return build_model(spec, seeds, depth)


def rotation_model(tau: float = 1.0 / 3.0, depth: int = 6) -> FiniteModel:
    """A rigid rotation with Y a single point: a finite ladder of strata."""
    from .core import make_rotation_system
    spec = ExtensionSpec(make_rotation_system(tau), ((0.0, 0.0),))
    seeds = [Chain((0.0,), True)]
    return build_model(spec, seeds, depth)


def logistic_period3_model(depth: int = 6) -> FiniteModel:
    """The superstable period-3 orbit of the logistic family as an exact
    finite invariant set; the extension dynamics is a cyclic permutation
    of its infinite chains (the base map is bijective on the orbit)."""
    eta, nu = _logistic.window_boundaries(1)

    def g(lam: float) -> float:
        return _logistic._iterate(lam, 0.5, 3) - 0.5

    a, b = eta + 1e-9, nu
    ga = g(a)
    for _ in range(200):
        mid = 0.5 * (a + b)
        gm = g(mid)
        if gm == 0.0 or b - a < 1e-15:
            break
        if ga * gm <= 0.0:
            b = mid
        else:
            a, ga = mid, gm
    lam = 0.5 * (a + b)
    orbit = [0.5]
    for _ in range(2):
        orbit.append(4.0 * lam * orbit[-1] * (1.0 - orbit[-1]))

    def fwd(x: float) -> float:
        for k, pt in enumerate(orbit):
            if abs(x - pt) <= 1e-7:
                return orbit[(k + 1) % 3]
        raise ValueError(f"{x} is not on the invariant orbit")

    def inv(y: float):
        for k, pt in enumerate(orbit):
            if abs(y - pt) <= 1e-7:
                return orbit[(k - 1) % 3]
        return None

    system = PartialMapSystem(
        space=UNIT_INTERVAL,
        domain=((0.0, 1.0),),
        forward_map=fwd,
        branches=(Branch("only", (0.0, 1.0), inv),),
        name=f"logistic-period3(lam={lam})",
    )
    spec = ExtensionSpec(system, ())
    seeds = []
    for k in range(3):
        coords = [orbit[(k - j) % 3] for j in range(depth + 1)]
        seeds.append(Chain(tuple(coords), False))
    return build_model(spec, seeds, depth)
