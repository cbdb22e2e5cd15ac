"""Operator-model tests: partial-permutation structure of U, the
coefficient-algebra relations, generalized inverses, kernel/annihilator and
carrier identities, and spectrum separation on the three reference models."""

import numpy as np
import pytest

from revext import operator_model as om
from revext.extension import Chain, ExtensionSpec, alpha_tilde
from revext.logistic import extension_spec


@pytest.fixture(scope="module")
def models():
    return {
        "constant": om.constant_model(),
        "rotation": om.rotation_model(),
        "period3": om.logistic_period3_model(),
    }


def test_partial_permutation_structure(models):
    for m in models.values():
        U = m.U
        assert set(np.unique(U)) <= {0.0, 1.0}
        assert np.all(U.sum(axis=1) <= 1.0)
        assert np.all(U.sum(axis=0) <= 1.0)
        # powers stay partial permutations
        P = np.eye(m.dim)
        for _ in range(m.dim):
            P = P @ U
            assert set(np.unique(P)) <= {0.0, 1.0}
            assert np.all(P.sum(axis=1) <= 1.0)


def test_coefficient_relations(models):
    for m in models.values():
        rep = om.verify_coefficient_relations(m)
        assert rep.all_pass(), rep.residuals


def test_reversibility(models):
    for m in models.values():
        B = om.build_B(m, n_max=max(c.depth for c in m.chains))
        assert B.commutativity_defect < 1e-12
        rep = om.verify_reversibility(m, B)
        assert rep.all_pass(), rep.residuals


def test_kernel_annihilator_and_carrier(models):
    for name, m in models.items():
        data, rep = om.kernel_annihilator_check(m)
        assert rep.all_pass(), (name, rep.residuals)
        # Q is the support projection of the kernel classes
        assert np.trace(data.Q) == sum(len(c) for c in data.kernel_classes)


def test_rotation_model_is_ladder(models):
    m = models["rotation"]
    # strata 0..depth, one chain each
    assert m.dim == m.closure_depth + 1
    depths = sorted(c.depth for c in m.chains)
    assert depths == list(range(m.closure_depth + 1))
    # the deepest stratum is compressed away: its U-row is zero
    deepest = max(range(m.dim), key=lambda i: m.chains[i].depth)
    assert not m.U[deepest].any()
    data, _ = om.kernel_annihilator_check(m)
    # exactly the shallowest chain is not in the range of U
    assert np.trace(data.UstarU) == m.dim - 1


def test_period3_model_is_unitary_cycle(models):
    m = models["period3"]
    assert m.dim == 3
    U = m.U
    assert np.allclose(U.T @ U, np.eye(3))
    assert np.allclose(np.linalg.matrix_power(U, 3), np.eye(3))
    assert not np.allclose(U, np.eye(3))
    data, _ = om.kernel_annihilator_check(m)
    assert data.kernel_classes == ()  # delta injective on A


def test_constant_model_counts(models):
    m = models["constant"]
    # 3 grid points at each of 4 depths, plus the constant infinite chain
    assert m.dim == 13
    assert sum(1 for c in m.chains if not c.terminal) == 1


def test_spectrum_matches_extension(models):
    for m in models.values():
        B = om.build_B(m, n_max=max(c.depth for c in m.chains))
        rep = om.spectrum_matches_extension(m, B)
        assert rep.all_pass(), rep.residuals


def test_full_report_json(models, tmp_path):
    rep = om.full_report(models["rotation"])
    path = tmp_path / "report.json"
    rep.dump(path)
    import json
    doc = json.loads(path.read_text())
    assert all(entry["pass"] for entry in doc.values())
    assert "partial_isometry_UU*U=U" in doc


def test_build_model_rejects_invalid_seed():
    spec = extension_spec(0.6)
    with pytest.raises(ValueError):
        om.build_model(spec, [Chain((0.5, 0.9), True)], closure_depth=2)


def test_closure_overflow():
    spec = extension_spec(1.0)  # full binary backward tree
    seeds = [om._canonical(spec, Chain((0.3,), False), 6)]
    with pytest.raises(om.ClosureOverflow):
        om.build_model(spec, seeds, closure_depth=6, size_cap=10)


def test_canonical_depth_invariance():
    # alpha_tilde on a canonical non-terminal chain stays canonical and
    # U row targets agree with the chain-level dynamics
    m = om.logistic_period3_model(depth=4)
    for i, c in enumerate(m.chains):
        img = om._canonical(m.spec, alpha_tilde(m.spec, c), m.closure_depth)
        j = [k for k, d in enumerate(m.chains) if d.key() == img.key()]
        assert len(j) == 1 and m.U[i, j[0]] == 1.0
