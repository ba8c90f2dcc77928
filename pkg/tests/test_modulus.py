import math

import numpy as np
import pytest

from instances import exa2, fixture, random_graph_instance, random_polyhedron
from qlip import linalg, model, qp
from qlip import modulus as mo
from qlip.errors import AnalysisError, DimensionMismatchError
from qlip.linalg import VectorNorm

TOL = 1e-8


def sample_unit_ball(rng, kind, dim, count):
    """Points of the unit ball of ``kind``, most of them on its boundary."""
    if kind is VectorNorm.LINF:
        X = rng.uniform(-1, 1, (count, dim))
        snap = rng.random((count, dim)) < 0.5
        return np.where(snap, np.sign(X), X)
    if kind is VectorNorm.L2:
        X = rng.standard_normal((count, dim))
        return X / np.linalg.norm(X, axis=1, keepdims=True)
    X = rng.exponential(size=(count, dim)) * rng.choice((-1, 1), (count, dim))
    return X / np.abs(X).sum(axis=1, keepdims=True)


def sampled_operator_norm(B, kind, d, rng, count):
    n = B.shape[0]
    alpha = sample_unit_ball(rng, kind.dual, n, count)
    beta = sample_unit_ball(rng, VectorNorm.LINF, d, count) if d else np.zeros((count, 0))
    Y = np.hstack([alpha, beta]) @ B.T
    if kind is VectorNorm.L2:
        return float(np.max(np.linalg.norm(Y, axis=1)))
    if kind is VectorNorm.L1:
        return float(np.max(np.abs(Y).sum(axis=1)))
    return float(np.max(np.abs(Y)))


def test_assemble_md():
    exa32 = fixture("exa32")
    assert np.array_equal(mo.assemble_MD(exa32, (0, 1)).M,
                          [[1, 0, -1, 0], [0, 0, 0, 1], [-1, 0, 0, 0], [0, 1, 0, 0]])
    assert np.array_equal(mo.assemble_MD(exa32, ()).M, exa32.Q)
    assert np.array_equal(mo.assemble_MD(fixture("exa1"), (0,)).M, [[1, 0, -1], [0, 1, 0], [-1, 0, 0]])


def test_md_nonsingular():
    exa32 = fixture("exa32")
    assert not mo.md_nonsingular(exa32, (0,))
    assert mo.md_nonsingular(exa32, (0, 1))
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 4))
        Q = rng.standard_normal((n, n))
        inst = model.validate(Q @ Q.T + np.eye(n), rng.standard_normal((n, n)), np.ones(n), np.zeros(n))
        for k in range(n + 1):
            assert mo.md_nonsingular(inst, tuple(range(k)))


@pytest.mark.parametrize("B, d, expected", [
    ([[0, 0, -1], [0, 1, 0]], 1, math.sqrt(2)),
    ([[1, 0], [0, 1]], 0, 1.0),
    ([[0, 0, -1, 0], [0, 0, 0, -10]], 2, math.sqrt(101)),
])
def test_operator_norm_examples(B, d, expected):
    res = mo.operator_norm(np.array(B, dtype=float), VectorNorm.L2, d)
    assert abs(res.value - expected) <= TOL
    assert abs(mo.evaluate_direction(B, VectorNorm.L2, res) - expected) <= TOL


def test_operator_norm_rejects_bad_shapes_and_caps():
    with pytest.raises(DimensionMismatchError):
        mo.operator_norm(np.zeros((2, 3)), VectorNorm.L2, 2)
    with pytest.raises(DimensionMismatchError):
        mo.operator_norm(np.zeros((1, 22)), VectorNorm.L2, 21)


def test_operator_norm_hard_case():
    # B1'B1 has a double top eigenvalue and v is orthogonal to it
    B = np.array([[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0], [0.0, 0.0, 0.0, 0.5]])
    res = mo.operator_norm(B, VectorNorm.L2, 1)
    assert abs(res.value - math.sqrt(1.25)) <= TOL
    assert abs(mo.evaluate_direction(B, VectorNorm.L2, res) - res.value) <= TOL


@pytest.mark.parametrize("kind", list(VectorNorm))
def test_operator_norm_dominates_samples_and_is_attained(kind):
    rng = np.random.default_rng(1)
    for _ in range(20):
        n, d = int(rng.integers(1, 4)), int(rng.integers(0, 4))
        B = rng.standard_normal((n, n + d))
        res = mo.operator_norm(B, kind, d)
        assert abs(mo.evaluate_direction(B, kind, res) - res.value) <= TOL * max(1, res.value)
        assert linalg.dual_norm(res.alpha_star, kind) <= 1 + 1e-12
        assert np.all(np.abs(res.beta_star) <= 1)
        sampled = sampled_operator_norm(B, kind, d, rng, 20000)
        assert sampled <= res.value + TOL
        assert sampled >= 0.9 * res.value


@pytest.mark.parametrize("kind", list(VectorNorm))
def test_operator_norm_homogeneity(kind):
    rng = np.random.default_rng(2)
    for _ in range(20):
        n, d = int(rng.integers(1, 4)), int(rng.integers(0, 3))
        B = rng.standard_normal((n, n + d))
        base = mo.operator_norm(B, kind, d).value
        for t in (0.5, 2.0, 10.0):
            assert abs(mo.operator_norm(t * B, kind, d).value - t * base) <= TOL * max(1, t * base)


def test_lip_sd_table():
    for alpha in (1.0, 1 / 3, 2.0):
        inst = exa2(alpha)
        expected = {(0, 1): 1.0, (2,): math.sqrt(1 + 1 / alpha**2), (0, 2): math.sqrt(5), (1, 2): math.sqrt(5)}
        for D, value in expected.items():
            assert abs(mo.lip_SD(inst, D) - value) <= TOL
    assert mo.lip_SD(fixture("exa32"), (0,)) == math.inf


def test_lip_modulus_reference_examples():
    rep = mo.lip_modulus(fixture("exa1"))
    assert rep.aubin and abs(rep.modulus - math.sqrt(101)) <= TOL and rep.attaining_D == (0, 1)
    assert abs(rep.per_D[(0,)].lip_SD - math.sqrt(2)) <= TOL
    rep = mo.lip_modulus(exa2(1 / 3))
    assert abs(rep.modulus - math.sqrt(10)) <= TOL and rep.attaining_D == (2,)
    for alpha in (1.0, 1 / 3, 2.0):
        assert abs(mo.lip_modulus(exa2(alpha)).modulus - math.sqrt(1 + max(2, 1 / alpha) ** 2)) <= TOL
    rep = mo.lip_modulus(fixture("exa32"))
    assert not rep.aubin and rep.modulus == math.inf
    assert not rep.per_D[(0,)].nonsingular and rep.per_D[(0, 1)].nonsingular


def test_lip_modulus_restricted():
    value, D = mo.lip_modulus_restricted(exa2(1 / 3), (0, 2))
    assert abs(value - math.sqrt(10)) <= TOL and D == (2,)
    value, D = mo.lip_modulus_restricted(exa2(1.0), (0, 1))
    assert abs(value - 1.0) <= TOL and D == (0, 1)
    with pytest.raises(AnalysisError) as err:
        mo.lip_modulus_restricted(exa2(1.0), (0,))
    assert err.value.code == "D0_NOT_IN_FAMILY"
    free = model.validate(np.diag([2.0, 4.0]), [[1, 0]], [10], [0, 0])
    value, _ = mo.lip_modulus_restricted(free, ())
    assert abs(value - 0.5) <= TOL


def test_lip_modulus_errors():
    with pytest.raises(AnalysisError) as err:
        mo.lip_modulus(model.validate(np.eye(1), [[1.0], [-1.0]], [0, 0], [0]))
    assert err.value.code == "SCQ_FAILS"
    with pytest.raises(AnalysisError) as err:
        mo.lip_modulus(model.validate(np.zeros((1, 1)), [[1.0]], [0], [1]))
    assert err.value.code == "NOMINAL_UNBOUNDED"


def test_unconstrained_instance():
    rep = mo.lip_modulus(model.validate(np.eye(2), np.zeros((0, 2)), [], [1, 1]))
    assert rep.aubin and rep.minimal == ((),) and abs(rep.modulus - 1) <= TOL


# ||A_D^{-1}|| is the operator norm from l_inf (on b_D) to the variable norm:
# for A_D = I under l2 the box corner (1, 1) gives sqrt(2), and for
# diag(2, 1/2) it gives ||(1/2, 2)|| = sqrt(17)/2.
@pytest.mark.parametrize("A_D, expected", [
    ([[1, 0], [0, 1]], math.sqrt(2)),
    ([[2, 0], [0, 0.5]], math.sqrt(17) / 2),
    ([[1, 1], [1, -1]], 1.0),
])
def test_linear_case_norms_examples(A_D, expected):
    inst = model.validate(np.zeros((2, 2)), A_D, [0, 0], [0, 0])
    norms = mo.linear_case_norms(inst, (0, 1))
    for value in (norms.direct, norms.dual_min, norms.distance_form):
        assert abs(value - expected) <= TOL


def test_linear_case_norms_against_box_sampling():
    A_D = np.array([[1.0, 1.0], [1.0, -1.0]])
    inst = model.validate(np.zeros((2, 2)), A_D, [0, 0], [0, 0])
    norms = mo.linear_case_norms(inst, (0, 1))
    rng = np.random.default_rng(3)
    beta = rng.uniform(-1, 1, (10**6, 2))
    sampled = float(np.max(np.linalg.norm(np.linalg.solve(A_D, beta.T), axis=0)))
    assert sampled <= norms.direct + TOL
    assert abs(sampled - norms.direct) <= 1e-3
    assert abs(norms.direct - norms.dual_min) <= TOL and abs(norms.direct - norms.distance_form) <= TOL


def test_linear_case_norms_errors():
    with pytest.raises(AnalysisError) as err:
        mo.linear_case_norms(fixture("exa1"), (0, 1))
    assert err.value.code == "NOT_LINEAR"
    lin = model.validate(np.zeros((2, 2)), [[1, 0], [0, 1]], [0, 0], [0, 0])
    with pytest.raises(AnalysisError) as err:
        mo.linear_case_norms(lin, (0,))
    assert err.value.code == "NOT_SQUARE"


@pytest.mark.parametrize("kind", list(VectorNorm))
def test_linear_case_norms_agree(kind):
    rng = np.random.default_rng(4)
    for _ in range(30):
        n = int(rng.integers(1, 4))
        A = rng.standard_normal((n, n))
        inst = model.validate(np.zeros((n, n)), A, np.zeros(n), np.zeros(n), kind)
        norms = mo.linear_case_norms(inst, tuple(range(n)))
        scale = max(1.0, norms.direct)
        assert abs(norms.direct - norms.dual_min) <= TOL * scale
        assert abs(norms.direct - norms.distance_form) <= TOL * scale


def test_lip_projection_examples():
    exa1 = fixture("exa1")
    rep = mo.lip_projection(exa1.A, exa1.b_bar, [0, 0])
    assert abs(rep.modulus - math.sqrt(101)) <= TOL and np.allclose(rep.x_bar, [1, 0])
    rep = mo.lip_projection(exa1.A, exa1.b_bar, [3, 1])
    assert rep.extended == ((),) and abs(rep.modulus - 1) <= TOL
    rep = mo.lip_projection([[0, 1]], [0], [0, 5])
    assert np.allclose(rep.x_bar, [0, 0]) and rep.extended == ((0,),)
    assert abs(rep.modulus - math.sqrt(2)) <= TOL


def test_projection_closed_form_matches_generic_path():
    rng = np.random.default_rng(5)
    for _ in range(30):
        A, b = random_polyhedron(rng)
        z = 2 * rng.standard_normal(A.shape[1])
        rep = mo.lip_projection(A, b, z)
        assert abs(rep.modulus - rep.cross_check) <= TOL * max(1, rep.modulus)


def test_structural_properties_on_random_instances():
    rng = np.random.default_rng(6)
    for _ in range(100):
        inst = random_graph_instance(rng, norm=VectorNorm(rng.choice(["l1", "l2", "linf"])))
        rep = mo.lip_modulus(inst)
        for D, p in rep.per_D.items():
            stacked = np.vstack([inst.Q, inst.A[list(D), :]])
            assert p.nonsingular == (linalg.kernel_basis(stacked) == [])
        # nonsingularity is inherited by independent supersets
        for D0 in rep.extended:
            for D in rep.extended:
                if set(D0) <= set(D) and rep.per_D[D0].nonsingular:
                    assert rep.per_D[D].nonsingular
        if rep.aubin:
            best_minimal = max(rep.per_D[D].lip_SD for D in rep.minimal)
            assert best_minimal <= rep.modulus + TOL
            for D0 in rep.extended:
                value, _ = mo.lip_modulus_restricted(inst, D0, rep)
                assert value >= rep.per_D[D0].lip_SD - TOL
                for D in rep.extended:
                    if set(D) <= set(D0):
                        assert mo.lip_modulus_restricted(inst, D, rep).value <= value + TOL


def test_non_unique_nominal_warns():
    rep = mo.lip_modulus(fixture("exa32"))
    assert any(w.startswith("NON_UNIQUE_NOMINAL") for w in rep.warnings)


def test_solution_block_matches_sensitivity():
    inst = fixture("exa1")
    B = mo.solution_block(inst, (0, 1))
    dc, db = np.array([0.01, 0.02]), np.array([0.003, -0.001])
    x = qp.solve(inst, inst.nominal.shifted(dc, db), check_unique=False).x
    assert np.allclose(x - [1, 0], B @ np.concatenate([-dc, db]))
