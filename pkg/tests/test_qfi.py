import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import (
    bloch,
    random_commuting,
    random_density,
    random_hermitian,
    random_model,
    random_pure_state,
    random_unitary,
)
from qtradeoff import (
    Classification,
    DensityMatrix,
    NoIntersection,
    NonRegularModel,
    RankDeficient,
    UnitaryModel,
    classify,
    fisher_pair,
)
from qtradeoff.closed_forms import single_u_state
from qtradeoff.qfi import (
    bound_intersections,
    capital_delta,
    d_invariance_check,
    delta,
    derivatives,
    fisher_matrices_at,
    fisher_theta_invariance,
    pure_state_delta,
    rld_fisher,
    rld_hyperbola,
    sld_fisher,
    sld_operators,
    unitary,
)

X_FAM = np.diag([1.0, 2.0, 3.0])
Y_FAM = np.diag([1.5, 5.0, 1.0])


@pytest.fixture
def family_model():
    return UnitaryModel.from_arrays(single_u_state(1 / 12), X_FAM, Y_FAM)


@pytest.fixture
def qubit_model():
    return UnitaryModel.from_arrays(
        (np.eye(2) + bloch([0.3, -0.2, 0.5])) / 2, bloch([1.0, 0.2, 0.0]), bloch([0.1, 1.0, 0.4])
    )


def kron_sld(rho, drho):
    """Independent SLD solve: (rho (x) I + I (x) rho^T) vec(L) = 2 vec(D), row-major vec."""
    d = rho.shape[0]
    M = np.kron(rho, np.eye(d)) + np.kron(np.eye(d), rho.T)
    return np.linalg.solve(M, 2 * drho.ravel()).reshape(d, d)


# -- derivatives and SLD -----------------------------------------------------


def test_derivatives_vanish_for_maximally_mixed():
    m = UnitaryModel.from_arrays(np.eye(3) / 3, random_hermitian(np.random.default_rng(0), 3), X_FAM)
    d1, d2 = derivatives(m)
    assert np.max(np.abs(d1)) < 1e-15 and np.max(np.abs(d2)) < 1e-15


def test_qubit_derivative_is_cross_product():
    s = np.array([0.3, -0.2, 0.5])
    x = np.array([1.0, 0.2, 0.0])
    m = UnitaryModel.from_arrays((np.eye(2) + bloch(s)) / 2, bloch(x), np.eye(2))
    d1, d2 = derivatives(m)
    assert np.allclose(d1, bloch(np.cross(x, s)), atol=1e-15)
    assert np.array_equal(d2, np.zeros((2, 2)))


def test_sld_zero_derivative():
    rho = DensityMatrix.from_array(random_density(np.random.default_rng(1), 3))
    L1, L2 = sld_operators(rho, (np.zeros((3, 3)), np.zeros((3, 3))))
    assert np.array_equal(L1, np.zeros((3, 3))) and np.array_equal(L2, np.zeros((3, 3)))


def test_sld_two_level_diagonal_formula():
    rho = DensityMatrix.from_array(np.diag([0.2, 0.8]))
    D = np.array([[0.0, 0.3 - 0.1j], [0.3 + 0.1j, 0.0]])
    L1, _ = sld_operators(rho, (D, D))
    assert np.allclose(L1, 2 * D / 1.0, atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_sld_matches_kronecker_solve(d):
    rng = np.random.default_rng(d)
    for _ in range(50):
        m = random_model(rng, d, commuting=False)
        drho = derivatives(m)
        Ls = sld_operators(m.rho0, drho)
        rho = m.rho0.matrix
        for L, D in zip(Ls, drho):
            assert np.max(np.abs((L @ rho + rho @ L) / 2 - D)) < 1e-9
            assert np.allclose(L, kron_sld(rho, D), atol=1e-10)
            assert np.allclose(L, L.conj().T, atol=1e-15)


def test_sld_fisher_real_symmetric_psd():
    rng = np.random.default_rng(11)
    for _ in range(100):
        m = random_model(rng, int(rng.integers(2, 5)))
        JS = sld_fisher(m.rho0, *sld_operators(m.rho0, derivatives(m)))
        assert JS.dtype == float and np.array_equal(JS, JS.T)
        assert np.linalg.eigvalsh(JS)[0] > -1e-12


def test_rld_matches_direct_trace():
    rng = np.random.default_rng(12)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        m = random_model(rng, d)
        rho = m.rho0.matrix
        inv = np.linalg.inv(rho)
        cs = [m.X @ rho - rho @ m.X, m.Y @ rho - rho @ m.Y]
        oracle = np.array([[-np.trace(cs[j] @ cs[i] @ inv) for j in range(2)] for i in range(2)])
        assert np.allclose(rld_fisher(m), oracle, atol=1e-10)


def test_rld_zero_for_maximally_mixed():
    m = UnitaryModel.from_arrays(np.eye(3) / 3, X_FAM, random_hermitian(np.random.default_rng(2), 3))
    assert np.max(np.abs(rld_fisher(m))) < 1e-14


# -- delta ---------------------------------------------------------------------


def test_delta_family_value(family_model):
    # (1/det) * 2i u^{3/2}/27 * [(y x x).1] with det = 1/36 and (y x x).1 = 7.5
    expected = 1j * 36 * 2 * (1 / 12) ** 1.5 / 27 * 7.5
    assert abs(delta(family_model) - expected) < 1e-12
    assert abs(expected.imag - 0.4811) < 1e-4


def test_delta_zero_for_diagonal_state():
    rho = np.diag([0.5, 0.3, 0.2])
    m = UnitaryModel.from_arrays(rho, np.diag([1.0, 2, 3]), np.diag([3.0, 1, 2]))
    assert delta(m) == 0


def test_delta_zero_for_real_model():
    rng = np.random.default_rng(4)
    for _ in range(20):
        g = rng.normal(size=(3, 3))
        rho = g @ g.T + 0.3 * np.eye(3)
        rho /= np.trace(rho)
        X = rng.normal(size=(3, 3))
        Y = rng.normal(size=(3, 3))
        m = UnitaryModel.from_arrays(rho, X + X.T, Y + Y.T)
        assert abs(delta(m)) < 1e-12


def test_rank_deficient_state_rejected():
    with pytest.raises(RankDeficient):
        UnitaryModel.from_arrays(single_u_state(1 / 3), X_FAM, Y_FAM)
    with pytest.raises(RankDeficient):
        UnitaryModel.from_arrays(np.diag([1.0, 0.0]), bloch([1, 0, 0]), bloch([0, 1, 0]))


def test_delta_equals_rld_antisymmetric_part():
    rng = np.random.default_rng(5)
    for _ in range(200):
        m = random_model(rng, int(rng.integers(2, 5)))
        JR = rld_fisher(m)
        assert abs(delta(m) - (JR[0, 1] - JR[1, 0])) < 1e-10 * (1 + abs(delta(m)))


# -- Fisher pair, Delta and intersections ---------------------------------------


def test_family_fisher_pair_frozen(family_model):
    fp = fisher_pair(family_model)
    assert fp.J_S_inv[0, 0] == pytest.approx(2.9739130434782597, rel=1e-12)
    assert fp.J_S_inv[1, 1] == pytest.approx(0.6260869565217396, rel=1e-12)
    assert abs(fp.J_R_inv[0, 0].real - 2.55286) < 1e-5
    assert abs(fp.J_R_inv[1, 1].real - 0.53744) < 1e-5
    assert abs(fp.im12 - -0.30355) < 1e-5
    assert abs(capital_delta(fp) - 0.05481812925133658) < 1e-12


def test_non_regular_model_raises():
    with pytest.raises(NonRegularModel):
        fisher_pair(UnitaryModel.from_arrays(np.eye(3) / 3, X_FAM, Y_FAM))
    # commuting qubit generators move the state along a single direction
    with pytest.raises(NonRegularModel):
        fisher_pair(
            UnitaryModel.from_arrays(
                (np.eye(2) + bloch([0.2, 0.1, 0.4])) / 2, bloch([1, 1, 0]), bloch([2, 2, 0])
            )
        )


def test_qubit_is_d_invariant(qubit_model):
    fp = fisher_pair(qubit_model)
    assert d_invariance_check(fp)
    assert capital_delta(fp) == pytest.approx(fp.im12**2, rel=1e-9)


def test_family_not_d_invariant(family_model):
    assert not d_invariance_check(fisher_pair(family_model))


def test_intersections_on_both_bounds(family_model):
    fp = fisher_pair(family_model)
    (a1, b1), (a2, b2) = bound_intersections(fp)
    assert a1 == fp.J_S_inv[0, 0]
    assert b2 == fp.J_S_inv[1, 1]
    assert b1 == pytest.approx(rld_hyperbola(fp, a1), rel=1e-12)
    assert b2 == pytest.approx(rld_hyperbola(fp, a2), rel=1e-12)
    assert np.allclose(
        [[a1, b1], [a2, b2]],
        [[2.9739130434782597, 0.7562798986749499], [3.5923295187060043, 0.6260869565217396]],
        rtol=1e-10,
    )


def test_intersections_absent(qubit_model):
    with pytest.raises(NoIntersection):
        bound_intersections(fisher_pair(qubit_model))


def test_hyperbola_domain(family_model):
    fp = fisher_pair(family_model)
    with pytest.raises(ValueError):
        rld_hyperbola(fp, fp.J_R_inv[0, 0].real)
    v = rld_hyperbola(fp, np.array([3.0, 10.0, 1e6]))
    assert np.all(np.diff(v) < 0) and v[-1] > fp.J_R_inv[1, 1].real


# -- classification ------------------------------------------------------------


def test_classify_examples(family_model, qubit_model):
    rep = classify(family_model)
    assert rep.classification is Classification.INTERSECTING
    assert rep.condition1 and rep.condition2 and not rep.d_invariant
    assert len(rep.intersections) == 2
    assert rep.delta1 == pytest.approx(0.6184164752277, rel=1e-9)
    assert rep.delta2 == pytest.approx(0.13019294215321, rel=1e-9)
    assert classify(qubit_model).classification is Classification.RLD_DOMINANT


def test_classify_no_tradeoff_for_real_model():
    rng = np.random.default_rng(6)
    g = rng.normal(size=(3, 3))
    rho = g @ g.T + 0.5 * np.eye(3)
    rho /= np.trace(rho)
    X = rng.normal(size=(3, 3))
    Y = rng.normal(size=(3, 3))
    rep = classify(UnitaryModel.from_arrays(rho, X + X.T, Y + Y.T))
    assert rep.classification is Classification.NO_TRADEOFF
    assert rep.capital_delta <= 1e-12 and rep.intersections == []


def test_classify_sld_dominant_exists():
    rng = np.random.default_rng(8)
    found = None
    for _ in range(200):
        rep = classify(random_model(rng, 3, commuting=False))
        if rep.classification is Classification.SLD_DOMINANT:
            found = rep
            break
    assert found is not None
    assert found.capital_delta <= 0 and found.condition1 and not found.d_invariant


def test_every_classification_consistent():
    rng = np.random.default_rng(9)
    for _ in range(300):
        rep = classify(random_model(rng, int(rng.integers(2, 5))))
        c = rep.classification
        assert (c is Classification.NO_TRADEOFF) == (not rep.condition1)
        if c is Classification.INTERSECTING:
            assert rep.capital_delta > 0 and len(rep.intersections) == 2
        if c is Classification.SLD_DOMINANT:
            assert rep.capital_delta <= 0
        if c is Classification.RLD_DOMINANT:
            assert rep.d_invariant


def test_report_json(family_model):
    d = json.loads(classify(family_model).to_json())
    assert d["classification"] == "INTERSECTING"
    assert d["delta"]["re"] == pytest.approx(0, abs=1e-12)
    assert d["delta"]["im"] == pytest.approx(0.48112522432468824, rel=1e-12)
    assert len(d["fisher"]["J_R"][0][1]) == 2


def test_model_json_round_trip(family_model):
    text = json.dumps(family_model.to_json())
    back = UnitaryModel.from_json(json.loads(text))
    assert np.array_equal(back.rho0.matrix, family_model.rho0.matrix)
    assert np.array_equal(back.X, family_model.X)
    with pytest.raises(ValueError, match="missing"):
        UnitaryModel.from_json({"rho0": family_model.to_json()["rho0"]})


def test_model_validation():
    with pytest.raises(ValueError, match="trace"):
        UnitaryModel.from_arrays(np.eye(2), bloch([1, 0, 0]), bloch([0, 1, 0]))
    with pytest.raises(ValueError, match="negative"):
        UnitaryModel.from_arrays(np.diag([1.2, -0.2]), bloch([1, 0, 0]), bloch([0, 1, 0]))
    with pytest.raises(ValueError, match="shape"):
        UnitaryModel.from_arrays(np.eye(2) / 2, np.eye(3), bloch([0, 1, 0]))
    with pytest.raises(ValueError, match="Hermitian"):
        UnitaryModel.from_arrays(np.eye(2) / 2, np.array([[0, 1], [0, 0]]), bloch([0, 1, 0]))


# -- pure states ---------------------------------------------------------------


def test_pure_state_delta_example():
    # 4 <0|[sigma_y, sigma_x]|0> = 4 * (-2i) <0|sigma_z|0> = -8i
    sx = bloch([1, 0, 0])
    sy = bloch([0, 1, 0])
    assert pure_state_delta([1, 0], sx, sy) == -8j


def test_pure_state_delta_commuting_zero():
    rng = np.random.default_rng(10)
    for d in (2, 3, 4):
        for _ in range(20):
            X, Y = random_commuting(rng, d)
            assert abs(pure_state_delta(random_pure_state(rng, d), X, Y)) < 1e-12


def test_pure_state_delta_validation():
    with pytest.raises(ValueError, match="norm"):
        pure_state_delta([1, 1], np.eye(2), np.eye(2))
    with pytest.raises(ValueError, match="dimensions"):
        pure_state_delta([1, 0], np.eye(3), np.eye(3))


# -- parameter shifts ----------------------------------------------------------


def test_unitary_is_unitary_and_zero_at_origin():
    rng = np.random.default_rng(13)
    X, Y = random_hermitian(rng, 3), random_hermitian(rng, 3)
    assert np.allclose(unitary(X, Y, (0.0, 0.0)), np.eye(3), atol=1e-15)
    U = unitary(X, Y, (0.4, -1.1))
    assert np.allclose(U @ U.conj().T, np.eye(3), atol=1e-13)


@pytest.mark.parametrize("theta", [(0.0, 0.0), (0.3, -0.7), (2.0, 5.5)])
def test_theta_invariance_commuting(theta):
    rng = np.random.default_rng(14)
    for d in (3, 4):
        for _ in range(10):
            m = random_model(rng, d, commuting=True)
            fp0 = fisher_pair(m)
            fp = fisher_theta_invariance(m, theta)
            assert np.allclose(fp.J_S, fp0.J_S, atol=1e-9)
            assert np.allclose(fp.J_R, fp0.J_R, atol=1e-9)


def test_theta_invariance_full_period():
    # integer spectra: a 2 pi shift returns exactly the same state
    m = UnitaryModel.from_arrays(single_u_state(0.1), np.diag([1.0, 2, 3]), np.diag([0.0, 1, 4]))
    fp = fisher_theta_invariance(m, (2 * math.pi, 0.0))
    assert np.allclose(fp.J_S_inv, fisher_pair(m).J_S_inv, atol=1e-12)


def test_theta_invariance_commuting_qubit_raw_matrices():
    # commuting qubit generators are non-regular, so compare raw matrices
    rng = np.random.default_rng(15)
    X, Y = random_commuting(rng, 2)
    m = UnitaryModel.from_arrays(random_density(rng, 2), X, Y)
    JS0, JR0 = fisher_matrices_at(m, (0.0, 0.0))
    JS, JR = fisher_matrices_at(m, (1.3, -0.4))
    assert np.allclose(JS, JS0, atol=1e-10) and np.allclose(JR, JR0, atol=1e-10)
    with pytest.raises(NonRegularModel):
        fisher_theta_invariance(m, (1.3, -0.4))


def test_theta_shift_requires_commuting(qubit_model):
    with pytest.raises(ValueError, match="non-commuting"):
        fisher_theta_invariance(qubit_model, (0.1, 0.2))


# -- invariants ----------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4), st.floats(-5, 5), st.floats(-5, 5))
def test_identity_shift_of_generators(seed, d, c1, c2):
    rng = np.random.default_rng(seed)
    m = random_model(rng, d, commuting=False)
    shifted = UnitaryModel(m.rho0, m.X + c1 * np.eye(d), m.Y + c2 * np.eye(d))
    a, b = fisher_pair(m), fisher_pair(shifted)
    assert np.allclose(a.J_S, b.J_S, atol=1e-9) and np.allclose(a.J_R, b.J_R, atol=1e-9)
    assert abs(delta(m) - delta(shifted)) < 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_unitary_covariance(seed, d):
    rng = np.random.default_rng(seed)
    m = random_model(rng, d, commuting=False)
    U = random_unitary(rng, d)
    r = UnitaryModel.from_arrays(U @ m.rho0.matrix @ U.conj().T, U @ m.X @ U.conj().T, U @ m.Y @ U.conj().T)
    a, b = fisher_pair(m), fisher_pair(r)
    assert np.allclose(a.J_S, b.J_S, atol=1e-9) and np.allclose(a.J_R, b.J_R, atol=1e-9)


def test_lowner_order_and_purely_imaginary_delta():
    rng = np.random.default_rng(16)
    for _ in range(300):
        m = random_model(rng, int(rng.integers(2, 5)))
        try:
            fp = fisher_pair(m)
        except NonRegularModel:
            continue
        assert fp.lowner_gap() >= -1e-9 * max(1.0, np.max(np.abs(fp.J_S_inv)))
        dl = delta(m)
        assert abs(dl.real) < 1e-12 * max(1.0, abs(dl))
