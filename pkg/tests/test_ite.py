import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from mzmbraid.ite import (
    AnnihilationError,
    Schedule,
    ScheduleStep,
    braid_schedule,
    convergence_curve,
    eig_hermitian,
    factor_commuting,
    fit_log_slope,
    ground_projector,
    ite_apply,
    ite_operator,
    ite_schedule,
)
from mzmbraid.majorana import spin_hamiltonians
from mzmbraid.pauli import OperatorSum, pauli_sum, to_dense

import oracles

H0, H1, H2 = spin_hamiltonians()


def random_state(seed, dim=8):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def unit(v):
    return v / np.linalg.norm(v)


def test_eigen_examples():
    assert np.allclose(eig_hermitian(pauli_sum(1, [(1, "X")])).eigenvalues, [-1, 1])
    dec = eig_hermitian(H0)
    assert dec.ground_energy == pytest.approx(-2)
    assert dec.ground_vectors().shape[1] == 2
    assert np.allclose(eig_hermitian(OperatorSum.identity(2)).eigenvalues, 1)
    assert dec.gap == pytest.approx(2)
    assert eig_hermitian(H1).gap == pytest.approx(1)


def test_rejects_non_hermitian():
    with pytest.raises(ValueError):
        eig_hermitian(np.array([[0, 1], [0, 0]]))


def test_ite_examples():
    s = random_state(0)
    assert np.array_equal(ite_apply(H0, 0, s), s)
    plus = np.array([1, 1]) / np.sqrt(2)
    out = ite_apply(pauli_sum(1, [(1, "Z")]), 5, plus)
    assert np.allclose(out, np.array([math.exp(-5), math.exp(5)]) / np.sqrt(2))
    out = ite_apply(H0, 5, oracles.XXX)
    assert np.linalg.norm(out) == pytest.approx(math.exp(10), rel=1e-12)


@pytest.mark.parametrize("h, ref", [(H0, oracles.H0), (H1, oracles.H1), (H2, oracles.H2)])
@pytest.mark.parametrize("t", [0.5, 2.0, 5.0])
def test_ite_operator_matches_expm(h, ref, t):
    want = expm(-ref * t)
    assert np.max(np.abs(ite_operator(h, t) - want)) <= 1e-12 * np.max(np.abs(want))


def test_negative_duration_rejected():
    with pytest.raises(ValueError):
        ite_apply(H0, -1, random_state(1))


def test_projector_examples():
    p0 = ground_projector(H0).matrix
    assert np.linalg.matrix_rank(p0) == 2
    assert np.allclose(p0 @ oracles.XXX, oracles.XXX)
    assert np.allclose(p0 @ oracles.XBAR, oracles.XBAR)
    p1 = ground_projector(H1).matrix
    assert np.linalg.matrix_rank(p1) == 2
    z1 = oracles.pauli("ZII")
    assert np.allclose(z1 @ p1, -p1)
    assert np.allclose(ground_projector(OperatorSum.identity(3)).matrix, np.eye(8))


@pytest.mark.parametrize("h", [H0, H1, H2])
def test_projector_idempotent(h):
    p = ground_projector(h).matrix
    assert np.linalg.norm(p @ p - p) <= 1e-10
    assert np.linalg.norm(p - p.conj().T) <= 1e-10


def test_infinite_time_is_projection():
    s = random_state(3)
    assert np.allclose(ite_apply(H1, math.inf, s), ground_projector(H1).matrix @ s)
    assert np.allclose(ite_operator(H2, math.inf), oracles.projector(oracles.H2))


def test_factor_examples():
    assert set(factor_commuting(H0)) == {pauli_sum(3, [(-1, "XXI")]), pauli_sum(3, [(-1, "IXX")])}
    assert factor_commuting(H1) == [pauli_sum(3, [(-1, "IXX")]), pauli_sum(3, [(0.5, "ZII"), (0.5, "III")])]
    assert factor_commuting(H2) == [pauli_sum(3, [(-1, "IXX")]), pauli_sum(3, [(-1, "XZY")])]


def test_factor_keeps_frustrated_terms_together():
    h = pauli_sum(2, [(1, "XI"), (1, "ZI"), (1, "IZ")])
    parts = factor_commuting(h)
    assert len(parts) == 2
    assert sum(parts[1:], parts[0]) == h


@pytest.mark.parametrize("h", [H0, H1, H2])
def test_factor_product_reproduces_exponential(h):
    prod = np.eye(8)
    for f in factor_commuting(h):
        prod = prod @ ite_operator(f, 5)
    assert np.max(np.abs(prod - ite_operator(h, 5))) <= 1e-10 * np.max(np.abs(ite_operator(h, 5)))


def test_schedule_examples():
    s = random_state(4)
    out, reports = ite_schedule(Schedule([ScheduleStep(H0, 5)]), s)
    assert np.linalg.norm(unit(out) - unit(ground_projector(H0).matrix @ s)) <= 1e-4
    assert reports[0].leakage < 1e-8
    out, _ = ite_schedule(Schedule([ScheduleStep(H0, 5)]), oracles.ZERO_3S)
    assert np.allclose(out, math.exp(10) * oracles.ZERO_3S)
    excited = np.linalg.eigh(oracles.H0)[1][:, -1]
    with pytest.raises(AnnihilationError):
        ite_schedule(Schedule([ScheduleStep(H0, math.inf)]), excited)


def test_schedule_validation():
    with pytest.raises(ValueError):
        Schedule(())
    with pytest.raises(ValueError):
        Schedule([ScheduleStep(H0, 5), ScheduleStep(pauli_sum(2, [(1, "XX")]), 5)])
    with pytest.raises(ValueError):
        Schedule([ScheduleStep(pauli_sum(1, [(1j, "X")]), 5)])
    with pytest.raises(ValueError):
        Schedule([ScheduleStep(H0, -2)])


def test_braid_schedule_labels():
    assert [s.label for s in braid_schedule()] == ["H0", "H1", "H2", "H0"]
    assert all(s.t == 5 for s in braid_schedule())


@pytest.mark.parametrize("h, gap", [(H0, 2.0), (H1, 1.0)])
def test_convergence_rate(h, gap):
    ts = range(1, 7)
    ys = convergence_curve(h, ts, random_state(0))
    assert abs(fit_log_slope(ts, ys) + gap) <= 0.05 * gap


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(0.1, 6), st.integers(0, 10_000))
def test_constant_shift_invariance(c, t, seed):
    s = random_state(seed)
    a = unit(ite_apply(H1, t, s))
    b = unit(ite_apply(H1 + c, t, s))
    assert np.max(np.abs(a - b)) <= 1e-12


def test_dense_input_accepted():
    d = to_dense(H2)
    assert np.allclose(eig_hermitian(d).eigenvalues, eig_hermitian(H2).eigenvalues)
