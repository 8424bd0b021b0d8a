import numpy as np
import pytest
from scipy.stats import unitary_group

from mzmbraid.tomography import (
    PAULIS,
    PROBES,
    BlochVector,
    MeasurementRecord,
    ProcessMatrix,
    bloch_standard_errors,
    chi_from_unitary,
    density_from_bloch,
    measure_all,
    measure_logical,
    process_fidelity,
    process_tomography,
    state_tomography,
    unitary_channel,
)

S = 1 / np.sqrt(2)
PLUS_Z = np.array([1, 0], dtype=complex)
PLUS_X = np.array([S, S], dtype=complex)
PLUS_Y = np.array([S, 1j * S], dtype=complex)


def bloch_of(psi):
    rho = np.outer(psi, psi.conj())
    return np.array([np.trace(rho @ PAULIS[k]).real for k in "XYZ"])


def test_exact_measurement_examples():
    assert measure_logical(PLUS_Z, "Z").probabilities == (1.0, 0.0)
    assert measure_logical(PLUS_Z, "X").probabilities == pytest.approx((0.5, 0.5))


def test_sampled_measurement_within_five_sigma():
    rec = measure_logical(PLUS_X, "X", shots=10_000, rng=11)
    assert rec.counts[0] + rec.counts[1] == 10_000
    assert rec.probabilities[0] >= 1 - 5 / 100


def test_measurement_errors():
    with pytest.raises(ValueError):
        measure_logical(PLUS_Z, "Z", shots=0)
    with pytest.raises(ValueError):
        measure_logical(2 * PLUS_Z, "Z")
    with pytest.raises(ValueError):
        MeasurementRecord("Z", (0.7, 0.7))


def test_state_tomography_examples():
    assert state_tomography(measure_all(PLUS_X)).as_tuple() == pytest.approx((1, 0, 0))
    mixed = [MeasurementRecord(s, (0.5, 0.5)) for s in "ZXY"]
    assert state_tomography(mixed).as_tuple() == (0, 0, 0)
    sampled = state_tomography(measure_all(PLUS_Y, 10_000, 5))
    assert np.all(np.abs(sampled.as_array() - [0, 1, 0]) <= 5 / 100)
    with pytest.raises(ValueError):
        state_tomography(measure_all(PLUS_Y)[:2])


def test_radial_clip():
    recs = [MeasurementRecord("Z", (1, 0)), MeasurementRecord("X", (1, 0)), MeasurementRecord("Y", (0.5, 0.5))]
    b = state_tomography(recs)
    assert np.linalg.norm(b.as_array()) == pytest.approx(1)
    with pytest.raises(ValueError):
        BlochVector(1, 1, 0)


def test_exact_round_trip_random_states():
    rng = np.random.default_rng(0)
    for _ in range(100):
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        v /= np.linalg.norm(v)
        b = state_tomography(measure_all(v))
        assert np.max(np.abs(b.as_array() - bloch_of(v))) <= 1e-12


def test_standard_errors():
    assert bloch_standard_errors(measure_all(PLUS_X)) == (0, 0, 0)
    errs = bloch_standard_errors(measure_all(PLUS_Z, 10_000, 1))
    assert errs[0] == pytest.approx(0.01, rel=0.05)


def test_shot_noise_scaling():
    shots = [100, 1_000, 10_000, 100_000]
    exact = bloch_of(PLUS_Y)
    errs = []
    for n in shots:
        d = [np.linalg.norm(state_tomography(measure_all(PLUS_Y, n, seed)).as_array() - exact)
             for seed in range(100)]
        errs.append(np.mean(d))
    slope = np.polyfit(np.log(shots), np.log(errs), 1)[0]
    assert abs(slope + 0.5) <= 0.1


def test_process_examples():
    ident = process_tomography(unitary_channel(np.eye(2)))
    expected = np.zeros((4, 4))
    expected[0, 0] = 1
    assert np.allclose(ident.chi, expected, atol=1e-12)
    flip = process_tomography(unitary_channel(PAULIS["X"]))
    assert flip.entry("X", "X") == pytest.approx(1)
    assert np.sum(np.abs(flip.chi)) == pytest.approx(1)
    u = np.diag([1, -1j])
    chi = process_tomography(unitary_channel(u)).chi
    assert np.allclose(chi, chi_from_unitary(u), atol=1e-12)
    assert abs(chi[0, 0]) == pytest.approx(0.5)
    assert abs(chi[3, 3]) == pytest.approx(0.5)
    assert np.linalg.matrix_rank(chi, tol=1e-9) == 1


def test_random_unitary_round_trip():
    for seed in range(20):
        u = unitary_group.rvs(2, random_state=seed)
        pm = process_tomography(unitary_channel(u))
        assert not pm.psd_repaired
        for v in PROBES.values():
            rho = np.outer(v, v.conj())
            assert np.max(np.abs(pm.apply(rho) - u @ rho @ u.conj().T)) <= 1e-10


def test_sampled_process_is_physical():
    pm = process_tomography(unitary_channel(np.diag([1, 1j])), shots=1_000, rng=3)
    assert np.max(np.abs(pm.chi - pm.chi.conj().T)) <= 1e-9
    assert np.trace(pm.chi).real == pytest.approx(1)
    assert np.linalg.eigvalsh(pm.chi).min() >= -1e-9


def test_fidelity_examples():
    a = chi_from_unitary(np.eye(2))
    assert process_fidelity(a, a) == pytest.approx(1)
    assert process_fidelity(a, chi_from_unitary(PAULIS["X"])) == pytest.approx(0)
    b = chi_from_unitary(np.diag([1, 1j]))
    assert process_fidelity(a, b) == pytest.approx(process_fidelity(b, a))


def test_process_matrix_shape_checked():
    with pytest.raises(ValueError):
        ProcessMatrix(np.eye(3))


def test_density_from_bloch():
    assert np.allclose(density_from_bloch((0, 0, 1)), np.diag([1, 0]))
