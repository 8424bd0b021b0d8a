"""Single-qubit state and process tomography with optional shot noise.

Settings ``Z``, ``X``, ``Y`` stand for the H/V, D and R analyzers. Process
tomography probes the inputs Z+, Z-, X+, Y+ and reconstructs the chi matrix
in the ``[I, X, Y, Z]`` operator basis by linear inversion; sampled data is
repaired onto the positive cone by eigenvalue clipping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

SETTINGS = ("Z", "X", "Y")
PAULI_LABELS = ("I", "X", "Y", "Z")
PAULIS = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]]),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_S = 1 / np.sqrt(2)
PROBES = {
    "Z+": np.array([1, 0], dtype=complex),
    "Z-": np.array([0, 1], dtype=complex),
    "X+": np.array([_S, _S], dtype=complex),
    "Y+": np.array([_S, 1j * _S], dtype=complex),
}
# eigenvector with outcome +1 for each analyzer setting
_ANALYZER = {"Z": PROBES["Z+"], "X": PROBES["X+"], "Y": PROBES["Y+"]}


@dataclass(frozen=True)
class BlochVector:
    """Coordinates of rho = (I + p1 X + p2 Y + p3 Z) / 2."""

    p1: float
    p2: float
    p3: float

    def __post_init__(self):
        for name in ("p1", "p2", "p3"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if self.p1**2 + self.p2**2 + self.p3**2 > 1 + 1e-9:
            raise ValueError(f"Bloch vector {self.as_tuple()} exceeds the unit ball")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.p1, self.p2, self.p3)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple())


@dataclass(frozen=True)
class MeasurementRecord:
    setting: str
    probabilities: tuple[float, float]
    counts: tuple[int, int] | None = None
    shots: int | None = None

    def __post_init__(self):
        if self.setting not in SETTINGS:
            raise ValueError(f"unknown setting {self.setting!r}")
        p, q = self.probabilities
        if min(p, q) < -1e-12 or abs(p + q - 1) > 1e-12:
            raise ValueError(f"invalid outcome probabilities {self.probabilities}")
        if self.counts is not None and min(self.counts) < 0:
            raise ValueError("counts must be nonnegative")

    @property
    def expectation(self) -> float:
        return self.probabilities[0] - self.probabilities[1]


def as_density(state) -> np.ndarray:
    a = np.asarray(state, dtype=complex)
    if a.shape == (2,):
        return np.outer(a, a.conj())
    if a.shape == (2, 2):
        return a
    raise ValueError(f"expected a two-level state, got shape {a.shape}")


def measure_logical(state, setting: str, shots: int | None = None, rng=None) -> MeasurementRecord:
    """Born probabilities for ``setting``; with ``shots``, binomially sampled counts."""
    rho = as_density(state)
    tr = np.trace(rho).real
    if abs(tr - 1) > 1e-9:
        raise ValueError(f"state is not normalized (trace {tr:.6g})")
    if setting not in SETTINGS:
        raise ValueError(f"unknown setting {setting!r}")
    v = _ANALYZER[setting]
    p = float(np.clip(np.vdot(v, rho @ v).real, 0.0, 1.0))
    if shots is None:
        return MeasurementRecord(setting, (p, 1.0 - p))
    if shots <= 0:
        raise ValueError("sampled mode needs a positive shot count")
    rng = np.random.default_rng(rng)
    n_plus = int(rng.binomial(shots, p))
    return MeasurementRecord(
        setting, (n_plus / shots, 1 - n_plus / shots), (n_plus, shots - n_plus), shots
    )


def measure_all(state, shots: int | None = None, rng=None) -> list[MeasurementRecord]:
    rng = np.random.default_rng(rng) if shots is not None else None
    return [measure_logical(state, s, shots, rng) for s in SETTINGS]


def state_tomography(records: Sequence[MeasurementRecord]) -> BlochVector:
    """Linear inversion p_i = <sigma_i>, radially clipped onto the unit ball."""
    by_setting = {r.setting: r for r in records}
    missing = [s for s in SETTINGS if s not in by_setting]
    if missing:
        raise ValueError(f"missing tomography settings: {missing}")
    p = np.array([by_setting[s].expectation for s in ("X", "Y", "Z")])
    r = np.linalg.norm(p)
    if r > 1:
        p = p / r
    return BlochVector(*p)


def bloch_standard_errors(records: Sequence[MeasurementRecord]) -> tuple[float, float, float]:
    """Binomial standard errors of (p1, p2, p3); zero for exact records."""
    by_setting = {r.setting: r for r in records}
    out = []
    for s in ("X", "Y", "Z"):
        r = by_setting[s]
        out.append(0.0 if r.shots is None else float(np.sqrt(max(0.0, 1 - r.expectation**2) / r.shots)))
    return tuple(out)


def density_from_bloch(p) -> np.ndarray:
    p1, p2, p3 = (p.p1, p.p2, p.p3) if hasattr(p, "p1") else p
    return 0.5 * (PAULIS["I"] + p1 * PAULIS["X"] + p2 * PAULIS["Y"] + p3 * PAULIS["Z"])


# -- process tomography ----------------------------------------------------------

@dataclass(frozen=True)
class ProcessMatrix:
    chi: np.ndarray
    psd_repaired: bool = False

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=complex)
        if chi.shape != (4, 4):
            raise ValueError(f"chi must be 4x4, got {chi.shape}")
        object.__setattr__(self, "chi", chi)

    def entry(self, row: str, col: str) -> complex:
        return self.chi[PAULI_LABELS.index(row), PAULI_LABELS.index(col)]

    def apply(self, rho) -> np.ndarray:
        return apply_chi(self.chi, rho)


def apply_chi(chi: np.ndarray, rho) -> np.ndarray:
    rho = as_density(rho)
    out = np.zeros((2, 2), dtype=complex)
    for m, a in enumerate(PAULI_LABELS):
        for n, b in enumerate(PAULI_LABELS):
            out += chi[m, n] * PAULIS[a] @ rho @ PAULIS[b].conj().T
    return out


def chi_from_kraus(kraus: Sequence[np.ndarray]) -> np.ndarray:
    """chi_mn = sum_k a_km conj(a_kn) with K_k = sum_m a_km P_m."""
    chi = np.zeros((4, 4), dtype=complex)
    for k in kraus:
        a = np.array([np.trace(PAULIS[p].conj().T @ k) / 2 for p in PAULI_LABELS])
        chi += np.outer(a, a.conj())
    return chi


def chi_from_unitary(u: np.ndarray) -> np.ndarray:
    return chi_from_kraus([np.asarray(u, dtype=complex)])


# N&C single-qubit inversion uses the basis {I, X, -iY, Z}
_LAMBDA = 0.5 * np.block([[np.eye(2), PAULIS["X"]], [PAULIS["X"], -np.eye(2)]])
_NC_TO_PAULI = np.array([1, 1, -1j, 1])


def _chi_linear_inversion(outputs: dict[str, np.ndarray]) -> np.ndarray:
    """Nielsen-Chuang box 8.5 with the four probe outputs."""
    r00 = outputs["Z+"]
    r11 = outputs["Z-"]
    # |0><1| = |+><+| + i|+i><+i| - (1+i)/2 (|0><0| + |1><1|)
    r01 = outputs["X+"] + 1j * outputs["Y+"] - (1 + 1j) / 2 * (r00 + r11)
    r10 = r01.conj().T
    block = np.block([[r00, r01], [r10, r11]])
    chi_nc = _LAMBDA @ block @ _LAMBDA
    c = _NC_TO_PAULI
    return c[:, None] * chi_nc * c.conj()[None, :]


def _psd_repair(chi: np.ndarray) -> tuple[np.ndarray, bool]:
    chi = (chi + chi.conj().T) / 2
    w, v = np.linalg.eigh(chi)
    if w.min() >= -1e-12:
        return chi / np.trace(chi).real, False
    w = np.clip(w, 0, None)
    fixed = (v * w) @ v.conj().T
    return fixed / np.trace(fixed).real, True


def process_tomography(channel: Callable[[np.ndarray], np.ndarray], shots: int | None = None, rng=None) -> ProcessMatrix:
    """Probe ``channel`` (density matrix in, density matrix out) and rebuild chi."""
    rng = np.random.default_rng(rng) if shots is not None else None
    outputs = {}
    for name, v in PROBES.items():
        rho_out = as_density(channel(np.outer(v, v.conj())))
        rho_out = rho_out / np.trace(rho_out).real
        if shots is not None:
            rho_out = density_from_bloch(state_tomography(measure_all(rho_out, shots, rng)))
        outputs[name] = rho_out
    chi = _chi_linear_inversion(outputs)
    if shots is None:
        chi = (chi + chi.conj().T) / 2
        return ProcessMatrix(chi / np.trace(chi).real)
    fixed, repaired = _psd_repair(chi)
    return ProcessMatrix(fixed, repaired)


def process_fidelity(a, b) -> float:
    """Tr(chi_a chi_b), the overlap fidelity when one argument is a pure (rank-one) process."""
    ca = a.chi if isinstance(a, ProcessMatrix) else np.asarray(a)
    cb = b.chi if isinstance(b, ProcessMatrix) else np.asarray(b)
    return float(np.clip(np.trace(ca @ cb).real, 0.0, 1.0))


def unitary_channel(u: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
    u = np.asarray(u, dtype=complex)
    return lambda rho: u @ as_density(rho) @ u.conj().T
