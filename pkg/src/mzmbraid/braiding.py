"""Exchange of the two end Majoranas on the three-site chain, read out through spin states.

The logical qubit lives in the H0 ground space. Its computational basis is
(|xxx>, |x'x'x'>), so |0_3s> = (|xxx> + |x'x'x'>)/sqrt2 sits on +X and
|1_3s> on -X of the Bloch sphere. The exchange is diagonal in the
(|0_3s>, |1_3s>) basis and therefore rotates Bloch vectors about X.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .ite import (
    DEFAULT_T,
    AnnihilationError,
    eig_hermitian,
    ground_projector,
    ite_operator,
)
from .majorana import ErrorOperator, reference_noise_operators, spin_hamiltonians
from .pauli import OperatorSum, to_dense
from .states import product_state
from .tomography import (
    PAULIS,
    BlochVector,
    ProcessMatrix,
    as_density,
    chi_from_kraus,
    chi_from_unitary,
    process_fidelity,
)

REFERENCE_EXCHANGE = np.diag([1, np.exp(-1j * np.pi / 2)])
MIRROR_EXCHANGE = np.diag([1, np.exp(1j * np.pi / 2)])
# change of basis from (|0_3s>, |1_3s>) coordinates to (|xxx>, |x'x'x'>) coordinates
_X_TO_Z = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


@dataclass(frozen=True)
class GroundSpacePair:
    basis0: np.ndarray
    basis1: np.ndarray

    @property
    def isometry(self) -> np.ndarray:
        """Columns |0_3s>, |1_3s>."""
        return np.column_stack([self.basis0, self.basis1])

    @property
    def z_isometry(self) -> np.ndarray:
        """Columns |xxx>, |x'x'x'> (the logical computational basis)."""
        return self.isometry @ _X_TO_Z.conj().T

    def logical(self, s: np.ndarray) -> np.ndarray:
        """Amplitudes of ``s`` on (|xxx>, |x'x'x'>)."""
        return self.z_isometry.conj().T @ np.asarray(s, dtype=complex)

    def embed(self, amplitudes) -> np.ndarray:
        return self.z_isometry @ np.asarray(amplitudes, dtype=complex)


def ground_basis_h0() -> GroundSpacePair:
    xxx = product_state("xxx")
    xbar = product_state("x'x'x'")
    return GroundSpacePair((xxx + xbar) / np.sqrt(2), (xxx - xbar) / np.sqrt(2))


def bloch_from_state(s: np.ndarray, pair: GroundSpacePair | None = None) -> BlochVector:
    """Bloch coordinates of the projection of ``s`` onto the pair's span."""
    pair = pair or ground_basis_h0()
    a = pair.logical(s)
    n = np.linalg.norm(a)
    if n < 1e-12:
        raise AnnihilationError("state has no weight in the logical subspace")
    rho = np.outer(a, a.conj()) / n**2
    p = [np.trace(rho @ PAULIS[k]).real for k in ("X", "Y", "Z")]
    r = math.sqrt(sum(x * x for x in p))
    if r > 1:
        p = [x / r for x in p]
    return BlochVector(*p)


def rx(angle: float) -> np.ndarray:
    """Right-handed rotation of Bloch vectors about X."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]])


def braid_operator(t: float = DEFAULT_T) -> np.ndarray:
    """Dense exp(-H2 t) exp(-H1 t); ``t = inf`` gives P(H2) P(H1)."""
    _, h1, h2 = spin_hamiltonians()
    return ite_operator(h2, t) @ ite_operator(h1, t)


def _wrap(phi: float) -> float:
    return float(np.angle(np.exp(1j * phi)))


@dataclass(frozen=True)
class ExchangeResult:
    t: float
    raw: np.ndarray
    matrix: np.ndarray
    singular_values: np.ndarray
    relative_phase: float

    @property
    def off_diagonal(self) -> float:
        return float(abs(self.matrix[0, 1]) + abs(self.matrix[1, 0]))

    @property
    def unitarity_error(self) -> float:
        return float(np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(2))))

    @property
    def singular_spread(self) -> float:
        s = self.singular_values
        return float((s.max() - s.min()) / s.max())

    def distance(self, reference: np.ndarray) -> float:
        """Max-entry distance after aligning global phases on the (0, 0) entry."""
        ref = np.asarray(reference, dtype=complex)
        ref = ref * np.exp(-1j * np.angle(ref[0, 0]))
        return float(np.max(np.abs(self.matrix - ref)))

    @property
    def distance_reference(self) -> float:
        return self.distance(REFERENCE_EXCHANGE)

    @property
    def distance_mirror(self) -> float:
        return self.distance(MIRROR_EXCHANGE)

    @property
    def z_basis_matrix(self) -> np.ndarray:
        return _X_TO_Z @ self.matrix @ _X_TO_Z.conj().T


def exchange_operator(t: float = DEFAULT_T) -> ExchangeResult:
    """Ground-space restriction of exp(-H2 t) exp(-H1 t), unitarized by polar decomposition.

    The unitary factor is reported with its (0, 0) entry real and positive.
    """
    if not t > 0:
        raise ValueError(f"exchange needs t > 0, got {t}")
    pair = ground_basis_h0()
    b = pair.isometry
    raw = b.conj().T @ braid_operator(t) @ b
    u, s, vh = np.linalg.svd(raw)
    if s.max() < 1e-300 or not np.all(np.isfinite(s)):
        raise AnnihilationError("braid annihilated the H0 ground space")
    unitary = u @ vh
    unitary = unitary * np.exp(-1j * np.angle(unitary[0, 0]))
    rel = _wrap(np.angle(unitary[1, 1]) - np.angle(unitary[0, 0]))
    return ExchangeResult(float(t), raw, unitary, s, rel)


def geometric_phase(m: np.ndarray, projectors: Sequence) -> float:
    """-arg <m| P1 P2 ... Pn |m>."""
    m = np.asarray(m, dtype=complex)
    v = m.copy()
    for p in reversed(projectors):
        v = np.asarray(p) @ v
    amp = np.vdot(m, v)
    if abs(amp) <= 1e-12:
        raise AnnihilationError("Bargmann amplitude vanishes; phase undefined")
    return float(-np.angle(amp))


def braid_projectors() -> list[np.ndarray]:
    _, h1, h2 = spin_hamiltonians()
    return [ground_projector(h1).matrix, ground_projector(h2).matrix]


# -- Bloch-sphere trajectories -----------------------------------------------------

AXIS_LABELS = ("+Z", "-Y", "-Z", "+X", "+Y", "-X")
_AXIS_AMPS = {
    "+Z": (1, 0),
    "-Y": (1 / np.sqrt(2), -1j / np.sqrt(2)),
    "-Z": (0, 1),
    "+X": (1 / np.sqrt(2), 1 / np.sqrt(2)),
    "+Y": (1 / np.sqrt(2), 1j / np.sqrt(2)),
    "-X": (1 / np.sqrt(2), -1 / np.sqrt(2)),
}


def axis_states() -> list[tuple[str, np.ndarray]]:
    """The six logical inputs, prepared on (|xxx>, |x'x'x'>) and passed through the H0 projection."""
    pair = ground_basis_h0()
    p0 = ground_projector(spin_hamiltonians()[0]).matrix
    return [(lab, p0 @ pair.embed(_AXIS_AMPS[lab])) for lab in AXIS_LABELS]


def braid_trajectory(initial: Sequence[np.ndarray], t: float = DEFAULT_T) -> list[tuple[BlochVector, BlochVector]]:
    pair = ground_basis_h0()
    k = braid_operator(t)
    p0 = ground_projector(spin_hamiltonians()[0]).matrix
    out = []
    for s in initial:
        final = p0 @ (k @ np.asarray(s, dtype=complex))
        out.append((bloch_from_state(s, pair), bloch_from_state(final, pair)))
    return out


def rotation_fit(pairs: Sequence[tuple[BlochVector, BlochVector]], angle: float = np.pi / 2) -> tuple[int, float]:
    """Pick the rotation sense about X that best explains ``pairs``; return (sign, max deviation)."""
    best = None
    for sign in (+1, -1):
        r = rx(sign * angle)
        dev = max(float(np.max(np.abs(r @ a.as_array() - b.as_array()))) for a, b in pairs)
        if best is None or dev < best[1]:
            best = (sign, dev)
    return best


# -- local noise --------------------------------------------------------------------

def noise_operators() -> tuple[ErrorOperator, ErrorOperator]:
    return reference_noise_operators()


def _dense(d) -> np.ndarray:
    if isinstance(d, ErrorOperator):
        d = d.spin
    if isinstance(d, OperatorSum):
        return to_dense(d).matrix
    return np.asarray(d, dtype=complex)


def noise_immunity_check(d) -> tuple[complex, float]:
    """Best scalar lambda with P0 d P0 ~ lambda P0, and the Frobenius residual."""
    p0 = ground_projector(spin_hamiltonians()[0]).matrix
    a = p0 @ _dense(d) @ p0
    lam = np.trace(a) / np.trace(p0).real
    return complex(lam), float(np.linalg.norm(a - lam * p0))


@dataclass(frozen=True)
class ProtectionResult:
    t: float
    matrix: np.ndarray
    process: ProcessMatrix
    fidelity: float
    success_probability: dict[str, float] = field(default_factory=dict)
    leakage: float = 0.0


def protection_channel(d, t: float = DEFAULT_T) -> ProtectionResult:
    """Logical action of: ground-space input -> d -> exp(-H0 t) -> read out on the ground pair.

    The 2x2 matrix is in the (|xxx>, |x'x'x'>) basis, scaled to unit mean
    squared singular value. Success probabilities are the kept fractions
    |P0 d psi|^2 / |d psi|^2 after the error acts.
    """
    h0 = spin_hamiltonians()[0]
    pair = ground_basis_h0()
    dm = _dense(d)
    v = pair.z_isometry
    evolved = ite_operator(h0, t) @ dm @ v
    k = v.conj().T @ evolved
    scale = math.sqrt(np.trace(k.conj().T @ k).real / 2)
    if not scale > 1e-300 * max(1.0, np.abs(evolved).max()):
        raise AnnihilationError("error operator maps the ground space out of itself")
    k = k / scale
    proc = ProcessMatrix(chi_from_kraus([k]) / (np.trace(k.conj().T @ k).real / 2))
    fid = process_fidelity(proc, chi_from_unitary(np.eye(2)))
    leak = 0.0
    for col in range(2):
        out = evolved[:, col]
        kept = np.linalg.norm(v.conj().T @ out) ** 2
        leak = max(leak, 1 - kept / np.linalg.norm(out) ** 2)
    p0 = ground_projector(h0).matrix
    probs = {}
    inputs = {"0_3s": pair.basis0, "1_3s": pair.basis1, "xxx": v[:, 0], "x'x'x'": v[:, 1]}
    for name, psi in inputs.items():
        hit = dm @ psi
        n2 = np.vdot(hit, hit).real
        probs[name] = float(np.vdot(p0 @ hit, p0 @ hit).real / n2) if n2 > 0 else 0.0
    return ProtectionResult(float(t), k, proc, fid, probs, float(max(leak, 0.0)))


# -- logical channels for tomography ----------------------------------------------

def braid_channel(t: float = DEFAULT_T) -> Callable[[np.ndarray], np.ndarray]:
    """Logical map rho -> K rho K^dagger / Tr with K the braid restricted to (|xxx>, |x'x'x'>)."""
    pair = ground_basis_h0()
    v = pair.z_isometry
    k = v.conj().T @ braid_operator(t) @ v

    def channel(rho):
        out = k @ as_density(rho) @ k.conj().T
        return out / np.trace(out).real

    return channel


def ideal_exchange_z(reference: np.ndarray = MIRROR_EXCHANGE) -> np.ndarray:
    """An exchange matrix given on (|0_3s>, |1_3s>) rewritten on (|xxx>, |x'x'x'>)."""
    return _X_TO_Z @ np.asarray(reference, dtype=complex) @ _X_TO_Z.conj().T


def ground_energy_h0() -> float:
    return eig_hermitian(spin_hamiltonians()[0]).ground_energy
