"""Spectral engine: eigendecomposition, imaginary-time evolution and ground projectors.

All exponentials go through the Hermitian eigendecomposition. States are
left unnormalized through a schedule; their norms carry the post-selection
weights. A duration of ``math.inf`` means the projective limit: energies are
shifted so the ground level sits at zero and the result is ``P_g |psi>``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .majorana import spin_hamiltonians
from .pauli import DenseOperator, OperatorSum, PauliString, canonicalize, to_dense

DEFAULT_T = 5.0
DEGENERACY_TOL = 1e-8
ANNIHILATION_NORM = 1e-300
# a step that keeps less than this fraction of the attainable norm has only roundoff left
ANNIHILATION_LOG = math.log(1e-12)


class AnnihilationError(ArithmeticError):
    """A projection or evolution removed the entire state."""


@dataclass(frozen=True)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def ground_vectors(self, tol: float = DEGENERACY_TOL) -> np.ndarray:
        keep = self.eigenvalues - self.eigenvalues[0] <= tol
        return self.eigenvectors[:, keep]

    @property
    def gap(self) -> float:
        """Distance from the ground level to the next distinct level (0 if none)."""
        e = self.eigenvalues
        above = e[e - e[0] > DEGENERACY_TOL]
        return float(above[0] - e[0]) if above.size else 0.0


def _matrix(op) -> tuple[np.ndarray, bool]:
    if isinstance(op, OperatorSum):
        d = to_dense(op)
        return d.matrix, d.hermitian
    if isinstance(op, DenseOperator):
        return op.matrix, op.hermitian
    m = np.asarray(op, dtype=complex)
    return m, bool(np.max(np.abs(m - m.conj().T)) <= 1e-12)


_EIG_CACHE: dict[tuple[int, bytes], SpectralDecomposition] = {}


def eig_hermitian(op) -> SpectralDecomposition:
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian operator."""
    m, herm = _matrix(op)
    if not herm:
        raise ValueError("eig_hermitian needs a Hermitian operator")
    key = (m.shape[0], m.tobytes())
    hit = _EIG_CACHE.get(key)
    if hit is not None:
        return hit
    w, v = np.linalg.eigh(m)
    residual = np.max(np.linalg.norm(m @ v - v * w, axis=0)) if w.size else 0.0
    if residual > 1e-10:
        raise ArithmeticError(f"eigendecomposition residual {residual:.3g} above 1e-10")
    w.setflags(write=False)
    v.setflags(write=False)
    dec = SpectralDecomposition(w, v)
    if len(_EIG_CACHE) < 256:
        _EIG_CACHE[key] = dec
    return dec


def ite_operator(h, t: float) -> np.ndarray:
    """Dense ``exp(-h t)``; ``t = inf`` gives the ground projector."""
    dec = eig_hermitian(h)
    if math.isinf(t):
        g = dec.ground_vectors()
        return g @ g.conj().T
    v = dec.eigenvectors
    return (v * np.exp(-t * dec.eigenvalues)) @ v.conj().T


def ite_apply(h, t: float, s: np.ndarray) -> np.ndarray:
    """Return ``sum_k q_k exp(-t E_k) |e_k>`` for ``s = sum_k q_k |e_k>`` (unnormalized)."""
    if t < 0:
        raise ValueError(f"duration must be nonnegative, got {t}")
    s = np.asarray(s, dtype=complex)
    dec = eig_hermitian(h)
    if s.shape != (dec.eigenvalues.size,):
        raise ValueError(f"state of shape {s.shape} does not match dimension {dec.eigenvalues.size}")
    if t == 0:
        return s.copy()
    q = dec.eigenvectors.conj().T @ s
    if math.isinf(t):
        weights = (dec.eigenvalues - dec.eigenvalues[0] <= DEGENERACY_TOL).astype(float)
    else:
        weights = np.exp(-t * dec.eigenvalues)
    return dec.eigenvectors @ (weights * q)


def ground_projector(h, degeneracy_tol: float = DEGENERACY_TOL) -> DenseOperator:
    """Orthogonal projector onto every eigenvector within ``degeneracy_tol`` of the minimum."""
    g = eig_hermitian(h).ground_vectors(degeneracy_tol)
    p = g @ g.conj().T
    return DenseOperator((p + p.conj().T) / 2, hermitian=True)


def leakage(projector, psi: np.ndarray) -> float:
    """Weight outside the projector's range: ``1 - |P psi|^2 / |psi|^2``."""
    p = np.asarray(projector)
    n2 = np.vdot(psi, psi).real
    if n2 <= 0:
        raise AnnihilationError("leakage of the zero vector is undefined")
    kept = p @ psi
    return float(max(0.0, 1.0 - np.vdot(kept, kept).real / n2))


def normalized(psi: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(psi)
    if n < ANNIHILATION_NORM:
        raise AnnihilationError("cannot normalize an annihilated state")
    return psi / n


# -- commuting factorization -------------------------------------------------

def factor_commuting(h: OperatorSum) -> list[OperatorSum]:
    """Split ``h`` into pairwise-commuting parts that sum to ``h``.

    Non-identity terms are grouped by connected components of their
    anticommutation graph, so fully commuting Hamiltonians split into one
    part per Pauli term and a fully frustrated one comes back whole. The
    constant term joins the last part.
    """
    h = canonicalize(h)
    ident = "I" * h.n_sites
    terms = [t for t in h.terms if t.letters != ident]
    const = [t for t in h.terms if t.letters == ident]
    if not terms:
        return [h]
    parent = list(range(len(terms)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(terms)):
        for j in range(i + 1, len(terms)):
            if not terms[i].commutes_with(terms[j]):
                parent[find(i)] = find(j)
    groups: dict[int, list[PauliString]] = {}
    for i, t in enumerate(terms):
        groups.setdefault(find(i), []).append(t)
    parts = [list(g) for g in groups.values()]
    parts[-1].extend(const)
    return [canonicalize(OperatorSum(h.n_sites, tuple(p))) for p in parts]


# -- schedules ----------------------------------------------------------------

@dataclass(frozen=True)
class ScheduleStep:
    hamiltonian: OperatorSum
    t: float = DEFAULT_T
    label: str | None = None


@dataclass(frozen=True)
class Schedule:
    steps: tuple[ScheduleStep, ...] = field(default_factory=tuple)

    def __post_init__(self):
        steps = tuple(
            s if isinstance(s, ScheduleStep) else ScheduleStep(*s) for s in self.steps
        )
        object.__setattr__(self, "steps", steps)
        if not steps:
            raise ValueError("a schedule needs at least one step")
        n = steps[0].hamiltonian.n_sites
        for s in steps:
            if s.hamiltonian.n_sites != n:
                raise ValueError("all schedule Hamiltonians must act on the same number of sites")
            if not s.hamiltonian.is_hermitian:
                raise ValueError(f"step {s.label or '?'} Hamiltonian is not Hermitian")
            if not s.t >= 0:
                raise ValueError(f"step {s.label or '?'} has negative duration {s.t}")

    @property
    def n_sites(self) -> int:
        return self.steps[0].hamiltonian.n_sites

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)


@dataclass(frozen=True)
class StepReport:
    label: str | None
    t: float
    norm: float
    leakage: float


def _surviving_log(step: ScheduleStep, n_out: float, n_in: float) -> float:
    """log of the output norm relative to the largest possible one, exp(-E0 t) |s|."""
    e0 = eig_hermitian(step.hamiltonian).ground_energy
    shift = 0.0 if math.isinf(step.t) or step.t == 0 else e0 * step.t
    return math.log(n_out) - math.log(n_in) + shift


def ite_schedule(sched: Schedule, s: np.ndarray) -> tuple[np.ndarray, list[StepReport]]:
    """Apply every step left to right and report the ground-space leakage after each."""
    psi = np.asarray(s, dtype=complex)
    reports = []
    for step in sched:
        n_in = float(np.linalg.norm(psi))
        psi = ite_apply(step.hamiltonian, step.t, psi)
        n = float(np.linalg.norm(psi))
        if not n >= ANNIHILATION_NORM or not np.isfinite(n) or _surviving_log(step, n, n_in) < ANNIHILATION_LOG:
            raise AnnihilationError(
                f"step {step.label or len(reports)} annihilated the state (norm {n:.3g})"
            )
        reports.append(StepReport(step.label, step.t, n, leakage(ground_projector(step.hamiltonian), psi)))
    return psi, reports


def braid_schedule(t: float = DEFAULT_T) -> Schedule:
    """H0 -> H1 -> H2 -> H0 preset on three sites."""
    h0, h1, h2 = spin_hamiltonians()
    return Schedule(
        (
            ScheduleStep(h0, t, "H0"),
            ScheduleStep(h1, t, "H1"),
            ScheduleStep(h2, t, "H2"),
            ScheduleStep(h0, t, "H0"),
        )
    )


# -- convergence diagnostics --------------------------------------------------

def excited_amplitude(h, t: float, s: np.ndarray) -> float:
    """Norm of the excited-state part of exp(-h t)|s>, relative to the whole state."""
    psi = ite_apply(h, t, s)
    return math.sqrt(leakage(ground_projector(h), psi))


def convergence_curve(h, ts, s: np.ndarray) -> np.ndarray:
    return np.array([excited_amplitude(h, t, s) for t in ts])


def fit_log_slope(ts, ys) -> float:
    """Least-squares slope of log(ys) against ts."""
    return float(np.polyfit(np.asarray(ts, dtype=float), np.log(np.asarray(ys, dtype=float)), 1)[0])
