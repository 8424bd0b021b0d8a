"""Lowering of projective schedules onto a staged linear-optical pipeline.

A single photon carries the state in ``2**L`` spatial modes. Every mode is a
vector of a fixed orthonormal basis of the ``L``-site Hilbert space. A stage
is one of

* ``Prepare``: write the input into the first basis (the x-product basis of
  H0 on three sites, in the wire order of ``H0_MODE_LABELS``);
* ``BasisRotation``: change to the joint eigenbasis of the next Hamiltonian's
  commuting Pauli terms, as a mesh of two-mode mixers and per-mode phases;
* ``Dissipate``: keep only the modes at the Hamiltonian's ground energy and
  renormalize, i.e. the projective (infinite-time) limit of the evolution;
* ``Measure``: read the amplitudes back out in the final basis.

``simulate_pipeline`` tracks the probability that the photon survives every
post-selection, which equals the squared norm ratio of the dense projector
sequence.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .ite import DEGENERACY_TOL, AnnihilationError, Schedule, ite_apply
from .pauli import LETTERS, OperatorSum, PauliString, canonicalize, to_dense
from .states import H0_MODE_LABELS, product_label, product_state

KINDS = ("Prepare", "BasisRotation", "Dissipate", "Measure")
SCHEMA_TAG = "mzmbraid.pipeline/1"
UNITARITY_TOL = 1e-10
_AMP_TOL = 1e-12
_ANNIHILATION_WEIGHT = 1e-24


class LoweringError(ValueError):
    """The schedule cannot be expressed as mode rotations plus mode post-selections."""


class PipelineError(ValueError):
    """A hand-built pipeline fails static validation."""


# -- two-mode mixer meshes -------------------------------------------------------

def mixer_matrix(theta: float, phi: float) -> np.ndarray:
    """2x2 mixer [[cos, -e^{-i phi} sin], [e^{i phi} sin, cos]]."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -np.exp(-1j * phi) * s], [np.exp(1j * phi) * s, c]])


def decompose_unitary(u: np.ndarray, tol: float = 1e-15):
    """Factor ``u = T_1 T_2 ... T_k D`` into nearest-neighbour mixers and output phases.

    Returns ``(mixers, phases)`` with ``mixers`` a list of ``(a, a+1, theta, phi)``.
    Mixers that would act as the identity are omitted.
    """
    w = np.array(u, dtype=complex)
    n = w.shape[0]
    mixers = []
    for col in range(n - 1):
        for row in range(n - 1, col, -1):
            a, b = w[row - 1, col], w[row, col]
            if abs(b) <= tol:
                continue
            theta = math.atan2(abs(b), abs(a))
            phi = float(np.angle(b) - np.angle(a)) if abs(a) > tol else float(np.angle(b))
            t = mixer_matrix(theta, phi)
            w[[row - 1, row], :] = t.conj().T @ w[[row - 1, row], :]
            mixers.append((row - 1, row, theta, phi))
    phases = np.angle(np.diag(w))
    return mixers, phases


def compose_unitary(n: int, mixers, phases) -> np.ndarray:
    out = np.diag(np.exp(1j * np.asarray(phases, dtype=float)))
    for a, b, theta, phi in reversed(mixers):
        out[[a, b], :] = mixer_matrix(theta, phi) @ out[[a, b], :]
    return out


# -- stages ---------------------------------------------------------------------

@dataclass(frozen=True)
class Stage:
    kind: str
    name: str
    n_modes: int
    modes_in: int
    modes_out: int
    mixers: tuple = ()
    phases: tuple = ()
    kept: tuple[int, ...] = ()
    leakage: float = 0.0
    basis: np.ndarray | None = None
    labels: tuple[str, ...] = ()
    _unitary: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise PipelineError(f"unknown stage kind {self.kind!r}")
        if self.kind == "BasisRotation":
            if len(self.phases) != self.n_modes:
                raise PipelineError(f"{self.name}: {len(self.phases)} phases for {self.n_modes} modes")
            if any(not (0 <= a < self.n_modes and 0 <= b < self.n_modes and a != b) for a, b, _, _ in self.mixers):
                raise PipelineError(f"{self.name}: mixer acts outside the mode range")
            u = compose_unitary(self.n_modes, self.mixers, self.phases)
            err = np.max(np.abs(u.conj().T @ u - np.eye(self.n_modes)))
            if err > UNITARITY_TOL:
                raise PipelineError(f"{self.name}: rotation unitarity error {err:.3g}")
            object.__setattr__(self, "_unitary", u)
        if self.kind == "Dissipate":
            if not self.kept:
                raise PipelineError(f"{self.name}: a dissipation must keep at least one mode")
            if any(not 0 <= k < self.n_modes for k in self.kept):
                raise PipelineError(f"{self.name}: kept mode out of range")
            if not 0 <= self.leakage < 1:
                raise PipelineError(f"{self.name}: leakage must lie in [0, 1)")
        if self.kind in ("Prepare", "Measure"):
            b = np.asarray(self.basis, dtype=complex)
            if b.shape != (self.n_modes, self.n_modes):
                raise PipelineError(f"{self.name}: basis shape {b.shape} does not match {self.n_modes} modes")
            if np.max(np.abs(b.conj().T @ b - np.eye(self.n_modes))) > UNITARITY_TOL:
                raise PipelineError(f"{self.name}: mode basis is not orthonormal")
            object.__setattr__(self, "basis", b)

    @property
    def unitary(self) -> np.ndarray:
        if self._unitary is None:
            raise AttributeError(f"{self.kind} stage has no rotation")
        return self._unitary

    def to_json(self) -> dict:
        d = {
            "kind": self.kind,
            "name": self.name,
            "n_modes": self.n_modes,
            "modes_in": self.modes_in,
            "modes_out": self.modes_out,
        }
        if self.kind == "BasisRotation":
            d["mixers"] = [[int(a), int(b), float(t), float(p)] for a, b, t, p in self.mixers]
            d["phases"] = [float(p) for p in self.phases]
        if self.kind == "Dissipate":
            d["kept"] = [int(k) for k in self.kept]
            d["leakage"] = float(self.leakage)
        if self.kind in ("Prepare", "Measure"):
            d["basis"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.basis]
        if self.labels:
            d["labels"] = list(self.labels)
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Stage":
        basis = None
        if "basis" in d:
            basis = np.array([[complex(re, im) for re, im in row] for row in d["basis"]])
        return cls(
            kind=d["kind"],
            name=d["name"],
            n_modes=int(d["n_modes"]),
            modes_in=int(d["modes_in"]),
            modes_out=int(d["modes_out"]),
            mixers=tuple((int(a), int(b), float(t), float(p)) for a, b, t, p in d.get("mixers", ())),
            phases=tuple(float(p) for p in d.get("phases", ())),
            kept=tuple(int(k) for k in d.get("kept", ())),
            leakage=float(d.get("leakage", 0.0)),
            basis=basis,
            labels=tuple(d.get("labels", ())),
        )


@dataclass(frozen=True)
class OpticalPipeline:
    stages: tuple[Stage, ...]

    def __post_init__(self):
        stages = tuple(self.stages)
        object.__setattr__(self, "stages", stages)
        if len(stages) < 2 or stages[0].kind != "Prepare" or stages[-1].kind != "Measure":
            raise PipelineError("a pipeline runs from a Prepare stage to a Measure stage")
        n = stages[0].n_modes
        for prev, cur in zip(stages, stages[1:]):
            if cur.n_modes != n:
                raise PipelineError(f"{cur.name}: acts on {cur.n_modes} modes, pipeline has {n}")
            if prev.modes_out != cur.modes_in:
                raise PipelineError(
                    f"{prev.name} emits {prev.modes_out} modes but {cur.name} expects {cur.modes_in}"
                )
        for s in stages[1:-1]:
            if s.kind in ("Prepare", "Measure"):
                raise PipelineError(f"{s.name}: {s.kind} only allowed at the ends")

    @property
    def n_modes(self) -> int:
        return self.stages[0].n_modes

    @property
    def names(self) -> list[str]:
        return [s.name for s in self.stages]

    def to_json(self) -> dict:
        return {"schema": SCHEMA_TAG, "stages": [s.to_json() for s in self.stages]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, d: dict) -> "OpticalPipeline":
        if d.get("schema") != SCHEMA_TAG:
            raise PipelineError(f"unsupported pipeline schema {d.get('schema')!r}")
        return cls(tuple(Stage.from_json(s) for s in d["stages"]))

    @classmethod
    def loads(cls, text: str) -> "OpticalPipeline":
        return cls.from_json(json.loads(text))


# -- stabilizer eigenbases ------------------------------------------------------

def _symplectic(letters: str) -> int:
    """Bits (x_1..x_n, z_1..z_n) packed into an int."""
    n = len(letters)
    x = z = 0
    for i, c in enumerate(letters):
        if c in "XY":
            x |= 1 << i
        if c in "ZY":
            z |= 1 << i
    return x | (z << n)


def _gf2_rank(vectors: Sequence[int]) -> int:
    basis: list[int] = []
    for v in vectors:
        for b in basis:
            v = min(v, v ^ b)
        if v:
            basis.append(v)
    return len(basis)


def _strings_commute(a: str, b: str) -> bool:
    return PauliString(1, a).commutes_with(PauliString(1, b))


def _pauli_matrix(letters: str) -> np.ndarray:
    return to_dense(OperatorSum(len(letters), (PauliString(1, letters),))).matrix


def _eigenspace_projectors(gens: Sequence[str]) -> list[tuple[tuple[int, ...], np.ndarray]]:
    n = len(gens[0])
    mats = [_pauli_matrix(g) for g in gens]
    eye = np.eye(1 << n)
    out = []
    for signs in itertools.product((1, -1), repeat=len(gens)):
        p = eye.astype(complex)
        for s, m in zip(signs, mats):
            p = p @ (eye + s * m) / 2
        out.append((signs, p))
    return out


def _touched(gens: Sequence[str], active: np.ndarray) -> int:
    return sum(
        1 for _, p in _eigenspace_projectors(gens) if np.linalg.norm(p @ active) > 1e-9
    )


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > np.abs(v).max() - 1e-9))
    return v * np.exp(-1j * np.angle(v[k]))


def _term_generators(h: OperatorSum) -> list[str]:
    ident = "I" * h.n_sites
    letters = [t.letters for t in canonicalize(h).terms if t.letters != ident]
    for i, a in enumerate(letters):
        for b in letters[i + 1:]:
            if not _strings_commute(a, b):
                raise LoweringError(
                    f"terms {a} and {b} anticommute; no common mode basis diagonalizes the step"
                )
    gens: list[str] = []
    for w in letters:
        if _gf2_rank([_symplectic(g) for g in gens + [w]]) > len(gens):
            gens.append(w)
    return gens


def stabilizer_basis(h: OperatorSum, active: np.ndarray | None = None):
    """Orthonormal joint eigenbasis of the Pauli terms of ``h``.

    Missing generators are added greedily: at each step the commuting,
    independent Pauli string touching the fewest joint eigenspaces of the
    ``active`` span is chosen, ties broken lexicographically. Returns the
    basis (columns) and the generator list.
    """
    n = h.n_sites
    gens = _term_generators(h)
    if active is None:
        active = np.eye(1 << n)
    candidates = ["".join(p) for p in itertools.product(LETTERS, repeat=n)][1:]
    while len(gens) < n:
        best = None
        for c in candidates:
            if not all(_strings_commute(c, g) for g in gens):
                continue
            if _gf2_rank([_symplectic(g) for g in gens + [c]]) == len(gens):
                continue
            score = _touched(gens + [c], active)
            if best is None or score < best[0]:
                best = (score, c)
        gens.append(best[1])
    cols = []
    for _, p in _eigenspace_projectors(gens):
        k = int(np.argmax(np.linalg.norm(p, axis=0)))
        v = p[:, k] / np.linalg.norm(p[:, k])
        cols.append(_fix_phase(v))
    basis = np.column_stack(cols)
    labels = []
    for j in range(basis.shape[1]):
        lab = product_label(basis[:, j])
        if lab is not None:
            basis[:, j] = product_state(lab)
        labels.append(lab or _sign_label(gens, basis[:, j]))
    return basis, tuple(labels), gens


def _sign_label(gens, v) -> str:
    parts = []
    for g in gens:
        s = np.vdot(v, _pauli_matrix(g) @ v).real
        parts.append(("+" if s > 0 else "-") + g)
    return "[" + ",".join(parts) + "]"


def _canonical_basis():
    return np.column_stack([product_state(lab) for lab in H0_MODE_LABELS]), H0_MODE_LABELS


def _is_eigenbasis(h: OperatorSum, basis: np.ndarray, idx) -> bool:
    m = to_dense(h).matrix
    for k in idx:
        v = basis[:, k]
        e = np.vdot(v, m @ v)
        if np.linalg.norm(m @ v - e * v) > 1e-10:
            return False
    return True


def _target_basis(h: OperatorSum, span):
    """The canonically ordered x basis when it diagonalizes ``h``, else a stabilizer basis."""
    _term_generators(h)
    if h.n_sites == 3:
        canonical, canonical_labels = _canonical_basis()
        if _is_eigenbasis(h, canonical, range(8)):
            return canonical, tuple(canonical_labels)
    basis, labels, _ = stabilizer_basis(h, span)
    return basis, labels


def _mode_energies(h: OperatorSum, basis: np.ndarray) -> np.ndarray:
    m = to_dense(h).matrix
    return np.real(np.einsum("ij,ik,kj->j", basis.conj(), m, basis))


def _active_after(u: np.ndarray, active: Sequence[int]) -> tuple[int, ...]:
    if not active:
        return ()
    cols = np.abs(u[:, list(active)])
    return tuple(int(k) for k in np.nonzero(cols.max(axis=1) > _AMP_TOL)[0])


# -- lowering -------------------------------------------------------------------

def lower(sched: Schedule) -> OpticalPipeline:
    """Compile a schedule into Prepare, (BasisRotation) Dissipate ..., Measure.

    Every step becomes its projective limit: a Dissipate stage keeping the
    active modes at the step Hamiltonian's ground energy. A rotation is only
    emitted when the currently active modes are not already eigenmodes.
    """
    n = sched.n_sites
    dim = 1 << n
    basis, labels = _target_basis(sched.steps[0].hamiltonian, None)
    stages = [Stage("Prepare", "Pre", dim, dim, dim, basis=basis, labels=labels)]
    active = tuple(range(dim))
    seen: list[OperatorSum] = []
    n_rot = 0
    for step in sched.steps:
        h = step.hamiltonian
        if not _is_eigenbasis(h, basis, active):
            new_basis, new_labels = _target_basis(h, basis[:, list(active)])
            u = new_basis.conj().T @ basis
            mixers, phases = decompose_unitary(u)
            n_rot += 1
            new_active = _active_after(u, active)
            stages.append(
                Stage(
                    "BasisRotation", f"BR{n_rot}", dim, len(active), len(new_active),
                    mixers=tuple(mixers), phases=tuple(phases), labels=new_labels,
                )
            )
            basis, labels, active = new_basis, new_labels, new_active
        else:
            _term_generators(h)
        idx = next((i for i, g in enumerate(seen) if g == h), None)
        if idx is None:
            seen.append(h)
            idx = len(seen) - 1
        energies = _mode_energies(h, basis)
        e_min = float(np.linalg.eigvalsh(to_dense(h).matrix)[0])
        kept = tuple(k for k in active if energies[k] - e_min <= DEGENERACY_TOL)
        if not kept:
            raise LoweringError(f"step {step.label or idx}: no active mode reaches the ground energy")
        stages.append(Stage("Dissipate", f"DE{idx}", dim, len(active), len(kept), kept=kept, labels=labels))
        active = kept
    stages.append(Stage("Measure", "Measure", dim, len(active), len(active), basis=basis, labels=labels))
    return OpticalPipeline(tuple(stages))


def braid_pipeline() -> OpticalPipeline:
    from .ite import braid_schedule

    return lower(braid_schedule())


# -- simulation -----------------------------------------------------------------

@dataclass(frozen=True)
class StageTrace:
    name: str
    kind: str
    modes_in: int
    modes_out: int
    stage_probability: float
    cumulative_probability: float


@dataclass(frozen=True)
class SimulationResult:
    state: np.ndarray
    amplitudes: np.ndarray
    success_probability: float
    trace: tuple[StageTrace, ...] = ()


def simulate_pipeline(p: OpticalPipeline, psi: np.ndarray, trace: list | None = None) -> SimulationResult:
    """Push ``psi`` (computational basis) through ``p``.

    Each Dissipate renormalizes and multiplies the success probability by the
    fraction of weight that survives. The returned state is normalized and
    written back in the computational basis.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (p.n_modes,):
        raise ValueError(f"input of shape {psi.shape} does not match {p.n_modes} modes")
    n2 = np.vdot(psi, psi).real
    if not n2 > 0:
        raise AnnihilationError("input state is zero")
    prob = 1.0
    amps = None
    records = []
    for st in p.stages:
        step_p = 1.0
        if st.kind == "Prepare":
            amps = st.basis.conj().T @ psi / math.sqrt(n2)
        elif st.kind == "BasisRotation":
            amps = st.unitary @ amps
        elif st.kind == "Dissipate":
            mask = np.full(p.n_modes, math.sqrt(st.leakage))
            mask[list(st.kept)] = 1.0
            out = mask * amps
            step_p = float(np.vdot(out, out).real / np.vdot(amps, amps).real)
            if step_p <= _ANNIHILATION_WEIGHT:
                raise AnnihilationError(f"{st.name}: no weight left in the kept modes")
            amps = out / math.sqrt(np.vdot(out, out).real)
            prob *= step_p
        else:
            final = st.basis @ amps
        records.append(StageTrace(st.name, st.kind, st.modes_in, st.modes_out, step_p, prob))
    if trace is not None:
        trace.extend(records)
    return SimulationResult(final, amps, prob, tuple(records))


def format_trace(records: Sequence[StageTrace]) -> str:
    lines = [f"{'stage':<8}{'kind':<15}{'in':>4}{'out':>5}{'p_stage':>14}{'p_total':>14}"]
    for r in records:
        lines.append(
            f"{r.name:<8}{r.kind:<15}{r.modes_in:>4}{r.modes_out:>5}"
            f"{r.stage_probability:>14.10f}{r.cumulative_probability:>14.10f}"
        )
    return "\n".join(lines)


def dense_projective(sched: Schedule, psi: np.ndarray) -> np.ndarray:
    """Unnormalized P(H_k) ... P(H_1) psi with ground-shifted projections."""
    out = np.asarray(psi, dtype=complex)
    for step in sched:
        out = ite_apply(step.hamiltonian, math.inf, out)
    return out


@dataclass(frozen=True)
class LoweringReport:
    trials: int
    passes: int
    max_state_error: float
    max_probability_error: float
    success_probabilities: tuple[float, ...]
    failures: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.passes == self.trials


def _random_state(dim: int, rng) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def verify_lowering(sched: Schedule, trials: int = 100, pipeline: OpticalPipeline | None = None,
                    seed=0, tol: float = 1e-10) -> LoweringReport:
    """Compare pipeline outputs with the dense projector sequence on random inputs."""
    p = pipeline if pipeline is not None else lower(sched)
    rng = np.random.default_rng(seed)
    passes = 0
    max_s = max_p = 0.0
    probs, failures = [], []
    for trial in range(trials):
        psi = _random_state(p.n_modes, rng)
        dense = dense_projective(sched, psi)
        dense_p = float(np.vdot(dense, dense).real)
        try:
            res = simulate_pipeline(p, psi)
        except AnnihilationError as exc:
            failures.append(f"trial {trial}: {exc}")
            probs.append(0.0)
            continue
        probs.append(res.success_probability)
        err_p = abs(res.success_probability - dense_p)
        err_s = (
            float(np.max(np.abs(res.state - dense / math.sqrt(dense_p))))
            if dense_p > _ANNIHILATION_WEIGHT else math.inf
        )
        max_s, max_p = max(max_s, err_s), max(max_p, err_p)
        if err_s <= tol and err_p <= tol:
            passes += 1
        else:
            failures.append(f"trial {trial}: state error {err_s:.3g}, probability error {err_p:.3g}")
    return LoweringReport(trials, passes, max_s, max_p, tuple(probs), tuple(failures))


def imperfect_dissipation(p: OpticalPipeline, leakage: float) -> OpticalPipeline:
    """Let every Dissipate pass discarded modes with amplitude sqrt(leakage)."""
    if not 0 <= leakage < 1:
        raise ValueError(f"leakage must lie in [0, 1), got {leakage}")
    if leakage == 0:
        return p
    stages = []
    active = tuple(range(p.n_modes))
    for st in p.stages:
        if st.kind == "Prepare":
            stages.append(st)
            continue
        if st.kind == "BasisRotation":
            new_active = _active_after(st.unitary, active)
            stages.append(replace(st, modes_in=len(active), modes_out=len(new_active)))
            active = new_active
        elif st.kind == "Dissipate":
            stages.append(replace(st, modes_in=len(active), modes_out=len(active), leakage=leakage))
        else:
            stages.append(replace(st, modes_in=len(active), modes_out=len(active)))
    return OpticalPipeline(tuple(stages))


def logical_channel(p: OpticalPipeline, logical_modes: tuple[int, int] = (0, 4)):
    """Single-qubit map on (|xxx>, |x'x'x'>): prepare, run ``p``, post-select the two logical modes.

    Linear in the input because every stage is; the density matrix is built
    from the two pure-state responses and their cross terms.
    """
    pre = p.stages[0]
    cols = []
    for m in logical_modes:
        res = simulate_pipeline(p, pre.basis[:, m])
        amp = math.sqrt(res.success_probability) * res.amplitudes
        cols.append(amp)
    r = np.column_stack(cols)
    k = r[list(logical_modes), :]

    def channel(rho):
        rho = np.asarray(rho, dtype=complex)
        out = k @ rho @ k.conj().T
        return out / np.trace(out).real

    channel.response = r
    return channel
