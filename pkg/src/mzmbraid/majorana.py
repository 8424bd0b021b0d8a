"""Majorana operators, the Jordan-Wigner map and the three-site Kitaev-chain presets.

Majoranas are labelled ``1..2L``. Two Jordan-Wigner conventions are provided:

* ``A``: gamma_{2j-1} = Z_1...Z_{j-1} X_j,  gamma_{2j} = Z_1...Z_{j-1} Y_j
* ``B``: gamma_{2j-1} = Z_1...Z_{j-1} Y_j,  gamma_{2j} = Z_1...Z_{j-1} X_j

Fermion modes are ``c_j = (gamma_{2j-1} + i gamma_{2j}) / 2``.

The reference spin Hamiltonians (:func:`spin_hamiltonians`) are the ones every
downstream simulation uses. Under convention A the Jordan-Wigner image of
``H1^MF`` is ``-X2X3 - Z1/2`` rather than the reference ``-X2X3 + (Z1 + 1)/2``;
:func:`relabel_site` and :func:`reconcile` map one onto the other.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .pauli import (
    DenseOperator,
    OperatorSum,
    PauliString,
    canonicalize,
    pauli_mul,
    pauli_sum,
    to_dense,
)

ZERO_TOL = 1e-14


class JWConvention(enum.Enum):
    A = "A"
    B = "B"


@dataclass(frozen=True)
class MajoranaMonomial:
    """``coeff * gamma_{i1} gamma_{i2} ...`` with indices in product order."""

    coeff: complex
    indices: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "coeff", complex(self.coeff))
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))


def _normal_order(indices: Iterable[int]) -> tuple[int, tuple[int, ...]]:
    """Sort by adjacent transpositions (each flips the sign) and cancel gamma^2 = 1."""
    seq = list(indices)
    sign = 1
    for i in range(len(seq)):
        for j in range(len(seq) - 1 - i):
            if seq[j] > seq[j + 1]:
                seq[j], seq[j + 1] = seq[j + 1], seq[j]
                sign = -sign
    out: list[int] = []
    for k in seq:
        if out and out[-1] == k:
            out.pop()
        else:
            out.append(k)
    return sign, tuple(out)


@dataclass(frozen=True)
class MajoranaOperatorSum:
    n_sites: int
    terms: tuple[MajoranaMonomial, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        top = 2 * self.n_sites
        for m in self.terms:
            for k in m.indices:
                if not 1 <= k <= top:
                    raise IndexError(f"Majorana index {k} outside 1..{top}")

    @classmethod
    def from_terms(cls, n_sites: int, terms: Iterable[tuple[complex, Iterable[int]]]) -> MajoranaOperatorSum:
        return majorana_canonicalize(
            cls(n_sites, tuple(MajoranaMonomial(c, tuple(ix)) for c, ix in terms))
        )

    @classmethod
    def gamma(cls, k: int, n_sites: int) -> MajoranaOperatorSum:
        return cls(n_sites, (MajoranaMonomial(1, (k,)),))

    def _coerce(self, other):
        if isinstance(other, MajoranaOperatorSum):
            if other.n_sites != self.n_sites:
                raise ValueError(f"site mismatch: {self.n_sites} vs {other.n_sites}")
            return other
        if np.isscalar(other):
            return MajoranaOperatorSum(self.n_sites, (MajoranaMonomial(other, ()),))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return majorana_canonicalize(MajoranaOperatorSum(self.n_sites, self.terms + other.terms))

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + other * -1

    def __mul__(self, other):
        if np.isscalar(other):
            return MajoranaOperatorSum(
                self.n_sites, tuple(MajoranaMonomial(m.coeff * other, m.indices) for m in self.terms)
            )
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        prods = tuple(
            MajoranaMonomial(a.coeff * b.coeff, a.indices + b.indices)
            for a in self.terms
            for b in other.terms
        )
        return majorana_canonicalize(MajoranaOperatorSum(self.n_sites, prods))

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return NotImplemented

    def adjoint(self) -> MajoranaOperatorSum:
        # (g_a g_b ... g_k)^dagger = g_k ... g_b g_a
        return majorana_canonicalize(
            MajoranaOperatorSum(
                self.n_sites,
                tuple(MajoranaMonomial(m.coeff.conjugate(), m.indices[::-1]) for m in self.terms),
            )
        )

    @property
    def is_zero(self) -> bool:
        return not majorana_canonicalize(self).terms

    @property
    def is_hermitian(self) -> bool:
        return (self - self.adjoint()).is_zero

    def coefficient(self, *indices: int) -> complex:
        sign, key = _normal_order(indices)
        for m in majorana_canonicalize(self).terms:
            if m.indices == key:
                return sign * m.coeff
        return 0j

    def __eq__(self, other):
        if not isinstance(other, MajoranaOperatorSum):
            return NotImplemented
        return self.n_sites == other.n_sites and (self - other).is_zero

    def __hash__(self):
        return hash((self.n_sites, majorana_canonicalize(self).terms))

    def to_text(self) -> str:
        """One monomial per line: ``coeff_re coeff_im i1 i2 ... ik``."""
        lines = []
        for m in majorana_canonicalize(self).terms:
            fields = [format(m.coeff.real + 0.0, ".17g"), format(m.coeff.imag + 0.0, ".17g")]
            lines.append(" ".join(fields + [str(k) for k in m.indices]))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, n_sites: int) -> MajoranaOperatorSum:
        terms = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ValueError(f"line {lineno}: expected 're im i1 ... ik', got {raw!r}")
            coeff = complex(float(parts[0]), float(parts[1]))
            terms.append((coeff, [int(p) for p in parts[2:]]))
        return cls.from_terms(n_sites, terms)


def majorana_canonicalize(m: MajoranaOperatorSum) -> MajoranaOperatorSum:
    """Normal-order every monomial, merge equal index sets and drop zeros."""
    acc: dict[tuple[int, ...], complex] = {}
    for mono in m.terms:
        sign, key = _normal_order(mono.indices)
        acc[key] = acc.get(key, 0j) + sign * mono.coeff
    terms = tuple(
        MajoranaMonomial(c, k)
        for k, c in sorted(acc.items(), key=lambda kv: (len(kv[0]), kv[0]))
        if abs(c) > ZERO_TOL
    )
    return MajoranaOperatorSum(m.n_sites, terms)


# -- Jordan-Wigner ---------------------------------------------------------

def majorana_pauli(k: int, n_sites: int, conv: JWConvention = JWConvention.A) -> PauliString:
    """Pauli string realizing gamma_k."""
    if not 1 <= k <= 2 * n_sites:
        raise IndexError(f"Majorana index {k} outside 1..{2 * n_sites}")
    site = (k + 1) // 2
    odd = k % 2 == 1
    if conv is JWConvention.A:
        letter = "X" if odd else "Y"
    else:
        letter = "Y" if odd else "X"
    word = "Z" * (site - 1) + letter + "I" * (n_sites - site)
    return PauliString(1, word)


def jordan_wigner(m: MajoranaOperatorSum, conv: JWConvention = JWConvention.A, n_sites: int | None = None) -> OperatorSum:
    n = m.n_sites if n_sites is None else n_sites
    if n < m.n_sites:
        raise ValueError(f"operator needs {m.n_sites} sites, got {n}")
    images = []
    for mono in majorana_canonicalize(m).terms:
        p = PauliString(mono.coeff, "I" * n)
        for k in mono.indices:
            p = pauli_mul(p, majorana_pauli(k, n, conv))
        images.append(p)
    return canonicalize(OperatorSum(n, tuple(images)))


def majorana_dense(k: int, n_sites: int, conv: JWConvention = JWConvention.A) -> np.ndarray:
    """Explicit matrix of gamma_k built from Kronecker products (independent of the Pauli algebra)."""
    I2 = np.eye(2)
    X = np.array([[0, 1], [1, 0]], dtype=complex)
    Y = np.array([[0, -1j], [1j, 0]])
    Z = np.diag([1.0, -1.0]).astype(complex)
    site = (k + 1) // 2
    odd = k % 2 == 1
    end = (X if odd else Y) if conv is JWConvention.A else (Y if odd else X)
    mats = [Z] * (site - 1) + [end] + [I2] * (n_sites - site)
    out = np.array([[1.0 + 0j]])
    for a in mats:
        out = np.kron(out, a)
    return out


def majorana_to_dense(m: MajoranaOperatorSum, conv: JWConvention = JWConvention.A) -> np.ndarray:
    """Dense matrix of a Majorana sum using the explicit gamma matrices."""
    n = m.n_sites
    dim = 1 << n
    gammas = {k: majorana_dense(k, n, conv) for k in range(1, 2 * n + 1)}
    out = np.zeros((dim, dim), dtype=complex)
    for mono in m.terms:
        term = mono.coeff * np.eye(dim, dtype=complex)
        for k in mono.indices:
            term = term @ gammas[k]
        out += term
    return out


# -- fermion modes and presets -----------------------------------------------

def annihilation(j: int, n_sites: int) -> MajoranaOperatorSum:
    """c_j = (gamma_{2j-1} + i gamma_{2j}) / 2."""
    return MajoranaOperatorSum.from_terms(n_sites, [(0.5, (2 * j - 1,)), (0.5j, (2 * j,))])


def creation(j: int, n_sites: int) -> MajoranaOperatorSum:
    return annihilation(j, n_sites).adjoint()


def _require_three(n_sites: int) -> None:
    if n_sites != 3:
        raise ValueError(f"only the three-site braid preset is shipped (got L={n_sites})")


def kitaev_hamiltonians(n_sites: int = 3) -> tuple[MajoranaOperatorSum, MajoranaOperatorSum, MajoranaOperatorSum]:
    """H0^MF, H1^MF, H2^MF of the three-site exchange schedule."""
    _require_three(n_sites)
    h0 = MajoranaOperatorSum.from_terms(3, [(1j, (2, 3)), (1j, (4, 5))])
    h1 = MajoranaOperatorSum.from_terms(3, [(1j, (4, 5)), (0.5j, (1, 2))])
    h2 = MajoranaOperatorSum.from_terms(3, [(1j, (4, 5)), (1j, (2, 6))])
    return h0, h1, h2


def spin_hamiltonians(n_sites: int = 3) -> tuple[OperatorSum, OperatorSum, OperatorSum]:
    """The reference spin Hamiltonians H0, H1, H2 (normative for all simulations)."""
    _require_three(n_sites)
    h0 = pauli_sum(3, [(-1, "XXI"), (-1, "IXX")])
    h1 = pauli_sum(3, [(-1, "IXX"), (0.5, "ZII"), (0.5, "III")])
    h2 = pauli_sum(3, [(-1, "IXX"), (-1, "XZY")])
    return h0, h1, h2


def parity_operator(n_sites: int) -> OperatorSum:
    """Total fermion parity under Jordan-Wigner: Z on every site."""
    return OperatorSum(n_sites, (PauliString(1, "Z" * n_sites),))


def relabel_site(op: OperatorSum, site: int) -> OperatorSum:
    """Conjugate by X on ``site``: flips the sign of Y and Z there (Z -> -Z)."""
    out = []
    for t in op.terms:
        flip = t.letters[site - 1] in "YZ"
        out.append(PauliString(-t.coeff if flip else t.coeff, t.letters))
    return canonicalize(OperatorSum(op.n_sites, tuple(out)))


def relabel_unitary(site: int, n_sites: int) -> np.ndarray:
    """Dense X_site, the unitary implementing :func:`relabel_site`."""
    return to_dense(OperatorSum.site("X", site, n_sites)).matrix


def reconcile(op: OperatorSum, flip_sites: Iterable[int] = (), offset: float = 0.0) -> OperatorSum:
    for s in flip_sites:
        op = relabel_site(op, s)
    return canonicalize(op + offset) if offset else canonicalize(op)


# site relabelings and constant offsets mapping the convention-A image onto the reference form
RECONCILIATION = {
    0: ((), 0.0),
    1: ((1,), 0.5),
    2: ((), 0.0),
}


@dataclass(frozen=True)
class ConventionReport:
    index: int
    jw_image: OperatorSum
    reference: OperatorSum
    identical: bool
    spectra_match: bool
    max_deviation: float
    reconciled_identical: bool
    flip_sites: tuple[int, ...]
    offset: float


def convention_report(conv: JWConvention = JWConvention.A, tol: float = 1e-10) -> list[ConventionReport]:
    """Compare each Jordan-Wigner image with the reference spin Hamiltonian."""
    reports = []
    for j, (mf, spin) in enumerate(zip(kitaev_hamiltonians(), spin_hamiltonians())):
        image = jordan_wigner(mf, conv)
        ok, dev = spectra_match(to_dense(image), to_dense(spin), tol)
        flips, offset = RECONCILIATION[j] if conv is JWConvention.A else ((), 0.0)
        reports.append(
            ConventionReport(
                index=j,
                jw_image=image,
                reference=spin,
                identical=image == spin,
                spectra_match=ok,
                max_deviation=dev,
                reconciled_identical=reconcile(image, flips, offset) == spin,
                flip_sites=tuple(flips),
                offset=offset,
            )
        )
    return reports


def _as_matrix(x) -> np.ndarray:
    if isinstance(x, OperatorSum):
        x = to_dense(x)
    if isinstance(x, DenseOperator):
        x = x.matrix
    return np.asarray(x, dtype=complex)


def spectra_match(a, b, tol: float = 1e-10) -> tuple[bool, float]:
    """Compare sorted eigenvalue lists of two Hermitian matrices."""
    ma, mb = (_as_matrix(x) for x in (a, b))
    if ma.shape != mb.shape:
        raise ValueError(f"dimension mismatch: {ma.shape} vs {mb.shape}")
    for m in (ma, mb):
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("spectra_match needs Hermitian input")
    dev = float(np.max(np.abs(np.linalg.eigvalsh(ma) - np.linalg.eigvalsh(mb))))
    return dev <= tol, dev


# -- local error operators ------------------------------------------------------

@dataclass(frozen=True)
class ErrorOperator:
    kind: str
    site: int
    fermionic: MajoranaOperatorSum
    spin: OperatorSum
    note: str = ""


def flip_error(site: int = 1, n_sites: int = 3, conv: JWConvention = JWConvention.A) -> ErrorOperator:
    """Two-site hop c_j^dagger c_{j+1}; the spin form is the convention's image."""
    ferm = creation(site, n_sites) * annihilation(site + 1, n_sites)
    return ErrorOperator("flip", site, ferm, jordan_wigner(ferm, conv))


def phase_error(site: int = 1, n_sites: int = 3, conv: JWConvention = JWConvention.A) -> ErrorOperator:
    ferm = creation(site, n_sites) * annihilation(site, n_sites)
    return ErrorOperator("phase", site, ferm, jordan_wigner(ferm, conv))


def reference_noise_operators() -> tuple[ErrorOperator, ErrorOperator]:
    """Site-1 flip and phase errors carrying the reference spin forms.

    Under convention A the image of c1^dag c2 is the adjoint of the reference
    flip form, and the image of c1^dag c1 is (1 - Z1)/2, which the site-1
    relabeling that reconciles H1 turns into the reference (Z1 + 1)/2.
    """
    flip_spin = pauli_sum(
        3, [(0.25j, "YXI"), (0.25, "YYI"), (0.25, "XXI"), (-0.25j, "XYI")]
    )
    phase_spin = pauli_sum(3, [(0.5, "ZII"), (0.5, "III")])
    flip = ErrorOperator(
        "flip", 1, creation(1, 3) * annihilation(2, 3), flip_spin,
        note="convention-A image of the fermionic form is the adjoint of this spin form",
    )
    phase = ErrorOperator(
        "phase", 1, creation(1, 3) * annihilation(1, 3), phase_spin,
        note="convention-A image of the fermionic form is this spin form relabeled on site 1",
    )
    return flip, phase
