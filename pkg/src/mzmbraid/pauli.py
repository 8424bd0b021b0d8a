"""Pauli-string algebra on L spin-1/2 sites.

A Pauli string is stored as a complex coefficient and a letter word over
``IXYZ``. Site 1 is the leftmost letter and the most significant tensor
factor of the dense realization, which is built in the sigma^z eigenbasis
with ``Z|0> = +|0>``.

Operator sums keep their terms as given; :func:`canonicalize` merges
duplicates, drops zeros and sorts terms lexicographically by letters.
Constants are stored as the all-``I`` string.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

LETTERS = "IXYZ"
ZERO_TOL = 1e-14
MAX_DENSE_SITES = 12

# (a, b) -> (phase, letter) for the single-site product a*b
_SITE_PRODUCT: dict[tuple[str, str], tuple[complex, str]] = {}
for _a in LETTERS:
    _SITE_PRODUCT[("I", _a)] = (1, _a)
    _SITE_PRODUCT[(_a, "I")] = (1, _a)
    _SITE_PRODUCT[(_a, _a)] = (1, "I")
for _a, _b, _c in (("X", "Y", "Z"), ("Y", "Z", "X"), ("Z", "X", "Y")):
    _SITE_PRODUCT[(_a, _b)] = (1j, _c)
    _SITE_PRODUCT[(_b, _a)] = (-1j, _c)


class DimensionError(ValueError):
    """Operands act on different numbers of sites."""


class DenseLimitError(ValueError):
    """Requested dense realization exceeds the configured site limit."""


@dataclass(frozen=True)
class PauliString:
    coeff: complex
    letters: str

    def __post_init__(self):
        if not self.letters or any(ch not in LETTERS for ch in self.letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        object.__setattr__(self, "coeff", complex(self.coeff))

    @property
    def n_sites(self) -> int:
        return len(self.letters)

    def __mul__(self, other):
        if isinstance(other, PauliString):
            return pauli_mul(self, other)
        return PauliString(self.coeff * other, self.letters)

    def __rmul__(self, other):
        return PauliString(self.coeff * other, self.letters)

    def adjoint(self) -> PauliString:
        return PauliString(self.coeff.conjugate(), self.letters)

    def commutes_with(self, other: PauliString) -> bool:
        """Two Pauli words commute iff they differ on an even number of non-identity sites."""
        clashes = sum(
            1 for a, b in zip(self.letters, other.letters) if a != "I" and b != "I" and a != b
        )
        return clashes % 2 == 0


def pauli_mul(a: PauliString, b: PauliString) -> PauliString:
    """Product ``a*b`` as a single Pauli string with the accumulated phase."""
    if a.n_sites != b.n_sites:
        raise DimensionError(f"length mismatch: {a.n_sites} vs {b.n_sites}")
    phase = a.coeff * b.coeff
    out = []
    for x, y in zip(a.letters, b.letters):
        p, c = _SITE_PRODUCT[(x, y)]
        phase *= p
        out.append(c)
    return PauliString(phase, "".join(out))


@dataclass(frozen=True)
class OperatorSum:
    """Weighted sum of Pauli strings on ``n_sites`` sites."""

    n_sites: int
    terms: tuple[PauliString, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if term.n_sites != self.n_sites:
                raise DimensionError(
                    f"term {term.letters} has {term.n_sites} sites, expected {self.n_sites}"
                )

    # -- construction -------------------------------------------------
    @classmethod
    def from_dict(cls, coeffs: Mapping[str, complex]) -> OperatorSum:
        """Build from ``{"XXI": -1, ...}``."""
        items = list(coeffs.items())
        if not items:
            raise ValueError("cannot infer site count from an empty mapping")
        n = len(items[0][0])
        return cls(n, tuple(PauliString(c, w) for w, c in items))

    @classmethod
    def identity(cls, n_sites: int, coeff: complex = 1.0) -> OperatorSum:
        return cls(n_sites, (PauliString(coeff, "I" * n_sites),))

    @classmethod
    def zero(cls, n_sites: int) -> OperatorSum:
        return cls(n_sites, ())

    @classmethod
    def site(cls, letter: str, site: int, n_sites: int, coeff: complex = 1.0) -> OperatorSum:
        """Single-site Pauli ``letter`` on 1-based ``site``."""
        if not 1 <= site <= n_sites:
            raise ValueError(f"site {site} outside 1..{n_sites}")
        word = "I" * (site - 1) + letter + "I" * (n_sites - site)
        return cls(n_sites, (PauliString(coeff, word),))

    # -- algebra ------------------------------------------------------
    def _check(self, other: OperatorSum) -> None:
        if other.n_sites != self.n_sites:
            raise DimensionError(f"length mismatch: {self.n_sites} vs {other.n_sites}")

    def _coerce(self, other) -> OperatorSum:
        if isinstance(other, OperatorSum):
            self._check(other)
            return other
        if isinstance(other, PauliString):
            return OperatorSum(self.n_sites, (other,))
        if np.isscalar(other):
            return OperatorSum.identity(self.n_sites, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return canonicalize(OperatorSum(self.n_sites, self.terms + other.terms))

    __radd__ = __add__

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (OperatorSum, PauliString)):
            other = self._coerce(other)
            prods = [pauli_mul(a, b) for a in self.terms for b in other.terms]
            return canonicalize(OperatorSum(self.n_sites, tuple(prods)))
        if np.isscalar(other):
            return OperatorSum(self.n_sites, tuple(t * other for t in self.terms))
        return NotImplemented

    def __rmul__(self, other):
        if np.isscalar(other):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        return self * (1 / other)

    def adjoint(self) -> OperatorSum:
        return OperatorSum(self.n_sites, tuple(t.adjoint() for t in self.terms))

    def as_dict(self) -> dict[str, complex]:
        return {t.letters: t.coeff for t in canonicalize(self).terms}

    @property
    def is_zero(self) -> bool:
        return not canonicalize(self).terms

    @property
    def is_hermitian(self) -> bool:
        """Symbolic check: every canonical term is self-paired (real coefficient)."""
        return (self - self.adjoint()).is_zero

    def constant(self) -> complex:
        return self.as_dict().get("I" * self.n_sites, 0j)

    def __eq__(self, other):
        if not isinstance(other, OperatorSum):
            return NotImplemented
        return self.n_sites == other.n_sites and (self - other).is_zero

    def __hash__(self):
        return hash((self.n_sites, canonicalize(self).terms))

    def __repr__(self):
        body = " + ".join(f"({_fmt_coeff(t.coeff)}){t.letters}" for t in canonicalize(self).terms)
        return f"OperatorSum[{self.n_sites}]({body or '0'})"

    # -- text wire format ---------------------------------------------
    def to_text(self) -> str:
        """One term per line: ``coeff_re coeff_im LETTERS``."""
        lines = [
            f"{_num(t.coeff.real)} {_num(t.coeff.imag)} {t.letters}"
            for t in canonicalize(self).terms
        ]
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_text(cls, text: str, n_sites: int | None = None) -> OperatorSum:
        terms = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 're im LETTERS', got {raw!r}")
            re, im, word = parts
            terms.append(PauliString(complex(float(re), float(im)), word))
        if n_sites is None:
            if not terms:
                raise ValueError("empty operator text needs an explicit n_sites")
            n_sites = terms[0].n_sites
        return canonicalize(cls(n_sites, tuple(terms)))


def _num(x: float) -> str:
    x = 0.0 if x == 0 else x
    return format(x, ".17g")


def _fmt_coeff(c: complex) -> str:
    if c.imag == 0:
        return f"{c.real:g}"
    return f"{c:g}"


def canonicalize(op: OperatorSum) -> OperatorSum:
    """Merge duplicate words, drop (near-)zero terms, sort by letters."""
    acc: dict[str, complex] = {}
    for t in op.terms:
        acc[t.letters] = acc.get(t.letters, 0j) + t.coeff
    terms = tuple(
        PauliString(c, w) for w, c in sorted(acc.items()) if abs(c) > ZERO_TOL
    )
    return OperatorSum(op.n_sites, terms)


def commutes(a: OperatorSum, b: OperatorSum) -> bool:
    """True iff the commutator ``ab - ba`` cancels exactly."""
    if a.n_sites != b.n_sites:
        raise DimensionError(f"length mismatch: {a.n_sites} vs {b.n_sites}")
    return (a * b - b * a).is_zero


def pauli_sum(n_sites: int, terms: Iterable[tuple[complex, str]]) -> OperatorSum:
    return canonicalize(OperatorSum(n_sites, tuple(PauliString(c, w) for c, w in terms)))


@dataclass(frozen=True)
class DenseOperator:
    """A ``2^L x 2^L`` matrix plus a Hermiticity flag."""

    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionError(f"dense operator must be square, got shape {m.shape}")
        dim = m.shape[0]
        if dim < 1 or dim & (dim - 1):
            raise DimensionError(f"dimension {dim} is not a power of two")
        if self.hermitian and dim and np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise ValueError("hermitian flag set on a non-Hermitian matrix")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_sites(self) -> int:
        return self.dim.bit_length() - 1

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __matmul__(self, other):
        return self.matrix @ np.asarray(other)


def to_dense(op: OperatorSum, n_sites: int | None = None, *, max_sites: int = MAX_DENSE_SITES) -> DenseOperator:
    """Dense realization in the sigma^z computational basis.

    Each Pauli string is a signed permutation: ``P|c> = i^{#Y} (-1)^{|c & zy|} |c ^ x>``
    with ``x`` the mask of X/Y sites and ``zy`` the mask of Z/Y sites.
    """
    n = op.n_sites if n_sites is None else n_sites
    if n != op.n_sites:
        raise DimensionError(f"operator has {op.n_sites} sites, asked for {n}")
    if n > max_sites:
        raise DenseLimitError(f"{n} sites exceeds dense limit of {max_sites}")
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim)
    op = canonicalize(op)
    for term in op.terms:
        xmask = zmask = ny = 0
        for k, ch in enumerate(term.letters):
            bit = 1 << (n - 1 - k)
            if ch in "XY":
                xmask |= bit
            if ch in "ZY":
                zmask |= bit
            ny += ch == "Y"
        parity = (np.bitwise_count(cols & zmask) & 1).astype(np.int64)
        vals = term.coeff * (1j**ny) * (1 - 2 * parity)
        out[cols ^ xmask, cols] += vals
    return DenseOperator(out, hermitian=op.is_hermitian)

