import time

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mzmbraid.pauli import (
    DenseLimitError,
    DenseOperator,
    DimensionError,
    OperatorSum,
    PauliString,
    canonicalize,
    commutes,
    pauli_mul,
    pauli_sum,
    to_dense,
)
from mzmbraid.majorana import spin_hamiltonians

from oracles import P, kron
from oracles import pauli as dense_pauli

words = st.text(alphabet="IXYZ", min_size=3, max_size=3)
coeffs = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
sums = st.lists(st.tuples(coeffs, words), min_size=1, max_size=5).map(lambda ts: pauli_sum(3, ts))


def test_single_site_products():
    assert pauli_mul(PauliString(1, "X"), PauliString(1, "Y")) == PauliString(1j, "Z")
    assert pauli_mul(PauliString(1, "Y"), PauliString(1, "Z")) == PauliString(1j, "X")
    assert pauli_mul(PauliString(1, "XXI"), PauliString(1, "IXX")) == PauliString(1, "XIX")


def test_length_mismatch_rejected():
    with pytest.raises(DimensionError):
        pauli_mul(PauliString(1, "XX"), PauliString(1, "X"))


def test_canonicalize_merges_cancels_and_sorts():
    assert canonicalize(pauli_sum(2, [(1, "XI"), (1, "XI")])).as_dict() == {"XI": 2}
    assert canonicalize(pauli_sum(2, [(1, "XI"), (-1, "XI")])).is_zero
    assert [t.letters for t in canonicalize(pauli_sum(1, [(1, "Z"), (1, "X")])).terms] == ["X", "Z"]


def test_commutation_examples():
    xx1 = pauli_sum(3, [(1, "XXI")])
    xx2 = pauli_sum(3, [(1, "IXX")])
    proj = pauli_sum(3, [(0.5, "ZII"), (0.5, "III")])
    assert commutes(xx1, xx2)
    assert commutes(xx2, proj)
    assert not commutes(pauli_sum(1, [(1, "X")]), pauli_sum(1, [(1, "Z")]))


def test_dense_examples():
    assert np.array_equal(to_dense(OperatorSum.identity(1)).matrix, np.eye(2))
    h0 = spin_hamiltonians()[0]
    w = np.linalg.eigvalsh(to_dense(h0).matrix)
    assert np.allclose(w, [-2, -2, 0, 0, 0, 0, 2, 2], atol=1e-12)
    proj = to_dense(pauli_sum(3, [(0.5, "ZII"), (0.5, "III")])).matrix
    assert np.allclose(np.linalg.eigvalsh(proj), [0] * 4 + [1] * 4, atol=1e-12)


def test_site_one_is_most_significant():
    m = to_dense(pauli_sum(3, [(1, "ZII")])).matrix
    assert np.allclose(np.diag(m).real, [1, 1, 1, 1, -1, -1, -1, -1])


@pytest.mark.parametrize("word", ["XYZ", "YYI", "ZXY", "IIY", "YZX"])
def test_dense_matches_kron_oracle(word):
    assert np.allclose(to_dense(pauli_sum(3, [(1, word)])).matrix, dense_pauli(word), atol=0)


def test_reference_hamiltonians_are_hermitian_symbolically():
    for h in spin_hamiltonians():
        assert h.is_hermitian
        m = to_dense(h).matrix
        assert np.max(np.abs(m - m.conj().T)) == 0


@settings(max_examples=60, deadline=None)
@given(words, words, words)
def test_associativity(a, b, c):
    pa, pb, pc = PauliString(1, a), PauliString(1, b), PauliString(1, c)
    assert (pa * pb) * pc == pa * (pb * pc)


@settings(max_examples=60, deadline=None)
@given(sums, sums)
def test_dense_homomorphism(a, b):
    lhs = to_dense(a * b, 3).matrix
    rhs = to_dense(a, 3).matrix @ to_dense(b, 3).matrix
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


@settings(max_examples=60, deadline=None)
@given(sums, sums)
def test_commutes_agrees_with_dense_commutator(a, b):
    da, db = to_dense(a, 3).matrix, to_dense(b, 3).matrix
    dense_commute = np.max(np.abs(da @ db - db @ da)) <= 1e-12
    assert commutes(a, b) == dense_commute


@settings(max_examples=40, deadline=None)
@given(sums)
def test_text_round_trip(a):
    assert OperatorSum.from_text(a.to_text(), 3) == a


def test_hermitian_flag_is_checked():
    with pytest.raises(ValueError):
        DenseOperator(np.array([[0, 1], [0, 0]], dtype=complex), hermitian=True)
    with pytest.raises(DimensionError):
        DenseOperator(np.eye(3))


def test_dense_limit():
    with pytest.raises(DenseLimitError):
        to_dense(OperatorSum.identity(13))


def test_stress_twelve_sites():
    rng = np.random.default_rng(7)
    terms = [(rng.normal(), "".join(rng.choice(list("IXYZ"), 12))) for _ in range(20)]
    op = pauli_sum(12, terms)
    op = op + op.adjoint()
    start = time.perf_counter()
    d = to_dense(op)
    assert time.perf_counter() - start < 30
    assert d.hermitian
    # spot-check one term against the kron oracle on a random column
    c, w = terms[0]
    col = int(rng.integers(0, 1 << 12))
    bits = [(col >> (11 - k)) & 1 for k in range(12)]
    expected = kron(*(P[letter] @ np.eye(2)[b] for letter, b in zip(w, bits)))
    single = to_dense(pauli_sum(12, [(1, w)])).matrix[:, col]
    assert np.allclose(single, expected)
