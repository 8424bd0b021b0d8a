import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mzmbraid.majorana import (
    RECONCILIATION,
    JWConvention,
    MajoranaOperatorSum,
    annihilation,
    convention_report,
    creation,
    jordan_wigner,
    kitaev_hamiltonians,
    majorana_canonicalize,
    majorana_dense,
    majorana_to_dense,
    parity_operator,
    reconcile,
    relabel_site,
    relabel_unitary,
    spectra_match,
    spin_hamiltonians,
)
from mzmbraid.pauli import pauli_sum, to_dense

import oracles

CONVENTIONS = [JWConvention.A, JWConvention.B]


def mono(coeff, *idx):
    return MajoranaOperatorSum.from_terms(3, [(coeff, idx)])


def test_reordering_examples():
    assert majorana_canonicalize(mono(1, 3, 2)) == mono(-1, 2, 3)
    assert majorana_canonicalize(mono(1, 2, 2)) == MajoranaOperatorSum.from_terms(3, [(1, ())])
    assert majorana_canonicalize(mono(1, 4, 1, 4)) == mono(-1, 1)


def test_reordering_against_dense():
    m = mono(1, 4, 1, 4)
    dense = oracles.gamma(4, 3) @ oracles.gamma(1, 3) @ oracles.gamma(4, 3)
    assert np.allclose(majorana_to_dense(majorana_canonicalize(m)), dense)


@pytest.mark.parametrize(
    "idx, word, coeff",
    [((2, 3), "XXI", -1), ((4, 5), "IXX", -1), ((2, 6), "XZY", -1)],
)
def test_convention_a_images(idx, word, coeff):
    img = jordan_wigner(mono(1j, *idx), JWConvention.A)
    assert img == pauli_sum(3, [(coeff, word)])
    dense = 1j * oracles.gamma(idx[0], 3) @ oracles.gamma(idx[1], 3)
    assert np.allclose(to_dense(img).matrix, dense, atol=1e-14)


@pytest.mark.parametrize("conv", CONVENTIONS)
def test_clifford_relations(conv):
    gs = [majorana_dense(k, 3, conv) for k in range(1, 7)]
    for k, l in itertools.product(range(6), repeat=2):
        anti = gs[k] @ gs[l] + gs[l] @ gs[k]
        expected = 2 * np.eye(8) if k == l else np.zeros((8, 8))
        assert np.array_equal(anti, expected)


def test_convention_a_matches_oracle_gammas():
    for k in range(1, 7):
        assert np.array_equal(majorana_dense(k, 3, JWConvention.A), oracles.gamma(k, 3))


indices = st.lists(st.integers(1, 6), min_size=0, max_size=4)


@settings(max_examples=60, deadline=None)
@given(indices, indices, st.sampled_from(CONVENTIONS))
def test_jw_homomorphism(a, b, conv):
    ma, mb = mono(1, *a), mono(1, *b)
    lhs = to_dense(jordan_wigner(ma * mb, conv), 3).matrix
    rhs = to_dense(jordan_wigner(ma, conv), 3).matrix @ to_dense(jordan_wigner(mb, conv), 3).matrix
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_kitaev_forms():
    h0, h1, h2 = kitaev_hamiltonians()
    assert len(h0.terms) == 2
    assert h1.coefficient(1, 2) == pytest.approx(0.5j)
    for h in (h0, h1, h2):
        assert majorana_canonicalize(h).is_hermitian


def test_spin_forms():
    h0, h1, h2 = spin_hamiltonians()
    assert h0 == pauli_sum(3, [(-1, "XXI"), (-1, "IXX")])
    assert h1 == pauli_sum(3, [(-1, "IXX"), (0.5, "ZII"), (0.5, "III")])
    assert h2 == pauli_sum(3, [(-1, "IXX"), (-1, "XZY")])
    for h, ref in zip((h0, h1, h2), (oracles.H0, oracles.H1, oracles.H2)):
        assert np.array_equal(to_dense(h).matrix, ref)


def test_parity():
    p = parity_operator(3)
    assert p == pauli_sum(3, [(1, "ZZZ")])
    d = to_dense(p).matrix
    assert np.allclose(np.linalg.eigvalsh(d), [-1] * 4 + [1] * 4)
    for h in spin_hamiltonians():
        m = to_dense(h).matrix
        assert np.max(np.abs(d @ m - m @ d)) <= 1e-12


def test_spectra_examples():
    h0, _, h2 = spin_hamiltonians()
    k0, _, k2 = kitaev_hamiltonians()
    assert spectra_match(majorana_to_dense(k0), to_dense(h0))[0]
    assert spectra_match(majorana_to_dense(k2), to_dense(h2))[0]
    ok, dev = spectra_match(to_dense(h0), to_dense(h0 + 1))
    assert not ok and dev == pytest.approx(1)


def test_h1_image_and_reconciliation():
    _, k1, _ = kitaev_hamiltonians()
    _, h1, _ = spin_hamiltonians()
    img = jordan_wigner(k1, JWConvention.A)
    assert img == pauli_sum(3, [(-1, "IXX"), (-0.5, "ZII")])
    ok, dev = spectra_match(img, h1)
    assert not ok and dev == pytest.approx(0.5)
    rec = reconcile(img, *RECONCILIATION[1])
    assert rec == h1
    # ground projectors are related by the site-1 relabeling unitary
    u = relabel_unitary(1, 3)
    w, v = np.linalg.eigh(to_dense(img).matrix)
    p_img = v[:, :2] @ v[:, :2].conj().T
    assert np.allclose(u @ p_img @ u.conj().T, oracles.projector(oracles.H1), atol=1e-12)


def test_relabel_is_conjugation():
    op = pauli_sum(3, [(1, "ZXY"), (2, "YII"), (3, "XZZ")])
    u = relabel_unitary(1, 3)
    assert np.allclose(to_dense(relabel_site(op, 1)).matrix, u @ to_dense(op).matrix @ u.conj().T)


@pytest.mark.parametrize("conv", CONVENTIONS)
def test_convention_report(conv):
    rows = convention_report(conv)
    assert [r.index for r in rows] == [0, 1, 2]
    assert rows[0].spectra_match and rows[2].spectra_match
    # H1 differs from its image by the constant 1/2 under either convention
    assert not rows[1].spectra_match and rows[1].max_deviation == pytest.approx(0.5)
    if conv is JWConvention.A:
        assert all(r.reconciled_identical for r in rows)
    else:
        assert rows[0].jw_image == pauli_sum(3, [(1, "YYI"), (1, "IYY")])


def test_fermion_modes():
    c1 = majorana_to_dense(annihilation(1, 3))
    assert np.allclose(c1 @ c1, 0)
    n1 = majorana_to_dense(creation(1, 3) * annihilation(1, 3))
    assert np.allclose(n1 @ n1, n1)
    anti = c1 @ majorana_to_dense(creation(1, 3)) + majorana_to_dense(creation(1, 3)) @ c1
    assert np.allclose(anti, np.eye(8))


def test_text_round_trip():
    for h in kitaev_hamiltonians():
        assert MajoranaOperatorSum.from_text(h.to_text(), 3) == h
