import numpy as np
import pytest

from errors import DimensionError, DomainError, InputError
from seqspace import (
    CoeffSeq,
    ConvVerdict,
    FreqLattice,
    Parity,
    bracket,
    conv_gate,
    convolve,
    embed_full,
    hs_norm,
    hs_pairing,
    restrict_parity,
)


def _random_seq(rng, parity, n):
    lattice = FreqLattice(parity, n)
    return CoeffSeq(lattice, rng.standard_normal(lattice.size) + 1j * rng.standard_normal(lattice.size))


def _convolve_oracle(a, b, out_lattice):
    """Suma directa sobre pares de frecuencias físicas"""
    fa, fb, fo = a.frequencies(), b.frequencies(), out_lattice.frequencies()
    out = np.zeros(out_lattice.size, dtype=complex)
    for k, f in enumerate(fo):
        for i in range(a.lattice.size):
            for j in range(b.lattice.size):
                if fa[i] + fb[j] == f:
                    out[k] += a.coeffs[i] * b.coeffs[j]
    return out


# ============== RETÍCULAS ==============

def test_frequencies_per_parity():
    assert FreqLattice(Parity.PERIODIC_PLUS, 2).frequencies().tolist() == [-4, -2, 0, 2, 4]
    assert FreqLattice(Parity.SEMIPERIODIC_MINUS, 2).frequencies().tolist() == [-3, -1, 1, 3, 5]
    assert FreqLattice(Parity.FULL_TWO_PERIODIC, 2).frequencies().tolist() == [-2, -1, 0, 1, 2]


@pytest.mark.parametrize("half_width", [0, -3, 2.5])
def test_lattice_rejects_bad_half_width(half_width):
    with pytest.raises(DomainError):
        FreqLattice(Parity.PERIODIC_PLUS, half_width)


def test_coeffseq_size_checked():
    with pytest.raises(DimensionError):
        CoeffSeq(FreqLattice(Parity.PERIODIC_PLUS, 2), np.zeros(4))


def test_coeffseq_is_read_only():
    seq = CoeffSeq.zeros(FreqLattice(Parity.PERIODIC_PLUS, 2))
    with pytest.raises(ValueError):
        seq.coeffs[0] = 1.0


def test_at_outside_window_is_zero():
    seq = CoeffSeq.unit(FreqLattice(Parity.PERIODIC_PLUS, 2), 1, 3.0)
    assert seq.at(1) == 3.0
    assert seq.at(7) == 0


def test_rewindow_pads_and_truncates():
    lattice = FreqLattice(Parity.PERIODIC_PLUS, 2)
    seq = CoeffSeq(lattice, [1, 2, 3, 4, 5])
    wider = seq.rewindow(4)
    assert wider.coeffs.tolist() == [0, 0, 1, 2, 3, 4, 5, 0, 0]
    assert seq.rewindow(1).coeffs.tolist() == [2, 3, 4]


def test_dict_export_roundtrip():
    rng = np.random.default_rng(3)
    seq = _random_seq(rng, Parity.SEMIPERIODIC_MINUS, 3)
    back = CoeffSeq.from_dict(seq.to_dict())
    assert back.lattice == seq.lattice
    np.testing.assert_array_equal(back.coeffs, seq.coeffs)


@pytest.mark.parametrize("data", [
    {"parity": "plus", "half_width": 1, "re": [0, 1, 0]},
    {"parity": "plus", "half_width": 1, "re": [0, 1, 0], "im": [0, 0]},
    {"parity": "sideways", "half_width": 1, "re": [0, 1, 0], "im": [0, 0, 0]},
    {"parity": "plus", "half_width": 2, "re": [0, 1, 0], "im": [0, 0, 0]},
])
def test_from_dict_rejects_malformed(data):
    with pytest.raises(InputError):
        CoeffSeq.from_dict(data)


# ============== NORMAS ==============

def test_bracket():
    np.testing.assert_array_equal(bracket([-3, 0, 2]), [4.0, 1.0, 3.0])


@pytest.mark.parametrize("s", [-2.0, 0.0, 1.5])
def test_hs_norm_unit_at_zero(s):
    seq = CoeffSeq.unit(FreqLattice(Parity.PERIODIC_PLUS, 3), 0)
    assert hs_norm(seq, s) == pytest.approx(1.0)


def test_hs_norm_pair_at_plus_minus_one():
    seq = CoeffSeq(FreqLattice(Parity.PERIODIC_PLUS, 2), [0, 1, 0, 1, 0])
    assert hs_norm(seq, 1) == pytest.approx(np.sqrt(18.0), rel=1e-14)


def test_hs_norm_all_ones_matches_direct_sum():
    seq = CoeffSeq(FreqLattice(Parity.PERIODIC_PLUS, 8), np.ones(17))
    expected = np.sqrt(sum((1 + abs(2 * k)) ** -2.0 for k in range(-8, 9)))
    assert hs_norm(seq, -1) == pytest.approx(expected, rel=1e-13)


def test_hs_norm_nondecreasing_in_s():
    rng = np.random.default_rng(13)
    for parity in Parity:
        seq = _random_seq(rng, parity, 10)
        norms = [hs_norm(seq, s) for s in np.linspace(-3, 3, 25)]
        assert all(b >= a * (1 - 1e-14) for a, b in zip(norms, norms[1:]))


def test_pairing_extends_l2_product():
    rng = np.random.default_rng(11)
    a = _random_seq(rng, Parity.PERIODIC_PLUS, 4)
    assert hs_pairing(a, a) == pytest.approx(hs_norm(a, 0) ** 2, rel=1e-13)


# ============== CONVOLUCIÓN ==============

def test_convolve_identity():
    rng = np.random.default_rng(5)
    b = _random_seq(rng, Parity.PERIODIC_PLUS, 4)
    out = convolve(CoeffSeq.unit(b.lattice, 0), b)
    np.testing.assert_array_equal(out.coeffs, b.coeffs)


def test_convolve_adds_indices():
    lattice = FreqLattice(Parity.PERIODIC_PLUS, 3)
    out = convolve(CoeffSeq.unit(lattice, 1), CoeffSeq.unit(lattice, 1))
    np.testing.assert_array_equal(out.coeffs, CoeffSeq.unit(lattice, 2).coeffs)


def test_convolve_parity_rule():
    rng = np.random.default_rng(2)
    plus = _random_seq(rng, Parity.PERIODIC_PLUS, 3)
    minus = _random_seq(rng, Parity.SEMIPERIODIC_MINUS, 3)
    assert convolve(plus, plus).parity is Parity.PERIODIC_PLUS
    assert convolve(plus, minus).parity is Parity.SEMIPERIODIC_MINUS
    assert convolve(minus, plus).parity is Parity.SEMIPERIODIC_MINUS
    assert convolve(minus, minus).parity is Parity.PERIODIC_PLUS


def test_convolve_seeded_case_matches_oracle():
    rng = np.random.default_rng(7)
    a = _random_seq(rng, Parity.PERIODIC_PLUS, 4)
    b = _random_seq(rng, Parity.PERIODIC_PLUS, 4)
    out = convolve(a, b)
    np.testing.assert_allclose(out.coeffs, _convolve_oracle(a, b, out.lattice), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("pa,pb", [
    (Parity.PERIODIC_PLUS, Parity.PERIODIC_PLUS),
    (Parity.PERIODIC_PLUS, Parity.SEMIPERIODIC_MINUS),
    (Parity.SEMIPERIODIC_MINUS, Parity.SEMIPERIODIC_MINUS),
    (Parity.FULL_TWO_PERIODIC, Parity.FULL_TWO_PERIODIC),
])
def test_convolve_matches_double_loop_oracle(pa, pb):
    rng = np.random.default_rng(1234)
    for _ in range(250):
        n = int(rng.integers(1, 9))
        a, b = _random_seq(rng, pa, n), _random_seq(rng, pb, n)
        out = convolve(a, b)
        np.testing.assert_allclose(out.coeffs, _convolve_oracle(a, b, out.lattice), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("pa,pb", [
    (Parity.PERIODIC_PLUS, Parity.PERIODIC_PLUS),
    (Parity.PERIODIC_PLUS, Parity.SEMIPERIODIC_MINUS),
    (Parity.SEMIPERIODIC_MINUS, Parity.SEMIPERIODIC_MINUS),
    (Parity.FULL_TWO_PERIODIC, Parity.FULL_TWO_PERIODIC),
])
def test_convolve_commutes(pa, pb):
    rng = np.random.default_rng(19)
    a, b = _random_seq(rng, pa, 7), _random_seq(rng, pb, 7)
    ab, ba = convolve(a, b), convolve(b, a)
    assert ab.lattice == ba.lattice
    scale = np.linalg.norm(a.coeffs) * np.linalg.norm(b.coeffs)
    np.testing.assert_allclose(ab.coeffs, ba.coeffs, rtol=0, atol=1e-13 * scale)


def test_convolve_rejects_mismatched_windows():
    rng = np.random.default_rng(0)
    with pytest.raises(DimensionError):
        convolve(_random_seq(rng, Parity.PERIODIC_PLUS, 3), _random_seq(rng, Parity.PERIODIC_PLUS, 4))
    with pytest.raises(DimensionError):
        convolve(_random_seq(rng, Parity.FULL_TWO_PERIODIC, 3), _random_seq(rng, Parity.PERIODIC_PLUS, 3))


@pytest.mark.parametrize("s,r,t,verdict", [
    (1, 1, 1, ConvVerdict.VALID),
    (0, 0, 0, ConvVerdict.INVALID),
    (0.25, 0.25, 0, ConvVerdict.CRITICAL),
    (2, 1, -3, ConvVerdict.VALID),
])
def test_conv_gate_verdicts(s, r, t, verdict):
    check = conv_gate(s, r, t)
    assert check.verdict is verdict
    assert check.licensed == (verdict is ConvVerdict.VALID)


@pytest.mark.parametrize("s,r,t", [(-1, 1, 0), (1, -0.5, -1), (1, 2, 1.5)])
def test_conv_gate_preconditions(s, r, t):
    with pytest.raises(DomainError):
        conv_gate(s, r, t)


# ============== EXTENSIÓN A (−1, 1) ==============

def test_embed_full_units():
    plus = CoeffSeq.unit(FreqLattice(Parity.PERIODIC_PLUS, 2), 0)
    minus = CoeffSeq.unit(FreqLattice(Parity.SEMIPERIODIC_MINUS, 2), 0)
    full_plus, full_minus = embed_full(plus), embed_full(minus)
    assert full_plus.parity is Parity.FULL_TWO_PERIODIC
    assert full_plus.half_width == 5
    np.testing.assert_array_equal(full_plus.coeffs, CoeffSeq.unit(full_plus.lattice, 0).coeffs)
    np.testing.assert_array_equal(full_minus.coeffs, CoeffSeq.unit(full_minus.lattice, 1).coeffs)


@pytest.mark.parametrize("parity", [Parity.PERIODIC_PLUS, Parity.SEMIPERIODIC_MINUS])
@pytest.mark.parametrize("s", [-1.0, 0.0, 2.0])
def test_embed_full_is_isometric(parity, s):
    f = _random_seq(np.random.default_rng(5), parity, 5)
    assert hs_norm(embed_full(f), s) == pytest.approx(hs_norm(f, s), rel=1e-13)


@pytest.mark.parametrize("parity", [Parity.PERIODIC_PLUS, Parity.SEMIPERIODIC_MINUS])
def test_restrict_parity_inverts_embedding(parity):
    f = _random_seq(np.random.default_rng(9), parity, 6)
    back = restrict_parity(embed_full(f), parity)
    assert back.lattice == f.lattice
    np.testing.assert_array_equal(back.coeffs, f.coeffs)


def test_embedding_requires_parity_lattice():
    full = CoeffSeq.zeros(FreqLattice(Parity.FULL_TWO_PERIODIC, 3))
    with pytest.raises(DomainError):
        embed_full(full)
    with pytest.raises(DomainError):
        restrict_parity(CoeffSeq.zeros(FreqLattice(Parity.PERIODIC_PLUS, 3)), Parity.PERIODIC_PLUS)
