import json
import math

import numpy as np
import pytest
from pydantic import ValidationError

from errors import DomainError, InputError
from potentials import (
    PotentialFamily,
    PotentialSpec,
    is_real_valued,
    load_explicit,
    materialize,
    membership,
    split_smooth_small,
    tail_norms,
    truncate,
)
from seqspace import CoeffSeq, FreqLattice, Parity, bracket, hs_norm


def plus(n):
    return FreqLattice(Parity.PERIODIC_PLUS, n)


def spec(**kwargs):
    return PotentialSpec.model_validate(kwargs)


# ============== PotentialSpec ==============

def test_family_aliases_and_defaults():
    comb = spec(family="DiracComb")
    assert comb.family is PotentialFamily.DIRAC_COMB
    assert comb.amplitude == (1.0, 0.0)
    decay = spec(family="random-decay")
    assert (decay.exponent, decay.seed, decay.phase) == (1.0, 0, "complex")
    assert spec(family="dirac_comb_derivative").order == 1


def test_complex_parameters_accept_several_forms():
    assert spec(family="constant", value=2).value == (2.0, 0.0)
    assert spec(family="constant", value=[1, -1]).value == (1.0, -1.0)
    assert spec(family="constant", value={"im": 3}).value == (0.0, 3.0)
    trig = spec(family="trigpoly", terms=[{"freq": 2, "amp": [0, 1]}, [-2, 1]])
    assert trig.terms == [(2, (0.0, 1.0)), (-2, (1.0, 0.0))]


@pytest.mark.parametrize("data", [
    {"family": "lattice_gas"},
    {"family": "constant"},
    {"family": "zero", "value": 1},
    {"family": "trigpoly", "terms": [[3, 1]]},
    {"family": "trigpoly", "terms": []},
    {"family": "dirac_comb_derivative", "order": 0},
    {"family": "random_decay", "phase": "imaginary"},
    {"family": "dirac_comb", "colour": "red"},
])
def test_invalid_specs_rejected(data):
    with pytest.raises(ValidationError):
        PotentialSpec.model_validate(data)


def test_spec_dump_revalidates():
    original = spec(family="trigpoly", terms=[[2, [3, 1]], [-2, [3, -1]]])
    again = PotentialSpec.model_validate(original.model_dump(mode="json"))
    assert again == original


# ============== materialize ==============

def test_trigpoly_units():
    v = materialize(spec(family="trigpoly", terms=[[2, 1], [-2, 1]]), plus(3))
    np.testing.assert_array_equal(v.coeffs, [0, 0, 1, 0, 1, 0, 0])


def test_dirac_comb_all_ones():
    v = materialize(spec(family="dirac_comb"), plus(4))
    np.testing.assert_array_equal(v.coeffs, np.ones(9))


def test_constant_and_zero():
    v = materialize(spec(family="constant", value=[2, 1]), plus(2))
    np.testing.assert_array_equal(v.coeffs, [0, 0, 2 + 1j, 0, 0])
    assert not materialize(spec(family="zero"), plus(2)).coeffs.any()


def test_comb_derivative_coefficients():
    v = materialize(spec(family="dirac_comb_derivative", order=2, amplitude=[0.5, 0]), plus(3))
    k = np.arange(-3, 4)
    np.testing.assert_allclose(v.coeffs, 0.5 * (2j * np.pi * k) ** 2, rtol=1e-15)


def test_random_decay_is_seeded_and_window_independent():
    s = spec(family="random_decay", exponent=1, seed=42)
    v8 = materialize(s, plus(8))
    np.testing.assert_allclose(np.abs(v8.coeffs), bracket(v8.frequencies()) ** -1.0, rtol=1e-14)
    np.testing.assert_array_equal(v8.coeffs, materialize(s, plus(8)).coeffs)
    np.testing.assert_array_equal(materialize(s, plus(4)).coeffs, v8.coeffs[4:13])
    other = materialize(spec(family="random_decay", exponent=1, seed=43), plus(8))
    assert not np.array_equal(other.coeffs, v8.coeffs)


def test_random_decay_real_phase_is_real_and_even():
    v = materialize(spec(family="random_decay", exponent=0.75, seed=3, phase="real"), plus(10))
    assert is_real_valued(v)
    np.testing.assert_array_equal(v.coeffs, v.coeffs[::-1])


def test_materialize_on_full_lattice_leaves_odd_zero():
    s = spec(family="random_decay", seed=1)
    full = materialize(s, FreqLattice(Parity.FULL_TWO_PERIODIC, 8))
    assert full.odd_part_max() == 0
    np.testing.assert_array_equal(full.coeffs[::2], materialize(s, plus(4)).coeffs)


def test_materialize_rejects_minus_lattice():
    with pytest.raises(DomainError):
        materialize(spec(family="dirac_comb"), FreqLattice(Parity.SEMIPERIODIC_MINUS, 3))


# ============== potenciales explícitos ==============

def _write(tmp_path, data, name="v.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_explicit_potential_from_file(tmp_path):
    source = CoeffSeq(plus(6), bracket(2 * np.arange(-6, 7)) ** -1.0)
    path = _write(tmp_path, source.to_dict())
    s = spec(family="explicit", path=path)
    v = materialize(s, plus(8))
    np.testing.assert_array_equal(v.coeffs[2:15], source.coeffs)
    assert v.at(7) == 0
    threshold = membership(s)
    assert threshold.estimated
    assert threshold.s_star == pytest.approx(-0.5, abs=1e-10)


def test_explicit_full_lattice_file(tmp_path):
    data = np.zeros(9, dtype=complex)
    data[[0, 2, 4, 6, 8]] = [1, 2, 3, 4, 5]
    path = _write(tmp_path, CoeffSeq(FreqLattice(Parity.FULL_TWO_PERIODIC, 4), data).to_dict())
    v = materialize(spec(family="explicit", path=path), plus(2))
    np.testing.assert_array_equal(v.coeffs, [1, 2, 3, 4, 5])


def test_explicit_errors(tmp_path):
    with pytest.raises(InputError):
        load_explicit(str(tmp_path / "missing.json"))
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    with pytest.raises(InputError):
        load_explicit(str(bad))
    minus = _write(tmp_path, CoeffSeq.zeros(FreqLattice(Parity.SEMIPERIODIC_MINUS, 2)).to_dict(), "minus.json")
    with pytest.raises(InputError):
        load_explicit(minus)
    odd = CoeffSeq.unit(FreqLattice(Parity.FULL_TWO_PERIODIC, 2), 1)
    with pytest.raises(DomainError):
        load_explicit(_write(tmp_path, odd.to_dict(), "odd.json"))


# ============== membership ==============

@pytest.mark.parametrize("data,s_star", [
    ({"family": "dirac_comb"}, 0.5),
    ({"family": "dirac_comb_derivative"}, 1.5),
    ({"family": "dirac_comb_derivative", "order": 2}, 2.5),
    ({"family": "random_decay", "exponent": 1}, -0.5),
])
def test_membership_thresholds(data, s_star):
    threshold = membership(PotentialSpec.model_validate(data))
    assert threshold.s_star == pytest.approx(s_star)
    assert threshold.open
    assert not threshold.contains(s_star)
    assert threshold.contains(s_star + 1e-9)


@pytest.mark.parametrize("data", [
    {"family": "trigpoly", "terms": [[2, 1]]},
    {"family": "constant", "value": 4},
    {"family": "zero"},
])
def test_smooth_potentials_belong_everywhere(data):
    threshold = membership(PotentialSpec.model_validate(data))
    assert threshold.s_star == -math.inf
    assert threshold.contains(-100)
    assert threshold.to_dict()["s_star"] is None


@pytest.mark.parametrize("data,above,below", [
    ({"family": "dirac_comb"}, 1.0, 0.25),
    ({"family": "random_decay", "exponent": 1, "seed": 1}, 0.0, -0.75),
    ({"family": "dirac_comb_derivative"}, 2.0, 1.25),
])
def test_membership_matches_norm_growth(data, above, below):
    s = PotentialSpec.model_validate(data)
    threshold = membership(s)
    assert threshold.contains(above) and not threshold.contains(below)
    windows = [materialize(s, plus(n)) for n in (16, 64, 256)]
    bounded = [hs_norm(v, -above) for v in windows]
    growing = [hs_norm(v, -below) for v in windows]
    assert bounded == sorted(bounded) and growing == sorted(growing)
    assert bounded[-1] / bounded[1] < 1.05
    assert growing[-1] / growing[1] > 1.2


# ============== truncate, colas y división ==============

def test_truncate():
    v = materialize(spec(family="dirac_comb"), plus(8))
    np.testing.assert_array_equal(truncate(v, 8).coeffs, v.coeffs)
    np.testing.assert_array_equal(truncate(v, 0).coeffs, CoeffSeq.unit(plus(8), 0).coeffs)
    with pytest.raises(DomainError):
        truncate(v, 9)
    with pytest.raises(DomainError):
        truncate(v, -1)


def test_tail_norms_match_direct_norms():
    v = materialize(spec(family="random_decay", exponent=0.75, seed=2), plus(12))
    tails = tail_norms(v, -1)
    direct = [hs_norm(v - truncate(v, n), -1) for n in range(13)]
    np.testing.assert_allclose(tails, direct, rtol=1e-12, atol=1e-15)
    assert tails[-1] == 0
    assert np.all(np.diff(tails) <= 0)


def test_split_trigpoly_small_delta():
    v = materialize(spec(family="trigpoly", terms=[[2, 1], [-2, 1]]), plus(8))
    split = split_smooth_small(v, 1e-6, 2.0, 1)
    assert split.cut <= 1
    assert not split.v_delta.coeffs.any()
    np.testing.assert_array_equal(split.v0.coeffs, v.coeffs)


def test_split_dirac_comb_matches_tail_oracle():
    v = materialize(spec(family="dirac_comb"), plus(64))
    split = split_smooth_small(v, 0.2, 2.0, 1)

    def tail_sq(n):
        return sum(2 * (1 + 2 * k) ** -2.0 for k in range(n + 1, 65))

    expected = next(n for n in range(65) if tail_sq(n) <= 0.01)
    assert split.cut == expected
    assert hs_norm(split.v_delta, -1) <= 0.1
    np.testing.assert_array_equal((split.v0 + split.v_delta).coeffs, v.coeffs)


def test_split_huge_delta_keeps_only_mean():
    v = materialize(spec(family="dirac_comb"), plus(16))
    assert split_smooth_small(v, 1e300, 1.0, 1).cut == 0


def test_split_rejects_nonpositive():
    v = materialize(spec(family="dirac_comb"), plus(4))
    with pytest.raises(DomainError):
        split_smooth_small(v, 0.0, 1.0, 1)


# ============== realidad ==============

@pytest.mark.parametrize("data,real", [
    ({"family": "dirac_comb"}, True),
    ({"family": "trigpoly", "terms": [[2, [0, 1]]]}, False),
    ({"family": "trigpoly", "terms": [[2, [3, 1]], [-2, [3, -1]]]}, True),
    ({"family": "constant", "value": [1, 1]}, False),
])
def test_is_real_valued(data, real):
    v = materialize(PotentialSpec.model_validate(data), plus(4))
    assert is_real_valued(v) is real


def test_is_real_valued_rejects_minus():
    with pytest.raises(DomainError):
        is_real_valued(CoeffSeq.zeros(FreqLattice(Parity.SEMIPERIODIC_MINUS, 2)))
