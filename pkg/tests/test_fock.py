from math import factorial, sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photoclone.analysis import pair_operator
from photoclone.fock import (
    FockState,
    ModeSlot,
    OperatorPolynomial,
    apply_annihilation,
    apply_creation,
    inner_product,
    monomial_to_state,
    overlap,
    relabel,
    restrict,
    single_photon_fidelity,
    slots_for,
    state_to_polynomial,
    tensor,
)

a = OperatorPolynomial.creation


def test_monomial_bosonic_weight():
    s = monomial_to_state(a("A", 0) ** 3 * a("B", 1) ** 2)
    assert s.amplitude({("A", 0): 3, ("B", 1): 2}) == pytest.approx(sqrt(factorial(3) * factorial(2)))


def test_vacuum_and_constant():
    s = monomial_to_state(OperatorPolynomial.constant(2.0))
    assert s.amplitudes == {(): 2.0}
    assert FockState.vacuum(slots_for("A")).norm() == 1.0


def test_pair_operator_singlet_norm():
    s = monomial_to_state(pair_operator())
    assert s.norm_squared() == pytest.approx(2.0)
    assert s.amplitude({("A", 0): 1, ("B", 1): 1}) == 1
    assert s.amplitude({("A", 1): 1, ("B", 0): 1}) == -1


def test_pair_squared_norm():
    # X^2|0> has norm^2 2! * 3! = 12 for two qubit modes
    assert monomial_to_state(pair_operator() ** 2).norm_squared() == pytest.approx(12.0)


def test_prune_and_canonical_order():
    slots = (ModeSlot("B", 0), ModeSlot("A", 0))
    s = FockState(slots, {(1, 0): 1.0, (0, 1): 1e-16})
    assert s.slots[0] == ModeSlot("A", 0)
    assert len(s.amplitudes) == 1
    assert s.amplitude({("B", 0): 1}) == 1.0


def test_negative_occupation_rejected():
    with pytest.raises(ValueError):
        FockState(slots_for("A"), {(-1, 0): 1.0})


def test_inner_product_mismatched_modes():
    with pytest.raises(ValueError):
        inner_product(FockState.vacuum(slots_for("A")), FockState.vacuum(slots_for("B")))


def test_restrict_requires_empty_modes():
    s = monomial_to_state(a("A", 0) * a("B", 0))
    with pytest.raises(ValueError):
        restrict(s, ("A",))
    t = tensor(monomial_to_state(a("A", 0)), FockState.vacuum(slots_for("Z")))
    assert restrict(t, ("A",)).spatial_modes == ("A",)


def test_relabel():
    s = relabel(monomial_to_state(a("A", 1)), {"A": "Q"})
    assert s.amplitude({("Q", 1): 1}) == 1


def test_annihilation_is_adjoint_of_creation():
    x = pair_operator()
    bra = monomial_to_state(x ** 2)
    ket = monomial_to_state(x)
    lhs = inner_product(bra, apply_creation(x, ket))
    rhs = inner_product(apply_annihilation(x, bra), ket)
    assert lhs == pytest.approx(rhs)


@pytest.mark.parametrize(
    "amps, expected",
    [
        ({(1, 0): 1.0}, 1.0),
        ({(0, 1): 1.0}, 0.0),
        ({(1, 0): sqrt(0.9), (0, 1): sqrt(0.1)}, 0.9),
        ({(2, 0): 1.0, (1, 1): 1.0}, 0.75),
        ({(1, 1): 1.0}, 0.5),
    ],
)
def test_single_photon_fidelity_examples(amps, expected):
    assert single_photon_fidelity(FockState(slots_for("A"), amps), "A", 0) == pytest.approx(expected)


def test_single_photon_fidelity_needs_photon():
    with pytest.raises(ValueError):
        single_photon_fidelity(FockState.vacuum(slots_for("A")), "A", 0)


small_amp = st.complex_numbers(min_magnitude=1e-6, max_magnitude=3, allow_nan=False, allow_infinity=False)
occ = st.tuples(*[st.integers(0, 3)] * 4)
states = st.dictionaries(occ, small_amp, max_size=6).map(lambda d: FockState(slots_for("A", "B"), d))


@settings(max_examples=60, deadline=None)
@given(states)
def test_polynomial_round_trip(s):
    back = monomial_to_state(state_to_polynomial(s))
    assert set(back.amplitudes) == set(s.amplitudes)
    for k, v in s.amplitudes.items():
        assert back.amplitudes[k] == pytest.approx(v, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(states, states, small_amp)
def test_inner_product_sesquilinear(u, v, c):
    w = u + v * c
    lhs = inner_product(u, w)
    rhs = inner_product(u, u) + c * inner_product(u, v)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(rhs))
    assert inner_product(v, u) == pytest.approx(np.conj(inner_product(u, v)), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(states)
def test_overlap_self_is_one(s):
    if s.norm() > 1e-6:
        assert overlap(s, s) == pytest.approx(1.0)


@settings(max_examples=40, deadline=None)
@given(states, small_amp)
def test_fidelity_scale_invariant(s, c):
    s = s + monomial_to_state(a("A", 0) * a("B", 0))  # ensures an A photon in some term
    s = FockState(s.slots, {k: v for k, v in s.amplitudes.items() if k[0] + k[1] > 0})
    if s.norm() < 1e-6 or abs(c) < 1e-3:
        return
    assert single_photon_fidelity(s * c, "A", 0) == pytest.approx(single_photon_fidelity(s, "A", 0))
