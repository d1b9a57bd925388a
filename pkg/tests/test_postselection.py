from math import sqrt

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photoclone.analysis import two_qubit_projectors
from photoclone.circuits import build_partial_symmetrizer, input_pair_state, run_partial_symmetrizer, two_photon_state
from photoclone.fock import FockState, slots_for
from photoclone.optics import apply_map
from photoclone.postselection import PostSelectionPattern, postselect, success_probability_formula

SINGLET = np.array([0, 1, -1, 0]) / sqrt(2)


def test_symmetrizer_rate_at_optimum():
    sel = run_partial_symmetrizer(input_pair_state(), sqrt(2 / 3))
    assert sel.probability == pytest.approx(5 / 48, abs=1e-15)


@pytest.mark.parametrize("eta", [0.0, 0.25, 0.5, 1.0])
def test_singlet_rate(eta):
    sel = run_partial_symmetrizer(two_photon_state(SINGLET, "A_in", "B_in"), eta)
    assert sel.probability == pytest.approx(eta ** 2 / 8, abs=1e-15)


def test_zero_probability_selection():
    sel = run_partial_symmetrizer(two_photon_state(SINGLET, "A_in", "B_in"), 0.0)
    assert sel.probability == 0.0
    assert not sel.succeeded
    assert sel.conditional.is_empty


def test_selection_unpacks():
    state, prob = postselect(FockState(slots_for("A"), {(1, 0): 0.6, (0, 0): 0.8}), {"A": 1})
    assert prob == pytest.approx(0.36)
    assert state.is_normalized()


def test_idempotent():
    out = build_partial_symmetrizer(0.4).prepare(input_pair_state())
    out = apply_map(out, build_partial_symmetrizer(0.4).network())
    pattern = build_partial_symmetrizer(0.4).pattern
    first = postselect(out, pattern)
    second = postselect(first.conditional, pattern)
    assert second.probability == pytest.approx(1.0)
    assert (second.conditional - first.conditional).norm() < 1e-14


def test_complementary_patterns_sum_to_one():
    s = FockState(slots_for("A", "B"), {(1, 0, 0, 0): 0.5, (0, 0, 1, 1): 0.5, (0, 1, 1, 0): sqrt(0.5)})
    total = sum(postselect(s, {"A": n}).probability for n in range(3))
    assert total == pytest.approx(1.0)
    assert sum(postselect(s, {"A": 1, "B": n}).probability for n in range(3)) <= 1.0


def test_unknown_mode():
    with pytest.raises(ValueError):
        postselect(FockState.vacuum(slots_for("A")), {"Z": 0})


def test_pattern_validation():
    with pytest.raises(ValueError):
        PostSelectionPattern({"A": -1})
    assert PostSelectionPattern({"B": 1, "A": 0}).to_dict() == {"A": 0, "B": 1}


def test_formula_errors():
    with pytest.raises(ValueError):
        success_probability_formula(0.7, 0.7, 1.0)
    with pytest.raises(ValueError):
        success_probability_formula(1.2, -0.2, 1.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_rate_matches_formula_on_random_inputs(seed, eta):
    rng = np.random.default_rng(seed)
    vec = rng.normal(size=4) + 1j * rng.normal(size=4)
    vec /= np.linalg.norm(vec)
    pp, pm = two_qubit_projectors()
    w_minus = float(np.real(np.vdot(vec, pm @ vec)))
    w_minus = min(max(w_minus, 0.0), 1.0)
    sel = run_partial_symmetrizer(two_photon_state(vec, "A_in", "B_in"), eta)
    assert sel.probability == pytest.approx(success_probability_formula(1 - w_minus, w_minus, eta), abs=1e-14)
