from math import sqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photoclone import analysis as an
from photoclone.fock import single_photon_fidelity


def test_alpha_values_two_clones():
    vals = [an.alpha(j, 2) for j in range(3)]
    assert vals == pytest.approx([(1 + sqrt(3 / 2)) / sqrt(6), -1 / sqrt(6), (1 - sqrt(3 / 2)) / sqrt(6)])


def test_alpha_bounds():
    with pytest.raises(ValueError):
        an.alpha(3, 2)
    with pytest.raises(ValueError):
        an.alpha(0, 0)


@pytest.mark.parametrize("M", range(1, 11))
def test_alphas_normalized_and_fidelity(M):
    assert an.alpha_norm(M) == pytest.approx(1.0, abs=1e-14)
    assert an.alpha_fidelity(M) == pytest.approx(an.fidelity_Fperp(M), abs=1e-14)


@pytest.mark.parametrize("M", range(1, 7))
def test_target_state_fidelity(M):
    t = an.target_state(M)
    assert t.target.is_normalized()
    assert single_photon_fidelity(t.target, "A", 0) == pytest.approx(an.fidelity_Fperp(M), abs=1e-14)
    assert single_photon_fidelity(t.target, "B", 1) == pytest.approx(an.fidelity_Fperp(M), abs=1e-14)


def test_target_cap():
    with pytest.raises(ValueError):
        an.target_state(7)
    assert an.target_state(7, max_m=7).M == 7


def test_fidelity_values():
    assert an.fidelity_Fperp(1) == 1.0
    assert an.fidelity_Fperp(2) == pytest.approx(0.9082482904638631)
    assert an.fidelity_Fperp(6) == pytest.approx(5 / 6)
    assert an.fidelity_F2(0) == pytest.approx(0.9)
    assert an.fidelity_F2(1) == pytest.approx(0.5)
    assert an.fidelity_F2(an.optimal_q(2)) == pytest.approx(an.fidelity_Fperp(2))


def test_large_M_limits():
    assert an.optimal_q(10**6) == pytest.approx(2 - sqrt(3), abs=1e-6)
    assert an.fidelity_Fperp(10**6) == pytest.approx(0.5 * (1 + 1 / sqrt(3)), abs=1e-6)


def test_monotone_in_M():
    f = [an.fidelity_Fperp(M) for M in range(1, 50)]
    q = [an.optimal_q(M) for M in range(2, 50)]
    assert all(x > y for x, y in zip(f, f[1:]))
    assert all(x < y for x, y in zip(q, q[1:]))


@given(st.floats(0.0, 1.0))
def test_q_eta_inverse(eta):
    assert an.eta_from_q(an.q_from_eta(eta)) == pytest.approx(eta, abs=1e-12)


@given(st.floats(0.0, 5.0))
def test_F2_maximized_at_optimum(q):
    assert an.fidelity_F2(q) <= an.fidelity_F2(an.optimal_q(2)) + 1e-15


def test_golden_section_on_closed_form():
    x, fx = an.golden_section_max(an.fidelity_F2, 0.0, 1.0, tol=1e-10)
    assert x == pytest.approx(an.optimal_q(2), abs=1e-6)


@pytest.mark.parametrize("M", [2, 3])
def test_numerical_argmax_on_simulation(M):
    assert an.numerical_optimal_q(M) == pytest.approx(an.optimal_q(M), abs=1e-9)


def test_projectors():
    pp, pm = an.two_qubit_projectors()
    assert np.allclose(pp @ pp, pp) and np.allclose(pm @ pm, pm)
    assert np.allclose(pp + pm, np.eye(4))
    assert np.trace(pm).real == pytest.approx(1.0)
    swap = np.eye(4)[[0, 2, 1, 3]]
    assert np.allclose(an.partial_symmetrization_matrix(-1), swap)


def test_fit_q_recovers_q():
    for M in (2, 3):
        for q in (0.0, 0.2, 0.9):
            s = an.cloner_form_state(M, q) * (0.3 - 0.1j)
            got, resid = an.fit_q(s, M)
            assert got == pytest.approx(q, abs=1e-13)
            assert resid < 1e-13
