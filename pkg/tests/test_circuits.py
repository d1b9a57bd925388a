import json
from math import sqrt

import numpy as np
import pytest

from conftest import random_qubit
from photoclone import analysis as an
from photoclone.circuits import (
    Circuit,
    Element,
    EprResource,
    build_cloner,
    build_partial_symmetrizer,
    cloner_q,
    input_pair_state,
    orthogonal,
    partial_swap_matrix,
    run_cloner,
    run_partial_symmetrizer,
    single_photon_cloner,
    symmetrizer_matrix,
    two_photon_state,
    two_photon_vector,
    two_stage_swap,
    two_stage_swap_matrix,
)
from photoclone.fock import overlap, relabel
from photoclone.postselection import PostSelectionPattern

SWAP = np.eye(4)[[0, 2, 1, 3]]
R8 = 2 * sqrt(2)


@pytest.mark.parametrize("eta", [0.0, 0.2, sqrt(2 / 3), 1.0])
def test_symmetrizer_output_state(eta):
    sel = run_partial_symmetrizer(input_pair_state(), eta)
    want = an.partial_symmetrization_matrix(eta) @ np.array([0, 1, 0, 0])
    got = two_photon_vector(sel.conditional, "A_out", "B_out")
    assert abs(abs(np.vdot(want / np.linalg.norm(want), got)) - 1) < 1e-14
    assert np.allclose(got * sqrt(sel.probability), want / R8, atol=1e-15)


def test_eta_one_is_identity():
    assert np.allclose(symmetrizer_matrix(1.0), np.eye(4) / R8, atol=1e-15)


def test_eta_zero_projects_onto_symmetric_subspace():
    pp, _ = an.two_qubit_projectors()
    assert np.allclose(symmetrizer_matrix(0.0), pp / R8, atol=1e-15)


def test_symmetrizer_rejects_bad_input():
    with pytest.raises(ValueError):
        run_partial_symmetrizer(two_photon_state([1, 0, 0, 0], "A_in", "X"), 0.5)
    with pytest.raises(ValueError):
        build_partial_symmetrizer(1.5)


def test_two_clone_optimum():
    res = run_cloner(2, sqrt(2 / 3))
    assert res.fidelity == pytest.approx(an.fidelity_Fperp(2), abs=1e-14)
    assert res.anticlone_fidelity == pytest.approx(an.fidelity_Fperp(2), abs=1e-14)
    assert res.probability == pytest.approx(1 / 64, abs=1e-15)
    assert res.stage_probabilities[0] == pytest.approx(5 / 48, abs=1e-15)


def test_three_clone_optimum_matches_target():
    q = an.optimal_q(3)
    res = run_cloner(3, an.eta_from_q(q))
    target = an.target_state(3, "A_out", "B_out").target
    assert overlap(target, res.state) == pytest.approx(1.0, abs=1e-12)
    assert res.fidelity == pytest.approx(an.fidelity_Fperp(3), abs=1e-12)


@pytest.mark.parametrize("M", [2, 3, 4])
@pytest.mark.parametrize("eta", [0.1, 0.5, 0.9])
def test_q_eta_duality(M, eta):
    q, resid = cloner_q(run_cloner(M, eta))
    assert resid < 1e-12
    assert q == pytest.approx((1 - eta) / (1 + eta), abs=1e-12)


@pytest.mark.parametrize("q", [0.0, 0.3, 0.7, 1.0])
def test_two_clone_fidelity_curve(q):
    assert run_cloner(2, an.eta_from_q(q)).fidelity == pytest.approx(an.fidelity_F2(q), abs=1e-13)


def test_cloner_covariant(rng):
    ref = run_cloner(3, 0.6)
    for _ in range(3):
        res = run_cloner(3, 0.6, psi=random_qubit(rng))
        assert res.fidelity == pytest.approx(ref.fidelity, abs=1e-12)
        assert res.probability == pytest.approx(ref.probability, abs=1e-14)


def test_cloner_cap():
    with pytest.raises(ValueError):
        build_cloner(7, 0.5)
    assert build_cloner(7, 0.5, max_m=7).stages[1].pattern.to_dict()["A_out"] == 7


def test_swap_on_random_products(rng):
    twice = two_stage_swap_matrix(np.pi / 2, np.pi / 2)
    assert np.allclose(twice, SWAP / 8, atol=1e-15)
    for _ in range(5):
        x, y = random_qubit(rng), random_qubit(rng)
        res = two_stage_swap(np.pi / 2, np.pi / 2).run(two_photon_state(np.kron(x, y), "A_in", "B_in"))
        out = two_photon_vector(res.state, "A_out", "B_out")
        assert abs(np.vdot(np.kron(y, x), out)) == pytest.approx(1.0, abs=1e-13)
        assert res.probability == pytest.approx(1 / 64, abs=1e-15)


@pytest.mark.parametrize("phi1, phi2", [(0.3, 0.4), (1.0, 2.5), (np.pi, np.pi)])
def test_partial_swaps_compose(phi1, phi2):
    want = an.partial_symmetrization_matrix(np.exp(1j * (phi1 + phi2))) / 8
    assert np.allclose(two_stage_swap_matrix(phi1, phi2), want, atol=1e-15)
    assert np.allclose(partial_swap_matrix(phi1) @ partial_swap_matrix(phi2), want, atol=1e-15)


def _dense_single_photon_oracle(psi):
    """|psi>_C (x) singlet_AB, symmetrized on (A, C); qubit order A, B, C."""
    singlet = np.array([0, 1, -1, 0]) / sqrt(2)
    full = np.kron(singlet, psi).reshape(2, 2, 2)
    sym = 0.5 * (full + full.transpose(2, 1, 0))
    weight = np.sum(abs(sym) ** 2)
    sym = sym / sqrt(weight)
    rho_a = np.einsum("abc,dbc->ad", sym, sym.conj())
    rho_b = np.einsum("abc,adc->bd", sym, sym.conj())
    perp = orthogonal(psi)
    return (
        float(np.real(psi.conj() @ rho_a @ psi)),
        float(np.real(perp.conj() @ rho_b @ perp)),
        0.5 * weight,
    )


def test_single_photon_cloner_matches_dense_oracle(rng):
    for psi in [np.array([1.0, 0.0]), random_qubit(rng), random_qubit(rng)]:
        res = single_photon_cloner(psi)
        f, f_anti, prob = _dense_single_photon_oracle(psi)
        assert res.fidelity == pytest.approx(f, abs=1e-13)
        assert res.anticlone_fidelity == pytest.approx(f_anti, abs=1e-13)
        assert res.probability == pytest.approx(prob, abs=1e-13)
    assert res.fidelity == pytest.approx(5 / 6)
    assert res.anticlone_fidelity == pytest.approx(2 / 3)


def _joint_cloner(M, eta):
    """Both stages as one circuit with a single heralding pattern."""
    elements = (
        Element("beam_splitter", ("A_in", "B_in", "upper", "lower")),
        Element("beam_splitter", ("upper", "vac2", "C", "tap")),
        Element("beam_splitter", ("lower", "vac3", "arm", "drop3")),
        Element("attenuator", ("arm",), eta),
        Element("phase", ("arm",), np.pi),
        Element("beam_splitter", ("tap", "arm", "D", "drop4")),
        Element("beam_splitter", ("A", "C", "A_out", "C_out")),
        Element("beam_splitter", ("B", "D", "B_out", "D_out")),
    )
    pattern = {"drop3": 0, "drop4": 0, "A_out": M, "B_out": M, "C_out": 0, "D_out": 0}
    return Circuit("joint", elements, ("A_in", "B_in"), ("A_out", "B_out"), pattern, EprResource(M - 1, ("A", "B")))


@pytest.mark.parametrize("M, eta", [(2, sqrt(2 / 3)), (3, 0.4)])
def test_joint_equals_staged(M, eta):
    staged = build_cloner(M, eta).run(input_pair_state())
    joint = _joint_cloner(M, eta).run(input_pair_state())
    assert joint.probability == pytest.approx(staged.probability, abs=1e-15)
    assert overlap(joint.conditional, staged.state) == pytest.approx(1.0, abs=1e-12)


def test_composed_and_elementwise_runs_agree():
    a = build_cloner(2, 0.3).run(input_pair_state(), composed=True)
    b = build_cloner(2, 0.3).run(input_pair_state())
    assert a.probability == pytest.approx(b.probability, abs=1e-15)
    assert overlap(a.state, b.state) == pytest.approx(1.0, abs=1e-13)


def test_circuit_round_trip():
    c = build_cloner(3, 0.5)
    for stage in c.stages:
        d = json.loads(json.dumps(stage.to_dict()))
        back = Circuit.from_dict(d)
        assert back.to_dict() == stage.to_dict()
    assert json.loads(json.dumps(c.to_dict()))["links"] == [{"A_out": "C", "B_out": "D"}]


def test_circuit_validation():
    with pytest.raises(ValueError):
        Circuit("bad", (Element("beam_splitter", ("A", "B", "C", "D")),), ("A", "B"), ("Z",), {})
    with pytest.raises(ValueError):
        Circuit("bad", (), ("A",), ("A",), PostSelectionPattern({"Q": 1}))
    with pytest.raises(ValueError):
        Element("mirror", ("A",))


def test_run_rejects_foreign_modes():
    with pytest.raises(ValueError):
        build_partial_symmetrizer(0.5).run(relabel(input_pair_state(), {"A_in": "upper"}))
