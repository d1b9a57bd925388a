"""Acceptance checks, shared by ``photoclone --verify`` and the test suite.

Each ``criterion_N`` returns a list of :class:`Check` rows.  A global
``tolerance`` override replaces every stated tolerance (runtime limits and
informational rows are unaffected).
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import pi, sqrt

import numpy as np

from . import analysis as an
from . import circuits as cc
from . import optics
from .amplifier import AmplifierModel, amplifier_output, evolution_deviation
from .fock import FockState, inner_product, overlap, relabel, restrict, slots_for
from .postselection import postselect

DEFAULT_SEED = 20070101


@dataclass(frozen=True)
class Check:
    criterion: int
    name: str
    measured: float
    expected: float
    tolerance: float
    kind: str = "equal"  # "equal", "at_most" or "info"

    @property
    def diff(self) -> float:
        return abs(self.measured - self.expected)

    @property
    def passed(self) -> bool:
        if self.kind == "info":
            return True
        if self.kind == "at_most":
            return self.measured <= self.expected
        return self.diff <= self.tolerance

    def line(self) -> str:
        tag = {True: "PASS", False: "FAIL"}[self.passed] if self.kind != "info" else "INFO"
        if self.kind == "at_most":
            detail = f"measured={self.measured:.3g} limit={self.expected:.3g}"
        else:
            detail = (
                f"measured={self.measured:.17g} expected={self.expected:.17g} "
                f"|diff|={self.diff:.3e} tol={self.tolerance:.1e}"
            )
        return f"[{tag}] C{self.criterion} {self.name}: {detail}"


class _Recorder:
    def __init__(self, criterion: int, tolerance: float | None):
        self.criterion = criterion
        self.override = tolerance
        self.rows: list[Check] = []

    def equal(self, name, measured, expected, tol):
        tol = tol if self.override is None else self.override
        self.rows.append(Check(self.criterion, name, float(measured), float(expected), tol))

    def at_most(self, name, measured, limit):
        self.rows.append(Check(self.criterion, name, float(measured), float(limit), 0.0, "at_most"))

    def info(self, name, measured, expected):
        self.rows.append(Check(self.criterion, name, float(measured), float(expected), 0.0, "info"))


def _random_unitary(rng, n=2) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _random_vector(rng, n) -> np.ndarray:
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def _aligned_distance(a: FockState, b: FockState) -> float:
    """Max amplitude distance between normalized states after removing global phase."""
    a, b = a.normalized(), b.normalized()
    ip = inner_product(a, b)
    phase = ip / abs(ip) if abs(ip) > 0 else 1.0
    diff = b - a * phase
    return max((abs(v) for v in diff.amplitudes.values()), default=0.0)


def _two_clone_vector(q: float) -> np.ndarray:
    v = np.array([2.0, q - 1.0, -2.0 * q])
    return v / np.linalg.norm(v)


ETAS = (0.0, 0.3, sqrt(2.0 / 3.0), 1.0)
PHIS = (0.0, pi / 4, pi / 2, pi)


def criterion_1(tolerance=None, **_):
    rec = _Recorder(1, tolerance)
    t0 = time.perf_counter()
    for eta in ETAS:
        got = cc.symmetrizer_matrix(eta)
        want = an.partial_symmetrization_matrix(eta) / (2 * sqrt(2.0))
        rec.equal(f"symmetrizer map eta={eta:.6g}", np.max(np.abs(got - want)), 0.0, 1e-12)
    rec.at_most("runtime [s]", time.perf_counter() - t0, 1.0)
    return rec.rows


def criterion_2(tolerance=None, **_):
    rec = _Recorder(2, tolerance)
    f = cc.epr_stage_factorizations()
    rec.equal("P_sym for |psi>|psi_perp> at eta=sqrt(2/3)", f["p_sym"], 5 / 48, 1e-12)
    tot = cc.run_cloner(2, sqrt(2.0 / 3.0)).probability
    rec.equal("P_tot end-to-end M=2 cloner", tot, 1 / 64, 1e-12)
    rec.equal("P_EPR stage on pre-symmetrized input", f["p_stage_presymmetrized"], 3 / 20, 1e-12)
    rec.equal("P_sym * P_EPR (pre-symmetrized reading)", f["p_tot_presymmetrized"], 1 / 64, 1e-12)
    rec.info("P_EPR stage on raw |psi>|psi_perp> (alternative reading)", f["p_stage_raw"], 3 / 20)
    rec.info("P_sym * P_EPR (raw reading)", f["p_tot_raw"], 1 / 64)
    return rec.rows


def criterion_3(tolerance=None, **_):
    rec = _Recorder(3, tolerance)
    for eta in (0.0, 0.25, 0.5, sqrt(2.0 / 3.0), 1.0):
        q = an.q_from_eta(eta)
        st = cc.run_cloner(2, eta).state
        got = np.array(
            [
                st.amplitude({("A_out", 0): 2, ("B_out", 1): 2}),
                st.amplitude({("A_out", 0): 1, ("A_out", 1): 1, ("B_out", 0): 1, ("B_out", 1): 1}),
                st.amplitude({("A_out", 1): 2, ("B_out", 0): 2}),
            ]
        )
        want = _two_clone_vector(q)
        phase = np.vdot(want, got)
        phase = phase / abs(phase)
        leftover = st.norm_squared() - np.sum(np.abs(got) ** 2)
        dev = max(np.max(np.abs(got - phase * want)), abs(leftover))
        rec.equal(f"two-clone amplitudes eta={eta:.6g}", dev, 0.0, 1e-12)
    return rec.rows


def criterion_4(tolerance=None, **_):
    rec = _Recorder(4, tolerance)
    worst = 0.0
    for q in np.linspace(0.0, 1.0, 21):
        f = cc.cloner_fidelity_at_q(2, float(q))
        worst = max(worst, abs(f - an.fidelity_F2(float(q))))
    rec.equal("max |F_sim - F(2,q)| over 21 q values", worst, 0.0, 1e-12)
    rec.equal("F at q=0", cc.cloner_fidelity_at_q(2, 0.0), 9 / 10, 1e-12)
    return rec.rows


def criterion_5(tolerance=None, **_):
    rec = _Recorder(5, tolerance)
    qstar = an.numerical_optimal_q(2)
    rec.equal("argmax of simulated F(2,q)", qstar, 5 - 2 * sqrt(6.0), 1e-9)
    fopt = cc.cloner_fidelity_at_q(2, an.optimal_q(2))
    rec.equal("F at the optimum", fopt, (1 + sqrt(2.0 / 3.0)) / 2, 1e-12)
    rec.info("F at the optimum vs quoted 0.908", fopt, 0.908)
    return rec.rows


def criterion_6(tolerance=None, max_m=an.DEFAULT_MAX_M, **_):
    rec = _Recorder(6, tolerance)
    ms = [2, 3, 4, 5]
    if max_m > an.DEFAULT_MAX_M:
        ms += list(range(6, max_m + 1))
    for M in ms:
        t0 = time.perf_counter()
        res = cc.run_cloner(M, an.eta_from_q(an.optimal_q(M)), max_m=max(max_m, M))
        target = an.target_state(M, "A_out", "B_out", max_m=max(max_m, M)).target
        rec.equal(f"M={M} overlap with covariant target", overlap(target, res.state), 1.0, 1e-10)
        rec.equal(f"M={M} fidelity", res.fidelity, an.fidelity_Fperp(M), 1e-10)
        if M == 5:
            rec.at_most("M=5 runtime [s]", time.perf_counter() - t0, 30.0)
    return rec.rows


def criterion_7(tolerance=None, **_):
    rec = _Recorder(7, tolerance)
    for lam in (0.1, 0.3, 0.5):
        model = AmplifierModel.from_lambda(lam, 12)
        rec.equal(
            f"lambda={lam} factorized vs dense (cutoff 12), M=1,2 sectors",
            evolution_deviation(model, sectors=(1, 2)), 0.0, 1e-10,
        )
        out = amplifier_output(model, 2)
        rec.equal(f"lambda={lam} M=2 fit residual", out.residual, 0.0, 1e-10)
        clone = cc.run_cloner(2, an.eta_from_q(out.q_fit))
        ov = overlap(relabel(clone.state, {"A_out": "A", "B_out": "B"}), out.state)
        rec.equal(f"lambda={lam} linear-optics vs amplifier overlap (q={out.q_fit:.6g})", ov, 1.0, 1e-9)
    return rec.rows


def criterion_8(tolerance=None, seed=DEFAULT_SEED, **_):
    rec = _Recorder(8, tolerance)
    for phi in PHIS:
        got = cc.partial_swap_matrix(phi)
        want = an.partial_symmetrization_matrix(np.exp(1j * phi)) / (2 * sqrt(2.0))
        rec.equal(f"partial SWAP map phi={phi:.6g}", np.max(np.abs(got - want)), 0.0, 1e-12)
    swap = np.eye(4)[[0, 2, 1, 3]]
    got = cc.two_stage_swap_matrix(pi / 2, pi / 2)
    rec.equal("two sqrt(SWAP) stages vs SWAP/8", np.max(np.abs(got - swap / 8)), 0.0, 1e-12)
    rng = np.random.default_rng(seed)
    circuit = cc.build_partial_swap(pi / 2)
    worst = 0.0
    for _ in range(10):
        psi = cc.two_photon_state(_random_vector(rng, 4), "A_in", "B_in")
        worst = max(worst, abs(circuit.run(psi).probability - 1 / 8))
    rec.equal("success probability, 10 random inputs (max |P - 1/8|)", worst, 0.0, 1e-12)
    return rec.rows


def criterion_9(tolerance=None, seed=DEFAULT_SEED, **_):
    rec = _Recorder(9, tolerance)
    rng = np.random.default_rng(seed + 9)
    bs = optics.balanced_beam_splitter("a", "b", "c", "d")

    # HOM: symmetric polarization inputs never give a coincidence
    worst = 0.0
    triplet = np.array([0, 1, 1, 0]) / sqrt(2)
    inputs = [np.kron(v, v) for v in (_random_vector(rng, 2) for _ in range(5))] + [triplet]
    for vec in inputs:
        out = optics.apply_map(cc.two_photon_state(vec, "a", "b"), bs)
        worst = max(worst, postselect(out, {"c": 1, "d": 1}).probability)
    rec.equal("HOM coincidence probability, symmetric inputs", worst, 0.0, 1e-12)

    worst = max(abs(an.alpha_norm(M) - 1.0) for M in range(1, 11))
    rec.equal("max |sum_j alpha_jM^2 - 1|, M<=10", worst, 0.0, 1e-12)

    # covariance under simultaneous polarization rotations
    u = _random_unitary(rng)
    cov = 0.0
    for eta in (0.3, np.exp(0.7j)):
        circuit = cc.build_partial_symmetrizer(eta)
        psi = cc.two_photon_state(_random_vector(rng, 4), "A_in", "B_in")
        base = circuit.run(psi)
        rot = circuit.run(cc.rotate_polarization(psi, u))
        back = cc.rotate_polarization(rot.conditional, u.conj().T)
        cov = max(cov, abs(base.probability - rot.probability), _aligned_distance(base.conditional, back))
    psi = _random_vector(rng, 2)
    for M in (2, 3):
        base = cc.run_cloner(M, 0.6)
        rot = cc.run_cloner(M, 0.6, psi=psi)
        cov = max(
            cov,
            abs(base.probability - rot.probability),
            abs(base.fidelity - rot.fidelity),
            abs(base.anticlone_fidelity - rot.anticlone_fidelity),
        )
    b1, r1 = cc.single_photon_cloner(), cc.single_photon_cloner(psi)
    cov = max(cov, abs(b1.fidelity - r1.fidelity), abs(b1.probability - r1.probability))
    rec.equal("covariance under random polarization rotations", cov, 0.0, 1e-10)

    # unitary maps preserve norm
    net = cc.build_partial_swap(1.1).network()
    worst = np.max(np.abs(net.matrix.conj().T @ net.matrix - np.eye(net.matrix.shape[1])))
    state = _random_state(rng, slots_for("A_in", "B_in", "vac2"), 3)
    worst = max(worst, abs(optics.apply_map(state, net).norm_squared() - 1.0))
    rec.equal("unitary network: T^dag T = I and norm preserved", worst, 0.0, 1e-12)

    rec.equal("attenuator vs loss-mode model (exact)", attenuator_equivalence_gap(0.37), 0.0, 0.0)
    return rec.rows


def _random_state(rng, slots, photons) -> FockState:
    """Random normalized state with a fixed total photon number."""
    keys = [k for k in np.ndindex(*([photons + 1] * len(slots))) if sum(k) == photons]
    amps = _random_vector(rng, len(keys))
    return FockState(slots, dict(zip(keys, amps)))


def attenuator_equivalence_gap(eta: float) -> float:
    """Largest difference between the heralded symmetrizer outputs of the two loss models."""
    direct = cc.build_partial_symmetrizer(eta)
    maps = []
    for e in direct.elements:
        if e.kind == "attenuator":
            maps.append(optics.beam_splitter_to_loss("arm", e.param, "loss_in", "loss_out"))
        else:
            maps.append(e.build())
    gap = 0.0
    for col in range(4):
        vec = np.zeros(4)
        vec[col] = 1.0
        psi = cc.two_photon_state(vec, "A_in", "B_in")
        a = postselect(optics.apply_maps(psi, direct.maps()), direct.pattern).projected()
        pattern = dict(direct.pattern.constraints, loss_out=0)
        b = postselect(optics.apply_maps(psi, maps), pattern).projected()
        b = restrict(b, [m for m in b.spatial_modes if m != "loss_out"])
        diff = a - b
        gap = max(gap, max((abs(v) for v in diff.amplitudes.values()), default=0.0))
    return gap


CRITERIA = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
}


def run_all(tolerance=None, max_m=an.DEFAULT_MAX_M, seed=DEFAULT_SEED, only=None) -> list[Check]:
    rows = []
    for n, func in CRITERIA.items():
        if only is not None and n not in only:
            continue
        rows.extend(func(tolerance=tolerance, max_m=max_m, seed=seed))
    return rows
