"""Interferometers: partial symmetrizer, photon cloners and the partial SWAP gate.

Circuits are element lists over named spatial modes plus a heralding pattern.
Multi-stage experiments are :class:`Pipeline` objects whose stages are heralded
independently; stage probabilities multiply.

Partial-symmetrizer layout (mode labels used throughout)::

    A_in, B_in --BS1--> upper, lower
    upper, vac2 --BS2--> A_out, tap
    lower, vac3 --BS3--> arm, drop3
    arm: attenuator eta (or phase shifter), then a fixed pi phase
    tap, arm --BS4--> B_out, drop4

The pi phase on ``arm`` fixes the sign of the lower-arm amplitude so that the
heralded action is (Pi_plus + eta Pi_minus) / (2 sqrt 2).
"""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from math import pi, sqrt

import numpy as np

from . import optics
from .analysis import (
    DEFAULT_MAX_M,
    eta_from_q,
    fit_q,
    pair_operator,
    q_from_eta,
)
from .fock import (
    FockState,
    ModeSlot,
    monomial_to_state,
    relabel,
    restrict,
    single_photon_fidelity,
    slots_for,
    tensor,
)
from .optics import LinearModeMap
from .postselection import PostSelectionPattern, Selection, postselect

_ETA_TOL = 1e-12


@dataclass(frozen=True)
class Element:
    kind: str
    modes: tuple[str, ...]
    param: float | None = None

    _ARITY = {"beam_splitter": 4, "attenuator": 1, "phase": 1}

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if self.kind not in self._ARITY:
            raise ValueError(f"unknown element kind {self.kind!r}")
        if len(self.modes) != self._ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {self._ARITY[self.kind]} mode labels")

    def build(self) -> LinearModeMap:
        if self.kind == "beam_splitter":
            return optics.balanced_beam_splitter(*self.modes)
        if self.kind == "attenuator":
            return optics.attenuator(self.modes[0], self.param)
        return optics.phase_shifter(self.modes[0], self.param)

    @property
    def inputs(self) -> tuple[str, ...]:
        return self.modes[:2] if self.kind == "beam_splitter" else self.modes

    @property
    def outputs(self) -> tuple[str, ...]:
        return self.modes[2:] if self.kind == "beam_splitter" else self.modes

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "modes": list(self.modes)}
        if self.param is not None:
            d["param"] = self.param
        return d


@dataclass(frozen=True)
class EprResource:
    """Normalized X^n |0> on two spatial modes (n = pair_count)."""

    pair_count: int
    modes: tuple[str, str] = ("A", "B")
    state: FockState = field(init=False, repr=False)

    def __post_init__(self):
        if self.pair_count < 1:
            raise ValueError("pair_count must be at least 1")
        object.__setattr__(self, "modes", tuple(self.modes))
        poly = pair_operator(*self.modes) ** self.pair_count
        object.__setattr__(self, "state", monomial_to_state(poly).normalized())

    def to_dict(self) -> dict:
        return {"pairs": self.pair_count, "modes": list(self.modes)}


@dataclass(frozen=True)
class Circuit:
    name: str
    elements: tuple[Element, ...]
    input_modes: tuple[str, ...]
    output_modes: tuple[str, ...]
    pattern: PostSelectionPattern
    resource: EprResource | None = None
    parameters: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        object.__setattr__(self, "input_modes", tuple(self.input_modes))
        object.__setattr__(self, "output_modes", tuple(self.output_modes))
        if not isinstance(self.pattern, PostSelectionPattern):
            object.__setattr__(self, "pattern", PostSelectionPattern(self.pattern))
        declared = self.declared_modes
        final = self.final_modes
        for m in self.output_modes:
            if m not in final:
                raise ValueError(f"output mode {m!r} is not produced by {self.name}")
        for m in self.pattern.constraints:
            if m not in final:
                raise ValueError(f"pattern mode {m!r} is not an output of {self.name}")
        if self.resource is not None:
            for m in self.resource.modes:
                if m not in declared:
                    raise ValueError(f"resource mode {m!r} is not used by {self.name}")

    @property
    def declared_modes(self) -> set[str]:
        modes = set(self.input_modes)
        if self.resource is not None:
            modes |= set(self.resource.modes)
        for e in self.elements:
            modes |= set(e.modes)
        return modes

    @property
    def final_modes(self) -> set[str]:
        """Modes alive after the last element (consumed labels removed)."""
        alive = set(self.input_modes)
        if self.resource is not None:
            alive |= set(self.resource.modes)
        for e in self.elements:
            alive -= set(e.inputs)
            alive |= set(e.outputs)
        return alive

    def maps(self) -> list[LinearModeMap]:
        return [e.build() for e in self.elements]

    def network(self) -> LinearModeMap:
        """All elements composed into a single map."""
        return optics.compose_all(self.maps())

    def prepare(self, state: FockState) -> FockState:
        if self.resource is not None:
            state = tensor(state, self.resource.state)
        return state

    def run(self, state: FockState, composed: bool = False) -> Selection:
        """Evolve, herald and return the state on ``output_modes``."""
        bad = {s.spatial for s in state.slots} - set(self.input_modes)
        if bad:
            raise ValueError(f"{self.name}: input occupies non-input mode(s) {sorted(bad)}")
        full = self.prepare(state)
        if composed:
            out = optics.apply_map(full, self.network())
        else:
            out = optics.apply_maps(full, self.maps())
        out = out.embed(slots_for(*self.pattern.constraints))
        sel = postselect(out, self.pattern)
        if not sel.succeeded:
            return Selection(FockState(slots_for(*self.output_modes), {}), 0.0)
        return Selection(_keep_modes(sel.conditional, self.output_modes), sel.probability)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "parameters": dict(self.parameters),
            "input_modes": list(self.input_modes),
            "output_modes": list(self.output_modes),
            "elements": [e.to_dict() for e in self.elements],
            "resource": None if self.resource is None else self.resource.to_dict(),
            "pattern": self.pattern.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> Circuit:
        res = d.get("resource")
        return cls(
            name=d["name"],
            elements=tuple(
                Element(e["kind"], tuple(e["modes"]), e.get("param")) for e in d["elements"]
            ),
            input_modes=tuple(d["input_modes"]),
            output_modes=tuple(d["output_modes"]),
            pattern=PostSelectionPattern(d["pattern"]),
            resource=None if res is None else EprResource(res["pairs"], tuple(res["modes"])),
            parameters=dict(d.get("parameters", {})),
        )


def _keep_modes(state: FockState, modes) -> FockState:
    """Drop every mode outside ``modes``; those must be empty."""
    keep = set(modes)
    others = {s.spatial for s in state.slots} - keep
    if not others:
        return state.embed(slots_for(*modes))
    return restrict(state, keep).embed(slots_for(*modes))


@dataclass(frozen=True)
class PipelineResult:
    state: FockState
    probability: float
    stage_probabilities: tuple[float, ...]

    @property
    def succeeded(self) -> bool:
        return not self.state.is_empty


@dataclass(frozen=True)
class Pipeline:
    """Independently heralded stages; ``links[i]`` renames stage i outputs for stage i+1."""

    name: str
    stages: tuple[Circuit, ...]
    links: tuple[Mapping[str, str], ...] = ()

    def __post_init__(self):
        if len(self.links) != len(self.stages) - 1:
            raise ValueError("need one link mapping between consecutive stages")

    def run(self, state: FockState, composed: bool = False) -> PipelineResult:
        probs = []
        for i, stage in enumerate(self.stages):
            sel = stage.run(state, composed=composed)
            probs.append(sel.probability)
            if not sel.succeeded:
                return PipelineResult(sel.conditional, 0.0, tuple(probs))
            state = sel.conditional
            if i < len(self.links):
                state = relabel(state, self.links[i])
        return PipelineResult(state, float(np.prod(probs)), tuple(probs))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "stages": [s.to_dict() for s in self.stages],
            "links": [dict(m) for m in self.links],
        }


# ----------------------------------------------------------------------------
# two-photon polarization states


def two_photon_state(vec, a: str, b: str) -> FockState:
    """sum_{p,q} vec[2p+q] a_p^dag b_q^dag |0>."""
    vec = np.asarray(vec, dtype=complex).reshape(4)
    terms = {}
    for p in (0, 1):
        for q in (0, 1):
            terms[((ModeSlot(a, p), 1), (ModeSlot(b, q), 1))] = vec[2 * p + q]
    return FockState.from_occupations(slots_for(a, b), terms)


def two_photon_vector(state: FockState, a: str, b: str) -> np.ndarray:
    """Inverse of :func:`two_photon_state` (ignores other occupation patterns)."""
    return np.array(
        [state.amplitude({(a, p): 1, (b, q): 1}) for p in (0, 1) for q in (0, 1)],
        dtype=complex,
    )


def orthogonal(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.array([-psi[1].conjugate(), psi[0].conjugate()])


def basis_unitary(psi) -> np.ndarray:
    """Columns psi and psi_perp."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.column_stack([psi, orthogonal(psi)])


def rotate_polarization(state: FockState, u) -> FockState:
    return optics.apply_map(state, optics.polarization_rotation(state.spatial_modes, u))


# ----------------------------------------------------------------------------
# partial symmetrizer / partial SWAP


def _check_eta(eta) -> complex:
    eta = complex(eta)
    if abs(eta.imag) <= _ETA_TOL and -_ETA_TOL <= eta.real <= 1.0 + _ETA_TOL:
        return complex(min(max(eta.real, 0.0), 1.0))
    if abs(abs(eta) - 1.0) <= _ETA_TOL:
        return eta
    raise ValueError(f"eta must be real in [0, 1] or of unit modulus, got {eta}")


def build_partial_symmetrizer(eta) -> Circuit:
    eta = _check_eta(eta)
    if eta.imag == 0.0 and eta.real >= 0.0:
        arm = Element("attenuator", ("arm",), eta.real)
        params = {"eta": eta.real}
    else:
        arm = Element("phase", ("arm",), float(np.angle(eta)))
        params = {"phi": float(np.angle(eta))}
    elements = (
        Element("beam_splitter", ("A_in", "B_in", "upper", "lower")),
        Element("beam_splitter", ("upper", "vac2", "A_out", "tap")),
        Element("beam_splitter", ("lower", "vac3", "arm", "drop3")),
        arm,
        Element("phase", ("arm",), pi),
        Element("beam_splitter", ("tap", "arm", "B_out", "drop4")),
    )
    return Circuit(
        name="partial_symmetrizer",
        elements=elements,
        input_modes=("A_in", "B_in"),
        output_modes=("A_out", "B_out"),
        pattern=PostSelectionPattern({"A_out": 1, "B_out": 1, "drop3": 0, "drop4": 0}),
        parameters=params,
    )


def build_partial_swap(phi: float) -> Circuit:
    """The symmetrizer with its attenuator replaced by a phase shifter."""
    c = build_partial_symmetrizer(np.exp(1j * float(phi)))
    return Circuit(
        "partial_swap", c.elements, c.input_modes, c.output_modes, c.pattern,
        parameters={"phi": float(phi)},
    )


def _require_pair(state: FockState, a: str, b: str):
    for key in state.amplitudes:
        if state.count_in(key, a) != 1 or state.count_in(key, b) != 1 or sum(key) != 2:
            raise ValueError(f"expected exactly one photon in each of {a!r} and {b!r}")


def run_partial_symmetrizer(state: FockState, eta) -> Selection:
    _require_pair(state, "A_in", "B_in")
    return build_partial_symmetrizer(eta).run(state)


def conditional_map(run, a_in="A_in", b_in="B_in", a_out="A_out", b_out="B_out") -> np.ndarray:
    """4x4 heralded (unnormalized) action reconstructed from basis inputs.

    ``run`` maps an input FockState to an object with ``conditional`` (or
    ``state``) and ``probability``.
    """
    mat = np.zeros((4, 4), dtype=complex)
    for col in range(4):
        e = np.zeros(4)
        e[col] = 1.0
        res = run(two_photon_state(e, a_in, b_in))
        out = getattr(res, "conditional", None)
        if out is None:
            out = res.state
        if res.probability > 0.0:
            mat[:, col] = two_photon_vector(out, a_out, b_out) * sqrt(res.probability)
    return mat


def symmetrizer_matrix(eta) -> np.ndarray:
    circuit = build_partial_symmetrizer(eta)
    return conditional_map(circuit.run)


def partial_swap_matrix(phi: float) -> np.ndarray:
    return conditional_map(build_partial_swap(phi).run)


def two_stage_swap(phi1: float, phi2: float) -> Pipeline:
    return Pipeline(
        "partial_swap_x2",
        (build_partial_swap(phi1), build_partial_swap(phi2)),
        ({"A_out": "A_in", "B_out": "B_in"},),
    )


def two_stage_swap_matrix(phi1: float, phi2: float) -> np.ndarray:
    return conditional_map(two_stage_swap(phi1, phi2).run)


# ----------------------------------------------------------------------------
# cloners


def build_hom_stage(M: int, max_m: int = DEFAULT_MAX_M) -> Circuit:
    """Two HOM splitters fed by C, D and an (M-1)-pair resource on A, B."""
    if M < 2:
        raise ValueError("M must be at least 2")
    if M > max_m:
        raise ValueError(f"M={M} exceeds the configured cap {max_m}")
    return Circuit(
        name="hom_pair",
        elements=(
            Element("beam_splitter", ("A", "C", "A_out", "C_out")),
            Element("beam_splitter", ("B", "D", "B_out", "D_out")),
        ),
        input_modes=("C", "D"),
        output_modes=("A_out", "B_out"),
        pattern=PostSelectionPattern({"A_out": M, "B_out": M, "C_out": 0, "D_out": 0}),
        resource=EprResource(M - 1, ("A", "B")),
        parameters={"M": M},
    )


def build_cloner(M: int, eta: float, max_m: int = DEFAULT_MAX_M) -> Pipeline:
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must lie in [0, 1], got {eta}")
    return Pipeline(
        "cloner",
        (build_partial_symmetrizer(eta), build_hom_stage(M, max_m)),
        ({"A_out": "C", "B_out": "D"},),
    )


def input_pair_state(psi=None, a: str = "A_in", b: str = "B_in") -> FockState:
    """|psi>_a |psi_perp>_b in the physical polarization basis."""
    psi = np.array([1.0, 0.0]) if psi is None else np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return two_photon_state(np.kron(psi, orthogonal(psi)), a, b)


@dataclass(frozen=True)
class ClonerResult:
    state: FockState
    probability: float
    stage_probabilities: tuple[float, ...]
    fidelity: float
    anticlone_fidelity: float
    M: int
    eta: float

    @property
    def q(self) -> float:
        return q_from_eta(self.eta)


def run_cloner(M: int, eta: float, psi=None, max_m: int = DEFAULT_MAX_M) -> ClonerResult:
    """Clone |psi>|psi_perp> into M clones (A_out) and M anticlones (B_out).

    The returned state is expressed in the physical basis; fidelities are taken
    against psi (clones) and psi_perp (anticlones).
    """
    pipeline = build_cloner(M, eta, max_m)
    res = pipeline.run(input_pair_state(psi))
    if not res.succeeded:
        raise ValueError("heralding pattern has zero probability")
    u = basis_unitary([1.0, 0.0] if psi is None else psi)
    local = rotate_polarization(res.state, u.conj().T)
    return ClonerResult(
        state=res.state,
        probability=res.probability,
        stage_probabilities=res.stage_probabilities,
        fidelity=single_photon_fidelity(local, "A_out", 0),
        anticlone_fidelity=single_photon_fidelity(local, "B_out", 1),
        M=M,
        eta=float(eta),
    )


def cloner_fidelity_at_q(M: int, q: float) -> float:
    return run_cloner(M, eta_from_q(q)).fidelity


def cloner_q(result: ClonerResult) -> tuple[float, float]:
    """q and fit residual of a cloner output against X^(M-1)(a b' + q a' b)|0>."""
    return fit_q(relabel(result.state, {"A_out": "A", "B_out": "B"}), result.M)


def epr_stage_factorizations(eta: float | None = None) -> dict[str, float]:
    """Second-stage heralding rate of the M=2 cloner under both readings.

    ``presymmetrized``: the stage acts on the normalized output of the
    symmetrizer.  ``raw``: the stage acts on |psi>|psi_perp> directly.
    """
    eta = sqrt(2.0 / 3.0) if eta is None else float(eta)
    sym = run_partial_symmetrizer(input_pair_state(), eta)
    stage = build_hom_stage(2)
    pre = stage.run(relabel(sym.conditional, {"A_out": "C", "B_out": "D"})).probability
    raw = stage.run(input_pair_state(a="C", b="D")).probability
    return {
        "p_sym": sym.probability,
        "p_stage_presymmetrized": pre,
        "p_stage_raw": raw,
        "p_tot_presymmetrized": sym.probability * pre,
        "p_tot_raw": sym.probability * raw,
    }


@dataclass(frozen=True)
class SinglePhotonCloneResult:
    state: FockState
    probability: float
    fidelity: float
    anticlone_fidelity: float


def build_single_photon_cloner() -> Circuit:
    return Circuit(
        name="single_photon_cloner",
        elements=(Element("beam_splitter", ("A", "C", "A_out", "C_out")),),
        input_modes=("C",),
        output_modes=("A_out", "B"),
        pattern=PostSelectionPattern({"A_out": 2, "C_out": 0}),
        resource=EprResource(1, ("A", "B")),
    )


def single_photon_cloner(psi=None) -> SinglePhotonCloneResult:
    """One photon |psi> in C bunches with half of a singlet on BS(A, C)."""
    psi = np.array([1.0, 0.0]) if psi is None else np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    photon = FockState(slots_for("C"), {(1, 0): psi[0], (0, 1): psi[1]})
    sel = build_single_photon_cloner().run(photon)
    if not sel.succeeded:
        raise ValueError("heralding pattern has zero probability")
    local = rotate_polarization(sel.conditional, basis_unitary(psi).conj().T)
    return SinglePhotonCloneResult(
        state=sel.conditional,
        probability=sel.probability,
        fidelity=single_photon_fidelity(local, "A_out", 0),
        anticlone_fidelity=single_photon_fidelity(local, "B", 1),
    )
