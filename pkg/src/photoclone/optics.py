"""Linear optical elements as linear maps on creation operators.

A :class:`LinearModeMap` holds a matrix ``T`` with rows indexed by output
slots and columns by input slots, and acts by the substitution
``a_in[i]^dag -> sum_j T[j, i] a_out[j]^dag``.  Elements in this package never
mix polarizations, so their matrices are ``T_spatial (x) I_2``; only
:func:`polarization_rotation` (a test helper) does.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import sqrt

import numpy as np

from .fock import FockState, ModeSlot, slots_for

_UNITARY_TOL = 1e-12


@dataclass(frozen=True)
class LinearModeMap:
    inputs: tuple[ModeSlot, ...]
    outputs: tuple[ModeSlot, ...]
    matrix: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        if m.shape != (len(self.outputs), len(self.inputs)):
            raise ValueError(
                f"matrix shape {m.shape} does not match "
                f"{len(self.outputs)} outputs x {len(self.inputs)} inputs"
            )
        for label, slots in (("input", self.inputs), ("output", self.outputs)):
            if len(set(slots)) != len(slots):
                raise ValueError(f"duplicate {label} slots in {self.name or 'map'}")
        object.__setattr__(self, "inputs", tuple(ModeSlot(*s) for s in self.inputs))
        object.__setattr__(self, "outputs", tuple(ModeSlot(*s) for s in self.outputs))
        object.__setattr__(self, "matrix", m)

    @property
    def input_modes(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(s.spatial for s in self.inputs))

    @property
    def output_modes(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(s.spatial for s in self.outputs))

    def is_unitary(self, tol: float = _UNITARY_TOL) -> bool:
        m = self.matrix
        if m.shape[0] != m.shape[1]:
            return False
        return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[1]))) <= tol)

    def padded(self, extra) -> LinearModeMap:
        """Identity pass-through on extra slots (same label in and out)."""
        extra = [ModeSlot(*s) for s in extra]
        for s in extra:
            if s in self.inputs or s in self.outputs:
                raise ValueError(
                    f"cannot pass {s} through {self.name or 'map'}: label already used"
                )
        ins = self.inputs + tuple(extra)
        outs = self.outputs + tuple(extra)
        m = np.zeros((len(outs), len(ins)), dtype=complex)
        m[: len(self.outputs), : len(self.inputs)] = self.matrix
        for i in range(len(extra)):
            m[len(self.outputs) + i, len(self.inputs) + i] = 1.0
        return LinearModeMap(ins, outs, m, self.name)

    def column(self, slot: ModeSlot) -> dict[ModeSlot, complex]:
        i = self.inputs.index(slot)
        col = self.matrix[:, i]
        return {self.outputs[j]: complex(col[j]) for j in np.flatnonzero(col)}


def _spatial_map(inputs, outputs, t, name) -> LinearModeMap:
    """Lift a spatial-mode matrix to both polarizations."""
    t = np.asarray(t, dtype=complex)
    ins = tuple(ModeSlot(s, p) for s in inputs for p in (0, 1))
    outs = tuple(ModeSlot(s, p) for s in outputs for p in (0, 1))
    return LinearModeMap(ins, outs, np.kron(t, np.eye(2)), name)


def identity(*spatials: str) -> LinearModeMap:
    return _spatial_map(spatials, spatials, np.eye(len(spatials)), "identity")


def balanced_beam_splitter(in1: str, in2: str, out1: str, out2: str) -> LinearModeMap:
    """50:50 splitter, in1 -> (out1 + out2)/sqrt2, in2 -> (out1 - out2)/sqrt2."""
    if len({in1, in2}) != 2 or len({out1, out2}) != 2:
        raise ValueError("beam splitter needs two distinct inputs and two distinct outputs")
    h = np.array([[1, 1], [1, -1]]) / sqrt(2)
    return _spatial_map((in1, in2), (out1, out2), h, f"BS({in1},{in2})")


def attenuator(mode: str, eta: float) -> LinearModeMap:
    """Amplitude transmittance ``eta``: a^dag -> eta a^dag (non-unitary)."""
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"attenuator transmittance must lie in [0, 1], got {eta}")
    return _spatial_map((mode,), (mode,), [[eta]], f"att({mode})")


def phase_shifter(mode: str, phi: float) -> LinearModeMap:
    return _spatial_map((mode,), (mode,), [[np.exp(1j * float(phi))]], f"phase({mode})")


def beam_splitter_to_loss(mode: str, eta: float, loss_in: str, loss_out: str) -> LinearModeMap:
    """Unitary loss model: transmittance ``eta`` into ``mode``, rest to a loss mode.

    Post-selected on an empty loss mode this reproduces :func:`attenuator`.
    """
    eta = float(eta)
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"transmittance must lie in [0, 1], got {eta}")
    r = sqrt(1.0 - eta * eta)
    t = np.array([[eta, -r], [r, eta]])
    return _spatial_map((mode, loss_in), (mode, loss_out), t, f"loss({mode})")


def polarization_rotation(spatials, u) -> LinearModeMap:
    """Apply the 2x2 unitary ``u`` to the polarization of every listed mode.

    ``a_{s,p}^dag -> sum_q u[q, p] a_{s,q}^dag``, i.e. the basis state ``p`` goes to
    column ``p`` of ``u``.
    """
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise ValueError("polarization rotation must be 2x2")
    spatials = tuple(spatials)
    slots = tuple(ModeSlot(s, p) for s in spatials for p in (0, 1))
    return LinearModeMap(slots, slots, np.kron(np.eye(len(spatials)), u), "rotation")


def compose(first: LinearModeMap, second: LinearModeMap) -> LinearModeMap:
    """``second`` after ``first``, padding each with identities as needed."""
    a = first.padded([s for s in second.inputs if s not in first.outputs])
    b = second.padded([s for s in a.outputs if s not in second.inputs])
    perm = [a.outputs.index(s) for s in b.inputs]
    m = b.matrix @ a.matrix[perm, :]
    return LinearModeMap(a.inputs, b.outputs, m, f"{first.name}*{second.name}")


def compose_all(maps) -> LinearModeMap:
    maps = list(maps)
    if not maps:
        raise ValueError("nothing to compose")
    out = maps[0]
    for m in maps[1:]:
        out = compose(out, m)
    return out


def apply_map(state: FockState, lmap: LinearModeMap) -> FockState:
    """Substitute every input creation operator and expand.

    Slots of ``state`` that the map does not address pass through unchanged.
    Exact: photon number is finite, so the expansion terminates.
    """
    missing = [s for s in state.slots if s not in lmap.inputs]
    if missing:
        lmap = lmap.padded(missing)
    out_slots = lmap.outputs
    dim = len(out_slots)
    columns = []
    for s in state.slots:
        i = lmap.inputs.index(s)
        col = lmap.matrix[:, i]
        columns.append([(int(j), complex(col[j])) for j in np.flatnonzero(col)])

    result: dict = {}
    for key, amp in state.amplitudes.items():
        # amplitude -> monomial coefficient
        coeff = amp
        for n in key:
            for m in range(2, n + 1):
                coeff /= sqrt(m)
        poly = {(0,) * dim: coeff}
        for n, col in zip(key, columns):
            for _ in range(n):
                nxt: dict = {}
                for mono, c in poly.items():
                    for j, t in col:
                        k = list(mono)
                        k[j] += 1
                        k = tuple(k)
                        nxt[k] = nxt.get(k, 0j) + c * t
                poly = nxt
        for mono, c in poly.items():
            w = 1.0
            for n in mono:
                for m in range(2, n + 1):
                    w *= m
            result[mono] = result.get(mono, 0j) + c * sqrt(w)
    return FockState(out_slots, result)


def apply_maps(state: FockState, maps) -> FockState:
    for m in maps:
        state = apply_map(state, m)
    return state


__all__ = [
    "LinearModeMap",
    "apply_map",
    "apply_maps",
    "attenuator",
    "balanced_beam_splitter",
    "beam_splitter_to_loss",
    "compose",
    "compose_all",
    "identity",
    "phase_shifter",
    "polarization_rotation",
    "slots_for",
]
