"""Polarization-resolved multimode bosonic Fock states.

A state lives on an ordered tuple of :class:`ModeSlot` (spatial label plus a
binary polarization index, 0 for psi and 1 for psi-perp).  Amplitudes are kept
sparsely, keyed by occupation tuples aligned with that slot ordering.  The same
layout is used for :class:`OperatorPolynomial`, whose keys are exponent
vectors of commuting creation operators.

Everything here is immutable; operations return new objects.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from math import factorial, sqrt
from typing import NamedTuple

import numpy as np

PRUNE = 1e-14

OccupationVector = tuple[int, ...]


class ModeSlot(NamedTuple):
    spatial: str
    pol: int


def slots_for(*spatials: str) -> tuple[ModeSlot, ...]:
    """Both polarization slots of each spatial mode, in canonical order."""
    return tuple(sorted(ModeSlot(s, p) for s in spatials for p in (0, 1)))


def _check_slots(slots: Iterable[ModeSlot]) -> tuple[ModeSlot, ...]:
    out = []
    for s in slots:
        s = ModeSlot(*s)
        if s.pol not in (0, 1):
            raise ValueError(f"polarization index must be 0 or 1, got {s.pol!r}")
        out.append(s)
    if len(set(out)) != len(out):
        raise ValueError("duplicate mode slots")
    return tuple(out)


def _canonical(slots, table, dtype=complex):
    """Sort slots, permute keys accordingly, drop tiny entries, sort keys."""
    slots = _check_slots(slots)
    order = sorted(range(len(slots)), key=lambda i: slots[i])
    new_slots = tuple(slots[i] for i in order)
    out = {}
    for key, val in table.items():
        if len(key) != len(slots):
            raise ValueError(f"key {key} does not match {len(slots)} slots")
        if any(n < 0 for n in key):
            raise ValueError(f"negative occupation in {key}")
        val = complex(val)
        if abs(val) < PRUNE:
            continue
        k = tuple(int(key[i]) for i in order)
        out[k] = out.get(k, 0j) + val
    out = {k: out[k] for k in sorted(out) if abs(out[k]) >= PRUNE}
    return new_slots, out


def _embed(table, slots, target):
    """Re-key ``table`` from ``slots`` onto the superset ``target``."""
    pos = {s: i for i, s in enumerate(target)}
    try:
        idx = [pos[s] for s in slots]
    except KeyError as exc:
        raise ValueError(f"slot {exc.args[0]} not in target mode space") from None
    out = {}
    for key, val in table.items():
        k = [0] * len(target)
        for i, n in zip(idx, key):
            k[i] = n
        out[tuple(k)] = val
    return out


def _bosonic_weight(key: OccupationVector) -> float:
    w = 1.0
    for n in key:
        if n > 1:
            w *= factorial(n)
    return sqrt(w)


@dataclass(frozen=True)
class FockState:
    """Sparse, possibly unnormalized, superposition of occupation vectors."""

    slots: tuple[ModeSlot, ...]
    amplitudes: Mapping[OccupationVector, complex] = field(default_factory=dict)

    def __post_init__(self):
        slots, amps = _canonical(self.slots, dict(self.amplitudes))
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_occupations(cls, slots, terms: Mapping) -> FockState:
        """Build from ``{ {slot: count, ...} or tuple-of-pairs : amplitude }``.

        Slots missing from an occupation mapping have count 0.
        """
        slots = _check_slots(slots)
        pos = {s: i for i, s in enumerate(slots)}
        table = {}
        for occ, amp in terms.items():
            occ = dict(occ)
            key = [0] * len(slots)
            for s, n in occ.items():
                key[pos[ModeSlot(*s)]] = n
            table[tuple(key)] = table.get(tuple(key), 0j) + amp
        return cls(slots, table)

    @classmethod
    def vacuum(cls, slots=()) -> FockState:
        slots = tuple(slots)
        return cls(slots, {(0,) * len(slots): 1.0})

    @property
    def spatial_modes(self) -> tuple[str, ...]:
        return tuple(sorted({s.spatial for s in self.slots}))

    def occupation(self, key: OccupationVector) -> dict[ModeSlot, int]:
        return {s: n for s, n in zip(self.slots, key) if n}

    def amplitude(self, occupation: Mapping) -> complex:
        pos = {s: i for i, s in enumerate(self.slots)}
        key = [0] * len(self.slots)
        for s, n in dict(occupation).items():
            s = ModeSlot(*s)
            if s not in pos:
                if n:
                    return 0j
                continue
            key[pos[s]] = n
        return self.amplitudes.get(tuple(key), 0j)

    def norm_squared(self) -> float:
        return float(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def norm(self) -> float:
        return sqrt(self.norm_squared())

    @property
    def is_empty(self) -> bool:
        return not self.amplitudes

    def is_normalized(self, tol: float = 1e-12) -> bool:
        return abs(self.norm_squared() - 1.0) <= tol

    def normalized(self) -> FockState:
        nrm = self.norm()
        if nrm == 0.0:
            raise ValueError("cannot normalize a zero-norm state")
        return self * (1.0 / nrm)

    def photon_numbers(self) -> set[int]:
        return {sum(k) for k in self.amplitudes}

    def count_in(self, key: OccupationVector, spatial: str) -> int:
        return sum(n for s, n in zip(self.slots, key) if s.spatial == spatial)

    def embed(self, slots) -> FockState:
        """Same state on a larger mode space."""
        target = tuple(sorted(set(_check_slots(slots)) | set(self.slots)))
        return FockState(target, _embed(self.amplitudes, self.slots, target))

    def __mul__(self, scalar) -> FockState:
        scalar = complex(scalar)
        return FockState(self.slots, {k: v * scalar for k, v in self.amplitudes.items()})

    __rmul__ = __mul__

    def __add__(self, other: FockState) -> FockState:
        target = tuple(sorted(set(self.slots) | set(other.slots)))
        lhs = _embed(self.amplitudes, self.slots, target)
        for k, v in _embed(other.amplitudes, other.slots, target).items():
            lhs[k] = lhs.get(k, 0j) + v
        return FockState(target, lhs)

    def __sub__(self, other: FockState) -> FockState:
        return self + other * -1.0

    def __neg__(self) -> FockState:
        return self * -1.0

    def __repr__(self):
        terms = ", ".join(
            f"{_fmt_key(self.slots, k)}: {v:.6g}" for k, v in self.amplitudes.items()
        )
        return f"FockState({{{terms}}})"


def _fmt_key(slots, key):
    parts = [f"{s.spatial}{'psi' if s.pol == 0 else 'perp'}={n}" for s, n in zip(slots, key) if n]
    return "|" + ",".join(parts) + ">" if parts else "|vac>"


@dataclass(frozen=True)
class OperatorPolynomial:
    """Polynomial in commuting creation operators, keyed by exponent vectors."""

    slots: tuple[ModeSlot, ...]
    terms: Mapping[OccupationVector, complex] = field(default_factory=dict)

    def __post_init__(self):
        slots, terms = _canonical(self.slots, dict(self.terms))
        object.__setattr__(self, "slots", slots)
        object.__setattr__(self, "terms", terms)

    @classmethod
    def creation(cls, spatial: str, pol: int) -> OperatorPolynomial:
        return cls((ModeSlot(spatial, pol),), {(1,): 1.0})

    @classmethod
    def constant(cls, value=1.0) -> OperatorPolynomial:
        return cls((), {(): value})

    def _lift(self, other):
        if isinstance(other, OperatorPolynomial):
            return other
        return OperatorPolynomial.constant(other)

    def __add__(self, other) -> OperatorPolynomial:
        other = self._lift(other)
        target = tuple(sorted(set(self.slots) | set(other.slots)))
        lhs = _embed(self.terms, self.slots, target)
        for k, v in _embed(other.terms, other.slots, target).items():
            lhs[k] = lhs.get(k, 0j) + v
        return OperatorPolynomial(target, lhs)

    __radd__ = __add__

    def __neg__(self) -> OperatorPolynomial:
        return self * -1.0

    def __sub__(self, other) -> OperatorPolynomial:
        return self + (-self._lift(other))

    def __rsub__(self, other) -> OperatorPolynomial:
        return self._lift(other) - self

    def __mul__(self, other) -> OperatorPolynomial:
        if not isinstance(other, OperatorPolynomial):
            c = complex(other)
            return OperatorPolynomial(self.slots, {k: v * c for k, v in self.terms.items()})
        target = tuple(sorted(set(self.slots) | set(other.slots)))
        lhs = _embed(self.terms, self.slots, target)
        rhs = _embed(other.terms, other.slots, target)
        out: dict = {}
        for k1, v1 in lhs.items():
            for k2, v2 in rhs.items():
                k = tuple(a + b for a, b in zip(k1, k2))
                out[k] = out.get(k, 0j) + v1 * v2
        return OperatorPolynomial(target, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> OperatorPolynomial:
        if n < 0:
            raise ValueError("negative power")
        result = OperatorPolynomial.constant(1.0)
        for _ in range(n):
            result = result * self
        return result

    def degrees(self) -> set[int]:
        return {sum(k) for k in self.terms}


def monomial_to_state(poly: OperatorPolynomial) -> FockState:
    """Apply a creation polynomial to the vacuum.

    A monomial with exponents ``n_i`` and coefficient ``c`` lands on the
    occupation vector ``n`` with amplitude ``c * sqrt(prod n_i!)``.
    """
    return FockState(
        poly.slots, {k: c * _bosonic_weight(k) for k, c in poly.terms.items()}
    )


def state_to_polynomial(state: FockState) -> OperatorPolynomial:
    """Inverse of :func:`monomial_to_state`."""
    return OperatorPolynomial(
        state.slots, {k: a / _bosonic_weight(k) for k, a in state.amplitudes.items()}
    )


def inner_product(lhs: FockState, rhs: FockState) -> complex:
    """<lhs|rhs>, conjugate-linear in ``lhs``."""
    if set(lhs.slots) != set(rhs.slots):
        raise ValueError(
            f"mode spaces differ: {lhs.spatial_modes} vs {rhs.spatial_modes}"
        )
    small, big = (lhs, rhs) if len(lhs.amplitudes) <= len(rhs.amplitudes) else (rhs, lhs)
    total = 0j
    for k, v in small.amplitudes.items():
        w = big.amplitudes.get(k)
        if w is not None:
            total += (v.conjugate() * w) if small is lhs else (w.conjugate() * v)
    return total


def overlap(lhs: FockState, rhs: FockState) -> float:
    """|<lhs|rhs>| between the normalized versions of two states."""
    return abs(inner_product(lhs, rhs)) / (lhs.norm() * rhs.norm())


def single_photon_fidelity(state: FockState, spatial: str, target_pol: int) -> float:
    """Probability-weighted fraction of photons in ``spatial`` with ``target_pol``.

    Each basis term contributes ``p * j / (j + k)`` where ``j`` (``k``) counts the
    photons in ``spatial`` with the target (orthogonal) polarization.
    """
    if target_pol not in (0, 1):
        raise ValueError("target_pol must be 0 or 1")
    norm2 = state.norm_squared()
    if norm2 == 0.0:
        raise ValueError("zero-norm state")
    j_idx = [i for i, s in enumerate(state.slots) if s.spatial == spatial and s.pol == target_pol]
    k_idx = [i for i, s in enumerate(state.slots) if s.spatial == spatial and s.pol != target_pol]
    acc = 0.0
    for key, amp in state.amplitudes.items():
        j = sum(key[i] for i in j_idx)
        k = sum(key[i] for i in k_idx)
        if j + k == 0:
            raise ValueError(f"basis term {_fmt_key(state.slots, key)} has no photon in {spatial!r}")
        acc += abs(amp) ** 2 * j / (j + k)
    return acc / norm2


def tensor(lhs: FockState, rhs: FockState) -> FockState:
    """Product state on the disjoint union of two mode spaces."""
    if set(lhs.slots) & set(rhs.slots):
        raise ValueError("tensor factors share mode slots")
    slots = lhs.slots + rhs.slots
    out = {}
    for k1, v1 in lhs.amplitudes.items():
        for k2, v2 in rhs.amplitudes.items():
            out[k1 + k2] = v1 * v2
    return FockState(slots, out)


def relabel(state: FockState, mapping: Mapping[str, str]) -> FockState:
    """Rename spatial modes; labels absent from ``mapping`` are kept."""
    slots = tuple(ModeSlot(mapping.get(s.spatial, s.spatial), s.pol) for s in state.slots)
    return FockState(slots, dict(state.amplitudes))


def restrict(state: FockState, spatials: Iterable[str]) -> FockState:
    """Keep only the listed spatial modes; every dropped slot must be empty."""
    keep = set(spatials)
    idx = [i for i, s in enumerate(state.slots) if s.spatial in keep]
    drop = [i for i, s in enumerate(state.slots) if s.spatial not in keep]
    out = {}
    for key, amp in state.amplitudes.items():
        if any(key[i] for i in drop):
            raise ValueError("cannot restrict: dropped modes are occupied")
        out[tuple(key[i] for i in idx)] = amp
    return FockState(tuple(state.slots[i] for i in idx), out)


def _rising(n: int, e: int) -> float:
    # sqrt((n+e)!/n!)
    r = 1.0
    for m in range(n + 1, n + e + 1):
        r *= m
    return sqrt(r)


def apply_creation(poly: OperatorPolynomial, state: FockState) -> FockState:
    """poly |state>, with ``poly`` built from creation operators."""
    target = tuple(sorted(set(poly.slots) | set(state.slots)))
    terms = _embed(poly.terms, poly.slots, target)
    amps = _embed(state.amplitudes, state.slots, target)
    out: dict = {}
    for e, c in terms.items():
        for n, a in amps.items():
            k = tuple(x + y for x, y in zip(n, e))
            w = 1.0
            for x, y in zip(n, e):
                if y:
                    w *= _rising(x, y)
            out[k] = out.get(k, 0j) + c * a * w
    return FockState(target, out)


def apply_annihilation(poly: OperatorPolynomial, state: FockState) -> FockState:
    """poly^dagger |state>: each creation monomial becomes its annihilation adjoint."""
    target = tuple(sorted(set(poly.slots) | set(state.slots)))
    terms = _embed(poly.terms, poly.slots, target)
    amps = _embed(state.amplitudes, state.slots, target)
    out: dict = {}
    for e, c in terms.items():
        cc = c.conjugate()
        for n, a in amps.items():
            if any(y > x for x, y in zip(n, e)):
                continue
            k = tuple(x - y for x, y in zip(n, e))
            w = 1.0
            for x, y in zip(k, e):
                if y:
                    w *= _rising(x, y)
            out[k] = out.get(k, 0j) + cc * a * w
    return FockState(target, out)


def scale_by_photon_number(state: FockState, func) -> FockState:
    """Multiply every term by ``func(total photon number)``."""
    return FockState(
        state.slots, {k: a * func(sum(k)) for k, a in state.amplitudes.items()}
    )


def to_vector(state: FockState, basis: list[OccupationVector]) -> np.ndarray:
    """Dense amplitude vector over an explicit occupation basis."""
    index = {k: i for i, k in enumerate(basis)}
    vec = np.zeros(len(basis), dtype=complex)
    for k, a in state.amplitudes.items():
        if k not in index:
            raise ValueError(f"occupation {k} outside the supplied basis")
        vec[index[k]] = a
    return vec
