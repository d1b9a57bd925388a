"""Heralding on photon-number patterns."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass, field
from types import MappingProxyType

from .fock import FockState

_WEIGHT_TOL = 1e-10


@dataclass(frozen=True)
class PostSelectionPattern:
    """Exact total photon count (both polarizations) per constrained spatial mode."""

    constraints: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        c = dict(self.constraints)
        for mode, n in c.items():
            if int(n) != n or n < 0:
                raise ValueError(f"photon count for {mode!r} must be a non-negative integer")
        object.__setattr__(
            self, "constraints", MappingProxyType({k: int(c[k]) for k in sorted(c)})
        )

    def matches(self, state: FockState, key) -> bool:
        return all(state.count_in(key, mode) == n for mode, n in self.constraints.items())

    def to_dict(self) -> dict[str, int]:
        return dict(self.constraints)


@dataclass(frozen=True)
class Selection:
    conditional: FockState
    probability: float

    @property
    def succeeded(self) -> bool:
        return not self.conditional.is_empty

    def projected(self) -> FockState:
        """The unnormalized projection, conditional * sqrt(probability)."""
        return self.conditional * (self.probability ** 0.5)

    def __iter__(self):
        yield self.conditional
        yield self.probability


def postselect(state: FockState, pattern: PostSelectionPattern | Mapping[str, int]) -> Selection:
    """Project ``state`` onto ``pattern`` and renormalize.

    ``probability`` is the squared norm of the projected component, which is the
    success probability whenever the state came from a normalized input pushed
    through (possibly lossy) optics.  An empty projection gives probability 0 and
    an empty conditional state.
    """
    if not isinstance(pattern, PostSelectionPattern):
        pattern = PostSelectionPattern(pattern)
    modes = {s.spatial for s in state.slots}
    unknown = [m for m in pattern.constraints if m not in modes]
    if unknown:
        raise ValueError(f"pattern constrains unknown mode(s): {', '.join(unknown)}")
    kept = {k: a for k, a in state.amplitudes.items() if pattern.matches(state, k)}
    projected = FockState(state.slots, kept)
    prob = projected.norm_squared()
    if prob == 0.0:
        return Selection(FockState(state.slots, {}), 0.0)
    return Selection(projected * (1.0 / prob ** 0.5), prob)


def success_probability_formula(sym_weight: float, antisym_weight: float, eta: complex) -> float:
    """Closed-form heralding rate of the partial symmetrizer.

    ``(w_plus + |eta|^2 w_minus) / 8`` for weights ``<Psi|Pi_pm|Psi>``.
    """
    for w in (sym_weight, antisym_weight):
        if not -_WEIGHT_TOL <= w <= 1.0 + _WEIGHT_TOL:
            raise ValueError(f"projector weight {w} outside [0, 1]")
    if abs(sym_weight + antisym_weight - 1.0) > _WEIGHT_TOL:
        raise ValueError("projector weights must sum to 1")
    return (sym_weight + abs(eta) ** 2 * antisym_weight) / 8.0
