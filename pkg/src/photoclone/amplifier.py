"""Type-II parametric amplifier: the nonlinear route to the same cloner.

The evolution ``exp(g (X - X^dag))`` is computed two independent ways:

* :func:`factorized_evolution` uses the disentangled product
  ``exp(lam X) (1 - lam^2)^(n_tot/2 + 1) exp(-lam X^dag)`` with ``lam = tanh g``,
  applied term by term on sparse Fock states;
* :func:`dense_evolution` exponentiates the truncated generator as a dense
  matrix with :func:`scipy.linalg.expm`.

The dense route works on the block of the truncated space reachable from the
input and leaks amplitude at the truncation edge, so it converges to the
factorized result only as the cutoff grows.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import atanh, tanh

import numpy as np
from scipy.linalg import expm
from scipy.optimize import brentq

from .analysis import fit_q, pair_operator
from .fock import (
    FockState,
    apply_annihilation,
    apply_creation,
    restrict,
    scale_by_photon_number,
    slots_for,
)
from .postselection import postselect

SLOTS = slots_for("A", "B")


@dataclass(frozen=True)
class AmplifierModel:
    gain: float
    truncation: int = 12

    def __post_init__(self):
        if self.gain < 0:
            raise ValueError("gain must be non-negative")
        if self.truncation < 2:
            raise ValueError("truncation must allow at least the input photons")

    @classmethod
    def from_lambda(cls, lam: float, truncation: int = 12) -> AmplifierModel:
        if not 0.0 <= lam < 1.0:
            raise ValueError("lambda = tanh(g) must lie in [0, 1)")
        return cls(atanh(lam), truncation)

    @property
    def lam(self) -> float:
        return tanh(self.gain)

    @property
    def x_operator(self):
        return pair_operator("A", "B")


def input_pair() -> FockState:
    """|psi>_A |psi_perp>_B."""
    return FockState.from_occupations(SLOTS, {((("A", 0), 1), (("B", 1), 1)): 1.0})


def _exp_series(state, step, coef, cap):
    """sum_k coef^k step^k(state) / k!, dropping terms above ``cap`` photons."""
    total = state
    term = state
    k = 0
    while True:
        k += 1
        term = step(term) * (coef / k)
        term = FockState(term.slots, {n: a for n, a in term.amplitudes.items() if sum(n) <= cap})
        if term.is_empty:
            return total
        total = total + term


def factorized_evolution(model: AmplifierModel, state: FockState | None = None) -> FockState:
    state = input_pair() if state is None else state.embed(SLOTS)
    lam, cap, x = model.lam, model.truncation, model.x_operator
    out = _exp_series(state, lambda s: apply_annihilation(x, s), -lam, cap)
    out = scale_by_photon_number(out, lambda n: (1.0 - lam * lam) ** (n / 2 + 1))
    return _exp_series(out, lambda s: apply_creation(x, s), lam, cap)


def reachable_basis(state: FockState, cutoff: int) -> list[tuple[int, ...]]:
    """Occupations connected to ``state`` by X and X^dag with every slot <= ``cutoff``.

    The truncated generator is block diagonal; this is the block holding the input.
    """
    x = pair_operator("A", "B")
    seen = set(state.amplitudes)
    frontier = list(seen)
    while frontier:
        nxt = []
        for k in frontier:
            ket = FockState(SLOTS, {k: 1.0})
            for image in (apply_creation(x, ket), apply_annihilation(x, ket)):
                for kk in image.amplitudes:
                    if max(kk) <= cutoff and kk not in seen:
                        seen.add(kk)
                        nxt.append(kk)
        frontier = nxt
    return sorted(seen, key=lambda k: (sum(k), k))


def dense_evolution(
    model: AmplifierModel, state: FockState | None = None, cutoff: int | None = None
) -> FockState:
    """exp(g (X - X^dag)) by dense exponentiation with a per-slot Fock cutoff.

    ``cutoff`` defaults to ``model.truncation``.
    """
    state = input_pair() if state is None else state.embed(SLOTS)
    cutoff = model.truncation if cutoff is None else cutoff
    basis = reachable_basis(state, cutoff)
    index = {k: i for i, k in enumerate(basis)}
    x = pair_operator("A", "B")
    gen = np.zeros((len(basis), len(basis)), dtype=complex)
    for i, k in enumerate(basis):
        for kk, a in apply_creation(x, FockState(SLOTS, {k: 1.0})).amplitudes.items():
            if kk in index:
                gen[index[kk], i] = a
    u = expm(model.gain * (gen - gen.conj().T))
    vec = np.zeros(len(basis), dtype=complex)
    for k, a in state.amplitudes.items():
        vec[index[k]] = a
    out = u @ vec
    return FockState(SLOTS, {basis[i]: out[i] for i in range(len(basis))})


def evolution_deviation(model: AmplifierModel, sectors=(1, 2), cutoff: int | None = None) -> float:
    """Max amplitude difference, factorized vs dense, on the heralded (M, M) sectors."""
    fac = factorized_evolution(model)
    den = dense_evolution(model, cutoff=cutoff)
    worst = 0.0
    for M in sectors:
        keys = set(fac.amplitudes) | set(den.amplitudes)
        for k in keys:
            if k[0] + k[1] == M and k[2] + k[3] == M:
                worst = max(worst, abs(fac.amplitudes.get(k, 0j) - den.amplitudes.get(k, 0j)))
    return worst


@dataclass(frozen=True)
class AmplifierOutput:
    state: FockState
    probability: float
    q_fit: float
    residual: float


def amplifier_output(model: AmplifierModel, M: int) -> AmplifierOutput:
    """Heralded M-clone output: M photons in the signal and M in the idler mode."""
    if M < 1:
        raise ValueError("M must be at least 1")
    if model.truncation < 2 * M:
        raise ValueError(f"truncation {model.truncation} cannot hold {2 * M} photons")
    if model.lam >= 1.0:
        raise ValueError("lambda must be below 1")
    sel = postselect(factorized_evolution(model), {"A": M, "B": M})
    if not sel.succeeded:
        raise ValueError("no amplitude in the requested photon-number sector")
    state = restrict(sel.conditional, ("A", "B"))
    q, resid = fit_q(state, M)
    return AmplifierOutput(state, sel.probability, q, resid)


def lambda_for_q(q_target: float, M: int, truncation: int | None = None) -> float:
    """Gain parameter lam whose heralded output has the requested q (root find)."""
    cap = 2 * M + 2 if truncation is None else truncation

    def f(lam):
        return amplifier_output(AmplifierModel.from_lambda(lam, cap), M).q_fit - q_target

    # q_fit grows from 0 with lam and diverges before lam reaches 1; bracket by scanning.
    lo, prev = 1e-6, f(1e-6)
    for hi in np.linspace(0.02, 0.98, 49):
        cur = f(hi)
        if prev <= 0.0 <= cur:
            return brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        if cur < prev:
            break
        lo, prev = hi, cur
    raise ValueError(f"no gain reproduces q={q_target} for M={M}")


__all__ = [
    "AmplifierModel",
    "AmplifierOutput",
    "amplifier_output",
    "dense_evolution",
    "evolution_deviation",
    "factorized_evolution",
    "input_pair",
    "reachable_basis",
    "lambda_for_q",
]
