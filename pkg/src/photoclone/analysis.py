"""Closed-form cloning quantities and the reference states they describe."""

from __future__ import annotations

from dataclasses import dataclass
from math import sqrt

import numpy as np

from .fock import FockState, ModeSlot, OperatorPolynomial, monomial_to_state

DEFAULT_MAX_M = 6

_GOLDEN = (sqrt(5.0) - 1.0) / 2.0


def creation(spatial: str, pol: int) -> OperatorPolynomial:
    return OperatorPolynomial.creation(spatial, pol)


def pair_operator(a: str = "A", b: str = "B") -> OperatorPolynomial:
    """Singlet pair creator a_psi b_perp - a_perp b_psi."""
    return creation(a, 0) * creation(b, 1) - creation(a, 1) * creation(b, 0)


def alpha(j: int, M: int) -> float:
    """Amplitude of the term with ``j`` wrong-polarization photons in the clone mode."""
    if M < 1:
        raise ValueError("M must be at least 1")
    if not 0 <= j <= M:
        raise ValueError(f"j must lie in [0, {M}], got {j}")
    bracket = 1.0 + sqrt(3.0) * (M - 2 * j) / sqrt(M * (M + 2))
    return (-1) ** j * bracket / sqrt(2.0 * (M + 1))


@dataclass(frozen=True)
class CloningTarget:
    M: int
    alphas: tuple[float, ...]
    target: FockState


def target_state(M: int, a: str = "A", b: str = "B", max_m: int = DEFAULT_MAX_M) -> CloningTarget:
    """Optimal covariant output: sum_j alpha_j |M-j, j>_a |j, M-j>_b."""
    if M < 1:
        raise ValueError("M must be at least 1")
    if M > max_m:
        raise ValueError(f"M={M} exceeds the configured cap {max_m}")
    alphas = tuple(alpha(j, M) for j in range(M + 1))
    slots = (ModeSlot(a, 0), ModeSlot(a, 1), ModeSlot(b, 0), ModeSlot(b, 1))
    amps = {(M - j, j, j, M - j): alphas[j] for j in range(M + 1)}
    return CloningTarget(M, alphas, FockState(slots, amps))


def fidelity_F2(q: float) -> float:
    """Single-clone fidelity of the two-clone scheme as a function of q."""
    if q < 0:
        raise ValueError("q must be non-negative")
    return (q * q - 2 * q + 9) / (2 * (5 * q * q - 2 * q + 5))


def fidelity_Fperp(M: int) -> float:
    if M < 1:
        raise ValueError("M must be at least 1")
    return 0.5 * (1.0 + sqrt((M + 2) / (3.0 * M)))


def optimal_q(M: int) -> float:
    if M < 2:
        raise ValueError("optimal q is defined for M >= 2")
    s, t = sqrt(3.0 * M), sqrt(M + 2.0)
    return (s - t) / (s + t)


def q_from_eta(eta: float) -> float:
    return (1.0 - eta) / (1.0 + eta)


def eta_from_q(q: float) -> float:
    return (1.0 - q) / (1.0 + q)


def golden_section_max(func, lo: float, hi: float, tol: float = 1e-7, max_iter: int = 200):
    """Maximize a unimodal ``func`` on [lo, hi]; returns (x, f(x))."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = func(d)
    x = 0.5 * (a + b)
    return x, func(x)


def parabolic_polish(func, x: float, h: float = 1e-5, lo: float = 0.0, hi: float = 1.0) -> float:
    """Vertex of the parabola through func(x-h), func(x), func(x+h)."""
    if x - h < lo or x + h > hi:
        return x
    fm, f0, fp = func(x - h), func(x), func(x + h)
    curv = fp - 2.0 * f0 + fm
    if curv >= 0.0:
        return x
    return x - 0.5 * h * (fp - fm) / curv


def numerical_optimal_q(M: int, fidelity=None, lo: float = 0.0, hi: float = 1.0) -> float:
    """Argmax over q of a (simulated) fidelity curve.

    Golden-section search brackets the maximum to ~1e-7; the curve is too flat
    there for comparisons of fidelity values to resolve q further, so two
    three-point parabolic fits finish the job.
    """
    if fidelity is None:
        from .circuits import cloner_fidelity_at_q

        def fidelity(q):
            return cloner_fidelity_at_q(M, q)

    x, _ = golden_section_max(fidelity, lo, hi)
    for h in (1e-4, 1e-5):
        x = parabolic_polish(fidelity, x, h, lo, hi)
    return x


def two_qubit_projectors() -> tuple[np.ndarray, np.ndarray]:
    """(Pi_plus, Pi_minus) on the basis |00>, |01>, |10>, |11> (first photon first)."""
    singlet = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / sqrt(2.0)
    pi_minus = np.outer(singlet, singlet.conj())
    pi_plus = np.eye(4, dtype=complex) - pi_minus
    return pi_plus, pi_minus


def partial_symmetrization_matrix(eta: complex) -> np.ndarray:
    """Pi_plus + eta Pi_minus."""
    pp, pm = two_qubit_projectors()
    return pp + eta * pm


def cloner_form_state(M: int, q: float, a: str = "A", b: str = "B") -> FockState:
    """X^(M-1) (a_psi b_perp + q a_perp b_psi) |0>, unnormalized."""
    x = pair_operator(a, b)
    seed = creation(a, 0) * creation(b, 1) + q * (creation(a, 1) * creation(b, 0))
    return monomial_to_state(x ** (M - 1) * seed)


def fit_q(state: FockState, M: int, a: str = "A", b: str = "B") -> tuple[float, float]:
    """Least-squares fit of ``state`` to c (v0 + q v1); returns (q, relative residual).

    v0 = X^(M-1) a_psi b_perp |0>, v1 = X^(M-1) a_perp b_psi |0>.
    """
    v0 = cloner_form_state(M, 0.0, a, b)
    v1 = cloner_form_state(M, 1.0, a, b) - v0
    keys = sorted(set(state.amplitudes) | set(v0.amplitudes) | set(v1.amplitudes))
    if set(v0.slots) != set(state.slots):
        raise ValueError("state must live on the two clone/anticlone modes")
    basis = np.array([[v0.amplitudes.get(k, 0j), v1.amplitudes.get(k, 0j)] for k in keys])
    target = np.array([state.amplitudes.get(k, 0j) for k in keys])
    coef, *_ = np.linalg.lstsq(basis, target, rcond=None)
    resid = np.linalg.norm(target - basis @ coef) / np.linalg.norm(target)
    q = coef[1] / coef[0]
    return float(q.real), float(resid)


def alpha_norm(M: int) -> float:
    return sum(alpha(j, M) ** 2 for j in range(M + 1))


def alpha_fidelity(M: int) -> float:
    return sum(alpha(j, M) ** 2 * (M - j) / M for j in range(M + 1))

