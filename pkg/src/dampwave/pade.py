"""Rational (Pade) approximants of the exponential and their application.

The (S, T) approximant is R(theta) = P_T(theta) / Q_S(theta) with the Taylor
series of R matching e^theta through order S+T and leading defect
c_{S+T+1} theta^{S+T+1}.  Coefficients come from the classical closed form

    p_j = (S+T-j)! T! / ((S+T)! j! (T-j)!),
    q_j = (-1)^j (S+T-j)! S! / ((S+T)! j! (S-j)!),
    c_{S+T+1} = (-1)^S S! T! / ((S+T)! (S+T+1)!),

held as exact rationals; floats enter only when a polynomial is applied.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Sequence

import numpy as np

from .operators import BlockOperator

MAX_ORDER = 4  # supported range for the scheme family


def _exp_pade_fractions(S: int, T: int) -> tuple[tuple[Fraction, ...], tuple[Fraction, ...], Fraction]:
    """Exact numerator/denominator coefficients and leading error, no range cap."""
    denom = factorial(S + T)
    p = tuple(
        Fraction(factorial(S + T - j) * factorial(T), denom * factorial(j) * factorial(T - j))
        for j in range(T + 1)
    )
    q = tuple(
        (-1) ** j
        * Fraction(factorial(S + T - j) * factorial(S), denom * factorial(j) * factorial(S - j))
        for j in range(S + 1)
    )
    lead = (-1) ** S * Fraction(factorial(S) * factorial(T), denom * factorial(S + T + 1))
    return p, q, lead


@dataclass(frozen=True)
class RationalApproximant:
    """Exact-rational (S, T) approximant of e^theta."""

    S: int
    T: int
    p_coeffs: tuple[Fraction, ...]  # a_0..a_T, a_0 = 1
    q_coeffs: tuple[Fraction, ...]  # b_0..b_S, b_0 = 1
    leading_error: Fraction

    @property
    def p_floats(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.p_coeffs)

    @property
    def q_floats(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.q_coeffs)


def validate_orders(S: int, T: int) -> None:
    if not (0 <= S <= MAX_ORDER and 0 <= T <= MAX_ORDER):
        raise ValueError(f"orders must lie in [0, {MAX_ORDER}], got (S, T) = ({S}, {T})")
    if S + T < 1:
        raise ValueError("need S + T >= 1")


def pade_coefficients(S: int, T: int) -> RationalApproximant:
    """Exact coefficients of the (S, T) approximant of the exponential."""
    validate_orders(S, T)
    p, q, lead = _exp_pade_fractions(S, T)
    return RationalApproximant(S=S, T=T, p_coeffs=p, q_coeffs=q, leading_error=lead)


def _poly_scalar(coeffs: Sequence[float], theta: float) -> float:
    acc = 0.0
    for c in reversed([float(c) for c in coeffs]):
        acc = acc * theta + c
    return acc


def eval_scalar(approx: RationalApproximant, theta: float) -> float:
    """P_T(theta) / Q_S(theta); signals a pole when |Q_S(theta)| < 1e-14."""
    denom = _poly_scalar(approx.q_floats, theta)
    if abs(denom) < 1e-14:
        raise ZeroDivisionError(
            f"({approx.S},{approx.T}) approximant has a pole near theta = {theta}"
        )
    return _poly_scalar(approx.p_floats, theta) / denom


def apply_poly(coeffs: Sequence, op: BlockOperator, k: float, v: np.ndarray) -> np.ndarray:
    """Evaluate sum_j coeffs[j] (k M)^j v by Horner over blockwise matvecs."""
    v = np.asarray(v, dtype=float)
    if v.shape != (op.size,):
        raise ValueError(f"expected vector of length {op.size}, got shape {v.shape}")
    cs = [float(c) for c in coeffs]
    if not cs:
        raise ValueError("empty coefficient sequence")
    acc = cs[-1] * v
    for c in reversed(cs[:-1]):
        acc = k * op.apply(acc) + c * v
    return acc
