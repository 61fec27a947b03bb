"""Scalar special functions, Gauss-Legendre rules and 1D solvers.

Legendre polynomials, Gauss-Legendre nodes and golden-section search are
written out here because their exact behaviour (recurrences valid at the
endpoints, deterministic bracketing) matters downstream. Gamma, Bessel J
and bracketed root finding defer to the standard library and scipy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import optimize, special

BESSEL_MAX_ORDER = 20
BESSEL_MAX_ARG = 60.0

ROOT_TOL = 1e-13
MIN_TOL = 1e-10

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class NoSignChange(ValueError):
    """Raised when a root bracket does not straddle a sign change."""


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")


def _as_bracket(b) -> Bracket:
    return b if isinstance(b, Bracket) else Bracket(*b)


def gamma(x: float) -> float:
    if x <= 0:
        raise ValueError(f"gamma is only defined here for x > 0, got {x}")
    return math.gamma(x)


def legendre_table(kmax: int, x):
    """Legendre polynomials P_0..P_kmax and their first two derivatives.

    Parameters
    ----------
    kmax : int
        Highest degree.
    x : array_like
        Points in [-1, 1].

    Returns
    -------
    P, dP, d2P : ndarray, shape (kmax + 1, len(x))
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    P = np.zeros((kmax + 1,) + x.shape)
    dP = np.zeros_like(P)
    d2P = np.zeros_like(P)
    P[0] = 1.0
    if kmax >= 1:
        P[1] = x
        dP[1] = 1.0
    for k in range(1, kmax):
        P[k + 1] = ((2 * k + 1) * x * P[k] - k * P[k - 1]) / (k + 1)
        # derivative recurrences stay finite at x = +-1
        dP[k + 1] = dP[k - 1] + (2 * k + 1) * P[k]
        d2P[k + 1] = d2P[k - 1] + (2 * k + 1) * dP[k]
    return P, dP, d2P


def legendre_eval(k: int, x: float) -> tuple[float, float, float]:
    """Value, first and second derivative of P_k at a scalar x."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    P, dP, d2P = legendre_table(k, x)
    return float(P[k, 0]), float(dP[k, 0]), float(d2P[k, 0])


def gauss_legendre_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1], ascending.

    Newton iteration on P_order started from the usual cosine guesses.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    i = np.arange(order)
    x = np.cos(np.pi * (i + 0.75) / (order + 0.5))
    for _ in range(100):
        P, dP, _ = legendre_table(order, x)
        dx = P[order] / dP[order]
        x = x - dx
        if np.max(np.abs(dx)) < 1e-16:
            break
    P, dP, _ = legendre_table(order, x)
    w = 2.0 / ((1.0 - x**2) * dP[order] ** 2)
    x = x[::-1].copy()
    w = w[::-1].copy()
    # enforce exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    return x, w


def bessel_j(m: int, x: float) -> tuple[float, float]:
    """J_m(x) and J_m'(x) on the validated range m <= 20, 0 <= x <= 60."""
    if not 0 <= m <= BESSEL_MAX_ORDER:
        raise ValueError(f"Bessel order {m} outside [0, {BESSEL_MAX_ORDER}]")
    if not 0.0 <= x <= BESSEL_MAX_ARG:
        raise ValueError(f"Bessel argument {x} outside [0, {BESSEL_MAX_ARG}]")
    return float(special.jv(m, x)), float(special.jvp(m, x))


def find_root(f: Callable[[float], float], b, tol: float = ROOT_TOL) -> float:
    b = _as_bracket(b)
    flo, fhi = f(b.lo), f(b.hi)
    if flo == 0.0:
        return b.lo
    if fhi == 0.0:
        return b.hi
    if flo * fhi > 0:
        raise NoSignChange(f"f({b.lo})={flo} and f({b.hi})={fhi} share a sign")
    return optimize.brentq(f, b.lo, b.hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)


def minimize_unimodal(f: Callable[[float], float], b, tol: float = MIN_TOL) -> tuple[float, float]:
    """Golden-section search; returns (argmin, min value)."""
    b = _as_bracket(b)
    a, c = b.lo, b.hi
    x1 = c - _INV_PHI * (c - a)
    x2 = a + _INV_PHI * (c - a)
    f1, f2 = f(x1), f(x2)
    while c - a > tol:
        if f1 <= f2:
            c, x2, f2 = x2, x1, f1
            x1 = c - _INV_PHI * (c - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (c - a)
            f2 = f(x2)
        if x1 >= x2:
            break
    x = 0.5 * (a + c)
    return x, f(x)
