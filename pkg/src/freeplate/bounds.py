"""Closed-form upper bounds for free membrane and free plate eigenvalues.

All bounds depend on the domain only through its dimension ``n`` and
volume. Writing ``V = omega_n * volume`` and ``r0 = 2 pi (m / V)^(1/n)``:

* sums of membrane eigenvalues, ``(2pi)^2 n/(n+2) V^(-2/n) m^((n+2)/n)``;
* single membrane eigenvalues, ``(2pi)^2 ((n+2)/(2V))^(2/n) m^(2/n)``;
* sums of plate eigenvalues, ``G(r0)`` with
  ``G(r) = n V / (2pi)^n * (r^(n+4)/(n+4) + tau r^(n+2)/(n+2))``;
* single plate eigenvalues, ``min F(r)`` over ``r > r0`` with
  ``F(r) = n V (r^(n+4)/(n+4) + tau r^(n+2)/(n+2)) / (V r^n - m (2pi)^n)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

from .domains import unit_ball_volume
from .numerics import find_root, minimize_unimodal

TWO_PI = 2.0 * math.pi
LEMMA_SLACK = 1e-12
CLOSED_FORM_CHECK_RTOL = 1e-8


class DomainError(ValueError):
    """Radius at or below the threshold where F's denominator vanishes."""


class PreconditionViolated(ValueError):
    pass


@dataclass(frozen=True)
class BoundInput:
    n: int
    volume: float
    tau: float = 0.0
    m: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("dimension must be >= 1")
        if not self.volume > 0:
            raise ValueError("volume must be positive")
        if not self.tau >= 0:
            raise ValueError("tau must be nonnegative")
        if self.m < 0:
            raise ValueError("m must be nonnegative")

    @property
    def ball_volume(self) -> float:
        """omega_n times the domain volume."""
        return unit_ball_volume(self.n) * self.volume

    def with_m(self, m: int) -> "BoundInput":
        return BoundInput(self.n, self.volume, self.tau, m)


def kroger_sum_bound(b: BoundInput) -> float:
    n, V, m = b.n, b.ball_volume, b.m
    return TWO_PI**2 * (n / (n + 2)) * V ** (-2.0 / n) * m ** ((n + 2) / n)


def kroger_eig_bound(b: BoundInput) -> float:
    """Bound on the (m+1)-th membrane eigenvalue; 0 for m = 0."""
    n, V, m = b.n, b.ball_volume, b.m
    if m == 0:
        return 0.0
    return TWO_PI**2 * ((n + 2) / (2 * V)) ** (2.0 / n) * m ** (2.0 / n)


def plate_sum_bound(b: BoundInput) -> float:
    n, V, m, tau = b.n, b.ball_volume, b.m, b.tau
    fourth = TWO_PI**4 * (n / (n + 4)) * V ** (-4.0 / n) * m ** ((n + 4) / n)
    second = tau * TWO_PI**2 * (n / (n + 2)) * V ** (-2.0 / n) * m ** ((n + 2) / n)
    return fourth + second


def threshold_radius(b: BoundInput) -> float:
    return TWO_PI * (b.m / b.ball_volume) ** (1.0 / b.n)


def frequency_energy(b: BoundInput, r: float) -> float:
    """Integral of |z|^4 + tau |z|^2 over the ball of radius r, per unit volume."""
    n = b.n
    return n * unit_ball_volume(n) * (r ** (n + 4) / (n + 4) + b.tau * r ** (n + 2) / (n + 2))


def G_limit(b: BoundInput, r: float) -> float:
    """n V/(2pi)^n (r^(n+4)/(n+4) + tau r^(n+2)/(n+2)); equals the sum bound at r0."""
    n = b.n
    return n * b.ball_volume / TWO_PI**n * (r ** (n + 4) / (n + 4) + b.tau * r ** (n + 2) / (n + 2))


def F_ratio(b: BoundInput, r: float) -> float:
    n, V, m, tau = b.n, b.ball_volume, b.m, b.tau
    denom = V * r**n - m * TWO_PI**n
    if not r > threshold_radius(b) or denom <= 0:
        raise DomainError(f"r = {r} is not above the threshold radius {threshold_radius(b)}")
    return n * V * (r ** (n + 4) / (n + 4) + tau * r ** (n + 2) / (n + 2)) / denom


def _F_slope_sign(b: BoundInput, r: float) -> float:
    # numerator of F'(r) divided by the positive factor n V r^(n-1)
    n, V, m, tau = b.n, b.ball_volume, b.m, b.tau
    denom = V * r**n - m * TWO_PI**n
    top = r ** (n + 4) / (n + 4) + tau * r ** (n + 2) / (n + 2)
    return denom * (r**4 + tau * r**2) - n * V * top


def closed_form_argmin(b: BoundInput) -> float:
    """Closed-form minimizer of F for tau = 0: 2pi (m (n+4) / (4 V))^(1/n)."""
    return TWO_PI * (b.m * (b.n + 4) / (4 * b.ball_volume)) ** (1.0 / b.n)


def minimize_F(b: BoundInput, tol: float = 1e-10) -> tuple[float, float]:
    """Numerical minimizer of F over r > r0 and the minimum value.

    Golden-section search on a bracket grown by doubling until F turns up,
    then the slope sign change is refined by root finding, since comparing F
    values alone cannot place a flat minimum better than sqrt(eps).
    """
    if b.m < 1:
        raise ValueError("F has a finite minimizer only for m >= 1")
    r0 = threshold_radius(b)
    lo = r0 * (1 + 1e-9)
    hi = 2 * r0
    while _F_slope_sign(b, hi) <= 0:
        hi *= 2
    r, _ = minimize_unimodal(lambda x: F_ratio(b, x), (lo, hi), tol * r0)
    step = 1e-6 * r
    a, c = max(lo, r - step), min(hi, r + step)
    while _F_slope_sign(b, a) > 0 and a > lo:
        a = max(lo, a - 10 * step)
    while _F_slope_sign(b, c) < 0 and c < hi:
        c = min(hi, c + 10 * step)
    if _F_slope_sign(b, a) < 0 < _F_slope_sign(b, c):
        r = find_root(lambda x: _F_slope_sign(b, x), (a, c), tol=1e-15 * r)
    return r, F_ratio(b, r)


def plate_eig_bound(b: BoundInput) -> float:
    """Bound on the (m+1)-th plate eigenvalue.

    For m = 0 the infimum of F over r > 0 is 0 for every tau, matching the
    constant zero mode. For tau = 0 the closed form is returned after a
    consistency check against the numerical minimum.
    """
    if b.m == 0:
        return 0.0
    if b.tau == 0:
        n, V, m = b.n, b.ball_volume, b.m
        closed = TWO_PI**4 * ((n + 4) / (4 * V)) ** (4.0 / n) * m ** (4.0 / n)
        _, numeric = minimize_F(b)
        if abs(numeric - closed) > CLOSED_FORM_CHECK_RTOL * closed:
            raise ArithmeticError(f"closed form {closed} disagrees with min F = {numeric}")
        return closed
    return minimize_F(b)[1]


def sum_lemma_holds(a: float, b: float, c: float, cs: Sequence[float], lambdas: Sequence[float]) -> bool:
    """Check the conclusion ``c * sum(lambdas[:m]) <= a`` under the lemma's hypotheses.

    Hypotheses: ``0 <= lambdas`` ascending with ``len(cs) + 1`` entries,
    ``0 < cs[j] <= c``, ``b > m c`` and
    ``lambdas[m] <= (a - sum lambdas[j] cs[j]) / (b - sum cs[j])``.
    Inputs violating them raise ``PreconditionViolated``.
    """
    m = len(cs)
    if len(lambdas) != m + 1:
        raise PreconditionViolated("need len(lambdas) == len(cs) + 1")
    if not (a > 0 and b > 0 and c > 0) or any(not 0 < cj <= c for cj in cs):
        raise PreconditionViolated("a, b, c must be positive and 0 < c_j <= c")
    if any(x < 0 for x in lambdas) or any(y < x for x, y in zip(lambdas, lambdas[1:])):
        raise PreconditionViolated("lambdas must be nonnegative and ascending")
    if not b > m * c:
        raise PreconditionViolated("need b > m c")
    denom = b - sum(cs)
    if lambdas[m] * denom > a - sum(l * cj for l, cj in zip(lambdas, cs)):
        raise PreconditionViolated("hypothesis inequality fails")
    return c * sum(lambdas[:m]) <= a + LEMMA_SLACK * abs(a)


BOUND_KINDS = ("kroger_sum", "kroger_eig", "plate_sum", "plate_eig")


def bound_row(b: BoundInput) -> dict[str, float]:
    return {
        "kroger_sum": kroger_sum_bound(b),
        "kroger_eig": kroger_eig_bound(b),
        "plate_sum": plate_sum_bound(b),
        "plate_eig": plate_eig_bound(b),
    }


def bounds_table(n: int, volume: float, tau: float, m_max: int) -> list[dict]:
    """Rows ``{"m": m, <kind>: value, ...}`` for m = 1..m_max."""
    base = BoundInput(n, volume, tau, 0)
    return [{"m": m, **bound_row(base.with_m(m))} for m in range(1, m_max + 1)]


def fmt(x: float) -> str:
    return f"{x:.11e}"


def write_bounds_csv(rows: list[dict], stream, long: bool = False) -> None:
    """Wide layout (one row per m) or long layout ``m, bound_kind, value``."""
    w = csv.writer(stream, lineterminator="\n")
    if long:
        w.writerow(["m", "bound_kind", "value"])
        for row in rows:
            for kind in BOUND_KINDS:
                w.writerow([row["m"], kind, fmt(row[kind])])
    else:
        w.writerow(["m", *BOUND_KINDS])
        for row in rows:
            w.writerow([row["m"], *(fmt(row[k]) for k in BOUND_KINDS)])
