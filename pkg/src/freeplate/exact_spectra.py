"""Reference spectra with closed forms or characteristic equations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import DomainSpec, Kind
from .numerics import BESSEL_MAX_ARG, BESSEL_MAX_ORDER, bessel_j, find_root
from .ritz import Method, Operator, Spectrum

DISK_MAX_COUNT = 30
BEAM_MAX_COUNT = 12


@dataclass(frozen=True)
class OracleSpec:
    """A (domain, operator) pair for which an exact spectrum is available."""

    domain: DomainSpec
    operator: Operator
    tau: float = 0.0

    def __post_init__(self):
        op = Operator(self.operator)
        object.__setattr__(self, "operator", op)
        kind = self.domain.kind
        if op is Operator.MEMBRANE:
            if kind not in (Kind.RECTANGLE, Kind.DISK):
                raise ValueError(f"no membrane oracle for {kind.value}")
        elif kind is not Kind.INTERVAL or self.tau != 0:
            raise ValueError("the plate oracle covers only the interval with tau = 0")

    def spectrum(self, count: int) -> Spectrum:
        if self.operator is Operator.PLATE:
            return free_beam(self.domain.extents[0], count)
        if self.domain.kind is Kind.RECTANGLE:
            return rectangle_neumann(*self.domain.extents, count)
        return disk_neumann(self.domain.extents[0], count)


def rectangle_neumann(a: float, b: float, count: int) -> Spectrum:
    """Smallest ``count`` values of pi^2 (j^2/a^2 + k^2/b^2), j, k >= 0."""
    if count < 1:
        raise ValueError("count must be >= 1")
    top = math.ceil(count) + 10
    j = np.arange(top + 1)
    vals = np.pi**2 * (j[:, None] ** 2 / a**2 + j[None, :] ** 2 / b**2)
    vals = np.sort(vals.ravel())[:count]
    # every value not enumerated is at least pi^2 (top+1)^2 / max(a, b)^2
    if vals[-1] >= np.pi**2 * (top + 1) ** 2 / max(a, b) ** 2:
        raise OverflowError("enumeration range too small for the requested count")
    return Spectrum(Operator.MEMBRANE, 0.0, DomainSpec.rectangle(a, b), vals, Method.EXACT)


def bessel_prime_zeros(m: int, x_max: float = BESSEL_MAX_ARG, step: float = 0.05) -> list[float]:
    """Positive zeros of J_m' up to ``x_max``, ascending."""
    fp = lambda x: bessel_j(m, x)[1]
    xs = np.arange(step, x_max + step / 2, step)
    vals = np.array([fp(x) for x in xs])
    roots = []
    for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
        roots.append(find_root(fp, (xs[i], xs[i + 1])))
    return roots


def disk_neumann(R: float, count: int) -> Spectrum:
    """Neumann Laplacian eigenvalues of the disk, ``(j'_{m,k} / R)^2``.

    Angular orders m >= 1 contribute each value twice (cos and sin modes).
    """
    if not 1 <= count <= DISK_MAX_COUNT:
        raise ValueError(f"count must be in [1, {DISK_MAX_COUNT}]")
    vals = [0.0]
    for m in range(BESSEL_MAX_ORDER + 1):
        for root in bessel_prime_zeros(m):
            vals.extend([(root / R) ** 2] * (1 if m == 0 else 2))
    vals.sort()
    # orders above BESSEL_MAX_ORDER have j'_{m,1} > m, so they cannot intrude
    if len(vals) < count or vals[count - 1] >= (BESSEL_MAX_ORDER / R) ** 2:
        raise OverflowError("Bessel range too small for the requested count")
    return Spectrum(Operator.MEMBRANE, 0.0, DomainSpec.disk(R), vals[:count], Method.EXACT)


def beam_roots(count: int) -> list[float]:
    """Successive positive roots of cos k cosh k = 1."""
    f = lambda k: math.cos(k) * math.cosh(k) - 1.0
    # the root near (j + 1/2) pi sits in [(j + 0.4) pi, (j + 0.6) pi]
    return [find_root(f, ((j + 0.4) * math.pi, (j + 0.6) * math.pi)) for j in range(1, count + 1)]


def free_beam(L: float, count: int) -> Spectrum:
    """Free-free Euler beam: 0, 0, then (k_j / L)^4."""
    if not 1 <= count <= BEAM_MAX_COUNT:
        raise ValueError(f"count must be in [1, {BEAM_MAX_COUNT}]")
    vals = [0.0, 0.0] + [(k / L) ** 4 for k in beam_roots(max(count - 2, 0))]
    return Spectrum(Operator.PLATE, 0.0, DomainSpec.interval(L), vals[:count], Method.EXACT)
