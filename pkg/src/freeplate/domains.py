"""Supported domains, their measures and quadrature rules.

Intervals and rectangles sit at the origin corner, ``[0, a]`` and
``[0, a] x [0, b]``; disks are centred at the origin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .numerics import gamma, gauss_legendre_nodes


class Kind(str, Enum):
    INTERVAL = "interval"
    RECTANGLE = "rectangle"
    DISK = "disk"


_DIMENSION = {Kind.INTERVAL: 1, Kind.RECTANGLE: 2, Kind.DISK: 2}
_N_EXTENTS = {Kind.INTERVAL: 1, Kind.RECTANGLE: 2, Kind.DISK: 1}


@dataclass(frozen=True)
class DomainSpec:
    kind: Kind
    extents: tuple[float, ...]

    def __post_init__(self):
        kind = Kind(self.kind)
        object.__setattr__(self, "kind", kind)
        ext = tuple(float(e) for e in self.extents)
        if len(ext) != _N_EXTENTS[kind]:
            raise ValueError(f"{kind.value} takes {_N_EXTENTS[kind]} extent(s), got {len(ext)}")
        if not all(math.isfinite(e) and e > 0 for e in ext):
            raise ValueError(f"extents must be positive and finite, got {ext}")
        object.__setattr__(self, "extents", ext)

    @classmethod
    def interval(cls, a: float) -> "DomainSpec":
        return cls(Kind.INTERVAL, (a,))

    @classmethod
    def rectangle(cls, a: float, b: float) -> "DomainSpec":
        return cls(Kind.RECTANGLE, (a, b))

    @classmethod
    def disk(cls, radius: float) -> "DomainSpec":
        return cls(Kind.DISK, (radius,))

    @property
    def dimension(self) -> int:
        return _DIMENSION[self.kind]

    def volume(self) -> float:
        return volume(self)

    def bounding_box(self) -> list[tuple[float, float]]:
        """Axis-aligned box ``[(lo, hi), ...]`` containing the domain."""
        if self.kind is Kind.DISK:
            R = self.extents[0]
            return [(-R, R), (-R, R)]
        return [(0.0, e) for e in self.extents]

    def scaled(self, s: float) -> "DomainSpec":
        return DomainSpec(self.kind, tuple(s * e for e in self.extents))

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "extents": list(self.extents)}

    @classmethod
    def from_dict(cls, d: dict) -> "DomainSpec":
        try:
            return cls(Kind(str(d["kind"]).lower()), tuple(d["extents"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed domain object {d!r}") from exc


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes of shape (q, n) and positive weights of shape (q,)."""

    nodes: np.ndarray
    weights: np.ndarray
    degree: int

    def __post_init__(self):
        if self.nodes.shape[0] != self.weights.shape[0]:
            raise ValueError("node and weight counts differ")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, values) -> float:
        return np.tensordot(self.weights, np.asarray(values), axes=(0, 0))


def unit_ball_volume(n: int) -> float:
    if n < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (n / 2) / gamma(n / 2 + 1)


def volume(d: DomainSpec) -> float:
    if d.kind is Kind.INTERVAL:
        return d.extents[0]
    if d.kind is Kind.RECTANGLE:
        return d.extents[0] * d.extents[1]
    return math.pi * d.extents[0] ** 2


def _gl_on(lo: float, hi: float, order: int):
    x, w = gauss_legendre_nodes(order)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def polar_rule(radius: float, order: int, n_angles: int | None = None):
    """Polar product rule on the disk of given radius centred at the origin.

    Gauss-Legendre in r carries the Jacobian r; the angle uses the
    trapezoid rule, which is exact on trigonometric polynomials of degree
    below ``n_angles``. Returns nodes (q, 2) and weights (q,).
    """
    if n_angles is None:
        n_angles = 2 * order + 1
    r, wr = _gl_on(0.0, radius, order)
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    R, T = np.meshgrid(r, theta, indexing="ij")
    W = np.outer(wr * r, np.full(n_angles, 2.0 * np.pi / n_angles))
    nodes = np.column_stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()])
    return nodes, W.ravel()


def quadrature(d: DomainSpec, order: int) -> QuadratureRule:
    """Quadrature over ``d``.

    Interval and rectangle rules are tensor Gauss-Legendre with ``order``
    points per axis (exact to degree ``2*order - 1`` per axis). The disk
    rule is exact for total degree ``2*order - 2``.
    """
    if order < 1:
        raise ValueError("quadrature order must be >= 1")
    if d.kind is Kind.DISK:
        nodes, weights = polar_rule(d.extents[0], order)
        return QuadratureRule(nodes, weights, 2 * order - 2)
    axes = [_gl_on(lo, hi, order) for lo, hi in d.bounding_box()]
    if len(axes) == 1:
        x, w = axes[0]
        return QuadratureRule(x[:, None], w, 2 * order - 1)
    (x, wx), (y, wy) = axes
    X, Y = np.meshgrid(x, y, indexing="ij")
    return QuadratureRule(np.column_stack([X.ravel(), Y.ravel()]), np.outer(wx, wy).ravel(), 2 * order - 1)
