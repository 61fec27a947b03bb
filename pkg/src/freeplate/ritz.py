"""Rayleigh-Ritz spectra of the free membrane and the free plate.

The trial space is the tensor Legendre basis on the domain's bounding box.
No boundary constraint is imposed on it: the free conditions are natural
for the forms

    a(u, v) = int grad u . grad v
    A(u, v) = int sum_jk u_{x_j x_k} v_{x_j x_k} + tau * a(u, v)

so the Ritz values approximate the free spectra from above.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .domains import DomainSpec, Kind, quadrature
from .eigensolver import FILTER_TOL, EigResult, solve_generalized
from .numerics import legendre_table

DEGREE_START = 8
DEGREE_STEP = 4
DEGREE_CAP = 28
ZERO_FLOOR = 1e-10
ZERO_MODE_REL = 1e-7

_CHUNK = 2048


class Operator(str, Enum):
    MEMBRANE = "membrane"
    PLATE = "plate"


class Method(str, Enum):
    RITZ = "ritz"
    EXACT = "exact"


class NotConverged(RuntimeError):
    """Degree cap reached; the best available spectrum is attached."""

    def __init__(self, message: str, spectrum: "Spectrum"):
        super().__init__(message)
        self.spectrum = spectrum


class RitzBasis:
    """Tensor Legendre polynomials of per-axis degree <= ``degree``.

    Each factor is ``sqrt((2k+1)/L) P_k`` mapped to an axis of length L,
    so on an interval or rectangle the basis is L2-orthonormal.
    """

    def __init__(self, domain: DomainSpec, degree: int):
        if degree < 1:
            raise ValueError("basis degree must be >= 1")
        self.domain = domain
        self.degree = degree
        self.box = domain.bounding_box()
        n = domain.dimension
        self.indices = np.array(list(itertools.product(range(degree + 1), repeat=n)), dtype=int)

    @property
    def size(self) -> int:
        return len(self.indices)

    def _axis_tables(self, x, axis):
        lo, hi = self.box[axis]
        L = hi - lo
        t = 2.0 * (np.asarray(x, dtype=float) - lo) / L - 1.0
        P, dP, d2P = legendre_table(self.degree, t)
        k = np.arange(self.degree + 1)
        scale = np.sqrt((2 * k + 1) / L)[:, None]
        J = 2.0 / L
        return scale * P, scale * J * dP, scale * J * J * d2P

    def evaluate(self, points):
        """Values, gradients and Hessians at ``points`` of shape (q, n).

        Returns arrays of shape (q, N), (q, N, n) and (q, N, n, n).
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        n = self.domain.dimension
        q, N = pts.shape[0], self.size
        if n == 1:
            P, dP, d2P = (t.T for t in self._axis_tables(pts[:, 0], 0))
            return P, dP[:, :, None], d2P[:, :, None, None]
        ix, iy = self.indices[:, 0], self.indices[:, 1]
        Px, dPx, d2Px = (t[ix].T for t in self._axis_tables(pts[:, 0], 0))
        Py, dPy, d2Py = (t[iy].T for t in self._axis_tables(pts[:, 1], 1))
        grad = np.empty((q, N, 2))
        grad[:, :, 0] = dPx * Py
        grad[:, :, 1] = Px * dPy
        hess = np.empty((q, N, 2, 2))
        hess[:, :, 0, 0] = d2Px * Py
        hess[:, :, 0, 1] = hess[:, :, 1, 0] = dPx * dPy
        hess[:, :, 1, 1] = Px * d2Py
        return Px * Py, grad, hess

    def combine(self, coeffs, points):
        """Evaluate linear combinations ``sum_i coeffs[i, c] phi_i`` at points."""
        val, grad, hess = self.evaluate(points)
        C = np.asarray(coeffs)
        return (
            val @ C,
            np.einsum("qij,ic->qcj", grad, C),
            np.einsum("qijk,ic->qcjk", hess, C),
        )


@dataclass(frozen=True)
class RitzSystem:
    basis: RitzBasis
    mass: np.ndarray
    grad_form: np.ndarray
    hess_form: np.ndarray

    def stiffness(self, operator: Operator, tau: float = 0.0) -> np.ndarray:
        if Operator(operator) is Operator.MEMBRANE:
            return self.grad_form
        return self.hess_form + tau * self.grad_form


@dataclass
class Spectrum:
    operator: Operator
    tau: float
    domain: DomainSpec
    values: np.ndarray
    method: Method
    degree_used: int = 0
    converged: bool = True
    last_refinement_delta: float = 0.0
    # Ritz only: eigenvector coefficients in ``basis``
    vectors: np.ndarray | None = field(default=None, repr=False)
    basis: RitzBasis | None = field(default=None, repr=False)

    def __post_init__(self):
        self.operator = Operator(self.operator)
        self.method = Method(self.method)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.values) < 0):
            raise ValueError("spectrum values must be ascending")

    def __len__(self):
        return len(self.values)

    def to_dict(self) -> dict:
        return {
            "operator": self.operator.value,
            "tau": float(self.tau),
            "domain": self.domain.to_dict(),
            "values": [float(v) for v in self.values],
            "method": self.method.value,
            "degree_used": int(self.degree_used),
            "converged": bool(self.converged),
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, d: dict) -> "Spectrum":
        return cls(
            operator=d["operator"],
            tau=d["tau"],
            domain=DomainSpec.from_dict(d["domain"]),
            values=d["values"],
            method=d["method"],
            degree_used=d.get("degree_used", 0),
            converged=d.get("converged", True),
        )


def assembly_order(domain: DomainSpec, degree: int) -> int:
    """Quadrature order integrating every product of two basis functions exactly."""
    if domain.kind is Kind.DISK:
        # polar rule is exact to total degree 2*order - 2; products reach 4*degree
        return 2 * degree + 1
    return degree + 2


def assemble(domain: DomainSpec, degree: int) -> RitzSystem:
    basis = RitzBasis(domain, degree)
    rule = quadrature(domain, assembly_order(domain, degree))
    N = basis.size
    mass = np.zeros((N, N))
    grad_form = np.zeros((N, N))
    hess_form = np.zeros((N, N))
    for start in range(0, len(rule.weights), _CHUNK):
        pts = rule.nodes[start : start + _CHUNK]
        w = rule.weights[start : start + _CHUNK]
        val, grad, hess = basis.evaluate(pts)
        mass += val.T @ (w[:, None] * val)
        n = domain.dimension
        for j in range(n):
            g = np.ascontiguousarray(grad[:, :, j])
            grad_form += g.T @ (w[:, None] * g)
            for k in range(j, n):
                h = np.ascontiguousarray(hess[:, :, j, k])
                hess_form += (1 if j == k else 2) * (h.T @ (w[:, None] * h))
    sym = lambda A: 0.5 * (A + A.T)
    return RitzSystem(basis, sym(mass), sym(grad_form), sym(hess_form))


def solve_system(system: RitzSystem, operator: Operator, tau: float = 0.0,
                 filter_tol: float = FILTER_TOL) -> EigResult:
    return solve_generalized(system.stiffness(operator, tau), system.mass, filter_tol)


def _check_tau(operator: Operator, tau: float) -> float:
    tau = float(tau)
    if not math.isfinite(tau) or tau < 0:
        raise ValueError(f"tau must be a finite nonnegative number, got {tau}")
    return tau if operator is Operator.PLATE else 0.0


def ritz_spectrum(domain: DomainSpec, operator: Operator, tau: float, count: int,
                  degree: int, filter_tol: float = FILTER_TOL) -> Spectrum:
    """Ritz values at one fixed basis degree (no refinement)."""
    operator = Operator(operator)
    tau = _check_tau(operator, tau)
    result = solve_system(assemble(domain, degree), operator, tau, filter_tol)
    basis = RitzBasis(domain, degree)
    if len(result.values) < count:
        raise ValueError(f"basis of degree {degree} yields only {len(result.values)} values")
    return Spectrum(operator, tau, domain, result.values[:count], Method.RITZ, degree,
                    vectors=result.vectors[:, :count], basis=basis)


def compute_spectrum(domain: DomainSpec, operator: Operator, tau: float = 0.0, count: int = 6,
                     target_rel_tol: float = 1e-8, *, degrees=None, strict: bool = True,
                     filter_tol: float = FILTER_TOL) -> Spectrum:
    """Ritz spectrum refined over increasing basis degree until stable.

    Refinement stops once each of the first ``count`` values moves by at
    most ``target_rel_tol`` relative to itself (``ZERO_FLOOR`` absolute for
    zero modes). If the degree cap is reached first, ``NotConverged`` is
    raised carrying the last spectrum, unless ``strict`` is False.
    """
    operator = Operator(operator)
    tau = _check_tau(operator, tau)
    if count < 1:
        raise ValueError("count must be >= 1")
    if degrees is None:
        degrees = range(DEGREE_START, DEGREE_CAP + 1, DEGREE_STEP)
    prev = None
    spec = None
    for degree in degrees:
        if (degree + 1) ** domain.dimension < count:
            continue
        spec = ritz_spectrum(domain, operator, tau, count, degree, filter_tol)
        if prev is not None:
            delta = np.abs(spec.values - prev)
            allowed = np.maximum(target_rel_tol * np.abs(spec.values), ZERO_FLOOR)
            spec.last_refinement_delta = float(np.max(delta / np.maximum(np.abs(spec.values), ZERO_FLOOR)))
            if np.all(delta <= allowed):
                spec.converged = True
                return spec
        spec.converged = False
        prev = spec.values
    if spec is None:
        raise ValueError(f"no degree in the schedule gives {count} values")
    if strict:
        raise NotConverged(
            f"{operator.value} spectrum on {domain.kind.value} not converged at degree "
            f"{spec.degree_used} (last relative change {spec.last_refinement_delta:.2e})",
            spec,
        )
    return spec


def zero_mode_count(s: Spectrum, threshold_rel: float = ZERO_MODE_REL) -> int:
    """Number of leading values at or below ``threshold_rel * max(1, values[-1])``."""
    cut = threshold_rel * max(1.0, float(s.values[-1]))
    return int(np.count_nonzero(np.cumprod(s.values <= cut)))


def with_values(s: Spectrum, values) -> Spectrum:
    return replace(s, values=np.asarray(values, dtype=float))
