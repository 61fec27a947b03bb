"""Frequency-space test of the Fourier trial-function argument on Ritz modes.

For orthonormal eigenfunctions phi_1..phi_m the trial family

    rho(z, y) = exp(i y.z) - sum_j phi_j(y) c_j(z),   c_j(z) = int phi_j(x) exp(i x.z) dx

gives, after integrating over the frequency ball B_r,

    D = omega_n |Omega| r^n - sum_j int_{B_r} |c_j|^2
    N = n omega_n |Omega| (r^(n+4)/(n+4) + tau r^(n+2)/(n+2)) - sum_j lam_j int_{B_r} |c_j|^2

and lam_{m+1} <= N / D for every r above the threshold radius. This module
evaluates those quantities by quadrature in x and in z, both through the
closed forms above and by integrating |rho|^2 and its derivatives directly.

``phi_hat`` uses the unitary normalization ``c_j / (2 pi)^(n/2)``, so
``int |phi_hat_j|^2`` over all of R^n equals 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import BoundInput, F_ratio, threshold_radius
from .domains import DomainSpec, Kind, QuadratureRule, _gl_on, polar_rule, quadrature, unit_ball_volume
from .ritz import Operator, Spectrum

RADIAL_ORDER = 24
ANGULAR_NODES = 49
R_GRID_LO = 1.05
R_GRID_HI = 6.0
INEQ_RTOL = 1e-4
PLANCHEREL_SLACK = 1e-6

_Z_CHUNK = 512


class ThresholdViolation(ValueError):
    """A grid radius at or below the threshold radius r0."""


def _extent_scale(domain: DomainSpec) -> float:
    """Largest |y| over the domain, which bounds the bandwidth of exp(i y.z)."""
    if domain.kind is Kind.DISK:
        return domain.extents[0]
    return math.sqrt(sum(e * e for e in domain.extents))


class FourierField:
    """Fourier transforms of the eigenfunctions carried by a Ritz spectrum.

    Parameters
    ----------
    spectrum : Spectrum
        Ritz spectrum with eigenvectors attached.
    r_max : float, optional
        Largest frequency radius the x-quadrature is built to resolve.
        Defaults to six times the threshold radius for ``m = count - 1``.
    radial_order, angular_nodes : int
        Minimum sizes of the polar rule on B_r; both grow with r.
    """

    def __init__(self, spectrum: Spectrum, r_max: float | None = None,
                 radial_order: int = RADIAL_ORDER, angular_nodes: int = ANGULAR_NODES):
        if spectrum.vectors is None or spectrum.basis is None:
            raise ValueError("spectrum carries no eigenvectors; use a Ritz spectrum")
        self.spectrum = spectrum
        self.domain = spectrum.domain
        self.n = self.domain.dimension
        self.volume = self.domain.volume()
        self.omega = unit_ball_volume(self.n)
        if r_max is None:
            r_max = R_GRID_HI * threshold_radius(BoundInput(self.n, self.volume, 0.0, max(1, len(spectrum) - 1)))
        self.r_max = float(r_max)
        self.radial_order = radial_order
        self.angular_nodes = angular_nodes
        self.y_rule = self._y_rule()
        val, grad, hess = spectrum.basis.combine(spectrum.vectors, self.y_rule.nodes)
        self.phi, self.dphi, self.d2phi = val, grad, hess
        self._mass_cache: dict[float, np.ndarray] = {}

    @property
    def count(self) -> int:
        return self.phi.shape[1]

    @property
    def values(self) -> np.ndarray:
        return self.spectrum.values

    def _y_rule(self) -> QuadratureRule:
        degree = self.spectrum.basis.degree
        d = self.domain
        if d.kind is Kind.DISK:
            R = d.extents[0]
            order = degree + 2 + math.ceil(self.r_max * R / 2) + 16
            nodes, weights = polar_rule(R, order, 2 * (2 * degree + math.ceil(self.r_max * R)) + 33)
            return QuadratureRule(nodes, weights, 2 * order - 2)
        half = 0.5 * max(d.extents)
        return quadrature(d, degree + 2 + math.ceil(self.r_max * half) + 16)

    def _separable(self) -> bool:
        return self.domain.kind is not Kind.DISK

    def transform(self, z) -> np.ndarray:
        """c_j(z) = int phi_j(x) exp(i x.z) dx, shape (len(z), count)."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        if z.shape[1] != self.n:
            z = z.reshape(-1, self.n)
        wphi = self.y_rule.weights[:, None] * self.phi
        out = np.empty((z.shape[0], self.count), dtype=complex)
        if self._separable() and self.n == 2:
            x1 = np.unique(self.y_rule.nodes[:, 0])
            x2 = np.unique(self.y_rule.nodes[:, 1])
            # nodes are a meshgrid in "ij" order
            # (count, b, a) so that E2 @ W contracts the second axis by BLAS
            W = wphi.reshape(len(x1), len(x2), self.count).transpose(2, 1, 0).astype(complex)
            for s in range(0, len(z), _Z_CHUNK):
                zz = z[s : s + _Z_CHUNK]
                E1 = np.exp(1j * np.outer(zz[:, 0], x1))
                E2 = np.exp(1j * np.outer(zz[:, 1], x2))
                T = E2 @ W
                out[s : s + _Z_CHUNK] = np.sum(E1[None] * T, axis=2).T
            return out
        for s in range(0, len(z), _Z_CHUNK):
            E = np.exp(1j * (z[s : s + _Z_CHUNK] @ self.y_rule.nodes.T))
            out[s : s + _Z_CHUNK] = E @ wphi
        return out

    def phi_hat(self, z) -> np.ndarray:
        return self.transform(z) / (2 * np.pi) ** (self.n / 2)

    def z_rule(self, r: float) -> tuple[np.ndarray, np.ndarray]:
        """Quadrature nodes (q, n) and weights on the frequency ball B_r."""
        if not 0 < r <= self.r_max * (1 + 1e-12):
            raise ValueError(f"radius {r} outside (0, {self.r_max}] resolved by this field")
        ext = _extent_scale(self.domain)
        radial = self.radial_order + math.ceil(r * ext)
        if self.n == 1:
            x, w = _gl_on(-r, r, 2 * radial)
            return x[:, None], w
        angles = max(self.angular_nodes, 2 * math.ceil(r * ext) + 25)
        return polar_rule(r, radial, angles)

    def masses(self, r: float) -> np.ndarray:
        """int_{B_r} |phi_hat_j|^2 for every mode j."""
        key = float(r)
        if key not in self._mass_cache:
            nodes, weights = self.z_rule(key)
            c = self.transform(nodes)
            self._mass_cache[key] = weights @ np.abs(c) ** 2 / (2 * np.pi) ** self.n
        return self._mass_cache[key]


def plancherel_mass(f: FourierField, j: int, r: float) -> float:
    if not 0 <= j < f.count:
        raise IndexError(f"mode {j} not in field of {f.count} modes")
    return float(f.masses(r)[j])


def ball_energy(f: FourierField, r: float, tau: float) -> float:
    """n omega_n |Omega| (r^(n+4)/(n+4) + tau r^(n+2)/(n+2))."""
    n = f.n
    return n * f.omega * f.volume * (r ** (n + 4) / (n + 4) + tau * r ** (n + 2) / (n + 2))


def proof_denominator(f: FourierField, m: int, r: float) -> float:
    base = f.omega * f.volume * r**f.n
    if m == 0:
        return base
    return base - (2 * np.pi) ** f.n * float(np.sum(f.masses(r)[:m]))


def proof_numerator(f: FourierField, m: int, r: float) -> float:
    if f.spectrum.operator is not Operator.PLATE:
        raise ValueError("the numerator is defined for plate spectra")
    top = ball_energy(f, r, f.spectrum.tau)
    if m == 0:
        return top
    lam = f.values[:m]
    return top - (2 * np.pi) ** f.n * float(lam @ f.masses(r)[:m])


def j1_quadrature(f: FourierField, r: float, tau: float) -> float:
    """int_{B_r} int_Omega (|z|^4 + tau |z|^2) dy dz by the two quadratures."""
    nodes, weights = f.z_rule(r)
    z2 = np.sum(nodes**2, axis=1)
    return float(weights @ (z2**2 + tau * z2)) * float(np.sum(f.y_rule.weights))


def expansion_terms(f: FourierField, m: int, r: float) -> dict[str, float]:
    """D and N split as I1 + I2 + I3 and J1 + J2 + J3 by integrating rho directly.

    Every term is evaluated from exp(i y.z), the eigenfunctions and their
    derivatives on the quadrature grids; the eigenvalues are never used.
    """
    tau = f.spectrum.tau
    n = f.n
    nodes, weights = f.z_rule(r)
    wy = f.y_rule.weights
    Y = f.y_rule.nodes
    phi = f.phi[:, :m]
    dphi = f.dphi[:, :m]
    d2phi = f.d2phi[:, :m]
    terms = dict.fromkeys(("I1", "I2", "I3", "J1", "J2", "J3"), 0.0)
    for s in range(0, len(weights), _Z_CHUNK // 4):
        z = nodes[s : s + _Z_CHUNK // 4]
        wz = weights[s : s + _Z_CHUNK // 4]
        E = np.exp(1j * (z @ Y.T))
        c = (E * wy) @ phi
        proj = c @ phi.T
        iz = lambda a: wz @ (np.abs(a) ** 2 @ wy)
        cross = lambda a, b: float(np.real(wz @ ((a * np.conj(b)) @ wy)))
        terms["I1"] += iz(E)
        terms["I2"] -= 2 * cross(E, proj)
        terms["I3"] += iz(proj)
        for j in range(n):
            hj = 1j * z[:, j : j + 1] * E
            pj = c @ dphi[:, :, j].T
            terms["J1"] += tau * iz(hj)
            terms["J2"] -= 2 * tau * cross(hj, pj)
            terms["J3"] += tau * iz(pj)
            for k in range(n):
                hjk = -(z[:, j : j + 1] * z[:, k : k + 1]) * E
                pjk = c @ d2phi[:, :, j, k].T
                terms["J1"] += iz(hjk)
                terms["J2"] -= 2 * cross(hjk, pjk)
                terms["J3"] += iz(pjk)
    terms = {k: float(v) for k, v in terms.items()}
    terms["D"] = terms["I1"] + terms["I2"] + terms["I3"]
    terms["N"] = terms["J1"] + terms["J2"] + terms["J3"]
    return terms


def default_r_grid(f: FourierField, m: int, points: int = 20,
                   lo: float = R_GRID_LO, hi: float = R_GRID_HI) -> np.ndarray:
    """Geometric grid from lo * r0 to hi * r0 (r0 of m, or of m = 1 when m = 0)."""
    r0 = threshold_radius(BoundInput(f.n, f.volume, 0.0, max(m, 1)))
    return np.geomspace(lo * r0, min(hi * r0, f.r_max), points)


@dataclass
class InequalityReport:
    m: int
    lambda_next: float
    rows: list[dict] = field(default_factory=list)

    @property
    def min_ratio(self) -> float:
        return min(row["ratio"] for row in self.rows)

    @property
    def best_r(self) -> float:
        return min(self.rows, key=lambda row: row["ratio"])["r"]

    @property
    def min_margin(self) -> float:
        return min(row["margin"] for row in self.rows)

    @property
    def passed(self) -> bool:
        return all(row["ok"] for row in self.rows)


def master_inequality_check(f: FourierField, m: int, r_grid=None,
                            rtol: float = INEQ_RTOL) -> InequalityReport:
    """Check lam_{m+1} <= N(r)/D(r) on a grid of radii above the threshold."""
    if f.spectrum.operator is not Operator.PLATE:
        raise ValueError("the inequality concerns plate spectra")
    if m + 1 > f.count:
        raise ValueError(f"need at least {m + 1} modes, field has {f.count}")
    if r_grid is None:
        r_grid = default_r_grid(f, m)
    r0 = threshold_radius(BoundInput(f.n, f.volume, 0.0, m)) if m > 0 else 0.0
    lam_next = float(f.values[m])
    tol = rtol * max(1.0, lam_next)
    report = InequalityReport(m, lam_next)
    for r in r_grid:
        if not r > r0:
            raise ThresholdViolation(f"grid radius {r} is not above the threshold {r0}")
        N = proof_numerator(f, m, r)
        D = proof_denominator(f, m, r)
        ratio = N / D
        margin = ratio - lam_next
        report.rows.append({"m": m, "r": float(r), "N": N, "D": D, "ratio": ratio,
                            "lambda_next": lam_next, "margin": margin,
                            "ok": D > 0 and margin >= -tol})
    return report


def F_at(f: FourierField, m: int, r: float) -> float:
    """The bound-module F at the same (n, |Omega|, tau, m, r)."""
    return F_ratio(BoundInput(f.n, f.volume, f.spectrum.tau, m), r)


REPORT_COLUMNS = ("m", "r", "N", "D", "ratio", "lambda_next", "margin")


def write_report_csv(reports, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(REPORT_COLUMNS)
    for rep in reports:
        for row in rep.rows:
            w.writerow([row["m"], *(f"{row[k]:.11e}" for k in REPORT_COLUMNS[1:])])
