"""Dense symmetric-definite generalized eigenproblems ``K v = lam M v``.

Rows of K that vanish identically are split off as exact zero modes. The
mass matrix on the complement is diagonalized and directions whose mass
eigenvalue falls below ``filter_tol * max`` are dropped before whitening,
so a nearly dependent basis (the box Legendre basis restricted to a disk)
still yields a well-posed Ritz problem on the retained subspace.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

FILTER_TOL = 1e-12
JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100


class MassNotPSD(ValueError):
    pass


class EmptySubspace(ValueError):
    pass


class NoConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class ConditionReport:
    min_retained_mass: float
    max_mass: float
    n_filtered: int


@dataclass(frozen=True)
class EigResult:
    values: np.ndarray
    vectors: np.ndarray
    condition_report: ConditionReport


def symmetrize(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return 0.5 * (A + A.T)


def jacobi_eigh(A, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi diagonalization of a symmetric matrix.

    Rotations sweep the upper triangle row by row in a fixed order, so the
    result is reproducible bit for bit. Stops when the off-diagonal
    Frobenius norm drops below ``tol`` times the diagonal norm.

    Returns ascending eigenvalues and the matching orthonormal columns.
    """
    A = symmetrize(A).copy()
    n = A.shape[0]
    V = np.eye(n)
    for _ in range(max_sweeps):
        d = np.diag(A)
        off = np.linalg.norm(A - np.diag(d))
        diag = np.linalg.norm(d)
        if off <= tol * diag or off == 0.0:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if apq == 0.0:
                    continue
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    # theta^2 would overflow; t -> 1/(2 theta)
                    t = 0.5 / theta
                elif theta != 0:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                else:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                Ap = A[:, p].copy()
                Aq = A[:, q].copy()
                A[:, p] = c * Ap - s * Aq
                A[:, q] = s * Ap + c * Aq
                Ap = A[p, :].copy()
                Aq = A[q, :].copy()
                A[p, :] = c * Ap - s * Aq
                A[q, :] = s * Ap + c * Aq
                A[p, q] = A[q, p] = 0.0
                Vp = V[:, p].copy()
                V[:, p] = c * Vp - s * V[:, q]
                V[:, q] = s * Vp + c * V[:, q]
    else:
        raise NoConvergence(f"Jacobi did not converge in {max_sweeps} sweeps")
    w = np.diag(A).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _eigh(A, method: str):
    if method == "jacobi":
        return jacobi_eigh(A)
    if method == "lapack":
        return np.linalg.eigh(A)
    raise ValueError(f"unknown method {method!r}")


def _mass_orthonormal(M):
    # columns Q with Q.T M Q = I for a positive definite M
    s, U = np.linalg.eigh(M)
    if np.min(s) <= 0:
        raise MassNotPSD("mass restricted to the stiffness null space is not positive definite")
    return U / np.sqrt(s)


def _lowest_pairs(K, S, method):
    """Eigenpairs of ``K y = lam diag(S) y`` with S given as a 1D positive array."""
    if method == "lapack":
        # shift-invert form: S y = mu K y, lam = 1/mu. Keeps the small
        # eigenvalues relatively accurate when ||K|| is huge.
        try:
            mu, Y = linalg.eigh(np.diag(S), K)
        except linalg.LinAlgError:
            pass
        else:
            if np.all(mu > 0):
                return 1.0 / mu[::-1], Y[:, ::-1] / np.sqrt(mu[::-1])
    B = 1.0 / np.sqrt(S)
    w, Y = _eigh(B[:, None] * K * B[None, :], method)
    return w, B[:, None] * Y


def _lowest_pairs_full(K, S, method):
    if method == "lapack":
        try:
            mu, Y = linalg.eigh(S, K)
        except linalg.LinAlgError:
            pass
        else:
            if np.all(mu > 0):
                return 1.0 / mu[::-1], Y[:, ::-1] / np.sqrt(mu[::-1])
    s, U = _eigh(S, method)
    w, Y = _lowest_pairs(symmetrize(U.T @ K @ U), s, method)
    return w, U @ Y


def solve_generalized(K, M, filter_tol: float = FILTER_TOL, method: str = "lapack") -> EigResult:
    """Solve ``K v = lam M v`` on the numerically nondegenerate part of ``M``.

    Basis directions whose rows of ``K`` are identically zero (constants,
    and affine functions for the plate without tension) are split off
    exactly: they carry eigenvalue 0 and the rest of the problem lives on
    their M-orthogonal complement. That complement's mass is then
    diagonalized, directions below ``filter_tol * max`` dropped, and the
    remaining whitened problem diagonalized.

    Parameters
    ----------
    K, M : array_like
        Symmetric matrices of equal size; ``M`` positive semidefinite.
    filter_tol : float
        Relative cutoff on mass eigenvalues.
    method : {"lapack", "jacobi"}
        ``"jacobi"`` uses the cyclic rotation method throughout and is only
        practical for a few hundred unknowns.

    Returns
    -------
    EigResult
        Ascending values and M-orthonormal eigenvectors in the original basis.
    """
    K = symmetrize(K)
    M = symmetrize(M)
    if K.shape != M.shape:
        raise ValueError(f"K {K.shape} and M {M.shape} differ in shape")
    null = np.all(K == 0.0, axis=1)
    rest = ~null
    N = K.shape[0]

    Q0 = _mass_orthonormal(M[np.ix_(null, null)]) if np.any(null) else np.zeros((0, 0))
    if np.any(null):
        X = np.linalg.solve(M[np.ix_(null, null)], M[np.ix_(null, rest)])
        S = M[np.ix_(rest, rest)] - M[np.ix_(null, rest)].T @ X
    else:
        X = np.zeros((0, int(rest.sum())))
        S = M
    S = 0.5 * (S + S.T)

    values = [np.zeros(Q0.shape[1])]
    V0 = np.zeros((N, Q0.shape[1]))
    V0[np.ix_(null, np.arange(Q0.shape[1]))] = Q0
    vectors = [V0]
    smax = float(np.max(np.diag(M)))
    smin_kept = np.inf
    n_filtered = 0
    if np.any(rest):
        s, U = _eigh(S, method)
        smax = max(smax, float(np.max(s)))
        if np.min(s) < -filter_tol * smax:
            raise MassNotPSD(f"mass eigenvalue {np.min(s):.3e} below -{filter_tol:g} * {smax:.3e}")
        keep = s > filter_tol * smax
        n_filtered = int(np.count_nonzero(~keep))
        if np.all(keep):
            # no rotation: the basis ordering keeps K graded, which the
            # shift-invert solve needs for relative accuracy
            w, V2 = _lowest_pairs_full(K[np.ix_(rest, rest)], S, method)
        elif np.any(keep):
            Uk = U[:, keep]
            Kk = symmetrize(Uk.T @ K[np.ix_(rest, rest)] @ Uk)
            w, Y = _lowest_pairs(Kk, s[keep], method)
            V2 = Uk @ Y
        if np.any(keep):
            V = np.zeros((N, len(w)))
            V[rest] = V2
            V[null] = -X @ V2
            values.append(w)
            vectors.append(V)
            smin_kept = float(np.min(s[keep]))
    if not Q0.size and len(values) == 1:
        raise EmptySubspace("every basis direction was filtered")
    w = np.concatenate(values)
    V = np.hstack(vectors)
    order = np.argsort(w, kind="stable")
    return EigResult(w[order], V[:, order], ConditionReport(smin_kept, smax, n_filtered))
