"""Symmetric eigenvalues via cyclic Jacobi rotations.

Self-contained dense eigensolver for the desk-scale matrices used in game
classification and graph spectral checks (N <= 32). Eigenvalues only; the
rotations are accumulated directly on the working copy.
"""

from __future__ import annotations

import numpy as np

from .errors import EigenSolveError

SYMMETRY_TOL = 1e-9


def _off_diagonal_norm(a: np.ndarray) -> float:
    mask = ~np.eye(a.shape[0], dtype=bool)
    return float(np.sqrt(np.sum(a[mask] ** 2)))


def symmetric_eigenvalues(
    a: np.ndarray,
    tol: float = 1e-13,
    max_sweeps: int = 64,
) -> np.ndarray:
    """Eigenvalues of a symmetric matrix, ascending.

    Parameters
    ----------
    a : (n, n) array_like
        Symmetric real matrix. Asymmetry beyond ``SYMMETRY_TOL`` (max
        absolute entry difference) is rejected.
    tol : float
        Convergence threshold on the off-diagonal Frobenius norm, relative
        to the matrix Frobenius norm.
    max_sweeps : int
        Upper bound on full cyclic sweeps.

    Returns
    -------
    (n,) ndarray of eigenvalues sorted ascending.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > SYMMETRY_TOL:
        raise ValueError(
            f"matrix is not symmetric: max |A - A^T| entry = {asym:.3e}"
        )
    n = a.shape[0]
    if n == 1:
        return a.diagonal().copy()

    w = 0.5 * (a + a.T)
    scale = float(np.sqrt(np.sum(w**2)))
    if scale == 0.0:
        return np.zeros(n)

    for _ in range(max_sweeps):
        if _off_diagonal_norm(w) <= tol * scale:
            return np.sort(w.diagonal())
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = w[p, q]
                if abs(apq) <= 1e-300:
                    continue
                # Classic Jacobi rotation annihilating the (p, q) entry.
                theta = (w[q, q] - w[p, p]) / (2.0 * apq)
                if abs(theta) > 1e154:
                    # theta^2 would overflow; asymptotic tangent instead
                    t = 1.0 / (2.0 * theta)
                elif theta == 0.0:
                    t = 1.0
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp = w[p, :].copy()
                rq = w[q, :].copy()
                w[p, :] = c * rp - s * rq
                w[q, :] = s * rp + c * rq
                cp = w[:, p].copy()
                cq = w[:, q].copy()
                w[:, p] = c * cp - s * cq
                w[:, q] = s * cp + c * cq
                w[p, q] = 0.0
                w[q, p] = 0.0
    raise EigenSolveError(
        f"Jacobi sweep limit {max_sweeps} reached; off-diagonal norm "
        f"{_off_diagonal_norm(w):.3e} > {tol * scale:.3e}"
    )


def min_symmetric_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    return float(symmetric_eigenvalues(a)[0])


def max_symmetric_eigenvalue(a: np.ndarray) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    return float(symmetric_eigenvalues(a)[-1])
