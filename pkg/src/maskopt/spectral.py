"""Dense symmetric eigen-machinery: cyclic Jacobi, pseudo-inverse, pseudo-determinant."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import AllZeroSpectrum, InvalidArgument

JACOBI_TOL = 1e-12
ZERO_CUTOFF = 1e-9
MAX_SWEEPS = 100


class EigenDecomposition(NamedTuple):
    """Eigenvalues sorted descending; column ``k`` of ``eigenvectors`` pairs with ``eigenvalues[k]``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def sym_matrix(a) -> np.ndarray:
    """Return a float copy of ``a`` with the upper triangle mirrored onto the lower one.

    The result is exactly symmetric regardless of round-off in the input.
    """
    a = np.array(a, dtype=float, ndmin=2)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgument(f"expected a square matrix, got shape {a.shape}")
    upper = np.triu(a)
    return upper + np.triu(a, 1).T


def symmetric_eigen(m, tol: float = JACOBI_TOL) -> EigenDecomposition:
    """Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps over every off-diagonal pair ``(p, q)`` in row order until the largest
    off-diagonal magnitude drops below ``tol * max(max|diag|, 1)``.
    """
    a = sym_matrix(m)
    n = a.shape[0]
    v = np.eye(n)
    for _ in range(MAX_SWEEPS):
        off = np.abs(a - np.diag(np.diag(a)))
        scale = max(float(np.max(np.abs(np.diag(a)), initial=0.0)), 1.0)
        if n < 2 or off.max() < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if abs(theta) > 1e150:
                    t = 0.5 / abs(theta)
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                app, aqq = a[p, p], a[q, q]
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                new_p = c * col_p - s * col_q
                new_q = s * col_p + c * col_q
                a[:, p] = a[p, :] = new_p
                a[:, q] = a[q, :] = new_q
                # diagonal via t keeps round-off out of the eigenvalues
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = a[q, p] = 0.0
                vp, vq = v[:, p].copy(), v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return EigenDecomposition(values[order], v[:, order])


def zero_cutoff(eigenvalues: np.ndarray) -> float:
    """Threshold below which an eigenvalue counts as structurally zero."""
    lam_max = float(np.max(eigenvalues, initial=0.0))
    return ZERO_CUTOFF * max(1.0, lam_max)


def nonzero_eigenvalues(m) -> np.ndarray:
    vals = symmetric_eigen(m).eigenvalues
    return vals[vals > zero_cutoff(vals)]


def smallest_nonzero_eigenvalue(m) -> float:
    vals = nonzero_eigenvalues(m)
    if vals.size == 0:
        raise AllZeroSpectrum("every eigenvalue is below the zero cutoff")
    return float(vals[-1])


def pseudo_inverse(m) -> np.ndarray:
    """Invert the eigenvalues above the cutoff, zero the rest, recompose."""
    vals, vecs = symmetric_eigen(m)
    keep = vals > zero_cutoff(vals)
    inv = np.zeros_like(vals)
    inv[keep] = 1.0 / vals[keep]
    return sym_matrix((vecs * inv) @ vecs.T)


def pseudo_determinant(m) -> float:
    """Product of the eigenvalues above the cutoff; 1.0 for the zero matrix (empty product)."""
    return float(np.prod(nonzero_eigenvalues(m)))
