"""Helpers for small dense Hermitian / real-symmetric matrices.

Everything here works on matrices of dimension a handful at most, so all
routines go through full eigendecompositions; numerical cleverness would
buy nothing.
"""

from __future__ import annotations

import numpy as np


def hermitian_part(a: np.ndarray) -> np.ndarray:
    """Project onto the Hermitian part, (A + A*)/2."""
    a = np.asarray(a, dtype=complex)
    return 0.5 * (a + a.conj().T)


def symmetric_part(a: np.ndarray) -> np.ndarray:
    """Project a real matrix onto its symmetric part."""
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


def min_eigenvalue(a: np.ndarray) -> float:
    """Smallest eigenvalue of the Hermitian part of ``a``."""
    return float(np.linalg.eigvalsh(hermitian_part(a))[0])


def psd_power(a: np.ndarray, exponent: float, clip: float = 0.0) -> np.ndarray:
    """Real symmetric matrix power via eigendecomposition.

    Eigenvalues below ``clip`` are clipped to ``clip`` before raising
    them to ``exponent``; callers must not pass a negative exponent
    together with a singular matrix.
    """
    w, u = np.linalg.eigh(symmetric_part(a))
    w = np.maximum(w, clip)
    return symmetric_part((u * w**exponent) @ u.T)


def psd_sqrt(a: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root with eigenvalues clipped at zero."""
    return psd_power(a, 0.5)


def psd_inv_sqrt(a: np.ndarray) -> np.ndarray:
    """Inverse symmetric square root of a positive-definite matrix."""
    return psd_power(a, -0.5)


def psd_pinv(a: np.ndarray, rank_tol: float = 1e-10) -> np.ndarray:
    """Moore-Penrose inverse of a real symmetric PSD matrix.

    Eigenvalues below ``rank_tol`` are zeroed rather than inverted.
    """
    w, u = np.linalg.eigh(symmetric_part(a))
    inv = np.where(w < rank_tol, 0.0, np.divide(1.0, np.where(w < rank_tol, 1.0, w)))
    return symmetric_part((u * inv) @ u.T)


def eigh_descending(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenpairs of a real symmetric matrix, eigenvalues descending.

    Each eigenvector's sign is fixed so that its largest-magnitude
    component is positive (ties resolved toward the first such entry),
    which makes degenerate decompositions reproducible.
    """
    w, u = np.linalg.eigh(symmetric_part(a))
    order = np.argsort(w)[::-1]
    w = w[order]
    u = u[:, order]
    for j in range(u.shape[1]):
        k = int(np.argmax(np.abs(u[:, j])))
        if u[k, j] < 0:
            u[:, j] = -u[:, j]
    return w, u
