"""Complex SVD helpers: truncation, nuclear norm, singular-value thresholding."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SvdFactors:
    """Thin SVD with a deterministic sign convention.

    Columns of U and V are orthonormal, singular values are descending and
    non-negative, and each left vector is rotated so its largest-magnitude
    entry is positive real (the matching right vector is counter-rotated),
    which makes factor comparisons reproducible.
    """

    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    def reconstruct(self, k: int | None = None) -> np.ndarray:
        """U_k diag(s_k) V_k^H; full reconstruction when k is None."""
        if k is None:
            k = self.singular_values.shape[0]
        return (self.U[:, :k] * self.singular_values[:k]) @ self.V[:, :k].conj().T


def _check_finite(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN/Inf entries")
    return m


def svd(m: np.ndarray) -> SvdFactors:
    """Thin SVD of a real or complex matrix (LAPACK route)."""
    m = _check_finite(m)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    v = vh.conj().T
    for i in range(s.shape[0]):
        j = int(np.argmax(np.abs(u[:, i])))
        pivot = u[j, i]
        mag = abs(pivot)
        if mag > 0.0:
            phase = pivot / mag
            u[:, i] = u[:, i] / phase
            v[:, i] = v[:, i] / phase
    return SvdFactors(U=u, singular_values=s, V=v)


def rank_k_approx(m: np.ndarray, k: int) -> np.ndarray:
    """Best Frobenius-norm rank-k approximation via truncated SVD."""
    m = _check_finite(m)
    if not 1 <= k <= min(m.shape):
        raise ValueError(f"k must lie in [1, {min(m.shape)}], got {k}")
    return svd(m).reconstruct(k)


def nuclear_norm(m: np.ndarray) -> float:
    """Sum of singular values (convex envelope of the rank)."""
    m = _check_finite(m)
    return float(np.linalg.svd(m, compute_uv=False).sum())


def svt(m: np.ndarray, threshold: float) -> np.ndarray:
    """Singular-value soft thresholding U diag(max(s - threshold, 0)) V^H.

    This is the proximity operator of threshold * nuclear_norm, the
    workhorse of the nuclear-norm ADMM solver.
    """
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    m = _check_finite(m)
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    shrunk = np.maximum(s - threshold, 0.0)
    return (u * shrunk) @ vh
