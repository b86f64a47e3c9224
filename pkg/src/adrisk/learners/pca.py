"""PCA by power iteration with deflation, for class-separability plots."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ._common import make_rng


@dataclass
class PCAResult:
    components: np.ndarray  # (k, dim), orthonormal rows
    coords: np.ndarray  # (n, k)
    explained_variance: np.ndarray  # (k,), non-increasing
    mean: np.ndarray  # (dim,)


def pca_project(
    X: np.ndarray,
    k: int = 2,
    tol: float = 1e-7,
    max_iters: int = 1000,
    seed: int = 0,
) -> PCAResult:
    """Top-k principal components of the centered data.

    Power iteration runs on the covariance operator (applied as two
    mat-vecs, never materializing dim x dim), deflating by previously
    found components.  If the data rank is below k, the components found
    so far are returned with a warning.
    """
    X = np.asarray(X, dtype=np.float64)
    n, dim = X.shape
    if n < 2:
        raise ValueError("need at least 2 rows")
    mean = X.mean(axis=0)
    Xc = X - mean
    denom = n - 1

    rng = make_rng(seed)
    components: list[np.ndarray] = []
    eigenvalues: list[float] = []

    def apply_deflated(v: np.ndarray) -> np.ndarray:
        Av = Xc.T @ (Xc @ v) / denom
        for u, lu in zip(components, eigenvalues):
            Av -= lu * (u @ v) * u
        return Av

    for comp_idx in range(min(k, dim)):
        v = rng.standard_normal(dim)
        v /= np.linalg.norm(v)
        for _ in range(max_iters):
            Av = apply_deflated(v)
            lam = float(v @ Av)
            # Eigenpair residual test; linear in the angle error, unlike
            # the per-step change, which stalls near small spectral gaps.
            if np.linalg.norm(Av - lam * v) <= tol * max(abs(lam), 1e-30):
                break
            norm = np.linalg.norm(Av)
            if norm < 1e-15:
                break
            v_new = Av / norm
            # Re-orthogonalize against found components to stop drift.
            for u in components:
                v_new -= (u @ v_new) * u
            nn = np.linalg.norm(v_new)
            if nn < 1e-15:
                break
            v = v_new / nn
        lam = float(v @ apply_deflated(v))
        top = eigenvalues[0] if eigenvalues else lam
        if lam <= max(1e-12, 1e-9 * abs(top)):
            warnings.warn(
                f"data rank {comp_idx} is below requested k={k}; returning fewer components"
            )
            break
        # Deterministic sign: largest-magnitude coordinate is positive.
        pivot = int(np.argmax(np.abs(v)))
        if v[pivot] < 0:
            v = -v
        components.append(v)
        eigenvalues.append(lam)

    comps = np.asarray(components).reshape(len(components), dim)
    coords = Xc @ comps.T if len(components) else np.empty((n, 0))
    return PCAResult(
        components=comps,
        coords=coords,
        explained_variance=np.asarray(eigenvalues),
        mean=mean,
    )
