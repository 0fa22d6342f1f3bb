"""Dimension reduction front-end: PCA and two-mode multilinear PCA for image stacks.

Eigenvector signs are fixed so the largest-magnitude entry of each vector
is positive; fits are therefore reproducible given the input order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import constants as C


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so that each column's largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def _top_eigvecs(sym: np.ndarray, r: int) -> np.ndarray:
    vals, vecs = np.linalg.eigh(sym)
    return fix_signs(vecs[:, ::-1][:, :r])


@dataclass
class MpcaModel:
    """Row-mode basis ``left`` (d1 x r1), column-mode basis ``right`` (d2 x r2), and mean image.

    Both bases have orthonormal columns. ``errors`` holds the mean squared
    reconstruction error after each fitting sweep.
    """

    left: np.ndarray
    right: np.ndarray
    mean_image: np.ndarray
    errors: list[float] = field(default_factory=list)

    def __post_init__(self):
        d1, d2 = self.mean_image.shape
        if self.left.shape[0] != d1 or self.right.shape[0] != d2:
            raise ValueError("factor shapes do not match the mean image")
        if self.left.shape[1] > d1 or self.right.shape[1] > d2:
            raise ValueError("rank exceeds dimension")

    @property
    def ranks(self) -> tuple[int, int]:
        return self.left.shape[1], self.right.shape[1]


def _check_stack(images) -> np.ndarray:
    a = np.asarray(images, dtype=float)
    if a.ndim != 3:
        raise ValueError("images must be a stack of shape (n, d1, d2)")
    if not np.all(np.isfinite(a)):
        raise ValueError("images contain non-finite values")
    return a


def _recon_error(centred: np.ndarray, left: np.ndarray, right: np.ndarray) -> float:
    core = np.einsum("ai,nab,bj->nij", left, centred, right)
    back = np.einsum("ai,nij,bj->nab", left, core, right)
    return float(np.mean(np.sum((centred - back) ** 2, axis=(1, 2))))


def mpca_fit(images, r1: int, r2: int, n_sweeps: int = C.MPCA_SWEEPS, tol: float = C.MPCA_TOL) -> MpcaModel:
    """Alternating mode-wise eigendecomposition.

    Starts the column basis at the top eigenvectors of the unprojected
    column-mode covariance, then alternates: with the right basis fixed, take the top ``r1``
    eigenvectors of the row-mode covariance of the right-projected images,
    and symmetrically for the columns. Stops after ``n_sweeps`` or when
    the error improves by less than ``tol``.
    """
    a = _check_stack(images)
    n, d1, d2 = a.shape
    if n < 2:
        raise ValueError("need at least two images")
    if not (1 <= r1 <= d1 and 1 <= r2 <= d2):
        raise ValueError(f"ranks ({r1}, {r2}) must lie in [1, ({d1}, {d2})]")
    if n_sweeps < 1:
        raise ValueError("n_sweeps must be >= 1")
    mean = a.mean(axis=0)
    x = a - mean
    right = _top_eigvecs(np.einsum("nab,nac->bc", x, x), r2)
    left = np.eye(d1)[:, :r1]
    errors: list[float] = []
    for _ in range(n_sweeps):
        xr = x @ right
        left = _top_eigvecs(np.einsum("nai,nbi->ab", xr, xr), r1)
        xl = np.einsum("ai,nab->nib", left, x)
        right = _top_eigvecs(np.einsum("nib,nic->bc", xl, xl), r2)
        errors.append(_recon_error(x, left, right))
        if len(errors) > 1 and errors[-2] - errors[-1] < tol:
            break
    return MpcaModel(left, right, mean, errors)


def mpca_project(model: MpcaModel, images) -> np.ndarray:
    """``left^T (image - mean) right`` for each image, flattened row-major."""
    a = _check_stack(images)
    if a.shape[1:] != model.mean_image.shape:
        raise ValueError(f"image shape {a.shape[1:]} does not match model {model.mean_image.shape}")
    core = np.einsum("ai,nab,bj->nij", model.left, a - model.mean_image, model.right)
    return core.reshape(len(a), -1)


def mpca_reconstruct(model: MpcaModel, features: np.ndarray) -> np.ndarray:
    """Map projected features back to image space."""
    r1, r2 = model.ranks
    core = np.asarray(features, dtype=float).reshape(-1, r1, r2)
    return np.einsum("ai,nij,bj->nab", model.left, core, model.right) + model.mean_image


@dataclass
class PcaResult:
    scores: np.ndarray
    components: np.ndarray  # (p, r), orthonormal columns
    mean: np.ndarray
    scale: np.ndarray
    explained_ratio: np.ndarray  # per retained component, of the total variance

    def transform(self, data) -> np.ndarray:
        return ((np.asarray(data, dtype=float) - self.mean) / self.scale) @ self.components


def pca_fit_project(data, r: int, correlation: bool = False) -> PcaResult:
    """Project onto the top ``r`` principal axes of the covariance (or correlation) matrix."""
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or len(x) < 2:
        raise ValueError("data must be an (n, p) matrix with n >= 2")
    n, p = x.shape
    if not 1 <= r <= p:
        raise ValueError(f"rank r={r} must lie in [1, {p}]")
    mean = x.mean(axis=0)
    scale = np.ones(p)
    if correlation:
        scale = x.std(axis=0, ddof=1)
        if np.any(scale == 0):
            raise ValueError("constant column: correlation matrix undefined")
    z = (x - mean) / scale
    _, sv, vt = np.linalg.svd(z, full_matrices=False)
    comps = fix_signs(vt[:r].T)
    var = sv**2
    total = var.sum()
    ratio = var[:r] / total if total > 0 else np.zeros(r)
    return PcaResult(z @ comps, comps, mean, scale, ratio)
