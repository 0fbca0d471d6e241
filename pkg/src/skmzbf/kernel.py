"""Gaussian radial-basis first layer.

The layer maps points of R^n_d into the unit cube of R^n_c, one coordinate per
center. Bandwidths are stored per center so single-scale and multi-scale
layers share one type.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, ParameterError

AFFINE_RANK_RTOL = 1e-10


def _as_points(x, n_d=None, name="x"):
    """Return ``x`` as a float64 array of shape (N, n_d) plus a flag for 1-D input."""
    arr = np.asarray(x, dtype=np.float64)
    single = arr.ndim == 1
    if single:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be a point or a stack of points, got shape {arr.shape}")
    if n_d is not None and arr.shape[1] != n_d:
        raise DimensionError(f"{name} has dimension {arr.shape[1]}, expected {n_d}")
    return arr, single


def gauss_kernel(x, c, sigma: float) -> float:
    """Gaussian kernel ``exp(-||x - c||^2 / sigma^2)``."""
    x = np.asarray(x, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    if x.shape != c.shape or x.ndim != 1:
        raise DimensionError(f"point shapes {x.shape} and {c.shape} do not match")
    if not sigma > 0:
        raise ParameterError(f"bandwidth must be positive, got {sigma}")
    d = x - c
    return float(np.exp(-np.dot(d, d) / sigma**2))


class EmbeddingReport(NamedTuple):
    satisfies_count: bool
    has_affine_basis: bool

    @property
    def is_embedding(self) -> bool:
        return self.satisfies_count and self.has_affine_basis


@dataclass(frozen=True, eq=False)
class GaussianLayer:
    """Center set with per-center bandwidths.

    Args:
        centers: array of shape (n_c, n_d).
        bandwidths: scalar (shared) or array of shape (n_c,), all positive.
    """

    centers: np.ndarray
    bandwidths: np.ndarray

    def __init__(self, centers, bandwidths):
        centers = np.array(centers, dtype=np.float64, ndmin=2)
        if centers.ndim != 2 or centers.shape[0] < 1 or centers.shape[1] < 1:
            raise DimensionError(f"centers must have shape (n_c, n_d), got {centers.shape}")
        sig = np.asarray(bandwidths, dtype=np.float64)
        if sig.ndim == 0:
            sig = np.full(centers.shape[0], float(sig))
        if sig.shape != (centers.shape[0],):
            raise DimensionError(
                f"got {sig.size} bandwidths for {centers.shape[0]} centers")
        if not np.all(np.isfinite(centers)):
            raise ParameterError("centers must be finite")
        if not np.all(np.isfinite(sig)) or np.any(sig <= 0):
            raise ParameterError("bandwidths must be finite and positive")
        rows = np.column_stack([centers, sig])
        if np.unique(rows, axis=0).shape[0] != rows.shape[0]:
            raise ParameterError("duplicate center with identical bandwidth")
        centers.setflags(write=False)
        sig.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "bandwidths", sig)

    @property
    def n_c(self) -> int:
        return self.centers.shape[0]

    @property
    def n_d(self) -> int:
        return self.centers.shape[1]

    def __eq__(self, other):
        if not isinstance(other, GaussianLayer):
            return NotImplemented
        return (np.array_equal(self.centers, other.centers)
                and np.array_equal(self.bandwidths, other.bandwidths))

    def __repr__(self):
        return f"GaussianLayer(n_c={self.n_c}, n_d={self.n_d})"

    def _sqdist(self, pts):
        diff = pts[:, np.newaxis, :] - self.centers[np.newaxis, :, :]
        return np.einsum("ijk,ijk->ij", diff, diff), diff

    def map(self, x) -> np.ndarray:
        """Kernel map; (n_d,) -> (n_c,) or (N, n_d) -> (N, n_c)."""
        pts, single = _as_points(x, self.n_d)
        sq, _ = self._sqdist(pts)
        z = np.exp(-sq / self.bandwidths**2)
        return z[0] if single else z

    def jacobian(self, x) -> np.ndarray:
        """Jacobian of the kernel map; shape (n_c, n_d), or (N, n_c, n_d) for stacked points.

        Row i is ``-(2 / sigma_i^2) k_i(x) (x - c_i)``.
        """
        pts, single = _as_points(x, self.n_d)
        sq, diff = self._sqdist(pts)
        inv = 1.0 / self.bandwidths**2
        z = np.exp(-sq * inv)
        jac = (-2.0 * inv * z)[:, :, np.newaxis] * diff
        return jac[0] if single else jac

    def merged(self, other: "GaussianLayer") -> "GaussianLayer":
        """Union of two layers, dropping exact duplicates (first occurrence kept)."""
        if other.n_d != self.n_d:
            raise DimensionError("layers live in different input dimensions")
        rows = np.vstack([np.column_stack([self.centers, self.bandwidths]),
                          np.column_stack([other.centers, other.bandwidths])])
        _, first = np.unique(rows, axis=0, return_index=True)
        rows = rows[np.sort(first)]
        return GaussianLayer(rows[:, :-1], rows[:, -1])


def kernel_map(layer: GaussianLayer, x) -> np.ndarray:
    return layer.map(x)


def kernel_map_jacobian(layer: GaussianLayer, x) -> np.ndarray:
    return layer.jacobian(x)


def check_embedding(layer: GaussianLayer) -> EmbeddingReport:
    """Check the count and affine-independence conditions for an injective kernel map."""
    n_c, n_d = layer.centers.shape
    enough = n_c >= n_d + 1
    if n_c < 2:
        return EmbeddingReport(enough, False)
    diffs = layer.centers[1:] - layer.centers[0]
    sv = np.linalg.svd(diffs, compute_uv=False)
    rank = int(np.sum(sv > AFFINE_RANK_RTOL * sv[0])) if sv[0] > 0 else 0
    return EmbeddingReport(enough, rank == n_d)
