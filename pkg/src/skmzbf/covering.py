"""Gaussian covers of point sets and center-placement policies."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import DimensionError, ParameterError
from .kernel import GaussianLayer, _as_points

LANE_SIGMA_RULE = 2.0 / math.sqrt(math.log(2.0))


@dataclass(frozen=True)
class CoverSpec:
    """Per-center cover radii; the kernel-space threshold is ``exp(-eps_i^2 / sigma_i^2)``."""

    epsilon: np.ndarray
    threshold: np.ndarray

    @classmethod
    def from_layer(cls, layer: GaussianLayer, kappa: float = 1.0) -> "CoverSpec":
        """Radii ``eps_i = kappa * sigma_i``."""
        if not kappa > 0:
            raise ParameterError(f"kappa must be positive, got {kappa}")
        return cls.from_epsilon(layer, kappa * layer.bandwidths)

    @classmethod
    def from_epsilon(cls, layer: GaussianLayer, epsilon) -> "CoverSpec":
        eps = np.broadcast_to(np.asarray(epsilon, dtype=np.float64), (layer.n_c,)).copy()
        if np.any(eps <= 0) or not np.all(np.isfinite(eps)):
            raise ParameterError("cover radii must be positive and finite")
        return cls(eps, np.exp(-(eps / layer.bandwidths) ** 2))


class CoverReport(NamedTuple):
    covered: bool
    uncovered_indices: list


def verify_cover(layer: GaussianLayer, spec: CoverSpec, points, kernel_form: bool = False) -> CoverReport:
    """Report which points lie in no ball ``B(c_i, eps_i)``.

    With ``kernel_form`` the equivalent test ``k_i(x) >= threshold_i`` is used instead.
    """
    pts, _ = _as_points(points, layer.n_d, "points")
    if spec.epsilon.shape != (layer.n_c,):
        raise DimensionError("cover spec does not match the layer")
    if kernel_form:
        ok = np.any(np.atleast_2d(layer.map(pts)) >= spec.threshold, axis=1)
    else:
        diff = pts[:, None, :] - layer.centers[None, :, :]
        dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        ok = np.any(dist <= spec.epsilon, axis=1)
    bad = np.flatnonzero(~ok).tolist()
    return CoverReport(not bad, bad)


def grid_centers(bbox, shape) -> np.ndarray:
    """Regular lattice over an axis-aligned box, faces included; a single node sits at the midpoint.

    Args:
        bbox: sequence of (low, high) per axis.
        shape: node count per axis.
    """
    bbox = np.asarray(bbox, dtype=np.float64)
    shape = [int(s) for s in np.atleast_1d(shape)]
    if bbox.ndim != 2 or bbox.shape[1] != 2 or len(shape) != bbox.shape[0]:
        raise DimensionError("bbox must be (n_d, 2) with one count per axis")
    if np.any(bbox[:, 1] <= bbox[:, 0]):
        raise ParameterError("empty bounding box")
    if min(shape) < 1:
        raise ParameterError("grid counts must be >= 1")
    axes = [np.linspace(lo, hi, s) if s > 1 else np.array([(lo + hi) / 2])
            for (lo, hi), s in zip(bbox, shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.ravel() for g in mesh])


def grid_layer(bbox, shape, sigma=None) -> GaussianLayer:
    """Grid centers with a shared bandwidth (default: the largest grid spacing)."""
    centers = grid_centers(bbox, shape)
    if sigma is None:
        bbox = np.asarray(bbox, dtype=np.float64)
        spacing = [(hi - lo) / (s - 1) if s > 1 else hi - lo
                   for (lo, hi), s in zip(bbox, np.atleast_1d(shape))]
        sigma = max(spacing)
    return GaussianLayer(centers, sigma)


def _arc_points(centerline, targets):
    seg = np.diff(centerline, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg_len)])
    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(seg) - 1)
    safe_len = np.where(seg_len[idx] > 0, seg_len[idx], 1.0)
    frac = np.where(seg_len[idx] > 0, (targets - cum[idx]) / safe_len, 0.0)
    return centerline[idx] + frac[:, None] * seg[idx]


def polyline_centers(centerline, count: int, road_width: float, sigma_rule: float = LANE_SIGMA_RULE):
    """Centers equally spaced by arc length along a polyline, with ``sigma = sigma_rule * road_width``.

    Endpoints are included for ``count >= 2``; one center sits at the arc-length midpoint.
    Returns (centers, bandwidths).
    """
    line = np.asarray(centerline, dtype=np.float64)
    if line.ndim != 2 or line.shape[0] < 2:
        raise ParameterError("centerline needs at least two points")
    if count < 1:
        raise ParameterError("count must be >= 1")
    if not road_width > 0 or not sigma_rule > 0:
        raise ParameterError("road width and sigma rule must be positive")
    length = float(np.linalg.norm(np.diff(line, axis=0), axis=1).sum())
    if length <= 0:
        raise ParameterError("centerline has zero length")
    targets = np.array([length / 2]) if count == 1 else np.linspace(0.0, length, count)
    centers = _arc_points(line, targets)
    return centers, np.full(count, sigma_rule * road_width)


def greedy_cover(points, schedule, kappa: float = 1.0, min_gain: int = 3) -> GaussianLayer:
    """Coarse-to-fine greedy Gaussian cover of a point set.

    At each bandwidth in the descending ``schedule`` (radius ``kappa * beta``)
    a center is repeatedly placed on the uncovered point with the most
    uncovered neighbours, while that count reaches ``min(min_gain, #uncovered)``.
    Points still uncovered after the last scale get their own finest-scale
    center. Ties go to the lowest point index.
    """
    pts, _ = _as_points(points, name="points")
    if pts.shape[0] == 0:
        raise ParameterError("cannot cover an empty point set")
    sched = [float(s) for s in schedule]
    if not sched or any(s <= 0 for s in sched):
        raise ParameterError("schedule must be non-empty and positive")
    if any(a <= b for a, b in zip(sched, sched[1:])):
        raise ParameterError("schedule must be strictly descending")
    if not 0 < kappa <= 1:
        raise ParameterError("kappa must lie in (0, 1]")
    tree = cKDTree(pts)
    uncovered = np.ones(pts.shape[0], dtype=bool)
    centers, sigmas = [], []
    for beta in sched:
        eps = kappa * beta * (1 - 1e-9)
        nbrs = tree.query_ball_point(pts, eps)
        nbrs = [np.asarray(nb, dtype=np.int64) for nb in nbrs]
        gain = np.array([uncovered[nb].sum() for nb in nbrs])
        while uncovered.any():
            gain_u = np.where(uncovered, gain, -1)
            best = int(np.argmax(gain_u))
            if gain_u[best] < min(min_gain, int(uncovered.sum())):
                break
            centers.append(pts[best])
            sigmas.append(beta)
            newly = nbrs[best][uncovered[nbrs[best]]]
            uncovered[newly] = False
            # each newly covered point stops contributing to its neighbours' gain
            for j in newly:
                gain[nbrs[j]] -= 1
    finest = sched[-1]
    eps = kappa * finest * (1 - 1e-9)
    for i in np.flatnonzero(uncovered):
        if not uncovered[i]:
            continue
        centers.append(pts[i])
        sigmas.append(finest)
        uncovered[tree.query_ball_point(pts[i], eps)] = False
    return GaussianLayer(np.array(centers), np.array(sigmas))
