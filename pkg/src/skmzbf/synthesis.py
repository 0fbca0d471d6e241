"""Cutting-surface synthesis: the three LP formulations and their feasibility certificates.

All formulations share the hard constraint ``alpha . p(k(x_u)) >= 1`` on every
unsafe sample. By default the LPs are solved through their duals, which have
one row per feature instead of one per sample; the primal route through
:func:`solve_lp` remains available and accepts a certificate warm start.
"""

from __future__ import annotations

import enum
import logging
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .covering import CoverSpec
from .errors import (DimensionError, EmptyUnsafeError, MixedOrderError, NotCoveredError,
                     ParameterError, SolverError)
from .kernel import GaussianLayer, _as_points
from .lp import LinearProgram, LpStatus, solve_bounded, solve_lp
from .poly import PolyLayer

logger = logging.getLogger(__name__)

METHODS = ("dual", "primal")


class Formulation(str, enum.Enum):
    HYPERPLANE = "hyperplane"
    ELLIPSOID = "ellipsoid"
    MULTIPOLY = "multipoly"


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Safe and unsafe samples in R^n_d; either set may be empty."""

    safe: np.ndarray
    unsafe: np.ndarray

    def __init__(self, safe, unsafe, n_d=None):
        safe = np.asarray(safe, dtype=np.float64)
        unsafe = np.asarray(unsafe, dtype=np.float64)
        if n_d is None:
            n_d = next((a.shape[-1] for a in (safe, unsafe) if a.size), None)
            if n_d is None:
                raise DimensionError("cannot infer dimension from two empty sets")
        safe = safe.reshape(-1, n_d) if safe.size == 0 else safe
        unsafe = unsafe.reshape(-1, n_d) if unsafe.size == 0 else unsafe
        safe, _ = _as_points(safe, n_d, "safe")
        unsafe, _ = _as_points(unsafe, n_d, "unsafe")
        if not (np.all(np.isfinite(safe)) and np.all(np.isfinite(unsafe))):
            raise ParameterError("samples must be finite")
        safe.setflags(write=False)
        unsafe.setflags(write=False)
        object.__setattr__(self, "safe", safe)
        object.__setattr__(self, "unsafe", unsafe)

    @property
    def n_d(self) -> int:
        return self.safe.shape[1]

    @property
    def n_safe(self) -> int:
        return self.safe.shape[0]

    @property
    def n_unsafe(self) -> int:
        return self.unsafe.shape[0]

    def points(self) -> np.ndarray:
        return np.vstack([self.safe, self.unsafe])

    def labels(self) -> np.ndarray:
        """0 for safe, 1 for unsafe, aligned with :meth:`points`."""
        return np.concatenate([np.zeros(self.n_safe, int), np.ones(self.n_unsafe, int)])

    @classmethod
    def from_labeled(cls, points, labels) -> "LabeledDataset":
        points = np.asarray(points, dtype=np.float64)
        labels = np.asarray(labels)
        return cls(points[labels == 0], points[labels == 1], n_d=points.shape[-1])

    def __eq__(self, other):
        if not isinstance(other, LabeledDataset):
            return NotImplemented
        return np.array_equal(self.safe, other.safe) and np.array_equal(self.unsafe, other.unsafe)


@dataclass
class CuttingSurface:
    alpha: np.ndarray
    slack: np.ndarray
    formulation: Formulation
    objective_value: float
    iterations: int = 0
    method: str = "dual"
    extras: dict = field(default_factory=dict)


class MisclassificationReport(NamedTuple):
    unsafe_violations: int
    safe_misclassified: int
    slack_cost: float


def features(layer: GaussianLayer, poly: PolyLayer, x) -> np.ndarray:
    """Composite map ``p(k(x))`` for a stack of points, shape (N, N_p)."""
    pts, _ = _as_points(x, layer.n_d)
    if poly.n_c is not None and poly.n_c != layer.n_c:
        raise DimensionError(f"polynomial layer expects {poly.n_c} inputs, "
                             f"Gaussian layer has {layer.n_c} centers")
    return np.atleast_2d(poly.map(layer.map(pts))).reshape(pts.shape[0], poly.n_out)


def check_cover(layer: GaussianLayer, unsafe, kappa: float = 1.0, override: bool = False):
    """Require every unsafe point to clear the kernel-space cover threshold.

    Raises NotCoveredError naming the first offending point unless ``override``
    is set, in which case a warning is emitted instead. Returns the offending indices.
    """
    spec = CoverSpec.from_layer(layer, kappa)
    z = np.atleast_2d(layer.map(unsafe))
    ok = np.any(z >= spec.threshold, axis=1)
    bad = np.flatnonzero(~ok)
    if bad.size:
        i = int(bad[0])
        msg = (f"unsafe point {i} is not covered: max kernel coordinate "
               f"{z[i].max():.3e} is below the cover threshold "
               f"({bad.size} uncovered point(s) in total)")
        if not override:
            raise NotCoveredError(msg, bad.tolist())
        warnings.warn(msg + "; proceeding because the cover check was overridden", stacklevel=3)
    return bad.tolist()


def _prepare(layer, poly, data, kappa, override_cover):
    if data.n_unsafe == 0:
        raise EmptyUnsafeError("synthesis needs at least one unsafe sample")
    if data.n_d != layer.n_d:
        raise DimensionError(f"data dimension {data.n_d} differs from layer dimension {layer.n_d}")
    check_cover(layer, data.unsafe, kappa, override_cover)
    F_u = features(layer, poly, data.unsafe)
    F_s = features(layer, poly, data.safe) if data.n_safe else np.zeros((0, poly.n_out))
    return F_u, F_s


def _check_status(status):
    if status in (LpStatus.INFEASIBLE, LpStatus.UNBOUNDED):
        # an unbounded dual is an infeasible primal
        raise NotCoveredError("hard unsafe constraints are infeasible: some unsafe point "
                              "maps too close to the origin of the feature space")
    if status is not LpStatus.OPTIMAL:
        raise SolverError(f"simplex stopped with status {status.value}")


def _polish(alpha, F_u):
    """Rescale so every unsafe row clears 1 under any summation order.

    Large coefficients on nearly cancelling features make ``F_u @ alpha``
    depend on the order of summation. The tightest row is therefore judged
    by its value minus the standard floating-point bound on a dot product,
    and the rescale is skipped when that bound is immaterial.
    """
    f = F_u @ alpha
    err = F_u.shape[1] * np.finfo(np.float64).eps * (np.abs(F_u) @ np.abs(alpha))
    low = float((f - err).min())
    if 0.0 < low < 1.0 - 1e-12:
        alpha = alpha / low
    return alpha


def _solve_unsafe_only(F_u, formulation, method, x0_alpha, feas_tol, max_iters):
    n_u, N = F_u.shape
    if method == "primal":
        sol = solve_lp(LinearProgram(np.ones(N), F_u, np.ones(n_u)), feas_tol=feas_tol,
                       max_iters=max_iters, x0=x0_alpha)
        _check_status(sol.status)
        alpha, iters = sol.x, sol.iterations
    else:
        sol = solve_bounded(np.ones(n_u), F_u.T, np.ones(N), max_iters=max_iters)
        _check_status(sol.status)
        alpha, iters = np.maximum(sol.multipliers, 0.0), sol.iterations
    alpha = _polish(alpha, F_u)
    return CuttingSurface(alpha, np.zeros(0), formulation, float(alpha.sum()), iters, method)


def _solve_multipoly(F_u, F_s, method, x0_alpha, feas_tol, max_iters):
    n_u, N = F_u.shape
    n_s = F_s.shape[0]
    if method == "primal":
        A = np.block([[F_u, -F_u, np.zeros((n_u, n_s))], [-F_s, F_s, np.eye(n_s)]])
        c = np.concatenate([np.zeros(2 * N), np.ones(n_s)])
        x0 = None
        if x0_alpha is not None:
            xi = np.maximum(0.0, 1.0 + F_s @ x0_alpha)
            x0 = np.concatenate([np.maximum(x0_alpha, 0), np.maximum(-x0_alpha, 0), xi])
        sol = solve_lp(LinearProgram(c, A, np.ones(n_u + n_s)), feas_tol=feas_tol,
                       max_iters=max_iters, x0=x0)
        _check_status(sol.status)
        alpha, iters = sol.x[:N] - sol.x[N:2 * N], sol.iterations
    else:
        # dual: max 1.y  s.t.  F_u^T y_u - F_s^T y_s = 0,  y >= 0,  y_s <= 1
        G = np.hstack([F_u.T, -F_s.T])
        upper = np.concatenate([np.full(n_u, np.inf), np.ones(n_s)])
        sol = solve_bounded(np.ones(n_u + n_s), G, np.zeros(N), equality=np.ones(N, bool),
                            upper=upper, max_iters=max_iters)
        _check_status(sol.status)
        alpha, iters = sol.multipliers, sol.iterations
    alpha = _polish(alpha, F_u)
    slack = np.maximum(0.0, 1.0 + F_s @ alpha)
    return CuttingSurface(alpha, slack, Formulation.MULTIPOLY, float(slack.sum()), iters, method)


def _unit_kernel_indices(poly: PolyLayer, order: int):
    """Positions of the kernels ``(e_i . z + lam)^order`` for i = 0..n_c-1, or None."""
    n_c = poly.n_c
    if n_c is None:
        return None
    Y, orders = poly.basis, poly.orders
    idx = np.full(n_c, -1)
    for j in range(len(poly.kernels)):
        if orders[j] != order:
            continue
        nz = np.flatnonzero(Y[j])
        if nz.size == 1 and Y[j, nz[0]] == 1.0 and idx[nz[0]] < 0:
            idx[nz[0]] = j
    return idx if np.all(idx >= 0) else None


def constructive_hyperplane(layer: GaussianLayer, unsafe) -> np.ndarray:
    """Cluster-intercept certificate for the single-layer LP.

    Each unsafe point joins the cluster of its largest kernel coordinate
    (lowest index on ties); the plane intercept on axis i is the smallest
    such coordinate within cluster i.
    """
    pts, _ = _as_points(unsafe, layer.n_d, "unsafe")
    if pts.shape[0] == 0:
        raise EmptyUnsafeError("certificate needs at least one unsafe sample")
    z = np.atleast_2d(layer.map(pts))
    owner = np.argmax(z, axis=1)
    alpha = np.zeros(layer.n_c)
    for i in np.unique(owner):
        y_min = z[owner == i, i].min()
        if y_min < 1e-300:
            raise NotCoveredError(f"cluster {i} has a vanishing intercept ({y_min:.3e})",
                                  np.flatnonzero(owner == i).tolist())
        alpha[i] = 1.0 / y_min
    return alpha


def constructive_hypersphere(layer: GaussianLayer, poly: PolyLayer, unsafe, lam=None) -> np.ndarray:
    """Hypersphere certificate for the quadratic LP: ``alpha_i = rho^-2`` on the unit-basis kernels.

    ``rho`` is the smallest ``||k(x) + lam 1||`` over the unsafe points.
    """
    idx = _unit_kernel_indices(poly, 2)
    if idx is None:
        raise MixedOrderError("the layer lacks the order-2 unit-basis kernels")
    lam_poly = float(poly.lambdas[idx[0]])
    if np.any(poly.lambdas[idx] != lam_poly):
        raise ParameterError("unit-basis order-2 kernels must share one offset")
    if lam is None:
        lam = lam_poly
    if lam != lam_poly:
        raise ParameterError(f"offset {lam} does not match the layer offset {lam_poly}")
    if lam < 0:
        raise ParameterError("the hypersphere certificate needs a non-negative offset")
    pts, _ = _as_points(unsafe, layer.n_d, "unsafe")
    if pts.shape[0] == 0:
        raise EmptyUnsafeError("certificate needs at least one unsafe sample")
    z = np.atleast_2d(layer.map(pts))
    rho = float(np.linalg.norm(z + lam, axis=1).min())
    if rho < 1e-150:
        raise NotCoveredError(f"smallest feature radius {rho:.3e} is degenerate")
    alpha = np.zeros(poly.n_out)
    alpha[idx] = rho**-2
    return alpha


def certificate_alpha(layer: GaussianLayer, poly: PolyLayer, unsafe):
    """A feasible coefficient vector for the hard unsafe constraints, or None.

    Uses the hypersphere construction when the layer has order-2 unit kernels
    with a shared non-negative offset, else the cluster-intercept plane on the
    order-1 unit kernels.
    """
    idx2 = _unit_kernel_indices(poly, 2)
    if idx2 is not None and np.all(poly.lambdas[idx2] == poly.lambdas[idx2[0]]) \
            and poly.lambdas[idx2[0]] >= 0:
        return constructive_hypersphere(layer, poly, unsafe)
    idx1 = _unit_kernel_indices(poly, 1)
    if idx1 is not None and np.all(poly.lambdas[idx1] >= 0):
        alpha = np.zeros(poly.n_out)
        alpha[idx1] = constructive_hyperplane(layer, unsafe)
        return alpha
    return None


def _resolve_method(method, warm_start):
    if method is None:
        return "primal" if warm_start else "dual"
    if method not in METHODS:
        raise ParameterError(f"unknown solve method {method!r}; expected one of {METHODS}")
    if warm_start and method != "primal":
        raise ParameterError("warm starts apply to the primal method only")
    return method


def _warm_alpha(layer, poly, data, warm_start):
    if not warm_start:
        return None
    try:
        return certificate_alpha(layer, poly, data.unsafe)
    except (NotCoveredError, MixedOrderError, ParameterError):
        return None


def fit_hyperplane(layer: GaussianLayer, data: LabeledDataset, *, kappa=1.0,
                   override_cover=False, warm_start=False, method=None, feas_tol=1e-9,
                   max_iters=None) -> CuttingSurface:
    """Plane ``alpha . k(x) = 1`` furthest from the origin with all unsafe samples beyond it.

    Args:
        layer: Gaussian first layer; must cover the unsafe samples.
        data: labelled samples (only the unsafe ones enter this LP).
        kappa: cover radius factor, ``eps_i = kappa * sigma_i``.
        override_cover: fit anyway (with a warning) when the cover check fails.
        warm_start: seed the primal simplex from the constructive certificate.
        method: ``"dual"`` (default) or ``"primal"``; warm starts imply primal.
        feas_tol: phase-1 infeasibility threshold for the primal method.
        max_iters: pivot budget.

    Raises:
        NotCoveredError: the cover check failed, naming the first uncovered sample.
    """
    method = _resolve_method(method, warm_start)
    poly = PolyLayer.identity(layer.n_c)
    F_u, _ = _prepare(layer, poly, data, kappa, override_cover)
    x0 = _warm_alpha(layer, poly, data, warm_start)
    return _solve_unsafe_only(F_u, Formulation.HYPERPLANE, method, x0, feas_tol, max_iters)


def fit_ellipsoid(layer: GaussianLayer, poly: PolyLayer, data: LabeledDataset, *, kappa=1.0,
                  override_cover=False, warm_start=False, method=None, feas_tol=1e-9,
                  max_iters=None) -> CuttingSurface:
    """Quadratic cut over an all-order-2, bias-free polynomial layer.

    Options as for :func:`fit_hyperplane`.
    """
    method = _resolve_method(method, warm_start)
    if poly.include_bias or np.any(poly.orders != 2):
        raise MixedOrderError("the ellipsoid cut needs order-2 kernels only and no bias")
    if np.any(poly.lambdas < 0):
        warnings.warn("negative offsets void the existence guarantee of the quadratic cut",
                      stacklevel=2)
    F_u, _ = _prepare(layer, poly, data, kappa, override_cover)
    x0 = _warm_alpha(layer, poly, data, warm_start)
    return _solve_unsafe_only(F_u, Formulation.ELLIPSOID, method, x0, feas_tol, max_iters)


def fit_multipoly(layer: GaussianLayer, poly: PolyLayer, data: LabeledDataset, *, kappa=1.0,
                  override_cover=False, warm_start=False, method=None, feas_tol=1e-9,
                  max_iters=None) -> CuttingSurface:
    """Slack-minimising cut: hard unsafe margin +1, soft safe margin -1, sign-free alpha.

    Options as for :func:`fit_hyperplane`. The returned ``slack`` holds
    ``max(0, 1 + f(x_s))`` for every safe sample and sums to the objective.
    """
    method = _resolve_method(method, warm_start)
    F_u, F_s = _prepare(layer, poly, data, kappa, override_cover)
    x0 = _warm_alpha(layer, poly, data, warm_start)
    return _solve_multipoly(F_u, F_s, method, x0, feas_tol, max_iters)


def hyperplane_lp(layer: GaussianLayer, unsafe) -> LinearProgram:
    """Full single-layer LP (no row generation), e.g. for certificate checks."""
    F_u = np.atleast_2d(layer.map(unsafe))
    return LinearProgram(np.ones(layer.n_c), F_u, np.ones(F_u.shape[0]))


def ellipsoid_lp(layer: GaussianLayer, poly: PolyLayer, unsafe) -> LinearProgram:
    F_u = features(layer, poly, unsafe)
    return LinearProgram(np.ones(poly.n_out), F_u, np.ones(F_u.shape[0]))


def multipoly_lp(layer: GaussianLayer, poly: PolyLayer, data: LabeledDataset) -> LinearProgram:
    """Full slack LP in split form: variables (alpha+, alpha-, xi)."""
    F_u = features(layer, poly, data.unsafe)
    F_s = features(layer, poly, data.safe) if data.n_safe else np.zeros((0, poly.n_out))
    N, ns = poly.n_out, data.n_safe
    A = np.block([[F_u, -F_u, np.zeros((F_u.shape[0], ns))], [-F_s, F_s, np.eye(ns)]])
    c = np.concatenate([np.zeros(2 * N), np.ones(ns)])
    return LinearProgram(c, A, np.ones(A.shape[0]))


def decision_threshold(formulation: Formulation) -> float:
    """Feature-space value separating the classes when counting safe misclassifications.

    The slack LP puts its margins at -1 and +1, so its boundary is 0; the
    unsafe-only LPs have a single cutting surface at 1.
    """
    return 0.0 if Formulation(formulation) is Formulation.MULTIPOLY else 1.0


def misclassification_report(surface: CuttingSurface, layer: GaussianLayer, poly: PolyLayer,
                             data: LabeledDataset) -> MisclassificationReport:
    if poly.n_out != surface.alpha.size:
        raise DimensionError("surface and polynomial layer are incompatible")
    f_u = features(layer, poly, data.unsafe) @ surface.alpha if data.n_unsafe else np.zeros(0)
    f_s = features(layer, poly, data.safe) @ surface.alpha if data.n_safe else np.zeros(0)
    thr = decision_threshold(surface.formulation)
    return MisclassificationReport(
        int(np.sum(f_u < 1.0 - 1e-9)),
        int(np.sum(f_s > thr + 1e-9)),
        float(np.sum(np.maximum(0.0, f_s + 1.0))),
    )
