"""Polynomial second layer over Hilbert-space vectors.

Coordinate j of the map is ``(y_j . z + lambda_j) ** p_j``; an optional
constant bias coordinate is appended last.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, MixedOrderError, ParameterError


@dataclass(frozen=True)
class PolyKernel:
    y: tuple
    lam: float
    order: int

    def __post_init__(self):
        y = tuple(float(v) for v in np.asarray(self.y, dtype=np.float64).ravel())
        if not y or not np.all(np.isfinite(y)):
            raise ParameterError("basis vector must be non-empty and finite")
        if int(self.order) != self.order or self.order < 1:
            raise ParameterError(f"order must be a positive integer, got {self.order}")
        if not np.isfinite(self.lam):
            raise ParameterError("offset must be finite")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "order", int(self.order))


@dataclass(frozen=True)
class QuadraticForm:
    """``z^T A2 z + b2^T z + c2``."""

    A2: np.ndarray
    b2: np.ndarray
    c2: float

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.float64)
        return np.einsum("...i,ij,...j->...", z, self.A2, z) + z @ self.b2 + self.c2


class PolyLayer:
    """Ordered polynomial kernels, optionally followed by a bias coordinate."""

    def __init__(self, kernels: Sequence[PolyKernel], include_bias: bool = False):
        kernels = tuple(kernels)
        if not kernels and not include_bias:
            raise ParameterError("a polynomial layer needs at least one kernel or a bias")
        dims = {len(k.y) for k in kernels}
        if len(dims) > 1:
            raise DimensionError(f"basis vectors have mixed lengths {sorted(dims)}")
        self.kernels = kernels
        self.include_bias = bool(include_bias)
        self._n_c = dims.pop() if dims else None
        self._Y = np.array([k.y for k in kernels], dtype=np.float64).reshape(len(kernels), -1)
        self._lam = np.array([k.lam for k in kernels], dtype=np.float64)
        self._ord = np.array([k.order for k in kernels], dtype=np.int64)
        if np.any((self._lam < 0) & (self._lam > -1)):
            warnings.warn("polynomial offsets in (-1, 0) may lead to poor cutting surfaces; "
                          "existence of a feasible cut is only guaranteed for offsets >= 0",
                          stacklevel=2)

    @classmethod
    def default(cls, n_c: int, orders=(1, 2), lambdas=None, include_bias=True,
                extra_basis=None) -> "PolyLayer":
        """Unit-basis kernels e_1..e_{n_c} at every order, then extra basis vectors.

        ``lambdas`` maps order -> offset (or is a sequence aligned with
        ``orders``); every offset defaults to 1.0. ``extra_basis`` rows are
        added at every order after the unit vectors.
        """
        orders = [int(p) for p in orders]
        if len(set(orders)) != len(orders):
            raise ParameterError(f"repeated order in {orders}")
        if lambdas is None:
            lam = {p: 1.0 for p in orders}
        elif isinstance(lambdas, dict):
            lam = {p: float(lambdas.get(p, 1.0)) for p in orders}
        else:
            lambdas = list(lambdas)
            if len(lambdas) == 1:
                lambdas = lambdas * len(orders)
            if len(lambdas) != len(orders):
                raise ParameterError("one offset per order is required")
            lam = dict(zip(orders, map(float, lambdas)))
        basis = list(np.eye(n_c))
        if extra_basis is not None:
            extra = np.atleast_2d(np.asarray(extra_basis, dtype=np.float64))
            if extra.shape[1] != n_c:
                raise DimensionError(f"extra basis vectors must have length {n_c}")
            basis.extend(extra)
        kernels = [PolyKernel(y, lam[p], p) for p in orders for y in basis]
        return cls(kernels, include_bias)

    @classmethod
    def identity(cls, n_c: int) -> "PolyLayer":
        """Order-1, zero-offset unit basis: the map is the identity on R^n_c."""
        return cls.default(n_c, orders=(1,), lambdas=[0.0], include_bias=False)

    @classmethod
    def quadratic(cls, n_c: int, lam: float = 0.0, extra_basis=None) -> "PolyLayer":
        """Order-2 unit basis with shared offset, no bias."""
        return cls.default(n_c, orders=(2,), lambdas=[lam], include_bias=False,
                           extra_basis=extra_basis)

    @property
    def n_c(self):
        return self._n_c

    @property
    def n_out(self) -> int:
        return len(self.kernels) + int(self.include_bias)

    @property
    def max_order(self) -> int:
        return int(self._ord.max()) if len(self.kernels) else 0

    @property
    def orders(self) -> np.ndarray:
        return self._ord.copy()

    @property
    def lambdas(self) -> np.ndarray:
        return self._lam.copy()

    @property
    def basis(self) -> np.ndarray:
        return self._Y.copy()

    def __eq__(self, other):
        if not isinstance(other, PolyLayer):
            return NotImplemented
        return self.kernels == other.kernels and self.include_bias == other.include_bias

    def __repr__(self):
        return (f"PolyLayer(n_kernels={len(self.kernels)}, max_order={self.max_order}, "
                f"bias={self.include_bias})")

    def _check(self, z):
        z = np.asarray(z, dtype=np.float64)
        single = z.ndim == 1
        z2 = z[np.newaxis] if single else z
        if z2.ndim != 2 or (self._n_c is not None and z2.shape[1] != self._n_c):
            raise DimensionError(f"expected vectors of length {self._n_c}, got shape {z.shape}")
        return z2, single

    def map(self, z) -> np.ndarray:
        """(n_c,) -> (N_p,) or (N, n_c) -> (N, N_p)."""
        z2, single = self._check(z)
        out = (z2 @ self._Y.T + self._lam) ** self._ord
        if self.include_bias:
            out = np.hstack([out, np.ones((out.shape[0], 1))])
        return out[0] if single else out

    def jacobian(self, z) -> np.ndarray:
        """(N_p, n_c) for a single vector, (N, N_p, n_c) for a stack; bias row is zero."""
        z2, single = self._check(z)
        base = z2 @ self._Y.T + self._lam
        coef = self._ord * base ** (self._ord - 1)
        jac = coef[:, :, np.newaxis] * self._Y[np.newaxis, :, :]
        if self.include_bias:
            jac = np.concatenate([jac, np.zeros((jac.shape[0], 1, jac.shape[2]))], axis=1)
        return jac[0] if single else jac


def poly_map(layer: PolyLayer, z) -> np.ndarray:
    return layer.map(z)


def poly_map_jacobian(layer: PolyLayer, z) -> np.ndarray:
    return layer.jacobian(z)


poly2_map = poly_map


def expand_quadratic(alpha, layer: PolyLayer) -> QuadraticForm:
    """Rewrite ``alpha . p2(z)`` as an explicit quadratic form in z."""
    if layer.include_bias:
        raise MixedOrderError("quadratic expansion is defined for layers without bias")
    if np.any(layer.orders != 2):
        raise MixedOrderError("every kernel must have order 2")
    lam = layer.lambdas
    if lam.size and np.any(lam != lam[0]):
        raise ParameterError("quadratic expansion requires a shared offset")
    alpha = np.asarray(alpha, dtype=np.float64)
    if alpha.shape != (layer.n_out,):
        raise DimensionError(f"alpha must have length {layer.n_out}")
    Y = layer.basis
    lam0 = float(lam[0])
    A2 = (Y.T * alpha) @ Y
    A2 = 0.5 * (A2 + A2.T)
    return QuadraticForm(A2, 2.0 * lam0 * (alpha @ Y), lam0**2 * float(alpha.sum()))


def normalized_images(gaussian, samples) -> np.ndarray:
    """Unit-norm kernel images of training samples, for use as extra basis vectors."""
    z = np.atleast_2d(gaussian.map(samples))
    return z / np.linalg.norm(z, axis=1, keepdims=True)
