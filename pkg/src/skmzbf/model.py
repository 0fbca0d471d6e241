"""Shallow kernel machine barrier function ``h(x) = psi(1 - alpha . p(k(x)))``.

The shift puts unsafe training samples at ``h <= 0`` and safe samples that
meet the LP margin at ``h >= 2`` (for identity ``psi``).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, FormatError, ParameterError
from .kernel import GaussianLayer, _as_points
from .poly import PolyKernel, PolyLayer
from .synthesis import CuttingSurface, LabeledDataset

DOCUMENT_VERSION = 1
SHIFT_CONVENTION = "one_minus"


class OuterKind(str, enum.Enum):
    IDENTITY = "identity"
    LINEAR_SCALE = "linear_scale"
    SATURATED_TANH = "saturated_tanh"


@dataclass(frozen=True)
class OuterFunction:
    """Strictly increasing scalar map fixing zero."""

    kind: OuterKind = OuterKind.IDENTITY
    gamma: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", OuterKind(self.kind))
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ParameterError(f"gamma must be positive, got {self.gamma}")

    def __call__(self, s):
        if self.kind is OuterKind.IDENTITY:
            return s
        if self.kind is OuterKind.LINEAR_SCALE:
            return self.gamma * s
        return self.gamma * np.tanh(np.asarray(s) / self.gamma)

    def derivative(self, s):
        s = np.asarray(s, dtype=np.float64)
        if self.kind is OuterKind.IDENTITY:
            return np.ones_like(s)
        if self.kind is OuterKind.LINEAR_SCALE:
            return np.full_like(s, self.gamma)
        return 1.0 / np.cosh(s / self.gamma) ** 2


class Classification(str, enum.Enum):
    SAFE = "safe"
    BOUNDARY = "boundary"
    UNSAFE = "unsafe"


class MonotonicityReport(NamedTuple):
    segments: int
    monotone: int
    fraction: float
    constant: bool


@dataclass(eq=False)
class ZbfModel:
    gaussian: GaussianLayer
    poly: PolyLayer
    alpha: np.ndarray
    outer: OuterFunction = field(default_factory=OuterFunction)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64).ravel()
        if self.alpha.size != self.poly.n_out:
            raise DimensionError(f"alpha has {self.alpha.size} entries, layer outputs {self.poly.n_out}")
        if self.poly.n_c is not None and self.poly.n_c != self.gaussian.n_c:
            raise DimensionError("polynomial layer input size differs from the number of centers")
        if not np.all(np.isfinite(self.alpha)):
            raise ParameterError("alpha must be finite")
        self.alpha.setflags(write=False)

    @classmethod
    def from_surface(cls, gaussian, poly, surface: CuttingSurface, outer=None, **metadata):
        meta = {"formulation": surface.formulation.value,
                "objective": surface.objective_value,
                "shift_convention": SHIFT_CONVENTION}
        meta.update(metadata)
        return cls(gaussian, poly, surface.alpha, outer or OuterFunction(), meta)

    @property
    def n_d(self) -> int:
        return self.gaussian.n_d

    def cut_value(self, x) -> np.ndarray:
        """``alpha . p(k(x))``: the LP's decision function."""
        pts, single = _as_points(x, self.n_d)
        f = np.atleast_2d(self.poly.map(self.gaussian.map(pts))) @ self.alpha
        return f[0] if single else f

    def pre_value(self, x):
        """Barrier value before the outer function: ``1 - alpha . p(k(x))``."""
        return 1.0 - self.cut_value(x)

    def value(self, x):
        return self.outer(self.pre_value(x))

    def gradient(self, x) -> np.ndarray:
        """Closed-form gradient by the chain rule through both layers; (n_d,) or (N, n_d)."""
        pts, single = _as_points(x, self.n_d)
        z = np.atleast_2d(self.gaussian.map(pts))
        Jk = self.gaussian.jacobian(pts)          # (N, n_c, n_d)
        Jp = self.poly.jacobian(z)                # (N, N_p, n_c)
        dz = np.einsum("p,npc->nc", self.alpha, Jp)
        g_pre = -np.einsum("nc,ncd->nd", dz, Jk)
        h_pre = 1.0 - np.atleast_2d(self.poly.map(z)) @ self.alpha
        g = self.outer.derivative(h_pre)[:, None] * g_pre
        return g[0] if single else g

    def classify(self, x, tol: float = 1e-9):
        """Sign of the pre-outer value; ``|h| <= tol`` is the boundary."""
        if tol < 0:
            raise ParameterError("tolerance must be non-negative")
        h = np.atleast_1d(self.pre_value(x))
        labels = np.empty(h.shape, dtype=object)
        labels.fill(Classification.BOUNDARY)   # np.full would coerce the str enum
        labels[h > tol] = Classification.SAFE
        labels[h < -tol] = Classification.UNSAFE
        return labels[0] if np.ndim(x) == 1 else labels

    def to_document(self) -> dict:
        return {
            "version": DOCUMENT_VERSION,
            "n_d": self.n_d,
            "centers": self.gaussian.centers.tolist(),
            "sigmas": self.gaussian.bandwidths.tolist(),
            "poly": [{"y": list(k.y), "lambda": k.lam, "order": k.order}
                     for k in self.poly.kernels],
            "bias": self.poly.include_bias,
            "alpha": self.alpha.tolist(),
            "outer": {"kind": self.outer.kind.value, "gamma": self.outer.gamma},
            "shift_convention": SHIFT_CONVENTION,
            "metadata": self.metadata,
        }

    @classmethod
    def from_document(cls, doc) -> "ZbfModel":
        if not isinstance(doc, dict):
            raise FormatError("model document must be a mapping")
        if "version" not in doc:
            raise FormatError("model document has no version field")
        if doc["version"] != DOCUMENT_VERSION:
            raise FormatError(f"unsupported model document version {doc['version']!r} "
                              f"(this build reads version {DOCUMENT_VERSION})")
        required = {"n_d", "centers", "sigmas", "poly", "bias", "alpha", "outer",
                    "shift_convention"}
        missing = required - doc.keys()
        if missing:
            raise FormatError(f"model document is missing {sorted(missing)}")
        unknown = doc.keys() - required - {"version", "metadata"}
        if unknown:
            raise FormatError(f"unknown model document fields {sorted(unknown)}")
        if doc["shift_convention"] != SHIFT_CONVENTION:
            raise FormatError(f"unsupported shift convention {doc['shift_convention']!r}")
        try:
            gaussian = GaussianLayer(np.array(doc["centers"], dtype=np.float64).reshape(-1, doc["n_d"]),
                                     np.array(doc["sigmas"], dtype=np.float64))
            kernels = [PolyKernel(k["y"], k["lambda"], k["order"]) for k in doc["poly"]]
            poly = PolyLayer(kernels, bool(doc["bias"]))
            outer = OuterFunction(doc["outer"]["kind"], float(doc["outer"]["gamma"]))
            return cls(gaussian, poly, doc["alpha"], outer, dict(doc.get("metadata", {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"malformed model document: {exc}") from exc

    def dumps(self) -> str:
        return dump_document(self.to_document())

    @classmethod
    def loads(cls, text: str) -> "ZbfModel":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"model document is not valid JSON: {exc}") from exc
        return cls.from_document(doc)

    def save(self, path):
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "ZbfModel":
        return cls.loads(Path(path).read_text())


def _encode(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            raise FormatError("documents cannot hold non-finite numbers")
        return format(v, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_encode(v, indent, level + 1)}"
                 for k, v in sorted(obj.items())]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise FormatError(f"cannot serialise {type(obj).__name__}")


def dump_document(doc, indent: int = 1) -> str:
    """JSON text with floats written to 17 significant digits and sorted keys."""
    return _encode(doc, indent, 0) + "\n"


def zbf_value(model: ZbfModel, x):
    return model.value(x)


def zbf_gradient(model: ZbfModel, x):
    return model.gradient(x)


def classify(model: ZbfModel, x, tol: float = 1e-9):
    return model.classify(x, tol)


def serialize(model: ZbfModel) -> str:
    return model.dumps()


def deserialize(document) -> ZbfModel:
    if isinstance(document, str):
        return ZbfModel.loads(document)
    return ZbfModel.from_document(document)


def boundary_band_check(model: ZbfModel, data: LabeledDataset, band: float = 0.1,
                        samples: int = 100) -> MonotonicityReport:
    """Sampled monotonicity of ``h`` across the boundary band.

    For each unsafe training point a segment runs to its nearest safe training
    point. The window checked starts where the pre-outer value first rises
    above ``-band`` and ends where it first reaches ``2 + band`` (or at the
    segment end); ``h`` must be non-decreasing on that window.
    """
    if not band > 0:
        raise ParameterError("band must be positive")
    if data.n_unsafe == 0 or data.n_safe == 0:
        return MonotonicityReport(0, 0, 1.0, bool(np.all(model.alpha == 0)))
    d2 = ((data.unsafe[:, None, :] - data.safe[None, :, :]) ** 2).sum(axis=2)
    nearest = data.safe[np.argmin(d2, axis=1)]
    t = np.linspace(0.0, 1.0, samples)
    segs = data.unsafe[:, None, :] + t[None, :, None] * (nearest - data.unsafe)[:, None, :]
    h = model.pre_value(segs.reshape(-1, model.n_d)).reshape(segs.shape[:2])
    if np.all(model.alpha == 0) or np.ptp(h) <= 1e-12:
        return MonotonicityReport(h.shape[0], h.shape[0], 1.0, True)
    good = 0
    for row in h:
        above = np.flatnonzero(row > -band)
        if above.size == 0:
            good += 1
            continue
        start = above[0]
        top = np.flatnonzero(row[start:] >= 2.0 + band)
        stop = start + (top[0] if top.size else row.size - 1 - start)
        window = row[start: stop + 1]
        if np.all(np.diff(window) >= -1e-12):
            good += 1
    return MonotonicityReport(h.shape[0], good, good / h.shape[0], False)
