"""Run configuration: a JSON document with fixed sections, validated before any work starts.

Every section is optional; missing keys take the defaults below. Unknown
sections or keys are rejected so that a typo cannot silently fall back to a
default.
"""

from __future__ import annotations

import copy
import json
import math
from pathlib import Path

from .errors import ConfigError

FORMULATIONS = ("hyperplane", "ellipsoid", "multipoly")
DATASET_KINDS = ("blob", "lane", "world", "file")
LAYER_KINDS = ("auto", "grid", "polyline", "greedy", "union", "explicit")

DEFAULTS = {
    "dataset": {
        "kind": "blob",
        "seed": 0,
        "path": None,
        # blob
        "n_safe": 200,
        "n_unsafe": 100,
        "r0": 1.0,
        "a": 0.3,
        "k": 3,
        # lane
        "road_width": 1.0,
        "densities": [8.0, 8.0],
        "band": 0.5,
        # world
        "n_beams": 72,
        "max_range": 4.0,
        "standoff": 0.2,
        "samples_per_beam": 3,
        "pose_index": None,
    },
    "first_layer": {
        "kind": "auto",
        "shape": None,
        "bbox": None,
        "sigma": None,
        "count": 7,
        "sigma_rule": None,
        "schedule": [0.8, 0.4],
        "min_gain": 3,
        "centers": None,
        "sigmas": None,
        "parts": None,
    },
    "second_layer": {
        "orders": None,
        "lambdas": None,
        "bias": None,
        "extra_basis": None,
    },
    "formulation": "multipoly",
    "solver": {
        "method": "dual",
        "feas_tol": 1e-9,
        "max_iters": None,
        "warm_start": False,
        "kappa": 1.0,
        "override_cover": False,
    },
    "outputs": {
        "model": "model.json",
        "dataset": "data.csv",
        "scene": "scene.json",
        "layer": "layer.json",
        "svg": "contour.svg",
        "grid_csv": "grid.csv",
        "eval_csv": "eval.csv",
        "resolution": 128,
        "bbox": None,
    },
}

_LAYER_KEYS = set(DEFAULTS["first_layer"])


def _is_number(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _number_list(v, name, positive=False):
    if not isinstance(v, list) or not v or not all(_is_number(x) for x in v):
        raise ConfigError(f"{name} must be a non-empty list of numbers")
    if positive and any(x <= 0 for x in v):
        raise ConfigError(f"{name} entries must be positive")


def _bbox(v, name):
    if v is None:
        return
    if (not isinstance(v, list) or not v
            or not all(isinstance(b, list) and len(b) == 2 and all(_is_number(x) for x in b)
                       and b[0] < b[1] for b in v)):
        raise ConfigError(f"{name} must be a list of [low, high] pairs with low < high")


def _merge(section, given, defaults):
    if not isinstance(given, dict):
        raise ConfigError(f"section {section!r} must be an object")
    unknown = sorted(set(given) - set(defaults))
    if unknown:
        raise ConfigError(f"unknown key(s) {unknown} in section {section!r}")
    out = copy.deepcopy(defaults)
    out.update(given)
    return out


def _check_layer(layer, name):
    kind = layer["kind"]
    if kind not in LAYER_KINDS:
        raise ConfigError(f"{name}.kind must be one of {LAYER_KINDS}, got {kind!r}")
    if kind == "grid" and layer["shape"] is not None:
        shape = layer["shape"]
        if not (isinstance(shape, list) and shape
                and all(isinstance(s, int) and not isinstance(s, bool) and s >= 1 for s in shape)):
            raise ConfigError(f"{name}.shape must be a list of positive integers")
    _bbox(layer["bbox"], f"{name}.bbox")
    if layer["sigma"] is not None and not (_is_number(layer["sigma"]) and layer["sigma"] > 0):
        raise ConfigError(f"{name}.sigma must be a positive number")
    if not (isinstance(layer["count"], int) and layer["count"] >= 1):
        raise ConfigError(f"{name}.count must be a positive integer")
    if layer["sigma_rule"] is not None and not (_is_number(layer["sigma_rule"])
                                                and layer["sigma_rule"] > 0):
        raise ConfigError(f"{name}.sigma_rule must be a positive number")
    _number_list(layer["schedule"], f"{name}.schedule", positive=True)
    if not (isinstance(layer["min_gain"], int) and layer["min_gain"] >= 1):
        raise ConfigError(f"{name}.min_gain must be a positive integer")
    if kind == "explicit":
        centers, sigmas = layer["centers"], layer["sigmas"]
        if not (isinstance(centers, list) and centers
                and all(isinstance(c, list) and all(_is_number(x) for x in c) for c in centers)):
            raise ConfigError(f"{name}.centers must be a list of coordinate lists")
        if _is_number(sigmas):
            sigmas = [sigmas] * len(centers)
            layer["sigmas"] = sigmas
        _number_list(sigmas, f"{name}.sigmas", positive=True)
        if len(sigmas) != len(centers):
            raise ConfigError(f"{name}.sigmas must have one entry per center")
    if kind == "union":
        parts = layer["parts"]
        if not isinstance(parts, list) or not parts:
            raise ConfigError(f"{name}.parts must be a non-empty list of layer sections")
        merged = []
        for i, part in enumerate(parts):
            sub = _merge(f"{name}.parts[{i}]", part, DEFAULTS["first_layer"])
            if sub["kind"] in ("union", "auto"):
                raise ConfigError(f"{name}.parts[{i}] cannot be of kind {sub['kind']!r}")
            _check_layer(sub, f"{name}.parts[{i}]")
            merged.append(sub)
        layer["parts"] = merged


def validate(doc) -> dict:
    """Return a fully populated config, or raise ConfigError naming the first problem."""
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(doc) - set(DEFAULTS))
    if unknown:
        raise ConfigError(f"unknown section(s) {unknown}")
    cfg = {}
    for section, default in DEFAULTS.items():
        if isinstance(default, dict):
            cfg[section] = _merge(section, doc.get(section, {}), default)
        else:
            cfg[section] = doc.get(section, default)

    ds = cfg["dataset"]
    if ds["kind"] not in DATASET_KINDS:
        raise ConfigError(f"dataset.kind must be one of {DATASET_KINDS}, got {ds['kind']!r}")
    if ds["kind"] == "file" and not isinstance(ds["path"], str):
        raise ConfigError("dataset.path is required when dataset.kind is 'file'")
    if not (isinstance(ds["seed"], int) and not isinstance(ds["seed"], bool) and ds["seed"] >= 0):
        raise ConfigError("dataset.seed must be a non-negative integer")
    for key in ("n_safe", "n_unsafe", "n_beams", "samples_per_beam", "k"):
        if not (isinstance(ds[key], int) and not isinstance(ds[key], bool) and ds[key] >= 0):
            raise ConfigError(f"dataset.{key} must be a non-negative integer")
    for key in ("r0", "road_width", "band", "max_range"):
        if not (_is_number(ds[key]) and ds[key] > 0):
            raise ConfigError(f"dataset.{key} must be a positive number")
    for key in ("a", "standoff"):
        if not _is_number(ds[key]):
            raise ConfigError(f"dataset.{key} must be a number")
    _number_list(ds["densities"], "dataset.densities", positive=True)
    if len(ds["densities"]) != 2:
        raise ConfigError("dataset.densities must be [safe, unsafe]")
    if ds["pose_index"] is not None and not (isinstance(ds["pose_index"], int)
                                             and ds["pose_index"] >= 0):
        raise ConfigError("dataset.pose_index must be a non-negative integer or null")

    _check_layer(cfg["first_layer"], "first_layer")

    sl = cfg["second_layer"]
    if sl["orders"] is not None:
        if not (isinstance(sl["orders"], list) and sl["orders"]
                and all(isinstance(o, int) and not isinstance(o, bool) and o >= 1
                        for o in sl["orders"])):
            raise ConfigError("second_layer.orders must be a non-empty list of positive integers")
    if sl["lambdas"] is not None:
        _number_list(sl["lambdas"], "second_layer.lambdas")
        if sl["orders"] is not None and len(sl["lambdas"]) not in (1, len(sl["orders"])):
            raise ConfigError("second_layer.lambdas needs one entry or one per order")
    if sl["bias"] is not None and not isinstance(sl["bias"], bool):
        raise ConfigError("second_layer.bias must be true or false")
    if sl["extra_basis"] is not None and not (
            isinstance(sl["extra_basis"], list)
            and all(isinstance(v, list) and all(_is_number(x) for x in v) for v in sl["extra_basis"])):
        raise ConfigError("second_layer.extra_basis must be a list of vectors")

    if cfg["formulation"] not in FORMULATIONS:
        raise ConfigError(f"formulation must be one of {FORMULATIONS}, got {cfg['formulation']!r}")

    sv = cfg["solver"]
    if sv["method"] not in ("dual", "primal"):
        raise ConfigError("solver.method must be 'dual' or 'primal'")
    if not (_is_number(sv["feas_tol"]) and sv["feas_tol"] > 0):
        raise ConfigError("solver.feas_tol must be a positive number")
    if sv["max_iters"] is not None and not (isinstance(sv["max_iters"], int) and sv["max_iters"] > 0):
        raise ConfigError("solver.max_iters must be a positive integer or null")
    for key in ("warm_start", "override_cover"):
        if not isinstance(sv[key], bool):
            raise ConfigError(f"solver.{key} must be true or false")
    if sv["warm_start"] and sv["method"] != "primal":
        raise ConfigError("solver.warm_start requires solver.method = 'primal'")
    if not (_is_number(sv["kappa"]) and 0 < sv["kappa"] <= 1):
        raise ConfigError("solver.kappa must lie in (0, 1]")

    out = cfg["outputs"]
    for key in ("model", "dataset", "scene", "layer", "svg", "grid_csv", "eval_csv"):
        if not isinstance(out[key], str) or not out[key]:
            raise ConfigError(f"outputs.{key} must be a file name")
    if not (isinstance(out["resolution"], int) and out["resolution"] >= 16):
        raise ConfigError("outputs.resolution must be an integer >= 16")
    _bbox(out["bbox"], "outputs.bbox")
    return cfg


def load_config(path=None) -> dict:
    """Read and validate a config file; ``None`` gives the defaults."""
    if path is None:
        return validate({})
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return validate(doc)
