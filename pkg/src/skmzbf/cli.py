"""Command-line interface: ``zbf {gen,cover,fit,eval,contour,verify,bench}``.

Each subcommand prints a flat ``key=value`` summary on standard output and
writes its artifacts under ``--out``. Exit codes: 0 success, 2 configuration
error, 3 data error, 4 infeasible or not covered, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import math
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import load_config, validate
from .contour import emit_csv, emit_svg, evaluate_grid, marching_squares
from .covering import (LANE_SIGMA_RULE, CoverSpec, greedy_cover, grid_layer, polyline_centers,
                       verify_cover)
from .datagen import (BlobBoundary, CurvedLane, ObstacleWorld, default_trajectory, default_world,
                      gen_blob_dataset, gen_lane_dataset, gen_world_dataset, labeled_points,
                      read_dataset, read_scene, simulate_scan, write_dataset, write_scene)
from .errors import (ConfigError, DimensionError, EmptyUnsafeError, FormatError, MixedOrderError,
                     NotCoveredError, ParameterError, SolverError, ZbfError)
from .kernel import GaussianLayer
from .model import ZbfModel, boundary_band_check, dump_document
from .poly import PolyLayer
from .synthesis import (CuttingSurface, Formulation, LabeledDataset, fit_ellipsoid,
                        fit_hyperplane, fit_multipoly, misclassification_report)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INFEASIBLE, EXIT_NUMERICAL = 0, 2, 3, 4, 5
LOCAL_GRID = (4, 4)
GLOBAL_GRID = (5, 8)
MIN_REPETITIONS = 10


# ---------------------------------------------------------------------------
# configuration plumbing

def _parse_list(text, kind, flag):
    try:
        return [kind(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"{flag}: cannot parse {text!r} ({exc})") from exc


def resolve_config(args) -> dict:
    """Config file (or defaults) with command-line flags applied on top, then re-validated."""
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg["dataset"]["seed"] = args.seed
    if args.formulation is not None:
        cfg["formulation"] = args.formulation
    if args.orders is not None:
        cfg["second_layer"]["orders"] = _parse_list(args.orders, int, "--orders")
    if args.lam is not None:
        cfg["second_layer"]["lambdas"] = _parse_list(args.lam, float, "--lambda")
    if args.bias is not None:
        cfg["second_layer"]["bias"] = args.bias == "on"
    if args.override_cover:
        cfg["solver"]["override_cover"] = True
    if args.resolution is not None:
        cfg["outputs"]["resolution"] = args.resolution
    return validate(cfg)


def load_data(cfg, args):
    """(dataset, scene) from ``--data``/``--scene``, a dataset file, or a generator."""
    ds = cfg["dataset"]
    scene = read_scene(args.scene) if getattr(args, "scene", None) else None
    if getattr(args, "data", None):
        return read_dataset(args.data), scene
    if ds["kind"] == "file":
        return read_dataset(ds["path"]), scene
    if ds["kind"] == "blob":
        boundary = BlobBoundary(ds["r0"], ds["a"], ds["k"])
        return gen_blob_dataset(ds["seed"], ds["n_safe"], ds["n_unsafe"], boundary)
    if ds["kind"] == "lane":
        return gen_lane_dataset(ds["road_width"], None, tuple(ds["densities"]), ds["seed"],
                                ds["band"])
    world = default_world()
    if ds["pose_index"] is not None:
        poses = default_trajectory()
        pose = poses[ds["pose_index"] % len(poses)]
        offset = np.random.default_rng(ds["seed"]).random() * 2 * math.pi / ds["n_beams"]
        scan = simulate_scan(world, pose, ds["n_beams"], ds["max_range"], offset)
        return labeled_points(scan, ds["standoff"], ds["samples_per_beam"]), world
    return gen_world_dataset(world, None, ds["n_beams"], ds["max_range"], ds["standoff"],
                             ds["samples_per_beam"], seed=ds["seed"])


def _data_bbox(data: LabeledDataset, pad=0.05):
    pts = data.points()
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    margin = pad * np.maximum(hi - lo, 1e-9)
    return [[float(a), float(b)] for a, b in zip(lo - margin, hi + margin)]


def _scene_bbox(cfg, scene, data):
    if cfg["outputs"]["bbox"] is not None:
        return cfg["outputs"]["bbox"]
    if scene is not None and hasattr(scene, "bbox"):
        return [list(map(float, b)) for b in scene.bbox]
    if data is not None and data.points().shape[0]:
        return _data_bbox(data)
    raise ConfigError("no bounding box: set outputs.bbox or pass --scene/--data")


def _build_part(part, cfg, data, scene) -> GaussianLayer:
    kind = part["kind"]
    ds = cfg["dataset"]
    if kind == "explicit":
        return GaussianLayer(np.array(part["centers"], dtype=np.float64), np.array(part["sigmas"]))
    if kind == "grid":
        if part["bbox"] is not None:
            bbox = part["bbox"]
        elif ds["kind"] == "world" and ds["pose_index"] is not None:
            poses = default_trajectory()
            x, y = poses[ds["pose_index"] % len(poses)][:2]
            r = ds["max_range"]
            bbox = [[x - r, x + r], [y - r, y + r]]
        else:
            bbox = _scene_bbox(cfg, scene, data)
        shape = part["shape"] or list(GLOBAL_GRID)
        return grid_layer(bbox, tuple(shape), part["sigma"])
    if kind == "polyline":
        if not isinstance(scene, CurvedLane):
            raise ConfigError("a polyline first layer needs a lane scene")
        rule = part["sigma_rule"] or LANE_SIGMA_RULE
        centers, sigmas = polyline_centers(scene.centerline, part["count"], scene.road_width, rule)
        return GaussianLayer(centers, sigmas)
    if kind == "greedy":
        if data.n_unsafe == 0:
            raise EmptyUnsafeError("a greedy cover needs unsafe samples to cover")
        schedule = sorted(part["schedule"], reverse=True)
        return greedy_cover(data.unsafe, schedule, cfg["solver"]["kappa"], part["min_gain"])
    raise ConfigError(f"cannot build a first layer of kind {kind!r}")


def build_first_layer(cfg, data, scene) -> GaussianLayer:
    layer = dict(cfg["first_layer"])
    kind = layer["kind"]
    if kind == "auto":
        ds = cfg["dataset"]
        if isinstance(scene, CurvedLane):
            layer["kind"] = "polyline"
        elif isinstance(scene, ObstacleWorld):
            layer["kind"] = "grid"
            if layer["shape"] is None:
                layer["shape"] = list(LOCAL_GRID if ds["pose_index"] is not None else GLOBAL_GRID)
        else:
            layer["kind"] = "greedy"
        kind = layer["kind"]
    if kind == "union":
        parts = [_build_part(p, cfg, data, scene) for p in layer["parts"]]
        out = parts[0]
        for p in parts[1:]:
            out = out.merged(p)
        return out
    return _build_part(layer, cfg, data, scene)


def build_second_layer(cfg, n_c) -> PolyLayer:
    sl, form = cfg["second_layer"], cfg["formulation"]
    if form == "hyperplane":
        if any(sl[k] is not None for k in ("orders", "lambdas", "bias", "extra_basis")):
            raise ConfigError("the hyperplane formulation has no second layer to configure")
        return PolyLayer.identity(n_c)
    if form == "ellipsoid":
        orders, lambdas, bias = sl["orders"] or [2], sl["lambdas"] or [0.0], bool(sl["bias"])
        if orders != [2] or bias:
            raise ConfigError("the ellipsoid formulation needs orders [2] and no bias")
    else:
        orders = sl["orders"] or [1, 2]
        lambdas = sl["lambdas"] or [1.0]
        bias = True if sl["bias"] is None else sl["bias"]
    return PolyLayer.default(n_c, orders, lambdas, bias, sl["extra_basis"])


def run_fit(cfg, layer, poly, data) -> CuttingSurface:
    sv = cfg["solver"]
    kwargs = dict(kappa=sv["kappa"], override_cover=sv["override_cover"],
                  warm_start=sv["warm_start"], method=sv["method"], feas_tol=sv["feas_tol"],
                  max_iters=sv["max_iters"])
    form = cfg["formulation"]
    if form == "hyperplane":
        return fit_hyperplane(layer, data, **kwargs)
    if form == "ellipsoid":
        return fit_ellipsoid(layer, poly, data, **kwargs)
    return fit_multipoly(layer, poly, data, **kwargs)


# ---------------------------------------------------------------------------
# output helpers

def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def emit_summary(summary: dict, stream=None):
    """Flat ``key=value`` lines in insertion order."""
    stream = stream or sys.stdout
    for key, value in summary.items():
        stream.write(f"{key}={_fmt(value)}\n")


def _out_dir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ZbfError(f"cannot create output directory {out}: {exc}") from exc
    return out


def _model_surface(model: ZbfModel) -> CuttingSurface:
    form = Formulation(model.metadata.get("formulation", Formulation.MULTIPOLY.value))
    return CuttingSurface(np.asarray(model.alpha), np.zeros(0), form, float("nan"))


# ---------------------------------------------------------------------------
# subcommands

def cmd_gen(args):
    cfg = resolve_config(args)
    data, scene = load_data(cfg, args)
    out = _out_dir(args)
    write_dataset(out / cfg["outputs"]["dataset"], data)
    if scene is not None:
        write_scene(out / cfg["outputs"]["scene"], scene)
    emit_summary({"command": "gen", "kind": cfg["dataset"]["kind"], "seed": cfg["dataset"]["seed"],
                  "n_safe": data.n_safe, "n_unsafe": data.n_unsafe,
                  "dataset": str(out / cfg["outputs"]["dataset"])})
    return EXIT_OK


def cmd_cover(args):
    cfg = resolve_config(args)
    data, scene = load_data(cfg, args)
    layer = build_first_layer(cfg, data, scene)
    kappa = cfg["solver"]["kappa"]
    report = verify_cover(layer, CoverSpec.from_layer(layer, kappa), data.unsafe)
    out = _out_dir(args)
    doc = {"centers": layer.centers.tolist(), "sigmas": layer.bandwidths.tolist()}
    (out / cfg["outputs"]["layer"]).write_text(dump_document(doc))
    summary = {"command": "cover", "n_centers": layer.n_c,
               "n_bandwidths": int(np.unique(layer.bandwidths).size), "kappa": kappa,
               "covered": report.covered, "n_uncovered": len(report.uncovered_indices)}
    if report.uncovered_indices:
        summary["first_uncovered"] = report.uncovered_indices[0]
    emit_summary(summary)
    if not report.covered and not cfg["solver"]["override_cover"]:
        print(f"error: unsafe point {report.uncovered_indices[0]} is not covered", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_fit(args):
    cfg = resolve_config(args)
    data, scene = load_data(cfg, args)
    layer = build_first_layer(cfg, data, scene)
    poly = build_second_layer(cfg, layer.n_c)
    t0 = time.perf_counter()
    surface = run_fit(cfg, layer, poly, data)
    fit_ms = 1e3 * (time.perf_counter() - t0)
    model = ZbfModel.from_surface(layer, poly, surface, dataset=cfg["dataset"]["kind"],
                                  seed=cfg["dataset"]["seed"])
    out = _out_dir(args)
    model.save(out / cfg["outputs"]["model"])
    rep = misclassification_report(surface, layer, poly, data)
    emit_summary({"command": "fit", "formulation": surface.formulation.value,
                  "n_centers": layer.n_c, "n_features": poly.n_out,
                  "n_safe": data.n_safe, "n_unsafe": data.n_unsafe,
                  "objective": surface.objective_value, "slack_cost": rep.slack_cost,
                  "unsafe_violations": rep.unsafe_violations,
                  "safe_misclassified": rep.safe_misclassified,
                  "iterations": surface.iterations, "method": surface.method,
                  "fit_ms": round(fit_ms, 3), "model": str(out / cfg["outputs"]["model"])})
    return EXIT_OK


def _require_model(args) -> ZbfModel:
    if not args.model:
        raise ConfigError("--model is required for this command")
    try:
        return ZbfModel.load(args.model)
    except OSError as exc:
        raise FormatError(f"cannot read model {args.model}: {exc}") from exc


def cmd_eval(args):
    cfg = resolve_config(args)
    model = _require_model(args)
    data, _ = load_data(cfg, args)
    pts, labels = data.points(), data.labels()
    h = np.atleast_1d(model.value(pts)) if pts.shape[0] else np.zeros(0)
    cls = model.classify(pts) if pts.shape[0] else np.zeros(0, dtype=object)
    out = _out_dir(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(model.n_d)] + ["label", "h", "class"])
    for p, lab, hv, c in zip(pts, labels, h, cls):
        w.writerow([format(float(v), ".17g") for v in p] + [int(lab), format(float(hv), ".17g"),
                                                            c.value])
    (out / cfg["outputs"]["eval_csv"]).write_text(buf.getvalue())
    names = np.array([c.value for c in cls], dtype=object)
    emit_summary({"command": "eval", "n_points": int(pts.shape[0]),
                  "predicted_safe": int(np.sum(names == "safe")),
                  "predicted_boundary": int(np.sum(names == "boundary")),
                  "predicted_unsafe": int(np.sum(names == "unsafe")),
                  "unsafe_labelled_positive_h": int(np.sum((labels == 1) & (h > 1e-9))),
                  "safe_labelled_negative_h": int(np.sum((labels == 0) & (h < -1e-9))),
                  "eval_csv": str(out / cfg["outputs"]["eval_csv"])})
    return EXIT_OK


def cmd_contour(args):
    cfg = resolve_config(args)
    model = _require_model(args)
    data = scene = None
    if args.data or args.scene or cfg["dataset"]["kind"] != "file":
        data, scene = load_data(cfg, args)
    bbox = _scene_bbox(cfg, scene, data)
    res = cfg["outputs"]["resolution"]
    xs, ys, H = evaluate_grid(model, bbox, res)
    lines = marching_squares(xs, ys, H)
    out = _out_dir(args)
    emit_csv(xs, ys, H, out / cfg["outputs"]["grid_csv"])
    emit_svg(scene, data, lines, out / cfg["outputs"]["svg"], bbox=bbox,
             centers=model.gaussian.centers)
    emit_summary({"command": "contour", "resolution": res, "n_polylines": len(lines),
                  "n_vertices": int(sum(len(l) for l in lines)),
                  "svg": str(out / cfg["outputs"]["svg"]),
                  "grid_csv": str(out / cfg["outputs"]["grid_csv"])})
    return EXIT_OK


def cmd_verify(args):
    cfg = resolve_config(args)
    model = _require_model(args)
    data, _ = load_data(cfg, args)
    if data.n_d != model.n_d:
        raise DimensionError(f"data dimension {data.n_d} differs from model dimension {model.n_d}")
    rep = misclassification_report(_model_surface(model), model.gaussian, model.poly, data)
    mono = boundary_band_check(model, data)
    f_u = np.atleast_1d(model.cut_value(data.unsafe)) if data.n_unsafe else np.zeros(0)
    emit_summary({"command": "verify", "unsafe_violations": rep.unsafe_violations,
                  "min_unsafe_cut": float(f_u.min()) if f_u.size else float("nan"),
                  "safe_misclassified": rep.safe_misclassified, "slack_cost": rep.slack_cost,
                  "monotone_fraction": mono.fraction})
    if rep.unsafe_violations:
        print(f"error: {rep.unsafe_violations} unsafe sample(s) violate the hard constraint",
              file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _stats(times):
    ms = 1e3 * np.asarray(times)
    return float(np.median(ms)), float(np.percentile(ms, 95))


def bench_times(repetitions=MIN_REPETITIONS, seed=0):
    """Wall times (seconds) of lane, local and global multipoly synthesis."""
    lane_data, lane = gen_lane_dataset(1.0, seed=seed)
    world = default_world()
    poses = default_trajectory()
    scans = [labeled_points(simulate_scan(world, p)) for p in poses]
    global_data, _ = gen_world_dataset(world, seed=seed)
    lane_t, local_t, global_t = [], [], []
    for rep in range(repetitions):
        t0 = time.perf_counter()
        centers, sigmas = polyline_centers(lane.centerline, 7, lane.road_width)
        layer = GaussianLayer(centers, sigmas)
        fit_multipoly(layer, PolyLayer.default(layer.n_c), lane_data)
        lane_t.append(time.perf_counter() - t0)

        k = rep % len(poses)
        x, y = poses[k][:2]
        t0 = time.perf_counter()
        layer = grid_layer([(x - 4.0, x + 4.0), (y - 4.0, y + 4.0)], LOCAL_GRID)
        fit_multipoly(layer, PolyLayer.default(layer.n_c), scans[k])
        local_t.append(time.perf_counter() - t0)

        t0 = time.perf_counter()
        layer = grid_layer(world.bbox, GLOBAL_GRID)
        fit_multipoly(layer, PolyLayer.default(layer.n_c), global_data)
        global_t.append(time.perf_counter() - t0)
    return lane_t, local_t, global_t


def cmd_bench(args):
    cfg = resolve_config(args)
    reps = args.repetitions
    if reps < MIN_REPETITIONS:
        raise ConfigError(f"--repetitions must be at least {MIN_REPETITIONS}")
    lane_t, local_t, global_t = bench_times(reps, cfg["dataset"]["seed"])
    summary = {"command": "bench", "repetitions": reps}
    for name, ts in (("lane", lane_t), ("local", local_t), ("global", global_t)):
        med, p95 = _stats(ts)
        summary[f"{name}_median_ms"] = round(med, 3)
        summary[f"{name}_p95_ms"] = round(p95, 3)
    emit_summary(summary)
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "cover": cmd_cover, "fit": cmd_fit, "eval": cmd_eval,
            "contour": cmd_contour, "verify": cmd_verify, "bench": cmd_bench}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--seed", type=int, help="dataset seed (overrides the config)")
    common.add_argument("--out", default=".", metavar="DIR", help="output directory")
    common.add_argument("--formulation", choices=("hyperplane", "ellipsoid", "multipoly"))
    common.add_argument("--orders", metavar="LIST", help="polynomial orders, e.g. 1,2,3")
    common.add_argument("--lambda", dest="lam", metavar="LIST",
                        help="polynomial offsets, one or one per order")
    common.add_argument("--bias", choices=("on", "off"))
    common.add_argument("--override-cover", action="store_true",
                        help="fit even when the cover check fails (warns)")
    common.add_argument("--data", metavar="PATH", help="dataset CSV instead of generating one")
    common.add_argument("--scene", metavar="PATH", help="scene description JSON")
    common.add_argument("--model", metavar="PATH", help="model document (eval, contour, verify)")
    common.add_argument("--resolution", type=int, help="contour grid points per axis")
    common.add_argument("--repetitions", type=int, default=MIN_REPETITIONS,
                        help="bench repetitions (at least 10)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="zbf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"gen": "generate a labelled dataset and its scene",
             "cover": "build the Gaussian first layer and check the unsafe cover",
             "fit": "synthesise a barrier model",
             "eval": "evaluate a model on a dataset",
             "contour": "extract the zero level-set and write SVG/CSV artifacts",
             "verify": "check a model's hard constraints on a dataset",
             "bench": "time lane, local and global synthesis"}
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            return COMMANDS[args.command](args)
    except (ConfigError, ParameterError, MixedOrderError) as exc:
        code, exc_ = EXIT_CONFIG, exc
    except (FormatError, DimensionError, EmptyUnsafeError, FileNotFoundError) as exc:
        code, exc_ = EXIT_DATA, exc
    except NotCoveredError as exc:
        code, exc_ = EXIT_INFEASIBLE, exc
    except (SolverError, FloatingPointError, np.linalg.LinAlgError) as exc:
        code, exc_ = EXIT_NUMERICAL, exc
    except ZbfError as exc:
        code, exc_ = 1, exc
    print(f"error: {exc_}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
