"""Synthetic scenes with exact ground truth, a 2-D LiDAR simulator, and dataset files."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DimensionError, FormatError, ParameterError
from .synthesis import LabeledDataset


@dataclass(frozen=True)
class BlobBoundary:
    """Star-convex unsafe blob ``r < r0 + a sin(k theta)`` around ``center``."""

    r0: float = 1.0
    a: float = 0.3
    k: int = 3
    center: tuple = (0.0, 0.0)
    bbox: tuple = ((-2.0, 2.0), (-2.0, 2.0))

    def radius(self, theta):
        return self.r0 + self.a * np.sin(self.k * theta)

    def is_unsafe(self, points) -> np.ndarray:
        p = np.atleast_2d(points) - np.asarray(self.center)
        r = np.hypot(p[:, 0], p[:, 1])
        return r < self.radius(np.arctan2(p[:, 1], p[:, 0]))

    def to_dict(self):
        return {"kind": "blob", "r0": self.r0, "a": self.a, "k": self.k,
                "center": list(self.center), "bbox": [list(b) for b in self.bbox]}


def polyline_distance(points, line) -> np.ndarray:
    """Euclidean distance from each point to a polyline."""
    p = np.atleast_2d(np.asarray(points, dtype=np.float64))
    a = line[:-1]
    seg = np.diff(line, axis=0)
    L2 = np.einsum("ij,ij->i", seg, seg)
    rel = p[:, None, :] - a[None, :, :]
    t = np.clip(np.einsum("ijk,jk->ij", rel, seg) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    closest = a[None] + t[..., None] * seg[None]
    return np.min(np.linalg.norm(p[:, None, :] - closest, axis=2), axis=1)


def default_centerline(n=41):
    """Gently curved road, about 13.5 m long."""
    x = np.linspace(0.0, 12.0, n)
    return np.column_stack([x, 2.0 * np.sin(x / 4.0)])


@dataclass(frozen=True)
class CurvedLane:
    """Corridor of half-width ``road_width`` around a centerline; outside is unsafe."""

    road_width: float
    centerline: np.ndarray = field(default_factory=default_centerline)
    band: float = 0.5

    def __post_init__(self):
        line = np.asarray(self.centerline, dtype=np.float64)
        if line.ndim != 2 or line.shape[0] < 2 or line.shape[1] != 2:
            raise ParameterError("centerline must be a (k >= 2, 2) array")
        if not np.linalg.norm(np.diff(line, axis=0), axis=1).sum() > 0:
            raise ParameterError("centerline has zero length")
        if not self.road_width > 0 or not self.band > 0:
            raise ParameterError("road width and band must be positive")
        object.__setattr__(self, "centerline", line)

    @property
    def bbox(self):
        pad = self.road_width + self.band
        lo = self.centerline.min(axis=0) - pad
        hi = self.centerline.max(axis=0) + pad
        return tuple(zip(lo.tolist(), hi.tolist()))

    def is_unsafe(self, points) -> np.ndarray:
        return polyline_distance(points, self.centerline) >= self.road_width

    def to_dict(self):
        return {"kind": "lane", "road_width": self.road_width, "band": self.band,
                "centerline": self.centerline.tolist()}


@dataclass(frozen=True)
class ObstacleWorld:
    """Polygonal obstacles (closed vertex loops) inside a bounding box."""

    polygons: tuple
    bbox: tuple = ((0.0, 8.0), (0.0, 14.0))

    def __post_init__(self):
        polys = tuple(np.asarray(p, dtype=np.float64) for p in self.polygons)
        for p in polys:
            if p.ndim != 2 or p.shape[0] < 3 or p.shape[1] != 2:
                raise ParameterError("each polygon needs at least three 2-D vertices")
        object.__setattr__(self, "polygons", polys)

    def edges(self) -> np.ndarray:
        """All obstacle edges as an (E, 2, 2) array of segment endpoints."""
        if not self.polygons:
            return np.zeros((0, 2, 2))
        return np.concatenate([np.stack([p, np.roll(p, -1, axis=0)], axis=1)
                               for p in self.polygons])

    def is_unsafe(self, points) -> np.ndarray:
        """Inside (or on) any obstacle, by even-odd ray crossing."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
        inside = np.zeros(pts.shape[0], dtype=bool)
        for poly in self.polygons:
            a, b = poly, np.roll(poly, -1, axis=0)
            x, y = pts[:, 0:1], pts[:, 1:2]
            cond = (a[:, 1] > y) != (b[:, 1] > y)
            with np.errstate(divide="ignore", invalid="ignore"):
                xc = a[:, 0] + (y - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
            inside |= (np.sum(cond & (x < xc), axis=1) % 2) == 1
        return inside

    def to_dict(self):
        return {"kind": "world", "bbox": [list(b) for b in self.bbox],
                "polygons": [p.tolist() for p in self.polygons]}


def default_world() -> ObstacleWorld:
    """Walled 8 m x 14 m room with four obstacles."""
    def rect(x0, y0, x1, y1):
        return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]

    return ObstacleWorld((
        rect(-0.3, -0.3, 8.3, 0.0), rect(-0.3, 14.0, 8.3, 14.3),
        rect(-0.3, 0.0, 0.0, 14.0), rect(8.0, 0.0, 8.3, 14.0),
        rect(2.0, 3.0, 3.5, 4.5),
        rect(5.0, 6.0, 6.5, 6.8),
        [(1.5, 9.0), (3.0, 8.5), (3.2, 10.2)],
        rect(4.5, 11.0, 6.0, 12.5),
    ))


def default_trajectory():
    """Collision-free poses (x, y, heading) through :func:`default_world`."""
    return [(1.0, 1.5, 0.4), (4.0, 2.0, 1.2), (6.5, 4.0, 1.6), (4.0, 5.5, 2.0),
            (1.2, 6.5, 1.4), (4.0, 8.0, 0.8), (6.8, 9.5, 1.6), (3.5, 11.5, 2.5),
            (1.5, 12.8, 0.0), (6.8, 13.2, -0.3)]


def scene_from_dict(doc: dict):
    kind = doc.get("kind")
    try:
        if kind == "blob":
            return BlobBoundary(doc.get("r0", 1.0), doc.get("a", 0.3), int(doc.get("k", 3)),
                                tuple(doc.get("center", (0.0, 0.0))),
                                tuple(tuple(b) for b in doc.get("bbox", ((-2, 2), (-2, 2)))))
        if kind == "lane":
            return CurvedLane(doc["road_width"], np.asarray(doc["centerline"]), doc.get("band", 0.5))
        if kind == "world":
            return ObstacleWorld(tuple(doc["polygons"]), tuple(tuple(b) for b in doc["bbox"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad {kind} scene description: {exc}") from exc
    raise FormatError(f"unknown scene kind {kind!r}")


def write_scene(path, scene):
    Path(path).write_text(json.dumps(scene.to_dict(), indent=1, sort_keys=True) + "\n")


def read_scene(path):
    try:
        return scene_from_dict(json.loads(Path(path).read_text()))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def _sample_box(rng, bbox, n):
    bbox = np.asarray(bbox, dtype=np.float64)
    return bbox[:, 0] + rng.random((n, bbox.shape[0])) * (bbox[:, 1] - bbox[:, 0])


def _rejection(rng, bbox, n, accept, batch=4096):
    out, got = [], 0
    while got < n:
        cand = _sample_box(rng, bbox, batch)
        cand = cand[accept(cand)]
        out.append(cand)
        got += cand.shape[0]
    return np.vstack(out)[:n] if out else np.zeros((0, len(bbox)))


def gen_blob_dataset(seed=0, n_safe=200, n_unsafe=100, boundary: BlobBoundary | None = None):
    """Uniform samples labelled by a star-convex blob: inside unsafe, outside safe."""
    if n_safe < 0 or n_unsafe < 0:
        raise ParameterError("sample counts must be non-negative")
    scene = boundary or BlobBoundary()
    rng = np.random.default_rng(seed)
    unsafe = _rejection(rng, scene.bbox, n_unsafe, scene.is_unsafe) if n_unsafe else np.zeros((0, 2))
    safe = (_rejection(rng, scene.bbox, n_safe, lambda p: ~scene.is_unsafe(p))
            if n_safe else np.zeros((0, 2)))
    return LabeledDataset(safe, unsafe, n_d=2), scene


def gen_lane_dataset(road_width=1.0, centerline=None, densities=(8.0, 8.0), seed=0, band=0.5):
    """Safe samples inside the lane corridor, unsafe ones in a band of width ``band`` outside it.

    ``densities`` are (safe, unsafe) samples per unit area.
    """
    scene = CurvedLane(road_width, default_centerline() if centerline is None else
                       np.asarray(centerline, dtype=np.float64), band)
    rng = np.random.default_rng(seed)
    box = np.asarray(scene.bbox)
    area = float(np.prod(box[:, 1] - box[:, 0]))
    n_total = int(math.ceil(max(densities) * area))
    pts = _sample_box(rng, box, n_total)
    d = polyline_distance(pts, scene.centerline)
    safe = pts[d < road_width]
    unsafe = pts[(d >= road_width) & (d <= road_width + band)]
    ratio_s = min(1.0, densities[0] / max(densities))
    ratio_u = min(1.0, densities[1] / max(densities))
    safe = safe[: int(round(ratio_s * safe.shape[0]))]
    unsafe = unsafe[: int(round(ratio_u * unsafe.shape[0]))]
    return LabeledDataset(safe, unsafe, n_d=2), scene


@dataclass
class LidarScan:
    """Beams in the robot frame: ``angles`` relative to ``heading``."""

    pose: np.ndarray
    heading: float
    angles: np.ndarray
    ranges: np.ndarray
    hits: np.ndarray
    max_range: float

    def endpoints(self) -> np.ndarray:
        world = self.heading + self.angles
        return self.pose + self.ranges[:, None] * np.column_stack([np.cos(world), np.sin(world)])


def _cast(origin, dirs, edges, max_range):
    """Nearest ray-segment intersection distance per direction (inf on a miss)."""
    if edges.shape[0] == 0:
        return np.full(dirs.shape[0], np.inf)
    p, q = edges[:, 0], edges[:, 1]
    s = q - p
    w = p - origin
    cross = lambda u, v: u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]
    den = cross(dirs[:, None, :], s[None, :, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross(w[None, :, :], s[None, :, :]) / den
        u = cross(w[None, :, :], dirs[:, None, :]) / den
    ok = (np.abs(den) > 1e-15) & (t > 1e-12) & (u >= 0.0) & (u <= 1.0)
    t = np.where(ok, t, np.inf)
    best = t.min(axis=1)
    return np.where(best <= max_range, best, np.inf)


def simulate_scan(world: ObstacleWorld, pose, n_beams=72, max_range=4.0,
                  angle_offset=0.0) -> LidarScan:
    """Ray-cast ``n_beams`` evenly spaced beams from ``pose = (x, y, heading)``.

    Beam angles relative to the heading are ``-pi + angle_offset + 2 pi i / n_beams``.
    """
    x, y, heading = map(float, pose)
    if n_beams < 8:
        raise ParameterError("at least 8 beams are required")
    if not max_range > 0:
        raise ParameterError("max range must be positive")
    origin = np.array([x, y])
    if world.is_unsafe(origin)[0]:
        raise ParameterError(f"pose ({x}, {y}) lies inside an obstacle")
    angles = -math.pi + float(angle_offset) + 2 * math.pi * np.arange(n_beams) / n_beams
    world_ang = heading + angles
    dirs = np.column_stack([np.cos(world_ang), np.sin(world_ang)])
    dist = _cast(origin, dirs, world.edges(), max_range)
    hits = np.isfinite(dist)
    return LidarScan(origin, heading, angles, np.where(hits, dist, max_range), hits, float(max_range))


def labeled_points(scan: LidarScan, standoff=0.2, samples_per_beam=3) -> LabeledDataset:
    """Hit endpoints are unsafe; free-space samples along each beam are safe.

    On a hit beam of range d the safe samples sit at ranges ``(1 - standoff) d i / n``,
    i = 1..n; on a miss they run up to the maximum range.
    """
    if not 0 <= standoff < 1:
        raise ParameterError("standoff must lie in [0, 1)")
    world = scan.heading + scan.angles
    dirs = np.column_stack([np.cos(world), np.sin(world)])
    frac = np.arange(1, samples_per_beam + 1) / samples_per_beam
    reach = np.where(scan.hits, (1.0 - standoff) * scan.ranges, scan.max_range)
    r = reach[:, None] * frac[None, :]
    safe = (scan.pose + r[..., None] * dirs[:, None, :]).reshape(-1, 2)
    unsafe = scan.endpoints()[scan.hits]
    return LabeledDataset(safe, unsafe, n_d=2)


def world_scans(world: ObstacleWorld | None = None, poses=None, n_beams=72, max_range=4.0,
                seed=None):
    """One scan per pose. A seed draws each scan's start angle within one beam spacing."""
    world = world or default_world()
    poses = default_trajectory() if poses is None else poses
    if seed is None:
        offsets = np.zeros(len(poses))
    else:
        offsets = np.random.default_rng(seed).random(len(poses)) * 2 * math.pi / n_beams
    return [simulate_scan(world, p, n_beams, max_range, off) for p, off in zip(poses, offsets)]


def gen_world_dataset(world: ObstacleWorld | None = None, poses=None, n_beams=72,
                      max_range=4.0, standoff=0.2, samples_per_beam=3, seed=None):
    """Aggregate labelled LiDAR samples over a trajectory.

    Returns (dataset, world).
    """
    world = world or default_world()
    sets = [labeled_points(scan, standoff, samples_per_beam)
            for scan in world_scans(world, poses, n_beams, max_range, seed)]
    data = LabeledDataset(np.vstack([d.safe for d in sets]), np.vstack([d.unsafe for d in sets]),
                          n_d=2)
    return data, world


def write_dataset(path, data: LabeledDataset):
    """CSV with header ``x1,...,xn,label`` (0 safe, 1 unsafe), 17 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"x{i + 1}" for i in range(data.n_d)] + ["label"])
    for pts, lab in ((data.safe, 0), (data.unsafe, 1)):
        for p in pts:
            w.writerow([format(float(v), ".17g") for v in p] + [lab])
    Path(path).write_text(buf.getvalue())


def read_dataset(path) -> LabeledDataset:
    text = Path(path).read_text()
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise FormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    n_d = len(header) - 1
    if n_d < 1 or header[-1] != "label" or header[:-1] != [f"x{i + 1}" for i in range(n_d)]:
        raise FormatError(f"{path}:1: header must be x1,...,xn,label")
    pts, labels = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != n_d + 1:
            raise FormatError(f"{path}:{lineno}: expected {n_d + 1} columns, got {len(row)}")
        try:
            vals = [float(v) for v in row[:-1]]
        except ValueError as exc:
            raise FormatError(f"{path}:{lineno}: {exc}") from exc
        if not all(math.isfinite(v) for v in vals):
            raise FormatError(f"{path}:{lineno}: non-finite coordinate")
        if row[-1].strip() not in ("0", "1"):
            raise FormatError(f"{path}:{lineno}: label must be 0 or 1, got {row[-1]!r}")
        pts.append(vals)
        labels.append(int(row[-1]))
    if not pts:
        return LabeledDataset(np.zeros((0, n_d)), np.zeros((0, n_d)), n_d=n_d)
    return LabeledDataset.from_labeled(np.array(pts), np.array(labels))

