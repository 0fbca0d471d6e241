"""Grid evaluation, zero level-set extraction and static SVG/CSV artifacts."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .errors import ParameterError, ZbfError


def thread_cap(default=None) -> int:
    """Worker count for grid evaluation, capped by the ZBF_THREADS environment variable."""
    n = default or os.cpu_count() or 1
    env = os.environ.get("ZBF_THREADS")
    if env:
        try:
            n = min(n, max(1, int(env)))
        except ValueError:
            pass
    return max(1, n)


def evaluate_grid(model, bbox, resolution, threads=None):
    """Pre-outer barrier values on a ``resolution x resolution`` lattice covering ``bbox``.

    Returns (xs, ys, H) with ``H[iy, ix] = h(xs[ix], ys[iy])``.
    """
    (x0, x1), (y0, y1) = np.asarray(bbox, dtype=np.float64)
    nx, ny = (resolution, resolution) if np.isscalar(resolution) else resolution
    xs, ys = np.linspace(x0, x1, int(nx)), np.linspace(y0, y1, int(ny))
    rows = np.array_split(np.arange(ys.size), min(ys.size, 4 * thread_cap(threads)))
    rows = [r for r in rows if r.size]

    def work(idx):
        gx, gy = np.meshgrid(xs, ys[idx])
        return model.pre_value(np.column_stack([gx.ravel(), gy.ravel()])).reshape(idx.size, xs.size)

    n = thread_cap(threads)
    if n == 1:
        parts = [work(r) for r in rows]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            parts = list(pool.map(work, rows))
    return xs, ys, np.vstack(parts)


def _crossing(p0, p1, v0, v1):
    t = v0 / (v0 - v1)
    return p0 + t * (p1 - p0)


def marching_squares(xs, ys, H, level=0.0):
    """Polylines where ``H`` crosses ``level``, with linear interpolation on cell edges.

    Saddle cells are resolved by the mean of their corners. Open chains (ending
    on the grid border) come first, closed loops repeat their first vertex.
    """
    H = np.asarray(H, dtype=np.float64) - level
    ny, nx = H.shape
    pos = H > 0
    points = {}

    def edge_point(key):
        if key not in points:
            kind, ix, iy = key
            if kind == "h":
                p0, p1 = np.array([xs[ix], ys[iy]]), np.array([xs[ix + 1], ys[iy]])
                v0, v1 = H[iy, ix], H[iy, ix + 1]
            else:
                p0, p1 = np.array([xs[ix], ys[iy]]), np.array([xs[ix], ys[iy + 1]])
                v0, v1 = H[iy, ix], H[iy + 1, ix]
            points[key] = _crossing(p0, p1, v0, v1)
        return key

    segments = []
    for iy in range(ny - 1):
        for ix in range(nx - 1):
            a, b = pos[iy, ix], pos[iy, ix + 1]
            c, d = pos[iy + 1, ix + 1], pos[iy + 1, ix]
            if a == b == c == d:
                continue
            bottom, right = ("h", ix, iy), ("v", ix + 1, iy)
            top, left = ("h", ix, iy + 1), ("v", ix, iy)
            cut = [e for e, (s0, s1) in ((bottom, (a, b)), (right, (b, c)),
                                         (top, (c, d)), (left, (d, a))) if s0 != s1]
            if len(cut) == 2:
                segments.append((edge_point(cut[0]), edge_point(cut[1])))
                continue
            centre = H[iy, ix] + H[iy, ix + 1] + H[iy + 1, ix + 1] + H[iy + 1, ix]
            for e in cut:
                edge_point(e)
            if (centre > 0) == a:
                segments += [(bottom, right), (top, left)]
            else:
                segments += [(left, bottom), (right, top)]

    incident = {}
    for k, (e0, e1) in enumerate(segments):
        incident.setdefault(e0, []).append(k)
        incident.setdefault(e1, []).append(k)
    used = np.zeros(len(segments), dtype=bool)

    def walk(start_edge, k):
        chain = [start_edge]
        edge = start_edge
        while k is not None and not used[k]:
            used[k] = True
            e0, e1 = segments[k]
            edge = e1 if e0 == edge else e0
            chain.append(edge)
            k = next((j for j in incident[edge] if not used[j]), None)
        return chain

    chains = []
    ends = [e for e, segs in incident.items() if len(segs) == 1]
    for e in ends:
        k = incident[e][0]
        if not used[k]:
            chains.append(walk(e, k))
    for k in range(len(segments)):
        if not used[k]:
            chains.append(walk(segments[k][0], k))
    return [np.array([points[e] for e in chain]) for chain in chains]


def extract_zero_levelset(model, bbox, grid_resolution=128, threads=None):
    """Zero level-set of the barrier as a list of (k, 2) vertex arrays."""
    if grid_resolution < 16:
        raise ParameterError("grid resolution must be at least 16 per axis")
    xs, ys, H = evaluate_grid(model, bbox, grid_resolution, threads)
    return marching_squares(xs, ys, H)


def emit_csv(xs, ys, H, path):
    """Grid values as CSV with header ``x,y,h``; x varies fastest."""
    lines = ["x,y,h"]
    for iy, y in enumerate(ys):
        fy = format(float(y), ".17g")
        lines += [f"{format(float(x), '.17g')},{fy},{format(float(H[iy, ix]), '.17g')}"
                  for ix, x in enumerate(xs)]
    try:
        Path(path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise ZbfError(f"cannot write {path}: {exc}") from exc


def _fmt(v):
    s = f"{float(v):.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _scene_shapes(scene):
    """SVG elements (in data coordinates) for a ground-truth scene."""
    out = []
    kind = scene.to_dict()["kind"] if scene is not None else None
    if kind == "blob":
        th = np.linspace(0.0, 2 * np.pi, 241)
        r = scene.radius(th)
        pts = np.column_stack([scene.center[0] + r * np.cos(th), scene.center[1] + r * np.sin(th)])
        out.append(f'<polyline points="{_pts(pts)}" fill="none" stroke="black" '
                   f'stroke-dasharray="0.06,0.04" stroke-width="0.02"/>')
    elif kind == "lane":
        out.append(f'<polyline points="{_pts(scene.centerline)}" fill="none" stroke="gray" '
                   f'stroke-dasharray="0.3,0.2" stroke-width="0.05"/>')
    elif kind == "world":
        for poly in scene.polygons:
            out.append(f'<polygon points="{_pts(poly)}" fill="#bbbbbb" stroke="#555555" '
                       f'stroke-width="0.02"/>')
    return out


def _pts(arr):
    return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in np.asarray(arr))


def emit_svg(scene, dataset, contours, path, bbox=None, centers=None, width=600):
    """Static SVG 1.1 figure: scene, labelled samples, centers and zero level-set."""
    if bbox is None:
        if scene is not None and hasattr(scene, "bbox"):
            bbox = scene.bbox
        else:
            pts = dataset.points()
            bbox = list(zip(pts.min(axis=0), pts.max(axis=0)))
    (x0, x1), (y0, y1) = np.asarray(bbox, dtype=np.float64)
    w, h = x1 - x0, y1 - y0
    height = int(round(width * h / w))
    mark = 0.008 * max(w, h)
    body = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" '
        f'height="{height}" viewBox="{_fmt(x0)} {_fmt(-y1)} {_fmt(w)} {_fmt(h)}">',
        f'<rect x="{_fmt(x0)}" y="{_fmt(-y1)}" width="{_fmt(w)}" height="{_fmt(h)}" fill="white"/>',
        '<g transform="scale(1,-1)">',
    ]
    body += _scene_shapes(scene)
    if dataset is not None:
        body.append(f'<g stroke="#1f77b4" stroke-width="{_fmt(mark / 2)}">')
        for x, y in dataset.safe:
            body.append(f'<path d="M{_fmt(x - mark)},{_fmt(y)}h{_fmt(2 * mark)}'
                        f'M{_fmt(x)},{_fmt(y - mark)}v{_fmt(2 * mark)}"/>')
        body.append("</g>")
        body.append(f'<g fill="none" stroke="#ff7f0e" stroke-width="{_fmt(mark / 2)}">')
        for x, y in dataset.unsafe:
            body.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(mark)}"/>')
        body.append("</g>")
    if centers is not None:
        body.append('<g fill="black">')
        for x, y in np.asarray(centers)[:, :2]:
            body.append(f'<circle cx="{_fmt(x)}" cy="{_fmt(y)}" r="{_fmt(1.5 * mark)}"/>')
        body.append("</g>")
    for line in contours:
        body.append(f'<polyline points="{_pts(line)}" fill="none" stroke="#e6c300" '
                    f'stroke-width="{_fmt(mark)}" stroke-dasharray="{_fmt(4 * mark)},{_fmt(2 * mark)}"/>')
    body += ["</g>", "</svg>"]
    try:
        Path(path).write_text("\n".join(body) + "\n")
    except OSError as exc:
        raise ZbfError(f"cannot write {path}: {exc}") from exc
