"""Barriers for a lane-keeping scene and a 2-D lidar scan of a polygon world.

Run with ``python3 demos/lane_and_world.py [outdir]``.
"""

import sys
import time
from pathlib import Path

from skmzbf import (GaussianLayer, PolyLayer, ZbfModel, emit_svg, extract_zero_levelset,
                    fit_multipoly, gen_lane_dataset, gen_world_dataset, grid_layer,
                    polyline_centers, verify_cover, CoverSpec)

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")

# lane: centers placed along the road centerline
data, lane = gen_lane_dataset(1.0, seed=0)
centers, sigmas = polyline_centers(lane.centerline, 7, lane.road_width)
layer = GaussianLayer(centers, sigmas)
poly = PolyLayer.default(layer.n_c, orders=(1, 2))
t0 = time.perf_counter()
surf = fit_multipoly(layer, poly, data)
print(f"lane: {data.n_safe + data.n_unsafe} samples, fit in {1e3 * (time.perf_counter() - t0):.1f} ms")
model = ZbfModel.from_surface(layer, poly, surf)
emit_svg(lane, data, extract_zero_levelset(model, lane.bbox), out / "lane.svg", centers=centers)

# world: lidar hits and free-space samples, covered by a regular grid of centers
data, world = gen_world_dataset(seed=0)
layer = grid_layer(world.bbox, (5, 8))
report = verify_cover(layer, CoverSpec.from_layer(layer, 1.0), data.unsafe)
print(f"world: {data.n_unsafe} lidar hits, {len(report.uncovered_indices)} outside the cover")
poly = PolyLayer.default(layer.n_c, orders=(1, 2))
t0 = time.perf_counter()
model = ZbfModel.from_surface(layer, poly, fit_multipoly(layer, poly, data))
print(f"world: {layer.n_c} centers, fit in {time.perf_counter() - t0:.2f} s")
emit_svg(world, data, extract_zero_levelset(model, world.bbox), out / "world.svg",
         centers=layer.centers)
print(f"figures written to {out}")
