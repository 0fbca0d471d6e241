"""Fit a barrier around a star-shaped unsafe blob and compare the three formulations.

Run with ``python3 demos/blob_barrier.py [outdir]``; an SVG of the multipoly
level-set is written to ``outdir`` (default: the current directory).
"""

import sys
from pathlib import Path

import numpy as np

from skmzbf import (PolyLayer, ZbfModel, emit_svg, extract_zero_levelset, fit_ellipsoid,
                    fit_hyperplane, fit_multipoly, gen_blob_dataset, greedy_cover,
                    misclassification_report)

out = Path(sys.argv[1] if len(sys.argv) > 1 else ".")
data, scene = gen_blob_dataset(seed=0)
print(f"{data.n_safe} safe and {data.n_unsafe} unsafe samples")

# Gaussian first layer: greedy cover of the unsafe samples, coarse radius then fine
layer = greedy_cover(data.unsafe, [0.8, 0.4])
print(f"greedy cover picked {layer.n_c} centers")

quad = PolyLayer.quadratic(layer.n_c)
multi = PolyLayer.default(layer.n_c, orders=(1, 2, 3))
fits = [("hyperplane", PolyLayer.identity(layer.n_c), fit_hyperplane(layer, data)),
        ("ellipsoid", quad, fit_ellipsoid(layer, quad, data)),
        ("multipoly", multi, fit_multipoly(layer, multi, data))]

for name, poly, surf in fits:
    rep = misclassification_report(surf, layer, poly, data)
    model = ZbfModel.from_surface(layer, poly, surf)
    worst = np.max(model.value(data.unsafe))
    print(f"{name:>10}: objective {surf.objective_value:9.4f}, "
          f"{rep.safe_misclassified:3d} safe samples misclassified, max h on unsafe {worst:+.2e}")

name, poly, surf = fits[-1]
model = ZbfModel.from_surface(layer, poly, surf)
contours = extract_zero_levelset(model, scene.bbox, grid_resolution=200)
emit_svg(scene, data, contours, out / "blob_barrier.svg", centers=layer.centers)
print(f"zero level-set: {len(contours)} polyline(s), written to {out / 'blob_barrier.svg'}")
print("gradient at the origin:", model.gradient(np.zeros(2)))
