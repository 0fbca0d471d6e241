"""Zeroing barrier functions from labelled safe/unsafe samples.

A Gaussian radial-basis layer lifts points into a unit cube, a polynomial
layer adds curvature, and linear programs place the cutting surface with hard
constraints on unsafe samples and soft constraints on safe ones.
"""

from .contour import emit_csv, emit_svg, evaluate_grid, extract_zero_levelset, marching_squares
from .covering import (CoverReport, CoverSpec, greedy_cover, grid_centers, grid_layer,
                       polyline_centers, verify_cover)
from .datagen import (BlobBoundary, CurvedLane, LidarScan, ObstacleWorld, gen_blob_dataset,
                      gen_lane_dataset, gen_world_dataset, labeled_points, read_dataset,
                      simulate_scan, write_dataset)
from .errors import (ConfigError, DimensionError, EmptyUnsafeError, FormatError, MixedOrderError,
                     NotCoveredError, ParameterError, SolverError, ZbfError)
from .kernel import (EmbeddingReport, GaussianLayer, check_embedding, gauss_kernel, kernel_map,
                     kernel_map_jacobian)
from .lp import (BoundedSolution, LinearProgram, LpSolution, LpStatus, solve_bounded, solve_lp,
                 verify_solution)
from .model import (Classification, OuterFunction, OuterKind, ZbfModel, boundary_band_check,
                    classify, deserialize, serialize, zbf_gradient, zbf_value)
from .poly import (PolyKernel, PolyLayer, QuadraticForm, expand_quadratic, poly2_map, poly_map,
                   poly_map_jacobian)
from .synthesis import (CuttingSurface, Formulation, LabeledDataset, constructive_hyperplane,
                        constructive_hypersphere, fit_ellipsoid, fit_hyperplane, fit_multipoly,
                        misclassification_report)

__version__ = "0.1.0"
