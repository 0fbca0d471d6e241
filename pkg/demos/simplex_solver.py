"""The bundled simplex solvers on a small LP, next to the constructive certificates.

Run with ``python3 demos/simplex_solver.py``.
"""

import numpy as np

from skmzbf import (LinearProgram, constructive_hyperplane, gen_blob_dataset, greedy_cover,
                    solve_lp, verify_solution)
from skmzbf.synthesis import hyperplane_lp

# minimise -x - 2y subject to x + y <= 4, x + 3y <= 6, x, y >= 0
# (rows are written as A x >= b)
lp = LinearProgram(np.array([-1.0, -2.0]), np.array([[-1.0, -1.0], [-1.0, -3.0]]),
                   np.array([-4.0, -6.0]))
sol = solve_lp(lp)
print("status", sol.status.name, "x", sol.x, "objective", sol.objective_value)

# the hyperplane LP behind a barrier fit, solved from scratch and checked against
# the closed-form feasible point
data, _ = gen_blob_dataset(seed=1)
layer = greedy_cover(data.unsafe, [0.8, 0.4])
lp = hyperplane_lp(layer, data.unsafe)
cert = constructive_hyperplane(layer, data.unsafe)
sol = solve_lp(lp)
print(f"{lp.A.shape[0]} constraints over {lp.A.shape[1]} weights")
print(f"certificate objective {cert.sum():.4f}, violations {len(verify_solution(lp, cert, 1e-9))}")
print(f"LP optimum {sol.objective_value:.4f} after {sol.iterations} pivots")
