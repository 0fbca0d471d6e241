"""Dense revised-simplex solver for ``min c.x  s.t.  A x >= b,  x >= lower``.

The LPs produced by barrier synthesis are small and fully dense, so the basis
inverse is kept explicitly, updated by rank-one pivots and rebuilt from an LU
factorization at a fixed interval. Pricing is Dantzig's rule; after a long run
of degenerate pivots the solver switches to Bland's rule, which cannot cycle.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg.blas import dger

from .errors import DimensionError, FormatError, ParameterError, SolverError

logger = logging.getLogger(__name__)

REFACTOR_EVERY = 64
PIVOT_TOL = 1e-9
OPT_TOL = 1e-9
DEGENERATE_STEP = 1e-12


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITER_LIMIT = "iter_limit"


@dataclass
class LinearProgram:
    """Inequality-form LP. ``lower`` defaults to zeros (all synthesis variables are >= 0)."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64).ravel()
        n = self.c.size
        self.A = np.asarray(self.A, dtype=np.float64).reshape(-1, n)
        self.b = np.asarray(self.b, dtype=np.float64).ravel()
        if self.b.size != self.A.shape[0]:
            raise DimensionError(f"A has {self.A.shape[0]} rows but b has {self.b.size}")
        self.lower = (np.zeros(n) if self.lower is None
                      else np.asarray(self.lower, dtype=np.float64).ravel())
        if self.lower.size != n:
            raise DimensionError("one lower bound per variable is required")
        for name in ("c", "A", "b", "lower"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ParameterError(f"LP field {name} must be finite")

    @property
    def n(self) -> int:
        return self.c.size

    @property
    def m(self) -> int:
        return self.b.size


@dataclass
class LpSolution:
    status: LpStatus
    x: np.ndarray
    objective_value: float
    iterations: int
    basis: tuple = field(default=(), repr=False)

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


@dataclass
class ViolationReport:
    rows: list = field(default_factory=list)
    bounds: list = field(default_factory=list)

    @property
    def feasible(self) -> bool:
        return not self.rows and not self.bounds

    def __len__(self):
        return len(self.rows) + len(self.bounds)


def verify_solution(lp: LinearProgram, sol, tol: float = 1e-9) -> ViolationReport:
    """List rows with ``A x - b < -tol`` and variables below ``lower - tol``.

    ``sol`` may be an :class:`LpSolution` or a bare point.
    """
    x = np.asarray(getattr(sol, "x", sol), dtype=np.float64)
    resid = lp.A @ x - lp.b
    rows = [(int(i), float(resid[i])) for i in np.flatnonzero(resid < -tol)]
    below = x - lp.lower
    bounds = [(int(j), float(x[j])) for j in np.flatnonzero(below < -tol)]
    return ViolationReport(rows, bounds)


class _Simplex:
    """Working state for one solve. Column layout: structural | surplus | artificial."""

    def __init__(self, A, b, c, feas_tol, max_iters):
        self.A = A
        self.b = b
        self.c = c
        self.m, self.n = A.shape
        self.feas_tol = feas_tol
        self.max_iters = max_iters
        self.iterations = 0
        self.n_total = self.n + 2 * self.m

    def column(self, j):
        n, m = self.n, self.m
        if j < n:
            return self.A[:, j]
        e = np.zeros(m)
        if j < n + m:
            e[j - n] = -1.0
        else:
            e[j - n - m] = 1.0
        return e

    def refactor(self):
        B = np.column_stack([self.column(j) for j in self.basis]) if self.m else np.zeros((0, 0))
        if self.m == 0:
            self.Binv = B
            self.xB = np.zeros(0)
            return
        lu, piv = sla.lu_factor(B, check_finite=False)
        diag = np.abs(np.diag(lu))
        if diag.min() <= 1e-13 * max(1.0, diag.max()):
            raise SolverError(f"basis matrix became singular (min |U_ii| = {diag.min():.3e})")
        self.Binv = np.asfortranarray(sla.lu_solve((lu, piv), np.eye(self.m), check_finite=False))
        self.xB = sla.lu_solve((lu, piv), self.b, check_finite=False)
        self.since_refactor = 0

    def reduced_costs(self, cost, allow_artificial):
        y = cost[self.basis] @ self.Binv
        d = np.empty(self.n_total)
        d[: self.n] = cost[: self.n] - self.A.T @ y
        d[self.n : self.n + self.m] = cost[self.n : self.n + self.m] + y
        d[self.n + self.m :] = cost[self.n + self.m :] - y if allow_artificial else np.inf
        d[self.basis] = np.inf
        return d

    def pivot(self, r, q, u):
        row = self.Binv[r] / u[r]
        u = u.copy()
        u[r] = 0.0
        self.Binv = dger(-1.0, u, row, a=self.Binv, overwrite_a=True)
        self.Binv[r] = row
        self.basis[r] = q
        self.since_refactor += 1
        if self.since_refactor >= REFACTOR_EVERY:
            self.refactor()

    def run(self, cost, allow_artificial):
        """Primal simplex from the current feasible basis. Returns an LpStatus."""
        bland = False
        degenerate_run = 0
        degenerate_limit = 10 * (self.n + self.m)
        while True:
            if self.iterations >= self.max_iters:
                return LpStatus.ITER_LIMIT
            d = self.reduced_costs(cost, allow_artificial)
            if bland:
                cand = np.flatnonzero(d < -OPT_TOL)
                if cand.size == 0:
                    return LpStatus.OPTIMAL
                q = int(cand[0])
            else:
                q = int(np.argmin(d))
                if not d[q] < -OPT_TOL:
                    return LpStatus.OPTIMAL
            u = self.Binv @ self.column(q)
            tol = PIVOT_TOL * max(1.0, float(np.abs(u).max(initial=0.0)))
            rows = np.flatnonzero(u > tol)
            if rows.size == 0:
                return LpStatus.UNBOUNDED
            ratios = np.maximum(self.xB[rows], 0.0) / u[rows]
            theta = ratios.min()
            ties = rows[ratios <= theta + 1e-12 * (1.0 + theta)]
            if bland:
                r = int(ties[np.argmin(self.basis[ties])])
            else:
                r = int(ties[np.argmax(u[ties])])
            theta = max(self.xB[r], 0.0) / u[r]
            self.xB -= theta * u
            self.xB[r] = theta
            self.pivot(r, q, u)
            self.iterations += 1
            if theta <= DEGENERATE_STEP:
                degenerate_run += 1
                if not bland and degenerate_run > degenerate_limit:
                    logger.debug("switching to Bland's rule after %d degenerate pivots",
                                 degenerate_run)
                    bland = True
            else:
                degenerate_run = 0

    def drive_out_artificials(self):
        art0 = self.n + self.m
        for r in range(self.m):
            if self.basis[r] < art0:
                continue
            row = self.Binv[r]
            entries = np.concatenate([row @ self.A, -row])
            entries[self.basis[self.basis < art0]] = 0.0
            q = int(np.argmax(np.abs(entries)))
            if abs(entries[q]) <= 1e-9:
                continue  # redundant row; the artificial stays basic at zero
            u = self.Binv @ self.column(q)
            theta = self.xB[r] / u[r]
            self.xB -= theta * u
            self.xB[r] = theta
            self.pivot(r, q, u)


def _singleton_columns(A, rows):
    """(row, column) pairs where a structural column's only nonzero is positive and in ``rows``.

    Such a column can start basic in place of an artificial variable.
    """
    nz = A != 0
    single = np.flatnonzero(nz.sum(axis=0) == 1)
    if single.size == 0:
        return []
    owner = np.argmax(nz[:, single], axis=0)
    pairs, taken = [], set()
    for j, i in zip(single.tolist(), owner.tolist()):
        if rows[i] and A[i, j] > 0 and i not in taken:
            pairs.append((i, j))
            taken.add(i)
    return pairs


def _crash_basis(A, b, c, x, feas_tol):
    """Turn a feasible point into a basic feasible solution (basis of the surplus form).

    Moves along null-space directions of the active columns, never increasing
    the objective, until the active columns are independent. Returns None when
    the point is infeasible or the purification breaks down.
    """
    m, n = A.shape
    x = np.maximum(np.asarray(x, dtype=np.float64), 0.0)
    s = A @ x - b
    stol = feas_tol * (1.0 + np.abs(b))
    if np.any(s < -stol):
        return None
    for _ in range(n + m + 1):
        supp = np.flatnonzero(x > 1e-12)
        tight = np.flatnonzero(s <= stol)
        sub = A[np.ix_(tight, supp)]
        if supp.size == 0:
            break
        if tight.size:
            _, sv, vt = np.linalg.svd(sub, full_matrices=True)
            rank = int(np.sum(sv > 1e-10 * max(1.0, sv[0] if sv.size else 0.0)))
        else:
            vt, rank = np.eye(supp.size), 0
        if rank == supp.size:
            break
        dx = vt[-1]
        if c[supp] @ dx > 0 or (abs(c[supp] @ dx) <= 1e-14 and dx.min() >= 0):
            dx = -dx
        ds = A[:, supp] @ dx
        ds[tight] = 0.0
        steps = []
        neg = dx < -1e-14
        if neg.any():
            steps.append(np.min(x[supp][neg] / -dx[neg]))
        negs = ds < -1e-14
        if negs.any():
            steps.append(np.min(np.maximum(s[negs], 0.0) / -ds[negs]))
        if not steps:
            return None
        t = min(steps)
        x[supp] += t * dx
        x[np.abs(x) <= 1e-12] = 0.0
        x = np.maximum(x, 0.0)
        s = A @ x - b
    else:
        return None
    supp = np.flatnonzero(x > 1e-12)
    tight = np.flatnonzero(s <= stol)
    if supp.size > tight.size:
        return None
    if supp.size:
        _, _, perm = sla.qr(A[np.ix_(tight, supp)].T, pivoting=True, mode="economic")
        keep = set(tight[perm[: supp.size]].tolist())
    else:
        keep = set()
    surplus = [n + i for i in range(m) if i not in keep]
    return np.array(list(supp) + surplus, dtype=np.int64)


def solve_lp(lp: LinearProgram, feas_tol: float = 1e-9, max_iters: int | None = None,
             x0=None) -> LpSolution:
    """Solve ``lp`` to optimality with the two-phase revised simplex method.

    Args:
        lp: the problem.
        feas_tol: phase-1 infeasibility threshold.
        max_iters: pivot budget across both phases; default ``50 * (n + m)``.
        x0: optional feasible point used to build the starting basis, skipping
            phase 1. Ignored (with a debug message) if it is not feasible.
    """
    n, m = lp.n, lp.m
    if max_iters is None:
        max_iters = 50 * (n + m)
    shift = lp.lower
    b = lp.b - lp.A @ shift
    A = lp.A
    sx = _Simplex(A, b, lp.c, feas_tol, max_iters)

    cost2 = np.concatenate([lp.c, np.zeros(2 * m)])
    basis = None
    if x0 is not None:
        basis = _crash_basis(A, b, lp.c, np.asarray(x0, dtype=np.float64) - shift, feas_tol)
        if basis is None:
            logger.debug("warm-start point rejected; falling back to phase 1")
    if basis is not None:
        sx.basis = basis
        sx.refactor()
        if np.any(sx.xB < -feas_tol * (1.0 + np.abs(b).max(initial=0.0))):
            basis = None
    if basis is None:
        need = b > 0
        sx.basis = np.where(need, n + m + np.arange(m), n + np.arange(m)).astype(np.int64)
        for i, j in _singleton_columns(A, need):
            sx.basis[i] = j
            need[i] = False
        sx.refactor()
        if need.any():
            cost1 = np.concatenate([np.zeros(n + m), np.ones(m)])
            status = sx.run(cost1, allow_artificial=True)
            if status is LpStatus.ITER_LIMIT:
                return _finish(lp, sx, status, shift)
            infeas = float(np.sum(np.maximum(sx.xB[sx.basis >= n + m], 0.0)))
            if infeas > feas_tol:
                return _finish(lp, sx, LpStatus.INFEASIBLE, shift)
            sx.drive_out_artificials()
    status = sx.run(cost2, allow_artificial=False)
    return _finish(lp, sx, status, shift)


def _finish(lp, sx, status, shift):
    if sx.m:
        sx.refactor()
    xs = np.zeros(sx.n_total)
    xs[sx.basis] = sx.xB
    x = np.maximum(xs[: sx.n], 0.0) + shift
    obj = float(lp.c @ x) if status is LpStatus.OPTIMAL else float("nan")
    if status is not LpStatus.OPTIMAL:
        logger.debug("simplex stopped with status %s after %d pivots", status.value,
                     sx.iterations)
    return LpSolution(status, x, obj, sx.iterations, tuple(int(j) for j in sx.basis))


@dataclass
class BoundedSolution:
    """Result of :func:`solve_bounded`. ``multipliers`` are the row duals."""

    status: LpStatus
    y: np.ndarray
    multipliers: np.ndarray
    objective_value: float
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _BoundedSimplex:
    """Bounded-variable simplex on ``G y + s = rhs`` with ``lb <= (y, s) <= ub``.

    Nonbasic variables sit at one of their bounds (``at_upper`` selects which).
    The primal loop keeps the basis feasible; the dual loop keeps reduced costs
    sign-correct and is used to repair feasibility after bounds change.
    """

    def __init__(self, G, rhs, cost, lb, ub, max_iters, opt_tol):
        self.G, self.rhs, self.cost = G, rhs, cost
        self.N, self.m = G.shape
        self.lb, self.ub = lb, ub
        self.max_iters, self.opt_tol = max_iters, opt_tol
        self.basis = self.m + np.arange(self.N)
        self.at_upper = np.zeros(self.m + self.N, dtype=bool)
        self.iterations = 0
        self.refactor()

    def column(self, j):
        if j < self.m:
            return self.G[:, j]
        e = np.zeros(self.N)
        e[j - self.m] = 1.0
        return e

    def nonbasic_values(self):
        x = np.where(self.at_upper, self.ub, self.lb)
        x[self.basis] = 0.0
        return x

    def refactor(self):
        B = np.column_stack([self.column(j) for j in self.basis]) if self.N else np.zeros((0, 0))
        self.Binv = np.asfortranarray(np.linalg.inv(B)) if self.N else B
        x = self.nonbasic_values()
        self.xB = self.Binv @ (self.rhs - self.G @ x[: self.m] - x[self.m:])
        self.since_refactor = 0

    def reduced_costs(self):
        self.pi = self.cost[self.basis] @ self.Binv
        return np.concatenate([self.cost[: self.m] - self.G.T @ self.pi, -self.pi])

    def pivot(self, r, q, w):
        row = self.Binv[r] / w[r]
        wz = w.copy()
        wz[r] = 0.0
        self.Binv = dger(-1.0, wz, row, a=self.Binv, overwrite_a=True)
        self.Binv[r] = row
        self.basis[r] = q
        self.at_upper[q] = False
        self.since_refactor += 1
        if self.since_refactor >= REFACTOR_EVERY:
            self.refactor()

    def primal(self):
        bland, degenerate_run = False, 0
        degenerate_limit = 10 * (self.N + self.m)
        movable = self.ub > self.lb
        while True:
            d = self.reduced_costs()
            direction = np.where(self.at_upper, -1.0, 1.0)
            score = np.where(movable, d * direction, -np.inf)
            score[self.basis] = -np.inf
            if bland:
                cand = np.flatnonzero(score > self.opt_tol)
                if cand.size == 0:
                    return LpStatus.OPTIMAL
                q = int(cand[0])
            else:
                q = int(np.argmax(score))
                if not score[q] > self.opt_tol:
                    return LpStatus.OPTIMAL
            if self.iterations >= self.max_iters:
                return LpStatus.ITER_LIMIT
            dirq = direction[q]
            w = self.Binv @ self.column(q)
            rate = -dirq * w
            tol = PIVOT_TOL * max(1.0, float(np.abs(w).max(initial=0.0)))
            lbB, ubB = self.lb[self.basis], self.ub[self.basis]
            lim = np.full(self.N, np.inf)
            dec = (rate < -tol) & np.isfinite(lbB)
            inc = (rate > tol) & np.isfinite(ubB)
            lim[dec] = np.maximum(self.xB[dec] - lbB[dec], 0.0) / -rate[dec]
            lim[inc] = np.maximum(ubB[inc] - self.xB[inc], 0.0) / rate[inc]
            t_ratio = lim.min(initial=np.inf)
            t_flip = self.ub[q] - self.lb[q]
            if not np.isfinite(t_ratio) and not np.isfinite(t_flip):
                return LpStatus.UNBOUNDED
            self.iterations += 1
            if t_flip <= t_ratio:
                t = t_flip
                self.xB += rate * t
                self.at_upper[q] = not self.at_upper[q]
            else:
                t = t_ratio
                ties = np.flatnonzero(lim <= t + 1e-12 * (1.0 + t))
                if bland:
                    r = int(ties[np.argmin(self.basis[ties])])
                else:
                    r = int(ties[np.argmax(np.abs(w[ties]))])
                leaving = self.basis[r]
                entering_value = (self.ub[q] if self.at_upper[q] else self.lb[q]) + dirq * t
                self.xB += rate * t
                self.xB[r] = entering_value
                self.at_upper[leaving] = bool(inc[r])
                self.pivot(r, q, w)
            if t <= DEGENERATE_STEP:
                degenerate_run += 1
                if not bland and degenerate_run > degenerate_limit:
                    logger.debug("switching to Bland's rule after %d degenerate pivots",
                                 degenerate_run)
                    bland = True
            else:
                degenerate_run = 0

    def dual(self, feas_tol, accept_tol=None):
        """Dual simplex from a dual-feasible basis until every basic variable is in bounds.

        When no pivot of usable size remains, violations up to ``accept_tol``
        are treated as round-off and the basis is accepted.
        """
        accept_tol = feas_tol if accept_tol is None else accept_tol
        movable = self.ub > self.lb
        while True:
            lbB, ubB = self.lb[self.basis], self.ub[self.basis]
            below = lbB - self.xB
            above = self.xB - ubB
            infeas = np.maximum(below, above)
            r = int(np.argmax(infeas)) if self.N else 0
            if not self.N or infeas[r] <= feas_tol:
                return LpStatus.OPTIMAL
            if self.iterations >= self.max_iters:
                return LpStatus.ITER_LIMIT
            d = self.reduced_costs()
            rho = self.Binv[r]
            arow = np.concatenate([rho @ self.G, rho])
            increase = below[r] > 0           # basic variable r must go up to its lower bound
            # x_B[r] moves by -arow[j] * dx_j; pick nonbasic j moving in a feasible direction
            direction = np.where(self.at_upper, -1.0, 1.0)
            effect = -arow * direction
            ok = movable & ((effect > PIVOT_TOL) if increase else (effect < -PIVOT_TOL))
            ok[self.basis] = False
            cand = np.flatnonzero(ok)
            if cand.size == 0:
                return LpStatus.OPTIMAL if infeas[r] <= accept_tol else LpStatus.INFEASIBLE
            ratios = np.abs(d[cand]) / np.abs(arow[cand])
            q = int(cand[np.argmin(ratios)])
            target = lbB[r] if increase else ubB[r]
            dx = (self.xB[r] - target) / arow[q]
            w = self.Binv @ self.column(q)
            leaving = self.basis[r]
            entering_value = (self.ub[q] if self.at_upper[q] else self.lb[q]) + dx
            self.xB -= dx * w
            self.xB[r] = entering_value
            self.at_upper[leaving] = not increase
            self.iterations += 1
            self.pivot(r, q, w)


def solve_bounded(obj, G, rhs, equality=None, upper=None, max_iters: int | None = None,
                  opt_tol: float = OPT_TOL, perturbation: float = 1e-7) -> BoundedSolution:
    """Maximise ``obj . y`` subject to ``G y <= rhs`` and ``0 <= y <= upper``.

    Rows flagged in ``equality`` must hold with equality. Because ``rhs`` is
    non-negative, ``y = 0`` with the slack basis is feasible and the
    bounded-variable simplex needs no phase 1. The basis has one entry per row
    of ``G``, which makes this the fast route when ``G`` is short and wide (the
    dual of a synthesis LP has one row per feature and one column per sample).

    Equality rows with a zero right-hand side make every vertex near the start
    degenerate. Their slacks are therefore first given a small random box of
    half-width up to ``perturbation``; after that problem is solved the box is
    removed and dual simplex pivots restore exact feasibility.

    Args:
        obj: objective, length m.
        G: (N, m) constraint matrix.
        rhs: length-N non-negative right-hand side.
        equality: optional boolean mask of equality rows.
        upper: optional per-variable upper bounds (``inf`` allowed).
        max_iters: pivot budget; default ``50 * (N + m)``.
        opt_tol: reduced-cost tolerance.
        perturbation: largest half-width of the temporary slack box (0 disables it).

    Returns:
        A :class:`BoundedSolution`. Multipliers are non-negative on inequality
        rows and free on equality rows; they solve the dual problem
        ``min rhs . pi  s.t.  G^T pi >= obj`` (up to the bound terms).
    """
    obj = np.asarray(obj, dtype=np.float64).ravel()
    m = obj.size
    G = np.asarray(G, dtype=np.float64).reshape(-1, m)
    N = G.shape[0]
    rhs = np.asarray(rhs, dtype=np.float64).ravel()
    if rhs.size != N:
        raise DimensionError(f"G has {N} rows but rhs has {rhs.size}")
    if np.any(rhs < 0):
        raise ParameterError("solve_bounded needs a non-negative right-hand side")
    eq = np.zeros(N, bool) if equality is None else np.asarray(equality, bool).ravel()
    up = np.full(m, np.inf) if upper is None else np.asarray(upper, dtype=np.float64).ravel()
    if eq.size != N or up.size != m:
        raise DimensionError("equality mask or upper bounds have the wrong length")
    if np.any(up < 0):
        raise ParameterError("upper bounds must be non-negative")
    if max_iters is None:
        max_iters = 50 * (N + m)

    lb = np.zeros(m + N)
    ub = np.concatenate([up, np.where(eq, 0.0, np.inf)])
    cost = np.concatenate([obj, np.zeros(N)])
    perturbed = perturbation > 0 and eq.any()
    if perturbed:
        # fixed seed: the perturbation must not make results run-dependent
        delta = perturbation * (0.5 + 0.5 * np.random.default_rng(0).random(N))
        scale = np.maximum(1.0, np.abs(G).max(axis=1, initial=0.0))
        lb[m:][eq] = -(delta * scale)[eq]
        ub[m:][eq] = (delta * scale)[eq]
    sx = _BoundedSimplex(G, rhs, cost, lb, ub, max_iters, opt_tol)
    status = sx.primal()
    if perturbed and status is LpStatus.OPTIMAL:
        sx.lb[m:][eq] = 0.0
        sx.ub[m:][eq] = 0.0
        sx.refactor()
        g_scale = max(1.0, float(np.abs(G).max(initial=0.0)))
        status = sx.dual(feas_tol=1e-12 * g_scale, accept_tol=1e-9 * g_scale)
        if status is LpStatus.OPTIMAL:
            # the repaired basis is primal feasible; finish any remaining primal work
            status = sx.primal()
        elif status is LpStatus.INFEASIBLE:
            # y = 0 is always feasible here, so this is numerical; retry unperturbed
            logger.debug("dual cleanup failed; solving again without perturbation")
            return solve_bounded(obj, G, rhs, equality, upper, max_iters, opt_tol, perturbation=0.0)
    sx.refactor()
    x = sx.nonbasic_values()
    x[sx.basis] = sx.xB
    y = np.clip(x[:m], 0.0, up)
    sx.reduced_costs()
    value = float(obj @ y) if status is LpStatus.OPTIMAL else float("nan")
    return BoundedSolution(status, y, sx.pi, value, sx.iterations)


def dump_lp(lp: LinearProgram) -> str:
    """Plain-text dump: objective row, then one ``a_1 ... a_n >= b`` line per constraint."""
    fmt = lambda v: format(float(v), ".17g")
    lines = [" ".join(map(fmt, lp.c))]
    lines += [" ".join(map(fmt, row)) + " >= " + fmt(bi) for row, bi in zip(lp.A, lp.b)]
    if np.any(lp.lower != 0):
        lines.append("# lower " + " ".join(map(fmt, lp.lower)))
    return "\n".join(lines) + "\n"


def load_lp(text: str) -> LinearProgram:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty LP dump")
    try:
        c = [float(v) for v in lines[0].split()]
        rows, rhs, lower = [], [], None
        for k, ln in enumerate(lines[1:], start=2):
            if ln.startswith("# lower"):
                lower = [float(v) for v in ln.split()[2:]]
                continue
            lhs, sep, right = ln.partition(">=")
            if not sep:
                raise FormatError(f"line {k}: missing '>='")
            rows.append([float(v) for v in lhs.split()])
            rhs.append(float(right))
    except ValueError as exc:
        raise FormatError(f"malformed LP dump: {exc}") from exc
    if any(len(r) != len(c) for r in rows):
        raise FormatError("row length differs from objective length")
    return LinearProgram(c, np.array(rows).reshape(len(rows), len(c)), rhs, lower)
