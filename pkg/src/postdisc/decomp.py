"""Element-wise factorization of a nonnegative matrix into stochastic factors.

A matrix ``P`` is *decomposable* when ``P = A * B`` (element-wise) with ``A``
right stochastic (rows sum to 1) and ``B`` left stochastic (columns sum to 1).
For 2x2 matrices membership is decided in closed form and the factors are
found by root-finding on a convex one-dimensional curve; larger shapes use a
seeded multistart least-squares search.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .core import DEFAULT_TOL

ACCEPT_RESIDUAL = 1e-8
# entries at or below this are structural zeros; sqrt of it stays far below
# any amplitude tolerance used downstream
ZERO_ENTRY = 1e-20


def _as_matrix(P, shape=None, name="P"):
    P = np.array(P, dtype=float)
    if P.ndim != 2 or 0 in P.shape:
        raise ValueError(f"{name} must be a non-empty 2-D matrix, got shape {P.shape}")
    if shape is not None and P.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValueError(f"{name} contains NaN or Inf")
    if P.min() < 0 or P.max() > 1:
        raise ValueError(f"{name} entries must lie in [0, 1]")
    return P


@dataclass(frozen=True)
class StochasticFactorization:
    """``A * B`` approximating ``target``; ``residual = max|A*B - target|``."""

    A: np.ndarray
    B: np.ndarray
    target: np.ndarray
    residual: float
    method: str = ""

    @classmethod
    def build(cls, A, B, target, method=""):
        A = np.asarray(A, dtype=float)
        B = np.asarray(B, dtype=float)
        target = np.asarray(target, dtype=float)
        with np.errstate(invalid="ignore"):
            residual = float(np.abs(A * B - target).max())
        if not np.isfinite(residual):
            residual = math.inf
        return cls(A, B, target, residual, method)

    @property
    def shape(self):
        return self.A.shape

    def violations(self, tol=DEFAULT_TOL):
        """Human-readable list of broken invariants (empty when valid)."""
        out = []
        if self.A.min() < -tol:
            out.append(f"A has negative entry {self.A.min():.3g}")
        if self.B.min() < -tol:
            out.append(f"B has negative entry {self.B.min():.3g}")
        rows = np.abs(self.A.sum(axis=1) - 1).max()
        if rows > tol:
            out.append(f"A row sums off by {rows:.3g}")
        cols = np.abs(self.B.sum(axis=0) - 1).max()
        if cols > tol:
            out.append(f"B column sums off by {cols:.3g}")
        if self.residual > tol:
            out.append(f"residual {self.residual:.3g}")
        return out


@dataclass(frozen=True)
class Infeasible:
    """No factorization returned.

    ``proven`` is True only when the verdict comes from an exact criterion
    (2x2 closed form, or a single row/column).  Otherwise the search simply
    found nothing below the acceptance threshold.
    """

    reason: str
    proven: bool
    criterion: float | None = None
    best_residual: float | None = None
    attempts: int = 0

    def __bool__(self):
        return False


@dataclass(frozen=True)
class Membership:
    in_closure: bool
    criterion_value: float


def criterion_2x2(P):
    """``Pc11 Pc22 + Pc12 Pc21 - 2 sqrt(P11 P12 P21 P22)`` with ``Pc = 1 - P``."""
    P = np.asarray(P, dtype=float)
    Q = 1.0 - P
    return float(Q[0, 0] * Q[1, 1] + Q[0, 1] * Q[1, 0] - 2.0 * math.sqrt(P.prod()))


def membership_2x2(P, tol=DEFAULT_TOL):
    """Closed-form decision of 2x2 decomposability; the boundary counts as inside."""
    P = _as_matrix(P, (2, 2))
    value = criterion_2x2(P)
    return Membership(value >= 1.0 - tol, value)


class FCurve:
    """Second-row sum of ``A`` as a function of ``A[0, 0]``.

    Fixing ``A[0, 0] = x`` determines the first row of ``A``, hence the first
    row of ``B = P / A``, hence (through the column sums of ``B``) its second
    row, hence the second row of ``A``.  ``P`` is decomposable with positive
    factors iff this curve takes the value 1 somewhere on its domain
    ``(P[0,0], 1 - P[0,1])``.  Requires ``P > 0`` and ``P[0,0] + P[0,1] < 1``.
    """

    def __init__(self, P):
        P = _as_matrix(P, (2, 2))
        if not np.all(P > 0):
            raise ValueError("FCurve needs a strictly positive P")
        if P[0, 0] + P[0, 1] >= 1:
            raise ValueError("degenerate domain: P[0,0] + P[0,1] >= 1")
        self.P = P

    @property
    def domain(self):
        return self.P[0, 0], 1.0 - self.P[0, 1]

    def __call__(self, x):
        lo, hi = self.domain
        if not lo <= x <= hi:
            raise ValueError(f"x={x} outside the domain ({lo}, {hi})")
        if x == lo or x == hi:
            return math.inf
        P = self.P
        return P[1, 0] / (1 - P[0, 0] / x) + P[1, 1] / (1 - P[0, 1] / (1 - x))

    @property
    def weight(self):
        P = self.P
        s = math.sqrt(P[0, 1] * P[1, 1])
        return s / (math.sqrt(P[0, 0] * P[1, 0]) + s)

    def minimizer(self):
        """``(xstar, lam, f(xstar))``; the curve is convex with its minimum at xstar."""
        lam = self.weight
        xstar = lam * self.P[0, 0] + (1 - lam) * (1 - self.P[0, 1])
        return xstar, lam, self(xstar)

    def roots(self, level=1.0, max_iter=200, xtol=0.0, tangent_tol=1e-12):
        """Solutions of ``f(x) = level``, left branch first; empty if none.

        When the minimum is within `tangent_tol` of `level` the curve is
        treated as tangent and only the minimizer is returned: the two
        bisection roots would sit about ``sqrt(tangent_tol)`` away from it.
        With ``xtol = 0`` bisection runs until the bracket cannot be split
        further; roots of matrices with tiny entries hug the domain edge far
        closer than any fixed absolute tolerance.
        """
        xstar, _, fmin = self.minimizer()
        if fmin > level:
            return []
        if fmin > level - tangent_tol:
            return [xstar]
        lo, hi = self.domain
        left = _bisect(self, level, lo, xstar, decreasing=True, max_iter=max_iter, xtol=xtol)
        right = _bisect(self, level, xstar, hi, decreasing=False, max_iter=max_iter, xtol=xtol)
        return [left] if abs(left - right) <= max(xtol, 1e-15) else [left, right]


def _bisect(f, level, lo, hi, decreasing, max_iter, xtol):
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= xtol:
            break
        above = f(mid) > level
        if above == decreasing:
            lo = mid
        else:
            hi = mid
    # return the endpoint that lies inside the open domain
    return hi if decreasing else lo


def _factor_from_a11(P, x):
    A = np.empty((2, 2))
    B = np.empty((2, 2))
    A[0] = x, 1 - x
    B[0] = P[0] / A[0]
    B[1] = 1 - B[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        A[1] = P[1] / B[1]
        A[1] /= A[1].sum()
    return StochasticFactorization.build(A, B, P, method="f-curve")


def _solve_2x2(P):
    """Best factorization found for a 2x2 matrix (may miss the threshold)."""
    zero = P <= ZERO_ENTRY
    if not zero.any() and P[0, 0] + P[0, 1] < 1:
        curve = FCurve(P)
        roots = curve.roots()
        if not roots:
            # on the boundary up to round-off: the minimizer is the best point
            roots = [curve.minimizer()[0]]
        best = min((_factor_from_a11(P, x) for x in roots), key=lambda f: f.residual)
        if best.residual > 1e-14:
            # roots near a domain edge lose digits to cancellation; refine in A directly
            polished = _polish(P, np.zeros((2, 2), dtype=bool), best.A)
            if polished is not None and polished.residual < best.residual:
                best = StochasticFactorization(polished.A, polished.B, P, polished.residual, "f-curve")
        if best.residual < ACCEPT_RESIDUAL:
            return best
    return _pattern_search(P, max_starts=4, seed=0)


def _shrink_inside(P):
    """Smallest-found ``c <= 1`` with ``c P`` inside by the closed-form criterion.

    Shrinking all entries never leaves the region, and the criterion grows
    as ``c`` decreases.
    """
    if criterion_2x2(P) >= 1:
        return P
    lo, hi = 0.0, 1.0  # criterion(lo P) >= 1 > criterion(hi P)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if criterion_2x2(mid * P) >= 1:
            lo = mid
        else:
            hi = mid
    return lo * P


def decompose_2x2(P, tol=DEFAULT_TOL):
    """Factor a 2x2 matrix, or prove that no factorization exists.

    Strictly positive matrices are solved on the f-curve.  Matrices with zero
    entries are solved exactly on each admissible zero pattern (for a zero
    cell either ``B`` or ``A`` vanishes there; ``B`` is tried first).

    A matrix that passes the criterion only within `tol` may have no exact
    factorization.  It is then moved to a nearby inner point, first by
    zeroing entries below `tol`, then by shrinking towards 0, and the
    residual is measured against the original ``P``.
    """
    P = _as_matrix(P, (2, 2))
    mem = membership_2x2(P, tol)
    if not mem.in_closure:
        return Infeasible("closed-form criterion below 1", proven=True, criterion=mem.criterion_value)
    fact = _solve_2x2(P)
    if not isinstance(fact, Infeasible) and fact.residual < ACCEPT_RESIDUAL:
        return fact
    best = fact
    zeroed = np.where(P <= tol, 0.0, P)
    for Q in (zeroed, _shrink_inside(zeroed)):
        cand = _solve_2x2(Q)
        if isinstance(cand, Infeasible):
            continue
        cand = StochasticFactorization.build(cand.A, cand.B, P, method=cand.method + "+closure")
        if cand.residual < ACCEPT_RESIDUAL:
            return cand
        if isinstance(best, Infeasible) or cand.residual < best.residual:
            best = cand
    # the criterion says a factorization exists, the numerics could not reach it
    return Infeasible(
        "criterion holds but no factorization reached the acceptance threshold",
        proven=False,
        criterion=mem.criterion_value,
        best_residual=getattr(best, "residual", None),
        attempts=best.attempts if isinstance(best, Infeasible) else 0,
    )


def _zero_patterns(zero):
    """Every assignment of zero cells to 'A vanishes' (True) / 'B vanishes'."""
    cells = list(zip(*np.nonzero(zero)))
    order = sorted(
        itertools.product((False, True), repeat=len(cells)),
        key=lambda bits: (sum(bits), bits),
    )
    for bits in order:
        mask = np.zeros(zero.shape, dtype=bool)
        for cell, bit in zip(cells, bits):
            mask[cell] = bit
        yield mask


def _pattern_search(P, max_starts, seed):
    zero = P <= ZERO_ENTRY
    rng = np.random.default_rng(seed)
    best = None
    attempts = 0
    for a_zero in _zero_patterns(zero):
        for start in _starting_points(P, a_zero, max_starts, rng):
            attempts += 1
            fact = _polish(P, a_zero, start)
            if fact is None:
                continue
            if best is None or fact.residual < best.residual:
                best = fact
            if best.residual < ACCEPT_RESIDUAL:
                return best
    if best is None:
        return Infeasible("no admissible zero pattern", proven=False, attempts=attempts)
    return best


def _starting_points(P, a_zero, count, rng):
    n, m = P.shape
    allowed = ~a_zero
    lower = np.where(P > ZERO_ENTRY, P, 0.0)
    for k in range(count):
        if k == 0:
            w = allowed.astype(float)
        else:
            w = rng.dirichlet(np.ones(m), size=n) * allowed
        slack = 1 - lower.sum(axis=1, keepdims=True)
        wsum = w.sum(axis=1, keepdims=True)
        wsum[wsum == 0] = 1
        yield np.where(allowed, lower + np.clip(slack, 0, None) * w / wsum, 0.0)


def _polish(P, a_zero, A0):
    """Solve for ``A`` on a fixed zero pattern and rebuild an exact ``B``.

    Support cells get ``B = P / A`` exactly.  A zero cell marked in `a_zero`
    carries ``A = 0`` and may absorb leftover column mass in ``B``; any other
    zero cell carries ``B = 0``.
    """
    n, m = P.shape
    support = P > ZERO_ENTRY
    allowed = ~a_zero
    if not allowed.any(axis=1).all():
        return None
    idx = np.nonzero(allowed)
    lower = np.where(support, P, 0.0)[idx]
    fill_col = a_zero.any(axis=0)
    Psup = np.where(support, P, 0.0)

    def unpack(x):
        A = np.zeros((n, m))
        A[idx] = x
        return A

    def loads(A):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(support, Psup / np.where(support, A, 1.0), 0.0)

    def resid(x):
        A = unpack(x)
        s = loads(A).sum(axis=0) - 1
        s = np.where(fill_col, np.maximum(s, 0.0), s)
        return np.concatenate([A.sum(axis=1) - 1, s])

    def jac(x):
        A = unpack(x)
        J = np.zeros((n + m, x.size))
        s = loads(A).sum(axis=0) - 1
        for k, (i, j) in enumerate(zip(*idx)):
            J[i, k] = 1.0
            if support[i, j] and not (fill_col[j] and s[j] <= 0):
                J[n + j, k] = -Psup[i, j] / A[i, j] ** 2
        return J

    # least_squares needs lb < ub strictly
    upper = np.where(lower >= 1.0, lower + 1e-12, 1.0)
    x0 = np.clip(A0[idx], lower, upper)
    try:
        sol = least_squares(
            resid, x0, jac=jac, bounds=(lower, upper), method="trf",
            xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=300,
        )
    except ValueError:
        return None
    x = _gauss_newton(resid, jac, sol.x, lower)
    if np.abs(resid(x)).max() > 1e-14:
        x = min(x, _log_space_solve(resid, jac, x0, lower, upper),
                key=lambda v: np.abs(resid(v)).max())
    A = np.clip(unpack(x), 0.0, None)
    A /= A.sum(axis=1, keepdims=True)
    B = loads(A)
    col = B.sum(axis=0)
    for j in range(m):
        rows = np.nonzero(a_zero[:, j])[0]
        if rows.size and col[j] < 1:
            B[rows, j] = (1 - col[j]) / rows.size
        elif col[j] > 0:
            B[:, j] /= col[j]
        else:
            # empty column with nowhere to put the mass; leave the defect visible
            B[:, j] = 0.0
    fact = StochasticFactorization.build(A, B, P, method="pattern")
    if np.abs(B.sum(axis=0) - 1).max() > ACCEPT_RESIDUAL:
        # column mass could not be placed; report it through the residual
        return StochasticFactorization(A, B, P, max(fact.residual, float(np.abs(B.sum(axis=0) - 1).max())), "pattern")
    return fact


def _log_space_solve(resid, jac, x0, lower, upper, iters=40):
    """Projected Newton in ``u = log A`` with row-equilibrated Jacobian.

    Reaches entries many orders of magnitude below the start, where steps
    in ``A`` itself stall on the ``P/A`` poles: the gradient there is as tiny
    as the entries, which both TRF's gradient test and lstsq's rank cutoff
    treat as zero.  Overshoots are clipped to the bounds.
    """
    lo = np.log(np.maximum(lower, 1e-300))
    hi = np.log(upper)
    u = np.clip(np.log(np.maximum(x0, 1e-300)), lo, hi)
    best, best_norm = np.exp(u), np.abs(resid(np.exp(u))).max()
    for _ in range(iters):
        x = np.exp(u)
        r = resid(x)
        J = jac(x) * x
        rows = np.abs(J).max(axis=1)
        rows[rows == 0] = 1.0
        step = np.linalg.lstsq(J / rows[:, None], -r / rows, rcond=1e-14)[0]
        u = np.clip(u + step, lo, hi)
        norm = np.abs(resid(np.exp(u))).max()
        if norm < best_norm:
            best, best_norm = np.exp(u), norm
        if norm < 1e-15 or not np.all(np.isfinite(u)):
            break
    return _gauss_newton(resid, jac, best, lower)


def _gauss_newton(resid, jac, x, lower, iters=30):
    """Unbounded minimum-norm Newton steps; the bounded solver only creeps
    towards active bounds, this lands on them.  Variables are scaled by their
    current size so that tiny entries (whose ``P/A^2`` derivatives are huge)
    do not swamp the rest of the Jacobian."""
    best = x
    best_norm = np.abs(resid(x)).max()
    for _ in range(iters):
        r = resid(x)
        scale = np.maximum(np.abs(x), np.where(lower > 0, lower, 1e-12))
        step = scale * np.linalg.lstsq(jac(x) * scale, -r, rcond=None)[0]
        x = np.maximum(x + step, lower)
        norm = np.abs(resid(x)).max()
        if norm < best_norm:
            best, best_norm = x, norm
        if norm < 1e-15 or not np.all(np.isfinite(x)):
            break
    return best


def _single_line(P, tol):
    """Exact answer when ``P`` has a single row or a single column."""
    n, m = P.shape
    if n == 1:
        dev = abs(P.sum() - 1)
        if dev > tol:
            return Infeasible(f"single row must sum to 1 (off by {dev:.3g})", proven=True)
        A = P / P.sum()
        return StochasticFactorization.build(A, np.ones_like(P), P, method="single-row")
    dev = abs(P.sum() - 1)
    if dev > tol:
        return Infeasible(f"single column must sum to 1 (off by {dev:.3g})", proven=True)
    B = P / P.sum()
    return StochasticFactorization.build(np.ones_like(P), B, P, method="single-column")


def _joint_search(P, start_A, start_B):
    """Bounded least squares on ``A * B = P`` with both stochastic constraints."""
    n, m = P.shape
    nm = n * m

    def resid(x):
        A = x[:nm].reshape(n, m)
        B = x[nm:].reshape(n, m)
        return np.concatenate([(A * B - P).ravel(), A.sum(axis=1) - 1, B.sum(axis=0) - 1])

    def jac(x):
        A = x[:nm].reshape(n, m)
        B = x[nm:].reshape(n, m)
        J = np.zeros((nm + n + m, 2 * nm))
        r = np.arange(nm)
        J[r, r] = B.ravel()
        J[r, nm + r] = A.ravel()
        for i in range(n):
            J[nm + i, i * m:(i + 1) * m] = 1.0
        for j in range(m):
            J[nm + n + j, nm + j:2 * nm:m] = 1.0
        return J

    x0 = np.concatenate([start_A.ravel(), start_B.ravel()])
    sol = least_squares(
        resid, x0, jac=jac, bounds=(0.0, 1.0), method="trf",
        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=300,
    )
    return sol.x[:nm].reshape(n, m), sol.x[nm:].reshape(n, m)


def decompose_general(P, tol=DEFAULT_TOL, multistarts=16, max_iters=None, seed=0):
    """Search for a stochastic factorization of an ``n x m`` matrix.

    2x2 input is delegated to :func:`decompose_2x2` and single rows/columns
    are solved exactly; only in those cases can an :class:`Infeasible` result
    be a proof.  Otherwise each start draws ``A`` (rows) and ``B`` (columns)
    from a flat Dirichlet, runs bounded least squares on the joint system,
    reads off the zero pattern, and re-solves on that pattern so that zero
    entries of ``P`` are reproduced exactly.  The first start whose residual
    is below ``1e-8`` wins; starts are tried in index order.

    `max_iters` caps the number of starts actually run (default: all).
    """
    P = _as_matrix(P)
    n, m = P.shape
    if n == 1 or m == 1:
        return _single_line(P, tol)
    if (n, m) == (2, 2):
        return decompose_2x2(P, tol)

    rng = np.random.default_rng(seed)
    zero = P <= ZERO_ENTRY
    best = None
    runs = multistarts if max_iters is None else min(multistarts, max_iters)
    for _ in range(runs):
        A0 = rng.dirichlet(np.ones(m), size=n)
        B0 = rng.dirichlet(np.ones(n), size=m).T
        A1, B1 = _joint_search(P, A0, B0)
        a_zero = zero & (A1 < B1)
        fact = _polish(P, a_zero, A1)
        if fact is None:
            continue
        if best is None or fact.residual < best.residual:
            best = fact
        if best.residual < ACCEPT_RESIDUAL:
            return StochasticFactorization(best.A, best.B, best.target, best.residual, "multistart")
    return Infeasible(
        "no factorization found",
        proven=False,
        best_residual=None if best is None else best.residual,
        attempts=runs,
    )


def decompose(P, tol=DEFAULT_TOL, **options):
    """Dispatch to the exact 2x2 path or the general search."""
    return decompose_general(P, tol, **options)


def _row_grid(m, steps):
    """All points of the probability simplex in R^m with denominators `steps`."""
    pts = []
    for bars in itertools.combinations(range(steps + m - 1), m - 1):
        edges = (-1,) + bars + (steps + m - 1,)
        pts.append([edges[k + 1] - edges[k] - 1 for k in range(m)])
    return np.array(pts, dtype=float) / steps


def brute_force_membership(P, grid_steps=256, max_points=5 * 10**7):
    """Exhaustive grid test of decomposability, for use as a test oracle.

    Every row of ``A`` ranges over a simplex grid.  A column of ``P`` is
    served when ``sum_i P_ij / A_ij <= 1`` (for two or more rows and columns
    any leftover mass can be pushed back down, so only excess counts; with a
    single row or column the sum must hit 1 exactly).  Returns True when some
    grid point has every column within ``2 / grid_steps``.
    """
    P = _as_matrix(P)
    n, m = P.shape
    if n * m > 6:
        raise ValueError("brute force limited to n*m <= 6")
    if grid_steps < 32:
        raise ValueError("grid_steps must be at least 32")
    grid = _row_grid(m, grid_steps)
    if float(len(grid)) ** n > max_points:
        raise ValueError(f"grid too large ({len(grid)}^{n} points)")
    one_sided = n >= 2 and m >= 2
    support = P > 0
    g = len(grid)
    worst = np.zeros((g,) * n)
    with np.errstate(divide="ignore", invalid="ignore"):
        for j in range(m):
            # column j's load at every combination of row grid points, one axis per row
            load = np.zeros((1,) * n)
            free = np.zeros((1,) * n, dtype=bool)
            for i in range(n):
                axis = [1] * n
                axis[i] = g
                col = grid[:, j]
                term = P[i, j] / col if support[i, j] else np.zeros(g)
                load = load + term.reshape(axis)
                if not one_sided and not support[i, j]:
                    free = free | (col == 0).reshape(axis)
            excess = np.maximum(load - 1, 0.0)
            if not one_sided:
                excess = np.maximum(excess, np.where(free, 0.0, np.maximum(1 - load, 0.0)))
            np.maximum(worst, excess, out=worst)
    return bool(worst.min() < 2.0 / grid_steps)


@dataclass(frozen=True)
class PerturbationPlan:
    """Directions that push boundary factors strictly inside."""

    Aprime: np.ndarray
    Bprime: np.ndarray
    delta: float

    def bound(self, fact):
        """Element-wise bound on ``|A_new * B_new - A * B|``."""
        d = self.delta
        return d * (np.abs(self.Aprime * fact.B) + np.abs(fact.A * self.Bprime)
                    + d * np.abs(self.Aprime * self.Bprime))


def _interior_direction(A):
    """Rows with a zero entry move half their largest entry onto the others."""
    n, m = A.shape
    D = np.zeros_like(A)
    for i in range(n):
        if np.all(A[i] > 0):
            continue
        jmax = int(np.argmax(A[i]))
        D[i, :] = A[i, jmax] / (2 * (m - 1))
        D[i, jmax] = -A[i, jmax] / 2
    return D


def perturbation_plan(fact, delta):
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    return PerturbationPlan(_interior_direction(fact.A), _interior_direction(fact.B.T).T, delta)


def perturb_to_interior(fact, delta):
    """Strictly positive factors whose product stays within the plan's bound.

    The result's ``target`` is the original one, so its residual measures the
    distance from the original matrix.
    """
    plan = perturbation_plan(fact, delta)
    A = fact.A + delta * plan.Aprime
    B = fact.B + delta * plan.Bprime
    return StochasticFactorization.build(A, B, fact.target, method="interior")


@dataclass(frozen=True)
class ClosureReport:
    p_feasible: bool
    q_feasible: bool
    exact: bool
    violation: bool


def downward_closure_check(P, Q, tol=DEFAULT_TOL, **options):
    """Decompose ``Q`` given ``0 <= Q <= P`` with ``P`` decomposable.

    ``violation`` is set when ``Q`` fails although ``P`` succeeded.  On the
    exact 2x2 path that would be a genuine contradiction; for larger shapes it
    only means the search missed.
    """
    P = _as_matrix(P)
    Q = _as_matrix(Q, P.shape, name="Q")
    if np.any(Q > P + tol):
        raise ValueError("need 0 <= Q <= P element-wise")
    p_res = decompose_general(P, tol, **options)
    if isinstance(p_res, Infeasible):
        raise ValueError(f"P is not decomposable: {p_res.reason}")
    q_res = decompose_general(Q, tol, **options)
    q_ok = not isinstance(q_res, Infeasible)
    exact = P.shape == (2, 2)
    return ClosureReport(True, q_ok, exact, violation=not q_ok)
