"""From a decomposable overlap matrix to an explicit measurement table.

The pipeline is: overlaps -> stochastic factorization -> standard pair ->
isometry matching Gram matrices -> table ``M_ab = V^dag |ab><ab| V`` (with
the projector onto the complement of the span added to ``M_00``).  The two
necessary conditions (dimension and minimum-overlap bounds) are available on
their own and are used as cheap filters before the decomposition.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    DEFAULT_TOL,
    MeasurementTable,
    check_perfect_conditions,
    gram_matrix,
    orthonormal_basis,
    overlap_data,
)
from .decomp import ACCEPT_RESIDUAL, Infeasible, decompose_general, membership_2x2

# cross Gram entries of the original and constructed pair must agree to this
ROUND_TRIP_TOL = 1e-8


class GramMismatchError(ValueError):
    pass


class RankError(ValueError):
    pass


@dataclass(frozen=True)
class StandardPair:
    """Amplitudes of states living in ``C^(n*m)`` with basis ``|ab>``.

    ``|Phi^A_a> = sum_b alpha[a, b] |ab>`` and ``|Phi^B_b> = sum_a beta[a, b] |ab>``;
    the basis index of ``|ab>`` is ``a * m + b``.
    """

    alpha: np.ndarray
    beta: np.ndarray

    @property
    def kdims(self):
        return self.alpha.shape

    def states_a(self):
        n, m = self.alpha.shape
        out = np.zeros((n, n * m), dtype=complex)
        for a in range(n):
            out[a, a * m:(a + 1) * m] = self.alpha[a]
        return out

    def states_b(self):
        n, m = self.beta.shape
        out = np.zeros((m, n * m), dtype=complex)
        for b in range(m):
            out[b, b::m] = self.beta[:, b]
        return out

    def states(self):
        return np.vstack([self.states_a(), self.states_b()])

    def normalization_error(self):
        ra = np.abs((np.abs(self.alpha) ** 2).sum(axis=1) - 1).max()
        rb = np.abs((np.abs(self.beta) ** 2).sum(axis=0) - 1).max()
        return float(max(ra, rb))


def standard_pair_from_factorization(overlaps, fact, tol=ACCEPT_RESIDUAL):
    """``alpha = exp(-i theta) sqrt(A)``, ``beta = sqrt(B)``."""
    if fact.A.shape != overlaps.P.shape:
        raise ValueError(f"factorization shape {fact.A.shape} != overlap shape {overlaps.P.shape}")
    if fact.residual > tol:
        raise ValueError(f"factorization residual {fact.residual:.3g} exceeds {tol:.3g}")
    alpha = np.exp(-1j * overlaps.theta) * np.sqrt(np.clip(fact.A, 0, None))
    beta = np.sqrt(np.clip(fact.B, 0, None)).astype(complex)
    return StandardPair(alpha, beta)


@dataclass(frozen=True)
class IsometryMap:
    """Linear map isometric on the span of ``domain``'s columns.

    ``matrix`` has shape ``(target_dim, source_dim)`` and annihilates the
    orthogonal complement of the domain, so ``matrix^dag matrix`` is the
    projector onto the domain.
    """

    matrix: np.ndarray
    domain: np.ndarray

    @property
    def source_dim(self):
        return self.matrix.shape[1]

    @property
    def target_dim(self):
        return self.matrix.shape[0]

    @property
    def rank(self):
        return self.domain.shape[1]

    def isometry_error(self):
        W = self.matrix @ self.domain
        return float(np.abs(W.conj().T @ W - np.eye(self.rank)).max(initial=0.0))

    def apply(self, states):
        """Map kets given as rows."""
        return np.asarray(states) @ self.matrix.T

    def complement_projector(self):
        return np.eye(self.source_dim) - self.domain @ self.domain.conj().T


def isometry_from_gram(source, target, tol=ROUND_TRIP_TOL, rank_tol=DEFAULT_TOL):
    """Isometry on ``span(source)`` sending ``source[i]`` to ``target[i]``.

    Both families are given as rows and must have matching Gram matrices.
    A maximal independent subfamily is picked greedily in index order, the
    map is fixed on it, and the result is snapped to the nearest exact
    isometry on that span.
    """
    source = np.asarray(source, dtype=complex)
    target = np.asarray(target, dtype=complex)
    if len(source) != len(target):
        raise ValueError("source and target must have the same number of states")
    diff = np.abs(gram_matrix(source) - gram_matrix(target))
    if diff.max() > tol:
        i, j = np.unravel_index(np.argmax(diff), diff.shape)
        raise GramMismatchError(
            f"Gram matrices differ by {diff[i, j]:.3g} at entry ({i}, {j})"
        )
    Q, kept = orthonormal_basis(source, rank_tol)
    r = len(kept)
    if target.shape[1] < r:
        raise ValueError(f"target dimension {target.shape[1]} cannot host a rank-{r} span")
    R = Q.conj().T @ source[kept].T
    W = target[kept].T @ np.linalg.inv(R)
    X, _, Yh = np.linalg.svd(W, full_matrices=False)
    W = X @ Yh
    iso = IsometryMap(W @ Q.conj().T, Q)
    err = np.linalg.norm(iso.apply(source) - target, axis=1).max()
    if err > tol:
        raise GramMismatchError(f"isometry misses a target by {err:.3g}")
    return iso


def table_from_isometry(iso, kdims, ambient_dim=None, tol=DEFAULT_TOL):
    """``M_ab = V^dag [ab] V`` plus the complement projector on ``M_00``."""
    n, m = kdims
    if ambient_dim is not None and ambient_dim != iso.source_dim:
        raise ValueError(f"isometry acts on dimension {iso.source_dim}, not {ambient_dim}")
    if n * m != iso.target_dim:
        raise ValueError(f"kdims {kdims} do not match target dimension {iso.target_dim}")
    if iso.isometry_error() > tol:
        raise ValueError(f"map is not isometric (error {iso.isometry_error():.3g})")
    rows = iso.matrix.conj()  # row k is V^dag |k>
    ops = np.einsum("ki,kj->kij", rows, iso.matrix).reshape(n, m, iso.source_dim, iso.source_dim)
    ops[0, 0] += iso.complement_projector()
    return MeasurementTable(ops)


def naimark_from_rank1_table(t, tol=DEFAULT_TOL):
    """Embedding ``V = sum_ab |ab><psi_ab|`` for a table with ``M_ab = [psi_ab]``.

    Each ``psi_ab`` is read off a column of ``M_ab`` (the one with the
    largest diagonal entry, first on ties), which makes that component real
    and positive.
    """
    n, m = t.shape
    d = t.dim
    rows = np.zeros((n * m, d), dtype=complex)
    for a in range(n):
        for b in range(m):
            M = t.operators[a, b]
            eig = np.linalg.eigvalsh((M + M.conj().T) / 2)
            if d > 1 and eig[-2] > tol:
                raise RankError(f"M[{a},{b}] has rank >= 2 (second eigenvalue {eig[-2]:.3g})")
            diag = M.diagonal().real
            if diag.max() <= tol:
                continue
            c = int(np.nonzero(diag >= diag.max() - 1e-12)[0][0])
            psi = M[:, c] / np.sqrt(diag[c])
            rows[a * m + b] = psi.conj()
    iso = IsometryMap(rows, np.eye(d, dtype=complex))
    if iso.isometry_error() > max(tol, 1e-9):
        raise ValueError(f"operators do not sum to identity (isometry error {iso.isometry_error():.3g})")
    return iso


@dataclass(frozen=True)
class DimensionBound:
    all_nonzero: bool
    bound: int
    dim: int
    span_dim: int

    @property
    def applicable(self):
        return self.all_nonzero

    @property
    def satisfied(self):
        """False only when the bound applies and the span is too small."""
        return not self.all_nonzero or self.span_dim >= self.bound


def check_dimension_bound(pair, tol=DEFAULT_TOL):
    """With every cross overlap nonzero, a distinguishable pair needs
    ``dim >= n + m - 1``.

    The test is run against the dimension of the span of the states, which
    is the relevant space: compressing any table onto that span keeps it
    perfect.
    """
    n, m = pair.shape
    P = overlap_data(pair, tol).P
    span_dim = len(orthonormal_basis(pair.states(), tol)[1])
    return DimensionBound(bool(np.all(P > tol)), n + m - 1, pair.dim, span_dim)


@dataclass(frozen=True)
class OverlapBound:
    min_overlap: float
    bound: float
    tol: float = DEFAULT_TOL

    @property
    def satisfied(self):
        return self.min_overlap <= self.bound + self.tol


def check_overlap_bound(overlaps, tol=DEFAULT_TOL):
    """A distinguishable pair has ``min P <= 1 / (n m)``."""
    n, m = overlaps.P.shape
    return OverlapBound(float(overlaps.P.min()), 1.0 / (n * m), tol)


DISTINGUISHABLE = "distinguishable"
NOT_DISTINGUISHABLE = "not_distinguishable"
UNKNOWN = "unknown"


@dataclass
class Certificate:
    verdict: str
    reason: str
    overlaps: object
    overlap_bound: OverlapBound
    dimension_bound: DimensionBound
    criterion: float | None = None
    factorization: object = None
    infeasible: Infeasible | None = None
    standard_pair: StandardPair | None = None
    isometry: IsometryMap | None = None
    table: MeasurementTable | None = None
    perfect: object = None
    notes: list = field(default_factory=list)

    @property
    def distinguishable(self):
        return self.verdict == DISTINGUISHABLE


def certify_pair(pair, tol=DEFAULT_TOL, **solver_options):
    """Decide and, when possible, witness perfect distinguishability.

    The two necessary conditions run first; a 2x2 pair is then decided by the
    closed-form criterion, larger ones by the factorization search (whose
    failure yields ``unknown``, never a negative verdict).  A positive
    verdict always carries a table that passes the perfect-identification
    check.
    """
    n, m = pair.shape
    if n < 2 or m < 2:
        raise ValueError("certification needs at least two states in each ensemble")
    ov = overlap_data(pair, tol)
    ob = check_overlap_bound(ov, tol)
    db = check_dimension_bound(pair, tol)
    crit = membership_2x2(ov.P, tol).criterion_value if (n, m) == (2, 2) else None
    cert = Certificate(UNKNOWN, "", ov, ob, db, criterion=crit)
    if not ob.satisfied:
        cert.verdict = NOT_DISTINGUISHABLE
        cert.reason = f"minimum overlap {ob.min_overlap:.6g} exceeds 1/(nm) = {ob.bound:.6g}"
        return cert
    if not db.satisfied:
        cert.verdict = NOT_DISTINGUISHABLE
        cert.reason = f"all overlaps nonzero but span dimension {db.span_dim} < {db.bound}"
        return cert

    fact = decompose_general(ov.P, tol, **solver_options)
    if isinstance(fact, Infeasible):
        cert.infeasible = fact
        cert.verdict = NOT_DISTINGUISHABLE if fact.proven else UNKNOWN
        cert.reason = fact.reason
        return cert
    cert.factorization = fact
    sp = standard_pair_from_factorization(ov, fact)
    iso = isometry_from_gram(pair.states(), sp.states(), tol=max(tol, ROUND_TRIP_TOL))
    table = table_from_isometry(iso, (n, m), pair.dim, tol=max(tol, ROUND_TRIP_TOL))
    perfect = check_perfect_conditions(table, pair, max(tol, ROUND_TRIP_TOL))
    if not perfect.ok:
        raise RuntimeError(f"constructed table fails verification: {perfect.violations}")
    cert.standard_pair = sp
    cert.isometry = iso
    cert.table = table
    cert.perfect = perfect
    cert.verdict = DISTINGUISHABLE
    cert.reason = f"factorization residual {fact.residual:.3g}"
    return cert
