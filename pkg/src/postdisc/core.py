"""Ensembles, measurement tables and the checks every other module relies on.

Vectors and operators are plain numpy arrays.  An ensemble stores its states
as rows, so ``ensemble.states[k]`` is the k-th ket.  A measurement table
stores its operators with shape ``(n, m, d, d)`` where ``n`` and ``m`` are the
sizes of the A and B ensembles.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-9


class EnsembleError(ValueError):
    """Raised when an ensemble or ensemble pair is malformed."""


def _as_complex(x, ndim=None, name="array"):
    arr = np.array(x, dtype=complex)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    arr.setflags(write=False)
    return arr


def ket(*amplitudes, normalize=True):
    """Build a ket from amplitudes, normalized by default.

    >>> ket(1, 1, 0)          # |0+1> in dimension 3
    array([0.70710678+0.j, 0.70710678+0.j, 0.        +0.j])
    """
    v = np.array(amplitudes, dtype=complex)
    if normalize:
        v = v / np.linalg.norm(v)
    return v


def projector(v):
    """Rank-one operator ``|v><v|`` (not normalized)."""
    v = np.asarray(v, dtype=complex)
    return np.outer(v, v.conj())


@dataclass(frozen=True)
class PureEnsemble:
    """Indexed family of orthonormal kets in a common Hilbert space."""

    states: np.ndarray
    label: str = "A"
    tol: float = field(default=DEFAULT_TOL, repr=False, compare=False)

    def __post_init__(self):
        states = _as_complex(self.states, ndim=2, name="states")
        if states.shape[0] == 0:
            raise EnsembleError("ensemble must contain at least one state")
        object.__setattr__(self, "states", states)
        if self.label not in ("A", "B"):
            raise EnsembleError(f"label must be 'A' or 'B', got {self.label!r}")
        gram = states.conj() @ states.T
        dev = np.abs(gram - np.eye(len(states)))
        if dev.max() > self.tol:
            i, j = np.unravel_index(np.argmax(dev), dev.shape)
            if i == j:
                raise EnsembleError(
                    f"ensemble {self.label}: state {i} has norm^2 {gram[i, i].real:.3g}, "
                    "expected 1"
                )
            raise EnsembleError(
                f"ensemble {self.label}: states {min(i, j)} and {max(i, j)} are not "
                f"orthogonal (|<.|.>| = {dev[i, j]:.3g})"
            )

    @property
    def dim(self):
        return self.states.shape[1]

    def __len__(self):
        return self.states.shape[0]


@dataclass(frozen=True)
class EnsemblePair:
    """The two subensembles (A, B) whose label is revealed after measuring."""

    a: PureEnsemble
    b: PureEnsemble

    def __post_init__(self):
        if self.a.dim != self.b.dim:
            raise EnsembleError(
                f"ensembles live in different dimensions ({self.a.dim} vs {self.b.dim})"
            )

    @classmethod
    def from_states(cls, states_a, states_b, tol=DEFAULT_TOL):
        return cls(PureEnsemble(states_a, "A", tol), PureEnsemble(states_b, "B", tol))

    @property
    def dim(self):
        return self.a.dim

    @property
    def shape(self):
        return len(self.a), len(self.b)

    def states(self):
        """All kets, A-ensemble first, as rows of one array."""
        return np.vstack([self.a.states, self.b.states])

    def span_basis(self, tol=DEFAULT_TOL):
        """Orthonormal basis (columns) of the span of all states."""
        return orthonormal_basis(self.states(), tol)[0]


@dataclass(frozen=True)
class OverlapData:
    """Squared overlaps ``P[a, b] = |<a|b>|^2`` and their phases.

    ``theta[a, b]`` lies in (-pi, pi] and is exactly 0 wherever the overlap
    vanishes, so ``<a|b> = exp(1j*theta) * sqrt(P)``.
    """

    P: np.ndarray
    theta: np.ndarray

    @property
    def amplitudes(self):
        return np.exp(1j * self.theta) * np.sqrt(self.P)


def overlap_data(pair, tol=DEFAULT_TOL):
    """Cross overlaps between the A and B states of `pair`."""
    inner = pair.a.states.conj() @ pair.b.states.T
    P = np.abs(inner) ** 2
    theta = np.angle(inner)
    # np.angle returns -pi for negative reals; move it to +pi
    theta[np.isclose(theta, -np.pi, rtol=0, atol=1e-15)] = np.pi
    theta[P < tol] = 0.0
    P.setflags(write=False)
    theta.setflags(write=False)
    return OverlapData(P, theta)


def gram_matrix(states):
    """``G[i, j] = <psi_i|psi_j>`` for the kets given as rows of `states`."""
    states = np.asarray(states, dtype=complex)
    if states.ndim != 2 or states.shape[0] == 0:
        raise ValueError("gram_matrix needs a non-empty 2-D array of kets (rows)")
    return states.conj() @ states.T


def orthonormal_basis(vectors, tol=DEFAULT_TOL):
    """Greedy rank-revealing Gram-Schmidt in index order.

    Parameters
    ----------
    vectors : array_like
        Kets as rows.
    tol : float
        A vector whose component orthogonal to the previously kept ones has
        norm below `tol` is treated as dependent.

    Returns
    -------
    basis : ndarray
        ``(dim, r)`` matrix with orthonormal columns spanning the rows.
    kept : list of int
        Indices of the independent subfamily, in order.
    """
    vectors = np.asarray(vectors, dtype=complex)
    basis = []
    kept = []
    for i, v in enumerate(vectors):
        w = v.copy()
        # two passes keep orthogonality at machine precision
        for _ in range(2):
            for q in basis:
                w -= q * np.vdot(q, w)
        norm = np.linalg.norm(w)
        if norm > tol:
            basis.append(w / norm)
            kept.append(i)
    if not basis:
        return np.zeros((vectors.shape[1], 0), dtype=complex), kept
    return np.array(basis).T, kept


def hermitian_part(M):
    return (M + M.conj().swapaxes(-1, -2)) / 2


@dataclass(frozen=True)
class Povm:
    """POVM over a finite outcome set, operators stacked as ``(K, d, d)``."""

    operators: np.ndarray

    def __post_init__(self):
        ops = _as_complex(self.operators, ndim=3, name="operators")
        if ops.shape[1] != ops.shape[2]:
            raise ValueError(f"operators must be square, got {ops.shape[1:]}")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self):
        return self.operators.shape[1]

    def __len__(self):
        return self.operators.shape[0]

    def probabilities(self, state):
        """Born-rule probabilities ``<psi|M_w|psi>`` (real part, unclamped)."""
        state = np.asarray(state, dtype=complex)
        return np.einsum("i,kij,j->k", state.conj(), self.operators, state).real


@dataclass(frozen=True)
class MeasurementTable:
    """POVM indexed by ``(a, b)``; operators stacked as ``(n, m, d, d)``."""

    operators: np.ndarray

    def __post_init__(self):
        ops = _as_complex(self.operators, ndim=4, name="operators")
        if ops.shape[2] != ops.shape[3]:
            raise ValueError(f"operators must be square, got {ops.shape[2:]}")
        object.__setattr__(self, "operators", ops)

    @property
    def dim(self):
        return self.operators.shape[2]

    @property
    def shape(self):
        return self.operators.shape[:2]

    def as_povm(self):
        """Flatten to a Povm with outcome index ``a * m + b``."""
        n, m, d, _ = self.operators.shape
        return Povm(self.operators.reshape(n * m, d, d))

    @classmethod
    def from_povm(cls, povm, shape):
        n, m = shape
        return cls(np.asarray(povm.operators).reshape(n, m, povm.dim, povm.dim))


@dataclass
class Violation:
    kind: str
    index: tuple
    magnitude: float

    def __str__(self):
        return f"{self.kind} at {self.index}: {self.magnitude:.3g}"


@dataclass
class PovmReport:
    violations: list

    @property
    def ok(self):
        return not self.violations


def validate_povm(t, tol=DEFAULT_TOL):
    """Check Hermiticity, positivity and completeness of a Povm or table.

    Violations are returned, not raised.  Indices refer to the outcome
    (flat for a Povm, ``(a, b)`` for a table); the completeness violation is
    reported at index ``()`` with the spectral norm of ``sum(M) - I``.
    """
    table = isinstance(t, MeasurementTable)
    ops = t.operators
    flat = ops.reshape(-1, t.dim, t.dim)
    violations = []
    for k, M in enumerate(flat):
        idx = tuple(int(i) for i in np.unravel_index(k, ops.shape[:-2])) if table else (k,)
        asym = np.abs(M - M.conj().T).max()
        if asym > tol:
            violations.append(Violation("hermiticity", idx, float(asym)))
        lam_min = np.linalg.eigvalsh(hermitian_part(M))[0]
        if lam_min < -tol:
            violations.append(Violation("positivity", idx, float(-lam_min)))
    total = flat.sum(axis=0) - np.eye(t.dim)
    defect = np.linalg.norm(total, 2)
    if defect > tol:
        violations.append(Violation("completeness", (), float(defect)))
    return PovmReport(violations)


@dataclass
class PerfectReport:
    """Outcome of :func:`check_perfect_conditions`.

    ``sums_a[a]`` is ``sum_b <a|M_ab|a>`` and ``sums_b[b]`` is
    ``sum_a <b|M_ab|b>``; ``kernel_max`` is the largest ``||M_ab phi||`` over
    states that must be annihilated.
    """

    sums_a: np.ndarray
    sums_b: np.ndarray
    kernel_max: float
    violations: list
    kernel_violations: list
    forms_agree: bool

    @property
    def ok(self):
        return not self.violations


def check_perfect_conditions(t, pair, tol=DEFAULT_TOL):
    """Does table `t` identify every state of `pair` with certainty?

    Both the probability-sum form and the kernel form are evaluated.  The
    report is ``ok`` when every sum equals 1 within `tol`.  Kernel leaks are
    judged against ``sqrt(tol)``; ``forms_agree`` is False when the two forms
    give different verdicts, which signals a numerical problem.
    """
    n, m = pair.shape
    if t.shape != (n, m):
        raise ValueError(f"table shape {t.shape} does not match ensemble sizes {(n, m)}")
    if t.dim != pair.dim:
        raise ValueError(f"table acts on dimension {t.dim}, ensembles on {pair.dim}")
    ops = t.operators
    phi_a = pair.a.states
    phi_b = pair.b.states
    # action[a, b, k, :] = M_ab |phi_k>
    act_a = np.einsum("abij,kj->abki", ops, phi_a)
    act_b = np.einsum("abij,kj->abki", ops, phi_b)
    diag_a = np.einsum("ai,abai->ab", phi_a.conj(), act_a).real
    diag_b = np.einsum("bi,abbi->ab", phi_b.conj(), act_b).real
    sums_a = diag_a.sum(axis=1)
    sums_b = diag_b.sum(axis=0)

    violations = []
    for a in range(n):
        if abs(sums_a[a] - 1) > tol:
            violations.append(Violation("sum_a", (a,), float(abs(sums_a[a] - 1))))
    for b in range(m):
        if abs(sums_b[b] - 1) > tol:
            violations.append(Violation("sum_b", (b,), float(abs(sums_b[b] - 1))))

    norms_a = np.linalg.norm(act_a, axis=-1)  # [a, b, a']
    norms_b = np.linalg.norm(act_b, axis=-1)  # [a, b, b']
    kern_a = np.where(~np.eye(n, dtype=bool)[:, None, :], norms_a, 0.0).max(axis=-1)
    kern_b = np.where(~np.eye(m, dtype=bool)[None, :, :], norms_b, 0.0).max(axis=-1)
    kern = np.maximum(kern_a, kern_b)
    kernel_max = float(kern.max())
    # ||M phi||^2 <= <phi|M|phi> for M <= I, so a probability leak of size tol
    # shows up as a kernel leak of size sqrt(tol)
    kernel_tol = np.sqrt(tol)
    kernel_violations = [
        Violation("kernel", (a, b), float(kern[a, b]))
        for a in range(n)
        for b in range(m)
        if kern[a, b] > kernel_tol
    ]
    forms_agree = (not violations) == (not kernel_violations)
    return PerfectReport(sums_a, sums_b, kernel_max, violations, kernel_violations, forms_agree)
