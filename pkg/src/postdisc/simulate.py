"""Monte-Carlo runs of the identify-with-a-late-label protocol.

Each trial draws a cell ``(X, k)`` from the priors, measures ``|phi^X_k>``
with the POVM, and guesses ``k`` from the outcome and the revealed label
``X``.  Random numbers for trial ``t`` come from a counter-based Philox
stream keyed by ``(seed, t // BLOCK)``, so the outcome of every trial is a
function of ``(seed, t)`` alone and threaded runs reproduce serial ones.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_TOL, MeasurementTable, Povm

BLOCK = 4096
POSITIVE_TOL = 1e-9


@dataclass(frozen=True)
class PostProcessor:
    """Guessing rule applied after the label ``X`` is revealed.

    ``guess_a[w, k]`` is the probability of guessing ``k`` for outcome ``w``
    when the state came from ensemble A (likewise ``guess_b``).  A
    deterministic rule is stored as one-hot rows and keeps its maps in
    ``f_a`` / ``f_b``.
    """

    guess_a: np.ndarray
    guess_b: np.ndarray
    f_a: np.ndarray | None = None
    f_b: np.ndarray | None = None

    @property
    def mode(self):
        return "deterministic" if self.f_a is not None else "probabilistic"

    @property
    def outcomes(self):
        return self.guess_a.shape[0]

    @classmethod
    def deterministic(cls, f_a, f_b, n=None, m=None):
        f_a = np.asarray(f_a, dtype=int)
        f_b = np.asarray(f_b, dtype=int)
        if f_a.ndim != 1 or f_a.shape != f_b.shape:
            raise ValueError("f_a and f_b must be 1-D maps over the same outcomes")
        if f_a.min(initial=0) < 0 or f_b.min(initial=0) < 0:
            raise ValueError("guesses must be nonnegative indices")
        n = int(f_a.max(initial=0)) + 1 if n is None else n
        m = int(f_b.max(initial=0)) + 1 if m is None else m
        if f_a.max(initial=0) >= n or f_b.max(initial=0) >= m:
            raise ValueError("guess index out of range")
        ga = np.zeros((f_a.size, n))
        gb = np.zeros((f_b.size, m))
        ga[np.arange(f_a.size), f_a] = 1
        gb[np.arange(f_b.size), f_b] = 1
        return cls(ga, gb, f_a, f_b)

    @classmethod
    def probabilistic(cls, p_a, p_b, tol=DEFAULT_TOL):
        p_a = np.asarray(p_a, dtype=float)
        p_b = np.asarray(p_b, dtype=float)
        for name, p in (("p_a", p_a), ("p_b", p_b)):
            if p.ndim != 2:
                raise ValueError(f"{name} must be an (outcomes, guesses) matrix")
            if p.min() < -tol or np.abs(p.sum(axis=1) - 1).max() > tol:
                raise ValueError(f"rows of {name} must be probability distributions")
        if p_a.shape[0] != p_b.shape[0]:
            raise ValueError("p_a and p_b must cover the same outcomes")
        return cls(np.clip(p_a, 0, None), np.clip(p_b, 0, None))

    @classmethod
    def coordinates(cls, n, m):
        """Outcome ``a * m + b`` guessed as ``a`` under A and ``b`` under B."""
        w = np.arange(n * m)
        return cls.deterministic(w // m, w % m, n, m)

    def guesses(self, label):
        return self.guess_a if label == "A" else self.guess_b


@dataclass(frozen=True)
class MeasurementModel:
    povm: Povm
    post: PostProcessor

    def __post_init__(self):
        if len(self.povm) != self.post.outcomes:
            raise ValueError(
                f"POVM has {len(self.povm)} outcomes, post-processing covers {self.post.outcomes}"
            )

    @classmethod
    def from_table(cls, table: MeasurementTable):
        n, m = table.shape
        return cls(table.as_povm(), PostProcessor.coordinates(n, m))


def born_probabilities(state, povm, tol=DEFAULT_TOL):
    """Outcome distribution and the negative mass that was clamped away."""
    p = povm.probabilities(state)
    clamped = float(-p[p < 0].sum())
    if p.min(initial=0.0) < -tol:
        raise ValueError(f"negative probability {p.min():.3g} beyond tolerance")
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if abs(total - 1) > 1e-6:
        raise ValueError(f"probabilities sum to {total:.9g}, not 1")
    return p / total, clamped


def born_sample(state, povm, rng, tol=DEFAULT_TOL):
    """Draw one outcome index with probability ``<psi|M_w|psi>``."""
    p, _ = born_probabilities(state, povm, tol)
    return int(rng.choice(len(p), p=p))


@dataclass
class ProtocolStats:
    trials: int
    successes: int
    attempts: np.ndarray      # per cell, A cells then B cells
    per_cell: np.ndarray      # successes per cell, same order
    shape: tuple
    seed: int
    max_clamped: float = 0.0

    @property
    def empirical_rate(self):
        return None if self.trials == 0 else self.successes / self.trials

    def cell(self, label, k):
        """``(successes, attempts)`` for ensemble `label`, state `k`."""
        i = k if label == "A" else self.shape[0] + k
        return int(self.per_cell[i]), int(self.attempts[i])


def _cells(pair):
    n, m = pair.shape
    return [("A", k) for k in range(n)] + [("B", k) for k in range(m)], pair.states()


def _priors(pair, priors):
    n, m = pair.shape
    if priors is None:
        return np.full(n + m, 1.0 / (n + m))
    if isinstance(priors, dict):
        priors = np.concatenate([np.asarray(priors["A"], float), np.asarray(priors["B"], float)])
    priors = np.asarray(priors, dtype=float)
    if priors.shape != (n + m,) or priors.min() < 0 or abs(priors.sum() - 1) > 1e-9:
        raise ValueError(f"priors must be a distribution over the {n + m} cells")
    return priors


def _check_model(pair, model):
    n, m = pair.shape
    if model.povm.dim != pair.dim:
        raise ValueError(f"POVM acts on dimension {model.povm.dim}, ensembles on {pair.dim}")
    if model.post.guess_a.shape[1] != n or model.post.guess_b.shape[1] != m:
        raise ValueError("post-processing guesses do not match ensemble sizes")


def outcome_table(pair, povm, tol=DEFAULT_TOL):
    """``born[c, w]`` for every cell ``c`` (A cells first) and outcome ``w``."""
    _, states = _cells(pair)
    rows = [born_probabilities(s, povm, tol) for s in states]
    return np.array([r[0] for r in rows]), max(r[1] for r in rows)


def theoretical_success_rate(pair, model, priors=None):
    """Exact probability that the guess is right, averaged over the priors."""
    _check_model(pair, model)
    cells, _ = _cells(pair)
    born, _ = outcome_table(pair, model.povm)
    pri = _priors(pair, priors)
    rate = 0.0
    for c, (label, k) in enumerate(cells):
        rate += pri[c] * born[c] @ model.post.guesses(label)[:, k]
    return float(rate)


def _inverse_cdf(cum, u):
    # cum rows end at 1 up to round-off; clip keeps the index in range
    idx = (cum <= u[:, None]).sum(axis=1)
    return np.minimum(idx, cum.shape[1] - 1)


def _run_block(block, count, seed, cum_prior, cum_born, labels, ks, cum_guess, n):
    bitgen = np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,)))
    u = np.random.Generator(bitgen).random((count, 3))
    cell = np.minimum(np.searchsorted(cum_prior, u[:, 0], side="right"), len(cum_prior) - 1)
    outcome = _inverse_cdf(cum_born[cell], u[:, 1])
    success = np.zeros(count, dtype=bool)
    for label in ("A", "B"):
        sel = labels[cell] == label
        if sel.any():
            guess = _inverse_cdf(cum_guess[label][outcome[sel]], u[sel, 2])
            success[sel] = guess == ks[cell[sel]]
    ncell = len(cum_prior)
    return (
        np.bincount(cell, minlength=ncell),
        np.bincount(cell[success], minlength=ncell),
    )


def run_protocol(pair, model, trials, seed=0, priors=None, threads=1):
    """Simulate `trials` rounds and tally identification successes."""
    _check_model(pair, model)
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    cells, _ = _cells(pair)
    n, m = pair.shape
    labels = np.array([c[0] for c in cells])
    ks = np.array([c[1] for c in cells])
    born, clamped = outcome_table(pair, model.povm)
    cum_prior = np.cumsum(_priors(pair, priors))
    cum_born = np.cumsum(born, axis=1)
    cum_guess = {x: np.cumsum(model.post.guesses(x), axis=1) for x in ("A", "B")}

    blocks = [(b, min(BLOCK, trials - b * BLOCK)) for b in range(-(-trials // BLOCK))]
    args = (seed, cum_prior, cum_born, labels, ks, cum_guess, n)
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda bc: _run_block(bc[0], bc[1], *args), blocks))
    else:
        parts = [_run_block(b, c, *args) for b, c in blocks]
    attempts = np.zeros(n + m, dtype=np.int64)
    wins = np.zeros(n + m, dtype=np.int64)
    for att, win in parts:
        attempts += att
        wins += win
    return ProtocolStats(int(trials), int(wins.sum()), attempts, wins, (n, m), seed, clamped)


def derandomize(povm, post, pair, tol=DEFAULT_TOL, positive_tol=POSITIVE_TOL):
    """Replace a perfect probabilistic rule by a deterministic one.

    Under a perfect rule any outcome that state ``k`` of ensemble ``X`` can
    produce must be answered with ``k`` for sure.  So for each ``X`` the
    outcomes split into those reachable from exactly one state (answered with
    that state) and those reachable from none (answered with 0).
    """
    n, m = pair.shape
    born, _ = outcome_table(pair, povm, tol)
    maps = {}
    for label, offset, size in (("A", 0, n), ("B", n, m)):
        guesses = post.guesses(label)
        success = np.array([born[offset + k] @ guesses[:, k] for k in range(size)])
        worst = int(np.argmin(success))
        if success[worst] < 1 - tol:
            raise ValueError(
                f"rule is not perfect: state {label}{worst} identified with probability "
                f"{success[worst]:.9g}"
            )
        reach = born[offset:offset + size] > positive_tol   # [k, w]
        shared = np.nonzero(reach.sum(axis=0) > 1)[0]
        if shared.size:
            raise ValueError(f"outcome {int(shared[0])} is reachable from two {label} states")
        f = np.zeros(len(povm), dtype=int)
        ks, ws = np.nonzero(reach)
        f[ws] = ks
        maps[label] = f
    return PostProcessor.deterministic(maps["A"], maps["B"], n, m)
