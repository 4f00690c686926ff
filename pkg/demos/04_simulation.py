# %% [markdown]
# # Monte-Carlo runs and derandomized guessing
#
# The BB84 ensembles (computational vs Hadamard basis) cannot be identified
# perfectly.  Measuring in the computational basis and guessing 0 for any
# B state succeeds with probability 3/4.

# %%
import numpy as np

from postdisc import (
    MeasurementModel,
    PostProcessor,
    Povm,
    certify_pair,
    derandomize,
    run_protocol,
    theoretical_success_rate,
)
from postdisc.fixtures import bb84_pair, five_level_pair

basis = Povm(np.array([np.diag([1.0, 0.0]), np.diag([0.0, 1.0])], dtype=complex))
model = MeasurementModel(basis, PostProcessor.deterministic([0, 1], [0, 0], 2, 2))
pair = bb84_pair()
print("exact", theoretical_success_rate(pair, model))
for seed in range(3):
    print("seed", seed, run_protocol(pair, model, 100_000, seed=seed).empirical_rate)

# %% [markdown]
# Trials draw their random numbers from a counter-based stream keyed by the
# trial index, so the thread count does not change the outcome.

# %%
one = run_protocol(pair, model, 50_000, seed=1, threads=1)
four = run_protocol(pair, model, 50_000, seed=1, threads=4)
print(one.per_cell, four.per_cell)

# %% [markdown]
# A randomized guessing rule that is perfect can always be replaced by a
# deterministic one.  Outcomes that no state of a label can produce are
# answered with 0.

# %%
pair = five_level_pair()
povm = certify_pair(pair).table.as_povm()
coords = PostProcessor.coordinates(2, 2)
born = np.array([povm.probabilities(s) for s in pair.states()])
print("outcome probabilities per state:\n", born.round(4))
pa = coords.guess_a.copy()
pa[born[:2].max(axis=0) < 1e-9] = 0.5
noisy = PostProcessor.probabilistic(pa, coords.guess_b)
det = derandomize(povm, noisy, pair)
print("f_A =", det.f_a, "f_B =", det.f_b)
print("rate", theoretical_success_rate(pair, MeasurementModel(povm, det)))
