# %% [markdown]
# # Two qubit-like ensembles in three dimensions
#
# Ensemble A holds |0+1> and |0-1>, ensemble B holds |0+2> and |0-2>.
# Every cross overlap is 1/4, which is as large as it can be while the
# state can still be identified once the label is announced.

# %%
import numpy as np

from postdisc import (
    MeasurementModel,
    certify_pair,
    check_dimension_bound,
    check_overlap_bound,
    naimark_from_rank1_table,
    run_protocol,
)
from postdisc.fixtures import plus_minus_pair

np.set_printoptions(precision=4, suppress=True)
pair = plus_minus_pair()
cert = certify_pair(pair)
print(cert.verdict, "| criterion", cert.criterion)
print("P =\n", cert.overlaps.P)

# %% [markdown]
# The overlap matrix factors as A * B with every entry 1/2.

# %%
print("A =\n", cert.factorization.A)
print("B =\n", cert.factorization.B)

# %% [markdown]
# The measurement table: four rank-one operators, one per (a, b) cell.

# %%
for a in range(2):
    for b in range(2):
        M = cert.table.operators[a, b]
        print(f"M[{a},{b}] (trace {np.trace(M).real:.3f}) =\n{M.real}")

# %% [markdown]
# Since every operator has rank one, the table also comes from an
# embedding into C^4 followed by a basis measurement.  The embedding sends
# the A states to |0+>, |1+> and the B states to |+0>, |+1>.

# %%
V = naimark_from_rank1_table(cert.table)
print(V.apply(pair.states()))

# %% [markdown]
# Both necessary conditions hold with equality here.

# %%
print(check_overlap_bound(cert.overlaps))
print(check_dimension_bound(pair))

# %% [markdown]
# A simulated run never fails.

# %%
stats = run_protocol(pair, MeasurementModel.from_table(cert.table), 100_000, seed=0)
print(stats.successes, "/", stats.trials)
