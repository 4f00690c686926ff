# %% [markdown]
# # A pair with one orthogonal cross overlap
#
# A = (|1+2>, |3+4>), B = (|0+3>, |2+4>) in C^5.  The first states of the
# two ensembles are orthogonal, which puts the overlap matrix on the edge of
# the decomposable region.

# %%
import numpy as np

from postdisc import certify_pair, check_perfect_conditions, naimark_from_rank1_table
from postdisc.construct import RankError
from postdisc.fixtures import five_level_pair, five_level_table

np.set_printoptions(precision=4, suppress=True)
pair = five_level_pair()
cert = certify_pair(pair)
print(cert.verdict)
print("P =\n", cert.overlaps.P)

# %% [markdown]
# The zero overlap is reproduced exactly: B vanishes on that cell.

# %%
print("A =\n", cert.factorization.A)
print("B =\n", cert.factorization.B)
print("residual", cert.factorization.residual)

# %% [markdown]
# Squared amplitudes of the standard pair are exactly A and B.

# %%
print(np.abs(cert.standard_pair.alpha) ** 2)
print(np.abs(cert.standard_pair.beta) ** 2)

# %% [markdown]
# The isometry from C^5 onto the standard pair's space, as rows <psi_ab|.
# Its kernel is the orthogonal complement of the states' span, which is
# folded into the first operator of the table.

# %%
print(cert.isometry.matrix)
print("rank", cert.isometry.rank, "of", cert.isometry.source_dim)
print(check_perfect_conditions(cert.table, pair, 1e-8))

# %% [markdown]
# A hand-made table with a rank-two first operator also works, but it
# cannot come from a rank-one embedding.

# %%
print(check_perfect_conditions(five_level_table(), pair).ok)
try:
    naimark_from_rank1_table(five_level_table())
except RankError as exc:
    print("RankError:", exc)
