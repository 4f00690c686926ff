# %% [markdown]
# # Which 2x2 overlap matrices can be identified perfectly?
#
# For symmetric matrices P = [[p, q], [q, p]] the closed-form criterion
# reduces to a curve in the (p, q) square.  We print the region on a coarse
# grid ('#' inside, '.' outside) instead of plotting it, then spot-check the
# closed form against the brute-force grid oracle.

# %%
import numpy as np

from postdisc import brute_force_membership, criterion_2x2, membership_2x2

ticks = np.linspace(0, 1, 21)
for q in ticks[::-1]:
    row = "".join("#" if membership_2x2([[p, q], [q, p]]).in_closure else "." for p in ticks)
    print(f"q={q:4.2f} {row}")
print("       p ->")

# %% [markdown]
# The all-1/4 matrix sits exactly on the boundary.

# %%
print(criterion_2x2(np.full((2, 2), 0.25)))

# %% [markdown]
# Random spot checks, skipping a thin band around the boundary where a
# finite grid cannot decide.

# %%
rng = np.random.default_rng(0)
agree = total = 0
while total < 200:
    P = rng.random((2, 2)) * 0.6
    c = criterion_2x2(P)
    if abs(c - 1) < 1e-2:
        continue
    total += 1
    agree += brute_force_membership(P, 256) == (c >= 1)
print(f"{agree}/{total} agree")
