# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       format_name: percent
# ---

# %% [markdown]
# # Truncating the announcement mechanism
#
# Strategies are triples (outcome, integer, outcome) with the integer capped
# at N. The cap makes the game finite so deletion can run exactly.

# %%
from fractions import Fraction as F

import numpy as np

from domlab.constructions import n_threshold
from domlab.core import Preference
from domlab.dominance import expected_utility, payoff_matrix
from domlab.domains import canonical_cardinal
from domlab.reproduce import check_truncation_state, truncation_setup

N = 6
mech, base, states = truncation_setup(N)
print(mech.shape, base)

# %% [markdown]
# How large must the integer be before announcing it beats the low ones?

# %%
u = {"b": F(1), "a": F(9, 10), "c": F(0)}
print(n_threshold(u, Preference.parse("b>a>c")))
print(n_threshold({"a": 1, "b": 0}, Preference.parse("a>b")))

# %% [markdown]
# Checking the step dominances at canonical utilities, state by state.

# %%
for theta in states:
    res = check_truncation_state(mech, base, theta, N, [canonical_cardinal(theta)])
    print(theta, res.step_failures, res.threshold_failures, res.projection_failures)

# %% [markdown]
# At N = 12 the threshold step is where things go wrong. With these utilities
# for agent 1 the threshold is 11, yet announcing 11 does not beat the plain
# announcement of the shared middle outcome against every column.

# %%
mech12, base12, _ = truncation_setup(12)
u1 = {"b": F(1), "a": F(9, 10), "c": F(0)}
pay = payoff_matrix(mech12, "i1", u1)
rows = {s: k for k, s in enumerate(mech12.strategies[0])}
gap = pay[rows["a|11|b"]] - pay[rows["a|1|a"]]
worst = int(np.argmin(gap))
col = mech12.strategies[1][worst]
for row in ("a|11|b", "a|1|a"):
    print(row, "against", col, expected_utility(u1, mech12.g((row, col))))
