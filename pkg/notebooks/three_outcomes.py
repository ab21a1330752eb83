# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       format_name: percent
# ---

# %% [markdown]
# # Three outcomes, two agents
#
# A 3x3 mechanism whose strategies are named after the outcomes. Diagonal cells
# are degenerate; the off-diagonal cells mix two outcomes. We look at what
# survives one round of deletion and what survives the fixed point.

# %%
from domlab.constructions import hat_problem
from domlab.dominance import robust_udinf, ud1_at
from domlab.domains import canonical_cardinal
from domlab.formats import render_trace_table
from domlab.verify import verify_ud, verify_udinf

mech, problem = hat_problem()
for p in mech.profiles():
    print(p, mech.g(p))

# %% [markdown]
# The choice function picks the shared top at the six unanimous states and `a`
# at the one state where the agents disagree.

# %%
theta = problem.theta_set[-1]
print(theta, "->", problem.scf(theta))

# %% [markdown]
# Robust deletion at every state. Each column is a state; rows are rounds.

# %%
cols = [(str(t), robust_udinf(mech, t)[1]) for t in problem.theta_set]
print(render_trace_table(cols, mech.agents))

# %% [markdown]
# One round is not enough. At the canonical utilities of the disagreement state
# both agents keep two strategies, and the profile (b, c) survives with a
# half/half lottery.

# %%
print(ud1_at(mech, canonical_cardinal(theta)))
rep = verify_ud(mech, problem)
w = rep.result(theta).verdict.witness
print(rep.status, w.profile, w.lottery)

# %%
print(verify_udinf(mech, problem).status)
