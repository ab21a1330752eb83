# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       format_name: percent
# ---

# %% [markdown]
# # The star mechanism
#
# Three labelled outcomes form a small core, the rest attach to it. With four
# or five outcomes deletion finishes in three rounds at every state.

# %%
from domlab.constructions import StarLabels, hat_mechanism, mechanism_differences, star_problem
from domlab.dominance import robust_udinf
from domlab.verify import verify_udinf

mech, problem = star_problem("abcd")
print(mech.shape, len(problem.theta_set), "states")

# %%
for theta in problem.theta_set[:6]:
    _, trace = robust_udinf(mech, theta)
    print(theta, [str(trace.survivors_after(k)) for k in (1, 2, 3)], problem.scf(theta))

# %%
print(verify_udinf(mech, problem).status)

# %% [markdown]
# Restricted to three outcomes the star is not the 3x3 mechanism from the
# other walkthrough. Five cells differ.

# %%
from domlab.constructions import star_mechanism

small = star_mechanism("abc", StarLabels("a", "b", "c"))
for p, x, y in mechanism_differences(small, hat_mechanism()):
    print(p, x, "vs", y)
