# ---
# jupyter:
#   jupytext:
#     formats: py:percent
#     text_representation:
#       format_name: percent
# ---

# %% [markdown]
# # Mining small mechanism spaces
#
# Mechanisms on a grid of lotteries with denominator q, enumerated by a
# mixed-radix cursor. For each mechanism the choice function is forced by what
# survives deletion, so only one candidate per mechanism is checked.

# %%
from domlab.constructions import hat_mechanism
from domlab.search import SearchSpace, cursor_of, mine, shard_range

space = SearchSpace(n_outcomes=2, strategy_counts=(2, 2), q=4, notion="UD")
print(space.size)
rep = mine(space)
print(rep.summary())

# %% [markdown]
# Shards are contiguous cursor ranges, so a large space can be split over
# several processes and the reports merged afterwards.

# %%
print([shard_range(space, k, 4) for k in range(4)])

# %% [markdown]
# The 3x3 mechanism with quarter-probability cells sits in the q = 4 space on
# three outcomes. Mining one cursor either side of it finds certified hits.

# %%
big = SearchSpace(n_outcomes=3, strategy_counts=(3, 3), q=4, notion="UDINF")
c = cursor_of(big, hat_mechanism())
print(big.size, c)
rep = mine(big, c - 50, c + 50)
print(rep.summary())
hit = rep.counterexamples[0]
print(hit["cursor"], hit["scf"])
