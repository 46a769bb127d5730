# Cylinder masses of multiplicative cascades
#
# Words over {0, ..., b-1} name b-adic intervals. A cascade gives the
# interval of a word the product of one weight per digit, drawn afresh at
# every level.

# %%
import numpy as np

from growthspeed import WeightSpec, generate_cascade
from growthspeed.measures import dense_table
from growthspeed.symbolic import delta, index_of, neighbors, word_of

# %% [markdown]
# Words, indices and neighbours. The distance between two words of the
# same length is the gap between their indices.

# %%
print(index_of("0110"), word_of(6, 4), delta("0110", "1000"))
print([str(u) for u in neighbors("0110", 2)])
print([str(u) for u in neighbors("0000", 2)])  # clipped at the left edge

# %% [markdown]
# A deterministic cascade with weights (1/4, 3/4).

# %%
quarter = generate_cascade(WeightSpec.deterministic([0.25, 0.75]), horizon=32, seed=0)
print("mass of 011:", quarter.mass("011"), "=", 9 / 64)
print("depth-3 table:", np.round(dense_table(quarter, 3), 5))

# %% [markdown]
# A random cascade: each level picks one of two weight pairs. The same
# seed always gives the same levels, and the copy mu^(j) just reads the
# realization from level j+1 on.

# %%
spec = WeightSpec.discrete([(0.2, 0.8), (0.4, 0.6)])
m = generate_cascade(spec, horizon=40, seed=3)
print("first levels:\n", m.levels[:4])
copy = m.shift(2)
print("copy 2 at depth 1:", copy.masses(1), "level 3 weights:", m.levels[2])

# %%
child = m.masses(8).reshape(-1, 2).sum(axis=1)
print("parents equal the sum of their children:", np.allclose(child, m.masses(7)))
