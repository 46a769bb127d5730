# Random Riesz products
#
# The density prod_k exp(phi(b^k x + theta_k)) with random phases is
# integrated by a midpoint rule a few levels (the guard) below the depth
# that is asked for. These measures are only quasi-Bernoulli: splitting a
# word changes masses by a bounded factor rather than exactly.

# %%
import numpy as np

from growthspeed.measures import generate_riesz, verify_quasi_bernoulli
from growthspeed.spectrum import q_grid, tau_dense

r = generate_riesz(b=2, a=0.5, horizon=24, seed=4, guard=6)
print("depth-3 masses:", np.round(r.masses(3), 4), "sum:", r.masses(3).sum())

# %% [markdown]
# The guard matters little once it is a few levels deep.

# %%
for g in (2, 4, 6, 8):
    print(g, r.with_guard(g).mass("0110"))

# %%
print("quasi-Bernoulli constant at j = n = 4:", verify_quasi_bernoulli(r, 4, 4))

# %%
q = q_grid(-1, 2, 7)
for j in (4, 8, 12):
    print(j, np.round(tau_dense(r, q, j), 4))
