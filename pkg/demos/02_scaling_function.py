# The scaling function and its Legendre transform
#
# tau_j(q) = -(1/j) log_b sum over depth-j cylinders of mu([w])^q. For
# cascades with finitely many weight vectors, the limit has a closed form.

# %%
import numpy as np

from growthspeed import WeightSpec, generate_cascade
from growthspeed.spectrum import (
    ScalingSample,
    interval_J,
    legendre,
    q_grid,
    tau_dense,
    tau_levels,
    tau_oracle,
    tau_prime,
)

spec = WeightSpec.discrete([(0.2, 0.8), (0.4, 0.6)])
q = q_grid(-2, 2, 21)

# %% [markdown]
# Dense enumeration and the per-level fast path agree on every cascade.

# %%
m = generate_cascade(spec, horizon=100000, seed=1)
print("dense vs levels at j = 10:", np.abs(tau_dense(m, q, 10) - tau_levels(m, q, 10)).max())

# %% [markdown]
# tau_j approaches the closed form as j grows, roughly like n^(-1/2).

# %%
limit = tau_oracle(spec, q)
for j in (10, 100, 1000, 10000, 100000):
    print(f"j={j:>6}  sup |tau_j - tau| = {np.abs(tau_levels(m, q, j) - limit).max():.5f}")

# %% [markdown]
# Legendre transform on the grid, with the interval J where
# tau'(q) q - tau(q) > 0.

# %%
ts = ScalingSample.from_oracle(spec, q)
print("J on this grid:", interval_J(ts))
for qq in (0.0, 0.5, 1.0, 1.5):
    a = tau_prime(ts, qq)
    r = legendre(ts, a)
    print(f"q={qq:3.1f}  alpha={a:.4f}  tau*(alpha)={r.value:.4f}  argmin q={r.argmin_q:+.2f}")
