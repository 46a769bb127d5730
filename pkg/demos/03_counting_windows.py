# Counting cylinders in an exponent window
#
# N_n counts depth-n words with mass between b^-n(alpha+eps) and
# b^-n(alpha-eps). At alpha = tau'(q) the count grows like b^(n tau*),
# and a Markov-type argument bounds it from above.

# %%
import math

from growthspeed import WeightSpec, generate_cascade
from growthspeed.spectrum import (
    EpsilonSchedule,
    count_Nn,
    markov_count_bound,
    tau_oracle,
    tau_oracle_prime,
)

spec = WeightSpec.deterministic([0.25, 0.75])
m = generate_cascade(spec, horizon=24, seed=0)
eps = EpsilonSchedule(c=1.0, eta=0.1)

# %%
q = 1.0
alpha = tau_oracle_prime(spec, q)
tstar = alpha * q - tau_oracle(spec, q)
beta = 1 + 1.5
print(f"alpha = {alpha:.5f}, tau* = {tstar:.5f}")
print(" n   count   log2(count)/n   sandwich with beta = 2.5   Markov bound")
for n in range(8, 21, 2):
    e = eps(n)
    c = count_Nn(m, n, alpha, e)
    lo, hi = n * (tstar - beta * e), n * (tstar + beta * e)
    inside = lo <= math.log2(c) <= hi
    print(f"{n:2d} {c:7d}   {math.log2(c) / n:.4f}          {inside}"
          f"                   {markov_count_bound(m, n, q, e, alpha):.3g}")

# %% [markdown]
# At these depths the default eps_n is close to 1, so the window above
# swallows every word. A fixed eps = 0.1 (wide enough to catch the
# lattice of exponents log2 of these masses live on) shows the b^(n tau*) growth
# at q = 0.5, where tau* is well below 1.

# %%
q = 0.5
alpha = tau_oracle_prime(spec, q)
tstar = alpha * q - tau_oracle(spec, q)
print(f"q = {q}: alpha = {alpha:.5f}, tau* = {tstar:.5f}")
for n in range(8, 21, 4):
    c = count_Nn(m, n, alpha, 0.1)
    print(f"n={n:2d}  count={c:6d}  log2(count)/n={math.log2(c) / n:.4f}"
          f"  Markov bound={markov_count_bound(m, n, q, 0.1, alpha):.1f}")
