# Growth speeds of copies of a random cascade
#
# A point passes scale n when its depth-n cylinder and its N neighbours
# all have masses in the window b^-n(beta +- eps_n). GS is the first p from
# which half of the tilted measure passes every scale up to the horizon.

# %%
import numpy as np

from growthspeed import WeightSpec, generate_cascade
from growthspeed.harness import renewal_scale
from growthspeed.singularity import WindowParams, growth_speed, growth_speed_prime, membership_certificate
from growthspeed.spectrum import EpsilonSchedule, tau_oracle, tau_oracle_prime, tilted_measure

spec = WeightSpec.discrete([(0.2, 0.8), (0.4, 0.6)])
n_max, q = 12, 1.0
alpha = tau_oracle_prime(spec, q)
tstar = alpha * q - tau_oracle(spec, q)
eps = EpsilonSchedule()

# %% [markdown]
# One realization: how much tilted mass has settled by scale p.

# %%
m = generate_cascade(spec, horizon=300, seed=0)
target = m.shift(16)
sampling = tilted_measure(target, q, n_max)
params = WindowParams(beta=alpha, N=1, eps=eps, n_max=n_max)
print([round(membership_certificate(sampling, target, params, p), 3) for p in range(1, n_max + 1)])

# %% [markdown]
# GS and the count-based GS' over a few copies, next to the renewal
# scale ceil(exp(sqrt(1.5 log j))).

# %%
for j in (0, 4, 16, 64, 256):
    t = m.shift(j)
    s = tilted_measure(t, q, n_max)
    gs = growth_speed(s, t, params).gs
    gsp = growth_speed_prime(t, alpha, tstar, eps, 1, n_max).gs_prime
    print(f"j={j:>3}  GS={gs}  GS'={gsp}  S_j={renewal_scale(j)}")

# %% [markdown]
# Across seeds GS_j has the same law for every j, so the medians do not
# grow with j; what shrinks is GS_j / j.

# %%
def gs_of(seed, j):
    t = generate_cascade(spec, 300, seed).shift(j)
    return growth_speed(tilted_measure(t, q, n_max), t, params).gs


js = np.array([4, 16, 64, 256])
gs = np.array([[gs_of(s, j) for j in js] for s in range(20)])
print("medians:", np.median(gs, axis=0), " median GS/j:", np.median(gs, axis=0) / js)
