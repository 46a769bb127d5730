"""Independent brute-force oracles shared by the tests."""
import itertools
import math

import numpy as np

from growthspeed import WeightSpec

TWO_ATOMS = WeightSpec.discrete([(0.2, 0.8), (0.4, 0.6)])


def brute_masses(levels, n, b):
    """Masses of all length-n words by explicit products, in lexicographic order."""
    out = []
    for word in itertools.product(range(b), repeat=n):
        p = 1.0
        for k, d in enumerate(word):
            p *= levels[k][d]
        out.append(p)
    return np.array(out)


def brute_tau(levels, q, n, b):
    return -math.log(sum(x**q for x in brute_masses(levels, n, b)), b) / n


def _in_window(mass, n, beta, eps, b, tol=1e-9):
    x = math.log(mass, b)
    return -n * (beta + eps) - tol <= x <= -n * (beta - eps) + tol


def brute_first_pass(masses_by_depth, b, n_max, beta, N, eps):
    """p(t) for every depth-n_max word t, by walking each path scale by scale.

    ``masses_by_depth[n]`` lists the depth-n masses in lexicographic order and
    ``eps`` is a function of n.
    """
    out = []
    for t in range(b**n_max):
        last_fail = 0
        for n in range(1, n_max + 1):
            i = t // b ** (n_max - n)
            ok = all(_in_window(masses_by_depth[n][u], n, beta, eps(n), b)
                     for u in range(max(0, i - N), min(b**n - 1, i + N) + 1))
            if not ok:
                last_fail = n
        out.append(last_fail + 1)
    return out


def brute_certificate(sampling_masses, first_pass, p):
    return math.fsum(m for m, q in zip(sampling_masses, first_pass) if q <= p)


def brute_growth_speed(sampling_masses, first_pass, n_max, f):
    for p in range(1, n_max + 1):
        if brute_certificate(sampling_masses, first_pass, p) >= f:
            return p
    return n_max + 1


def brute_count(masses, n, alpha, eps, b):
    return sum(_in_window(m, n, alpha, eps, b) for m in masses)


def brute_gs_prime(masses_by_depth, b, alpha, tau_star, eps, n_lo, n_max):
    """Scan p upward and test every n in [p, n_max] directly."""
    def holds(n):
        c = brute_count(masses_by_depth[n], n, alpha, eps(n), b)
        return c > 0 and n * (tau_star - eps(n)) - 1e-9 <= math.log(c, b) <= n * (tau_star + eps(n)) + 1e-9

    for p in range(n_lo, n_max + 1):
        if all(holds(n) for n in range(p, n_max + 1)):
            return p
    return n_max + 1


def brute_s_n(sm, tm, b, beta, N, eps, eta, n):
    total = 0.0
    for gamma in (-1, 1):
        for v in range(b**n):
            for w in range(max(0, v - N), min(b**n - 1, v + N) + 1):
                total += b ** (n * (beta - gamma * eps) * gamma * eta) * sm[v] * tm[w] ** (gamma * eta)
    return total
