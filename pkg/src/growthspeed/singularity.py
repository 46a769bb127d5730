"""Neighbour-windowed singularity sets and growth speeds.

A point t passes scale n when every cylinder w of length n with
delta(w, t|n) <= N satisfies

    b^{-n(beta + eps_n)} <= mu([w]) <= b^{-n(beta - eps_n)}.

Neighbours falling outside [0, b^n - 1] are ignored. All sets are
truncated at a horizon n_max: ``E_{beta,p}`` is the set of t passing
every scale n in [p, n_max], a finite union of depth-n_max cylinders, so
its measure under a sampling measure is an exact finite sum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._io import write_csv
from .measures import MeasureView
from .spectrum import LOG_TOL, EpsilonSchedule, count_Nn, tau_j
from .symbolic import as_word, boundary_words, check_dense, neighbors, window_extrema


@dataclass(frozen=True)
class WindowParams:
    beta: float
    N: int = 1
    eps: EpsilonSchedule = field(default_factory=EpsilonSchedule)
    n_max: int = 16

    def __post_init__(self):
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if self.N < 0:
            raise ValueError("N must be >= 0")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")


@dataclass
class MembershipTrace:
    word: str
    passes: np.ndarray  # passes[n-1] for n = 1..n_max
    first_all_pass_p: int


@dataclass
class GrowthSpeedReport:
    j: int
    gs: Optional[int]
    gs_prime: Optional[int]
    n_max: int
    f: float
    censored: bool
    beta: Optional[float] = None
    N: Optional[int] = None


def _bounds(n, beta, eps):
    return -n * (beta + eps) - LOG_TOL, -n * (beta - eps) + LOG_TOL


def window_pass(m: MeasureView, t_prefix, params: WindowParams) -> bool:
    """Whether the prefix and its delta-neighbours all sit in the mass window."""
    w = as_word(t_prefix, m.b)
    n = len(w)
    if n == 0:
        return True
    lo, hi = _bounds(n, params.beta, params.eps(n))
    lb = math.log(m.b)
    for u in neighbors(w, params.N, m.b):
        x = m.log_mass(u) / lb
        if not lo <= x <= hi:
            return False
    return True


def pass_table(m: MeasureView, params: WindowParams, n: int) -> np.ndarray:
    """Boolean array over all depth-n cylinders: does the window test pass there."""
    logb = m.log_masses(n) / math.log(m.b)
    low, high = window_extrema(logb, params.N)
    lo, hi = _bounds(n, params.beta, params.eps(n))
    return (low >= lo) & (high <= hi)


def first_pass_depths(target: MeasureView, params: WindowParams) -> np.ndarray:
    """p(v) for every depth-n_max cylinder v: one past the last failing scale."""
    b, n_max = target.b, params.n_max
    size = check_dense(b, n_max)
    last_fail = np.zeros(size, dtype=np.int64)
    for n in range(1, n_max + 1):
        fail = ~pass_table(target, params, n)
        expanded = np.repeat(fail, b ** (n_max - n))
        last_fail[expanded] = n
    return last_fail + 1


def membership_trace(target: MeasureView, t, params: WindowParams) -> MembershipTrace:
    t = as_word(t, target.b)
    if len(t) < params.n_max:
        raise ValueError("trace needs a word of length >= n_max")
    passes = np.array([window_pass(target, t.prefix(n), params)
                       for n in range(1, params.n_max + 1)])
    fails = np.flatnonzero(~passes)
    p = int(fails[-1]) + 2 if fails.size else 1
    return MembershipTrace(str(t.prefix(params.n_max)), passes, p)


def pass_bitmaps(target: MeasureView, params: WindowParams) -> dict:
    """Per-depth pass/fail arrays, for debugging and export."""
    return {n: pass_table(target, params, n) for n in range(1, params.n_max + 1)}


def _certificates(sampling: MeasureView, target: MeasureView, params: WindowParams) -> np.ndarray:
    """cert[p-1] = sampling mass of the truncated E_{beta,p}, p = 1..n_max+1."""
    if sampling.b != target.b:
        raise ValueError("sampling and target measures have different bases")
    p_of_v = first_pass_depths(target, params)
    mass = sampling.masses(params.n_max)
    out = np.empty(params.n_max + 1)
    for p in range(1, params.n_max + 2):
        out[p - 1] = math.fsum(mass[p_of_v <= p])
    out[-1] = 1.0
    return np.minimum(out, 1.0)


def membership_certificate(sampling: MeasureView, target: MeasureView,
                           params: WindowParams, p: int) -> float:
    if p < 1:
        raise ValueError("p must be >= 1")
    if p > params.n_max:
        return 1.0
    return float(_certificates(sampling, target, params)[p - 1])


def growth_speed(sampling: MeasureView, target: MeasureView, params: WindowParams,
                 f: float = 0.5, j: int = 0) -> GrowthSpeedReport:
    """Smallest p whose truncated E_{beta,p} carries sampling mass >= f.

    Truncation at n_max makes this a lower bound for the untruncated
    quantity; ``gs == n_max + 1`` means not reached and sets ``censored``.
    """
    if not 0 < f < 1:
        raise ValueError("fraction f must lie in (0, 1)")
    cert = _certificates(sampling, target, params)
    gs = int(np.argmax(cert >= f)) + 1
    return GrowthSpeedReport(j=j, gs=gs, gs_prime=None, n_max=params.n_max, f=f,
                             censored=gs > params.n_max, beta=params.beta, N=params.N)


def sandwich_holds(count: int, n: int, center: float, eps: float, b: int) -> bool:
    if count <= 0:
        return False
    x = math.log(count, b)
    return n * (center - eps) - LOG_TOL <= x <= n * (center + eps) + LOG_TOL


def growth_speed_prime(m: MeasureView, alpha: float, tau_star: float, eps: EpsilonSchedule,
                       n_lo: int, n_max: int, j: int = 0) -> GrowthSpeedReport:
    """Smallest p in [n_lo, n_max] with b^{n(tau*-eps_n)} <= N_n <= b^{n(tau*+eps_n)}
    for every n in [p, n_max]; n_max + 1 (censored) if it fails at n_max."""
    if not 1 <= n_lo <= n_max:
        raise ValueError("need 1 <= n_lo <= n_max")
    gs = n_max + 1
    for n in range(n_max, n_lo - 1, -1):
        e = eps(n)
        if not sandwich_holds(count_Nn(m, n, alpha, e), n, tau_star, e, m.b):
            break
        gs = n
    return GrowthSpeedReport(j=j, gs=None, gs_prime=gs, n_max=n_max, f=float("nan"),
                             censored=gs > n_max)


def s_n_statistic(sampling: MeasureView, target: MeasureView, beta: float, N: int,
                  eps: float, eta: float, n: int) -> float:
    """sum_gamma b^{n(beta - gamma eps) gamma eta} sum_{delta(v,w)<=N} m[v] mu[w]^{gamma eta}."""
    if not eta > 0:
        raise ValueError("eta must be > 0")
    lb = math.log(target.b)
    log_m = sampling.log_masses(n)
    log_mu = target.log_masses(n)
    size = log_m.shape[0]
    parts = []
    for gamma in (-1, 1):
        pref = n * (beta - gamma * eps) * gamma * eta * lb
        for k in range(-N, N + 1):
            if abs(k) >= size:
                continue
            if k >= 0:
                lv, lw = log_m[: size - k], log_mu[k:]
            else:
                lv, lw = log_m[-k:], log_mu[: size + k]
            parts.append(float(np.sum(np.exp(pref + lv + gamma * eta * lw))))
    return math.fsum(parts)


@dataclass
class BoundaryDiagnostic:
    n: np.ndarray
    values: np.ndarray  # shape (len(n), 2), columns gamma = -1, +1
    rate: float  # fitted Lambda, in powers of b
    const: float


def boundary_ratio_diagnostic(m: MeasureView, q: float, eta: float, n_max: int) -> BoundaryDiagnostic:
    """Bracketed edge quantity of the g_n / d_n words for n = 1..n_max.

    mu_q([t_n]) is the depth-n tilt mu([t_n])^q b^{n tau_n(q)}. The decay
    rate and constant come from a least-squares line through
    log_b max_gamma(value) against n.
    """
    b = m.b
    lb = math.log(b)
    ns = np.arange(1, n_max + 1)
    vals = np.empty((n_max, 2))
    for i, n in enumerate(ns):
        lg = m.log_mass(boundary_words(int(n), "low", b))
        ld = m.log_mass(boundary_words(int(n), "high", b))
        log_part = -n * tau_j(m, q, int(n)) * lb
        lqg, lqd = q * lg - log_part, q * ld - log_part
        for c, gamma in enumerate((-1, 1)):
            ge = gamma * eta
            vals[i, c] = math.exp(lqd + ge * (lg - ld)) + math.exp(lqg + ge * (ld - lg))
    y = np.log(vals.max(axis=1)) / lb
    slope, icpt = np.polyfit(ns, y, 1)
    return BoundaryDiagnostic(ns, vals, float(-slope), float(b**icpt))


def write_growth_csv(reports, path, chash=None):
    cols = ["j_copy", "beta", "N", "f", "GS", "GS_prime", "n_max", "censored"]
    rows = [[r.j, r.beta, r.N, r.f, r.gs, r.gs_prime, r.n_max, r.censored] for r in reports]
    write_csv(path, cols, rows, chash)


def write_bitmaps(bitmaps: dict, path):
    """One line per depth: ``n,<0/1 string>`` with 1 marking a pass."""
    with open(path, "w") as fh:
        for n in sorted(bitmaps):
            fh.write(f"{n}," + "".join("1" if x else "0" for x in bitmaps[n]) + "\n")
