"""Scaling functions, Legendre transforms, tilted measures and level-set counts.

Conventions: ``tau_j(q) = -(1/j) log_b sum_{|w|=j} mu([w])^q``; the limit
``tau`` is estimated by the value at the deepest computed level. Exponent
windows are two-sided bounds on ``log_b mu([w])`` and are compared in log
space with absolute tolerance ``LOG_TOL``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ._io import write_csv
from .measures import (
    CascadeMeasure,
    DegenerateMeasureError,
    DenseMeasure,
    MeasureView,
    WeightSpec,
)

LOG_TOL = 1e-9


class UnsupportedSpecError(TypeError):
    pass


class GridEdgeError(ValueError):
    pass


class DegenerateSpectrumError(ValueError):
    pass


# ---------------------------------------------------------------------------
# epsilon schedules


@dataclass(frozen=True)
class EpsilonSchedule:
    """eps_n = c * n^(-1/8) * log(max(n, 2))^(1/2 + eta), unless overridden.

    ``override`` may be a constant, a callable of n, or a sequence read as
    (eps_1, eps_2, ...).
    """

    c: float = 1.0
    eta: float = 0.1
    override: Union[None, float, Sequence[float], Callable] = None

    def __post_init__(self):
        if self.override is None and not (self.c > 0 and self.eta > 0):
            raise ValueError("c and eta must be > 0")

    @classmethod
    def constant(cls, value: float) -> "EpsilonSchedule":
        return cls(override=float(value))

    def __call__(self, n):
        n_arr = np.asarray(n)
        if np.any(n_arr < 1):
            raise ValueError("schedule is indexed from n = 1")
        ov = self.override
        if ov is None:
            nf = n_arr.astype(float)
            out = self.c * nf ** (-1 / 8) * np.log(np.maximum(nf, 2.0)) ** (0.5 + self.eta)
        elif callable(ov):
            out = np.vectorize(ov, otypes=[float])(n_arr)
        elif np.isscalar(ov):
            out = np.full(n_arr.shape, float(ov))
        else:
            seq = np.asarray(ov, dtype=float)
            if np.any(n_arr > seq.shape[0]):
                raise ValueError("explicit epsilon sequence too short")
            out = seq[n_arr - 1]
        return float(out) if np.ndim(out) == 0 else out

    def to_dict(self):
        if self.override is None:
            return {"c": self.c, "eta": self.eta}
        if np.isscalar(self.override):
            return {"override": float(self.override)}
        if callable(self.override):
            raise TypeError("callable overrides are not serializable")
        return {"override": [float(x) for x in self.override]}


def q_grid(q_min: float, q_max: float, num: int = 41) -> np.ndarray:
    """Evenly spaced grid on [q_min, q_max] that also contains 0 and 1 when in range."""
    if not q_max > q_min:
        raise ValueError("need q_min < q_max")
    q = np.linspace(q_min, q_max, num)
    extra = [x for x in (0.0, 1.0) if q_min <= x <= q_max]
    q = np.unique(np.concatenate([q, extra]))
    # drop near-duplicates of the inserted points
    keep = np.concatenate([[True], np.diff(q) > 1e-9 * (q_max - q_min)])
    q = q[keep]
    for x in extra:
        q[np.argmin(np.abs(q - x))] = x
    return q


# ---------------------------------------------------------------------------
# scaling functions


def _logsumexp(x: np.ndarray) -> float:
    top = x.max()
    return float(top + math.log(np.sum(np.exp(x - top))))


def tau_dense(m: MeasureView, q, j: int):
    """tau_j(q) by summing over all b^j cylinders."""
    if j < 1:
        raise ValueError("depth j must be >= 1")
    logm = m.log_masses(j)
    qs = np.atleast_1d(np.asarray(q, dtype=float))
    finite = np.isfinite(logm)
    out = np.empty(qs.shape)
    for k, qq in enumerate(qs):
        if not finite.all():
            if qq < 0:
                raise DegenerateMeasureError("zero mass with q < 0")
            if qq == 0:
                out[k] = -1.0
                continue
        out[k] = -_logsumexp(qq * logm[finite]) / (j * math.log(m.b))
    return float(out[0]) if np.ndim(q) == 0 else out


def tau_levels(m: CascadeMeasure, q, j: int):
    """Cascade fast path: tau_j(q) = -(1/j) sum_k log_b sum_r W_r(k)^q."""
    if j < 1:
        raise ValueError("depth j must be >= 1")
    qs = np.atleast_1d(np.asarray(q, dtype=float))
    out = np.array([-math.fsum(m.log_partition_levels(qq, j)) for qq in qs])
    out /= j * math.log(m.b)
    return float(out[0]) if np.ndim(q) == 0 else out


def tau_levels_running(m: CascadeMeasure, q, ns) -> np.ndarray:
    """tau_n(q) for every n in ``ns`` at once, shape (len(ns), len(q))."""
    qs = np.atleast_1d(np.asarray(q, dtype=float))
    ns = np.asarray(ns, dtype=int)
    nmax = int(ns.max())
    m._check_depth(nmax)
    ll = m.log_levels[m.offset: m.offset + nmax]
    # (nmax, len(q)) log partition per level
    x = qs[None, None, :] * ll[:, :, None]
    top = x.max(axis=1)
    lp = top + np.log(np.exp(x - top[:, None, :]).sum(axis=1))
    csum = np.cumsum(lp, axis=0)
    return -csum[ns - 1] / (ns[:, None] * math.log(m.b))


def tau_j(m: MeasureView, q, j: int, method: str = "auto"):
    if method == "levels" or (method == "auto" and isinstance(m, CascadeMeasure)):
        return tau_levels(m, q, j)
    return tau_dense(m, q, j)


def _finite_support(spec: WeightSpec):
    sup = spec.support() if isinstance(spec, WeightSpec) else None
    if sup is None:
        kind = getattr(spec, "kind", type(spec).__name__)
        raise UnsupportedSpecError(f"no closed-form tau for spec kind {kind!r}")
    return sup


def tau_oracle(spec: WeightSpec, q):
    """tau(q) = -E log_b sum_r W_r^q for deterministic or finite-discrete weights."""
    atoms, probs = _finite_support(spec)
    qs = np.atleast_1d(np.asarray(q, dtype=float))
    x = qs[:, None, None] * np.log(atoms)[None, :, :]
    top = x.max(axis=2)
    lp = top + np.log(np.exp(x - top[:, :, None]).sum(axis=2))
    out = -(lp @ probs) / math.log(spec.b)
    return float(out[0]) if np.ndim(q) == 0 else out


def tau_oracle_prime(spec: WeightSpec, q):
    """Exact derivative -E[sum W^q ln W / sum W^q] / ln b."""
    atoms, probs = _finite_support(spec)
    qs = np.atleast_1d(np.asarray(q, dtype=float))
    la = np.log(atoms)
    x = qs[:, None, None] * la[None, :, :]
    w = np.exp(x - x.max(axis=2, keepdims=True))
    w /= w.sum(axis=2, keepdims=True)
    out = -((w * la[None]).sum(axis=2) @ probs) / math.log(spec.b)
    return float(out[0]) if np.ndim(q) == 0 else out


@dataclass
class ScalingSample:
    """tau values on a q grid, at depth ``j`` of copy ``copy`` (``j=None`` for the limit)."""

    q: np.ndarray
    tau: np.ndarray
    j: Optional[int] = None
    copy: int = 0
    oracle: Optional[np.ndarray] = None
    spec: Optional[WeightSpec] = None

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        self.tau = np.asarray(self.tau, dtype=float)
        if self.q.ndim != 1 or self.q.shape != self.tau.shape or self.q.size == 0:
            raise ValueError("q and tau must be equal-length non-empty 1-d arrays")
        if np.any(np.diff(self.q) <= 0):
            raise ValueError("q grid must be strictly increasing")

    @classmethod
    def from_oracle(cls, spec: WeightSpec, q) -> "ScalingSample":
        t = tau_oracle(spec, q)
        return cls(q=q, tau=t, oracle=t, spec=spec)

    def is_concave(self, tol: float = 1e-10) -> bool:
        slopes = np.diff(self.tau) / np.diff(self.q)
        return bool(np.all(np.diff(slopes) <= tol))


def scaling_sample(m: MeasureView, q, j: int, method: str = "auto") -> ScalingSample:
    spec = getattr(m, "spec", None)
    oracle = None
    if spec is not None and spec.support() is not None:
        oracle = tau_oracle(spec, q)
    else:
        spec = None
    return ScalingSample(q=np.asarray(q, dtype=float), tau=tau_j(m, q, j, method), j=j,
                         copy=getattr(m, "offset", 0), oracle=oracle, spec=spec)


def tau_depth_diagnostic(m: MeasureView, q, js) -> dict:
    """tau_j over increasing depths; the estimate is the deepest value.

    ``max_tail_change`` is the largest change between the last two depths,
    a crude check that the sequence has settled.
    """
    js = sorted(js)
    table = np.array([np.atleast_1d(tau_j(m, q, j)) for j in js])
    change = float(np.abs(table[-1] - table[-2]).max()) if len(js) > 1 else float("nan")
    return {"j": js, "tau": table, "estimate": table[-1], "max_tail_change": change}


# ---------------------------------------------------------------------------
# Legendre transform and derivatives


@dataclass(frozen=True)
class LegendreResult:
    value: float
    argmin_q: float
    boundary: bool


def legendre(ts: ScalingSample, alpha: float) -> LegendreResult:
    """min over the grid of alpha*q - tau(q); ``boundary`` flags an endpoint minimiser.

    Among tied minimisers an interior one is preferred (linear tau).
    """
    obj = alpha * ts.q - ts.tau
    best = obj.min()
    ties = np.flatnonzero(obj <= best + 1e-12 * max(1.0, abs(best)))
    inner = ties[(ties > 0) & (ties < ts.q.size - 1)]
    k = int(inner[inner.size // 2]) if inner.size else int(ties[0])
    return LegendreResult(float(obj[k]), float(ts.q[k]), k in (0, ts.q.size - 1))


def tau_prime(ts: ScalingSample, q: float) -> float:
    """Slope of tau at an interior point of the grid.

    Uses the exact derivative when the sample carries a finite-support
    spec, otherwise central differences over neighbouring grid points
    (interpolated linearly between grid points).
    """
    if not ts.q[0] < q < ts.q[-1]:
        raise GridEdgeError(f"q={q} is not interior to the grid [{ts.q[0]}, {ts.q[-1]}]")
    if ts.spec is not None:
        return tau_oracle_prime(ts.spec, q)
    return float(np.interp(q, ts.q[1:-1], _central_slopes(ts)))


def _central_slopes(ts):
    return (ts.tau[2:] - ts.tau[:-2]) / (ts.q[2:] - ts.q[:-2])


def _slopes_on_grid(ts: ScalingSample) -> np.ndarray:
    if ts.spec is not None:
        return tau_oracle_prime(ts.spec, ts.q)
    if ts.q.size < 3:
        raise GridEdgeError("need at least three grid points for differences")
    inner = _central_slopes(ts)
    first = (ts.tau[1] - ts.tau[0]) / (ts.q[1] - ts.q[0])
    last = (ts.tau[-1] - ts.tau[-2]) / (ts.q[-1] - ts.q[-2])
    return np.concatenate([[first], inner, [last]])


def interval_J(ts: ScalingSample, tol: float = 1e-12) -> tuple:
    """Grid run where tau'(q) q - tau(q) > 0.

    The run containing q = 1 is returned when there is one, otherwise the
    longest run.
    """
    positive = (_slopes_on_grid(ts) * ts.q - ts.tau) > tol
    if not positive.any():
        raise DegenerateSpectrumError("tau'(q) q - tau(q) > 0 nowhere on the grid")
    runs, start = [], None
    for k, ok in enumerate(positive):
        if ok and start is None:
            start = k
        if not ok and start is not None:
            runs.append((start, k - 1))
            start = None
    if start is not None:
        runs.append((start, positive.size - 1))
    for lo, hi in runs:
        if ts.q[lo] <= 1.0 <= ts.q[hi]:
            return float(ts.q[lo]), float(ts.q[hi])
    lo, hi = max(runs, key=lambda r: ts.q[r[1]] - ts.q[r[0]])
    return float(ts.q[lo]), float(ts.q[hi])


# ---------------------------------------------------------------------------
# tilted measures and counts


class TiltedMeasure(DenseMeasure):
    """mu_{q,j}: depth-j masses proportional to mu([v])^q."""

    def __init__(self, base: MeasureView, q: float, j: int, log_table: np.ndarray):
        super().__init__(log_table, base.b)
        self.base = base
        self.q = float(q)


def tilted_measure(m: MeasureView, q: float, j: int) -> TiltedMeasure:
    """mu_{q,j}([v]) = mu([v])^q b^{j tau_j(q)}, normalised in log space."""
    if j < 1:
        raise ValueError("depth j must be >= 1")
    logm = m.log_masses(j)
    if not np.all(np.isfinite(logm)) and q <= 0:
        raise DegenerateMeasureError("zero mass with q <= 0")
    if q == 0:
        x = np.zeros_like(logm)
    else:
        x = q * logm
    return TiltedMeasure(m, q, j, x - _logsumexp(x))


def _logb_masses(m: MeasureView, n: int) -> np.ndarray:
    return m.log_masses(n) / math.log(m.b)


def count_in_window(logb: np.ndarray, n: int, alpha: float, eps: float) -> int:
    lo, hi = -n * (alpha + eps) - LOG_TOL, -n * (alpha - eps) + LOG_TOL
    return int(np.count_nonzero((logb >= lo) & (logb <= hi)))


def count_Nn(m: MeasureView, n: int, alpha: float, eps: float) -> int:
    """#{w in A^n : b^-n(alpha+eps) <= mu([w]) <= b^-n(alpha-eps)}, bounds inclusive."""
    return count_in_window(_logb_masses(m, n), n, alpha, eps)


def default_alpha(m: MeasureView, q: float, n: int) -> float:
    """tau'(q): exact for finite-support cascades, else a difference of tau_n."""
    spec = getattr(m, "spec", None)
    if spec is not None and spec.support() is not None:
        return tau_oracle_prime(spec, q)
    h = 1e-4
    return (tau_j(m, q + h, n) - tau_j(m, q - h, n)) / (2 * h)


def markov_count_bound(m: MeasureView, n: int, q: float, eps: float,
                       alpha: Optional[float] = None) -> float:
    """b^(-n tau_n(q) + n q (alpha + sgn(q) eps)), an upper bound for count_Nn."""
    if alpha is None:
        alpha = default_alpha(m, q, n)
    expo = -n * tau_j(m, q, n) + n * q * (alpha + np.sign(q) * eps)
    return float(m.b ** expo)


# ---------------------------------------------------------------------------
# CSV export


def write_scaling_csv(samples, path, chash=None):
    rows = []
    for s in samples:
        for k, qq in enumerate(s.q):
            orc = None if s.oracle is None else float(s.oracle[k])
            err = None if orc is None else abs(float(s.tau[k]) - orc)
            rows.append([s.j, float(qq), float(s.tau[k]), orc, err])
    write_csv(path, ["j", "q", "tau_j", "tau_oracle", "abs_err"], rows, chash)


def write_spectrum_csv(ts: ScalingSample, alphas, path, chash=None):
    rows = []
    for a in alphas:
        r = legendre(ts, float(a))
        rows.append([float(a), r.value, r.argmin_q, r.boundary])
    write_csv(path, ["alpha", "legendre_value", "argmin_q", "boundary_flag"], rows, chash)


def write_counts_csv(rows, path, chash=None):
    write_csv(path, ["j_copy", "n", "alpha", "epsilon", "count", "markov_bound"], rows, chash)
