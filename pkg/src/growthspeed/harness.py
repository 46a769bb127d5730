"""Experiment configuration and runners.

Each runner takes an :class:`ExperimentConfig`, returns its rows as a list
of dicts and can write them as CSV. Outputs depend only on the config
(seed included); replica ``r`` uses seed ``cfg.seed + r``.
"""
from __future__ import annotations

import json
import math
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import __version__
from ._io import config_hash, write_csv
from .measures import (
    CascadeMeasure,
    SpecValidationError,
    generate_cascade,
    measure_from_dict,
    spec_from_dict,
)
from .singularity import WindowParams, growth_speed, pass_table
from .spectrum import (
    EpsilonSchedule,
    ScalingSample,
    UnsupportedSpecError,
    count_Nn,
    interval_J,
    markov_count_bound,
    q_grid,
    tau_levels_running,
    tau_oracle,
    tau_oracle_prime,
    tilted_measure,
)

EXPERIMENTS = ("exp-tau-convergence", "exp-growth-speed", "exp-large-deviation", "exp-concentration")


class ConfigError(ValueError):
    pass


def renewal_scale(j: int, alpha: float = 1.5) -> int:
    """ceil(exp(sqrt(alpha log j))), with j = 0 treated as j = 1."""
    return math.ceil(math.exp(math.sqrt(alpha * math.log(max(j, 1)))))


@dataclass
class ExperimentConfig:
    measure: dict
    seed: int = 0
    q: list = field(default_factory=lambda: [1.0])
    epsilon: dict = field(default_factory=lambda: {"c": 1.0, "eta": 0.1})
    N: int = 1
    j_list: list = field(default_factory=lambda: [0])
    depth: int = 16
    n_lo: int = 1
    replicas: int = 1
    alpha: float = 1.5
    f: float = 0.5
    n_grid: dict = field(default_factory=lambda: {"min": 16, "max": 100000, "num": 25})
    calibration_replicas: int = 100
    concentration: dict = field(default_factory=lambda: {"q": 1.5, "levels": 400, "s": [0, 1, 2, 3]})
    validate_K: bool = True
    out: Optional[str] = None

    @property
    def schedule(self) -> EpsilonSchedule:
        e = self.epsilon
        if "override" in e:
            return EpsilonSchedule(override=e["override"])
        return EpsilonSchedule(c=float(e.get("c", 1.0)), eta=float(e.get("eta", 0.1)))

    @property
    def q_values(self) -> np.ndarray:
        return np.asarray(self.q, dtype=float)

    @property
    def spec(self):
        return spec_from_dict(self.measure)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("out")
        return d

    @property
    def hash(self) -> str:
        return config_hash(self.to_dict())


def _expect(cond, name, msg):
    if not cond:
        raise ConfigError(f"field '{name}': {msg}")


def config_from_dict(doc: dict, seed: Optional[int] = None, depth: Optional[int] = None,
                     guard: Optional[int] = None, out: Optional[str] = None) -> ExperimentConfig:
    """Measure fields at top level, experiment fields under ``"experiment"``."""
    _expect(isinstance(doc, dict), "<root>", "config must be a JSON object")
    exp = doc.get("experiment", {})
    _expect(isinstance(exp, dict), "experiment", "must be an object")
    measure = {k: v for k, v in doc.items() if k != "experiment"}
    _expect("kind" in measure, "kind", "missing")
    if guard is not None:
        measure.setdefault("riesz", {})["guard"] = guard
    s = doc.get("seed", 0) if seed is None else seed
    _expect(isinstance(s, int) and s >= 0, "seed", "must be a non-negative integer")
    known = set(ExperimentConfig.__dataclass_fields__) - {"measure", "seed"}
    for key in exp:
        _expect(key in known, f"experiment.{key}", "unknown field")
    kw = dict(exp)
    if depth is not None:
        kw["depth"] = depth
    if out is not None:
        kw["out"] = out
    q = kw.get("q", [1.0])
    if isinstance(q, dict):
        _expect({"min", "max"} <= set(q), "experiment.q", "grid object needs min and max")
        q = q_grid(float(q["min"]), float(q["max"]), int(q.get("num", 41))).tolist()
    elif isinstance(q, (int, float)):
        q = [float(q)]
    _expect(isinstance(q, list) and len(q) > 0, "experiment.q", "must be a number, list or grid object")
    _expect(all(isinstance(x, (int, float)) for x in q), "experiment.q", "entries must be numbers")
    kw["q"] = [float(x) for x in q]
    for name in ("N", "depth", "n_lo", "replicas", "calibration_replicas"):
        if name in kw:
            _expect(isinstance(kw[name], int) and kw[name] >= 0, f"experiment.{name}",
                    "must be a non-negative integer")
    if "j_list" in kw:
        _expect(isinstance(kw["j_list"], list) and all(isinstance(j, int) and j >= 0 for j in kw["j_list"]),
                "experiment.j_list", "must be a list of non-negative integers")
    if "epsilon" in kw:
        e = kw["epsilon"]
        _expect(isinstance(e, dict), "experiment.epsilon", "must be an object")
        if "override" not in e:
            _expect(e.get("c", 1.0) > 0 and e.get("eta", 0.1) > 0, "experiment.epsilon",
                    "c and eta must be > 0")
    if "f" in kw:
        _expect(0 < kw["f"] < 1, "experiment.f", "must lie in (0, 1)")
    if "alpha" in kw:
        _expect(kw["alpha"] > 1, "experiment.alpha", "must be > 1")
    cfg = ExperimentConfig(measure=measure, seed=s, **kw)
    if measure["kind"] != "riesz":
        try:
            cfg.spec
        except SpecValidationError as exc:
            raise ConfigError(str(exc)) from None
    return cfg


def load_config(path, **overrides) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from None
    return config_from_dict(doc, **overrides)


# ---------------------------------------------------------------------------
# helpers


def limit_sample(cfg: ExperimentConfig, q=None) -> ScalingSample:
    """The limit tau on the q grid; only finite-support cascades have one."""
    q = cfg.q_values if q is None else np.asarray(q, dtype=float)
    if cfg.measure.get("kind") == "riesz":
        raise UnsupportedSpecError("these experiments need a cascade with a closed-form tau")
    return ScalingSample.from_oracle(cfg.spec, q)


def validated_K(cfg: ExperimentConfig) -> np.ndarray:
    """The q grid, checked to lie inside J; shrunk to the run around q = 1 if not."""
    q = np.sort(cfg.q_values)
    if not cfg.validate_K:
        return q
    if q.size == 1:
        ts = limit_sample(cfg, q)
        slope = tau_oracle_prime(cfg.spec, q[0])
        if not slope * q[0] - ts.tau[0] > 0:
            raise ConfigError(f"field 'experiment.q': q={q[0]} lies outside J")
        return q
    lo, hi = interval_J(limit_sample(cfg, q))
    return q[(q >= lo) & (q <= hi)]


def _cascade(cfg, seed, horizon) -> CascadeMeasure:
    m = measure_from_dict(cfg.measure, seed=seed, horizon=horizon)
    if not isinstance(m, CascadeMeasure):
        raise UnsupportedSpecError("experiment needs a cascade measure")
    return m


def n_grid(cfg) -> np.ndarray:
    g = cfg.n_grid
    return np.unique(np.geomspace(g["min"], g["max"], int(g.get("num", 25))).round().astype(int))


# ---------------------------------------------------------------------------
# experiments


def _convergence_errors(m: CascadeMeasure, q, ns, oracle) -> np.ndarray:
    return np.abs(tau_levels_running(m, q, ns) - oracle[None, :]).max(axis=1)


def exp_tau_convergence(cfg: ExperimentConfig) -> dict:
    """sup_q |tau_n - tau| against C log(n) n^(-1/4), with C fitted out of sample.

    C is the largest scaled error seen over ``calibration_replicas``
    realizations whose seeds are disjoint from the test replicas; the
    test rows then record whether the bound with that C holds.
    """
    K = validated_K(cfg)
    oracle = tau_oracle(cfg.spec, K)
    ns = n_grid(cfg)
    scale = np.log(ns) * ns ** -0.25
    jmax = max(cfg.j_list)
    horizon = int(ns.max()) + jmax
    calib_base = cfg.seed + 1_000_000
    C = 0.0
    for r in range(cfg.calibration_replicas):
        m = _cascade(cfg, calib_base + r, horizon)
        C = max(C, float((_convergence_errors(m, K, ns, oracle) / scale).max()))
    rows, onset = [], []
    for r in range(cfg.replicas):
        seed = cfg.seed + r
        m = _cascade(cfg, seed, horizon)
        for j in cfg.j_list:
            err = _convergence_errors(m.shift(j), K, ns, oracle)
            covered = err <= C * scale
            for n, e, sc, ok in zip(ns, err, err / scale, covered):
                rows.append({"replica": r, "seed": seed, "j": j, "n": int(n), "sup_err": float(e),
                             "scaled_err": float(sc), "C_fit": C, "covered": bool(ok)})
            # first grid n from which the bound holds at every larger grid n
            bad = np.flatnonzero(~covered)
            first = int(ns[bad[-1] + 1]) if bad.size and bad[-1] + 1 < ns.size else (
                int(ns[0]) if not bad.size else -1)
            onset.append({"replica": r, "seed": seed, "j": j, "onset_n": first,
                          "renewal_scale": renewal_scale(j, cfg.alpha), "C_fit": C})
    return {"rows": rows, "onset": onset, "C": C, "K": K}


def _gs_cells(cfg, m, j, q, beta_mu, beta_q, eps):
    target = m.shift(j)
    sampling = tilted_measure(target, q, cfg.depth)
    p1 = WindowParams(beta=beta_mu, N=cfg.N, eps=eps, n_max=cfg.depth)
    p2 = WindowParams(beta=beta_q, N=cfg.N, eps=eps, n_max=cfg.depth)
    return (growth_speed(sampling, target, p1, cfg.f, j),
            growth_speed(sampling, sampling, p2, cfg.f, j))


def exp_growth_speed(cfg: ExperimentConfig) -> dict:
    """GS(mu_q^(j), mu^(j), tau'(q)) and GS(mu_q^(j), mu_q^(j), tau*(tau'(q))) per (replica, j, q)."""
    K = validated_K(cfg)
    if K.size < len(cfg.q):
        raise ConfigError("field 'experiment.q': grid not contained in J")
    eps = cfg.schedule
    alpha = tau_oracle_prime(cfg.spec, K)
    tstar = alpha * K - tau_oracle(cfg.spec, K)
    horizon = max(cfg.j_list) + cfg.depth
    rows = []
    for r in range(cfg.replicas):
        seed = cfg.seed + r
        m = _cascade(cfg, seed, horizon)
        for j in cfg.j_list:
            for k, q in enumerate(K):
                g1, g2 = _gs_cells(cfg, m, j, float(q), float(alpha[k]), float(tstar[k]), eps)
                gs = max(g1.gs, g2.gs)
                rows.append({"replica": r, "seed": seed, "j": j, "q": float(q),
                             "beta_mu": float(alpha[k]), "GS_mu": g1.gs,
                             "beta_muq": float(tstar[k]), "GS_muq": g2.gs, "GS": gs,
                             "S_j": renewal_scale(j, cfg.alpha), "GS_over_j": gs / max(j, 1),
                             "N": cfg.N, "f": cfg.f, "n_max": cfg.depth,
                             "censored": g1.censored or g2.censored})
    return {"rows": rows}


def fitted_alpha(gs, js, coverage=0.9, grid=None) -> tuple:
    """Smallest alpha on a grid with GS <= renewal_scale(j, alpha) in >= coverage of cells.

    Cells with j = 0 are dropped: the scale needs log j and has no value there.
    """
    grid = np.round(np.arange(0.0, 10.0001, 0.01), 2) if grid is None else grid
    gs, js = np.asarray(gs), np.asarray(js)
    keep = js >= 1
    gs, js = gs[keep], js[keep]
    if gs.size == 0:
        raise ValueError("no cells with j >= 1")
    logj = np.log(js.astype(float))
    for a in grid:
        s = np.ceil(np.exp(np.sqrt(a * logj)))
        frac = float(np.mean(gs <= s))
        if frac >= coverage:
            return float(a), frac
    return float("inf"), 0.0


def exp_large_deviation(cfg: ExperimentConfig) -> dict:
    """Counts N_n(mu^(j), tau'(q), eps_n) against b^{n(tau* -/+ beta eps_n)}, beta = 1 + max|q|."""
    K = validated_K(cfg)
    eps = cfg.schedule
    beta = 1.0 + float(np.abs(K).max())
    alpha = tau_oracle_prime(cfg.spec, K)
    tstar = alpha * K - tau_oracle(cfg.spec, K)
    horizon = max(cfg.j_list) + cfg.depth
    b = cfg.spec.b
    rows = []
    for r in range(cfg.replicas):
        seed = cfg.seed + r
        m = _cascade(cfg, seed, horizon)
        for j in cfg.j_list:
            mj = m.shift(j)
            start = max(cfg.n_lo, renewal_scale(j, cfg.alpha), 1)
            for n in range(start, cfg.depth + 1):
                e = float(eps(n))
                for k, q in enumerate(K):
                    count = count_Nn(mj, n, float(alpha[k]), e)
                    lower = b ** (n * (tstar[k] - beta * e))
                    upper = b ** (n * (tstar[k] + beta * e))
                    ok = count > 0 and lower * (1 - 1e-12) <= count <= upper * (1 + 1e-12)
                    rows.append({"replica": r, "seed": seed, "j_copy": j, "q": float(q), "n": n,
                                 "alpha": float(alpha[k]), "tau_star": float(tstar[k]),
                                 "epsilon": e, "beta": beta, "count": count,
                                 "lower": float(lower), "upper": float(upper),
                                 "markov_bound": markov_count_bound(mj, n, float(q), e, float(alpha[k])),
                                 "pass": bool(ok)})
    return {"rows": rows, "beta": beta}


def certificate_lower_bound(m, q, n, eps_n, alpha, tstar) -> float:
    """cert * b^{n(tau* - eps_n)}, where cert is the tilt mass of depth-n cylinders
    inside both N = 0 windows; every such cylinder is counted by N_n."""
    tilt = tilted_measure(m, q, n)
    const = EpsilonSchedule.constant(eps_n)
    c1 = WindowParams(beta=alpha, N=0, eps=const, n_max=n)
    c2 = WindowParams(beta=tstar, N=0, eps=const, n_max=n)
    both = pass_table(m, c1, n) & pass_table(tilt, c2, n)
    cert = math.fsum(tilt.masses(n)[both])
    return cert * m.b ** (n * (tstar - eps_n))


def exp_concentration(cfg: ExperimentConfig) -> dict:
    """Exceedance of |sum Y_i| > ||Y||_inf s sqrt(k) for centred block log-partition sums.

    Each replica is a cascade of ``levels`` levels cut into k = floor(sqrt(levels))
    blocks of k levels. X_i = -log_b of the block's partition sum at q, centred
    by its exact mean k tau(q); ||Y||_inf is the exact supremum over atoms.
    """
    spec = cfg.spec
    if spec.support() is None:
        raise UnsupportedSpecError("concentration check needs finite-support weights")
    conc = cfg.concentration
    q = float(conc.get("q", 1.5))
    levels = int(conc.get("levels", 400))
    s_values = [float(s) for s in conc.get("s", [0, 1, 2, 3])]
    k = math.isqrt(levels)
    tau = tau_oracle(spec, q)
    atoms, _ = spec.support()
    per_atom = -np.log((atoms**q).sum(axis=1)) / math.log(spec.b)
    y_sup = k * float(np.abs(per_atom - tau).max())
    sums = np.empty(cfg.replicas)
    for r in range(cfg.replicas):
        m = generate_cascade(spec, k * k, cfg.seed + r)
        ell = -m.log_partition_levels(q, k * k) / math.log(spec.b)
        blocks = ell.reshape(k, k).sum(axis=1) - k * tau
        sums[r] = math.fsum(blocks)
    rows = []
    for s in s_values:
        # the rounding floor keeps Y = 0 (deterministic weights) from exceeding at s = 0
        exceed = int(np.count_nonzero(np.abs(sums) > y_sup * s * math.sqrt(k) + 1e-12 * k * k))
        bound = 2 * math.exp(-s * s / 2)
        pb = min(bound, 1.0)
        slack = 3 * math.sqrt(pb * (1 - pb) / cfg.replicas)
        freq = exceed / cfg.replicas
        rows.append({"s": s, "replicas": cfg.replicas, "blocks": k, "exceed": exceed,
                     "freq": freq, "bound": bound, "slack": slack,
                     "pass": bool(freq <= bound + slack)})
    return {"rows": rows}


RUNNERS = {
    "exp-tau-convergence": exp_tau_convergence,
    "exp-growth-speed": exp_growth_speed,
    "exp-large-deviation": exp_large_deviation,
    "exp-concentration": exp_concentration,
}


def write_experiment(name: str, result: dict, out_dir: str, chash: str) -> list:
    os.makedirs(out_dir, exist_ok=True)
    stem = name.replace("-", "_")
    written = []
    for key in ("rows", "onset"):
        rows = result.get(key)
        if rows is None:
            continue
        path = os.path.join(out_dir, f"{stem}.csv" if key == "rows" else f"{stem}_{key}.csv")
        cols = list(rows[0].keys()) if rows else ["empty"]
        write_csv(path, cols, rows, chash)
        written.append(path)
    return written


def write_manifest(cfg: ExperimentConfig, out_dir: str, files: dict, started: str) -> dict:
    manifest = {"config_sha256": cfg.hash, "code_version": __version__, "seed": cfg.seed,
                "started": started, "finished": now_utc(), "outputs": files,
                "config": cfg.to_dict()}
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=float)
    return manifest


def now_utc():
    return time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime())


def resolve_out(cfg: ExperimentConfig, out_dir: Optional[str] = None) -> str:
    return out_dir or cfg.out or os.environ.get("GROWTHSPEED_OUT", "growthspeed_out")


def run(cfg: ExperimentConfig, experiments, out_dir: Optional[str] = None) -> dict:
    """Run experiments, write their CSVs and ``manifest.json``; returns the manifest."""
    out_dir = resolve_out(cfg, out_dir)
    started = now_utc()
    files = {}
    for name in experiments:
        if name not in RUNNERS:
            raise ConfigError(f"unknown experiment {name!r}")
        files[name] = write_experiment(name, RUNNERS[name](cfg), out_dir, cfg.hash)
    return write_manifest(cfg, out_dir, files, started)
