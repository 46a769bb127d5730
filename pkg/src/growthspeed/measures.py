"""Realizations of quasi-Bernoulli independent random measures.

Two constructions are provided:

* :class:`CascadeMeasure` -- level-wise multinomial cascades. Level ``k``
  carries a weight vector ``W(k)`` on the simplex, and the mass of a
  depth-n cylinder is ``prod_k W_{w_k}(k)`` exactly.
* :class:`RieszMeasure` -- random Riesz products with density
  ``prod_k exp(phi(b^k x + theta_k))``, masses obtained by midpoint
  quadrature a few levels (the guard) beyond the requested depth.

Both expose the same view interface (``mass``, ``log_mass``,
``log_masses``, ``shift``), and ``shift(j)`` returns the copy built from
the same realization's data beyond level ``j``.

Randomness is counter based: level ``k`` is a function of
``(seed, k)`` alone, so a shifted copy agrees with the tail of its
parent without replaying a stream.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional

import numpy as np

from .symbolic import (
    ResourceGuardError,
    as_word,
    check_base,
    check_dense,
    word_of,
)

# levels are drawn in blocks; block k//BLOCK is seeded by (seed, block)
BLOCK = 1024
SIMPLEX_TOL = 1e-12


class SpecValidationError(ValueError):
    pass


class HorizonError(ValueError):
    pass


class DegenerateMeasureError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# weight distributions


@dataclass(frozen=True)
class WeightSpec:
    """Distribution of the level weight vector ``(W_0, ..., W_{b-1})``.

    ``kind`` is one of ``"deterministic"`` (``weights``), ``"discrete"``
    (``atoms`` with ``probabilities``) or ``"dirichlet"`` (``alpha``,
    truncated by rejection so that every coordinate is >= ``floor``).
    """

    b: int
    kind: str
    weights: Optional[tuple] = None
    atoms: Optional[tuple] = None
    probabilities: Optional[tuple] = None
    alpha: Optional[tuple] = None
    floor: float = 1e-3

    def __post_init__(self):
        try:
            check_base(self.b)
        except ValueError as exc:
            raise SpecValidationError(str(exc)) from None
        if not self.floor > 0:
            raise SpecValidationError("floor must be > 0")
        if self.kind == "deterministic":
            if self.weights is None:
                raise SpecValidationError("deterministic spec needs 'weights'")
            object.__setattr__(self, "weights", tuple(float(x) for x in self.weights))
            self._check_vector(self.weights, "weights")
        elif self.kind == "discrete":
            if not self.atoms or self.probabilities is None:
                raise SpecValidationError("discrete spec needs 'atoms' and 'probabilities'")
            atoms = tuple(tuple(float(x) for x in a) for a in self.atoms)
            probs = tuple(float(p) for p in self.probabilities)
            object.__setattr__(self, "atoms", atoms)
            object.__setattr__(self, "probabilities", probs)
            if len(atoms) != len(probs):
                raise SpecValidationError("atoms and probabilities differ in length")
            for k, a in enumerate(atoms):
                self._check_vector(a, f"atoms[{k}]")
            if any(p <= 0 for p in probs) or abs(sum(probs) - 1) > SIMPLEX_TOL:
                raise SpecValidationError("probabilities must be positive and sum to 1")
        elif self.kind == "dirichlet":
            if self.alpha is None or len(self.alpha) != self.b:
                raise SpecValidationError(f"dirichlet spec needs 'alpha' of length {self.b}")
            object.__setattr__(self, "alpha", tuple(float(x) for x in self.alpha))
            if any(x <= 0 for x in self.alpha):
                raise SpecValidationError("dirichlet parameters must be > 0")
            if self.b * self.floor >= 1:
                raise SpecValidationError("floor too large: b * floor must be < 1")
        else:
            raise SpecValidationError(f"unknown weight kind {self.kind!r}")

    def _check_vector(self, vec, name):
        if len(vec) != self.b:
            raise SpecValidationError(f"{name} must have length b={self.b}")
        if abs(math.fsum(vec) - 1.0) > SIMPLEX_TOL:
            raise SpecValidationError(f"{name} must sum to 1, got {math.fsum(vec)!r}")
        if min(vec) < self.floor:
            raise SpecValidationError(f"{name} has a coordinate below floor {self.floor}")

    @classmethod
    def deterministic(cls, weights, floor=1e-3):
        return cls(b=len(weights), kind="deterministic", weights=tuple(weights), floor=floor)

    @classmethod
    def discrete(cls, atoms, probabilities=None, floor=1e-3):
        atoms = tuple(tuple(a) for a in atoms)
        if probabilities is None:
            probabilities = (1.0 / len(atoms),) * len(atoms)
        return cls(b=len(atoms[0]), kind="discrete", atoms=atoms,
                   probabilities=tuple(probabilities), floor=floor)

    @classmethod
    def dirichlet(cls, alpha, floor=1e-3):
        return cls(b=len(alpha), kind="dirichlet", alpha=tuple(alpha), floor=floor)

    def support(self):
        """Atoms and probabilities for the kinds with finite support."""
        if self.kind == "deterministic":
            return np.array([self.weights]), np.array([1.0])
        if self.kind == "discrete":
            return np.array(self.atoms), np.array(self.probabilities)
        return None

    def to_dict(self):
        if self.kind == "deterministic":
            params = {"weights": list(self.weights)}
        elif self.kind == "discrete":
            params = {"atoms": [list(a) for a in self.atoms],
                      "probabilities": list(self.probabilities)}
        else:
            params = {"alpha": list(self.alpha)}
        return {"kind": self.kind, "b": self.b, "parameters": params, "floor": self.floor}


def _block_rng(seed: int, block: int, stream: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream), int(block)]))


def _draw_block(spec: WeightSpec, seed: int, block: int) -> np.ndarray:
    if spec.kind == "deterministic":
        return np.tile(np.array(spec.weights), (BLOCK, 1))
    rng = _block_rng(seed, block, stream=0)
    if spec.kind == "discrete":
        atoms, probs = spec.support()
        cdf = np.cumsum(probs)
        cdf[-1] = 1.0
        pick = np.searchsorted(cdf, rng.random(BLOCK), side="right")
        return atoms[np.minimum(pick, len(probs) - 1)]
    out = rng.dirichlet(spec.alpha, size=BLOCK)
    bad = out.min(axis=1) < spec.floor
    while bad.any():
        out[bad] = rng.dirichlet(spec.alpha, size=int(bad.sum()))
        bad = out.min(axis=1) < spec.floor
    return out


def level_weights(spec: WeightSpec, seed: int, start: int, stop: int) -> np.ndarray:
    """Weight vectors of levels ``start+1 .. stop`` (1-based), shape (stop-start, b).

    Level k depends on (seed, k) only.
    """
    if start < 0 or stop < start:
        raise ValueError("need 0 <= start <= stop")
    if stop == start:
        return np.empty((0, spec.b))
    first, last = start // BLOCK, (stop - 1) // BLOCK
    blocks = [_draw_block(spec, seed, k) for k in range(first, last + 1)]
    table = np.concatenate(blocks, axis=0)
    off = first * BLOCK
    return table[start - off: stop - off]


# ---------------------------------------------------------------------------
# measure views


class MeasureView:
    """Common interface; subclasses implement ``log_masses`` and ``_log_mass``.

    Log masses are natural logarithms.
    """

    b: int
    offset: int = 0

    @property
    def max_depth(self) -> int:
        raise NotImplementedError

    def _check_depth(self, n):
        if n < 0:
            raise ValueError("depth must be >= 0")
        if n > self.max_depth:
            raise HorizonError(
                f"depth {n} beyond available horizon {self.max_depth} (copy index {self.offset})"
            )

    def log_mass(self, w) -> float:
        w = as_word(w, self.b)
        if w.b != self.b:
            raise ValueError("word base does not match measure base")
        self._check_depth(len(w))
        if len(w) == 0:
            return 0.0
        return self._log_mass(w)

    def mass(self, w) -> float:
        return math.exp(self.log_mass(w))

    def log_masses(self, n: int) -> np.ndarray:
        raise NotImplementedError

    def masses(self, n: int) -> np.ndarray:
        return np.exp(self.log_masses(n))

    def shift(self, j: int) -> "MeasureView":
        raise NotImplementedError


def shift(m: MeasureView, j: int) -> MeasureView:
    """The copy mu^(j): same realization, data beyond level j."""
    return m.shift(j)


@dataclass(eq=False)
class CascadeMeasure(MeasureView):
    """Multinomial cascade realization; ``levels[k]`` is W(k+1)."""

    spec: WeightSpec
    seed: int
    levels: np.ndarray = field(repr=False)
    offset: int = 0

    def __post_init__(self):
        self.b = self.spec.b
        self.levels = np.asarray(self.levels, dtype=float)
        self.levels.setflags(write=False)

    @property
    def horizon(self) -> int:
        return self.levels.shape[0]

    @property
    def max_depth(self) -> int:
        return self.horizon - self.offset

    @cached_property
    def log_levels(self) -> np.ndarray:
        out = np.log(self.levels)
        out.setflags(write=False)
        return out

    def level_table(self, n: int) -> np.ndarray:
        """Weight vectors used at depths 1..n of this view."""
        self._check_depth(n)
        return self.levels[self.offset: self.offset + n]

    def _log_mass(self, w):
        ll = self.log_levels[self.offset: self.offset + len(w)]
        return math.fsum(ll[np.arange(len(w)), list(w.digits)])

    def log_masses(self, n):
        self._check_depth(n)
        check_dense(self.b, n)
        out = np.zeros(1)
        for row in self.log_levels[self.offset: self.offset + n]:
            out = (out[:, None] + row[None, :]).ravel()
        return out

    def log_partition_levels(self, q: float, n: int) -> np.ndarray:
        """``log sum_r W_r(k)^q`` for the first n levels of this view."""
        self._check_depth(n)
        ll = self.log_levels[self.offset: self.offset + n]
        return _logsumexp_rows(q * ll)

    def shift(self, j):
        if j < 0:
            raise ValueError("shift index must be >= 0")
        if self.offset + j > self.horizon:
            raise HorizonError(f"shift {j} beyond horizon")
        return CascadeMeasure(self.spec, self.seed, self.levels, self.offset + j)


def _logsumexp_rows(x: np.ndarray) -> np.ndarray:
    top = x.max(axis=1)
    return top + np.log(np.exp(x - top[:, None]).sum(axis=1))


def generate_cascade(spec: WeightSpec, horizon: int, seed: int = 0) -> CascadeMeasure:
    if horizon < 1:
        raise HorizonError("horizon must be >= 1")
    if int(seed) < 0:
        raise ValueError("seed must be a non-negative integer")
    return CascadeMeasure(spec, int(seed), level_weights(spec, int(seed), 0, horizon))


# ---------------------------------------------------------------------------
# Riesz products


def cosine_potential(a: float) -> Callable[[np.ndarray], np.ndarray]:
    def phi(x):
        return a * np.cos(2 * np.pi * x)

    return phi


@dataclass(eq=False)
class RieszMeasure(MeasureView):
    """Random Riesz product; ``phases[k]`` is theta_k, k = 0..horizon-1.

    ``potential`` takes fractional parts in [0, 1) and must be
    1-periodic. The default is ``a * cos(2 pi x)``.
    """

    b: int
    a: float
    phases: np.ndarray = field(repr=False)
    guard: int = 6
    seed: Optional[int] = None
    offset: int = 0
    potential: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        check_base(self.b)
        if self.guard < 0:
            raise ValueError("guard must be >= 0")
        self.phases = np.asarray(self.phases, dtype=float)
        self.phases.setflags(write=False)
        if self.potential is None:
            self.potential = cosine_potential(self.a)
        self._norm_cache = {}

    @property
    def horizon(self) -> int:
        return self.phases.shape[0]

    @property
    def max_depth(self) -> int:
        return self.horizon - self.offset - self.guard

    def _log_density(self, lo: int, hi: int, J: int, R: int) -> np.ndarray:
        """Log density at midpoints ``lo..hi-1`` of the resolution-R grid, J factors."""
        modulus = 2 * self.b**R
        t = 2 * np.arange(lo, hi, dtype=np.int64) + 1
        out = np.zeros(hi - lo)
        theta = self.phases[self.offset: self.offset + J]
        for k in range(J):
            # b^k x mod 1 computed exactly in integers
            out += self.potential(np.mod(t / modulus + theta[k], 1.0))
            t = (t * self.b) % modulus
        return out

    def _grid(self, n):
        J = n + self.guard
        R = J + self.guard
        check_dense(self.b, R)
        return J, R

    def _log_norm(self, n):
        if n not in self._norm_cache:
            J, R = self._grid(n)
            ld = self._log_density(0, self.b**R, J, R)
            top = ld.max()
            self._norm_cache[n] = (top, math.log(math.fsum(np.exp(ld - top))))
        return self._norm_cache[n]

    def _log_mass(self, w):
        n = len(w)
        J, R = self._grid(n)
        span = self.b ** (R - n)
        i = w.index
        ld = self._log_density(i * span, (i + 1) * span, J, R)
        top, log_total = self._log_norm(n)
        return math.log(math.fsum(np.exp(ld - top))) - log_total

    def log_masses(self, n):
        self._check_depth(n)
        check_dense(self.b, n)
        if n == 0:
            return np.zeros(1)
        J, R = self._grid(n)
        ld = self._log_density(0, self.b**R, J, R)
        top = ld.max()
        cell = np.exp(ld - top).reshape(self.b**n, -1).sum(axis=1)
        return np.log(cell) - math.log(math.fsum(cell))

    def shift(self, j):
        if j < 0:
            raise ValueError("shift index must be >= 0")
        if self.offset + j > self.horizon:
            raise HorizonError(f"shift {j} beyond horizon")
        return RieszMeasure(self.b, self.a, self.phases, self.guard, self.seed,
                            self.offset + j, self.potential)

    def with_guard(self, guard: int) -> "RieszMeasure":
        return RieszMeasure(self.b, self.a, self.phases, guard, self.seed,
                            self.offset, self.potential)


def generate_riesz(b: int = 2, a: float = 0.5, horizon: int = 32, seed: int = 0,
                   guard: int = 6, potential: Optional[Callable] = None) -> RieszMeasure:
    """Draw phases theta_k ~ U[0, 1), each from (seed, k) alone."""
    if horizon < 1:
        raise HorizonError("horizon must be >= 1")
    nblocks = (horizon - 1) // BLOCK + 1
    phases = np.concatenate([_block_rng(seed, k, stream=1).random(BLOCK) for k in range(nblocks)])
    return RieszMeasure(b, float(a), phases[:horizon], guard, int(seed), 0, potential)


def riesz_mass(m: RieszMeasure, w) -> float:
    return m.mass(w)


# ---------------------------------------------------------------------------
# tables, diagnostics, serialization


class DenseMeasure(MeasureView):
    """A measure given by its log masses at one depth; shallower depths by summation."""

    def __init__(self, log_table: np.ndarray, b: int = 2):
        self.b = check_base(b)
        log_table = np.asarray(log_table, dtype=float)
        n = round(math.log(log_table.shape[0], b))
        if b**n != log_table.shape[0]:
            raise ValueError("table length must be a power of b")
        self.depth = n
        self._table = log_table
        self._table.setflags(write=False)

    @property
    def max_depth(self):
        return self.depth

    def log_masses(self, n):
        self._check_depth(n)
        if n == self.depth:
            return self._table.copy()
        top = self._table.max()
        cell = np.exp(self._table - top).reshape(self.b**n, -1).sum(axis=1)
        with np.errstate(divide="ignore"):
            return np.log(cell) + top

    def _log_mass(self, w):
        return float(self.log_masses(len(w))[w.index])

    def shift(self, j):
        if j == 0:
            return self
        raise NotImplementedError("dense tables carry no shifted copies")


def dense_table(m: MeasureView, n: int) -> np.ndarray:
    """Masses of all depth-n cylinders in index order."""
    return m.masses(n)


def verify_quasi_bernoulli(m: MeasureView, j: int, n: int, sample: Optional[int] = None,
                           seed: int = 0) -> float:
    """Empirical constant C in C^-1 mu_j[v] mu^(j)[w] <= mu[vw] <= C mu_j[v] mu^(j)[w].

    Pairs (v, w) in A^j x A^n are enumerated exhaustively when ``sample``
    is None or covers all pairs, otherwise drawn uniformly with ``seed``.
    """
    b = m.b
    joint = m.log_masses(j + n)
    head = m.log_masses(j)
    tail = m.shift(j).log_masses(n)
    for table in (joint, head, tail):
        if not np.all(np.isfinite(table)):
            raise DegenerateMeasureError("zero mass encountered")
    total = b ** (j + n)
    if sample is None or sample >= total:
        idx = np.arange(total)
    else:
        idx = np.random.default_rng(seed).integers(0, total, size=int(sample))
    v, w = np.divmod(idx, b**n)
    log_ratio = joint[idx] - head[v] - tail[w]
    return float(np.exp(np.abs(log_ratio).max()))


def write_dense_csv(m: MeasureView, n: int, path, header: Optional[str] = None):
    table = dense_table(m, n)
    with open(path, "w", newline="") as fh:
        if header:
            fh.write(f"# {header}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["n", "index", "word", "mass"])
        for i, x in enumerate(table):
            writer.writerow([n, i, str(word_of(i, n, m.b)), repr(float(x))])


def spec_from_dict(d: dict) -> WeightSpec:
    """Parse the weight part of a measure config document."""
    kind = d.get("kind")
    if kind not in ("deterministic", "discrete", "dirichlet"):
        raise SpecValidationError(f"field 'kind': unsupported value {kind!r}")
    params = d.get("parameters")
    if not isinstance(params, dict):
        raise SpecValidationError("field 'parameters': must be an object")
    floor = d.get("floor", 1e-3)
    try:
        if kind == "deterministic":
            spec = WeightSpec.deterministic(params["weights"], floor=floor)
        elif kind == "discrete":
            spec = WeightSpec.discrete(params["atoms"], params.get("probabilities"), floor=floor)
        else:
            spec = WeightSpec.dirichlet(params["alpha"], floor=floor)
    except KeyError as exc:
        raise SpecValidationError(f"field 'parameters.{exc.args[0]}': missing") from None
    except SpecValidationError as exc:
        raise SpecValidationError(f"field 'parameters': {exc}") from None
    if "b" in d and d["b"] != spec.b:
        raise SpecValidationError(f"field 'b': {d['b']} does not match weight length {spec.b}")
    return spec


def measure_from_dict(d: dict, seed: Optional[int] = None, horizon: Optional[int] = None,
                      guard: Optional[int] = None) -> MeasureView:
    """Build a realization from ``{kind, b, parameters, floor, horizon, seed, riesz}``.

    Explicit keyword arguments override the document.
    """
    if not isinstance(d, dict):
        raise SpecValidationError("measure config must be a JSON object")
    seed = d.get("seed", 0) if seed is None else seed
    horizon = d.get("horizon", 64) if horizon is None else horizon
    if not isinstance(seed, int) or seed < 0:
        raise SpecValidationError("field 'seed': must be a non-negative integer")
    if not isinstance(horizon, int) or horizon < 1:
        raise SpecValidationError("field 'horizon': must be a positive integer")
    if d.get("kind") == "riesz":
        riesz = d.get("riesz", {})
        if not isinstance(riesz, dict):
            raise SpecValidationError("field 'riesz': must be an object")
        b = d.get("b", 2)
        if not isinstance(b, int) or b < 2:
            raise SpecValidationError("field 'b': must be an integer >= 2")
        g = riesz.get("guard", 6) if guard is None else guard
        return generate_riesz(b=b, a=float(riesz.get("a", 0.5)), horizon=horizon + g,
                              seed=seed, guard=g)
    return generate_cascade(spec_from_dict(d), horizon, seed)


def measure_to_dict(m: MeasureView) -> dict:
    if isinstance(m, CascadeMeasure):
        d = m.spec.to_dict()
        d.update(horizon=m.horizon, seed=m.seed)
        return d
    if isinstance(m, RieszMeasure):
        return {"kind": "riesz", "b": m.b, "horizon": m.horizon - m.guard, "seed": m.seed,
                "riesz": {"a": m.a, "guard": m.guard}}
    raise TypeError(f"cannot serialize {type(m).__name__}")


def load_measure(path, **overrides) -> MeasureView:
    with open(path) as fh:
        return measure_from_dict(json.load(fh), **overrides)


__all__ = [
    "BLOCK", "CascadeMeasure", "DegenerateMeasureError", "DenseMeasure", "HorizonError",
    "MeasureView", "ResourceGuardError", "RieszMeasure", "SpecValidationError", "WeightSpec",
    "dense_table", "generate_cascade", "generate_riesz", "level_weights", "load_measure",
    "measure_from_dict", "measure_to_dict", "riesz_mass", "shift", "spec_from_dict",
    "verify_quasi_bernoulli", "write_dense_csv",
]
