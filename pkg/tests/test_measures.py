import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from growthspeed.measures import (
    DegenerateMeasureError,
    CascadeMeasure,
    HorizonError,
    RieszMeasure,
    SpecValidationError,
    WeightSpec,
    dense_table,
    generate_cascade,
    generate_riesz,
    measure_from_dict,
    measure_to_dict,
    riesz_mass,
    verify_quasi_bernoulli,
    write_dense_csv,
)
from growthspeed.symbolic import word_of
from oracles import TWO_ATOMS, brute_masses

DIRICHLET3 = WeightSpec.dirichlet([1.0, 2.0, 1.5])


# --- cascades ---------------------------------------------------------------


def test_cascade_mass_examples(quarter, uniform):
    assert quarter.mass("011") == pytest.approx(9 / 64, rel=1e-15)
    assert quarter.mass("") == 1.0
    for n in range(6):
        assert np.allclose(uniform.masses(n), 2.0**-n, rtol=1e-15)


def test_dense_table_examples(quarter):
    assert np.allclose(dense_table(quarter, 2), [1 / 16, 3 / 16, 3 / 16, 9 / 16], rtol=1e-15)
    assert abs(math.fsum(dense_table(quarter, 12)) - 1) < 1e-12


@pytest.mark.parametrize("spec", [TWO_ATOMS, DIRICHLET3])
def test_dense_table_matches_brute_products(spec):
    m = generate_cascade(spec, 10, seed=5)
    for n in range(1, 7):
        assert np.allclose(dense_table(m, n), brute_masses(m.levels, n, spec.b), rtol=1e-12)


def test_shift_examples(quarter):
    assert quarter.shift(0).mass("0110") == quarter.mass("0110")
    assert quarter.shift(5).mass("0") == pytest.approx(0.25)
    m = generate_cascade(TWO_ATOMS, 20, seed=11)
    for r in range(2):
        assert m.shift(1).mass(str(r)) == pytest.approx(m.levels[1][r], rel=1e-15)


def test_shift_shares_realization():
    m = generate_cascade(DIRICHLET3, 3000, seed=2)
    longer = generate_cascade(DIRICHLET3, 5000, seed=2)
    assert np.array_equal(m.levels, longer.levels[:3000])
    # copy j reads levels j+1, ... of the same realization
    assert np.array_equal(m.shift(1500).level_table(10), m.levels[1500:1510])


def test_horizon_errors(quarter):
    short = generate_cascade(quarter.spec, 10, 0)
    with pytest.raises(HorizonError):
        short.mass("0" * 11)
    with pytest.raises(HorizonError):
        quarter.shift(60).masses(5)


def test_seed_determinism():
    a = generate_cascade(DIRICHLET3, 2100, seed=9)
    b = generate_cascade(DIRICHLET3, 2100, seed=9)
    c = generate_cascade(DIRICHLET3, 2100, seed=10)
    assert a.levels.tobytes() == b.levels.tobytes()
    assert not np.array_equal(a.levels, c.levels)
    r1, r2 = generate_riesz(2, 0.5, 40, seed=3), generate_riesz(2, 0.5, 40, seed=3)
    assert r1.phases.tobytes() == r2.phases.tobytes()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 8))
def test_additivity(seed, n):
    for spec in (TWO_ATOMS, DIRICHLET3):
        m = generate_cascade(spec, 10, seed)
        parent = m.masses(n - 1)
        child = m.masses(n).reshape(-1, spec.b).sum(axis=1)
        assert np.allclose(parent, child, rtol=1e-12)


def test_floor_property_over_seeds():
    # (P2): single-digit masses stay in [floor, 1]
    spec = WeightSpec.dirichlet([0.3, 0.3], floor=0.01)
    for seed in range(200):
        m = generate_cascade(spec, 1, seed)
        masses = m.masses(1)
        assert masses.min() >= spec.floor and masses.max() <= 1


def test_realization_structure():
    # (P4): depth-j masses use only levels <= j; the copy only levels > j
    m = generate_cascade(TWO_ATOMS, 12, seed=4)
    j = 5
    perturbed_tail = m.levels.copy()
    perturbed_tail[j:] = perturbed_tail[j:][::-1]
    perturbed_head = m.levels.copy()
    perturbed_head[:j] = [0.5, 0.5]
    tail = CascadeMeasure(m.spec, m.seed, perturbed_tail)
    head = CascadeMeasure(m.spec, m.seed, perturbed_head)
    assert np.array_equal(tail.masses(j), m.masses(j))
    assert np.array_equal(head.shift(j).masses(7), m.shift(j).masses(7))


@pytest.mark.parametrize("bad", [
    dict(b=2, kind="deterministic", weights=(0.3, 0.6)),
    dict(b=2, kind="deterministic", weights=(1.0, 0.0)),
    dict(b=2, kind="discrete", atoms=((0.5, 0.5),), probabilities=(0.7,)),
    dict(b=3, kind="dirichlet", alpha=(1.0, 1.0)),
    dict(b=2, kind="poisson"),
])
def test_spec_validation(bad):
    with pytest.raises(SpecValidationError):
        WeightSpec(**bad)


def test_quasi_bernoulli_cascade_exact():
    for spec in (TWO_ATOMS, DIRICHLET3):
        m = generate_cascade(spec, 12, seed=1)
        assert verify_quasi_bernoulli(m, 3, 3) == pytest.approx(1.0, abs=1e-12)


# --- Riesz products -----------------------------------------------------------


def test_riesz_flat_potential():
    for a in (0.0,):
        r = generate_riesz(2, a, 20, seed=1)
        assert riesz_mass(r, "01") == pytest.approx(0.25, rel=1e-12)
        assert np.allclose(r.masses(5), 2.0**-5, rtol=1e-12)
    r3 = generate_riesz(3, 0.0, 16, seed=1, guard=3)
    assert np.allclose(r3.masses(3), 3.0**-3, rtol=1e-12)


def test_riesz_normalization():
    r = generate_riesz(2, 0.5, 20, seed=7)
    for n in range(1, 8):
        assert abs(math.fsum(r.masses(n)) - 1) < 1e-12


def test_riesz_single_mass_matches_table():
    r = generate_riesz(2, 0.5, 20, seed=7)
    table = r.masses(4)
    for i in (0, 5, 15):
        assert r.mass(word_of(i, 4)) == pytest.approx(table[i], rel=1e-12)


def test_riesz_additivity_approximate():
    r = generate_riesz(2, 0.5, 24, seed=3)
    parent = r.masses(4)
    child = r.masses(5).reshape(-1, 2).sum(axis=1)
    assert np.allclose(parent, child, rtol=1e-2)


def test_riesz_density_by_direct_quadrature():
    # independent route: evaluate the product density on the midpoint grid with floats
    r = generate_riesz(2, 0.5, 12, seed=8, guard=2)
    n, J, R = 3, 5, 7
    x = (np.arange(2**R) + 0.5) / 2**R
    dens = np.ones_like(x)
    for k in range(J):
        dens *= np.exp(0.5 * np.cos(2 * np.pi * (2**k * x + r.phases[k])))
    expected = dens.reshape(2**n, -1).sum(axis=1) / dens.sum()
    assert np.allclose(r.masses(n), expected, rtol=1e-10)


def test_riesz_guard_doubling_within_quasi_bernoulli_constant():
    r = generate_riesz(2, 0.5, 40, seed=5, guard=3)
    C = verify_quasi_bernoulli(r, 4, 4)
    m3, m6 = r.mass("0"), r.with_guard(6).mass("0")
    assert 1 / C <= m6 / m3 <= C


def test_riesz_shift_uses_later_phases():
    r = generate_riesz(2, 0.5, 30, seed=4, guard=3)
    direct = RieszMeasure(2, 0.5, r.phases[2:], guard=3)
    assert np.allclose(r.shift(2).masses(4), direct.masses(4), rtol=1e-12)


def test_quasi_bernoulli_riesz():
    flat = generate_riesz(2, 0.0, 20, seed=1, guard=3)
    assert verify_quasi_bernoulli(flat, 3, 3) == pytest.approx(1.0, abs=1e-10)
    r = generate_riesz(2, 0.5, 20, seed=1, guard=6)
    C = verify_quasi_bernoulli(r, 4, 4)  # exhaustive at depth 8
    assert 1.0 <= C < np.inf
    for sample in (16, 64, 256):
        assert verify_quasi_bernoulli(r, 4, 4, sample=sample, seed=0) <= C
    assert verify_quasi_bernoulli(r, 4, 4, sample=10**6) == C


def test_degenerate_measure_detected():
    m = generate_cascade(TWO_ATOMS, 6, seed=0)

    class Zeroed:
        b = 2

        def log_masses(self, n):
            out = m.log_masses(n)
            out[0] = -np.inf
            return out

        def shift(self, j):
            return self

    with pytest.raises(DegenerateMeasureError):
        verify_quasi_bernoulli(Zeroed(), 2, 2)


# --- serialization --------------------------------------------------------------


def test_config_roundtrip(tmp_path):
    m = generate_cascade(TWO_ATOMS, 30, seed=12)
    doc = measure_to_dict(m)
    back = measure_from_dict(json.loads(json.dumps(doc)))
    assert np.array_equal(back.levels, m.levels)
    r = generate_riesz(2, 0.3, 20, seed=2, guard=4)
    rb = measure_from_dict(measure_to_dict(r))
    assert np.array_equal(rb.phases, r.phases) and rb.guard == 4 and rb.max_depth == r.max_depth


def test_config_field_errors():
    with pytest.raises(SpecValidationError, match="kind"):
        measure_from_dict({"kind": "gamma"})
    with pytest.raises(SpecValidationError, match="parameters.weights"):
        measure_from_dict({"kind": "deterministic", "parameters": {}})
    with pytest.raises(SpecValidationError, match="seed"):
        measure_from_dict({"kind": "deterministic", "parameters": {"weights": [0.5, 0.5]}, "seed": -1})


def test_dense_csv(tmp_path, quarter):
    path = tmp_path / "t.csv"
    write_dense_csv(quarter, 2, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "n,index,word,mass"
    assert lines[2] == "2,1,01,0.1875"
