import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from growthspeed.symbolic import (
    ResourceGuardError,
    Word,
    boundary_words,
    check_dense,
    delta,
    digit_table,
    index_of,
    neighbors,
    window_extrema,
    word_of,
)


@pytest.mark.parametrize("w,b,expected", [("10", 2, 2), ("", 2, 0), ("21", 3, 7)])
def test_index_of(w, b, expected):
    assert index_of(w, b) == expected


@pytest.mark.parametrize("i,n,b,expected", [(2, 2, 2, "10"), (0, 3, 2, "000"), (7, 3, 2, "111")])
def test_word_of(i, n, b, expected):
    assert str(word_of(i, n, b)) == expected


def test_word_of_out_of_range():
    with pytest.raises(IndexError):
        word_of(4, 2, 2)
    with pytest.raises(IndexError):
        word_of(-1, 2, 2)


def test_bad_digit():
    with pytest.raises(ValueError):
        Word((0, 2), 2)


@pytest.mark.parametrize("v,w,expected", [("01", "10", 1), ("00", "11", 3), ("0110", "0110", 0)])
def test_delta(v, w, expected):
    assert delta(v, w) == expected


def test_delta_length_mismatch():
    with pytest.raises(ValueError):
        delta("0", "01")


def test_neighbors_examples():
    assert [str(u) for u in neighbors("10", 1)] == ["01", "10", "11"]
    assert [str(u) for u in neighbors("0110", 0)] == ["0110"]
    assert [str(u) for u in neighbors("00", 1)] == ["00", "01"]
    assert [str(u) for u in neighbors("22", 2, b=3)] == ["20", "21", "22"]


def test_boundary_words():
    assert str(boundary_words(3, "low", 2)) == "000"
    assert str(boundary_words(2, "high", 3)) == "22"
    assert str(boundary_words(0, "low")) == "" == str(boundary_words(0, "high"))


@given(st.integers(2, 5), st.integers(0, 8), st.data())
def test_index_roundtrip(b, n, data):
    i = data.draw(st.integers(0, b**n - 1))
    assert index_of(word_of(i, n, b)) == i


def test_digit_table_matches_word_of():
    for b, n in [(2, 5), (3, 4)]:
        tab = digit_table(n, b)
        for i in range(b**n):
            assert tuple(tab[i]) == word_of(i, n, b).digits


def test_dense_guard():
    with pytest.raises(ResourceGuardError):
        check_dense(2, 27)
    assert check_dense(2, 26) == 2**26


@pytest.mark.parametrize("b,n", [(2, n) for n in range(2, 9)] + [(3, n) for n in range(2, 9)])
def test_prefix_neighbor_property(b, n):
    # delta(prefix v, prefix w) > k implies delta(v, w) > b k, for every k >= 0
    idx = np.arange(b**n)
    for chunk in np.array_split(idx, max(1, b**n // 512)):
        d = np.abs(chunk[:, None] - idx[None, :])
        dbar = np.abs(chunk[:, None] // b - idx[None, :] // b)
        # the strongest instance is k = dbar - 1
        mask = dbar >= 1
        assert np.all(d[mask] > b * (dbar[mask] - 1))


@pytest.mark.parametrize("b", [2, 3])
@pytest.mark.parametrize("m", range(1, 9))
def test_adjacent_pair_decomposition(b, m):
    if b**m > 7000:
        pytest.skip("enumeration size")
    expected = {(word_of(i, m, b).digits, word_of(i + 1, m, b).digits) for i in range(b**m - 1)}
    built = []
    for k in range(m):
        d_k, g_k = (b - 1,) * k, (0,) * k
        for u in itertools.product(range(b), repeat=m - 1 - k):
            for r in range(b - 1):
                built.append((u + (r,) + d_k, u + (r + 1,) + g_k))
    assert len(built) == len(set(built))
    assert set(built) == expected


def test_window_extrema_clipped():
    x = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
    lo, hi = window_extrema(x, 1)
    assert lo.tolist() == [1, 1, 1, 1, 1]
    assert hi.tolist() == [3, 4, 4, 5, 5]
    lo, hi = window_extrema(x, 0)
    assert lo.tolist() == hi.tolist() == x.tolist()
