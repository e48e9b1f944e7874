import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from unseen.histogram import CountHistogram
from unseen.moments import (
    MomentSequence,
    NoSingletonsError,
    OrderTooLargeError,
    default_max_order,
    estimate_moments,
    hankel_determinants,
    select_order,
)

from conftest import atom_moments


def cofactor_det(a):
    """Laplace expansion along the first row."""
    n = len(a)
    if n == 1:
        return a[0][0]
    total = 0.0
    for col in range(n):
        minor = [row[:col] + row[col + 1 :] for row in a[1:]]
        total += (-1) ** col * a[0][col] * cofactor_det(minor)
    return total


def test_simple_ratio():
    nu = estimate_moments(CountHistogram.from_mapping({1: 100, 2: 50}), 1)
    assert nu.values == (1.0, 1.0)


def test_table1_moments(table1_prefix):
    nu = estimate_moments(table1_prefix, 2)
    assert nu[0] == 1.0
    assert nu[1] == pytest.approx(2 * 73628 / 603776, rel=1e-15)
    assert nu[2] == pytest.approx(6 * 14113 / 603776, rel=1e-15)
    assert nu[1] == pytest.approx(0.2438918, abs=1e-7)
    assert nu[2] == pytest.approx(0.1402474, abs=1e-7)


def test_missing_frequency_is_zero():
    nu = estimate_moments(CountHistogram.from_mapping({1: 10, 2: 4, 5: 1}), 5)
    assert nu[2] == 0.0 and nu[3] == 0.0
    assert nu[4] == pytest.approx(math.factorial(5) / 10)
    assert nu[5] == 0.0


def test_no_singletons():
    with pytest.raises(NoSingletonsError):
        estimate_moments(CountHistogram.from_mapping({2: 5}), 1)


def test_overflow_reported():
    h = CountHistogram.from_mapping({1: 1, 200: 10**6})
    with pytest.raises(OrderTooLargeError):
        estimate_moments(h, 199)


def test_moment_sequence_rejects_negative():
    with pytest.raises(ValueError):
        MomentSequence((1.0, -0.5))


@given(
    st.dictionaries(st.integers(1, 12), st.integers(1, 10**6), min_size=1).filter(lambda d: 1 in d),
    st.integers(2, 1000),
)
def test_scale_free_in_n1(freqs, c):
    h = CountHistogram.from_mapping(freqs)
    a = estimate_moments(h, 8).values
    b = estimate_moments(h.scaled(c), 8).values
    assert a == pytest.approx(b, rel=1e-14)


def test_hankel_two_atom():
    dets, shifted = hankel_determinants([1, 1.5, 2.5, 4.5])
    assert dets[0] == 1.0
    assert dets[1] == pytest.approx(0.25, rel=1e-12)
    assert shifted[0] == 1.5
    assert shifted[1] == pytest.approx(1.5 * 4.5 - 2.5**2, rel=1e-12)


def test_hankel_single_atom_is_singular():
    dets, _ = hankel_determinants([1, 1, 1, 1])
    assert dets[1] == pytest.approx(0.0, abs=1e-15)


def test_hankel_table1():
    nu = (1, 0.243896, 0.140245)
    dets, _ = hankel_determinants(nu)
    assert dets[1] == pytest.approx(0.140245 - 0.243896**2, rel=1e-12)
    assert dets[1] == pytest.approx(0.080760, abs=1e-6)


@settings(max_examples=50)
@given(st.lists(st.floats(0.05, 5.0), min_size=8, max_size=8))
def test_hankel_matches_cofactor(raw):
    nu = [1.0] + raw[:7]
    dets, shifted = hankel_determinants(nu)
    for p, d in enumerate(dets):
        if p > 3:
            break
        ref = cofactor_det([[nu[i + j] for j in range(p + 1)] for i in range(p + 1)])
        assert d == pytest.approx(ref, rel=1e-10, abs=1e-12 * max(1.0, abs(ref)))
    for p, d in enumerate(shifted):
        if p > 3:
            break
        ref = cofactor_det([[nu[i + j + 1] for j in range(p + 1)] for i in range(p + 1)])
        assert d == pytest.approx(ref, rel=1e-10, abs=1e-12 * max(1.0, abs(ref)))


def test_select_order_examples():
    assert select_order([1, 1.5, 2.5, 4.5], 2) == 2
    assert select_order([1, 1, 1, 1], 2) == 1
    assert select_order([1, 1.5, 2.5, 4.5], 1) == 1


def test_select_order_needs_moments():
    # only nu_0..nu_2 available: order 2 needs nu_3
    assert select_order([1, 1.5, 2.5], 5) == 1


def test_select_order_never_below_one():
    assert select_order([1, 0, 0, 0], 3) == 1


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 4), st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(0, 4))
def test_select_order_recovers_atom_count(Q, seed, max_P, extra):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.choice(np.linspace(0.2, 5.0, 25), Q, replace=False))
    w = rng.dirichlet(np.full(Q, 2.0))
    nu = atom_moments(x, w, 2 * Q + extra)
    assert select_order(nu, max_P) == min(max_P, Q)


def test_default_max_order():
    assert default_max_order(CountHistogram.from_mapping({1: 3, 2: 1})) == 1
    assert default_max_order(CountHistogram.from_mapping({j: 1 for j in range(1, 9)})) == 4
    assert default_max_order(CountHistogram.from_mapping({j: 1 for j in range(1, 40)})) == 10
    assert default_max_order(CountHistogram.from_mapping({j: 1 for j in range(1, 40)}), cap=3) == 3
