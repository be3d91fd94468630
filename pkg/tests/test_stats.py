import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ldatrends.errors import InputError
from ldatrends.stats import CompareConfig, a12, bootstrap_diff, compare


def a12_brute(xs, ys):
    wins = sum(1.0 if x > y else 0.5 if x == y else 0.0 for x in xs for y in ys)
    return wins / (len(xs) * len(ys))


def test_a12_examples():
    assert a12([3, 1, 2], [3, 1, 2]) == 0.5
    assert a12([4, 5, 6], [1, 2, 3]) == 1.0
    assert a12([1, 2], [1, 3]) == 0.375


def test_a12_empty():
    with pytest.raises(InputError):
        a12([], [1])
    with pytest.raises(InputError):
        bootstrap_diff([1], [])


def test_a12_brute_force_random_pairs():
    rng = np.random.default_rng(0)
    for _ in range(100):
        xs = rng.integers(0, 6, rng.integers(1, 15)).tolist()
        ys = rng.integers(0, 6, rng.integers(1, 15)).tolist()
        assert a12(xs, ys) == a12_brute(xs, ys)


samples = st.lists(st.integers(-20, 20), min_size=1, max_size=12)


@settings(max_examples=100, deadline=None)
@given(samples, samples)
def test_a12_complement(xs, ys):
    assert a12(xs, ys) + a12(ys, xs) == pytest.approx(1.0)


@settings(max_examples=100, deadline=None)
@given(samples, samples)
def test_a12_monotone_invariance(xs, ys):
    f = lambda v: [3 * x ** 3 + 7 for x in v]  # noqa: E731
    assert a12(f(xs), f(ys)) == a12(xs, ys)


def test_bootstrap_identical_constant():
    sig, (lo, hi) = bootstrap_diff([5, 5, 5, 5], [5, 5, 5, 5], 2000, seed=1)
    assert not sig and lo == hi == 0.0


def test_bootstrap_separated():
    rng = np.random.default_rng(4)
    xs = 100 + rng.uniform(-0.01, 0.01, 30)
    ys = 1 + rng.uniform(-0.01, 0.01, 30)
    sig, (lo, hi) = bootstrap_diff(xs, ys, seed=2)
    assert sig and 0 < lo <= hi


def test_bootstrap_deterministic():
    xs, ys = [1, 4, 2, 8, 5], [3, 3, 9, 1]
    assert bootstrap_diff(xs, ys, seed=9) == bootstrap_diff(xs, ys, seed=9)


@settings(max_examples=30, deadline=None)
@given(samples, samples, st.integers(0, 1000))
def test_bootstrap_bounds_and_antisymmetry(xs, ys, seed):
    sig, (lo, hi) = bootstrap_diff(xs, ys, 500, seed=seed)
    assert min(xs) - max(ys) - 1e-9 <= lo <= hi <= max(xs) - min(ys) + 1e-9
    sig2, (lo2, hi2) = bootstrap_diff(ys, xs, 500, seed=seed)
    assert sig2 == sig and (lo2, hi2) == (-hi, -lo)


def test_compare_cases():
    assert compare([1, 2, 3], [1, 2, 3], CompareConfig(resamples=1000)).verdict == "indistinguishable"
    res = compare(list(range(100, 160)), list(range(60)), CompareConfig(resamples=2000))
    assert res.verdict == "first_higher" and res.significant and res.nontrivial
    assert compare(list(range(60)), list(range(100, 160)), CompareConfig(resamples=2000)).verdict == "second_higher"


def test_compare_small_effect_gate():
    # large samples make a 0.52 effect significant
    xs = [1.0] * 5200 + [0.0] * 4800
    ys = [0.5] * 10000
    res = compare(xs, ys, CompareConfig(resamples=2000, seed=3))
    assert a12(xs, ys) == pytest.approx(0.52)
    assert res.significant and not res.nontrivial and res.verdict == "indistinguishable"


@settings(max_examples=20, deadline=None)
@given(samples, samples)
def test_compare_antisymmetric(xs, ys):
    cfg = CompareConfig(resamples=300)
    a, b = compare(xs, ys, cfg), compare(ys, xs, cfg)
    swap = {"first_higher": "second_higher", "second_higher": "first_higher",
            "indistinguishable": "indistinguishable"}
    assert swap[a.verdict] == b.verdict
    assert (a.verdict != "indistinguishable") == (a.significant and a.nontrivial)
