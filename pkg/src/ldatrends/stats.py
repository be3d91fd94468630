"""Bootstrap significance and Vargha-Delaney A12 effect size.

Two samples differ ("first is higher") only when a percentile bootstrap
interval for the difference of means excludes zero *and* A12 is at least
``threshold`` away from 0.5.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InputError, ParameterError

VERDICTS = ("first_higher", "second_higher", "indistinguishable")


@dataclass(frozen=True)
class CompareConfig:
    resamples: int = 10000
    level: float = 0.95
    a12_threshold: float = 0.06
    seed: int = 0

    def to_dict(self):
        return {
            "bootstrap_statistic": "difference of means",
            "bootstrap_interval": "percentile",
            "resamples": self.resamples,
            "level": self.level,
            "a12_threshold": self.a12_threshold,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class StatResult:
    significant: bool
    a12: float
    nontrivial: bool
    verdict: str
    ci: tuple

    def to_dict(self):
        return {
            "significant": self.significant,
            "a12": round(self.a12, 6),
            "nontrivial": self.nontrivial,
            "verdict": self.verdict,
            "ci": [round(self.ci[0], 6), round(self.ci[1], 6)],
        }


def _sample(xs, name):
    arr = np.asarray(xs, dtype=float).ravel()
    if arr.size == 0:
        raise InputError(f"{name} is empty")
    return arr


def a12(xs, ys) -> float:
    """P(X > Y) + 0.5 P(X = Y) over all pairs of the two samples."""
    x = _sample(xs, "xs")
    y = np.sort(_sample(ys, "ys"))
    less = np.searchsorted(y, x, side="left")
    leq = np.searchsorted(y, x, side="right")
    wins = less.sum() + 0.5 * (leq - less).sum()
    return float(wins / (x.size * y.size))


def bootstrap_diff(xs, ys, resamples: int = 10000, level: float = 0.95, seed: int = 0,
                   chunk: int = 1000):
    """Percentile bootstrap for mean(xs) - mean(ys).

    Returns ``(significant, (lo, hi))``; significant iff the interval
    excludes zero.
    """
    x = _sample(xs, "xs")
    y = _sample(ys, "ys")
    if resamples < 1:
        raise ParameterError("resamples must be >= 1")
    if not 0 < level < 1:
        raise ParameterError("level must lie in (0, 1)")
    # resample in a canonical argument order so swapping xs/ys negates the interval exactly
    if (y.size, y.tobytes()) < (x.size, x.tobytes()):
        significant, (lo, hi) = bootstrap_diff(y, x, resamples, level, seed, chunk)
        return significant, (-hi, -lo)
    rng = np.random.Generator(np.random.PCG64(seed))
    diffs = np.empty(resamples)
    for start in range(0, resamples, chunk):
        b = min(chunk, resamples - start)
        mx = x[rng.integers(0, x.size, size=(b, x.size))].mean(axis=1)
        my = y[rng.integers(0, y.size, size=(b, y.size))].mean(axis=1)
        diffs[start:start + b] = mx - my
    tail = (1 - level) / 2
    lo, hi = np.quantile(diffs, [tail, 1 - tail])
    if x.size == y.size and np.array_equal(x, y):
        # exchangeable inputs: the difference is symmetric about zero
        lo, hi = (lo - hi) / 2, (hi - lo) / 2
    significant = bool(lo > 0 or hi < 0)
    return significant, (float(lo), float(hi))


def compare(xs, ys, cfg: CompareConfig = CompareConfig()) -> StatResult:
    significant, ci = bootstrap_diff(xs, ys, cfg.resamples, cfg.level, cfg.seed)
    effect = a12(xs, ys)
    nontrivial = abs(effect - 0.5) >= cfg.a12_threshold
    if significant and nontrivial:
        verdict = "first_higher" if effect > 0.5 else "second_higher"
    else:
        verdict = "indistinguishable"
    return StatResult(significant, effect, nontrivial, verdict, ci)
