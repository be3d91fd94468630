"""Differential evolution over LDA hyperparameters (k, alpha, eta).

Each parent ``A`` of the frontier gets a trial vector built from three
other members ``B, C, D``::

    E_i = B_i + f * (C_i - D_i)   if R < cr
    E_i = A_i                     otherwise

and ``E`` replaces ``A`` when it scores strictly better. Replacements are
applied once per generation so that trial evaluation order never matters.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ParameterError
from .stability import StabilityConfig, stability_objective
from .textprep import BowCorpus

logger = logging.getLogger(__name__)

FORCED_MODES = ("parent", "mutant")


@dataclass(frozen=True)
class CandidateVector:
    k: int
    alpha: float
    eta: float

    def to_dict(self):
        return {"k": self.k, "alpha": round(float(self.alpha), 6), "eta": round(float(self.eta), 6)}


@dataclass(frozen=True)
class Bounds:
    k: tuple = (2, 50)
    alpha: tuple = (0.001, 1.0)
    eta: tuple = (0.001, 1.0)

    def __post_init__(self):
        lo, hi = self.k
        if int(lo) != lo or int(hi) != hi or lo < 2 or hi < lo:
            raise ParameterError(f"bad k bounds {self.k}")
        for name in ("alpha", "eta"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ParameterError(f"{name} bounds must satisfy 0 < lo <= hi, got {(lo, hi)}")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.k[0], self.alpha[0], self.eta[0]], dtype=float)

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.k[1], self.alpha[1], self.eta[1]], dtype=float)

    def clamp(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    def candidate(self, x: np.ndarray) -> CandidateVector:
        """Round k and clamp every coordinate into bounds."""
        x = self.clamp(np.asarray(x, dtype=float))
        k = int(min(max(math.floor(x[0] + 0.5), self.k[0]), self.k[1]))
        return CandidateVector(k, float(x[1]), float(x[2]))

    def contains(self, c: CandidateVector) -> bool:
        return (self.k[0] <= c.k <= self.k[1] and self.alpha[0] <= c.alpha <= self.alpha[1]
                and self.eta[0] <= c.eta <= self.eta[1])


@dataclass(frozen=True)
class DeConfig:
    """DE settings. ``forced`` picks what happens to the one randomly chosen
    dimension of every trial: ``"parent"`` keeps the parent's value there,
    ``"mutant"`` always takes the mutated value (classic DE/rand/1/bin)."""

    np: int = 10
    generations: int = 3
    cr: float = 0.3
    f: float = 0.7
    bounds: Bounds = field(default_factory=Bounds)
    seed: int = 0
    forced: str = "parent"

    def __post_init__(self):
        if self.np < 4:
            raise ParameterError("population size must be >= 4")
        if self.generations < 0:
            raise ParameterError("generations must be >= 0")
        if not 0 <= self.cr <= 1:
            raise ParameterError("cr must lie in [0, 1]")
        if not 0 <= self.f <= 2:
            raise ParameterError("f must lie in [0, 2]")
        if self.forced not in FORCED_MODES:
            raise ParameterError(f"forced must be one of {FORCED_MODES}")

    def to_dict(self):
        return {
            "np": self.np, "generations": self.generations, "cr": self.cr, "f": self.f,
            "bounds": {"k": list(self.bounds.k), "alpha": list(self.bounds.alpha),
                       "eta": list(self.bounds.eta)},
            "seed": self.seed, "forced": self.forced,
        }


@dataclass
class Evaluation:
    generation: int
    candidate: CandidateVector
    score: float
    seconds: float

    def log_line(self, timing: bool = True) -> str:
        """One JSON line; ``timing=False`` drops the wall time for reproducible logs."""
        row = {
            "generation": self.generation,
            "candidate": self.candidate.to_dict(),
            "score": None if not math.isfinite(self.score) else round(self.score, 6),
        }
        if timing:
            row["wall_seconds"] = round(self.seconds, 3)
        return json.dumps(row, sort_keys=True)


@dataclass
class TuneResult:
    best: CandidateVector
    best_score: float
    history: list  # per generation: (best so far, population median)
    evaluations: int
    log: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "best": self.best.to_dict(),
            "best_score": round(self.best_score, 6),
            "evaluations": self.evaluations,
            "history": [{"generation": g, "best": round(b, 6), "median": round(m, 6)}
                        for g, (b, m) in enumerate(self.history)],
        }


def trial_vector(a, b, c, d, cfg: DeConfig, draws, forced_dim: int) -> np.ndarray:
    """Crossover/mutation arithmetic with explicit random inputs (no clamping)."""
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    mutated = b + cfg.f * (c - d)
    take = np.asarray(draws) < cfg.cr
    take[forced_dim] = cfg.forced == "mutant"
    return np.where(take, mutated, a)


def _as_array(v):
    if isinstance(v, CandidateVector):
        return np.array([v.k, v.alpha, v.eta], dtype=float)
    return np.asarray(v, dtype=float)


def de_mutate(a, b, c, d, cfg: DeConfig, rng: np.random.Generator) -> CandidateVector:
    """Build a trial candidate for parent ``a`` from donors ``b, c, d``.

    Donors must differ from each other and from the parent.
    """
    vecs = [_as_array(v) for v in (a, b, c, d)]
    for i in range(4):
        for j in range(i + 1, 4):
            if np.array_equal(vecs[i], vecs[j]):
                raise ParameterError("parent and donors must be four distinct vectors")
    draws = rng.random(3)
    forced_dim = int(rng.integers(3))
    return cfg.bounds.candidate(trial_vector(*vecs, cfg, draws, forced_dim))


def de_optimize(objective: Callable[[CandidateVector], float], cfg: DeConfig,
                initial: Optional[list] = None, on_evaluation=None) -> TuneResult:
    """Maximize ``objective`` over candidates within ``cfg.bounds``.

    Parameters
    ----------
    objective : callable
        Maps a :class:`CandidateVector` to a score. Exceptions score -inf.
    cfg : DeConfig
    initial : list of CandidateVector, optional
        Seeded into the first population slots; the rest are drawn
        uniformly within bounds.
    on_evaluation : callable, optional
        Called with every :class:`Evaluation` as it completes.

    Returns
    -------
    TuneResult
        Uses exactly ``np * (generations + 1)`` objective evaluations.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    bounds = cfg.bounds
    pop = rng.uniform(bounds.lower, bounds.upper, size=(cfg.np, 3))
    for i, cand in enumerate((initial or [])[: cfg.np]):
        pop[i] = bounds.clamp(_as_array(cand))
    log = []

    def evaluate(x, generation):
        cand = bounds.candidate(x)
        t0 = time.perf_counter()
        try:
            score = float(objective(cand))
            if math.isnan(score):
                raise ValueError("objective returned NaN")
        except Exception as exc:  # noqa: BLE001 - a failed candidate must not stop the search
            logger.warning("objective failed for %s: %s", cand, exc)
            score = -math.inf
        ev = Evaluation(generation, cand, score, time.perf_counter() - t0)
        log.append(ev)
        if on_evaluation is not None:
            on_evaluation(ev)
        return score

    scores = np.array([evaluate(x, 0) for x in pop])
    best_i = int(np.argmax(scores))
    best_x, best_score = pop[best_i].copy(), float(scores[best_i])
    history = [(best_score, float(np.median(scores)))]

    for gen in range(1, cfg.generations + 1):
        trials = np.empty_like(pop)
        for i in range(cfg.np):
            others = [j for j in range(cfg.np) if j != i]
            b, c, d = rng.choice(others, size=3, replace=False)
            draws = rng.random(3)
            forced_dim = int(rng.integers(3))
            trials[i] = bounds.clamp(trial_vector(pop[i], pop[b], pop[c], pop[d], cfg, draws, forced_dim))
        trial_scores = np.array([evaluate(x, gen) for x in trials])
        better = trial_scores > scores
        pop[better] = trials[better]
        scores[better] = trial_scores[better]
        gi = int(np.argmax(scores))
        if scores[gi] > best_score:
            best_x, best_score = pop[gi].copy(), float(scores[gi])
        history.append((best_score, float(np.median(scores))))
        logger.info("generation %d: best %.4f median %.4f", gen, best_score, history[-1][1])

    return TuneResult(bounds.candidate(best_x), best_score, history, len(log), log)


def default_candidate(bounds: Bounds, k: int = 20, eta: float = 0.01) -> CandidateVector:
    """The untuned setting: k topics, alpha = 1/k, small eta, clamped into bounds."""
    k = int(min(max(k, bounds.k[0]), bounds.k[1]))
    return bounds.candidate(np.array([k, 1.0 / k, eta]))


def ldade(corpus: BowCorpus, cfg: DeConfig, stability_cfg: StabilityConfig, vocab=None,
          on_evaluation=None) -> TuneResult:
    """Tune (k, alpha, eta) for topic stability on ``corpus``.

    The default candidate is placed in the initial population, so the
    result never scores below the untuned setting.
    """
    objective = stability_objective(corpus, stability_cfg, cfg.seed, vocab)
    return de_optimize(objective, cfg, initial=[default_candidate(cfg.bounds)],
                       on_evaluation=on_evaluation)
