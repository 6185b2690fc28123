"""Bayesian single-shot frequency estimation on a fixed grid.

The posterior over qubit detuning lives on a uniform frequency grid and is
updated one projective outcome at a time:

    P(f | r) ∝ P(f) * (1 + r (alpha + beta cos(2 pi f t + theta))) / 2

with r = +1 for spin-down and -1 for spin-up.  Likelihoods are clamped
away from zero, accumulation happens in log space, and the grid is
renormalised after every update, so hundreds of shots cannot underflow.
The point estimate is the maximum-probability bin centre, ties resolving
to the lowest frequency.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

LIKELIHOOD_FLOOR = 1e-12

DEFAULT_F_MIN = 0.0
DEFAULT_F_MAX = 12.5e6
DEFAULT_N_BINS = 2500


class DegeneratePosteriorError(RuntimeError):
    """Posterior lost all mass; the caller should reset the prior."""


@dataclass
class LikelihoodParams:
    """Fringe model used in the single-shot likelihood."""

    alpha: float = 0.0
    beta: float = 1.0
    theta: float = 0.0

    def __post_init__(self):
        if abs(self.alpha) + abs(self.beta) > 1.0 + 1e-9:
            raise ValueError(
                f"|alpha| + |beta| must be <= 1 for a valid likelihood, got "
                f"{abs(self.alpha) + abs(self.beta)}"
            )


@dataclass
class PriorSpec:
    """Initial belief: 'uniform', or 'gaussian' with mean and sigma in Hz."""

    kind: str = "uniform"
    mean: float = 0.0
    sigma: float = 50e3

    def __post_init__(self):
        if self.kind not in ("uniform", "gaussian"):
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if self.kind == "gaussian" and self.sigma <= 0:
            raise ValueError("gaussian prior needs sigma > 0")


@dataclass
class PosteriorGrid:
    """Normalised log-probabilities on a uniform frequency grid.

    Bin centre i sits at f_min + i * (f_max - f_min) / n_bins, so with the
    defaults (0 to 12.5 MHz, 2500 bins) the centres are exact multiples of
    the 5 kHz bin width.
    """

    f_min: float
    f_max: float
    n_bins: int
    log_weights: np.ndarray

    def __post_init__(self):
        if not self.f_max > self.f_min:
            raise ValueError("need f_max > f_min")
        if self.n_bins < 2:
            raise ValueError("need at least 2 bins")
        self.log_weights = np.asarray(self.log_weights, dtype=float)
        if self.log_weights.shape != (self.n_bins,):
            raise ValueError("log_weights length must equal n_bins")

    @property
    def bin_width(self) -> float:
        return (self.f_max - self.f_min) / self.n_bins

    @property
    def centers(self) -> np.ndarray:
        return self.f_min + np.arange(self.n_bins) * self.bin_width

    @property
    def probabilities(self) -> np.ndarray:
        return np.exp(self.log_weights)


def _normalized(f_min, f_max, n_bins, log_weights) -> PosteriorGrid:
    with np.errstate(over="ignore"):
        peak = np.max(log_weights)
    if not np.isfinite(peak):
        raise DegeneratePosteriorError(
            "posterior collapsed to zero mass everywhere; reset the prior"
        )
    shifted = log_weights - peak
    log_norm = peak + math.log(np.sum(np.exp(shifted)))
    return PosteriorGrid(f_min, f_max, n_bins, log_weights - log_norm)


def init_prior(
    spec: PriorSpec,
    f_min: float = DEFAULT_F_MIN,
    f_max: float = DEFAULT_F_MAX,
    n_bins: int = DEFAULT_N_BINS,
) -> PosteriorGrid:
    """Build a normalised prior grid.

    A gaussian mean outside [f_min, f_max] is allowed but warned about,
    since the discretised prior then keeps only a tail.
    """
    centers = np.arange(n_bins) * (f_max - f_min) / n_bins + f_min
    if spec.kind == "uniform":
        log_weights = np.zeros(n_bins)
    else:
        if not f_min <= spec.mean <= f_max:
            warnings.warn(
                f"gaussian prior mean {spec.mean} Hz lies outside the grid "
                f"[{f_min}, {f_max}] Hz; only a tail is representable",
                stacklevel=2,
            )
        log_weights = -0.5 * ((centers - spec.mean) / spec.sigma) ** 2
    return _normalized(f_min, f_max, n_bins, log_weights)


def _shot_log_likelihood(grid: PosteriorGrid, outcome: int, t: float, lk: LikelihoodParams):
    r = 1.0 if outcome == 1 else -1.0
    cosine = np.cos(2.0 * math.pi * grid.centers * t + lk.theta)
    per_bin = 0.5 * (1.0 + r * (lk.alpha + lk.beta * cosine))
    return np.log(np.maximum(per_bin, LIKELIHOOD_FLOOR))


def bayes_update(grid: PosteriorGrid, outcome: int, t: float, lk: LikelihoodParams) -> PosteriorGrid:
    """Condition the posterior on one outcome at evolution time t.

    outcome is 1 (down) or 0 (up); the updated grid is renormalised.
    """
    if outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    if t < 0:
        raise ValueError("evolution time must be >= 0")
    log_weights = grid.log_weights + _shot_log_likelihood(grid, outcome, t, lk)
    return _normalized(grid.f_min, grid.f_max, grid.n_bins, log_weights)


def update_batch(
    grid: PosteriorGrid,
    outcomes: np.ndarray,
    times: np.ndarray,
    lk: LikelihoodParams,
    cos_table: np.ndarray | None = None,
) -> PosteriorGrid:
    """Condition on a whole shot sequence at once.

    Equivalent to folding bayes_update over (outcomes, times) in order;
    the log-likelihoods just sum.  cos_table may carry the precomputed
    cos(2 pi f_i t_k + theta) array of shape (len(times), n_bins).
    """
    outcomes = np.asarray(outcomes)
    times = np.asarray(times, dtype=float)
    if outcomes.shape != times.shape:
        raise ValueError("outcomes and times must have equal length")
    r = np.where(outcomes == 1, 1.0, -1.0)
    if cos_table is None:
        cos_table = np.cos(2.0 * math.pi * np.outer(times, grid.centers) + lk.theta)
    per_shot = 0.5 * (1.0 + r[:, None] * (lk.alpha + lk.beta * cos_table))
    log_lk = np.log(np.maximum(per_shot, LIKELIHOOD_FLOOR)).sum(axis=0)
    return _normalized(grid.f_min, grid.f_max, grid.n_bins, grid.log_weights + log_lk)


def estimate(grid: PosteriorGrid) -> float:
    """Maximum-probability bin centre; ties break to the lowest frequency."""
    return float(grid.centers[int(np.argmax(grid.log_weights))])


def posterior_sigma(grid: PosteriorGrid) -> float:
    """Standard deviation of the discrete posterior, in Hz."""
    p = grid.probabilities
    centers = grid.centers
    mean = float(np.dot(p, centers))
    var = float(np.dot(p, (centers - mean) ** 2))
    return math.sqrt(max(var, 0.0))


@dataclass
class EstimationSession:
    """Reusable estimator state for repeated probe cycles.

    Holds the grid geometry, the likelihood model, the recentring policy
    (uniform prior on the first cycle, then a gaussian of width
    prior_sigma centred on the previous estimate) and a cosine table
    precomputed for a fixed shot schedule.  Wall-clock duration of each
    posterior update is collected in update_seconds; it is diagnostic
    only and never written to result files.
    """

    likelihood: LikelihoodParams = field(default_factory=LikelihoodParams)
    evolution_times: np.ndarray | None = None
    f_min: float = DEFAULT_F_MIN
    f_max: float = DEFAULT_F_MAX
    n_bins: int = DEFAULT_N_BINS
    prior_sigma: float = 50e3
    previous_estimate: float | None = None

    def __post_init__(self):
        self._cos_table = None
        if self.evolution_times is not None:
            self.evolution_times = np.asarray(self.evolution_times, dtype=float)
            centers = np.arange(self.n_bins) * (self.f_max - self.f_min) / self.n_bins + self.f_min
            self._cos_table = np.cos(
                2.0 * math.pi * np.outer(self.evolution_times, centers) + self.likelihood.theta
            )
        self.update_seconds: list[float] = []

    def prior(self) -> PosteriorGrid:
        if self.previous_estimate is None:
            spec = PriorSpec(kind="uniform")
        else:
            spec = PriorSpec(kind="gaussian", mean=self.previous_estimate, sigma=self.prior_sigma)
        return init_prior(spec, self.f_min, self.f_max, self.n_bins)

    def estimate_cycle(self, outcomes: np.ndarray, times: np.ndarray | None = None):
        """Run one probe cycle: prior, batch update, point estimate.

        Returns (f_est, posterior).  Raises DegeneratePosteriorError if the
        posterior loses all mass; the caller decides whether to reset.
        """
        started = time.perf_counter()
        if times is None:
            if self.evolution_times is None:
                raise ValueError("no shot schedule: pass times or set evolution_times")
            times = self.evolution_times
            table = self._cos_table
        else:
            times = np.asarray(times, dtype=float)
            table = None
        posterior = update_batch(self.prior(), outcomes, times, self.likelihood, table)
        f_est = estimate(posterior)
        self.previous_estimate = f_est
        self.update_seconds.append(time.perf_counter() - started)
        return f_est, posterior

    def reset(self):
        self.previous_estimate = None
