"""Single-shot qubit measurement simulation.

Models Ramsey free-evolution and Rabi drive experiments on a qubit whose
detuning wanders according to a NoiseTrace.  Probabilities fold in readout
infidelity; shots are Bernoulli draws.  Repeated acquisition produces
time-resolved maps with an explicit laboratory clock, so slow noise shows
up as row-to-row drift exactly as in hardware.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .noise import NoiseTrace, TraceDurationError


@dataclass
class QubitParams:
    """Ramsey fringe shape and readout fidelities.

    alpha and beta_vis set the fringe offset and visibility,
    p_down = (1 + alpha + beta_vis cos(2 pi df t + theta)) / 2; readout
    maps the physical state through fidelities f_down and f_up.
    """

    alpha: float = 0.0
    beta_vis: float = 1.0
    theta: float = 0.0
    readout_fidelity_down: float = 1.0
    readout_fidelity_up: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.readout_fidelity_down <= 1.0:
            raise ValueError("readout_fidelity_down must be in [0, 1]")
        if not 0.0 <= self.readout_fidelity_up <= 1.0:
            raise ValueError("readout_fidelity_up must be in [0, 1]")
        hi = (1.0 + self.alpha + abs(self.beta_vis)) / 2.0
        lo = (1.0 + self.alpha - abs(self.beta_vis)) / 2.0
        if hi > 1.0 + 1e-12 or lo < -1e-12:
            raise ValueError(
                f"alpha={self.alpha}, beta_vis={self.beta_vis} push probabilities "
                f"outside [0, 1]"
            )

    def effective_fringe(self) -> tuple[float, float]:
        """Fringe parameters (alpha', beta') as seen through readout.

        Folding p_report = p f_down + (1 - p)(1 - f_up) into the fringe form
        (1 + alpha' + beta' cos)/2 gives the parameters an estimator should
        use when it models reported outcomes rather than physical states.
        """
        s = self.readout_fidelity_down + self.readout_fidelity_up - 1.0
        alpha_eff = 2.0 * (1.0 - self.readout_fidelity_up) + s * (1.0 + self.alpha) - 1.0
        beta_eff = s * self.beta_vis
        return alpha_eff, beta_eff


@dataclass
class ShotTiming:
    """Wall-clock budget of one single-shot cycle, in seconds."""

    manipulation_and_wait: float = 60e-6
    readout: float = 140e-6
    calculation: float = 40e-6

    def __post_init__(self):
        for name in ("manipulation_and_wait", "readout", "calculation"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    @property
    def shot_period(self) -> float:
        return self.manipulation_and_wait + self.readout


@dataclass
class ShotRecord:
    """One projective measurement: when, how long the evolution, what came out."""

    timestamp: float
    evolution_time: float
    outcome: int
    mw_detuning: float = 0.0


@dataclass
class RamseyMap:
    """Repeated Ramsey acquisition: rows are repetitions, columns evolution times."""

    evolution_times: np.ndarray
    row_start_times: np.ndarray
    values: np.ndarray
    kind: str = "outcomes"


@dataclass
class ChevronMap:
    """Ensemble-averaged Rabi map over (detuning, burst time)."""

    detunings: np.ndarray
    times: np.ndarray
    values: np.ndarray


def ramsey_probability(params: QubitParams, detuning, t) -> np.ndarray:
    """Reported spin-down probability after Ramsey evolution.

    The physical probability (1 + alpha + beta_vis cos(2 pi detuning t
    + theta)) / 2 is clipped to [0, 1] against float rounding and folded
    through the readout fidelities.
    """
    detuning = np.asarray(detuning, dtype=float)
    t = np.asarray(t, dtype=float)
    phase = 2.0 * math.pi * detuning * t + params.theta
    p = 0.5 * (1.0 + params.alpha + params.beta_vis * np.cos(phase))
    p = np.clip(p, 0.0, 1.0)
    f_down = params.readout_fidelity_down
    f_up = params.readout_fidelity_up
    return p * f_down + (1.0 - p) * (1.0 - f_up)


def rabi_probability(rabi_frequency: float, detuning, t, t2_rabi: float | None = None) -> np.ndarray:
    """Spin-up probability under a resonant drive of Rabi frequency f_R.

    P_up = f_R^2 / (f_R^2 + df^2) * (1 - cos(2 pi sqrt(f_R^2 + df^2) t)
    * exp(-t / t2_rabi)) / 2; t2_rabi=None disables drive decay.
    """
    if rabi_frequency <= 0:
        raise ValueError(f"rabi_frequency must be > 0, got {rabi_frequency}")
    detuning = np.asarray(detuning, dtype=float)
    t = np.asarray(t, dtype=float)
    f_eff_sq = rabi_frequency**2 + detuning**2
    f_eff = np.sqrt(f_eff_sq)
    envelope = 1.0 if t2_rabi is None else np.exp(-t / t2_rabi)
    p = 0.5 * (rabi_frequency**2 / f_eff_sq) * (1.0 - np.cos(2.0 * math.pi * f_eff * t) * envelope)
    return np.clip(p, 0.0, 1.0)


def sample_shot(rng: np.random.Generator, p_down) -> np.ndarray:
    """Bernoulli readout: 1 with probability p_down, else 0."""
    p_down = np.asarray(p_down, dtype=float)
    if np.any(p_down < -1e-12) or np.any(p_down > 1.0 + 1e-12):
        raise ValueError("p_down must lie in [0, 1]")
    return (rng.random(p_down.shape) < p_down).astype(np.int8)


def _require_duration(noise: NoiseTrace, needed: float, what: str):
    if noise.duration < needed:
        raise TraceDurationError(
            f"{what} needs {needed!r} s of noise but the trace holds only "
            f"{noise.duration!r} s"
        )


def simulate_repeated_ramsey(
    noise: NoiseTrace,
    params: QubitParams,
    timing: ShotTiming,
    t_max: float,
    t_step: float,
    repetitions: int,
    seed: int,
    f_offset: float = 2e6,
    row_period: float | None = None,
    return_probabilities: bool = False,
) -> RamseyMap:
    """Acquire a repeated Ramsey map against a drifting detuning.

    Each row sweeps the evolution time from t_step to t_max in steps of
    t_step, one shot per point, with the laboratory clock advancing by
    timing.shot_period per shot.  Rows start back to back unless
    row_period stretches them.  The instantaneous detuning of every shot is
    f_offset plus the noise-trace value at the shot's timestamp.

    With return_probabilities=True the map holds the reported p_down per
    cell instead of Bernoulli outcomes (noise still applies).
    """
    if t_step <= 0 or t_max < t_step:
        raise ValueError("need 0 < t_step <= t_max")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    evolution_times = np.arange(1, int(round(t_max / t_step)) + 1) * t_step
    n_cols = len(evolution_times)
    row_span = n_cols * timing.shot_period
    if row_period is None:
        row_period = row_span
    elif row_period < row_span:
        raise ValueError(
            f"row_period {row_period} s is shorter than the row itself ({row_span} s)"
        )
    total = (repetitions - 1) * row_period + row_span
    _require_duration(noise, total, "repeated Ramsey acquisition")
    row_start_times = np.arange(repetitions) * row_period
    shot_times = row_start_times[:, None] + np.arange(n_cols)[None, :] * timing.shot_period
    detunings = f_offset + noise.value_at(shot_times)
    p_down = ramsey_probability(params, detunings, evolution_times[None, :])
    if return_probabilities:
        values = p_down
        kind = "probabilities"
    else:
        rng = np.random.default_rng(seed)
        values = sample_shot(rng, p_down)
        kind = "outcomes"
    return RamseyMap(
        evolution_times=evolution_times,
        row_start_times=row_start_times,
        values=values,
        kind=kind,
    )


def simulate_rabi_chevron(
    noise: NoiseTrace,
    rabi_frequency: float,
    detuning_span: float,
    t_max: float,
    resolution: tuple[int, int],
    seed: int,
    t2_rabi: float | None = None,
    averages: int = 200,
    noise_gain: float = 1.0,
) -> ChevronMap:
    """Ensemble-averaged Rabi chevron with noise-induced blurring.

    The map covers nominal detunings in [-detuning_span/2, +detuning_span/2]
    and burst times in [0, t_max] on a resolution = (n_detuning, n_time)
    grid.  Each cell averages rabi_probability over `averages` detuning
    offsets drawn from the noise trace (scaled by noise_gain), sampling the
    trace uniformly at random, so the blur reflects the trace's single-point
    distribution.
    """
    n_det, n_time = resolution
    if n_det < 1 or n_time < 2:
        raise ValueError("resolution must be at least (1, 2)")
    if averages < 1:
        raise ValueError("averages must be >= 1")
    if detuning_span < 0 or t_max <= 0:
        raise ValueError("need detuning_span >= 0 and t_max > 0")
    detunings = (
        np.linspace(-detuning_span / 2.0, detuning_span / 2.0, n_det)
        if n_det > 1
        else np.zeros(1)
    )
    times = np.linspace(0.0, t_max, n_time)
    rng = np.random.default_rng(seed)
    values = np.empty((n_det, n_time))
    for i, delta in enumerate(detunings):
        # one bulk draw per detuning row keeps memory bounded
        idx = rng.integers(0, len(noise.samples), size=(n_time, averages))
        offsets = noise_gain * noise.samples[idx]
        p = rabi_probability(rabi_frequency, delta + offsets, times[:, None], t2_rabi)
        values[i] = p.mean(axis=1)
    return ChevronMap(detunings=detunings, times=times, values=values)
