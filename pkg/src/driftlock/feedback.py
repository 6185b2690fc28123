"""Closed-loop frequency locking.

Alternates probe and operate phases against a simulated laboratory clock.
A probe phase acquires n_shots Ramsey single shots with linearly ramped
evolution times, feeds them to the Bayesian estimator and, in closed-loop
mode, retunes the microwave source so the estimated detuning returns to
the target.  Open-loop mode runs the identical schedule without applying
corrections, which gives matched-noise comparisons.  The operate phase is
dead time padding each cycle to a fixed period.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .estimator import (
    DegeneratePosteriorError,
    EstimationSession,
    LikelihoodParams,
    PosteriorGrid,
)
from .noise import NoiseTrace, TraceDurationError
from .qubit import QubitParams, ShotRecord, ShotTiming, sample_shot, ramsey_probability


@dataclass
class Clock:
    """Simulated laboratory time in seconds; only ever advances."""

    time: float = 0.0

    def advance(self, dt: float):
        if dt < 0:
            raise ValueError("clock cannot run backwards")
        self.time += dt


@dataclass
class FeedbackConfig:
    """Probe schedule, loop mode and cycle budget.

    Evolution times ramp as t_k = (k + 1) * t_step for k < n_shots.  Each
    cycle spends n_shots * timing.shot_period plus timing.calculation in
    the probe and pads with dead time up to cycle_period.  f_target is the
    detuning the loop locks to; mode 'open' estimates without correcting.
    passive_gain scales the injected noise trace (models gate-voltage
    dependent backaction; build the gain with noise.backaction_gain).
    """

    n_shots: int = 100
    t_step: float = 40e-9
    timing: ShotTiming = field(default_factory=ShotTiming)
    f_target: float = 2e6
    mode: str = "closed"
    n_cycles: int = 1
    cycle_period: float = 24e-3
    passive_gain: float = 1.0
    record_shots: bool = False
    prior_sigma: float = 50e3
    f_min: float = 0.0
    f_max: float = 12.5e6
    n_bins: int = 2500

    def __post_init__(self):
        if self.mode not in ("open", "closed"):
            raise ValueError(f"mode must be 'open' or 'closed', got {self.mode!r}")
        if self.n_shots < 1 or self.n_cycles < 1:
            raise ValueError("n_shots and n_cycles must be >= 1")
        if self.t_step <= 0:
            raise ValueError("t_step must be > 0")
        if self.cycle_period < self.probe_duration:
            raise ValueError(
                f"cycle_period {self.cycle_period} s is shorter than the probe "
                f"phase ({self.probe_duration} s)"
            )

    @property
    def evolution_times(self) -> np.ndarray:
        return (np.arange(self.n_shots) + 1) * self.t_step

    @property
    def probe_duration(self) -> float:
        return self.n_shots * self.timing.shot_period + self.timing.calculation


@dataclass
class CycleLog:
    """Everything the loop knew about one probe/operate cycle."""

    cycle_index: int
    start_time: float
    f_est: float
    correction_applied: float
    true_mean_detuning: float
    shots: list[ShotRecord] = field(default_factory=list)
    degenerate: bool = False


@dataclass
class ExperimentResult:
    """Cycle logs plus the loop state needed to interpret them."""

    cycles: list[CycleLog]
    config: FeedbackConfig
    final_correction: float
    mean_update_seconds: float


def apply_correction(f_mw_offset: float, f_est: float, f_target: float) -> float:
    """Retune the source: shift the microwave offset by the estimated error.

    Returns the new offset f_mw_offset + (f_est - f_target); with the
    qubit detuning defined relative to the source, a perfect estimate
    brings the next cycle's detuning back to f_target.
    """
    return f_mw_offset + (f_est - f_target)


def run_probe(
    noise: NoiseTrace,
    params: QubitParams,
    session: EstimationSession,
    cfg: FeedbackConfig,
    clock: Clock,
    rng: np.random.Generator,
    f_mw_offset: float = 0.0,
) -> tuple[float, list[ShotRecord], PosteriorGrid | None, np.ndarray, bool]:
    """Acquire one probe phase and estimate the detuning.

    Each shot reads the noise trace at its start timestamp; the physical
    detuning is f_target + passive_gain * noise - f_mw_offset.  The clock
    advances by the full probe duration including the calculation slot.
    Returns (f_est, shots, posterior, per-shot true detunings, degenerate);
    a degenerate posterior yields f_est = nan and resets the session.
    """
    times = cfg.evolution_times
    shot_starts = clock.time + np.arange(cfg.n_shots) * cfg.timing.shot_period
    end_needed = shot_starts[-1]
    if end_needed >= noise.duration:
        raise TraceDurationError(
            f"probe at t={clock.time!r} s needs the trace up to {end_needed!r} s "
            f"but it ends at {noise.duration!r} s"
        )
    detunings = cfg.f_target + cfg.passive_gain * noise.value_at(shot_starts) - f_mw_offset
    p_down = ramsey_probability(params, detunings, times)
    outcomes = sample_shot(rng, p_down)
    shots = [
        ShotRecord(
            timestamp=float(shot_starts[k]),
            evolution_time=float(times[k]),
            outcome=int(outcomes[k]),
            mw_detuning=f_mw_offset,
        )
        for k in range(cfg.n_shots)
    ]
    degenerate = False
    posterior = None
    try:
        f_est, posterior = session.estimate_cycle(outcomes)
    except DegeneratePosteriorError:
        f_est = math.nan
        degenerate = True
        session.reset()
    clock.advance(cfg.probe_duration)
    return f_est, shots, posterior, detunings, degenerate


def run_experiment(
    cfg: FeedbackConfig,
    noise: NoiseTrace,
    params: QubitParams,
    seed: int,
) -> ExperimentResult:
    """Run n_cycles probe/operate cycles against one noise trace.

    The estimator models the reported fringe (readout infidelity folded
    in).  Closed-loop mode applies apply_correction after every
    non-degenerate estimate; degenerate cycles skip the correction and
    are flagged.  The trace must cover n_cycles * cycle_period.
    """
    needed = cfg.n_cycles * cfg.cycle_period
    if noise.duration < needed * (1 - 1e-12):
        raise TraceDurationError(
            f"{cfg.n_cycles} cycles of {cfg.cycle_period} s need {needed!r} s of "
            f"noise but the trace holds {noise.duration!r} s"
        )
    alpha_eff, beta_eff = params.effective_fringe()
    session = EstimationSession(
        likelihood=LikelihoodParams(alpha=alpha_eff, beta=beta_eff, theta=params.theta),
        evolution_times=cfg.evolution_times,
        f_min=cfg.f_min,
        f_max=cfg.f_max,
        n_bins=cfg.n_bins,
        prior_sigma=cfg.prior_sigma,
    )
    rng = np.random.default_rng(seed)
    clock = Clock()
    f_mw_offset = 0.0
    cycles: list[CycleLog] = []
    for index in range(cfg.n_cycles):
        start = clock.time
        f_est, shots, _, detunings, degenerate = run_probe(
            noise, params, session, cfg, clock, rng, f_mw_offset
        )
        correction = 0.0
        if cfg.mode == "closed" and not degenerate:
            new_offset = apply_correction(f_mw_offset, f_est, cfg.f_target)
            correction = new_offset - f_mw_offset
            f_mw_offset = new_offset
        cycles.append(
            CycleLog(
                cycle_index=index,
                start_time=start,
                f_est=f_est,
                correction_applied=correction,
                true_mean_detuning=float(np.mean(detunings)),
                shots=shots if cfg.record_shots else [],
                degenerate=degenerate,
            )
        )
        clock.advance(cfg.cycle_period - cfg.probe_duration)
    mean_update = (
        float(np.mean(session.update_seconds)) if session.update_seconds else 0.0
    )
    return ExperimentResult(
        cycles=cycles,
        config=cfg,
        final_correction=f_mw_offset,
        mean_update_seconds=mean_update,
    )
