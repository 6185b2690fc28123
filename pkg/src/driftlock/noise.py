"""Frequency-noise synthesis.

Generates discrete-time detuning traces delta_f(t) from parametric noise
models: power-law spectra S(f) = A f^-beta realised by spectral shaping of
white Gaussian noise, random telegraph processes, charge-displacement noise
mapped through a magnetic-field gradient, and a gate-voltage dependent
backaction gain.  Traces compose additively and are deterministic given
their integer seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np


class NoiseConfigError(ValueError):
    """Raised for physically invalid noise-model parameters."""


class CompositionError(ValueError):
    """Raised when traces with mismatched sampling are combined."""


@dataclass
class PowerLawSpec:
    """Power-law spectral density S(f) = amplitude * f**-exponent on a band.

    Parameters
    ----------
    amplitude : float
        Spectral amplitude A in Hz^2/Hz (value of S at 1 Hz).
    exponent : float
        Spectral exponent beta, in [0, 3].
    f_low, f_high : float
        Band edges in Hz; S is treated as zero outside [f_low, f_high].
    """

    amplitude: float
    exponent: float
    f_low: float
    f_high: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise NoiseConfigError(f"amplitude must be >= 0, got {self.amplitude}")
        if not 0.0 <= self.exponent <= 3.0:
            raise NoiseConfigError(f"exponent must be in [0, 3], got {self.exponent}")
        if not 0.0 < self.f_low < self.f_high:
            raise NoiseConfigError(
                f"band edges must satisfy 0 < f_low < f_high, got [{self.f_low}, {self.f_high}]"
            )

    def psd(self, freqs: np.ndarray) -> np.ndarray:
        """Evaluate S(f) on an array of frequencies, zero outside the band."""
        freqs = np.asarray(freqs, dtype=float)
        out = np.zeros_like(freqs)
        mask = (freqs >= self.f_low) & (freqs <= self.f_high)
        out[mask] = self.amplitude * freqs[mask] ** (-self.exponent)
        return out


@dataclass
class TelegraphSpec:
    """Random telegraph process jumping between +amplitude and -amplitude.

    switching_rate is the rate gamma of each direction's Poisson switching,
    so dwell times are exponential with mean 1/gamma and the autocovariance
    is amplitude^2 * exp(-2 gamma tau).
    """

    amplitude: float
    switching_rate: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise NoiseConfigError(f"amplitude must be >= 0, got {self.amplitude}")
        if self.switching_rate <= 0:
            raise NoiseConfigError(f"switching_rate must be > 0, got {self.switching_rate}")


@dataclass
class TransductionSpec:
    """Conversion from charge displacement to qubit frequency.

    gradient is the magnetic field gradient in mT/nm, gyromagnetic_ratio in
    MHz/mT; a displacement trace in nm maps to frequency in Hz.
    """

    gradient: float
    gyromagnetic_ratio: float

    def __post_init__(self):
        if self.gradient < 0:
            raise NoiseConfigError(f"gradient must be >= 0, got {self.gradient}")
        if self.gyromagnetic_ratio <= 0:
            raise NoiseConfigError(
                f"gyromagnetic_ratio must be > 0, got {self.gyromagnetic_ratio}"
            )


@dataclass
class BackactionModel:
    """Gate-voltage dependence of measurement-induced noise gain.

    gain(epsilon) = peak_gain * (1 + cos(2 pi (epsilon - phase_mv) / period_mv)) / 2

    so the gain peaks at epsilon = phase_mv and vanishes half a period away.
    """

    peak_gain: float
    period_mv: float = 12.0
    phase_mv: float = 0.0

    def __post_init__(self):
        if self.peak_gain < 0:
            raise NoiseConfigError(f"peak_gain must be >= 0, got {self.peak_gain}")
        if self.period_mv <= 0:
            raise NoiseConfigError(f"period_mv must be > 0, got {self.period_mv}")


@dataclass
class NoiseTrace:
    """A sampled detuning trace.

    samples holds delta_f values in Hz on a uniform grid with spacing dt
    seconds; seed records the RNG seed the trace was generated from and
    descriptor is a human-readable summary of its provenance.
    """

    dt: float
    samples: np.ndarray
    seed: int
    descriptor: str = ""

    def __post_init__(self):
        if self.dt <= 0:
            raise NoiseConfigError(f"dt must be > 0, got {self.dt}")
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.ndim != 1:
            raise NoiseConfigError("samples must be one dimensional")

    @property
    def duration(self) -> float:
        return len(self.samples) * self.dt

    def value_at(self, t) -> np.ndarray:
        """Sample-and-hold value(s) at time(s) t in [0, duration).

        A small relative guard absorbs float rounding at sample boundaries.
        """
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t >= self.duration):
            raise TraceDurationError(
                f"requested time outside trace: need t in [0, {self.duration}) s"
            )
        idx = np.floor(t / self.dt + 1e-6).astype(int)
        idx = np.minimum(idx, len(self.samples) - 1)
        return self.samples[idx]


class TraceDurationError(ValueError):
    """Raised when a simulation requires more trace than was synthesised."""


def synthesize_powerlaw(spec: PowerLawSpec, duration: float, dt: float, seed: int) -> NoiseTrace:
    """Synthesise a Gaussian trace with one-sided PSD S(f) = A f^-beta.

    Independent complex Gaussian Fourier coefficients are drawn for the
    positive-frequency bins with variance matched to the target density,
    E|X_j|^2 = S(f_j) N / (2 dt); the Nyquist bin (even N) is real with
    E|X|^2 = S N / dt and the DC bin is zero, so the trace is mean-free
    by construction.  Bins outside [max(f_low, 1/duration),
    min(f_high, 1/(2 dt))] carry no power; an empty intersection is a
    configuration error.

    Returns a NoiseTrace of round(duration / dt) samples.
    """
    if duration <= 0 or dt <= 0:
        raise NoiseConfigError("duration and dt must be > 0")
    n = int(round(duration / dt))
    if n < 2:
        raise NoiseConfigError(f"duration {duration} s spans fewer than 2 samples at dt {dt} s")
    lo = max(spec.f_low, 1.0 / duration)
    hi = min(spec.f_high, 0.5 / dt)
    if lo > hi:
        raise NoiseConfigError(
            f"requested band [{spec.f_low}, {spec.f_high}] Hz does not intersect the "
            f"resolvable band [{1.0 / duration}, {0.5 / dt}] Hz"
        )
    descriptor = f"powerlaw(A={spec.amplitude!r},beta={spec.exponent!r})"
    rng = np.random.default_rng(seed)
    freqs = np.fft.rfftfreq(n, dt)
    psd = np.zeros_like(freqs)
    band = (freqs >= lo) & (freqs <= hi)
    band[0] = False
    psd[band] = spec.amplitude * freqs[band] ** (-spec.exponent)
    sigma = np.sqrt(psd * n / (2.0 * dt))
    spectrum = sigma * (
        rng.standard_normal(len(freqs)) + 1j * rng.standard_normal(len(freqs))
    ) / math.sqrt(2.0)
    if n % 2 == 0:
        # real Nyquist coefficient carries the full bin variance
        spectrum[-1] = math.sqrt(psd[-1] * n / dt) * rng.standard_normal()
    spectrum[0] = 0.0
    samples = np.fft.irfft(spectrum, n=n)
    return NoiseTrace(dt=dt, samples=samples, seed=seed, descriptor=descriptor)


def synthesize_telegraph(spec: TelegraphSpec, duration: float, dt: float, seed: int) -> NoiseTrace:
    """Synthesise a random telegraph trace with exponential dwell times."""
    if duration <= 0 or dt <= 0:
        raise NoiseConfigError("duration and dt must be > 0")
    n = int(round(duration / dt))
    if n < 1:
        raise NoiseConfigError("duration spans no samples")
    rng = np.random.default_rng(seed)
    state = 1.0 if rng.random() < 0.5 else -1.0
    samples = np.empty(n)
    if spec.amplitude == 0.0:
        samples[:] = 0.0
        return NoiseTrace(dt=dt, samples=samples, seed=seed, descriptor="telegraph(a=0)")
    t_next = rng.exponential(1.0 / spec.switching_rate)
    i = 0
    while i < n:
        # fill until the next switching event
        j = min(n, int(math.floor(t_next / dt)) + 1)
        if j <= i:
            j = i + 1
        samples[i:j] = state
        state = -state
        t_next += rng.exponential(1.0 / spec.switching_rate)
        i = j
    samples *= spec.amplitude
    descriptor = f"telegraph(a={spec.amplitude!r},gamma={spec.switching_rate!r})"
    return NoiseTrace(dt=dt, samples=samples, seed=seed, descriptor=descriptor)


def transduce(displacement: NoiseTrace, spec: TransductionSpec) -> NoiseTrace:
    """Map a displacement trace (nm) to a frequency trace (Hz).

    Each sample is scaled by gradient (mT/nm) times gyromagnetic_ratio
    (MHz/mT), resolved to Hz; dt, seed and descriptor are preserved.
    """
    factor = spec.gradient * spec.gyromagnetic_ratio * 1e6
    return replace(displacement, samples=displacement.samples * factor)


def backaction_gain(model: BackactionModel, epsilon_mv: float) -> float:
    """Noise gain at gate voltage epsilon_mv; in [0, peak_gain], periodic."""
    phase = 2.0 * math.pi * (epsilon_mv - model.phase_mv) / model.period_mv
    return model.peak_gain * (1.0 + math.cos(phase)) / 2.0


def scale(trace: NoiseTrace, factor: float) -> NoiseTrace:
    """Pointwise scaling of a trace, preserving sampling and provenance."""
    return replace(trace, samples=trace.samples * factor)


def compose(traces: list[NoiseTrace]) -> NoiseTrace:
    """Sum independent traces sample-wise.

    All traces must share dt and length; the result keeps the first trace's
    seed and joins the descriptors with '+'.
    """
    if not traces:
        raise CompositionError("compose requires at least one trace")
    first = traces[0]
    total = np.zeros_like(first.samples)
    for tr in traces:
        if not math.isclose(tr.dt, first.dt, rel_tol=1e-12):
            raise CompositionError(f"dt mismatch: {tr.dt} vs {first.dt}")
        if len(tr.samples) != len(first.samples):
            raise CompositionError(
                f"length mismatch: {len(tr.samples)} vs {len(first.samples)}"
            )
        total = total + tr.samples
    descriptor = "+".join(tr.descriptor or "trace" for tr in traces)
    return NoiseTrace(dt=first.dt, samples=total, seed=first.seed, descriptor=descriptor)
