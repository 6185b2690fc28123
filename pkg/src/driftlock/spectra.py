"""Noise spectroscopy and coherence prediction.

Turns sampled series into one-sided power spectral densities, fits
power laws and anomalous-diffusion exponents, and evaluates the Ramsey
decoherence functional

    W(t) = exp(-(t^2 / 2) (2 pi)^2 integral df S(f) sinc^2(pi f t))

to predict T2*.  In the quasi-static regime (f t << 1) the sinc factor is
1 and the integral collapses to the band variance sigma_static^2, giving
the closed form T2* = 1 / (sqrt(2) pi sigma_static).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize

from .noise import PowerLawSpec


class SeriesLengthError(ValueError):
    """Raised when a series is too short for the requested analysis."""


class FitError(RuntimeError):
    """Raised when a fit cannot converge; carries the best attempt if any."""

    def __init__(self, message, best_so_far=None):
        super().__init__(message)
        self.best_so_far = best_so_far


@dataclass
class PsdEstimate:
    """One-sided spectral density on strictly increasing frequencies."""

    freqs: np.ndarray
    power: np.ndarray
    dt: float
    method: str = "periodogram"
    n_segments: int = 1

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=float)
        self.power = np.asarray(self.power, dtype=float)
        if self.freqs.shape != self.power.shape or self.freqs.ndim != 1:
            raise ValueError("freqs and power must be 1-D arrays of equal length")
        if np.any(np.diff(self.freqs) <= 0):
            raise ValueError("freqs must be strictly increasing")
        if np.any(self.power < 0):
            raise ValueError("power must be >= 0")


@dataclass
class PowerLawFit:
    """Least-squares fit of log S = log A - beta log f over a band."""

    amplitude: float
    exponent: float
    f_lo: float
    f_hi: float
    residual_rms_log10: float


@dataclass
class DiffusionFit:
    """Anomalous diffusion law sigma^2(T) = 2 D_alpha T^alpha."""

    alpha: float
    d_alpha: float
    intervals: np.ndarray
    variances: np.ndarray


@dataclass
class DecoherencePrediction:
    """Predicted coherence: T2*, the matching quasi-static sigma, and band.

    sigma_static always equals 1 / (sqrt(2) pi t2_star); in full-integral
    mode that is the effective quasi-static width reproducing the solved
    T2*, not the bare band variance.
    """

    t2_star: float
    sigma_static: float
    f0: float
    f1: float
    mode: str


@dataclass
class GaussianDecayFit:
    """Damped-cosine fit c + v exp(-(t/t2)^2) cos(2 pi f t + phi)."""

    t2_star: float
    frequency: float
    phase: float
    visibility: float
    offset: float
    residual_rms: float


def estimate_psd(series, dt: float, method: str = "periodogram", n_segments: int = 1) -> PsdEstimate:
    """One-sided PSD of a uniformly sampled series.

    method 'periodogram' uses the whole series; 'averaged-segments' splits
    it into n_segments equal chunks (remainder dropped) and averages their
    periodograms, trading resolution for variance.  The mean is removed
    per segment, the zero-frequency bin is dropped and the Nyquist bin
    (even lengths) halved, so that sum(power) * df equals the mean
    per-segment variance exactly.
    """
    series = np.asarray(series, dtype=float)
    if series.ndim != 1:
        raise ValueError("series must be 1-D")
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if method == "periodogram":
        n_segments = 1
    elif method == "averaged-segments":
        if n_segments < 1:
            raise ValueError("n_segments must be >= 1")
    else:
        raise ValueError(f"unknown method {method!r}")
    seg_len = len(series) // n_segments
    if seg_len < 2:
        raise SeriesLengthError(
            f"series of {len(series)} samples is too short for {n_segments} segments"
        )
    segments = series[: seg_len * n_segments].reshape(n_segments, seg_len)
    segments = segments - segments.mean(axis=1, keepdims=True)
    spectrum = np.fft.rfft(segments, axis=1)
    power = (2.0 * dt / seg_len) * np.abs(spectrum) ** 2
    if seg_len % 2 == 0:
        power[:, -1] /= 2.0
    freqs = np.fft.rfftfreq(seg_len, dt)
    return PsdEstimate(
        freqs=freqs[1:],
        power=power.mean(axis=0)[1:],
        dt=dt,
        method=method,
        n_segments=n_segments,
    )


def fit_powerlaw(psd: PsdEstimate, f_lo: float, f_hi: float) -> PowerLawFit:
    """Fit S(f) = A f^-beta on [f_lo, f_hi] by least squares in log10.

    Zero-power bins are excluded; fewer than 5 usable bins is an error.
    Note that log-fitting a single unaveraged periodogram biases A low;
    average segments (or seeds) first when the amplitude matters.
    """
    if not 0 < f_lo < f_hi:
        raise ValueError("need 0 < f_lo < f_hi")
    mask = (psd.freqs >= f_lo) & (psd.freqs <= f_hi) & (psd.power > 0)
    if int(mask.sum()) < 5:
        raise FitError(f"only {int(mask.sum())} usable bins in [{f_lo}, {f_hi}] Hz; need >= 5")
    log_f = np.log10(psd.freqs[mask])
    log_p = np.log10(psd.power[mask])
    slope, intercept = np.polyfit(log_f, log_p, 1)
    residuals = log_p - (slope * log_f + intercept)
    return PowerLawFit(
        amplitude=float(10.0**intercept),
        exponent=float(-slope),
        f_lo=f_lo,
        f_hi=f_hi,
        residual_rms_log10=float(np.sqrt(np.mean(residuals**2))),
    )


def increment_variance(series, dt: float, interval: float) -> float:
    """Variance of overlapping increments x(t + T) - x(t) at lag T.

    interval must be an integer multiple of dt and leave at least 30
    increments in the series.
    """
    series = np.asarray(series, dtype=float)
    if dt <= 0 or interval <= 0:
        raise ValueError("dt and interval must be > 0")
    lag = interval / dt
    lag_int = int(round(lag))
    if lag_int < 1 or abs(lag - lag_int) > 1e-9 * max(lag, 1.0):
        raise ValueError(f"interval {interval} s is not a multiple of dt {dt} s")
    n_increments = len(series) - lag_int
    if n_increments < 30:
        raise SeriesLengthError(
            f"only {n_increments} increments at lag {interval} s; need >= 30"
        )
    increments = series[lag_int:] - series[:-lag_int]
    return float(np.var(increments))


def fit_diffusion(series, dt: float, intervals) -> DiffusionFit:
    """Fit sigma^2(T) = 2 D_alpha T^alpha over a set of lags.

    Needs at least 4 intervals spanning at least one decade.  alpha is the
    log-log slope; pure random walks give alpha = 1, stationary
    uncorrelated series alpha = 0, and slow power-law noise lands in
    between (sub-diffusive).
    """
    intervals = np.asarray(sorted(float(iv) for iv in intervals))
    if len(intervals) < 4:
        raise ValueError(f"need >= 4 intervals, got {len(intervals)}")
    if intervals[-1] < 10.0 * intervals[0] * (1 - 1e-9):
        raise ValueError(
            f"intervals must span >= one decade, got [{intervals[0]}, {intervals[-1]}] s"
        )
    variances = np.array([increment_variance(series, dt, iv) for iv in intervals])
    if np.any(variances <= 0):
        raise FitError("non-positive increment variance; cannot log-fit")
    slope, intercept = np.polyfit(np.log(intervals), np.log(variances), 1)
    return DiffusionFit(
        alpha=float(slope),
        d_alpha=float(math.exp(intercept) / 2.0),
        intervals=intervals,
        variances=variances,
    )


def filter_function(f, t: float) -> np.ndarray:
    """Ramsey filter (2 pi t)^2 sinc^2(pi f t); value (2 pi t)^2 at f = 0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    f = np.asarray(f, dtype=float)
    return (2.0 * math.pi * t) ** 2 * np.sinc(f * t) ** 2


def _psd_callable(spectrum):
    if isinstance(spectrum, PowerLawSpec):
        return spectrum.psd, spectrum.f_low, spectrum.f_high
    if isinstance(spectrum, PsdEstimate):
        def interp(f):
            f = np.asarray(f, dtype=float)
            return np.interp(f, spectrum.freqs, spectrum.power, left=0.0, right=0.0)

        return interp, float(spectrum.freqs[0]), float(spectrum.freqs[-1])
    raise TypeError(f"unsupported spectrum type {type(spectrum).__name__}")


def _chi_integral(s_func, t: float, f_lo: float, f_hi: float) -> float:
    """integral_{f_lo}^{f_hi} S(f) sinc^2(pi f t) df with lobe-aware panels.

    Below the first sinc zero at 1/t the integrand can span many decades,
    so panels follow log-spaced decade points; above it each sinc lobe
    gets its own panel, which keeps adaptive quadrature honest.
    """
    if f_lo >= f_hi:
        return 0.0
    points = [f_lo]
    first_zero = 1.0 / t if t > 0 else math.inf
    f = f_lo * 10.0
    while f < min(first_zero, f_hi):
        points.append(f)
        f *= 10.0
    if f_hi > first_zero:
        n_lobes = int(math.ceil((f_hi - first_zero) * t))
        stride = max(1, -(-n_lobes // 2000))  # cap the panel count for very long bands
        k = 1
        zero = first_zero
        while zero < f_hi:
            if zero > points[-1]:
                points.append(zero)
            k += stride
            zero = k / t
    points.append(f_hi)

    def integrand(freq):
        return s_func(np.array([freq]))[0] * np.sinc(freq * t) ** 2

    total = 0.0
    for a, b in zip(points[:-1], points[1:]):
        if b <= a:
            continue
        value, _ = integrate.quad(integrand, a, b, limit=200)
        total += value
    return total


def decoherence_w(t: float, spectrum, f0: float | None = None, f_max: float | None = None) -> float:
    """Coherence W(t) = exp(-(t^2/2) (2 pi)^2 integral S(f) sinc^2(pi f t) df).

    spectrum is a PowerLawSpec or PsdEstimate; the integration band is the
    overlap of [f0, f_max] with the spectrum's own support.  f_max defaults
    to 50 / t, far beyond the filter's 1/t roll-off (the underlying model
    integrates to infinity; the tail beyond 50/t is negligible).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return 1.0
    s_func, s_lo, s_hi = _psd_callable(spectrum)
    lo = s_lo if f0 is None else max(f0, s_lo)
    hi = min(50.0 / t if f_max is None else f_max, s_hi)
    chi = _chi_integral(s_func, t, lo, hi)
    return math.exp(-0.5 * t**2 * (2.0 * math.pi) ** 2 * chi)


def variance_in_band(spec: PowerLawSpec, f0: float, f1: float) -> float:
    """Closed-form band variance A integral_{f0}^{f1} f^-beta df.

    The band is intersected with the spec's own support; beta = 1 uses the
    logarithmic form.
    """
    lo = max(f0, spec.f_low)
    hi = min(f1, spec.f_high)
    if lo >= hi or spec.amplitude == 0.0:
        return 0.0
    if math.isclose(spec.exponent, 1.0, abs_tol=1e-12):
        return spec.amplitude * math.log(hi / lo)
    power = 1.0 - spec.exponent
    return spec.amplitude * (hi**power - lo**power) / power


def sigma_from_t2(t2_star: float) -> float:
    """Quasi-static noise width matching a Gaussian T2*: sigma = 1/(sqrt2 pi T2*)."""
    if t2_star <= 0:
        raise ValueError("t2_star must be > 0")
    return 1.0 / (math.sqrt(2.0) * math.pi * t2_star)


def t2_from_sigma(sigma: float) -> float:
    """Inverse of sigma_from_t2."""
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    return 1.0 / (math.sqrt(2.0) * math.pi * sigma)


def predict_t2star(spec: PowerLawSpec, f0: float, f1: float, mode: str = "quasi-static"):
    """Predict T2* from a power-law spectrum over the band [f0, f1].

    quasi-static mode evaluates the closed-form band variance and the
    identity T2* = 1/(sqrt2 pi sigma).  full-integral mode solves
    W(t) = 1/e on decoherence_w by bracketed root finding, integrating
    beyond f1 up to the 50/t default so the sinc tail is included.
    Returns None when the spectrum carries no power in the band.
    """
    if mode not in ("quasi-static", "full-integral"):
        raise ValueError(f"unknown mode {mode!r}")
    if not 0 < f0 < f1:
        raise ValueError("need 0 < f0 < f1")
    var = variance_in_band(spec, f0, f1)
    if var <= 0.0:
        return None
    sigma_qs = math.sqrt(var)
    t2_qs = t2_from_sigma(sigma_qs)
    if mode == "quasi-static":
        return DecoherencePrediction(
            t2_star=t2_qs, sigma_static=sigma_qs, f0=f0, f1=f1, mode=mode
        )

    def excess(t):
        w = decoherence_w(t, spec, f0=f0, f_max=max(f1, 50.0 / t))
        return -math.log(max(w, 1e-300)) - 1.0

    # expand a bracket around the quasi-static guess; the full solution can
    # sit on either side because the integral also covers the sinc tail
    # beyond f1
    t_lo = t_hi = t2_qs
    if excess(t2_qs) > 0.0:
        for _ in range(200):
            t_lo /= 2.0
            if excess(t_lo) <= 0.0:
                break
            t_hi = t_lo
        else:
            raise FitError("decoherence root bracket not found", best_so_far=t_lo)
    else:
        for _ in range(200):
            t_hi *= 2.0
            if excess(t_hi) > 0.0:
                break
            t_lo = t_hi
        else:
            raise FitError("decoherence root bracket not found", best_so_far=t_hi)
    t2_full = optimize.brentq(excess, t_lo, t_hi, rtol=1e-12)
    return DecoherencePrediction(
        t2_star=float(t2_full),
        sigma_static=sigma_from_t2(float(t2_full)),
        f0=f0,
        f1=f1,
        mode=mode,
    )


def fit_gaussian_decay(times, probabilities) -> GaussianDecayFit:
    """Fit p(t) = c + v exp(-(t/T2)^2) cos(2 pi f t + phi).

    The oscillation frequency seed comes from the dominant FFT bin; a
    small grid of frequency and phase restarts guards against the fit
    locking onto a harmonic.  A flat curve (no resolvable oscillation)
    raises FitError, as does non-convergence of every restart, in which
    case the best parameter set seen rides along on the exception.
    """
    times = np.asarray(times, dtype=float)
    probabilities = np.asarray(probabilities, dtype=float)
    if times.shape != probabilities.shape or times.ndim != 1:
        raise ValueError("times and probabilities must be 1-D and matched")
    if len(times) < 8:
        raise SeriesLengthError(f"need >= 8 points to fit, got {len(times)}")
    if float(np.ptp(probabilities)) < 1e-12:
        raise FitError("no oscillation: curve is flat")
    dt = float(np.mean(np.diff(times)))
    centred = probabilities - probabilities.mean()
    spectrum = np.abs(np.fft.rfft(centred))
    freqs = np.fft.rfftfreq(len(times), dt)
    peak = int(np.argmax(spectrum[1:])) + 1
    f_seed = float(freqs[peak])
    if f_seed <= 0:
        f_seed = 1.0 / (times[-1] - times[0])
    v_seed = float(np.ptp(probabilities)) / 2.0
    t2_seed = float(times[-1] - times[0]) / 2.0

    def model(t, c, v, t2, f, phi):
        return c + v * np.exp(-((t / t2) ** 2)) * np.cos(2.0 * math.pi * f * t + phi)

    best = None
    best_rms = math.inf
    for f_try in (f_seed, 0.5 * f_seed, 2.0 * f_seed):
        for phi_try in (0.0, math.pi / 2.0):
            p0 = [float(probabilities.mean()), v_seed, t2_seed, f_try, phi_try]
            try:
                popt, _ = optimize.curve_fit(
                    model, times, probabilities, p0=p0, maxfev=20000
                )
            except RuntimeError:
                continue
            rms = float(np.sqrt(np.mean((model(times, *popt) - probabilities) ** 2)))
            if rms < best_rms:
                best_rms = rms
                best = popt
    if best is None:
        raise FitError("damped-cosine fit did not converge", best_so_far=None)
    c, v, t2, f, phi = (float(x) for x in best)
    if f < 0:
        # cos is even; fold the sign into the phase
        f, phi = -f, -phi
    if v < 0:
        v, phi = -v, phi + math.pi
    phi = math.remainder(phi, 2.0 * math.pi)
    fit = GaussianDecayFit(
        t2_star=abs(t2),
        frequency=f,
        phase=phi,
        visibility=v,
        offset=c,
        residual_rms=best_rms,
    )
    if v < 1e-9:
        raise FitError("no oscillation: fitted visibility is zero", best_so_far=fit)
    return fit
