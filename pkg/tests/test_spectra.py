import math

import numpy as np
import pytest

from driftlock.noise import PowerLawSpec
from driftlock.spectra import (
    DecoherencePrediction,
    FitError,
    PsdEstimate,
    SeriesLengthError,
    decoherence_w,
    estimate_psd,
    filter_function,
    fit_diffusion,
    fit_gaussian_decay,
    fit_powerlaw,
    increment_variance,
    predict_t2star,
    sigma_from_t2,
    t2_from_sigma,
    variance_in_band,
)

SET_A = PowerLawSpec(amplitude=2.96e9, exponent=1.34, f_low=1e-4, f_high=1e8)
SET_B = PowerLawSpec(amplitude=1.75e9, exponent=1.17, f_low=1e-4, f_high=1e8)
F0 = 1.0 / 300.0
F1 = 1e5


def test_psd_sine_carries_half_amplitude_squared():
    dt = 1e-3
    n = 4096
    f_tone = 50 * (1.0 / (n * dt))
    t = np.arange(n) * dt
    x = 2.0 * np.sin(2 * np.pi * f_tone * t)
    psd = estimate_psd(x, dt)
    df = psd.freqs[1] - psd.freqs[0]
    assert psd.freqs[np.argmax(psd.power)] == pytest.approx(f_tone)
    assert psd.power.sum() * df == pytest.approx(2.0, rel=0.01)


def test_psd_parseval_exact():
    rng = np.random.default_rng(0)
    x = rng.normal(size=1001)
    psd = estimate_psd(x, dt=2e-4)
    df = psd.freqs[1] - psd.freqs[0]
    assert psd.power.sum() * df == pytest.approx(np.var(x), rel=1e-9)


def test_psd_segment_average_parseval_and_variance_reduction():
    rng = np.random.default_rng(1)
    x = rng.normal(size=4096)
    single = estimate_psd(x, dt=1e-3)
    averaged = estimate_psd(x, dt=1e-3, method="averaged-segments", n_segments=16)
    assert averaged.n_segments == 16
    df = averaged.freqs[1] - averaged.freqs[0]
    segments = x.reshape(16, 256)
    segments = segments - segments.mean(axis=1, keepdims=True)
    mean_var = np.var(segments, axis=1).mean()
    assert averaged.power.sum() * df == pytest.approx(mean_var, rel=1e-9)
    assert (averaged.power.std() / averaged.power.mean()) < 0.5 * (
        single.power.std() / single.power.mean()
    )


def test_psd_input_validation():
    with pytest.raises(ValueError):
        estimate_psd(np.zeros((4, 4)), dt=1e-3)
    with pytest.raises(ValueError):
        estimate_psd(np.zeros(64), dt=0.0)
    with pytest.raises(ValueError):
        estimate_psd(np.zeros(64), dt=1e-3, method="welch-ish")
    with pytest.raises(SeriesLengthError):
        estimate_psd(np.zeros(8), dt=1e-3, method="averaged-segments", n_segments=8)


def test_fit_powerlaw_recovers_exact_law():
    freqs = np.linspace(0.5, 400.0, 1600)
    power = 3.7 * freqs**-1.34
    fit = fit_powerlaw(PsdEstimate(freqs=freqs, power=power, dt=1.0), 1.0, 300.0)
    assert fit.amplitude == pytest.approx(3.7, rel=1e-9)
    assert fit.exponent == pytest.approx(1.34, abs=1e-9)
    assert fit.residual_rms_log10 < 1e-12


def test_fit_powerlaw_band_and_zero_handling():
    freqs = np.linspace(1.0, 100.0, 100)
    power = 2.0 * freqs**-1.0
    power[10:90] = 0.0
    psd = PsdEstimate(freqs=freqs, power=power, dt=1.0)
    fit = fit_powerlaw(psd, 1.0, 100.0)
    assert fit.exponent == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(FitError):
        fit_powerlaw(psd, 12.0, 80.0)
    with pytest.raises(ValueError):
        fit_powerlaw(psd, 10.0, 10.0)


def test_increment_variance_iid():
    rng = np.random.default_rng(2)
    x = rng.normal(0.0, 3.0, size=20000)
    assert increment_variance(x, 1e-3, 5e-3) == pytest.approx(2 * 9.0, rel=0.1)
    with pytest.raises(ValueError):
        increment_variance(x, 1e-3, 2.5e-4)
    with pytest.raises(SeriesLengthError):
        increment_variance(x[:40], 1e-3, 20e-3)


def test_fit_diffusion_random_walk_alpha_one():
    rng = np.random.default_rng(3)
    dt = 1e-2
    step_sigma = 2.0
    walk = np.cumsum(rng.normal(0.0, step_sigma, size=60000))
    intervals = [k * dt for k in (1, 2, 5, 10, 20, 50, 100)]
    fit = fit_diffusion(walk, dt, intervals)
    assert fit.alpha == pytest.approx(1.0, abs=0.1)
    assert fit.d_alpha == pytest.approx(step_sigma**2 / (2 * dt), rel=0.2)


def test_fit_diffusion_stationary_series_is_flat():
    rng = np.random.default_rng(4)
    x = rng.normal(size=60000)
    fit = fit_diffusion(x, 1e-2, [k * 1e-2 for k in (1, 2, 5, 10, 20)])
    assert abs(fit.alpha) <= 0.15


def test_fit_diffusion_validation():
    x = np.arange(1000, dtype=float)
    with pytest.raises(ValueError, match="intervals"):
        fit_diffusion(x, 1.0, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError, match="decade"):
        fit_diffusion(x, 1.0, [1.0, 2.0, 3.0, 5.0])


def test_filter_function_shape():
    t = 2e-6
    assert filter_function(0.0, t) == pytest.approx((2 * np.pi * t) ** 2)
    zeros = filter_function(np.array([1, 2, 3]) / t, t)
    assert np.allclose(zeros, 0.0, atol=1e-20)
    with pytest.raises(ValueError):
        filter_function(1.0, -1e-6)


def test_decoherence_quasistatic_limit_matches_closed_form():
    spec = PowerLawSpec(amplitude=1.0, exponent=0.0, f_low=0.1, f_high=10.0)
    t = 1e-4
    var = variance_in_band(spec, 0.1, 10.0)
    expected = math.exp(-0.5 * t**2 * (2 * np.pi) ** 2 * var)
    assert decoherence_w(t, spec, f0=0.1, f_max=10.0) == pytest.approx(expected, rel=1e-4)


def test_decoherence_w_edges():
    assert decoherence_w(0.0, SET_A) == 1.0
    with pytest.raises(ValueError):
        decoherence_w(-1e-6, SET_A)
    with pytest.raises(TypeError):
        decoherence_w(1e-6, object())


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
def test_decoherence_w_accepts_estimated_spectrum():
    # quad flags roundoff on the piecewise-linear interpolant; harmless here
    freqs = np.logspace(-3, 5, 4000)
    psd = PsdEstimate(freqs=freqs, power=SET_A.psd(freqs), dt=1.0)
    t = 0.9e-6
    w_spec = decoherence_w(t, SET_A, f0=F0, f_max=F1)
    w_est = decoherence_w(t, psd, f0=F0, f_max=F1)
    assert w_est == pytest.approx(w_spec, rel=0.02)


def test_variance_in_band_forms():
    flat = PowerLawSpec(amplitude=2.0, exponent=0.0, f_low=1.0, f_high=100.0)
    assert variance_in_band(flat, 1.0, 100.0) == pytest.approx(198.0)
    one_over_f = PowerLawSpec(amplitude=3.0, exponent=1.0, f_low=1.0, f_high=1000.0)
    assert variance_in_band(one_over_f, 10.0, 1000.0) == pytest.approx(3.0 * math.log(100.0))
    assert variance_in_band(flat, 200.0, 300.0) == 0.0
    zero = PowerLawSpec(amplitude=0.0, exponent=1.0, f_low=1.0, f_high=10.0)
    assert variance_in_band(zero, 1.0, 10.0) == 0.0


def test_sigma_t2_identities():
    assert sigma_from_t2(3.21e-6) == pytest.approx(70.11e3, rel=1e-3)
    assert t2_from_sigma(245.69e3) == pytest.approx(0.916e-6, rel=1e-3)
    assert t2_from_sigma(sigma_from_t2(1.234e-6)) == pytest.approx(1.234e-6, rel=1e-9)
    with pytest.raises(ValueError):
        sigma_from_t2(0.0)
    with pytest.raises(ValueError):
        t2_from_sigma(-1.0)


def test_predict_quasistatic_reference_points():
    pred_a = predict_t2star(SET_A, F0, F1, mode="quasi-static")
    assert pred_a.sigma_static == pytest.approx(245.69e3, rel=0.01)
    assert pred_a.t2_star == pytest.approx(0.916e-6, rel=0.02)
    pred_b = predict_t2star(SET_B, F0, F1, mode="quasi-static")
    assert pred_b.sigma_static == pytest.approx(160.28e3, rel=0.01)
    assert pred_b.t2_star == pytest.approx(1.404e-6, rel=0.02)


def test_predict_full_integral_close_to_quasistatic():
    for spec, frozen in ((SET_A, 0.9156e-6), (SET_B, 1.3980e-6)):
        qs = predict_t2star(spec, F0, F1, mode="quasi-static")
        full = predict_t2star(spec, F0, F1, mode="full-integral")
        assert full.t2_star == pytest.approx(frozen, rel=1e-3)
        assert abs(full.t2_star - qs.t2_star) / qs.t2_star < 0.05


def test_prediction_sigma_t2_invariant():
    for mode in ("quasi-static", "full-integral"):
        pred = predict_t2star(SET_A, F0, F1, mode=mode)
        assert isinstance(pred, DecoherencePrediction)
        assert pred.sigma_static * math.sqrt(2.0) * math.pi * pred.t2_star == pytest.approx(
            1.0, abs=1e-9
        )


def test_predict_returns_none_without_band_power():
    zero = PowerLawSpec(amplitude=0.0, exponent=1.34, f_low=1e-4, f_high=1e8)
    assert predict_t2star(zero, F0, F1) is None
    narrow = PowerLawSpec(amplitude=1.0, exponent=1.0, f_low=1e6, f_high=1e7)
    assert predict_t2star(narrow, 1.0, 100.0) is None
    with pytest.raises(ValueError):
        predict_t2star(SET_A, F1, F0)
    with pytest.raises(ValueError):
        predict_t2star(SET_A, F0, F1, mode="magic")


def test_fit_gaussian_decay_exact_recovery():
    times = np.arange(1, 240) * 25e-9
    truth = 0.5 + 0.45 * np.exp(-((times / 3.21e-6) ** 2)) * np.cos(
        2 * np.pi * 1.93e6 * times + 0.4
    )
    fit = fit_gaussian_decay(times, truth)
    assert fit.t2_star == pytest.approx(3.21e-6, rel=1e-4)
    assert fit.frequency == pytest.approx(1.93e6, rel=1e-4)
    assert fit.phase == pytest.approx(0.4, abs=1e-3)
    assert fit.visibility == pytest.approx(0.45, rel=1e-4)
    assert fit.offset == pytest.approx(0.5, abs=1e-6)


def test_fit_gaussian_decay_with_shot_noise():
    rng = np.random.default_rng(6)
    times = np.arange(1, 200) * 25e-9
    p = 0.5 + 0.4 * np.exp(-((times / 1.0e-6) ** 2)) * np.cos(2 * np.pi * 2e6 * times)
    noisy = p + rng.normal(0.0, 0.02, size=p.shape)
    fit = fit_gaussian_decay(times, noisy)
    assert fit.t2_star == pytest.approx(1.0e-6, rel=0.1)
    assert fit.frequency == pytest.approx(2e6, rel=0.01)


def test_fit_gaussian_decay_normalizes_sign():
    times = np.arange(1, 160) * 25e-9
    p = 0.5 - 0.4 * np.exp(-((times / 1.2e-6) ** 2)) * np.cos(2 * np.pi * 1.5e6 * times)
    fit = fit_gaussian_decay(times, p)
    assert fit.visibility > 0
    assert fit.t2_star > 0
    reconstructed = fit.offset + fit.visibility * np.exp(
        -((times / fit.t2_star) ** 2)
    ) * np.cos(2 * np.pi * fit.frequency * times + fit.phase)
    assert np.allclose(reconstructed, p, atol=1e-6)


def test_fit_gaussian_decay_rejects_flat_and_short():
    times = np.arange(1, 64) * 25e-9
    with pytest.raises(FitError, match="flat"):
        fit_gaussian_decay(times, np.full_like(times, 0.5))
    with pytest.raises(SeriesLengthError):
        fit_gaussian_decay(times[:5], np.sin(times[:5]))
    with pytest.raises(ValueError):
        fit_gaussian_decay(times, times[:-1])
