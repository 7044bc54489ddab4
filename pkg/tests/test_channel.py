import json
import math

import numpy as np
import pytest
from scipy import signal as sps

from chiplink.channel import (ChannelConfig, ClipStage, DriftStage, EqStage,
                              GainStage, MelAugConfig, NoiseStage, ReverbStage,
                              RngState, add_noise, apply_channel,
                              apply_channel_with_draws, brown_noise, clip, gain,
                              mel_augment, parametric_eq, pink_noise,
                              resample_drift, reverb, white_noise)
from chiplink.dsp import MelSpectrogram, mel_spectrogram
from chiplink.synth import Waveform, synth_message

SR = 16000


def measured_snr_db(clean, noisy):
    noise = noisy - clean
    return 10 * np.log10(np.mean(clean ** 2) / np.mean(noise ** 2))


def psd_slope_db_per_decade(x, lo=100.0, hi=4000.0):
    f, p = sps.welch(x, fs=SR, nperseg=4096)
    band = (f >= lo) & (f <= hi)
    lf = np.log10(f[band])
    lp = 10 * np.log10(p[band])
    design = np.vstack([lf, np.ones_like(lf)]).T
    slope, _ = np.linalg.lstsq(design, lp, rcond=None)[0]
    return slope


# -- noise ---------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["white", "pink", "brown", "mixed"])
def test_snr_calibration(kind):
    w = synth_message([3, 30, 90, 120])
    for snr in (-5.0, 0.0, 10.0):
        noisy = add_noise(w, kind, snr, RngState.from_seed(99))
        assert measured_snr_db(w.samples, noisy.samples) == pytest.approx(snr, abs=0.5)


def test_noise_rejects_silence():
    with pytest.raises(ValueError, match="silence"):
        add_noise(Waveform(np.zeros(1000)), "white", 0.0, RngState.from_seed(0))


def test_infinite_snr_is_identity():
    w = synth_message([1])
    out = add_noise(w, "white", math.inf, RngState.from_seed(0))
    np.testing.assert_array_equal(out.samples, w.samples)


def test_psd_slopes():
    n = 1 << 17
    assert psd_slope_db_per_decade(
        white_noise(n, RngState.from_seed(1))) == pytest.approx(0.0, abs=2.0)
    assert psd_slope_db_per_decade(
        pink_noise(n, RngState.from_seed(2))) == pytest.approx(-10.0, abs=2.0)
    assert psd_slope_db_per_decade(
        brown_noise(n, RngState.from_seed(3))) == pytest.approx(-20.0, abs=2.0)


def test_unknown_noise_kind():
    w = synth_message([1])
    with pytest.raises(ValueError, match="unknown noise kind"):
        add_noise(w, "violet", 0.0, RngState.from_seed(0))


# -- reverb ---------------------------------------------------------------------

def test_reverb_impulse_response():
    impulse = Waveform(np.zeros(100))
    impulse.samples[0] = 1.0
    out = reverb(impulse, tau=0.4, delay_ms=20.0)
    delay = 320
    # taps tau^k for k = 0..5; 0.4^5 ~ 0.0102 >= 0.01, 0.4^6 < 0.01
    assert len(out.samples) == 100 + 5 * delay
    taps = out.samples[0:5 * delay + 1:delay]
    np.testing.assert_allclose(taps, [0.4 ** k for k in range(6)])


def test_reverb_tau_limit_single_tap():
    w = synth_message([7])
    out = reverb(w, tau=0.009, delay_ms=20.0)
    np.testing.assert_allclose(out.samples, w.samples)


def test_reverb_adds_energy():
    w = synth_message([5, 6])
    out = reverb(w, 0.4, 20.0)
    assert np.sum(out.samples ** 2) >= np.sum(w.samples ** 2)


def test_reverb_rejects_bad_tau():
    with pytest.raises(ValueError):
        reverb(synth_message([1]), tau=1.0)


# -- clip ------------------------------------------------------------------------

def test_hard_clip_values():
    w = Waveform(np.array([0.8, 0.0, -0.9]))
    out = clip(w, "hard", 0.5)
    np.testing.assert_array_equal(out.samples, [0.5, 0.0, -0.5])


def test_soft_clip_bounded():
    w = Waveform(np.array([100.0, -100.0, 0.0]))
    out = clip(w, "soft", 0.5)
    assert (np.abs(out.samples[:2]) < 0.5).all()
    assert out.samples[2] == 0.0


def test_hard_clip_idempotent():
    w = synth_message([13, 14])
    once = clip(w, "hard", 0.5)
    twice = clip(once, "hard", 0.5)
    np.testing.assert_array_equal(once.samples, twice.samples)


def test_clip_mode_none_identity():
    w = synth_message([2])
    np.testing.assert_array_equal(clip(w, "none", 0.5).samples, w.samples)


# -- drift --------------------------------------------------------------------------

def test_drift_identity():
    w = synth_message([11])
    out = resample_drift(w, 1.0)
    np.testing.assert_allclose(out.samples, w.samples)


def test_drift_output_length():
    w = Waveform(np.zeros(960))
    assert len(resample_drift(w, 1.01).samples) == 950  # round(960/1.01)


def test_drift_shifts_tone_frequency():
    n = 16000
    w = Waveform(0.5 * np.sin(2 * np.pi * 3000.0 * np.arange(n) / SR))
    out = resample_drift(w, 1.01)
    spectrum = np.abs(np.fft.rfft(out.samples))
    peak_hz = spectrum.argmax() * SR / len(out.samples)
    assert peak_hz == pytest.approx(3030.0, abs=3.0)  # 1% drift moves 3 kHz by 30 Hz


def test_drift_invertibility_bandlimited():
    # linear interpolation cannot round-trip content near Nyquist, so the
    # fidelity contract is checked on a sub-4kHz probe; full-band chips
    # measure ~0.98 (documented).
    gen = np.random.default_rng(8)
    spec = np.zeros(8001, dtype=complex)
    band = slice(50, 1500)  # 100 Hz .. 3 kHz at 16 kHz rate
    spec[band] = gen.standard_normal(1450) + 1j * gen.standard_normal(1450)
    probe = np.fft.irfft(spec, n=16000)
    probe /= np.abs(probe).max()
    for r in (0.99, 0.995, 1.005, 1.01):
        fwd = resample_drift(Waveform(probe), r)
        back = resample_drift(fwd, 1.0 / r)
        n = min(len(back.samples), len(probe))
        corr = np.corrcoef(back.samples[:n], probe[:n])[0, 1]
        assert corr > 0.99
    chips = synth_message([20, 40, 60]).samples
    fwd = resample_drift(Waveform(chips), 1.01)
    back = resample_drift(fwd, 1.0 / 1.01)
    n = min(len(back.samples), len(chips))
    assert np.corrcoef(back.samples[:n], chips[:n])[0, 1] > 0.95


def test_drift_rejects_out_of_range():
    with pytest.raises(ValueError):
        resample_drift(synth_message([1]), 0.5)


# -- gain / EQ -------------------------------------------------------------------------

def test_gain_plus_6db_rms_ratio():
    w = synth_message([44])
    out = gain(w, 6.0)
    ratio = np.sqrt(np.mean(out.samples ** 2) / np.mean(w.samples ** 2))
    assert ratio == pytest.approx(10 ** (6 / 20), rel=1e-9)  # ~1.995


def test_gain_zero_is_identity():
    w = synth_message([44])
    np.testing.assert_array_equal(gain(w, 0.0).samples, w.samples)


def test_eq_flat_gain_is_identity():
    w = synth_message([25, 26])
    out = parametric_eq(w, center_hz=1000.0, gain_db=0.0, q=1.0)
    assert np.abs(out.samples - w.samples).max() < 1e-6


def test_eq_boosts_center_band():
    w = Waveform(0.1 * np.sin(2 * np.pi * 1000.0 * np.arange(16000) / SR))
    boosted = parametric_eq(w, 1000.0, 6.0, 1.0)
    assert np.mean(boosted.samples ** 2) > np.mean(w.samples ** 2) * 1.5


# -- composed channel ---------------------------------------------------------------------

def test_disabled_channel_is_identity():
    w = synth_message([9, 10, 11])
    out = apply_channel(w, ChannelConfig.disabled(), RngState.from_seed(5))
    np.testing.assert_array_equal(out.samples, w.samples)


def test_apply_channel_deterministic():
    w = synth_message([1, 2, 3, 4])
    cfg = ChannelConfig()
    a = apply_channel(w, cfg, RngState.from_seed(77))
    b = apply_channel(w, cfg, RngState.from_seed(77))
    np.testing.assert_array_equal(a.samples, b.samples)
    c = apply_channel(w, cfg, RngState.from_seed(78))
    assert len(c.samples) != len(a.samples) or not np.array_equal(c.samples, a.samples)


def test_stage_draws_stable_across_ablation():
    # disabling other stages must not shift this stage's parameter draw
    w = synth_message([1, 2, 3])
    drift_cfg = ChannelConfig.disabled()
    drift_cfg = ChannelConfig(gain=drift_cfg.gain, eq=drift_cfg.eq,
                              reverb=drift_cfg.reverb, clip=drift_cfg.clip,
                              drift=DriftStage(enabled=True), noise=drift_cfg.noise)
    _, solo = apply_channel_with_draws(w, drift_cfg, RngState.from_seed(123))
    _, full = apply_channel_with_draws(w, ChannelConfig(), RngState.from_seed(123))
    assert solo["drift_factor"] == full["drift_factor"]


def test_channel_config_json_roundtrip(tmp_path):
    cfg = ChannelConfig(noise=NoiseStage(enabled=True, kind="pink", snr_db=(3.0, 3.0)),
                        clip=ClipStage(enabled=False))
    path = tmp_path / "ch.json"
    path.write_text(cfg.to_json())
    back = ChannelConfig.from_json_file(path)
    assert back == cfg


def test_channel_config_validation():
    with pytest.raises(ValueError):
        ChannelConfig(reverb=ReverbStage(tau=1.5))
    with pytest.raises(ValueError):
        ChannelConfig(clip=ClipStage(threshold=0.0))
    with pytest.raises(ValueError):
        ChannelConfig(drift=DriftStage(factor=(0.5, 1.0)))
    with pytest.raises(ValueError):
        ChannelConfig(noise=NoiseStage(kind="gray"))


# -- mel augmentation -------------------------------------------------------------------------

def test_mel_augment_identity():
    m = mel_spectrogram(synth_message([50, 51]))
    out = mel_augment(m, MelAugConfig(), RngState.from_seed(4))
    np.testing.assert_array_equal(out.values, m.values)


def test_mel_augment_freq_mask_zeroes_one_band():
    m = MelSpectrogram(np.ones((40, 12)))
    out = mel_augment(m, MelAugConfig(freq_mask=5), RngState.from_seed(11))
    zero_rows = np.where((out.values == 0).all(axis=1))[0]
    assert 0 <= len(zero_rows) <= 5
    if len(zero_rows) > 1:
        assert (np.diff(zero_rows) == 1).all()  # contiguous band
    untouched = np.setdiff1d(np.arange(40), zero_rows)
    np.testing.assert_array_equal(out.values[untouched], m.values[untouched])


def test_mel_augment_time_mask_bounded():
    m = MelSpectrogram(np.ones((40, 30)))
    out = mel_augment(m, MelAugConfig(time_mask=4), RngState.from_seed(21))
    zero_cols = np.where((out.values == 0).all(axis=0))[0]
    assert len(zero_cols) <= 4


def test_mel_augment_noise_keeps_nonnegative():
    m = mel_spectrogram(synth_message([60]))
    out = mel_augment(m, MelAugConfig(snr_db=0.0), RngState.from_seed(31))
    assert (out.values >= 0).all()
    assert not np.array_equal(out.values, m.values)


def test_full_rotation_is_identity():
    m = mel_spectrogram(synth_message([61]))
    np.testing.assert_array_equal(np.roll(m.values, m.frames, axis=1), m.values)


def test_mel_augment_shift_preserves_columns():
    m = mel_spectrogram(synth_message([62, 63]))
    out = mel_augment(m, MelAugConfig(max_shift=5), RngState.from_seed(41))
    assert sorted(map(tuple, out.values.T)) == sorted(map(tuple, m.values.T))


def test_mel_augment_blur_smooths():
    v = np.zeros((40, 20))
    v[:, 10] = 1.0
    out = mel_augment(MelSpectrogram(v), MelAugConfig(blur_width=3),
                      RngState.from_seed(51))
    assert out.values[:, 9].max() > 0
    assert out.values[:, 10].max() < 1.0


def test_melaug_config_validation():
    with pytest.raises(ValueError):
        MelAugConfig(freq_mask=-1)
