"""Deterministic multi-harmonic chip synthesis.

Every token id owns a fixed 60 ms tone chip built from three harmonics.
Fundamentals follow golden-ratio spacing so the 128 carriers spread
evenly over the band:

    f1(i) = 300 + (i * phi * 83) mod 3500   [Hz],  phi = (1 + sqrt(5)) / 2

The second and third harmonics are 2*f1 and 3*f1, reflected around
7600 Hz when they would exceed it, which keeps all chip energy below the
8 kHz analysis ceiling. Amplitudes roll off (1.0, 0.5, 0.25), phases are
zero, and each chip is peak-normalized to 0.9 after applying raised-cosine
5 ms fade ramps, so chip boundaries sit exactly at zero amplitude and
concatenation is click-free.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .vocab import VOCAB_SIZE, TokenId

SAMPLE_RATE = 16000
CHIP_SECONDS = 0.060
FADE_SECONDS = 0.005
CHIP_SAMPLES = 960  # round(CHIP_SECONDS * SAMPLE_RATE)

GOLDEN_RATIO = (1.0 + math.sqrt(5.0)) / 2.0
BASE_HZ = 300.0
SPAN_HZ = 3500.0
STEP_HZ = 83.0
FOLD_HZ = 7600.0  # harmonics above this reflect back below it
HARMONIC_AMPLITUDES = (1.0, 0.5, 0.25)
PEAK_LEVEL = 0.9


@dataclass(frozen=True)
class ChipSpec:
    """Harmonic recipe for one token's chip."""

    token: TokenId
    harmonics: tuple[tuple[float, float, float], ...]  # (freq_hz, amp, phase)
    chip_duration: float = CHIP_SECONDS
    fade: float = FADE_SECONDS

    def __post_init__(self):
        if len(self.harmonics) != 3:
            raise ValueError("chip spec requires exactly 3 harmonics")


@dataclass
class Waveform:
    """Mono audio samples with their sample rate."""

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


def fundamental_hz(token: TokenId) -> float:
    """Golden-ratio fundamental for a token id."""
    return BASE_HZ + (token * GOLDEN_RATIO * STEP_HZ) % SPAN_HZ


def chip_spec(token: TokenId) -> ChipSpec:
    """Build the 3-harmonic recipe for ``token``.

    Raises:
        ValueError: if the token id is outside [0, 128).
    """
    if not 0 <= token < VOCAB_SIZE:
        raise ValueError(f"token id out of range: {token}")
    f1 = fundamental_hz(token)
    harmonics = []
    for k, amp in zip((1, 2, 3), HARMONIC_AMPLITUDES):
        f = k * f1
        if f > FOLD_HZ:
            f = 2.0 * FOLD_HZ - f
        harmonics.append((f, amp, 0.0))
    return ChipSpec(token=token, harmonics=tuple(harmonics))


def _fade_window(n_samples: int, fade_samples: int) -> np.ndarray:
    w = np.ones(n_samples)
    if fade_samples > 0:
        # raised-cosine (half Hann lobe); w[0] == w[-1] == 0
        ramp = 0.5 * (1.0 - np.cos(np.pi * np.arange(fade_samples) / fade_samples))
        w[:fade_samples] = ramp
        w[-fade_samples:] = ramp[::-1]
    return w


def synth_chip(spec: ChipSpec, sample_rate: int = SAMPLE_RATE) -> Waveform:
    """Render one chip to samples.

    Output length is round(chip_duration * sample_rate); the first and
    last ``fade`` seconds follow the raised-cosine ramps and the peak
    amplitude is normalized to 0.9.

    Raises:
        ValueError: if any harmonic is at or above the Nyquist frequency.
    """
    nyquist = sample_rate / 2.0
    for f, _, _ in spec.harmonics:
        if f >= nyquist:
            raise ValueError(f"harmonic above Nyquist: {f:.1f} Hz >= {nyquist:.1f} Hz")
    n = int(round(spec.chip_duration * sample_rate))
    t = np.arange(n) / sample_rate
    x = np.zeros(n)
    for f, a, phi in spec.harmonics:
        x += a * np.sin(2.0 * np.pi * f * t + phi)
    x *= _fade_window(n, int(round(spec.fade * sample_rate)))
    peak = np.abs(x).max()
    if peak > 0:
        x *= PEAK_LEVEL / peak
    return Waveform(x, sample_rate)


def synth_message(ids: list[TokenId], sample_rate: int = SAMPLE_RATE) -> Waveform:
    """Concatenate per-token chips back to back, no guard intervals.

    Raises:
        ValueError: if ``ids`` is empty.
    """
    if not ids:
        raise ValueError("empty message")
    chips = [synth_chip(chip_spec(t), sample_rate).samples for t in ids]
    return Waveform(np.concatenate(chips), sample_rate)


# -- WAV interchange (16-bit PCM mono) --------------------------------------

def write_wav(path: str | Path, w: Waveform) -> None:
    """Write a waveform as 16-bit PCM mono WAV."""
    clipped = np.clip(w.samples, -1.0, 1.0)
    pcm = np.round(clipped * 32767.0).astype(np.int16)
    wavfile.write(str(path), w.sample_rate, pcm)


def read_wav(path: str | Path) -> Waveform:
    """Read a 16-bit PCM mono WAV back to float samples in [-1, 1]."""
    sr, data = wavfile.read(str(path))
    if data.ndim != 1:
        raise ValueError("expected mono WAV")
    if data.dtype != np.int16:
        raise ValueError(f"expected 16-bit PCM, got {data.dtype}")
    return Waveform(data.astype(np.float64) / 32767.0, int(sr))
