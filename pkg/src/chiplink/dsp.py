"""Feature pipeline: STFT, mel filterbank, log compression, Griffin-Lim.

Analysis settings are fixed at the package defaults (16 kHz, 512-point
FFT, 160-sample hop, 40 HTK-mel bins spanning 0-8 kHz, log(1+x)
compression). The STFT is centered with reflect padding and a periodic
Hann window, giving floor(len/hop) + 1 frames.

Griffin-Lim inverts compressed mels through the filterbank pseudo-inverse
and recovers phase iteratively from an all-zero phase init, so the whole
mel -> waveform path is deterministic.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import fft as sfft

from .synth import Waveform

_PINV_RCOND = 1e-8  # singular values below rcond * sigma_max are truncated


@dataclass(frozen=True)
class MelConfig:
    sample_rate: int = 16000
    n_fft: int = 512
    hop: int = 160
    n_mels: int = 40
    fmin: float = 0.0
    fmax: float = 8000.0

    def __post_init__(self):
        if self.hop > self.n_fft:
            raise ValueError("hop must not exceed n_fft")
        if self.fmax > self.sample_rate / 2:
            raise ValueError("fmax must not exceed Nyquist")
        if self.n_mels < 1:
            raise ValueError("n_mels must be >= 1")

    @property
    def n_bins(self) -> int:
        return self.n_fft // 2 + 1


DEFAULT_MEL = MelConfig()


@dataclass
class MelSpectrogram:
    """log(1+x)-compressed mel magnitudes, shape (n_mels, frames)."""

    values: np.ndarray
    config: MelConfig = DEFAULT_MEL

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] != self.config.n_mels:
            raise ValueError(
                f"expected ({self.config.n_mels}, T) matrix, got {self.values.shape}")

    @property
    def frames(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class SpectralDiagnostics:
    """Scalar health indicators of a mel spectrogram.

    energy_violation: mean per-frame excess outside the [lo, hi] band,
    measured on frame means in compressed units. total_variation: mean L1
    difference between adjacent frames. highband_fraction: share of total
    energy in bins at or above floor(0.7 * n_mels).
    """

    energy_violation: float
    total_variation: float
    highband_fraction: float


def hz_to_mel(f):
    """HTK mel scale."""
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@lru_cache(maxsize=8)
def _filterbank_cached(cfg: MelConfig) -> np.ndarray:
    pts = mel_to_hz(np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax),
                                cfg.n_mels + 2))
    bin_hz = np.arange(cfg.n_bins) * cfg.sample_rate / cfg.n_fft
    fb = np.zeros((cfg.n_mels, cfg.n_bins))
    for m in range(cfg.n_mels):
        lo, center, hi = pts[m], pts[m + 1], pts[m + 2]
        rising = (bin_hz - lo) / (center - lo)
        falling = (hi - bin_hz) / (hi - center)
        fb[m] = np.clip(np.minimum(rising, falling), 0.0, None)
    fb.flags.writeable = False
    return fb


@lru_cache(maxsize=8)
def _filterbank_pinv_cached(cfg: MelConfig) -> np.ndarray:
    pinv = np.linalg.pinv(_filterbank_cached(cfg), rcond=_PINV_RCOND)
    pinv.flags.writeable = False
    return pinv


def mel_filterbank(cfg: MelConfig = DEFAULT_MEL) -> np.ndarray:
    """Triangular mel filterbank, shape (n_mels, n_fft//2 + 1).

    Filters are unit-peak triangles with centers equally spaced on the
    HTK mel scale between fmin and fmax, ordered by center frequency.
    """
    return _filterbank_cached(cfg).copy()


def filter_centers_hz(cfg: MelConfig = DEFAULT_MEL) -> np.ndarray:
    """Center frequency of each mel filter in Hz."""
    pts = mel_to_hz(np.linspace(hz_to_mel(cfg.fmin), hz_to_mel(cfg.fmax),
                                cfg.n_mels + 2))
    return pts[1:-1]


@lru_cache(maxsize=4)
def _hann_periodic(n: int) -> np.ndarray:
    w = 0.5 * (1.0 - np.cos(2.0 * np.pi * np.arange(n) / n))
    w.flags.writeable = False
    return w


def stft(x: np.ndarray, cfg: MelConfig = DEFAULT_MEL) -> np.ndarray:
    """Centered STFT with reflect padding, shape (n_fft//2 + 1, frames).

    Frame count is floor(len(x)/hop) + 1. Inputs shorter than the pad
    width fall back to zero padding (reflect needs len > n_fft/2).
    """
    x = np.asarray(x, dtype=np.float64)
    pad = cfg.n_fft // 2
    mode = "reflect" if len(x) > pad else "constant"
    xp = np.pad(x, pad, mode=mode)
    n_frames = len(x) // cfg.hop + 1
    frames = np.lib.stride_tricks.sliding_window_view(xp, cfg.n_fft)
    frames = frames[::cfg.hop][:n_frames]
    return sfft.rfft(frames * _hann_periodic(cfg.n_fft), axis=1).T


def istft(spec: np.ndarray, cfg: MelConfig = DEFAULT_MEL) -> np.ndarray:
    """Weighted overlap-add inverse of :func:`stft`.

    Returns (frames - 1) * hop samples, i.e. the natural length of a
    signal producing that many centered frames.
    """
    win = _hann_periodic(cfg.n_fft)
    frames = sfft.irfft(spec.T, n=cfg.n_fft, axis=1) * win
    n_frames = spec.shape[1]
    total = cfg.n_fft + (n_frames - 1) * cfg.hop
    out = np.zeros(total)
    wsum = np.zeros(total)
    wsq = win * win
    for t in range(n_frames):
        start = t * cfg.hop
        out[start:start + cfg.n_fft] += frames[t]
        wsum[start:start + cfg.n_fft] += wsq
    out /= np.maximum(wsum, 1e-12)
    pad = cfg.n_fft // 2
    return out[pad:pad + (n_frames - 1) * cfg.hop]


def mel_spectrogram(w: Waveform, cfg: MelConfig = DEFAULT_MEL) -> MelSpectrogram:
    """Compressed mel features: log(1 + F_mel . |STFT|).

    Raises:
        ValueError: if the waveform sample rate differs from the config.
    """
    if w.sample_rate != cfg.sample_rate:
        raise ValueError(
            f"sample-rate mismatch: waveform {w.sample_rate}, config {cfg.sample_rate}")
    mag = np.abs(stft(w.samples, cfg))
    return MelSpectrogram(np.log1p(_filterbank_cached(cfg) @ mag), cfg)


def _gl_core(m: MelSpectrogram, iters: int,
             track_residuals: bool) -> tuple[Waveform, np.ndarray]:
    if iters < 1:
        raise ValueError("iters must be >= 1")
    cfg = m.config
    # (a) invert the log(1+x) compression, (b) lift mel -> linear magnitude
    mel_mag = np.clip(np.expm1(m.values), 0.0, None)
    target = np.clip(_filterbank_pinv_cached(cfg) @ mel_mag, 0.0, None)
    target_norm = np.linalg.norm(target)
    # (c) iterative phase recovery from an all-zero phase init
    x = istft(target.astype(complex), cfg)
    residuals = np.empty(iters)
    for k in range(iters):
        rebuilt = stft(x, cfg)[:, :target.shape[1]]
        if track_residuals:
            diff = np.linalg.norm(np.abs(rebuilt) - target)
            residuals[k] = diff / target_norm if target_norm > 0 else 0.0
        phase = np.angle(rebuilt)
        x = istft(target * np.exp(1j * phase), cfg)
    peak = np.abs(x).max()
    if peak > 0:
        x = x * (0.95 / peak)
    return Waveform(x, cfg.sample_rate), residuals


def griffin_lim(m: MelSpectrogram, iters: int = 32) -> Waveform:
    """Reconstruct a waveform from a compressed mel spectrogram.

    Steps: invert the compression (expm1, clamped at zero), lift to
    linear-frequency magnitudes through the filterbank pseudo-inverse
    (negatives clamped), then run classic iterative phase recovery for
    ``iters`` rounds. Output is peak-normalized to 0.95.
    """
    wav, _ = _gl_core(m, iters, track_residuals=False)
    return wav


def griffin_lim_with_residuals(m: MelSpectrogram,
                               iters: int = 32) -> tuple[Waveform, np.ndarray]:
    """Like :func:`griffin_lim` but also returns the per-iteration
    spectral-convergence residual ||  |STFT(x_k)| - S ||_F / ||S||_F,
    measured just before each magnitude projection."""
    return _gl_core(m, iters, track_residuals=True)


def roundtrip_consistency(m: MelSpectrogram) -> float:
    """Mean |M - Mel(GL(M))|, the shorter time axis zero-padded.

    Low values mean the mel survives vocoding; spectrograms that are not
    physically realizable change a lot after a synthesis round trip.
    """
    wav = griffin_lim(m, iters=32)
    if len(wav.samples) == 0:
        rebuilt = np.zeros_like(m.values)
    else:
        rebuilt = mel_spectrogram(wav, m.config).values
    t = max(m.values.shape[1], rebuilt.shape[1])
    a = np.pad(m.values, ((0, 0), (0, t - m.values.shape[1])))
    b = np.pad(rebuilt, ((0, 0), (0, t - rebuilt.shape[1])))
    return float(np.abs(a - b).mean())


def spectral_diagnostics(m: MelSpectrogram, lo: float = 0.1,
                         hi: float = 3.0) -> SpectralDiagnostics:
    """Compute the three spectral health indicators for ``m``.

    Raises:
        ValueError: if lo >= hi.
    """
    if not lo < hi:
        raise ValueError("lo must be < hi")
    v = m.values
    frame_energy = v.mean(axis=0) if v.size else np.zeros(0)
    excess = np.clip(frame_energy - hi, 0.0, None) + np.clip(lo - frame_energy, 0.0, None)
    energy_violation = float(excess.mean()) if excess.size else 0.0
    if v.shape[1] >= 2:
        tv = float(np.abs(np.diff(v, axis=1)).sum(axis=0).mean())
    else:
        tv = 0.0
    total = v.sum()
    cut = int(np.floor(0.7 * m.config.n_mels))
    high = float(v[cut:].sum() / total) if total > 0 else 0.0
    return SpectralDiagnostics(energy_violation, tv, high)


# -- binary interchange ------------------------------------------------------

_HEADER = struct.Struct("<QQ")  # (n_mels, frames), 16 bytes


def save_mel(m: MelSpectrogram, path: str | Path) -> None:
    """Write little-endian float32 values with a 16-byte (n_mels, T)
    header, plus a ``<path>.json`` sidecar carrying the MelConfig."""
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(m.values.shape[0], m.values.shape[1]))
        fh.write(np.ascontiguousarray(m.values, dtype="<f4").tobytes())
    cfg = m.config
    sidecar = {"sample_rate": cfg.sample_rate, "n_fft": cfg.n_fft,
               "hop": cfg.hop, "n_mels": cfg.n_mels,
               "fmin": cfg.fmin, "fmax": cfg.fmax}
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2))


def load_mel(path: str | Path) -> MelSpectrogram:
    path = Path(path)
    raw = path.read_bytes()
    n_mels, frames = _HEADER.unpack_from(raw)
    values = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size)
    values = values.reshape(n_mels, frames).astype(np.float64)
    cfg = MelConfig(**json.loads(Path(str(path) + ".json").read_text()))
    return MelSpectrogram(values, cfg)
