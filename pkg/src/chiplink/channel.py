"""Stochastic acoustic-channel simulator with seeded determinism.

Waveform-domain stages run in a fixed physical order: source gain,
speaker EQ, room reverb, amplifier clipping, clock drift, ambient noise.
Each enabled stage draws its random parameters from its own substream
derived from (seed, stage id), so enabling or disabling one stage never
shifts the draws of another; an ablation run and a combined run with the
same seed therefore share per-stage parameter values.

Mel-domain augmentations (additive noise at a target SNR, frequency and
time masking, temporal blur, circular shift) operate on compressed mel
matrices and mirror what a training loop would apply to features.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import kernels
from .dsp import MelSpectrogram
from .seeding import mix64
from .synth import Waveform

# Economy 3-pole IIR approximation of a 1/f magnitude response
# (audio-DSP folklore coefficients, accurate to well under +/-1 dB across
# the band this package analyzes).
PINK_B = (0.049922035, -0.095993537, 0.050612699, -0.004408786)
PINK_A = (1.0, -2.494956002, 2.017265875, -0.522189400)
_PINK_WARMUP = 4096  # samples discarded to flush the filter transient

NOISE_KINDS = ("white", "pink", "brown", "mixed")

# Stage ids for substream derivation; frozen, order matches apply_channel.
_STAGE_GAIN = 1
_STAGE_EQ = 2
_STAGE_REVERB = 3
_STAGE_CLIP = 4
_STAGE_DRIFT = 5
_STAGE_NOISE = 6
_STAGE_NOISE_SNR = 7

_MELAUG_NOISE = 11
_MELAUG_FREQ = 12
_MELAUG_TIME = 13
_MELAUG_SHIFT = 14


@dataclass
class RngState:
    """Deterministic randomness handle: a 64-bit seed plus its stream.

    Identical seed and identical call sequence give identical draws.
    ``substream`` derives an independent child stream without disturbing
    this one.
    """

    seed: int
    gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.gen = np.random.Generator(np.random.PCG64(self.seed))

    @classmethod
    def from_seed(cls, seed: int) -> "RngState":
        return cls(seed=seed)

    def substream(self, index: int) -> "RngState":
        return RngState(seed=mix64(self.seed, index))


# -- configuration -----------------------------------------------------------

@dataclass(frozen=True)
class GainStage:
    enabled: bool = True
    db: tuple[float, float] = (-12.0, 6.0)


@dataclass(frozen=True)
class EqStage:
    enabled: bool = True
    center_hz: tuple[float, float] = (300.0, 6000.0)
    gain_db: tuple[float, float] = (-6.0, 6.0)
    q: tuple[float, float] = (0.5, 2.0)


@dataclass(frozen=True)
class ReverbStage:
    enabled: bool = True
    tau: float = 0.4
    delay_ms: float = 20.0


@dataclass(frozen=True)
class ClipStage:
    enabled: bool = True
    mode: str = "hard"  # hard | soft | none
    threshold: float = 0.5


@dataclass(frozen=True)
class DriftStage:
    enabled: bool = True
    factor: tuple[float, float] = (0.98, 1.02)


@dataclass(frozen=True)
class NoiseStage:
    enabled: bool = True
    kind: str = "white"
    snr_db: tuple[float, float] = (-5.0, 30.0)


@dataclass(frozen=True)
class ChannelConfig:
    """Distortion recipe. Ranges are (lo, hi) for uniform draws; use a
    degenerate (x, x) range to pin a parameter."""

    gain: GainStage = GainStage()
    eq: EqStage = EqStage()
    reverb: ReverbStage = ReverbStage()
    clip: ClipStage = ClipStage()
    drift: DriftStage = DriftStage()
    noise: NoiseStage = NoiseStage()

    def __post_init__(self):
        if not 0.0 < self.reverb.tau < 1.0:
            raise ValueError("reverb tau must be in (0, 1)")
        if self.clip.threshold <= 0.0:
            raise ValueError("clip threshold must be > 0")
        lo, hi = self.drift.factor
        if not (0.9 <= lo <= hi <= 1.1):
            raise ValueError("drift factor range must lie within [0.9, 1.1]")
        if self.noise.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind: {self.noise.kind}")
        if self.clip.mode not in ("hard", "soft", "none"):
            raise ValueError(f"unknown clip mode: {self.clip.mode}")

    @classmethod
    def disabled(cls) -> "ChannelConfig":
        """All stages off; apply_channel becomes the identity."""
        return cls(gain=GainStage(enabled=False), eq=EqStage(enabled=False),
                   reverb=ReverbStage(enabled=False), clip=ClipStage(enabled=False),
                   drift=DriftStage(enabled=False), noise=NoiseStage(enabled=False))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "ChannelConfig":
        def rng_pair(v):
            return tuple(v) if isinstance(v, (list, tuple)) else v

        def load(stage_cls, key):
            sub = dict(d.get(key, {}))
            for k, v in sub.items():
                sub[k] = rng_pair(v)
            return stage_cls(**sub)

        return cls(gain=load(GainStage, "gain"), eq=load(EqStage, "eq"),
                   reverb=load(ReverbStage, "reverb"), clip=load(ClipStage, "clip"),
                   drift=load(DriftStage, "drift"), noise=load(NoiseStage, "noise"))

    @classmethod
    def from_json(cls, text: str) -> "ChannelConfig":
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_json_file(cls, path: str | Path) -> "ChannelConfig":
        return cls.from_json(Path(path).read_text())


@dataclass(frozen=True)
class MelAugConfig:
    snr_db: float = math.inf
    freq_mask: int = 0   # max masked rows
    time_mask: int = 0   # max masked frames
    blur_width: int = 0  # moving-average width along time
    max_shift: int = 0   # circular shift bound, frames

    def __post_init__(self):
        if min(self.freq_mask, self.time_mask, self.blur_width, self.max_shift) < 0:
            raise ValueError("widths must be >= 0")


# -- noise generators ---------------------------------------------------------

def white_noise(n: int, rng: RngState) -> np.ndarray:
    return rng.gen.standard_normal(n)


def pink_noise(n: int, rng: RngState) -> np.ndarray:
    """1/f noise via the 3-pole IIR shaper; transient discarded."""
    raw = rng.gen.standard_normal(n + _PINK_WARMUP)
    return kernels.iir_filter(PINK_B, PINK_A, raw)[_PINK_WARMUP:]


def brown_noise(n: int, rng: RngState) -> np.ndarray:
    """1/f^2 noise: cumulative sum of white noise, mean-removed."""
    x = np.cumsum(rng.gen.standard_normal(n))
    return x - x.mean()


def _colored_noise(n: int, kind: str, rng: RngState) -> np.ndarray:
    if kind == "white":
        return white_noise(n, rng)
    if kind == "pink":
        return pink_noise(n, rng)
    if kind == "brown":
        return brown_noise(n, rng)
    raise ValueError(f"unknown noise kind: {kind}")


def add_noise(w: Waveform, kind: str, snr_db: float, rng: RngState) -> Waveform:
    """Add colored noise scaled to hit ``snr_db`` over the full signal.

    Kinds: white, pink, brown, or mixed (equal-power thirds of the three
    colors at the requested total SNR). Output is not re-normalized.

    Raises:
        ValueError: on zero-power input (SNR undefined against silence).
    """
    p_signal = float(np.mean(w.samples ** 2))
    if p_signal <= 0.0:
        raise ValueError("cannot compute SNR against silence")
    if math.isinf(snr_db):
        return Waveform(w.samples.copy(), w.sample_rate)
    n = len(w.samples)
    p_noise_target = p_signal / (10.0 ** (snr_db / 10.0))
    if kind == "mixed":
        noise = np.zeros(n)
        for i, sub_kind in enumerate(("white", "pink", "brown")):
            part = _colored_noise(n, sub_kind, rng.substream(i))
            part *= math.sqrt((p_noise_target / 3.0) / np.mean(part ** 2))
            noise += part
    else:
        noise = _colored_noise(n, kind, rng)
        noise *= math.sqrt(p_noise_target / np.mean(noise ** 2))
    return Waveform(w.samples + noise, w.sample_rate)


# -- deterministic stages ------------------------------------------------------

def gain(w: Waveform, db: float) -> Waveform:
    return Waveform(w.samples * 10.0 ** (db / 20.0), w.sample_rate)


def parametric_eq(w: Waveform, center_hz: float, gain_db: float,
                  q: float) -> Waveform:
    """Single peaking biquad (RBJ audio-EQ cookbook form)."""
    a_lin = 10.0 ** (gain_db / 40.0)
    w0 = 2.0 * math.pi * center_hz / w.sample_rate
    alpha = math.sin(w0) / (2.0 * q)
    cw = math.cos(w0)
    b = (1.0 + alpha * a_lin, -2.0 * cw, 1.0 - alpha * a_lin)
    a = (1.0 + alpha / a_lin, -2.0 * cw, 1.0 - alpha / a_lin)
    return Waveform(kernels.iir_filter(b, a, w.samples), w.sample_rate)


def reverb(w: Waveform, tau: float = 0.4, delay_ms: float = 20.0) -> Waveform:
    """Exponential-decay comb reverb.

    Impulse response has taps tau**k at k * delay, truncated before the
    first tap below 0.01; output grows by K * delay samples.

    Raises:
        ValueError: if tau is outside (0, 1).
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must be in (0, 1)")
    delay = int(round(delay_ms * w.sample_rate / 1000.0))
    k_max = int(math.floor(math.log(0.01) / math.log(tau)))
    if tau ** k_max < 0.01:  # guard against log rounding at the boundary
        k_max -= 1
    n = len(w.samples)
    out = np.zeros(n + k_max * delay)
    for k in range(k_max + 1):
        out[k * delay:k * delay + n] += (tau ** k) * w.samples
    return Waveform(out, w.sample_rate)


def clip(w: Waveform, mode: str = "hard", threshold: float = 0.5) -> Waveform:
    """Saturate samples: hard limiting or tanh soft limiting.

    Raises:
        ValueError: if threshold <= 0 or the mode is unknown.
    """
    if threshold <= 0:
        raise ValueError("threshold must be > 0")
    if mode == "none":
        return Waveform(w.samples.copy(), w.sample_rate)
    if mode == "hard":
        return Waveform(np.clip(w.samples, -threshold, threshold), w.sample_rate)
    if mode == "soft":
        return Waveform(threshold * np.tanh(w.samples / threshold), w.sample_rate)
    raise ValueError(f"unknown clip mode: {mode}")


def resample_drift(w: Waveform, factor: float) -> Waveform:
    """Simulate transmitter/receiver clock mismatch.

    Linear-interpolation resampling: output length round(len/factor); a
    tone at f Hz lands at f * factor Hz for a receiver that assumes the
    original rate.

    Raises:
        ValueError: if factor is outside [0.9, 1.1].
    """
    if not 0.9 <= factor <= 1.1:
        raise ValueError("drift factor must be within [0.9, 1.1]")
    n_in = len(w.samples)
    n_out = int(round(n_in / factor))
    positions = np.arange(n_out) * factor
    out = np.interp(positions, np.arange(n_in), w.samples)
    return Waveform(out, w.sample_rate)


# -- composed channel ---------------------------------------------------------

def _draw(rng: RngState, stage: int, lo: float, hi: float) -> float:
    if lo == hi:
        return lo
    return float(rng.substream(stage).gen.uniform(lo, hi))


def apply_channel_with_draws(w: Waveform, cfg: ChannelConfig,
                             rng: RngState) -> tuple[Waveform, dict]:
    """Run all enabled stages and report the parameter values drawn."""
    draws: dict = {}
    out = Waveform(w.samples.copy(), w.sample_rate)
    if cfg.gain.enabled:
        db = _draw(rng, _STAGE_GAIN, *cfg.gain.db)
        draws["gain_db"] = db
        out = gain(out, db)
    if cfg.eq.enabled:
        sub = rng.substream(_STAGE_EQ).gen
        center = float(sub.uniform(*cfg.eq.center_hz))
        eq_gain = float(sub.uniform(*cfg.eq.gain_db))
        q = float(sub.uniform(*cfg.eq.q))
        draws["eq"] = {"center_hz": center, "gain_db": eq_gain, "q": q}
        out = parametric_eq(out, center, eq_gain, q)
    if cfg.reverb.enabled:
        draws["reverb"] = {"tau": cfg.reverb.tau, "delay_ms": cfg.reverb.delay_ms}
        out = reverb(out, cfg.reverb.tau, cfg.reverb.delay_ms)
    if cfg.clip.enabled and cfg.clip.mode != "none":
        draws["clip"] = {"mode": cfg.clip.mode, "threshold": cfg.clip.threshold}
        out = clip(out, cfg.clip.mode, cfg.clip.threshold)
    if cfg.drift.enabled:
        factor = _draw(rng, _STAGE_DRIFT, *cfg.drift.factor)
        draws["drift_factor"] = factor
        out = resample_drift(out, factor)
    if cfg.noise.enabled:
        sub = rng.substream(_STAGE_NOISE)
        snr = _draw(rng, _STAGE_NOISE_SNR, *cfg.noise.snr_db)
        draws["noise"] = {"kind": cfg.noise.kind, "snr_db": snr}
        out = add_noise(out, cfg.noise.kind, snr, sub)
    return out, draws


def apply_channel(w: Waveform, cfg: ChannelConfig, rng: RngState) -> Waveform:
    """Distort a waveform: gain -> EQ -> reverb -> clip -> drift -> noise.

    A pure function of (waveform, cfg, rng.seed): parameters come from
    per-stage substreams of the seed, never from shared stream state.
    """
    out, _ = apply_channel_with_draws(w, cfg, rng)
    return out


# -- mel-domain augmentation ----------------------------------------------------

def mel_augment(m: MelSpectrogram, cfg: MelAugConfig, rng: RngState) -> MelSpectrogram:
    """Feature-space augmentation of a compressed mel matrix.

    Order: additive Gaussian noise at the target SNR (clamped back to
    non-negative), one frequency mask and one time mask of random width
    up to the configured maxima, moving-average temporal blur, circular
    time shift drawn from [-max_shift, +max_shift].
    """
    v = m.values.copy()
    n_mels, frames = v.shape
    if not math.isinf(cfg.snr_db):
        p_sig = float(np.mean(v ** 2))
        if p_sig > 0:
            sigma = math.sqrt(p_sig / (10.0 ** (cfg.snr_db / 10.0)))
            v = v + sigma * rng.substream(_MELAUG_NOISE).gen.standard_normal(v.shape)
            v = np.clip(v, 0.0, None)
    if cfg.freq_mask > 0 and n_mels > 0:
        sub = rng.substream(_MELAUG_FREQ).gen
        width = int(sub.integers(0, min(cfg.freq_mask, n_mels) + 1))
        if width > 0:
            start = int(sub.integers(0, n_mels - width + 1))
            v[start:start + width, :] = 0.0
    if cfg.time_mask > 0 and frames > 0:
        sub = rng.substream(_MELAUG_TIME).gen
        width = int(sub.integers(0, min(cfg.time_mask, frames) + 1))
        if width > 0:
            start = int(sub.integers(0, frames - width + 1))
            v[:, start:start + width] = 0.0
    if cfg.blur_width >= 2 and frames > 0:
        kernel = np.ones(cfg.blur_width) / cfg.blur_width
        v = np.apply_along_axis(lambda r: np.convolve(r, kernel, mode="same"), 1, v)
    if cfg.max_shift > 0 and frames > 0:
        shift = int(rng.substream(_MELAUG_SHIFT).gen.integers(
            -cfg.max_shift, cfg.max_shift + 1))
        v = np.roll(v, shift, axis=1)
    return MelSpectrogram(v, m.config)
