"""Matched-filter receiver for chip streams.

Decoding segments the input on the fixed 60 ms chip grid and scores each
window against all 128 reference chips by normalized cross-correlation
(cosine similarity), which makes the decision gain-invariant. Two
impairments get explicit search loops:

* start offset - the chip stream carries no preamble, so when
  ``offset_search`` > 0 the decoder scans candidate offsets at 1-sample
  resolution (FFT cross-correlation against the whole bank) and keeps the
  offset with the best summed window score;
* clock drift - each candidate factor in ``drift_search`` is undone by
  resampling before segmentation, and the hypothesis with the highest
  mean window score wins.

Windows whose best score falls below ``score_floor`` decode to UNK
instead of a forced guess.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import fft as sfft

from .synth import CHIP_SAMPLES, SAMPLE_RATE, Waveform, chip_spec, synth_chip
from .vocab import UNK_ID, VOCAB_SIZE, TokenId, Vocab


@dataclass
class TemplateBank:
    """Unit-energy reference chips, one per token id."""

    templates: np.ndarray  # (VOCAB_SIZE, chip_len), rows unit L2 norm
    chip_len: int
    sample_rate: int
    _fft_cache: dict = field(default_factory=dict, repr=False)

    def template_ffts(self, n_fft: int) -> np.ndarray:
        """Conjugate rFFTs of all templates at length n_fft (cached)."""
        if n_fft not in self._fft_cache:
            self._fft_cache[n_fft] = np.conj(
                sfft.rfft(self.templates, n=n_fft, axis=1))
        return self._fft_cache[n_fft]


def build_template_bank(v: Vocab, sample_rate: int = SAMPLE_RATE) -> TemplateBank:
    """Synthesize and unit-normalize reference chips for every token id."""
    chips = np.stack([synth_chip(chip_spec(t), sample_rate).samples
                      for t in range(VOCAB_SIZE)])
    norms = np.linalg.norm(chips, axis=1, keepdims=True)
    return TemplateBank(templates=chips / norms, chip_len=chips.shape[1],
                        sample_rate=sample_rate)


@dataclass(frozen=True)
class DecodeOptions:
    """Search ranges for the receiver.

    drift_search lists trial clock-drift factors (the factor assumed
    applied by the channel; decode resamples by its inverse). It must
    contain 1.0. offset_search is the maximum start offset scanned, in
    samples; 0 trusts sample-aligned input, which holds for everything
    this package renders itself. score_floor is the minimum accepted
    correlation before a window falls back to UNK.
    """

    drift_search: tuple[float, ...] = (0.99, 0.995, 1.0, 1.005, 1.01)
    offset_search: int = 0
    score_floor: float = 0.05

    def __post_init__(self):
        if 1.0 not in self.drift_search:
            raise ValueError("drift_search must contain 1.0")
        if not 0.0 <= self.score_floor < 1.0:
            raise ValueError("score_floor must be in [0, 1)")
        if self.offset_search < 0:
            raise ValueError("offset_search must be >= 0")


DEFAULT_DECODE = DecodeOptions()


@dataclass
class DecodeResult:
    tokens: list[TokenId]
    scores: np.ndarray  # per-window best correlation
    drift: float        # winning drift hypothesis
    offset: int         # estimated start offset, samples


def _window_scores(x: np.ndarray, bank: TemplateBank,
                   offset: int) -> tuple[np.ndarray, np.ndarray]:
    """Grid-aligned correlation: per-window (best id, best score)."""
    chip = bank.chip_len
    usable = len(x) - offset
    n_win = usable // chip
    if n_win <= 0:
        return np.empty(0, dtype=np.int64), np.empty(0)
    windows = x[offset:offset + n_win * chip].reshape(n_win, chip)
    norms = np.linalg.norm(windows, axis=1)
    norms[norms == 0.0] = 1.0  # silent window scores 0 against every template
    corr = (windows @ bank.templates.T) / norms[:, None]
    return corr.argmax(axis=1), corr.max(axis=1)


def _estimate_offset(x: np.ndarray, bank: TemplateBank, max_offset: int) -> int:
    """Best start offset in [0, max_offset] by summed window correlation.

    Computes the normalized cross-correlation of the input against every
    template at every lag (batched FFT), reduces to the best template
    score per lag, then scores each candidate offset as the mean over its
    chip-grid positions.
    """
    chip = bank.chip_len
    n = len(x)
    max_offset = min(max_offset, n - chip)
    if max_offset <= 0:
        return 0
    n_fft = sfft.next_fast_len(n)
    spec = sfft.rfft(x, n=n_fft)
    corr = sfft.irfft(spec[None, :] * bank.template_ffts(n_fft), n=n_fft, axis=1)
    n_lags = n - chip + 1
    corr = corr[:, :n_lags]
    # sliding L2 norm of each window via cumulative sums
    csum = np.concatenate(([0.0], np.cumsum(x * x)))
    win_norm = np.sqrt(np.maximum(csum[chip:] - csum[:-chip], 0.0))
    win_norm[win_norm == 0.0] = 1.0
    best_by_lag = corr.max(axis=0) / win_norm
    best_offset, best_score = 0, -np.inf
    for o in range(max_offset + 1):
        lags = np.arange(o, n_lags, chip)
        if lags.size == 0:
            continue
        score = best_by_lag[lags].mean()
        if score > best_score:
            best_offset, best_score = o, score
    return best_offset


def _undo_drift(x: np.ndarray, factor: float) -> np.ndarray:
    """Resample assuming the channel applied ``factor``; inverse mapping."""
    if factor == 1.0:
        return x
    n_out = int(round(len(x) * factor))
    positions = np.arange(n_out) / factor
    return np.interp(positions, np.arange(len(x)), x)


def decode_detailed(w: Waveform, bank: TemplateBank,
                    opts: DecodeOptions = DEFAULT_DECODE) -> DecodeResult:
    """Full decode with per-window scores and the winning hypothesis.

    Raises:
        ValueError: on sample-rate mismatch or input shorter than a chip.
    """
    if w.sample_rate != bank.sample_rate:
        raise ValueError("sample-rate mismatch between waveform and bank")
    x = np.asarray(w.samples, dtype=np.float64)
    if len(x) < bank.chip_len:
        raise ValueError("message too short")
    offset = _estimate_offset(x, bank, opts.offset_search) if opts.offset_search else 0
    best = None
    for factor in opts.drift_search:
        xr = _undo_drift(x, factor)
        ids, scores = _window_scores(xr, bank, int(round(offset * factor)))
        if ids.size == 0:
            continue
        mean_score = float(scores.mean())
        if best is None or mean_score > best[0]:
            best = (mean_score, ids, scores, factor)
    if best is None:
        raise ValueError("message too short")
    _, ids, scores, factor = best
    tokens = ids.copy()
    tokens[scores < opts.score_floor] = UNK_ID
    return DecodeResult(tokens=[int(t) for t in tokens], scores=scores,
                        drift=factor, offset=offset)


def decode(w: Waveform, bank: TemplateBank,
           opts: DecodeOptions = DEFAULT_DECODE) -> list[TokenId]:
    """Decode a chip stream back to token ids."""
    return decode_detailed(w, bank, opts).tokens


def ctc_collapse(ids: list[TokenId], blank: TokenId = 0) -> list[TokenId]:
    """Greedy CTC reduction: merge consecutive repeats, then drop blanks."""
    out: list[TokenId] = []
    prev = None
    for t in ids:
        if t != prev:
            out.append(t)
        prev = t
    return [t for t in out if t != blank]
