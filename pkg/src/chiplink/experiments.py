"""Batch experiment harness: SNR sweeps, ablations, scaling studies.

Every experiment is a pure function of its config (message count, seed,
condition grid): messages come from the deterministic corpus generator
and each message's channel draws from mix64(seed, message id). Because
channel stages draw from per-stage substreams, conditions that share a
stage (say, the drift draw in `drift` and `combined`) see identical
parameter values for the same message - ablation columns are therefore
directly comparable, not just statistically.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path

from .channel import (ChannelConfig, ClipStage, DriftStage, EqStage, GainStage,
                      NoiseStage, ReverbStage, RngState, apply_channel)
from .corpus import MAX_TOKENS, MIN_TOKENS, _gen_random_chars, generate_corpus
from .metrics import EvalRecord, EvalReport, aggregate
from .receiver import DEFAULT_DECODE, DecodeOptions, TemplateBank, build_template_bank, decode
from .seeding import SplitMix64, mix64
from .synth import synth_message
from .vocab import Vocab, build_vocab, detokenize, tokenize

EXPERIMENTS = ("snr_sweep", "noise_types", "length_scaling",
               "channel_ablation", "e2e")

# Evaluation-side drift range (the simulator's training-side default is
# wider; see DriftStage).
EVAL_DRIFT = (0.99, 1.01)


@dataclass
class ExperimentConfig:
    experiment: str
    message_count: int = 200
    seed: int = 7
    snr_list: tuple[float, ...] = (-10.0, -5.0, 0.0, 5.0, 10.0)
    include_clean: bool = True
    noise_kinds: tuple[str, ...] = ("white", "pink", "brown")
    length_list: tuple[int, ...] = (5, 10, 20, 40, 100)
    drop_convention: str = "drop_as_100"
    out_dir: Path | None = None
    decode_options: DecodeOptions = DEFAULT_DECODE

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment: {self.experiment}")
        if not self.snr_list and self.experiment == "snr_sweep":
            raise ValueError("snr_list must be non-empty")
        if not self.length_list and self.experiment == "length_scaling":
            raise ValueError("length_list must be non-empty")


# -- condition channel configs -------------------------------------------------

def clean_channel() -> ChannelConfig:
    return ChannelConfig.disabled()


def noise_only(kind: str, snr_db: float) -> ChannelConfig:
    cfg = ChannelConfig.disabled()
    return ChannelConfig(gain=cfg.gain, eq=cfg.eq, reverb=cfg.reverb,
                         clip=cfg.clip, drift=cfg.drift,
                         noise=NoiseStage(enabled=True, kind=kind,
                                          snr_db=(snr_db, snr_db)))


def reverb_only() -> ChannelConfig:
    cfg = ChannelConfig.disabled()
    return ChannelConfig(gain=cfg.gain, eq=cfg.eq, reverb=ReverbStage(enabled=True),
                         clip=cfg.clip, drift=cfg.drift, noise=cfg.noise)


def clip_only() -> ChannelConfig:
    cfg = ChannelConfig.disabled()
    return ChannelConfig(gain=cfg.gain, eq=cfg.eq, reverb=cfg.reverb,
                         clip=ClipStage(enabled=True, mode="hard", threshold=0.5),
                         drift=cfg.drift, noise=cfg.noise)


def drift_only() -> ChannelConfig:
    cfg = ChannelConfig.disabled()
    return ChannelConfig(gain=cfg.gain, eq=cfg.eq, reverb=cfg.reverb,
                         clip=cfg.clip, drift=DriftStage(enabled=True, factor=EVAL_DRIFT),
                         noise=cfg.noise)


def combined_channel() -> ChannelConfig:
    """All stages on with randomized parameters (evaluation drift range)."""
    return ChannelConfig(gain=GainStage(enabled=True), eq=EqStage(enabled=True),
                         reverb=ReverbStage(enabled=True),
                         clip=ClipStage(enabled=True, mode="hard", threshold=0.5),
                         drift=DriftStage(enabled=True, factor=EVAL_DRIFT),
                         noise=NoiseStage(enabled=True, kind="white",
                                          snr_db=(-5.0, 30.0)))


# -- message sources -----------------------------------------------------------

def corpus_messages(n: int, seed: int, vocab: Vocab) -> list[tuple[int, str, list[int]]]:
    manifest = generate_corpus(max(n, 10), seed)
    out = []
    for msg in manifest.messages[:n]:
        out.append((msg.id, msg.text, tokenize(msg.text, vocab)))
    return out


def fixed_length_messages(n: int, token_len: int, seed: int,
                          vocab: Vocab) -> list[tuple[int, str, list[int]]]:
    """Random-character messages of an exact token length."""
    rng = SplitMix64(mix64(seed, token_len))
    out = []
    for mid in range(n):
        text = _gen_random_chars(token_len, rng)
        out.append((mid, text, tokenize(text, vocab)))
    return out


# -- the measurement loop --------------------------------------------------------

def run_condition(items: list[tuple[int, str, list[int]]], ch: ChannelConfig,
                  seed: int, bank: TemplateBank, vocab: Vocab, condition: str,
                  drop_convention: str = "drop_as_100",
                  opts: DecodeOptions = DEFAULT_DECODE) -> EvalReport:
    """Encode, distort, decode and score one batch under one channel.

    Latency is wall-clock per message, file I/O excluded: encode covers
    tokenize + synthesis, decode covers matched filtering + detokenize.
    """
    records = []
    for mid, text, ids in items:
        t0 = time.perf_counter()
        wave = synth_message(ids)
        encode_ms = (time.perf_counter() - t0) * 1e3
        distorted = apply_channel(wave, ch, RngState.from_seed(mix64(seed, mid)))
        t0 = time.perf_counter()
        hyp_ids = decode(distorted, bank, opts)
        hyp = detokenize(hyp_ids, vocab)
        decode_ms = (time.perf_counter() - t0) * 1e3
        records.append(EvalRecord.from_strings(text, hyp, encode_ms, decode_ms))
    return aggregate(records, drop_convention, condition)


# -- experiments -----------------------------------------------------------------

def _snr_conditions(cfg: ExperimentConfig) -> list[tuple[str, float | None]]:
    conds: list[tuple[str, float | None]] = [
        (f"{s:+.0f} dB", s) for s in sorted(cfg.snr_list)]
    if cfg.include_clean:
        conds.append(("clean", None))
    return conds


def run_snr_sweep(cfg: ExperimentConfig, bank: TemplateBank,
                  vocab: Vocab) -> list[EvalReport]:
    items = corpus_messages(cfg.message_count, cfg.seed, vocab)
    reports = []
    for kind in cfg.noise_kinds:
        for label, snr in _snr_conditions(cfg):
            ch = clean_channel() if snr is None else noise_only(kind, snr)
            reports.append(run_condition(items, ch, cfg.seed, bank, vocab,
                                         f"{kind} {label}", cfg.drop_convention,
                                         cfg.decode_options))
    return reports


def run_noise_types(cfg: ExperimentConfig, bank: TemplateBank,
                    vocab: Vocab, snr_db: float = 5.0) -> list[EvalReport]:
    items = corpus_messages(cfg.message_count, cfg.seed, vocab)
    return [run_condition(items, noise_only(kind, snr_db), cfg.seed, bank, vocab,
                          f"{kind} {snr_db:+.0f} dB", cfg.drop_convention,
                          cfg.decode_options)
            for kind in cfg.noise_kinds]


def run_length_scaling(cfg: ExperimentConfig, bank: TemplateBank, vocab: Vocab,
                       snr_db: float = 5.0) -> list[EvalReport]:
    """CER vs message length at fixed white-noise SNR.

    Message counts are scaled per length to equalize the decoded-window
    budget (message_count * 20 windows per condition), so short-message
    estimates are not drowned in sampling noise.
    """
    window_budget = cfg.message_count * 20
    reports = []
    for length in cfg.length_list:
        n = max(10, round(window_budget / length))
        items = fixed_length_messages(n, length, cfg.seed, vocab)
        reports.append(run_condition(items, noise_only("white", snr_db),
                                     cfg.seed, bank, vocab,
                                     f"len {length} ({n} msgs)",
                                     cfg.drop_convention, cfg.decode_options))
    return reports


ABLATION_CONDITIONS = ("clean", "noise +5 dB", "noise +0 dB", "reverb",
                       "clipping", "drift", "combined")


def run_channel_ablation(cfg: ExperimentConfig, bank: TemplateBank,
                         vocab: Vocab) -> list[EvalReport]:
    items = corpus_messages(cfg.message_count, cfg.seed, vocab)
    channels = {
        "clean": clean_channel(),
        "noise +5 dB": noise_only("white", 5.0),
        "noise +0 dB": noise_only("white", 0.0),
        "reverb": reverb_only(),
        "clipping": clip_only(),
        "drift": drift_only(),
        "combined": combined_channel(),
    }
    return [run_condition(items, channels[name], cfg.seed, bank, vocab, name,
                          cfg.drop_convention, cfg.decode_options)
            for name in ABLATION_CONDITIONS]


def run_e2e(cfg: ExperimentConfig, bank: TemplateBank, vocab: Vocab,
            snr_db: float = 5.0) -> list[EvalReport]:
    items = corpus_messages(cfg.message_count, cfg.seed, vocab)
    kind = cfg.noise_kinds[0] if cfg.noise_kinds else "white"
    return [run_condition(items, noise_only(kind, snr_db), cfg.seed, bank, vocab,
                          f"e2e {kind} {snr_db:+.0f} dB", cfg.drop_convention,
                          cfg.decode_options)]


def run_experiment(cfg: ExperimentConfig, bank: TemplateBank | None = None,
                   vocab: Vocab | None = None) -> list[EvalReport]:
    """Dispatch an experiment and optionally write one JSON per condition."""
    vocab = vocab or build_vocab()
    bank = bank or build_template_bank(vocab)
    runner = {
        "snr_sweep": run_snr_sweep,
        "noise_types": run_noise_types,
        "length_scaling": run_length_scaling,
        "channel_ablation": run_channel_ablation,
        "e2e": run_e2e,
    }[cfg.experiment]
    reports = runner(cfg, bank, vocab)
    if cfg.out_dir is not None:
        out = Path(cfg.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for report in reports:
            safe = report.condition.replace(" ", "_").replace("+", "p")
            (out / f"report_{cfg.experiment}_{safe}.json").write_text(report.to_json())
    return reports
