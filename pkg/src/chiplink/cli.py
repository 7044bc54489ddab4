"""Command-line surface: encode, decode, simulate, gen-corpus, evaluate.

Config precedence everywhere: explicit flags override a --config JSON
file, which overrides built-in defaults. All randomness is pinned by
--seed, so any command run twice with the same flags produces identical
WAV/JSONL artifacts (timing fields inside evaluation reports are the one
documented exception - they are wall-clock measurements).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import kernels
from .channel import (ChannelConfig, RngState, apply_channel_with_draws)
from .corpus import generate_corpus, render_corpus
from .experiments import ExperimentConfig, EXPERIMENTS, run_experiment
from .metrics import format_report_table
from .receiver import DecodeOptions, build_template_bank, decode_detailed
from .synth import read_wav, synth_message, write_wav
from .vocab import build_vocab, detokenize, tokenize


def _parse_range(text: str) -> tuple[float, float]:
    parts = [float(p) for p in text.split(",")]
    if len(parts) == 1:
        return (parts[0], parts[0])
    if len(parts) == 2:
        return (parts[0], parts[1])
    raise argparse.ArgumentTypeError(f"expected LO,HI or a single value: {text!r}")


def _channel_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("channel overrides")
    g.add_argument("--config", type=Path, help="channel config JSON file")
    g.add_argument("--gain-db", type=_parse_range, metavar="LO,HI")
    g.add_argument("--no-gain", action="store_true")
    g.add_argument("--eq-center", type=_parse_range, metavar="LO,HI")
    g.add_argument("--eq-gain", type=_parse_range, metavar="LO,HI")
    g.add_argument("--eq-q", type=_parse_range, metavar="LO,HI")
    g.add_argument("--no-eq", action="store_true")
    g.add_argument("--reverb-tau", type=float)
    g.add_argument("--reverb-delay-ms", type=float)
    g.add_argument("--no-reverb", action="store_true")
    g.add_argument("--clip-mode", choices=("hard", "soft", "none"))
    g.add_argument("--clip-threshold", type=float)
    g.add_argument("--no-clip", action="store_true")
    g.add_argument("--drift", type=_parse_range, metavar="LO,HI")
    g.add_argument("--no-drift", action="store_true")
    g.add_argument("--noise", choices=("white", "pink", "brown", "mixed"))
    g.add_argument("--snr", type=_parse_range, metavar="LO,HI")
    g.add_argument("--no-noise", action="store_true")


def _build_channel(args: argparse.Namespace) -> ChannelConfig:
    base = (ChannelConfig.from_json_file(args.config).to_dict()
            if args.config else ChannelConfig().to_dict())

    def put(stage, key, value):
        if value is not None:
            base[stage][key] = value

    put("gain", "db", args.gain_db)
    put("eq", "center_hz", args.eq_center)
    put("eq", "gain_db", args.eq_gain)
    put("eq", "q", args.eq_q)
    put("reverb", "tau", args.reverb_tau)
    put("reverb", "delay_ms", args.reverb_delay_ms)
    put("clip", "mode", args.clip_mode)
    put("clip", "threshold", args.clip_threshold)
    put("drift", "factor", args.drift)
    put("noise", "kind", args.noise)
    put("noise", "snr_db", args.snr)
    for stage, flag in (("gain", args.no_gain), ("eq", args.no_eq),
                        ("reverb", args.no_reverb), ("clip", args.no_clip),
                        ("drift", args.no_drift), ("noise", args.no_noise)):
        if flag:
            base[stage]["enabled"] = False
    return ChannelConfig.from_dict(base)


def _decode_options(args: argparse.Namespace) -> DecodeOptions:
    kwargs = {}
    if getattr(args, "drift_search", None):
        kwargs["drift_search"] = tuple(
            float(f) for f in args.drift_search.split(","))
    if getattr(args, "offset_search", None) is not None:
        kwargs["offset_search"] = args.offset_search
    if getattr(args, "score_floor", None) is not None:
        kwargs["score_floor"] = args.score_floor
    return DecodeOptions(**kwargs)


# -- commands -------------------------------------------------------------------

def cmd_encode(args: argparse.Namespace) -> int:
    vocab = build_vocab()
    ids = tokenize(args.text, vocab)
    if not ids:
        raise ValueError("nothing to encode: empty text")
    wave = synth_message(ids)
    write_wav(args.out, wave)
    print(f"{args.out}: {len(ids)} tokens, {len(wave.samples)} samples")
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    vocab = build_vocab()
    wave = read_wav(args.wav)
    bank = build_template_bank(vocab, wave.sample_rate)
    result = decode_detailed(wave, bank, _decode_options(args))
    text = detokenize(result.tokens, vocab)
    print(text)
    if args.json:
        payload = {
            "tokens": result.tokens,
            "surfaces": [vocab.surface_of(t) for t in result.tokens],
            "scores": [round(float(s), 6) for s in result.scores],
            "drift": result.drift,
            "offset": result.offset,
            "text": text,
        }
        Path(args.json).write_text(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    wave = read_wav(args.infile)
    cfg = _build_channel(args)
    out, draws = apply_channel_with_draws(wave, cfg, RngState.from_seed(args.seed))
    write_wav(args.out, out)
    print(json.dumps({"out": str(args.out), "draws": draws}, sort_keys=True))
    return 0


def cmd_gen_corpus(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = generate_corpus(args.n, args.seed)
    manifest_path = out_dir / "manifest.jsonl"
    manifest_path.write_text(manifest.to_jsonl())
    print(f"{manifest_path}: {len(manifest.messages)} messages")
    if args.render:
        result = render_corpus(manifest, _build_channel(args), out_dir)
        print(f"{result.index_path}: rendered {result.rendered} wavs")
        for err in result.errors:
            print(f"render error: {err}", file=sys.stderr)
        if result.errors:
            return 1
    return 0


def cmd_evaluate(args: argparse.Namespace) -> int:
    kernels.warmup()  # keep JIT compilation out of the latency numbers
    drop = {"100": "drop_as_100", "exclude": "drop_as_excluded"}[args.drop_convention]
    cfg = ExperimentConfig(
        experiment=args.experiment,
        message_count=args.n,
        seed=args.seed,
        snr_list=tuple(float(s) for s in args.snrs.split(",")) if args.snrs
        else ExperimentConfig.__dataclass_fields__["snr_list"].default,
        noise_kinds=(args.noise,) if args.noise else ("white", "pink", "brown"),
        length_list=tuple(int(v) for v in args.lengths.split(",")) if args.lengths
        else ExperimentConfig.__dataclass_fields__["length_list"].default,
        drop_convention=drop,
        out_dir=Path(args.out_dir) if args.out_dir else None,
        decode_options=_decode_options(args),
    )
    reports = run_experiment(cfg)
    print(format_report_table(reports))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiplink",
        description="Acoustic symbol transport over multi-harmonic tone chips")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="text -> chip-stream WAV")
    p.add_argument("--text", required=True)
    p.add_argument("--out", required=True, type=Path)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="WAV -> text (+ JSON detail)")
    p.add_argument("wav", type=Path)
    p.add_argument("--json", type=Path, help="write decode detail JSON here")
    p.add_argument("--drift-search", help="comma list of drift factors (must include 1.0)")
    p.add_argument("--offset-search", type=int, help="max start offset to scan, samples")
    p.add_argument("--score-floor", type=float)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="WAV -> channel -> WAV")
    p.add_argument("infile", type=Path)
    p.add_argument("--out", required=True, type=Path)
    p.add_argument("--seed", type=int, default=0)
    _channel_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("gen-corpus", help="deterministic message corpus (+ audio)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--render", action="store_true", help="also render WAVs")
    _channel_flags(p)
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("evaluate", help="run an experiment grid")
    p.add_argument("--experiment", choices=EXPERIMENTS, required=True)
    p.add_argument("--n", type=int, default=200, help="messages per condition")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--snrs", help="comma list of SNR dB values")
    p.add_argument("--noise", choices=("white", "pink", "brown", "mixed"))
    p.add_argument("--lengths", help="comma list of token lengths")
    p.add_argument("--out-dir")
    p.add_argument("--drop-convention", choices=("100", "exclude"), default="100")
    p.add_argument("--drift-search")
    p.add_argument("--offset-search", type=int)
    p.add_argument("--score-floor", type=float)
    p.set_defaults(func=cmd_evaluate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
