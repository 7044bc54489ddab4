"""Sequence-error metrics and evaluation report aggregation.

CER is measured over surface characters after detokenization, so a
multi-character command like ``<STOP>`` contributes six character slots;
WER splits on whitespace. Silent drops are scored under one of two
conventions and every report names the convention it used:

* ``drop_as_100`` - a dropped message counts as 100% CER / 100% WER;
* ``drop_as_excluded`` - dropped messages leave the error averages
  entirely (their share is visible in ``dropped_count``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from . import kernels

DROP_CONVENTIONS = ("drop_as_100", "drop_as_excluded")


def edit_distance(a, b) -> int:
    """Unit-cost Levenshtein distance between two sequences.

    Accepts strings or any sequences of hashable symbols; symbols are
    mapped onto a shared integer code space before the DP kernel runs.
    """
    codes: dict = {}
    ca = np.fromiter((codes.setdefault(s, len(codes)) for s in a),
                     dtype=np.int64, count=len(a))
    cb = np.fromiter((codes.setdefault(s, len(codes)) for s in b),
                     dtype=np.int64, count=len(b))
    return kernels.levenshtein_codes(ca, cb)


def cer(ref: str, hyp: str) -> float:
    """Character error rate: edit distance / len(ref). May exceed 1.

    Raises:
        ValueError: if the reference is empty.
    """
    if len(ref) == 0:
        raise ValueError("undefined CER: empty reference")
    return edit_distance(ref, hyp) / len(ref)


def wer(ref: str, hyp: str) -> float:
    """Word error rate over whitespace-split words.

    Raises:
        ValueError: if the reference contains no words.
    """
    ref_words = ref.split()
    if not ref_words:
        raise ValueError("undefined WER: reference has no words")
    return edit_distance(ref_words, hyp.split()) / len(ref_words)


@dataclass
class EvalRecord:
    ref: str
    hyp: str
    cer: float
    wer: float
    exact: bool
    encode_ms: float = 0.0
    decode_ms: float = 0.0
    dropped: bool = False

    @classmethod
    def from_strings(cls, ref: str, hyp: str, encode_ms: float = 0.0,
                     decode_ms: float = 0.0) -> "EvalRecord":
        c = cer(ref, hyp)
        return cls(ref=ref, hyp=hyp, cer=c, wer=wer(ref, hyp), exact=c == 0.0,
                   encode_ms=encode_ms, decode_ms=decode_ms)

    @classmethod
    def drop(cls, ref: str) -> "EvalRecord":
        return cls(ref=ref, hyp="", cer=1.0, wer=1.0, exact=False, dropped=True)


@dataclass
class EvalReport:
    """Per-condition aggregate; all numbers recomputable from records."""

    condition: str
    drop_convention: str
    records: list[EvalRecord]
    mean_cer: float
    mean_wer: float
    em_rate: float
    latency_p50_ms: float
    latency_p95_ms: float
    counted: int
    dropped_count: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["records"] = [asdict(r) for r in self.records]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        d = json.loads(text)
        d["records"] = [EvalRecord(**r) for r in d["records"]]
        return cls(**d)


def aggregate(records: list[EvalRecord], drop_convention: str = "drop_as_100",
              condition: str = "") -> EvalReport:
    """Fold records into an EvalReport under the given drop convention.

    Latency percentiles cover the end-to-end (encode + decode) time of
    all records, dropped or not; error statistics follow the convention.

    Raises:
        ValueError: on empty input or unknown convention.
    """
    if not records:
        raise ValueError("no records to aggregate")
    if drop_convention not in DROP_CONVENTIONS:
        raise ValueError(f"unknown drop convention: {drop_convention}")
    if drop_convention == "drop_as_100":
        counted = [(1.0, 1.0, False) if r.dropped else (r.cer, r.wer, r.exact)
                   for r in records]
    else:
        counted = [(r.cer, r.wer, r.exact) for r in records if not r.dropped]
    dropped_count = sum(r.dropped for r in records)
    if counted:
        cers, wers, exacts = zip(*counted)
        mean_cer = float(np.mean(cers))
        mean_wer = float(np.mean(wers))
        em_rate = float(np.mean([1.0 if e else 0.0 for e in exacts]))
    else:
        mean_cer = mean_wer = em_rate = float("nan")
    latency = np.array([r.encode_ms + r.decode_ms for r in records])
    return EvalReport(
        condition=condition,
        drop_convention=drop_convention,
        records=list(records),
        mean_cer=mean_cer,
        mean_wer=mean_wer,
        em_rate=em_rate,
        latency_p50_ms=float(np.percentile(latency, 50)),
        latency_p95_ms=float(np.percentile(latency, 95)),
        counted=len(counted),
        dropped_count=int(dropped_count),
    )


def format_report_table(reports: list[EvalReport]) -> str:
    """Aligned text table, column order CER, WER, EM, Latency."""
    header = f"{'Condition':<22} {'CER':>8} {'WER':>8} {'EM':>8} {'Latency':>12}"
    lines = [header, "-" * len(header)]
    for r in reports:
        lines.append(
            f"{r.condition:<22} {r.mean_cer * 100:>7.1f}% {r.mean_wer * 100:>7.1f}% "
            f"{r.em_rate * 100:>7.1f}% {r.latency_p50_ms:>9.1f} ms")
    return "\n".join(lines)


# Published schema for EvalReport JSON artifacts.
REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["condition", "drop_convention", "records", "mean_cer",
                 "mean_wer", "em_rate", "latency_p50_ms", "latency_p95_ms",
                 "counted", "dropped_count"],
    "properties": {
        "condition": {"type": "string"},
        "drop_convention": {"enum": list(DROP_CONVENTIONS)},
        "mean_cer": {"type": "number"},
        "mean_wer": {"type": "number"},
        "em_rate": {"type": "number", "minimum": 0, "maximum": 1},
        "latency_p50_ms": {"type": "number", "minimum": 0},
        "latency_p95_ms": {"type": "number", "minimum": 0},
        "counted": {"type": "integer", "minimum": 0},
        "dropped_count": {"type": "integer", "minimum": 0},
        "records": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["ref", "hyp", "cer", "wer", "exact",
                             "encode_ms", "decode_ms", "dropped"],
                "properties": {
                    "ref": {"type": "string"},
                    "hyp": {"type": "string"},
                    "cer": {"type": "number", "minimum": 0},
                    "wer": {"type": "number", "minimum": 0},
                    "exact": {"type": "boolean"},
                    "encode_ms": {"type": "number", "minimum": 0},
                    "decode_ms": {"type": "number", "minimum": 0},
                    "dropped": {"type": "boolean"},
                },
            },
        },
    },
}
