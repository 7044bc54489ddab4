import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, strategies as st

from chiplink.metrics import (DROP_CONVENTIONS, EvalRecord, EvalReport,
                              REPORT_SCHEMA, aggregate, cer, edit_distance,
                              format_report_table, wer)


def brute_force_distance(a, b):
    """Independent recursive oracle (memoized for speed only)."""
    memo = {}

    def rec(x, y):
        if not x:
            return len(y)
        if not y:
            return len(x)
        key = (x, y)
        if key not in memo:
            if x[0] == y[0]:
                memo[key] = rec(x[1:], y[1:])
            else:
                memo[key] = 1 + min(rec(x[1:], y), rec(x, y[1:]), rec(x[1:], y[1:]))
        return memo[key]

    return rec(a, b)


# -- edit distance ----------------------------------------------------------------

def test_edit_distance_examples():
    assert edit_distance("abc", "abc") == 0
    assert edit_distance("kitten", "sitting") == brute_force_distance("kitten", "sitting") == 3
    assert edit_distance("", "ab") == 2
    assert edit_distance("ab", "") == 2


def test_edit_distance_on_token_lists():
    assert edit_distance([1, 2, 3], [1, 3]) == 1
    assert edit_distance(["go", "to", "base"], ["go", "to", "dock"]) == 1


short = st.text(alphabet="abc", max_size=7)


@given(short, short)
def test_dp_matches_brute_force(a, b):
    assert edit_distance(a, b) == brute_force_distance(a, b)


@given(short, short)
def test_edit_distance_symmetry(a, b):
    assert edit_distance(a, b) == edit_distance(b, a)


@given(short, short, short)
def test_edit_distance_triangle_inequality(a, b, c):
    assert edit_distance(a, c) <= edit_distance(a, b) + edit_distance(b, c)


# -- CER / WER ---------------------------------------------------------------------

def test_cer_examples():
    assert cer("abc", "abd") == pytest.approx(1 / 3)
    assert cer("abc", "abc") == 0.0
    assert cer("ab", "abcd") == 1.0  # two insertions over reference length 2


def test_cer_self_zero():
    for s in ("x", "<STOP> go", "a b c"):
        assert cer(s, s) == 0.0


def test_cer_rejects_empty_reference():
    with pytest.raises(ValueError, match="undefined CER"):
        cer("", "abc")


def test_wer_examples():
    assert wer("go to base", "go to dock") == pytest.approx(1 / 3)
    assert wer("go to base", "go to base") == 0.0
    assert wer("a b", "") == 1.0


def test_wer_rejects_wordless_reference():
    with pytest.raises(ValueError, match="undefined WER"):
        wer("   ", "abc")


# -- aggregation ---------------------------------------------------------------------

def test_aggregate_single_perfect_record():
    rec = EvalRecord.from_strings("abc", "abc", encode_ms=1.0, decode_ms=2.0)
    report = aggregate([rec], condition="clean")
    assert report.mean_cer == 0.0
    assert report.em_rate == 1.0
    assert report.latency_p50_ms == pytest.approx(3.0)


def test_drop_conventions():
    records = [EvalRecord.from_strings("abc", "abc"), EvalRecord.drop("xyz")]
    as_100 = aggregate(records, "drop_as_100")
    assert as_100.mean_cer == pytest.approx(0.5)  # (0 + 100%) / 2
    assert as_100.em_rate == pytest.approx(0.5)
    excluded = aggregate(records, "drop_as_excluded")
    assert excluded.mean_cer == 0.0
    assert excluded.counted == 1
    assert excluded.dropped_count == 1


def test_aggregate_order_invariant():
    gen = np.random.default_rng(0)
    records = [EvalRecord.from_strings("abcd", "abcx"[:int(gen.integers(1, 5))])
               for _ in range(10)]
    fwd = aggregate(records)
    rev = aggregate(records[::-1])
    assert fwd.mean_cer == rev.mean_cer
    assert fwd.mean_wer == rev.mean_wer
    assert fwd.em_rate == rev.em_rate


def test_aggregate_rejects_empty_and_unknown():
    with pytest.raises(ValueError):
        aggregate([])
    with pytest.raises(ValueError):
        aggregate([EvalRecord.from_strings("a", "a")], "drop_as_zero")


def test_exact_flag_consistent_with_cer():
    rec = EvalRecord.from_strings("abc", "abd")
    assert rec.exact is False and rec.cer > 0
    rec2 = EvalRecord.from_strings("abc", "abc")
    assert rec2.exact is True and rec2.cer == 0


# -- report serialization ---------------------------------------------------------------

def _sample_report():
    records = [EvalRecord.from_strings("go home", "go home", 1.0, 2.0),
               EvalRecord.from_strings("go home", "go hom", 1.0, 2.5)]
    return aggregate(records, condition="white +5 dB")


def test_report_json_matches_schema():
    report = _sample_report()
    payload = json.loads(report.to_json())
    jsonschema.validate(payload, REPORT_SCHEMA)


def test_report_json_roundtrip():
    report = _sample_report()
    back = EvalReport.from_json(report.to_json())
    assert back == report


def test_report_table_column_order():
    table = format_report_table([_sample_report()])
    header = table.splitlines()[0]
    assert header.index("CER") < header.index("WER") < header.index("EM") \
        < header.index("Latency")
    assert "white +5 dB" in table
