import json

import pytest
from hypothesis import given, strategies as st

from chiplink import vocab as V
from chiplink.vocab import Vocab, build_vocab, detokenize, tokenize


def test_table_has_128_entries(vocab):
    assert len(vocab.entries) == 128
    assert len(vocab) == 128


def test_class_partition(vocab):
    counts = vocab.class_counts()
    assert counts["letter"] == 26
    assert counts["digit"] == 10
    assert counts["punct"] == 16
    assert counts["special"] == 6
    assert counts["command"] == 44
    # ids beyond the populated categories are reserved placeholders
    assert counts["reserved"] == 26
    assert sum(counts.values()) == 128


def test_known_entries(vocab):
    assert vocab.class_of(vocab.id_of("a")) == "letter"
    assert vocab.class_of(vocab.id_of("<STOP>")) == "command"
    assert vocab.id_of("<BLANK>") == V.BLANK_ID == 0
    assert vocab.id_of(" ") == V.SPACE_ID
    assert vocab.surface_of(V.UNK_ID) == "<UNK>"


def test_stable_ordering():
    a, b = build_vocab(), build_vocab()
    assert [e.surface for e in a.entries] == [e.surface for e in b.entries]
    assert [e.id for e in a.entries] == list(range(128))


def test_tokenize_per_character(vocab):
    assert tokenize("ab", vocab) == [vocab.id_of("a"), vocab.id_of("b")]


def test_tokenize_longest_match(vocab):
    got = tokenize("<STOP> a", vocab)
    assert got == [vocab.id_of("<STOP>"), V.SPACE_ID, vocab.id_of("a")]


def _oracle_longest_match(text, vocab):
    """Independent greedy segmentation over the raw table."""
    all_surfaces = sorted((e.surface for e in vocab.entries), key=len, reverse=True)
    out, pos = [], 0
    while pos < len(text):
        for s in all_surfaces:
            if text.startswith(s, pos):
                out.append(vocab.id_of(s))
                pos += len(s)
                break
        else:
            out.append(V.UNK_ID)
            pos += 1
    return out


@pytest.mark.parametrize("text", [
    "<STOP> a", "go <ACK><ACK> now", "x<RESERVED_105>y", "<STOPX 9",
    "a<BLANK>b", "<SCAN>12.5%", "", "   ", "<MAP><MOVE>",
])
def test_tokenize_matches_independent_oracle(text, vocab):
    assert tokenize(text, vocab) == _oracle_longest_match(text, vocab)


def test_unknown_char_maps_to_unk(vocab):
    assert tokenize("α", vocab) == [V.UNK_ID]
    assert tokenize("A", vocab) == [V.UNK_ID]  # uppercase not in the table


def test_detokenize_empty_and_silent(vocab):
    assert detokenize([], vocab) == ""
    assert detokenize([V.PAD_ID], vocab) == ""
    assert detokenize([V.SOS_ID, V.EOS_ID], vocab) == ""


def test_detokenize_rejects_out_of_range(vocab):
    with pytest.raises(ValueError, match="invalid token id"):
        detokenize([128], vocab)
    with pytest.raises(ValueError, match="invalid token id"):
        detokenize([-1], vocab)


_ROUNDTRIP_SURFACES = [e.surface for e in build_vocab().entries
                       if e.id not in (V.PAD_ID, V.SOS_ID, V.EOS_ID)]


@given(st.lists(st.sampled_from(_ROUNDTRIP_SURFACES), max_size=30))
def test_roundtrip_over_known_surfaces(surfaces):
    v = build_vocab()
    s = "".join(surfaces)
    assert detokenize(tokenize(s, v), v) == s


@given(st.lists(st.integers(0, 127).filter(
    lambda t: t not in (V.PAD_ID, V.SOS_ID, V.EOS_ID, V.UNK_ID)), max_size=30))
def test_bijection_on_id_sequences(ids):
    v = build_vocab()
    assert tokenize(detokenize(ids, v), v) == ids


def test_json_roundtrip(vocab):
    text = vocab.to_json()
    rows = json.loads(text)
    assert len(rows) == 128
    assert rows[0] == {"id": 0, "surface": "<BLANK>", "class": "special"}
    clone = Vocab.from_json(text)
    assert clone.entries == vocab.entries


def test_duplicate_surfaces_rejected(vocab):
    entries = list(vocab.entries)
    entries[10] = type(entries[10])(10, entries[11].surface, "letter")
    with pytest.raises(ValueError, match="unique"):
        Vocab(entries)
