"""The fixed 128-symbol alphabet and its text mapping.

Token id assignment is canonical and frozen: blank=0, then pad/SOS/EOS/
space/UNK (1-5), lowercase letters (6-31), digits (32-41), 16 punctuation
marks in ASCII order (42-57), 44 bracketed robot commands (58-101). Ids
102-127 are reserved-unused placeholders that keep the id space at 128;
they carry synthesizable surfaces but are never produced by the corpus
generator. Everything downstream (chip frequencies, corpora, decoders)
depends on this ordering staying put.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

TokenId = int

VOCAB_SIZE = 128

BLANK_ID = 0
PAD_ID = 1
SOS_ID = 2
EOS_ID = 3
SPACE_ID = 4
UNK_ID = 5

# Surfaces of the ids that render as empty text when detokenizing.
_SILENT_IDS = frozenset({PAD_ID, SOS_ID, EOS_ID})

LETTERS = "abcdefghijklmnopqrstuvwxyz"
DIGITS = "0123456789"

# The 16 most common ASCII marks, in ASCII order.
PUNCTUATION = ('!', '"', '#', '%', '&', "'", '(', ')',
               ',', '-', '.', '/', ':', ';', '?', '@')

# 44 robot command verbs; the first three are the conventional core set,
# the rest round out a plausible mobile-manipulator command vocabulary.
COMMAND_WORDS = (
    "STOP", "ACK", "SCAN",
    "GO", "HALT", "NACK", "MOVE", "TURN", "LEFT", "RIGHT",
    "FORWARD", "BACK", "DOCK", "UNDOCK", "CHARGE", "STATUS",
    "PING", "PONG", "HOME", "FOLLOW", "WAIT", "RESUME",
    "PAUSE", "LIFT", "DROP", "GRAB", "RELEASE", "ALIGN",
    "ROTATE", "CALIBRATE", "REPORT", "SYNC", "QUERY", "CONFIRM",
    "ABORT", "RESET", "SLEEP", "WAKE", "PATROL", "RETURN",
    "DELIVER", "PICKUP", "AVOID", "MAP",
)

CLASSES = ("letter", "digit", "punct", "special", "command", "reserved")


@dataclass(frozen=True)
class VocabEntry:
    id: TokenId
    surface: str
    cls: str


class Vocab:
    """Immutable token table with bidirectional surface lookup."""

    def __init__(self, entries: list[VocabEntry]):
        if len(entries) != VOCAB_SIZE:
            raise ValueError(f"expected {VOCAB_SIZE} entries, got {len(entries)}")
        surfaces = [e.surface for e in entries]
        if len(set(surfaces)) != len(surfaces):
            raise ValueError("surface strings must be unique")
        self.entries = tuple(entries)
        self._by_surface = {e.surface: e.id for e in entries}
        self._by_id = {e.id: e for e in entries}
        # surfaces grouped by first character, longest first, for tokenize()
        by_first: dict[str, list[str]] = {}
        for s in surfaces:
            by_first.setdefault(s[0], []).append(s)
        self._by_first = {c: sorted(ss, key=len, reverse=True)
                          for c, ss in by_first.items()}

    def __len__(self) -> int:
        return len(self.entries)

    def id_of(self, surface: str) -> TokenId:
        return self._by_surface[surface]

    def surface_of(self, token: TokenId) -> str:
        return self._by_id[token].surface

    def class_of(self, token: TokenId) -> str:
        return self._by_id[token].cls

    def class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for e in self.entries:
            counts[e.cls] = counts.get(e.cls, 0) + 1
        return counts

    # -- JSON interchange ---------------------------------------------------

    def to_json(self) -> str:
        rows = [{"id": e.id, "surface": e.surface, "class": e.cls}
                for e in self.entries]
        return json.dumps(rows, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "Vocab":
        rows = json.loads(text)
        return cls([VocabEntry(r["id"], r["surface"], r["class"]) for r in rows])


def build_vocab() -> Vocab:
    """Construct the canonical 128-entry table.

    Deterministic and platform-independent; the same table is built on
    every call and every run.
    """
    entries = [
        VocabEntry(BLANK_ID, "<BLANK>", "special"),
        VocabEntry(PAD_ID, "<PAD>", "special"),
        VocabEntry(SOS_ID, "<SOS>", "special"),
        VocabEntry(EOS_ID, "<EOS>", "special"),
        VocabEntry(SPACE_ID, " ", "special"),
        VocabEntry(UNK_ID, "<UNK>", "special"),
    ]
    next_id = 6
    for ch in LETTERS:
        entries.append(VocabEntry(next_id, ch, "letter"))
        next_id += 1
    for ch in DIGITS:
        entries.append(VocabEntry(next_id, ch, "digit"))
        next_id += 1
    for ch in PUNCTUATION:
        entries.append(VocabEntry(next_id, ch, "punct"))
        next_id += 1
    for word in COMMAND_WORDS:
        entries.append(VocabEntry(next_id, f"<{word}>", "command"))
        next_id += 1
    while next_id < VOCAB_SIZE:
        entries.append(VocabEntry(next_id, f"<RESERVED_{next_id}>", "reserved"))
        next_id += 1
    return Vocab(entries)


def tokenize(text: str, v: Vocab) -> list[TokenId]:
    """Map text to token ids with greedy longest-match segmentation.

    Bracketed surfaces (commands, specials) are consumed whole; any
    character that starts no known surface maps to UNK.
    """
    ids: list[TokenId] = []
    pos = 0
    n = len(text)
    while pos < n:
        matched = False
        for surface in v._by_first.get(text[pos], ()):
            if text.startswith(surface, pos):
                ids.append(v.id_of(surface))
                pos += len(surface)
                matched = True
                break
        if not matched:
            ids.append(UNK_ID)
            pos += 1
    return ids


def detokenize(ids: list[TokenId], v: Vocab) -> str:
    """Concatenate token surfaces; pad/SOS/EOS render as empty strings."""
    parts = []
    for t in ids:
        if not 0 <= t < VOCAB_SIZE:
            raise ValueError(f"invalid token id: {t}")
        if t in _SILENT_IDS:
            continue
        parts.append(v.surface_of(t))
    return "".join(parts)
