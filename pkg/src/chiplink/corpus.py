"""Deterministic message corpus generation and audio rendering.

Corpora mix four message categories at fixed weights: command templates
(60%), general English phrases (20%), pure command sequences (10%) and
random character strings (10%), with token lengths uniform over [3, 40]
and an 80/10/10 train/val/test split. All draws go through the portable
splitmix64 stream, so a (n, seed) pair pins the corpus byte for byte in
any implementation.

Rendering materializes one WAV per message (synthesis followed by the
channel simulator, seeded per message with mix64(corpus seed, message
id)) plus a JSONL index recording the exact channel parameter draws.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

from .channel import ChannelConfig, RngState, apply_channel_with_draws
from .seeding import SplitMix64, mix64
from .synth import synth_message, write_wav
from .vocab import COMMAND_WORDS, DIGITS, LETTERS, PUNCTUATION, Vocab, build_vocab, tokenize

GENERATOR_VERSION = "1"

CATEGORIES = ("command_template", "english", "command_seq", "random_chars")
CATEGORY_WEIGHTS = (0.60, 0.20, 0.10, 0.10)
SPLITS = ("train", "val", "test")
SPLIT_WEIGHTS = (0.80, 0.10, 0.10)

MIN_TOKENS = 3
MAX_TOKENS = 40

# Small English lexicon (lowercase, letters only) for the phrase sampler.
WORDS = (
    "a", "i", "the", "and", "to", "of", "in", "is", "it", "on", "at", "we",
    "go", "up", "all", "out", "now", "new", "old", "box", "bay", "arm",
    "move", "turn", "left", "back", "stop", "wait", "open", "shut", "load",
    "send", "path", "dock", "room", "door", "wall", "line", "zone", "area",
    "home", "base", "unit", "task", "plan", "scan", "grid", "node", "item",
    "robot", "check", "clear", "front", "right", "floor", "table", "route",
    "speed", "power", "level", "start", "ready", "again", "ahead", "avoid",
    "return", "charge", "signal", "status", "report", "target", "object",
    "sensor", "camera", "battery", "forward", "station", "corridor",
    "position", "obstacle", "delivery",
)

# Seed phrases for the word-level bigram chain; transitions are built
# once at import so sampling is a pure function of the stream.
_SEED_PHRASES = (
    "move to the charging station",
    "go back to base now",
    "the robot is ready",
    "check the battery level",
    "scan the area ahead",
    "turn left at the door",
    "wait at the dock",
    "report status to base",
    "avoid the obstacle on the left",
    "return to home position",
    "the path is clear",
    "open the bay door",
    "deliver the item to the table",
    "power up all sensors",
    "start the new task now",
    "the target is in the zone",
    "go forward and stop at the wall",
    "send the plan to the unit",
    "the camera is on",
    "check the route to the station",
)


def _build_bigrams() -> dict[str, tuple[str, ...]]:
    table: dict[str, list[str]] = {}
    for phrase in _SEED_PHRASES:
        ws = phrase.split()
        for prev, nxt in zip(ws, ws[1:]):
            table.setdefault(prev, []).append(nxt)
    return {k: tuple(v) for k, v in table.items()}


_BIGRAMS = _build_bigrams()
_STARTERS = tuple(p.split()[0] for p in _SEED_PHRASES)
_WORDS_BY_LEN: dict[int, tuple[str, ...]] = {}
for _w in WORDS:
    _WORDS_BY_LEN.setdefault(len(_w), ())
    _WORDS_BY_LEN[len(_w)] += (_w,)

_SINGLE_CHARS = tuple(LETTERS) + tuple(DIGITS) + PUNCTUATION + (" ",)


@dataclass
class Message:
    id: int
    text: str
    category: str
    token_len: int


@dataclass
class Manifest:
    messages: list[Message]
    splits: list[str]  # parallel to messages
    seed: int

    def split_of(self, message_id: int) -> str:
        return self.splits[message_id]

    def to_jsonl(self) -> str:
        lines = [json.dumps({"type": "header", "generator_version": GENERATOR_VERSION,
                             "seed": self.seed, "count": len(self.messages)},
                            sort_keys=True)]
        for msg, split in zip(self.messages, self.splits):
            row = asdict(msg)
            row["split"] = split
            lines.append(json.dumps(row, sort_keys=True))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "Manifest":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = json.loads(lines[0])
        messages, splits = [], []
        for ln in lines[1:]:
            row = json.loads(ln)
            splits.append(row.pop("split"))
            row.pop("type", None)
            messages.append(Message(**row))
        return cls(messages=messages, splits=splits, seed=header["seed"])


def largest_remainder(n: int, weights: tuple[float, ...]) -> list[int]:
    """Apportion n into integer counts within +/-1 of exact proportions."""
    exact = [n * w for w in weights]
    counts = [int(e) for e in exact]
    remainders = sorted(range(len(weights)), key=lambda i: exact[i] - counts[i],
                        reverse=True)
    for i in remainders[:n - sum(counts)]:
        counts[i] += 1
    return counts


# -- per-category text builders ----------------------------------------------
#
# Each builder produces text whose tokenization has exactly `budget`
# tokens. A word of length w preceded by a space costs w + 1 tokens; a
# bracketed command costs 1.

def _fill_words(parts: list[str], budget: int, rng: SplitMix64,
                pick_word) -> None:
    """Append ' word' units until the budget is exactly consumed."""
    while budget > 0:
        if budget == 1:
            parts.append(rng.choice(_WORDS_BY_LEN[1]))  # bare letter, 1 token
            budget -= 1
            continue
        max_len = min(budget - 1, max(_WORDS_BY_LEN))
        word = pick_word(max_len)
        parts.append(" " + word)
        budget -= 1 + len(word)


def _pick_any_word(rng: SplitMix64):
    def pick(max_len: int) -> str:
        candidates = [w for w in WORDS if len(w) <= max_len]
        return rng.choice(candidates)
    return pick


def _gen_command_template(budget: int, rng: SplitMix64) -> str:
    """'<VERB> args...' pattern."""
    cmd = rng.choice(COMMAND_WORDS)
    parts = [f"<{cmd}>"]
    remaining = budget - 1
    pick = _pick_any_word(rng)

    def pick_arg(max_len: int) -> str:
        if rng.uniform() < 0.3:  # numeric argument
            n_digits = rng.randint(1, min(max_len, 3) + 1)
            return "".join(rng.choice(DIGITS) for _ in range(n_digits))
        return pick(max_len)

    _fill_words(parts, remaining, rng, pick_arg)
    return "".join(parts)


def _gen_english(budget: int, rng: SplitMix64) -> str:
    """Bigram-chained phrase trimmed to the exact token budget."""
    word = rng.choice(_STARTERS)
    while len(word) > budget:
        word = rng.choice(_WORDS_BY_LEN[1])
    parts = [word]
    remaining = budget - len(word)
    prev = word

    def pick_next(max_len: int) -> str:
        followers = [w for w in _BIGRAMS.get(prev, ()) if len(w) <= max_len]
        if followers:
            return rng.choice(followers)
        return rng.choice([w for w in WORDS if len(w) <= max_len])

    while remaining > 0:
        if remaining == 1:
            parts.append(rng.choice(_WORDS_BY_LEN[1]))
            remaining -= 1
            break
        word = pick_next(min(remaining - 1, max(_WORDS_BY_LEN)))
        parts.append(" " + word)
        remaining -= 1 + len(word)
        prev = word
    return "".join(parts)


def _gen_command_seq(budget: int, rng: SplitMix64) -> str:
    """Space-separated run of bracketed commands."""
    parts = [f"<{rng.choice(COMMAND_WORDS)}>"]
    remaining = budget - 1
    while remaining > 0:
        if remaining == 1:
            parts.append(f"<{rng.choice(COMMAND_WORDS)}>")
            remaining -= 1
        else:
            parts.append(f" <{rng.choice(COMMAND_WORDS)}>")
            remaining -= 2
    return "".join(parts)


def _gen_random_chars(budget: int, rng: SplitMix64) -> str:
    """Uniform draw over single-character surfaces; starts non-space."""
    chars = [rng.choice(_SINGLE_CHARS[:-1])]
    for _ in range(budget - 1):
        chars.append(rng.choice(_SINGLE_CHARS))
    return "".join(chars)


_BUILDERS = {
    "command_template": _gen_command_template,
    "english": _gen_english,
    "command_seq": _gen_command_seq,
    "random_chars": _gen_random_chars,
}


def generate_corpus(n: int, seed: int) -> Manifest:
    """Build a deterministic n-message manifest for the given seed.

    Category counts land within +/-1 of the 60/20/10/10 mixture; token
    lengths are uniform over [3, 40]; splits are assigned by seeded
    shuffle at 80/10/10.

    Raises:
        ValueError: if n < 10.
    """
    if n < 10:
        raise ValueError("corpus size must be >= 10")
    rng = SplitMix64(mix64(seed, 0xC0))
    counts = largest_remainder(n, CATEGORY_WEIGHTS)
    categories = [c for c, k in zip(CATEGORIES, counts) for _ in range(k)]
    rng.shuffle(categories)

    vocab = build_vocab()
    messages = []
    for mid in range(n):
        category = categories[mid]
        budget = rng.randint(MIN_TOKENS, MAX_TOKENS + 1)
        text = _BUILDERS[category](budget, rng)
        token_len = len(tokenize(text, vocab))
        if token_len != budget:
            raise AssertionError(
                f"builder produced {token_len} tokens, wanted {budget}: {text!r}")
        messages.append(Message(id=mid, text=text, category=category,
                                token_len=token_len))

    split_counts = largest_remainder(n, SPLIT_WEIGHTS)
    order = list(range(n))
    split_rng = SplitMix64(mix64(seed, 0x51))
    split_rng.shuffle(order)
    splits = [""] * n
    pos = 0
    for split_name, k in zip(SPLITS, split_counts):
        for idx in order[pos:pos + k]:
            splits[idx] = split_name
        pos += k
    return Manifest(messages=messages, splits=splits, seed=seed)


@dataclass
class RenderResult:
    index_path: Path
    wav_dir: Path
    rendered: int
    errors: list[str]


def render_corpus(manifest: Manifest, ch: ChannelConfig,
                  out_dir: str | Path, vocab: Vocab | None = None) -> RenderResult:
    """Materialize a manifest as WAV files plus a JSONL index.

    Idempotent for fixed seeds: the per-message channel seed is
    mix64(manifest.seed, message.id), so re-rendering reproduces every
    output byte for byte. Per-file I/O failures are recorded and skipped.
    """
    out_dir = Path(out_dir)
    wav_dir = out_dir / "wavs"
    wav_dir.mkdir(parents=True, exist_ok=True)
    vocab = vocab or build_vocab()
    index_lines = []
    errors: list[str] = []
    rendered = 0
    for msg, split in zip(manifest.messages, manifest.splits):
        wav_name = f"msg_{msg.id:05d}.wav"
        try:
            ids = tokenize(msg.text, vocab)
            wave = synth_message(ids)
            msg_seed = mix64(manifest.seed, msg.id)
            distorted, draws = apply_channel_with_draws(
                wave, ch, RngState.from_seed(msg_seed))
            write_wav(wav_dir / wav_name, distorted)
        except OSError as exc:
            errors.append(f"{wav_name}: {exc}")
            continue
        rendered += 1
        index_lines.append(json.dumps({
            "id": msg.id, "path": f"wavs/{wav_name}", "text": msg.text,
            "category": msg.category, "split": split, "token_ids": ids,
            "channel_seed": msg_seed, "channel_draws": draws,
        }, sort_keys=True))
    index_path = out_dir / "index.jsonl"
    index_path.write_text("\n".join(index_lines) + "\n")
    return RenderResult(index_path=index_path, wav_dir=wav_dir,
                        rendered=rendered, errors=errors)
