"""Parallel corpus loading, tokenization, truecasing, scrubbing, and splits.

A Segment is a plain tuple of token strings; a ParallelCorpus is an ordered
list of (normal, simple) segment pairs.  Everything here is pure: functions
take data and return new data.
"""

from __future__ import annotations

import math
import unicodedata
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError

Segment = tuple[str, ...]

# Suffixes that stay attached to their apostrophe when a contraction is
# split ("wasn't" -> "was" + "n't", "men's" -> "men" + "'s").
_CONTRACTION_SUFFIXES = {"s", "re", "ve", "ll", "d", "m", "em"}
_PROTECTED_CHUNKS = {"'" + s for s in _CONTRACTION_SUFFIXES} | {"n't"}

_DOUBLE_QUOTES = '"“”„'


@dataclass
class ParallelCorpus:
    """Line-aligned segment pairs in two styles of the same language."""

    pairs: list[tuple[Segment, Segment]]
    side_labels: tuple[str, str] = ("normal", "simple")

    def __len__(self) -> int:
        return len(self.pairs)

    def side(self, which) -> list[Segment]:
        """All segments of one side, by index or by label."""
        idx = which if isinstance(which, int) else self.side_labels.index(which)
        return [pair[idx] for pair in self.pairs]


@dataclass
class TruecaseModel:
    """Casing statistics gathered from non-sentence-initial token positions."""

    counts: dict[str, int] = field(default_factory=dict)

    @property
    def preferred_form(self) -> dict[str, str]:
        best: dict[str, str] = {}
        grouped: dict[str, list[str]] = {}
        for form in self.counts:
            grouped.setdefault(form.lower(), []).append(form)
        for key, forms in grouped.items():
            forms.sort(key=lambda f: (-self.counts[f], f != key, f))
            best[key] = forms[0]
        return best


@dataclass(frozen=True)
class SplitSpec:
    """Deterministic train/dev/test partition sizes and shuffle seed."""

    train_fraction: float = 0.8
    dev_fraction: float = 0.1
    test_fraction: float = 0.1
    seed: int = 0

    def validate(self) -> None:
        fractions = (self.train_fraction, self.dev_fraction, self.test_fraction)
        if any(f < 0 for f in fractions):
            raise ConfigError("split fractions must be non-negative: %r" % (fractions,))
        if abs(sum(fractions) - 1.0) > 1e-9:
            raise ConfigError("split fractions must sum to 1: %r" % (fractions,))


@dataclass(frozen=True)
class CorpusStats:
    pair_count: int
    mean_tokens: tuple[float, float]
    sd_tokens: tuple[float, float]
    identical_pair_fraction: float


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch)[0] in ("P", "S")


def _split_core(core: str) -> list[str]:
    """Split one whitespace chunk stripped of edge punctuation."""
    lower = core.lower()
    if lower == "n't":
        return [core]
    if lower.endswith("n't") and len(core) > 3:
        return [core[:-3], core[-3:]]
    apos = core.rfind("'")
    if 0 < apos < len(core) - 1 and core[apos + 1 :].lower() in _CONTRACTION_SUFFIXES:
        return [core[:apos], core[apos:]]
    return [core]


def _split_chunk(chunk: str) -> list[str]:
    if chunk.lower() in _PROTECTED_CHUNKS:
        return [chunk]
    lead: list[str] = []
    trail: list[str] = []
    while chunk and _is_punct(chunk[0]) and chunk.lower() not in _PROTECTED_CHUNKS:
        lead.append(chunk[0])
        chunk = chunk[1:]
    while chunk and _is_punct(chunk[-1]):
        trail.append(chunk[-1])
        chunk = chunk[:-1]
    trail.reverse()
    core = _split_core(chunk) if chunk else []
    return lead + core + trail


def tokenize(raw: str) -> Segment:
    """Tokenize one raw line: detach punctuation, split contractions.

    Edge punctuation is peeled off character by character, word-internal
    punctuation (hyphens, decimal points) is kept, and contractions are
    split with the apostrophe staying on the suffix.  Re-tokenizing the
    space-joined output is a no-op.
    """
    tokens: list[str] = []
    for chunk in raw.split():
        tokens.extend(_split_chunk(chunk))
    return tuple(tokens)


def unescape_ptb_brackets(raw: str) -> str:
    """Turn -LRB-/-RRB- escapes back into literal parentheses."""
    return raw.replace("-LRB-", "(").replace("-RRB-", ")")


def load_parallel(normal_path, simple_path,
                  side_labels: tuple[str, str] = ("normal", "simple")) -> ParallelCorpus:
    """Read two line-aligned text files into a whitespace-tokenized corpus."""
    sides = []
    for path in (normal_path, simple_path):
        with open(path, "rb") as fh:
            blob = fh.read()
        try:
            sides.append(blob.decode("utf-8").splitlines())
        except UnicodeDecodeError as exc:
            line_no = blob[: exc.start].count(b"\n") + 1
            raise DataError(f"{path}: undecodable bytes on line {line_no}") from exc
    normal_lines, simple_lines = sides
    if len(normal_lines) != len(simple_lines):
        raise DataError(
            "line count mismatch: %s has %d lines, %s has %d lines"
            % (normal_path, len(normal_lines), simple_path, len(simple_lines))
        )
    pairs = [
        (tuple(a.split()), tuple(b.split()))
        for a, b in zip(normal_lines, simple_lines)
    ]
    return ParallelCorpus(pairs, side_labels)


def scrub_simple_side(raw: str) -> str:
    """Strip double quotes, balanced parenthesized spans, and asterisks.

    Runs on the raw simple-side line before tokenization.  An unbalanced
    parenthesis is kept literally and reported as a warning with its
    character position.
    """
    text = "".join(ch for ch in raw if ch not in _DOUBLE_QUOTES)

    matched: list[tuple[int, int]] = []
    stack: list[int] = []
    for pos, ch in enumerate(text):
        if ch == "(":
            stack.append(pos)
        elif ch == ")":
            if stack:
                matched.append((stack.pop(), pos))
            else:
                warnings.warn(f"unbalanced ')' at position {pos}; kept literally")
    for pos in stack:
        warnings.warn(f"unbalanced '(' at position {pos}; kept literally")

    # matched spans nest or are disjoint; keep only the outermost ones
    # (unmatched parentheses are literal text and shield nothing)
    drop = bytearray(len(text))
    last_end = -1
    for start, end in sorted(matched):
        if start > last_end:
            for k in range(start, end + 1):
                drop[k] = 1
            last_end = end

    kept = "".join(ch for pos, ch in enumerate(text) if not drop[pos] and ch != "*")
    return " ".join(kept.split())


def train_truecaser(corpus: ParallelCorpus, side) -> TruecaseModel:
    """Count surface forms at non-sentence-initial positions on one side."""
    counts: Counter[str] = Counter()
    for seg in corpus.side(side):
        counts.update(seg[1:])
    return TruecaseModel(dict(counts))


def apply_truecaser(model: TruecaseModel, seg: Segment) -> Segment:
    """Re-case the sentence-initial token to its preferred mid-sentence form."""
    if not seg:
        return seg
    first = seg[0]
    preferred = model.preferred_form.get(first.lower())
    if preferred is not None:
        first = preferred
    elif first.isalpha() and first[:1].isupper() and first[1:].islower():
        first = first.lower()
    return (first,) + seg[1:]


def write_truecase_model(model: TruecaseModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for form in sorted(model.counts):
            fh.write(f"{form}\t{model.counts[form]}\n")


def read_truecase_model(path) -> TruecaseModel:
    counts: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                form, count = line.rstrip("\n").split("\t")
                counts[form] = int(count)
            except ValueError as exc:
                raise DataError(f"{path}: bad truecase entry on line {line_no}") from exc
    return TruecaseModel(counts)


def clean_pair(pair: tuple[Segment, Segment], min_len: int = 1, max_len: int = 70) -> bool:
    """Keep a pair iff both sides have between min_len and max_len tokens."""
    if min_len < 1:
        raise ConfigError(f"min_len must be >= 1, got {min_len}")
    return all(min_len <= len(side) <= max_len for side in pair)


def _split_indices(n: int, spec: SplitSpec) -> tuple[list[int], list[int], list[int]]:
    """Index buckets for train/dev/test; floor sizes, remainder to train."""
    order = np.random.default_rng(spec.seed).permutation(n)
    # tiny epsilon so 0.3 * 10 lands on 3, not floor(2.9999...)
    n_dev = math.floor(n * spec.dev_fraction + 1e-9)
    n_test = math.floor(n * spec.test_fraction + 1e-9)
    n_train = n - n_dev - n_test
    return (
        sorted(int(i) for i in order[:n_train]),
        sorted(int(i) for i in order[n_train : n_train + n_dev]),
        sorted(int(i) for i in order[n_train + n_dev :]),
    )


def split_corpus(corpus: ParallelCorpus, spec: SplitSpec
                 ) -> tuple[ParallelCorpus, ParallelCorpus, ParallelCorpus]:
    """Partition into train/dev/test with a seeded shuffle.

    Dev and test get floor(n * fraction) pairs each; the remainder goes to
    train.  Pairs keep their corpus order inside each split.
    """
    spec.validate()
    n = len(corpus)
    if n < 3 and all(f > 0 for f in (spec.train_fraction, spec.dev_fraction, spec.test_fraction)):
        raise DataError(f"cannot split {n} pairs three ways; need at least 3")
    return tuple(
        ParallelCorpus([corpus.pairs[i] for i in bucket], corpus.side_labels)
        for bucket in _split_indices(n, spec)
    )


def split_assignments(corpus: ParallelCorpus, spec: SplitSpec) -> list[str]:
    """Per-pair split labels, in corpus order (the split-manifest content)."""
    spec.validate()
    labels = [""] * len(corpus)
    for name, bucket in zip(("train", "dev", "test"),
                            _split_indices(len(corpus), spec)):
        for i in bucket:
            labels[i] = name
    return labels


def compute_stats(corpus: ParallelCorpus) -> CorpusStats:
    """Per-side token-count mean/SD (population) and identical-pair fraction."""
    if not corpus.pairs:
        raise DataError("cannot compute statistics of an empty corpus")
    lengths = np.array([[len(a), len(b)] for a, b in corpus.pairs], dtype=float)
    identical = sum(1 for a, b in corpus.pairs if a == b)
    return CorpusStats(
        pair_count=len(corpus),
        mean_tokens=tuple(lengths.mean(axis=0)),
        sd_tokens=tuple(lengths.std(axis=0)),
        identical_pair_fraction=identical / len(corpus),
    )
