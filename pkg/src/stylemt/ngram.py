"""Back-off n-gram language model with interpolated Kneser-Ney smoothing.

Probabilities are estimated with a single absolute discount and stored in
ARPA back-off form (log10 probabilities plus log10 backoff weights), so a
trained model and one read back from its ARPA file behave identically.
Scoring is exposed in natural log.
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .corpus import Segment
from .errors import ConfigError, DataError, FormatError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

_LN10 = math.log(10.0)
_BOS_LOG10 = -99.0   # conventional stand-in, <s> is never predicted
_FLOOR_LOG10 = -99.0  # only reachable for hand-written models without <unk>


@dataclass(frozen=True)
class LMConfig:
    order: int = 3
    discount: float = 0.75
    unk_threshold: int = 1  # tokens seen fewer than this many times become <unk>

    def validate(self) -> None:
        if not 1 <= self.order <= 5:
            raise ConfigError(f"LM order must be in [1, 5], got {self.order}")
        if not 0.0 < self.discount < 1.0:
            raise ConfigError(f"discount must be in (0, 1), got {self.discount}")
        if self.unk_threshold < 0:
            raise ConfigError("unk threshold must be non-negative")


@dataclass
class NGramModel:
    """Tables of gram -> (log10 prob, log10 backoff or None), per order."""

    order: int
    tables: dict[int, dict[tuple[str, ...], tuple[float, float | None]]]
    vocab: frozenset[str] = field(default_factory=frozenset)

    def cond_log10(self, context: tuple[str, ...], word: str) -> float:
        if word not in self.vocab:
            word = UNK
        if self.order == 1:
            context = ()
        else:
            mapped = tuple(
                t if (t in self.vocab or t == BOS) else UNK for t in context
            )
            context = mapped[-(self.order - 1):]
        acc = 0.0
        while True:
            gram = context + (word,)
            entry = self.tables.get(len(gram), {}).get(gram)
            if entry is not None:
                return acc + entry[0]
            if not context:
                return acc + _FLOOR_LOG10
            ctx_entry = self.tables.get(len(context), {}).get(context)
            if ctx_entry is not None and ctx_entry[1] is not None:
                acc += ctx_entry[1]
            context = context[1:]

    def begin_state(self) -> tuple[str, ...]:
        return (BOS,) if self.order > 1 else ()

    def advance(self, state: tuple[str, ...], word: str) -> tuple[str, ...]:
        """Next LM context after emitting one word."""
        if self.order == 1:
            return ()
        if word not in self.vocab:
            word = UNK
        return (state + (word,))[-(self.order - 1):]


def score_sequence(model: NGramModel, seg: Segment) -> float:
    """Natural-log probability of a segment including the end transition."""
    total = 0.0
    state = model.begin_state()
    for word in tuple(seg) + (EOS,):
        total += model.cond_log10(state, word)
        state = model.advance(state, word)
    return total * _LN10


def _count_ngrams(sentences: list[tuple[str, ...]], order: int):
    counts: dict[int, Counter] = {k: Counter() for k in range(1, order + 1)}
    for sent in sentences:
        for k in range(1, order + 1):
            table = counts[k]
            for i in range(len(sent) - k + 1):
                table[sent[i : i + k]] += 1
    return counts


def lm_train(segments: list[Segment], config: LMConfig = LMConfig()) -> NGramModel:
    """Interpolated Kneser-Ney estimation on padded sentences.

    Lower-order estimates use continuation (type) counts, with raw counts
    for sentence-start grams, which makes every conditional distribution
    over the closed vocabulary sum to one exactly.
    """
    config.validate()
    segments = [tuple(s) for s in segments]
    if not any(segments):
        raise DataError("cannot train a language model on empty data")

    token_counts = Counter(t for seg in segments for t in seg)
    def map_token(t):
        return UNK if token_counts[t] < config.unk_threshold else t

    sentences = [
        (BOS,) + tuple(map_token(t) for t in seg) + (EOS,) for seg in segments
    ]
    order = config.order
    d = config.discount
    counts = _count_ngrams(sentences, order)

    vocab = sorted({t for sent in sentences for t in sent} - {BOS} | {EOS, UNK})
    v = len(vocab)

    # effective counts per level: raw at the top, continuation types below
    # (raw again for grams that start the sentence)
    eff: dict[int, dict] = {order: dict(counts[order])}
    eff[order].pop((BOS,), None)  # <s> is context-only, never predicted
    for k in range(order - 1, 0, -1):
        mod: dict = defaultdict(int)
        for gram in counts[k + 1]:
            mod[gram[1:]] += 1
        for gram, c in counts[k].items():
            if gram[0] == BOS and gram != (BOS,):
                mod[gram] = c
        mod.pop((BOS,), None)
        eff[k] = dict(mod)

    def row_stats(level_counts):
        rowsum: dict = defaultdict(int)
        n1plus: dict = defaultdict(int)
        for gram, c in level_counts.items():
            rowsum[gram[:-1]] += c
            n1plus[gram[:-1]] += 1
        return rowsum, n1plus

    # unigram level
    probs: dict[int, dict] = {1: {}}
    uni = eff[1]
    denom = sum(uni.values())
    n1plus_total = sum(1 for c in uni.values() if c > 0)
    for w in vocab:
        c = uni.get((w,), 0)
        probs[1][(w,)] = (max(c - d, 0.0) + d * n1plus_total / v) / denom

    # higher levels, bottom-up
    for k in range(2, order + 1):
        rowsum, n1plus = row_stats(eff[k])
        probs[k] = {}
        for gram in sorted(eff[k]):
            h = gram[:-1]
            lower = probs[k - 1][gram[1:]]
            probs[k][gram] = (
                max(eff[k][gram] - d, 0.0) + d * n1plus[h] * lower
            ) / rowsum[h]

    # backoff weights live on the context entries one level down
    bows: dict[int, dict] = {k: {} for k in range(1, order)}
    for k in range(2, order + 1):
        rowsum, n1plus = row_stats(eff[k])
        for h in rowsum:
            bows[k - 1][h] = d * n1plus[h] / rowsum[h]

    tables: dict[int, dict] = {}
    for k in range(1, order + 1):
        level = {}
        grams = set(probs[k]) | set(bows.get(k, {}))
        for gram in sorted(grams):
            if gram in probs[k]:
                logp = math.log10(probs[k][gram])
            else:
                assert gram[0] == BOS, f"context {gram} has a backoff but no mass"
                logp = _BOS_LOG10
            bow = bows.get(k, {}).get(gram)
            level[gram] = (logp, math.log10(bow) if bow is not None else None)
        tables[k] = level
    if (BOS,) not in tables[1]:
        tables[1][(BOS,)] = (_BOS_LOG10, None)
        tables[1] = dict(sorted(tables[1].items()))

    return NGramModel(order=order, tables=tables, vocab=frozenset(vocab))


def write_arpa(model: NGramModel, path) -> None:
    """Standard ARPA layout; float fields use shortest exact repr."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\\data\\\n")
        for k in range(1, model.order + 1):
            fh.write(f"ngram {k}={len(model.tables.get(k, {}))}\n")
        for k in range(1, model.order + 1):
            fh.write(f"\n\\{k}-grams:\n")
            for gram in sorted(model.tables.get(k, {})):
                logp, bow = model.tables[k][gram]
                line = f"{logp!r}\t{' '.join(gram)}"
                if bow is not None:
                    line += f"\t{bow!r}"
                fh.write(line + "\n")
        fh.write("\n\\end\\\n")


def read_arpa(path) -> NGramModel:
    """Parse an ARPA file back into a model; malformed input raises with line numbers."""
    declared: dict[int, int] = {}
    tables: dict[int, dict] = {}
    section = None
    saw_data = False
    saw_end = False
    with open(path, encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line == "\\data\\":
                saw_data = True
                continue
            if line == "\\end\\":
                saw_end = True
                section = None
                continue
            if line.startswith("\\") and line.endswith("-grams:"):
                try:
                    section = int(line[1:-7])
                except ValueError:
                    raise FormatError(f"{path}:{line_no}: bad section header {line!r}")
                if section not in declared:
                    raise FormatError(
                        f"{path}:{line_no}: section {section} not declared in \\data\\"
                    )
                tables[section] = {}
                continue
            if section is None:
                if not saw_data:
                    raise FormatError(f"{path}:{line_no}: content before \\data\\")
                if line.startswith("ngram "):
                    try:
                        k, n = line[6:].split("=")
                        declared[int(k)] = int(n)
                    except ValueError:
                        raise FormatError(f"{path}:{line_no}: bad count line {line!r}")
                    continue
                raise FormatError(f"{path}:{line_no}: unexpected line {line!r}")
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise FormatError(f"{path}:{line_no}: expected 2 or 3 fields")
            try:
                logp = float(parts[0])
                bow = float(parts[2]) if len(parts) == 3 else None
            except ValueError:
                raise FormatError(f"{path}:{line_no}: bad numeric field")
            gram = tuple(parts[1].split(" "))
            if len(gram) != section:
                raise FormatError(
                    f"{path}:{line_no}: {len(gram)}-gram in \\{section}-grams: section"
                )
            tables[section][gram] = (logp, bow)
    if not saw_data or not saw_end:
        raise FormatError(f"{path}: missing \\data\\ or \\end\\ marker")
    for k, n in declared.items():
        if len(tables.get(k, {})) != n:
            raise FormatError(
                f"{path}: \\data\\ declares {n} {k}-grams, section has "
                f"{len(tables.get(k, {}))}"
            )
    if not declared:
        raise FormatError(f"{path}: no ngram sections declared")
    order = max(declared)
    vocab = frozenset(w for (w,) in tables.get(1, {}) if w != BOS)
    return NGramModel(order=order, tables=tables, vocab=vocab)
