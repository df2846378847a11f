"""Stack (beam) decoder for the three-feature linear translation model.

score = w_phrase * f_phrase + w_lm * f_lm + w_reorder * f_reorder, with
f_phrase the sum of phrase log probabilities, f_lm the target-side LM log
probability, and f_reorder the negative total distortion.  Hypotheses are
binned by number of covered source words, recombined on identical
(coverage, LM state, last span end), and pruned per stack; future-cost
estimates guide pruning but never enter reported scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .corpus import Segment
from .errors import DecodeError
from .ngram import EOS, NGramModel
from .phrases import PhraseTable

_LN10 = math.log(10.0)


@dataclass(frozen=True)
class Weights:
    phrase: float = 1.0
    lm: float = 1.0
    reorder: float = 1.0

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.phrase, self.lm, self.reorder)


@dataclass(frozen=True)
class FeatureVector:
    phrase: float = 0.0
    lm: float = 0.0
    reorder: float = 0.0

    def dot(self, weights: Weights) -> float:
        return (
            weights.phrase * self.phrase
            + weights.lm * self.lm
            + weights.reorder * self.reorder
        )


@dataclass(frozen=True)
class DecoderConfig:
    beam_size: int = 100
    # max distance between a new phrase's start and the leftmost uncovered
    # position; None lifts the limit (monotone continuation stays possible,
    # so search never dead-ends)
    distortion_limit: int | None = 6
    threshold_ratio: float | None = None  # relative score cutoff per stack
    oov_copy: bool = True

    def validate(self) -> None:
        if self.beam_size < 1:
            raise DecodeError(f"beam_size must be >= 1, got {self.beam_size}")


@dataclass(frozen=True)
class Derivation:
    """A complete translation: source plus ordered phrase applications."""

    source: tuple[str, ...]
    apps: tuple[tuple[int, int, tuple[str, ...]], ...]  # (start, end, target)

    def output(self) -> tuple[str, ...]:
        return tuple(tok for _, _, tgt in self.apps for tok in tgt)


@dataclass(frozen=True)
class DecodeResult:
    output: Segment
    features: FeatureVector
    score: float
    derivation: Derivation


class _Hyp:
    __slots__ = ("score", "f_phrase", "f_lm", "f_reorder", "coverage",
                 "state", "last_end", "sig", "apps")

    def __init__(self, score, f_phrase, f_lm, f_reorder, coverage, state,
                 last_end, sig, apps):
        self.score = score
        self.f_phrase = f_phrase
        self.f_lm = f_lm
        self.f_reorder = f_reorder
        self.coverage = coverage
        self.state = state
        self.last_end = last_end
        self.sig = sig
        self.apps = apps


def distortion(prev_end: int, next_start: int) -> float:
    """Reordering contribution of one jump; adjacent phrases cost nothing."""
    return -abs(next_start - prev_end)


def _span_options(src, table: PhraseTable, config: DecoderConfig):
    """Translation options per source span, plus copy-through for tokens the
    table cannot cover at all."""
    n = len(src)
    options: dict[tuple[int, int], list[tuple[tuple[str, ...], float]]] = {}
    covered = [False] * n
    for s in range(n):
        for e in range(s + 1, min(s + table.max_phrase_len, n) + 1):
            cands = table.query(src[s:e])
            if cands:
                options[(s, e)] = [(tgt, log_fwd) for tgt, log_fwd, _ in cands]
                for k in range(s, e):
                    covered[k] = True
    for p, is_covered in enumerate(covered):
        if is_covered:
            continue
        if not config.oov_copy:
            raise DecodeError(f"no phrase option for source token {src[p]!r}")
        options.setdefault((p, p + 1), []).append(((src[p],), 0.0))
    return options


def _future_costs(src, options, lm, weights):
    """Best achievable weighted phrase+LM score per span, combined by DP."""
    n = len(src)
    unigram_cache: dict[str, float] = {}

    def unigram(word):
        if word not in unigram_cache:
            unigram_cache[word] = lm.cond_log10((), word) * _LN10
        return unigram_cache[word]

    fc = [[-math.inf] * (n + 1) for _ in range(n + 1)]
    for (s, e), cands in options.items():
        best = max(
            weights.phrase * log_fwd + weights.lm * sum(unigram(w) for w in tgt)
            for tgt, log_fwd in cands
        )
        fc[s][e] = best
    for width in range(2, n + 1):
        for s in range(n - width + 1):
            e = s + width
            for k in range(s + 1, e):
                if fc[s][k] + fc[k][e] > fc[s][e]:
                    fc[s][e] = fc[s][k] + fc[k][e]
    return fc


def _coverage_future(coverage: int, n: int, fc) -> float:
    total = 0.0
    pos = 0
    while pos < n:
        if coverage >> pos & 1:
            pos += 1
            continue
        start = pos
        while pos < n and not coverage >> pos & 1:
            pos += 1
        total += fc[start][pos]
    return total


def _better(a: _Hyp, b: _Hyp) -> bool:
    """True when a beats b: higher score, ties to the lexicographically
    earliest sequence of (span start, target phrase) applications."""
    if a.score != b.score:
        return a.score > b.score
    return a.sig < b.sig


def decode(src: Segment, table: PhraseTable, lm: NGramModel, weights: Weights,
           config: DecoderConfig = DecoderConfig()) -> DecodeResult:
    """Best-scoring segmentation, translation, and ordering of the source."""
    config.validate()
    src = tuple(src)
    if not src:
        raise DecodeError("cannot decode an empty segment")
    n = len(src)

    options = _span_options(src, table, config)
    fc = _future_costs(src, options, lm, weights)
    full = (1 << n) - 1

    init = _Hyp(0.0, 0.0, 0.0, 0.0, 0, lm.begin_state(), 0, (), ())
    stacks: list[dict] = [{} for _ in range(n + 1)]
    stacks[0][(0, init.state, 0)] = init

    for count in range(n):
        stack = stacks[count]
        if not stack:
            continue
        hyps = sorted(
            stack.values(),
            key=lambda h: (-(h.score + _coverage_future(h.coverage, n, fc)), h.sig),
        )
        if config.threshold_ratio is not None and hyps:
            cutoff = (
                hyps[0].score
                + _coverage_future(hyps[0].coverage, n, fc)
                + math.log(config.threshold_ratio)
            )
            hyps = [
                h
                for h in hyps
                if h.score + _coverage_future(h.coverage, n, fc) >= cutoff
            ]
        for hyp in hyps[: config.beam_size]:
            leftmost = 0
            while hyp.coverage >> leftmost & 1:
                leftmost += 1
            for (s, e), cands in options.items():
                span_mask = ((1 << (e - s)) - 1) << s
                if hyp.coverage & span_mask:
                    continue
                if (
                    config.distortion_limit is not None
                    and s - leftmost > config.distortion_limit
                ):
                    continue
                jump = distortion(hyp.last_end, s)
                new_cov = hyp.coverage | span_mask
                complete = new_cov == full
                for tgt, log_fwd in cands:
                    state = hyp.state
                    lm_inc = 0.0
                    for word in tgt:
                        lm_inc += lm.cond_log10(state, word) * _LN10
                        state = lm.advance(state, word)
                    if complete:
                        lm_inc += lm.cond_log10(state, EOS) * _LN10
                    new = _Hyp(
                        hyp.score
                        + weights.phrase * log_fwd
                        + weights.lm * lm_inc
                        + weights.reorder * jump,
                        hyp.f_phrase + log_fwd,
                        hyp.f_lm + lm_inc,
                        hyp.f_reorder + jump,
                        new_cov,
                        state,
                        e,
                        hyp.sig + ((s, tgt),),
                        hyp.apps + ((s, e, tgt),),
                    )
                    key = (new_cov, state, e)
                    target_stack = stacks[count + (e - s)]
                    old = target_stack.get(key)
                    if old is None or _better(new, old):
                        target_stack[key] = new
    if not stacks[n]:
        raise DecodeError("search produced no complete derivation")
    best = None
    for hyp in stacks[n].values():
        if best is None or _better(hyp, best):
            best = hyp
    derivation = Derivation(src, best.apps)
    return DecodeResult(
        output=derivation.output(),
        features=FeatureVector(best.f_phrase, best.f_lm, best.f_reorder),
        score=best.score,
        derivation=derivation,
    )


def derivation_features(derivation: Derivation, table: PhraseTable,
                        lm: NGramModel) -> FeatureVector:
    """Recompute the feature vector of a stored derivation from scratch."""
    from .ngram import score_sequence

    f_phrase = 0.0
    for s, e, tgt in derivation.apps:
        span = derivation.source[s:e]
        log_fwd = table.log_fwd(span, tgt)
        if log_fwd is None:
            if len(span) == 1 and tgt == span:
                log_fwd = 0.0  # copy-through of an uncovered token
            else:
                raise DecodeError(
                    f"derivation uses unknown phrase pair {span} -> {tgt}"
                )
        f_phrase += log_fwd
    f_lm = score_sequence(lm, derivation.output())
    f_reorder = 0.0
    prev_end = 0
    for s, e, _ in derivation.apps:
        f_reorder += distortion(prev_end, s)
        prev_end = e
    return FeatureVector(f_phrase, f_lm, f_reorder)


def rescore(derivation: Derivation, table: PhraseTable, lm: NGramModel,
            weights: Weights) -> float:
    """Score of a stored derivation under (possibly different) weights."""
    return derivation_features(derivation, table, lm).dot(weights)


def decode_file(src_path, out_path, feats_path, table: PhraseTable,
                lm: NGramModel, weights: Weights,
                config: DecoderConfig = DecoderConfig()) -> None:
    """Batch decode: translations plus per-segment feature/score TSV."""
    with open(src_path, encoding="utf-8") as fh:
        sources = [tuple(line.split()) for line in fh.read().splitlines()]
    with open(out_path, "w", encoding="utf-8") as out_fh, \
            open(feats_path, "w", encoding="utf-8") as feats_fh:
        for src in sources:
            result = decode(src, table, lm, weights, config)
            out_fh.write(" ".join(result.output) + "\n")
            f = result.features
            feats_fh.write(
                f"{f.phrase!r}\t{f.lm!r}\t{f.reorder!r}\t{result.score!r}\n"
            )
