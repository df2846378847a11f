"""Translation quality metrics: corpus BLEU, METEOR without synonyms,
token-level edit distance, and sentence-length ratio summaries.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import Segment
from .errors import DataError
from .stemming import porter_stem

BLEU_MAX_ORDER = 4


@dataclass(frozen=True)
class BleuReport:
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    score: float
    candidate_length: int
    reference_length: int


@dataclass(frozen=True)
class MeteorReport:
    matches: int
    candidate_length: int
    reference_length: int
    precision: float
    recall: float
    chunks: int
    fmean: float
    penalty: float
    score: float


@dataclass(frozen=True)
class MatchStageConfig:
    """METEOR matching stages and score shape parameters."""

    stages: tuple[str, ...] = ("exact", "stem")
    alpha: float = 0.9     # recall weight in the harmonic mean
    beta: float = 3.0      # fragmentation exponent
    gamma: float = 0.5     # fragmentation weight
    ambiguity_cap: int = 20000  # pairings examined before the greedy fallback


def _ngram_counts(seg: Segment, n: int) -> Counter:
    return Counter(tuple(seg[i : i + n]) for i in range(len(seg) - n + 1))


def bleu_corpus(candidates: list[Segment], references: list[Segment]) -> BleuReport:
    """Corpus-level BLEU with clipped n-gram precisions up to order 4.

    Orders for which the corpus has no candidate n-grams at all (every
    candidate shorter than n) are dropped from the geometric mean, so a
    corpus identical to its references always scores 1.
    """
    if len(candidates) != len(references):
        raise DataError(
            "candidate/reference count mismatch: %d vs %d"
            % (len(candidates), len(references))
        )
    if not candidates:
        raise DataError("cannot score an empty candidate set")

    matched = [0] * BLEU_MAX_ORDER
    total = [0] * BLEU_MAX_ORDER
    cand_len = 0
    ref_len = 0
    for cand, ref in zip(candidates, references):
        cand_len += len(cand)
        ref_len += len(ref)
        for n in range(1, BLEU_MAX_ORDER + 1):
            counts = _ngram_counts(cand, n)
            if not counts:
                continue
            ref_counts = _ngram_counts(ref, n)
            matched[n - 1] += sum(
                min(c, ref_counts[g]) for g, c in counts.items()
            )
            total[n - 1] += sum(counts.values())

    precisions = tuple(
        (matched[i] / total[i]) if total[i] else 0.0 for i in range(BLEU_MAX_ORDER)
    )
    if cand_len == 0:
        bp = 0.0
    else:
        bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)

    used = [p for p, t in zip(precisions, total) if t]
    if not used or any(p == 0.0 for p in used):
        score = 0.0
    else:
        score = bp * math.exp(sum(math.log(p) for p in used) / len(used))
    return BleuReport(precisions, bp, score, cand_len, ref_len)


def _stage_key(stage: str, token: str) -> str:
    if stage == "exact":
        return token
    if stage == "stem":
        return porter_stem(token)
    raise DataError(f"unknown match stage {stage!r}")


def _group_pairings(cand_pos: list[int], ref_pos: list[int]):
    """All ways to match min(len, len) positions between the two lists."""
    k = min(len(cand_pos), len(ref_pos))
    for cs in itertools.combinations(cand_pos, k):
        for rs in itertools.permutations(ref_pos, k):
            yield tuple(zip(cs, rs))


def _count_chunks(pairs: list[tuple[int, int]]) -> int:
    """Maximal runs contiguous and order-preserving on both sides."""
    pairs = sorted(pairs)
    chunks = 0
    prev = None
    for c, r in pairs:
        if prev is None or c != prev[0] + 1 or r != prev[1] + 1:
            chunks += 1
        prev = (c, r)
    return chunks


def _stage_groups(candidate, reference, cand_free, ref_free, stage):
    """Per-key free positions on both sides, for keys present on both."""
    cand_by_key: dict[str, list[int]] = {}
    for i in sorted(cand_free):
        cand_by_key.setdefault(_stage_key(stage, candidate[i]), []).append(i)
    ref_by_key: dict[str, list[int]] = {}
    for j in sorted(ref_free):
        ref_by_key.setdefault(_stage_key(stage, reference[j]), []).append(j)
    return [
        (key, cand_by_key[key], ref_by_key[key])
        for key in sorted(cand_by_key)
        if key in ref_by_key
    ]


def _greedy_alignment(candidate, reference, stages):
    cand_free = set(range(len(candidate)))
    ref_free = set(range(len(reference)))
    pairs: list[tuple[int, int]] = []
    for stage in stages:
        for _, cpos, rpos in _stage_groups(candidate, reference, cand_free, ref_free, stage):
            for c, r in zip(cpos, rpos):
                pairs.append((c, r))
                cand_free.discard(c)
                ref_free.discard(r)
    return pairs


class _CapExceeded(Exception):
    pass


def _align_tokens(candidate, reference, config: MatchStageConfig):
    """Stage-by-stage unigram alignment minimizing the final chunk count.

    Each stage matches as many still-free tokens as its key multiset allows;
    which positions pair up is searched exhaustively with leftmost pairings
    winning ties.  If the number of complete alignments exceeds the cap, a
    greedy leftmost pass is used instead and a warning emitted.
    """
    best: list[tuple[int, tuple]] = []
    leaves = [0]

    def walk_stage(stage_idx, cand_free, ref_free, acc):
        if stage_idx == len(config.stages):
            leaves[0] += 1
            if leaves[0] > config.ambiguity_cap:
                raise _CapExceeded
            pairs = sorted(acc)
            key = (_count_chunks(pairs), tuple(pairs))
            if not best or key < best[0]:
                best[:] = [key]
            return
        groups = _stage_groups(candidate, reference, cand_free, ref_free,
                               config.stages[stage_idx])

        def walk_group(gi, cfree, rfree, acc2):
            if gi == len(groups):
                walk_stage(stage_idx + 1, cfree, rfree, acc2)
                return
            _, cpos, rpos = groups[gi]
            for pairing in _group_pairings(cpos, rpos):
                used_c = {c for c, _ in pairing}
                used_r = {r for _, r in pairing}
                walk_group(gi + 1, cfree - used_c, rfree - used_r,
                           acc2 + list(pairing))

        walk_group(0, cand_free, ref_free, acc)

    try:
        walk_stage(0, set(range(len(candidate))), set(range(len(reference))), [])
    except _CapExceeded:
        warnings.warn(
            "match ambiguity exceeds cap (%d); falling back to greedy pairing"
            % config.ambiguity_cap
        )
        return _greedy_alignment(candidate, reference, config.stages)
    return list(best[0][1]) if best else []


def meteor_sentence(candidate: Segment, reference: Segment,
                    config: MatchStageConfig = MatchStageConfig()) -> MeteorReport:
    """METEOR with exact and stem matching only (no synonym/paraphrase stages)."""
    stats = _meteor_stats(candidate, reference, config)
    return _meteor_report(*stats, config=config)


def _meteor_stats(candidate, reference, config):
    pairs = _align_tokens(candidate, reference, config)
    m = len(pairs)
    ch = _count_chunks(pairs) if pairs else 0
    return m, len(candidate), len(reference), ch


def _meteor_report(m, c, r, ch, config) -> MeteorReport:
    if m == 0 or c == 0 or r == 0:
        return MeteorReport(m, c, r, 0.0, 0.0, ch, 0.0, 0.0, 0.0)
    precision = m / c
    recall = m / r
    alpha = config.alpha
    fmean = precision * recall / (alpha * precision + (1 - alpha) * recall)
    penalty = config.gamma * (ch / m) ** config.beta
    return MeteorReport(m, c, r, precision, recall, ch, fmean, penalty,
                        fmean * (1 - penalty))


def meteor_corpus(candidates: list[Segment], references: list[Segment],
                  config: MatchStageConfig = MatchStageConfig()) -> MeteorReport:
    """System-level METEOR from aggregated match statistics."""
    if len(candidates) != len(references):
        raise DataError(
            "candidate/reference count mismatch: %d vs %d"
            % (len(candidates), len(references))
        )
    if not candidates:
        raise DataError("cannot score an empty candidate set")
    tm = tc = tr = tch = 0
    for cand, ref in zip(candidates, references):
        m, c, r, ch = _meteor_stats(cand, ref, config)
        tm, tc, tr, tch = tm + m, tc + c, tr + r, tch + ch
    return _meteor_report(tm, tc, tr, tch, config)


def write_xray(reports: list[MeteorReport], path) -> None:
    """Per-segment dump of precision, recall, fragmentation, and score."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, rep in enumerate(reports, start=1):
            frag = rep.chunks / rep.matches if rep.matches else 0.0
            fh.write(f"Segment {i}\n")
            fh.write(f"P:\t{rep.precision:.3f}\n")
            fh.write(f"R:\t{rep.recall:.3f}\n")
            fh.write(f"Frag:\t{frag:.3f}\n")
            fh.write(f"Score:\t{rep.score:.3f}\n\n")


def token_edit_distance(a: Segment, b: Segment) -> int:
    """Levenshtein distance over token sequences."""
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, tok_a in enumerate(a, start=1):
        current = [i]
        for j, tok_b in enumerate(b, start=1):
            cost = 0 if tok_a == tok_b else 1
            current.append(min(previous[j] + 1,        # delete
                               current[j - 1] + 1,     # insert
                               previous[j - 1] + cost))  # substitute
        previous = current
    return previous[-1]


@dataclass(frozen=True)
class LengthRatioStats:
    ratios: tuple[float, ...]
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float


def length_ratio_stats(outputs: list[Segment],
                       reference_normals: list[Segment]) -> LengthRatioStats:
    """Per-pair |output| / |normal| with an inclusive-quartile summary."""
    if len(outputs) != len(reference_normals):
        raise DataError(
            "output/normal count mismatch: %d vs %d"
            % (len(outputs), len(reference_normals))
        )
    ratios = []
    for i, (out, ref) in enumerate(zip(outputs, reference_normals)):
        if len(ref) == 0:
            warnings.warn(f"pair {i}: zero-length normal segment skipped")
            continue
        ratios.append(len(out) / len(ref))
    if not ratios:
        raise DataError("no scorable pairs (all normal segments empty)")
    qs = np.quantile(ratios, [0.0, 0.25, 0.5, 0.75, 1.0])
    return LengthRatioStats(tuple(ratios), *map(float, qs))


def edit_distance_summary(outputs: list[Segment],
                          references: list[Segment]) -> dict:
    """Histogram (bucket width 1) plus mean/median of pairwise distances."""
    distances = [token_edit_distance(a, b) for a, b in zip(outputs, references)]
    histogram = dict(sorted(Counter(distances).items()))
    return {
        "histogram": histogram,
        "mean": float(np.mean(distances)),
        "median": float(np.median(distances)),
    }
