"""Lexical-translation EM with a diagonal positional prior.

The model generates each target (simple-side) token from one source
(normal-side) token or from NULL.  The prior over source positions is
proportional to exp(-lambda * |i/n - j/m|) when the diagonal is enabled,
uniform otherwise, with fixed mass p0 on NULL.  Optional extras: a
variational-Bayes M-step (digamma-adjusted counts) and gradient updates of
the tension lambda after each round.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

from scipy.special import digamma

from .corpus import ParallelCorpus, Segment
from .errors import ConfigError, DataError

NULL_TOKEN = "<NULL>"

_TENSION_MIN = 0.1
_TENSION_MAX = 14.0
_TENSION_STEP = 20.0


@dataclass(frozen=True)
class AlignConfig:
    iterations: int = 5
    diagonal_enabled: bool = True
    tension: float = 4.0
    optimize_tension: bool = True
    null_prob: float = 0.08
    variational_bayes: bool = True
    vb_alpha: float = 0.01
    tension_steps: int = 8
    prob_floor: float = 1e-9  # likelihood floor for pairs missing from a table

    def validate(self) -> None:
        if self.iterations < 1:
            raise ConfigError("need at least one EM iteration")
        if self.tension <= 0:
            raise ConfigError(f"tension must be positive, got {self.tension}")
        if not 0.0 < self.null_prob < 1.0:
            raise ConfigError(f"null_prob must be in (0, 1), got {self.null_prob}")
        if self.vb_alpha <= 0:
            raise ConfigError("vb_alpha must be positive")


@dataclass
class TranslationTable:
    """t(e|f) rows keyed by source token, including the NULL source."""

    t: dict[str, dict[str, float]] = field(default_factory=dict)

    def prob(self, f: str, e: str, floor: float = 0.0) -> float:
        return self.t.get(f, {}).get(e, floor)

    def row(self, f: str) -> dict[str, float]:
        return self.t.get(f, {})


AlignmentLinks = set  # of (source index, target index), 0-based


def _feature(i: int, j: int, m: int, n: int) -> float:
    """Position agreement, 1-based indices: -|i/n - j/m|."""
    return -abs(i / n - j / m)


def _prior_rows(m: int, n: int, config: AlignConfig, tension: float):
    """Per target position j, the prior over the n source positions
    (summing to 1 - null_prob).  NULL carries null_prob separately."""
    source_mass = 1.0 - config.null_prob
    rows = []
    for j in range(1, m + 1):
        if not config.diagonal_enabled:
            rows.append([source_mass / n] * n)
            continue
        unnorm = [math.exp(tension * _feature(i, j, m, n)) for i in range(1, n + 1)]
        z = sum(unnorm)
        rows.append([source_mass * u / z for u in unnorm])
    return rows


def _expected_feature_under_prior(j: int, m: int, n: int, tension: float) -> float:
    """E[h | j, m, n] under the diagonal prior with the given tension."""
    feats = [_feature(i, j, m, n) for i in range(1, n + 1)]
    unnorm = [math.exp(tension * h) for h in feats]
    z = sum(unnorm)
    return sum(h * u for h, u in zip(feats, unnorm)) / z


def em_train(corpus: ParallelCorpus, config: AlignConfig = AlignConfig()
             ) -> tuple[TranslationTable, float]:
    """Run EM; returns the translation table and the final tension."""
    config.validate()
    if not corpus.pairs:
        raise DataError("cannot train an aligner on an empty corpus")

    target_vocab = {e for _, e_seg in corpus.pairs for e in e_seg}
    if not target_vocab:
        raise DataError("cannot train an aligner: no target tokens")
    uniform = 1.0 / len(target_vocab)

    table = TranslationTable()
    for f_seg, e_seg in corpus.pairs:
        for e in e_seg:
            table.t.setdefault(NULL_TOKEN, {})[e] = uniform
            for f in f_seg:
                table.t.setdefault(f, {})[e] = uniform

    tension = config.tension
    size_counts = defaultdict(int)
    for f_seg, e_seg in corpus.pairs:
        if e_seg:
            size_counts[(len(e_seg), len(f_seg))] += 1

    for _ in range(config.iterations):
        counts: dict[str, dict[str, float]] = defaultdict(lambda: defaultdict(float))
        emp_feat = 0.0
        n_target_tokens = 0
        prior_cache: dict[tuple[int, int], list] = {}

        for f_seg, e_seg in corpus.pairs:
            n, m = len(f_seg), len(e_seg)
            if m == 0:
                continue
            if (m, n) not in prior_cache:
                prior_cache[(m, n)] = _prior_rows(m, n, config, tension) if n else []
            rows = prior_cache[(m, n)]
            null_row = table.t[NULL_TOKEN]
            for j, e in enumerate(e_seg, start=1):
                p_null = config.null_prob * null_row[e]
                ps = [
                    prior * table.t[f][e]
                    for prior, f in zip(rows[j - 1], f_seg)
                ] if n else []
                z = p_null + sum(ps)
                counts[NULL_TOKEN][e] += p_null / z
                for i, (f, p) in enumerate(zip(f_seg, ps), start=1):
                    post = p / z
                    counts[f][e] += post
                    emp_feat += post * _feature(i, j, m, n)
                n_target_tokens += 1

        # M-step
        table = TranslationTable()
        for f, row in counts.items():
            if config.variational_bayes:
                total = digamma(sum(row.values()) + config.vb_alpha * len(row))
                new_row = {
                    e: math.exp(digamma(c + config.vb_alpha) - total)
                    for e, c in row.items()
                }
                # keep rows proper distributions (the digamma adjustment
                # alone leaves them summing below one)
                norm = sum(new_row.values())
                table.t[f] = {e: p / norm for e, p in new_row.items()}
            else:
                total = sum(row.values())
                table.t[f] = {e: c / total for e, c in row.items()}

        if config.diagonal_enabled and config.optimize_tension and n_target_tokens:
            emp = emp_feat / n_target_tokens
            for _ in range(config.tension_steps):
                mod_feat = 0.0
                for (m, n), c in size_counts.items():
                    if n == 0:
                        continue
                    for j in range(1, m + 1):
                        mod_feat += c * _expected_feature_under_prior(j, m, n, tension)
                mod = mod_feat / n_target_tokens
                tension += (emp - mod) * _TENSION_STEP
                tension = min(max(tension, _TENSION_MIN), _TENSION_MAX)

    return table, tension


def log_likelihood(corpus: ParallelCorpus, table: TranslationTable,
                   config: AlignConfig = AlignConfig()) -> float:
    """Marginal log-likelihood of the corpus under the alignment model."""
    total = 0.0
    floor = config.prob_floor
    for f_seg, e_seg in corpus.pairs:
        n, m = len(f_seg), len(e_seg)
        if m == 0:
            continue
        rows = _prior_rows(m, n, config, config.tension) if n else []
        for j, e in enumerate(e_seg, start=1):
            z = config.null_prob * table.prob(NULL_TOKEN, e, floor)
            if n:
                z += sum(
                    prior * table.prob(f, e, floor)
                    for prior, f in zip(rows[j - 1], f_seg)
                )
            total += math.log(z)
    return total


def viterbi_align(pair: tuple[Segment, Segment], table: TranslationTable,
                  config: AlignConfig = AlignConfig()) -> AlignmentLinks:
    """Best source link per target position; NULL wins mean no link.

    Ties go to the smallest source index.
    """
    f_seg, e_seg = pair
    n, m = len(f_seg), len(e_seg)
    links: AlignmentLinks = set()
    if m == 0:
        return links
    rows = _prior_rows(m, n, config, config.tension) if n else []
    floor = config.prob_floor
    for j, e in enumerate(e_seg, start=1):
        best_score = config.null_prob * table.prob(NULL_TOKEN, e, floor)
        best_i = None
        for i, (prior, f) in enumerate(zip(rows[j - 1] if n else [], f_seg)):
            score = prior * table.prob(f, e, floor)
            if score > best_score:
                best_score = score
                best_i = i
        if best_i is not None:
            links.add((best_i, j - 1))
    return links


def write_pharaoh(alignments: list[AlignmentLinks], path) -> None:
    """One line per pair of space-separated i-j links in ascending order."""
    with open(path, "w", encoding="utf-8") as fh:
        for links in alignments:
            fh.write(" ".join(f"{i}-{j}" for i, j in sorted(links)) + "\n")


def read_pharaoh(path) -> list[AlignmentLinks]:
    alignments = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            links: AlignmentLinks = set()
            for chunk in line.split():
                try:
                    i, j = chunk.split("-")
                    links.add((int(i), int(j)))
                except ValueError as exc:
                    raise DataError(
                        f"{path}:{line_no}: bad alignment link {chunk!r}"
                    ) from exc
            alignments.append(links)
    return alignments


def write_table(table: TranslationTable, path) -> None:
    """Dump rows as 'f<TAB>e<TAB>t(e|f)' sorted by (f, e)."""
    with open(path, "w", encoding="utf-8") as fh:
        for f in sorted(table.t):
            for e in sorted(table.t[f]):
                fh.write(f"{f}\t{e}\t{table.t[f][e]!r}\n")


def read_table(path) -> TranslationTable:
    table = TranslationTable()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                f, e, p = line.rstrip("\n").split("\t")
                table.t.setdefault(f, {})[e] = float(p)
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: bad table entry") from exc
    return table
