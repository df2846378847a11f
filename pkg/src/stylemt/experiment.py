"""Weight sweeps with marginal averaging, dev-best selection, and test-set
scoring against the copy-through baseline.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .corpus import ParallelCorpus, Segment
from .decoder import DecoderConfig, Weights, decode
from .errors import ConfigError, DataError
from .metrics import (BleuReport, MatchStageConfig, MeteorReport, bleu_corpus,
                      edit_distance_summary, length_ratio_stats, meteor_corpus,
                      meteor_sentence)
from .ngram import NGramModel
from .phrases import PhraseTable

_COMPONENTS = ("phrase", "lm", "reorder")


@dataclass(frozen=True)
class SweepGrid:
    """Candidate weights per component; the sweep covers their product."""

    phrase: tuple[float, ...] = (0.2, 1.0)
    lm: tuple[float, ...] = (0.5, 1.0)
    reorder: tuple[float, ...] = (0.3, 1.0)

    def validate(self) -> None:
        for name in _COMPONENTS:
            if not getattr(self, name):
                raise ConfigError(f"sweep grid for {name} is empty")

    def combinations(self) -> list[Weights]:
        return [
            Weights(*combo)
            for combo in itertools.product(self.phrase, self.lm, self.reorder)
        ]

    def size(self) -> int:
        return len(self.phrase) * len(self.lm) * len(self.reorder)


@dataclass
class SweepResult:
    """(meteor, bleu) dev scores per weight combination."""

    grid: SweepGrid
    entries: dict[tuple[float, float, float], tuple[float, float]]
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ComponentEffect:
    """Per candidate weight of one component, mean scores over all
    combinations of the other components."""

    component: str
    means: dict[float, tuple[float, float]]  # weight -> (mean meteor, mean bleu)


def run_sweep(dev_corpus: ParallelCorpus, table: PhraseTable, lm: NGramModel,
              grid: SweepGrid = SweepGrid(),
              decoder_config: DecoderConfig = DecoderConfig(),
              meteor_config: MatchStageConfig = MatchStageConfig(),
              metadata: dict | None = None) -> SweepResult:
    """Decode the dev set once per grid point and score against references."""
    grid.validate()
    sources = dev_corpus.side(0)
    references = dev_corpus.side(1)
    entries = {}
    for weights in sorted(grid.combinations(), key=lambda w: w.as_tuple()):
        outputs = [
            decode(src, table, lm, weights, decoder_config).output
            for src in sources
        ]
        meteor = meteor_corpus(outputs, references, meteor_config)
        bleu = bleu_corpus(outputs, references)
        entries[weights.as_tuple()] = (meteor.score, bleu.score)
    return SweepResult(grid, entries, metadata or {})


def _require_complete(result: SweepResult) -> None:
    missing = [
        w.as_tuple()
        for w in result.grid.combinations()
        if w.as_tuple() not in result.entries
    ]
    if missing:
        raise DataError(f"sweep result is missing grid points: {sorted(missing)}")


def average_out(result: SweepResult, component: str) -> ComponentEffect:
    """Marginal means for one component, averaging over the other two."""
    if component not in _COMPONENTS:
        raise ConfigError(f"unknown component {component!r}")
    _require_complete(result)
    axis = _COMPONENTS.index(component)
    means = {}
    for candidate in getattr(result.grid, component):
        scores = [
            v for k, v in result.entries.items() if k[axis] == candidate
        ]
        means[candidate] = (
            sum(s[0] for s in scores) / len(scores),
            sum(s[1] for s in scores) / len(scores),
        )
    return ComponentEffect(component, means)


def select_best(result: SweepResult, metric: str = "meteor") -> Weights:
    """Argmax combination; ties go to the smallest weight triple."""
    if not result.entries:
        raise DataError("cannot select from an empty sweep result")
    idx = {"meteor": 0, "bleu": 1}.get(metric)
    if idx is None:
        raise ConfigError(f"unknown metric {metric!r}")
    best = min(result.entries.items(), key=lambda kv: (-kv[1][idx], kv[0]))
    return Weights(*best[0])


@dataclass(frozen=True)
class EvalReport:
    bleu: BleuReport
    meteor: MeteorReport


@dataclass
class TestReport:
    system: EvalReport
    original: EvalReport
    system_outputs: list[Segment]
    segment_meteor: dict[str, list[MeteorReport]]
    length_ratios: dict
    edit_distance: dict
    weights: Weights


def _score_outputs(outputs, references, meteor_config) -> EvalReport:
    return EvalReport(
        bleu=bleu_corpus(outputs, references),
        meteor=meteor_corpus(outputs, references, meteor_config),
    )


def evaluate_test(test_corpus: ParallelCorpus, table: PhraseTable,
                  lm: NGramModel, weights: Weights,
                  decoder_config: DecoderConfig = DecoderConfig(),
                  meteor_config: MatchStageConfig = MatchStageConfig()
                  ) -> TestReport:
    """Score decoded output and the untouched source against references.

    The baseline is a pure copy of the source side; the decoder is never
    invoked for it.
    """
    sources = test_corpus.side(0)
    references = test_corpus.side(1)
    outputs = [
        decode(src, table, lm, weights, decoder_config).output
        for src in sources
    ]
    system = _score_outputs(outputs, references, meteor_config)
    original = _score_outputs(sources, references, meteor_config)
    ratios_ref = length_ratio_stats(references, sources)
    ratios_sys = length_ratio_stats(outputs, sources)
    return TestReport(
        system=system,
        original=original,
        system_outputs=outputs,
        segment_meteor={
            "system": [meteor_sentence(o, r, meteor_config)
                       for o, r in zip(outputs, references)],
            "original": [meteor_sentence(s, r, meteor_config)
                         for s, r in zip(sources, references)],
        },
        length_ratios={
            "reference_vs_source": ratios_ref,
            "system_vs_source": ratios_sys,
        },
        edit_distance={
            "reference_vs_source": edit_distance_summary(references, sources),
            "system_vs_source": edit_distance_summary(outputs, sources),
        },
        weights=weights,
    )
