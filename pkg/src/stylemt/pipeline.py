"""File-level pipeline stages over a fixed workdir layout.

Layout: corpus/, align/, model/, out/, reports/, manifest.json.  Each stage
reads the previous stage's artifacts, writes its own, and updates the
manifest, which records the full resolved configuration, input digests, and
per-stage output digests -- enough to reproduce a run byte for byte.

Direction handling: the corpus keeps its data-role side names (normal and
simple); `forward` translates normal -> simple, `reverse` swaps the source
and target roles everywhere downstream (alignment, LM side, decoding) while
preprocessing stays untouched.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from contextlib import contextmanager
from dataclasses import asdict, dataclass, fields

from . import align as align_mod
from . import corpus as corpus_mod
from .corpus import ParallelCorpus, SplitSpec
from .decoder import DecoderConfig, Weights, decode_file
from .errors import ConfigError, DataError
from .experiment import SweepGrid, SweepResult, average_out, run_sweep, select_best
from .metrics import (MatchStageConfig, bleu_corpus, edit_distance_summary,
                      length_ratio_stats, meteor_corpus, meteor_sentence,
                      write_xray)
from .ngram import LMConfig, lm_train, read_arpa, write_arpa
from .phrases import estimate_table, extract_phrases, read_phrase_table, write_phrase_table

WORKDIR_SUBDIRS = ("corpus", "align", "model", "out", "reports")
MANIFEST_NAME = "manifest.json"
SIDE_LABELS = ("normal", "simple")


@dataclass
class PipelineConfig:
    """Flat, file-serializable knobs for every pipeline stage."""

    normal_path: str = ""
    simple_path: str = ""
    direction: str = "forward"  # forward | reverse
    scrub: str = "bible"        # none | bible
    train_fraction: float = 0.8
    dev_fraction: float = 0.1
    test_fraction: float = 0.1
    seed: int = 1
    min_len: int = 1
    max_len: int = 70
    align_iterations: int = 5
    align_diagonal: bool = True
    align_tension: float = 4.0
    align_optimize_tension: bool = True
    align_null_prob: float = 0.08
    align_vb: bool = True
    align_vb_alpha: float = 0.01
    max_phrase_len: int = 7
    lm_order: int = 3
    lm_discount: float = 0.75
    lm_unk_threshold: int = 1
    beam_size: int = 100
    distortion_limit: int = 6   # negative lifts the limit
    oov_copy: bool = True
    weight_phrase: float = 1.0
    weight_lm: float = 1.0
    weight_reorder: float = 1.0
    sweep_phrase: str = "0.2,1"
    sweep_lm: str = "0.5,1"
    sweep_reorder: str = "0.3,1"
    sweep_metric: str = "meteor"
    meteor_alpha: float = 0.9
    meteor_beta: float = 3.0
    meteor_gamma: float = 0.5

    def validate(self) -> None:
        if self.direction not in ("forward", "reverse"):
            raise ConfigError(f"direction must be forward or reverse, got {self.direction!r}")
        if self.scrub not in ("none", "bible"):
            raise ConfigError(f"scrub must be none or bible, got {self.scrub!r}")
        if self.sweep_metric not in ("meteor", "bleu"):
            raise ConfigError(f"sweep_metric must be meteor or bleu, got {self.sweep_metric!r}")

    # --- views onto module-level configs -------------------------------
    def source_label(self) -> str:
        return SIDE_LABELS[0] if self.direction == "forward" else SIDE_LABELS[1]

    def target_label(self) -> str:
        return SIDE_LABELS[1] if self.direction == "forward" else SIDE_LABELS[0]

    def split_spec(self) -> SplitSpec:
        return SplitSpec(self.train_fraction, self.dev_fraction,
                         self.test_fraction, self.seed)

    def align_config(self) -> align_mod.AlignConfig:
        return align_mod.AlignConfig(
            iterations=self.align_iterations,
            diagonal_enabled=self.align_diagonal,
            tension=self.align_tension,
            optimize_tension=self.align_optimize_tension,
            null_prob=self.align_null_prob,
            variational_bayes=self.align_vb,
            vb_alpha=self.align_vb_alpha,
        )

    def lm_config(self) -> LMConfig:
        return LMConfig(self.lm_order, self.lm_discount, self.lm_unk_threshold)

    def decoder_config(self) -> DecoderConfig:
        limit = self.distortion_limit if self.distortion_limit >= 0 else None
        return DecoderConfig(self.beam_size, limit, None, self.oov_copy)

    def meteor_config(self) -> MatchStageConfig:
        return MatchStageConfig(alpha=self.meteor_alpha, beta=self.meteor_beta,
                                gamma=self.meteor_gamma)

    def weights(self) -> Weights:
        return Weights(self.weight_phrase, self.weight_lm, self.weight_reorder)

    def sweep_grid(self) -> SweepGrid:
        def parse(text):
            try:
                return tuple(float(x) for x in text.split(","))
            except ValueError as exc:
                raise ConfigError(f"bad sweep list {text!r}") from exc
        return SweepGrid(parse(self.sweep_phrase), parse(self.sweep_lm),
                         parse(self.sweep_reorder))


def reverse_direction(config: PipelineConfig) -> PipelineConfig:
    """Swap the source/target roles; applying twice is the identity."""
    flipped = "reverse" if config.direction == "forward" else "forward"
    out = PipelineConfig(**{**asdict(config), "direction": flipped})
    return out


# --- config file and manifest ------------------------------------------

_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def _coerce(name: str, raw):
    kind = _FIELD_TYPES.get(name)
    if kind is None:
        raise ConfigError(f"unknown config key {name!r}")
    if isinstance(raw, str):
        if kind == "bool":
            if raw.lower() in ("true", "1", "yes"):
                return True
            if raw.lower() in ("false", "0", "no"):
                return False
            raise ConfigError(f"bad boolean for {name}: {raw!r}")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        return raw
    return raw


def read_config_file(path) -> dict:
    """Flat key=value lines; '#' starts a comment."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def resolve_config(workdir, config_file=None, overrides=None) -> PipelineConfig:
    """defaults < config file < existing manifest < explicit overrides."""
    merged = asdict(PipelineConfig())
    if config_file:
        for key, raw in read_config_file(config_file).items():
            merged[key] = _coerce(key, raw)
    manifest = load_manifest(workdir)
    if manifest:
        merged.update(manifest["config"])
    for key, raw in (overrides or {}).items():
        if raw is not None:
            merged[key] = _coerce(key, raw)
    config = PipelineConfig(**merged)
    config.validate()
    return config


def manifest_path(workdir) -> str:
    return os.path.join(workdir, MANIFEST_NAME)


def load_manifest(workdir):
    path = manifest_path(workdir)
    if not os.path.exists(path):
        return None
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def save_manifest(workdir, manifest) -> None:
    with open(manifest_path(workdir), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def init_workdir(workdir) -> None:
    for sub in WORKDIR_SUBDIRS:
        os.makedirs(os.path.join(workdir, sub), exist_ok=True)


@contextmanager
def workdir_lock(workdir):
    """One pipeline invocation per workdir at a time."""
    os.makedirs(workdir, exist_ok=True)
    path = os.path.join(workdir, ".lock")
    try:
        fd = os.open(path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise DataError(
            f"workdir {workdir} is locked ({path} exists); "
            "another invocation may be running"
        )
    try:
        yield
    finally:
        os.close(fd)
        os.unlink(path)


def _update_manifest(workdir, config: PipelineConfig, stage: str,
                     record: dict) -> None:
    manifest = load_manifest(workdir) or {"config": {}, "inputs": {}, "stages": {}}
    manifest["config"] = asdict(config)
    manifest.setdefault("stages", {})[stage] = record
    save_manifest(workdir, manifest)


def _record_outputs(workdir, paths) -> dict:
    return {
        rel: _sha256(os.path.join(workdir, rel))
        for rel in sorted(paths)
    }


def _require(workdir, rel_path: str, producer: str) -> str:
    path = os.path.join(workdir, rel_path)
    if not os.path.exists(path):
        raise DataError(
            f"missing {rel_path}; run the {producer!r} subcommand first"
        )
    return path


def _read_segments(path):
    with open(path, encoding="utf-8") as fh:
        return [tuple(line.split()) for line in fh.read().splitlines()]


def _write_segments(path, segments) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for seg in segments:
            fh.write(" ".join(seg) + "\n")


def _load_split(workdir, split: str, producer: str = "prepare") -> ParallelCorpus:
    normal = _read_segments(_require(workdir, f"corpus/{split}.normal.txt", producer))
    simple = _read_segments(_require(workdir, f"corpus/{split}.simple.txt", producer))
    if len(normal) != len(simple):
        raise DataError(f"{split} split sides have different lengths")
    return ParallelCorpus(list(zip(normal, simple)))


def _oriented(corpus: ParallelCorpus, config: PipelineConfig) -> ParallelCorpus:
    """Corpus with pairs as (source, target) for the configured direction."""
    if config.direction == "forward":
        return corpus
    return ParallelCorpus(
        [(b, a) for a, b in corpus.pairs],
        side_labels=(corpus.side_labels[1], corpus.side_labels[0]),
    )


# --- stages --------------------------------------------------------------

def stage_prepare(workdir, config: PipelineConfig) -> dict:
    """Scrub, tokenize, split, truecase, clean; writes the corpus/ tree."""
    init_workdir(workdir)
    for name, path in (("normal", config.normal_path), ("simple", config.simple_path)):
        if not path:
            raise ConfigError(f"{name}_path is not set")
        if not os.path.exists(path):
            raise DataError(f"{name}_path {path} does not exist")

    raw = corpus_mod.load_parallel(config.normal_path, config.simple_path)
    notes = []
    simple_lines = [" ".join(seg) for seg in raw.side(1)]
    if config.scrub == "bible":
        simple_lines = [corpus_mod.scrub_simple_side(line) for line in simple_lines]
        notes.append("scrub applied uniformly to all splits of the simple side")
    pairs = [
        (corpus_mod.tokenize(" ".join(normal)), corpus_mod.tokenize(simple))
        for (normal, _), simple in zip(raw.pairs, simple_lines)
    ]
    full = ParallelCorpus(pairs)

    spec = config.split_spec()
    splits = dict(zip(("train", "dev", "test"), corpus_mod.split_corpus(full, spec)))
    assignments = corpus_mod.split_assignments(full, spec)

    truecasers = {
        side: corpus_mod.train_truecaser(splits["train"], idx)
        for idx, side in enumerate(SIDE_LABELS)
    }
    for name, split in splits.items():
        recased = [
            (corpus_mod.apply_truecaser(truecasers["normal"], a),
             corpus_mod.apply_truecaser(truecasers["simple"], b))
            for a, b in split.pairs
        ]
        kept = [p for p in recased if corpus_mod.clean_pair(p, config.min_len, config.max_len)]
        splits[name] = ParallelCorpus(kept)

    outputs = []
    for name, split in splits.items():
        for idx, side in enumerate(SIDE_LABELS):
            rel = f"corpus/{name}.{side}.txt"
            _write_segments(os.path.join(workdir, rel), split.side(idx))
            outputs.append(rel)
    for side in SIDE_LABELS:
        rel = f"corpus/truecase.{side}.tsv"
        corpus_mod.write_truecase_model(truecasers[side], os.path.join(workdir, rel))
        outputs.append(rel)
    rel = "corpus/split_manifest.txt"
    with open(os.path.join(workdir, rel), "w", encoding="utf-8") as fh:
        for idx, label in enumerate(assignments):
            fh.write(f"{idx}\t{label}\n")
    outputs.append(rel)

    cleaned = ParallelCorpus(
        [p for split in splits.values() for p in split.pairs]
    )
    stats = corpus_mod.compute_stats(cleaned)
    rel = "corpus/stats.json"
    with open(os.path.join(workdir, rel), "w", encoding="utf-8") as fh:
        json.dump(asdict(stats), fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs.append(rel)

    record = {
        "outputs": _record_outputs(workdir, outputs),
        "split_sizes": {name: len(split) for name, split in splits.items()},
        "notes": notes,
    }
    manifest = load_manifest(workdir) or {"config": {}, "inputs": {}, "stages": {}}
    manifest["inputs"] = {
        "normal": {"path": config.normal_path, "sha256": _sha256(config.normal_path)},
        "simple": {"path": config.simple_path, "sha256": _sha256(config.simple_path)},
    }
    manifest["config"] = asdict(config)
    manifest.setdefault("stages", {})["prepare"] = record
    save_manifest(workdir, manifest)
    return record


def stage_align(workdir, config: PipelineConfig) -> dict:
    """EM word alignment on the training split, written in pharaoh format."""
    init_workdir(workdir)
    train = _oriented(_load_split(workdir, "train"), config)
    table, tension = align_mod.em_train(train, config.align_config())
    viterbi_cfg = align_mod.AlignConfig(
        **{**asdict(config.align_config()), "tension": tension}
    )
    alignments = [
        align_mod.viterbi_align(pair, table, viterbi_cfg) for pair in train.pairs
    ]
    align_mod.write_pharaoh(alignments, os.path.join(workdir, "align/train.align"))
    align_mod.write_table(table, os.path.join(workdir, "align/ttable.tsv"))
    record = {
        "outputs": _record_outputs(workdir, ["align/train.align", "align/ttable.tsv"]),
        "tension": tension,
        "direction": config.direction,
    }
    _update_manifest(workdir, config, "align", record)
    return record


def stage_phrases(workdir, config: PipelineConfig) -> dict:
    """Extract consistent phrase pairs and estimate the phrase table."""
    init_workdir(workdir)
    train = _oriented(_load_split(workdir, "train"), config)
    alignments = align_mod.read_pharaoh(_require(workdir, "align/train.align", "align"))
    if len(alignments) != len(train):
        raise DataError("alignment file does not match the training split")
    def all_pairs():
        for pair, links in zip(train.pairs, alignments):
            yield from extract_phrases(pair, links, config.max_phrase_len)
    table = estimate_table(all_pairs(), config.max_phrase_len)
    write_phrase_table(table, os.path.join(workdir, "model/phrase-table.txt"))
    record = {
        "outputs": _record_outputs(workdir, ["model/phrase-table.txt"]),
        "source_phrases": len(table.entries),
    }
    _update_manifest(workdir, config, "phrases", record)
    return record


def stage_lm(workdir, config: PipelineConfig) -> dict:
    """Train the n-gram model on the target side of the training split."""
    init_workdir(workdir)
    train = _oriented(_load_split(workdir, "train"), config)
    model = lm_train(train.side(1), config.lm_config())
    write_arpa(model, os.path.join(workdir, "model/lm.arpa"))
    record = {
        "outputs": _record_outputs(workdir, ["model/lm.arpa"]),
        "order": config.lm_order,
        "trained_on": config.target_label(),
    }
    _update_manifest(workdir, config, "lm", record)
    return record


def _load_models(workdir, config: PipelineConfig):
    table = read_phrase_table(
        _require(workdir, "model/phrase-table.txt", "phrases"), config.max_phrase_len
    )
    lm = read_arpa(_require(workdir, "model/lm.arpa", "lm"))
    return table, lm


def _resolve_weights(workdir, config: PipelineConfig) -> tuple[Weights, str]:
    """Best sweep weights when a sweep report exists, config weights otherwise."""
    path = os.path.join(workdir, "reports/sweep.json")
    if os.path.exists(path):
        with open(path, encoding="utf-8") as fh:
            report = json.load(fh)
        triple = report["best"][config.sweep_metric]
        return Weights(*triple), "sweep"
    return config.weights(), "config"


def stage_decode(workdir, config: PipelineConfig, input_rel=None, tag="test") -> dict:
    """Batch-decode a tokenized file (default: the test source side)."""
    init_workdir(workdir)
    table, lm = _load_models(workdir, config)
    weights, weights_from = _resolve_weights(workdir, config)
    if input_rel is None:
        src_path = _require(
            workdir, f"corpus/test.{config.source_label()}.txt", "prepare"
        )
    else:
        src_path = input_rel
        if not os.path.exists(src_path):
            raise DataError(f"input file {src_path} does not exist")
    out_rel = f"out/{tag}.out"
    feats_rel = f"out/{tag}.feats.tsv"
    decode_file(src_path, os.path.join(workdir, out_rel),
                os.path.join(workdir, feats_rel), table, lm, weights,
                config.decoder_config())
    record = {
        "outputs": _record_outputs(workdir, [out_rel, feats_rel]),
        "weights": list(weights.as_tuple()),
        "weights_from": weights_from,
    }
    _update_manifest(workdir, config, "decode", record)
    return record


def _eval_payload(outputs, references, config: PipelineConfig):
    meteor_cfg = config.meteor_config()
    return {
        "bleu": asdict(bleu_corpus(outputs, references)),
        "meteor": asdict(meteor_corpus(outputs, references, meteor_cfg)),
    }


def stage_eval(workdir, config: PipelineConfig) -> dict:
    """Score decoded test output against the target side references."""
    init_workdir(workdir)
    outputs = _read_segments(_require(workdir, "out/test.out", "decode"))
    refs = _read_segments(
        _require(workdir, f"corpus/test.{config.target_label()}.txt", "prepare")
    )
    if len(outputs) != len(refs):
        raise DataError("decoded output does not match the test split size")
    payload = _eval_payload(outputs, refs, config)
    with open(os.path.join(workdir, "reports/eval.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    meteor_cfg = config.meteor_config()
    write_xray(
        [meteor_sentence(o, r, meteor_cfg) for o, r in zip(outputs, refs)],
        os.path.join(workdir, "reports/eval.xray.txt"),
    )
    record = {
        "outputs": _record_outputs(
            workdir, ["reports/eval.json", "reports/eval.xray.txt"]
        )
    }
    _update_manifest(workdir, config, "eval", record)
    return record


def stage_sweep(workdir, config: PipelineConfig) -> dict:
    """Grid sweep of the component weights on the dev split."""
    init_workdir(workdir)
    dev = _oriented(_load_split(workdir, "dev"), config)
    table, lm = _load_models(workdir, config)
    grid = config.sweep_grid()
    result = run_sweep(dev, table, lm, grid, config.decoder_config(),
                       config.meteor_config())
    payload = {
        "grid": {"phrase": list(grid.phrase), "lm": list(grid.lm),
                 "reorder": list(grid.reorder)},
        "metric_by_weights": {
            ",".join(repr(w) for w in key): {"meteor": m, "bleu": b}
            for key, (m, b) in sorted(result.entries.items())
        },
        "best": {
            metric: list(select_best(result, metric).as_tuple())
            for metric in ("meteor", "bleu")
        },
    }
    with open(os.path.join(workdir, "reports/sweep.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(workdir, "reports/component_effects.csv"), "w",
              encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["component", "weight", "mean_meteor", "mean_bleu"])
        for component in ("phrase", "lm", "reorder"):
            effect = average_out(result, component)
            for weight in sorted(effect.means):
                mean_meteor, mean_bleu = effect.means[weight]
                writer.writerow([component, repr(weight), repr(mean_meteor),
                                 repr(mean_bleu)])
    record = {
        "outputs": _record_outputs(
            workdir, ["reports/sweep.json", "reports/component_effects.csv"]
        ),
        "combinations": grid.size(),
    }
    _update_manifest(workdir, config, "sweep", record)
    return record


def stage_report(workdir, config: PipelineConfig) -> dict:
    """Decode the test set and report system vs copy-through baseline."""
    init_workdir(workdir)
    stage_decode(workdir, config)
    outputs = _read_segments(os.path.join(workdir, "out/test.out"))
    sources = _read_segments(
        _require(workdir, f"corpus/test.{config.source_label()}.txt", "prepare")
    )
    refs = _read_segments(
        _require(workdir, f"corpus/test.{config.target_label()}.txt", "prepare")
    )
    weights, weights_from = _resolve_weights(workdir, config)
    payload = {
        "weights": list(weights.as_tuple()),
        "weights_from": weights_from,
        "system": _eval_payload(outputs, refs, config),
        "original": _eval_payload(sources, refs, config),
        "length_ratios": {
            "reference_vs_source": _ratio_payload(refs, sources),
            "system_vs_source": _ratio_payload(outputs, sources),
        },
        "edit_distance": {
            "reference_vs_source": _edit_payload(refs, sources),
            "system_vs_source": _edit_payload(outputs, sources),
        },
    }
    with open(os.path.join(workdir, "reports/report.json"), "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    meteor_cfg = config.meteor_config()
    write_xray(
        [meteor_sentence(o, r, meteor_cfg) for o, r in zip(outputs, refs)],
        os.path.join(workdir, "reports/report.xray.txt"),
    )
    record = {
        "outputs": _record_outputs(
            workdir, ["reports/report.json", "reports/report.xray.txt"]
        ),
        "weights": list(weights.as_tuple()),
    }
    _update_manifest(workdir, config, "report", record)
    return record


def _ratio_payload(outputs, sources):
    stats = length_ratio_stats(outputs, sources)
    return {
        "min": stats.minimum, "q1": stats.q1, "median": stats.median,
        "q3": stats.q3, "max": stats.maximum,
    }


def _edit_payload(outputs, sources):
    summary = edit_distance_summary(outputs, sources)
    return {
        "histogram": {str(k): v for k, v in summary["histogram"].items()},
        "mean": summary["mean"],
        "median": summary["median"],
    }


def stage_reverse(workdir, config: PipelineConfig) -> dict:
    """Flip the translation direction recorded in the manifest."""
    init_workdir(workdir)
    flipped = reverse_direction(config)
    manifest = load_manifest(workdir) or {"config": {}, "inputs": {}, "stages": {}}
    manifest["config"] = asdict(flipped)
    save_manifest(workdir, manifest)
    return {"direction": flipped.direction}
