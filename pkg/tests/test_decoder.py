import math
import random

import pytest

from oracles import exhaustive_decode
from stylemt.decoder import (DecoderConfig, Derivation, Weights, decode,
                             decode_file, derivation_features, distortion,
                             rescore)
from stylemt.errors import DecodeError
from stylemt.ngram import LMConfig, lm_train
from stylemt.phrases import estimate_table

BIG_BEAM = DecoderConfig(beam_size=10 ** 6, distortion_limit=None)


def identity_table(vocab):
    return estimate_table([((w,), (w,)) for w in vocab])


def small_lm(vocab, seed=0, order=2):
    rng = random.Random(seed)
    corpus = [tuple(rng.choices(vocab, k=rng.randint(1, 6))) for _ in range(12)]
    return lm_train(corpus, LMConfig(order=order))


def random_instance(rng, max_src=6, max_entries=20):
    """A random decoding problem where every position is coverable."""
    src_vocab = [f"s{i}" for i in range(5)]
    tgt_vocab = [f"t{i}" for i in range(5)]
    n = rng.randint(1, max_src)
    src = tuple(rng.choices(src_vocab, k=n))
    extracted = []
    for w in set(src):
        for _ in range(rng.randint(1, 2)):
            extracted.append(
                ((w,), tuple(rng.choices(tgt_vocab, k=rng.randint(1, 2))))
            )
    while len(extracted) < max_entries and rng.random() < 0.7:
        s = rng.randrange(n)
        e = rng.randint(s + 1, min(n, s + 3))
        extracted.append(
            (src[s:e], tuple(rng.choices(tgt_vocab, k=rng.randint(1, 3))))
        )
    table = estimate_table(extracted)
    lm = small_lm(tgt_vocab, seed=rng.randrange(10 ** 6))
    weights = Weights(
        rng.choice([0.2, 0.5, 1.0, 2.0]),
        rng.choice([0.0, 0.3, 1.0]),
        rng.choice([0.0, 0.5, 1.0]),
    )
    return src, table, lm, weights


class TestDistortion:
    def test_monotone_is_free(self):
        assert distortion(2, 2) == 0

    def test_forward_jump(self):
        assert distortion(2, 5) == -3

    def test_backward_jump(self):
        assert distortion(4, 0) == -4


class TestIdentityConfiguration:
    def test_identity_table_returns_input(self):
        vocab = ["a", "b", "c", "d"]
        table = identity_table(vocab)
        lm = small_lm(vocab)
        src = ("b", "a", "d", "c")
        result = decode(src, table, lm, Weights(1.0, 0.0, 1.0), BIG_BEAM)
        assert result.output == src
        assert result.features.reorder == 0.0
        assert result.features.phrase == 0.0

    def test_oov_copy_through(self):
        table = identity_table(["a"])
        lm = small_lm(["a"])
        result = decode(("a", "mystery"), table, lm, Weights(), BIG_BEAM)
        assert result.output == ("a", "mystery")
        assert result.features.phrase == 0.0

    def test_oov_without_copy_raises_with_token(self):
        table = identity_table(["a"])
        lm = small_lm(["a"])
        config = DecoderConfig(beam_size=10, oov_copy=False)
        with pytest.raises(DecodeError, match="mystery"):
            decode(("a", "mystery"), table, lm, Weights(), config)

    def test_empty_source_rejected(self):
        with pytest.raises(DecodeError):
            decode((), identity_table(["a"]), small_lm(["a"]), Weights())


class TestOracleEquality:
    def test_best_score_matches_exhaustive_enumeration(self):
        rng = random.Random(1234)
        for _ in range(60):
            src, table, lm, weights = random_instance(rng)
            got = decode(src, table, lm, weights, BIG_BEAM)
            want = exhaustive_decode(src, table, lm, weights)
            assert abs(got.score - want) < 1e-9, (src, weights)

    def test_score_equals_weighted_features(self):
        rng = random.Random(77)
        for _ in range(40):
            src, table, lm, weights = random_instance(rng)
            result = decode(src, table, lm, weights, BIG_BEAM)
            assert abs(result.score - result.features.dot(weights)) < 1e-9

    def test_recomputed_features_match_reported(self):
        rng = random.Random(78)
        for _ in range(40):
            src, table, lm, weights = random_instance(rng)
            result = decode(src, table, lm, weights, BIG_BEAM)
            recomputed = derivation_features(result.derivation, table, lm)
            assert abs(recomputed.phrase - result.features.phrase) < 1e-9
            assert abs(recomputed.lm - result.features.lm) < 1e-9
            assert recomputed.reorder == result.features.reorder

    def test_coverage_partition(self):
        rng = random.Random(79)
        for _ in range(40):
            src, table, lm, weights = random_instance(rng)
            result = decode(src, table, lm, weights, BIG_BEAM)
            covered = sorted(
                k for s, e, _ in result.derivation.apps for k in range(s, e)
            )
            assert covered == list(range(len(src)))


class TestPruning:
    def test_beam_monotonicity(self):
        rng = random.Random(4321)
        for _ in range(30):
            src, table, lm, weights = random_instance(rng)
            scores = []
            for beam in (1, 2, 5, 20, 10 ** 6):
                config = DecoderConfig(beam_size=beam, distortion_limit=None)
                scores.append(decode(src, table, lm, weights, config).score)
            for small, large in zip(scores, scores[1:]):
                assert large >= small - 1e-12

    def test_distortion_limit_still_completes(self):
        rng = random.Random(5)
        for _ in range(20):
            src, table, lm, weights = random_instance(rng)
            config = DecoderConfig(beam_size=20, distortion_limit=1)
            result = decode(src, table, lm, weights, config)
            assert len(result.output) > 0

    def test_threshold_pruning_keeps_valid_output(self):
        rng = random.Random(6)
        src, table, lm, weights = random_instance(rng)
        config = DecoderConfig(beam_size=50, threshold_ratio=0.5)
        result = decode(src, table, lm, weights, config)
        covered = sorted(
            k for s, e, _ in result.derivation.apps for k in range(s, e)
        )
        assert covered == list(range(len(src)))


class TestRescore:
    def test_matches_decode_score_at_same_weights(self):
        rng = random.Random(99)
        for _ in range(25):
            src, table, lm, weights = random_instance(rng)
            result = decode(src, table, lm, weights, BIG_BEAM)
            assert abs(
                rescore(result.derivation, table, lm, weights) - result.score
            ) < 1e-9

    def test_zero_weights_zero_score(self):
        src, table, lm, _ = random_instance(random.Random(3))
        result = decode(src, table, lm, Weights(), BIG_BEAM)
        assert rescore(result.derivation, table, lm, Weights(0, 0, 0)) == 0.0

    def test_doubling_weights_doubles_score(self):
        rng = random.Random(15)
        for _ in range(20):
            src, table, lm, weights = random_instance(rng)
            result = decode(src, table, lm, weights, BIG_BEAM)
            doubled = Weights(*(2 * w for w in weights.as_tuple()))
            assert abs(
                rescore(result.derivation, table, lm, doubled) - 2 * result.score
            ) < 1e-9

    def test_positive_scaling_preserves_argmax(self):
        rng = random.Random(16)
        for _ in range(20):
            src, table, lm, weights = random_instance(rng)
            base = decode(src, table, lm, weights, BIG_BEAM)
            scaled_weights = Weights(*(3.5 * w for w in weights.as_tuple()))
            scaled = decode(src, table, lm, scaled_weights, BIG_BEAM)
            assert scaled.derivation == base.derivation

    def test_unknown_phrase_pair_rejected(self):
        table = identity_table(["a"])
        lm = small_lm(["a"])
        bogus = Derivation(("a",), ((0, 1, ("zz", "ww")),))
        with pytest.raises(DecodeError):
            derivation_features(bogus, table, lm)


class TestBatchDecode:
    def test_files_written_in_order(self, tmp_path):
        vocab = ["a", "b", "c"]
        table = identity_table(vocab)
        lm = small_lm(vocab)
        src_path = tmp_path / "in.txt"
        src_path.write_text("a b\nc\nb b a\n")
        out_path = tmp_path / "out.txt"
        feats_path = tmp_path / "feats.tsv"
        decode_file(src_path, out_path, feats_path, table, lm,
                    Weights(1.0, 0.0, 1.0), DecoderConfig())
        assert out_path.read_text() == "a b\nc\nb b a\n"
        rows = [line.split("\t") for line in feats_path.read_text().splitlines()]
        assert len(rows) == 3 and all(len(r) == 4 for r in rows)
        for row in rows:
            f_phrase, f_lm, f_reorder, score = map(float, row)
            assert abs(score - (1.0 * f_phrase + 0.0 * f_lm + 1.0 * f_reorder)) < 1e-9
