import math
import random

import pytest

from oracles import brute_force_phrase_spans
from stylemt.errors import DataError
from stylemt.phrases import (PhrasePair, estimate_table, extract_phrases,
                             read_phrase_table, write_phrase_table)


def _spans(pairs):
    return {(p.src_span, p.tgt_span) for p in pairs}


def _tokens(n, prefix):
    return tuple(f"{prefix}{i}" for i in range(n))


class TestExtraction:
    def test_monotone_identity_links(self):
        pair = (("s0", "s1"), ("t0", "t1"))
        got = _spans(extract_phrases(pair, {(0, 0), (1, 1)}, max_len=2))
        assert got == {((0, 1), (0, 1)), ((1, 2), (1, 2)), ((0, 2), (0, 2))}

    def test_crossing_links(self):
        pair = (("s0", "s1"), ("t0", "t1"))
        got = _spans(extract_phrases(pair, {(0, 1), (1, 0)}, max_len=2))
        assert got == {((0, 1), (1, 2)), ((1, 2), (0, 1)), ((0, 2), (0, 2))}

    def test_empty_links_extract_nothing(self):
        assert extract_phrases((("a", "b"), ("x",)), set(), max_len=2) == set()

    def test_unaligned_words_extend_spans(self):
        # target position 1 unaligned: spans may absorb it on either side
        pair = (("s0", "s1"), ("t0", "t1", "t2"))
        got = _spans(extract_phrases(pair, {(0, 0), (1, 2)}, max_len=3))
        assert ((0, 1), (0, 1)) in got
        assert ((0, 1), (0, 2)) in got  # extended over unaligned t1
        assert ((1, 2), (1, 3)) in got
        assert ((1, 2), (2, 3)) in got

    def test_out_of_range_link_rejected(self):
        with pytest.raises(DataError):
            extract_phrases((("a",), ("x",)), {(1, 0)}, max_len=2)

    @pytest.mark.parametrize("max_len", [2, 3, 7])
    def test_matches_brute_force_oracle(self, max_len):
        rng = random.Random(max_len * 101)
        for _ in range(60):
            n = rng.randint(1, 6)
            m = rng.randint(1, 6)
            density = rng.random() * 0.6
            links = {
                (i, j)
                for i in range(n) for j in range(m)
                if rng.random() < density
            }
            pair = (_tokens(n, "s"), _tokens(m, "t"))
            got = _spans(extract_phrases(pair, links, max_len))
            want = brute_force_phrase_spans(n, m, links, max_len)
            assert got == want, (n, m, sorted(links), max_len)

    def test_every_pair_internally_linked_and_consistent(self):
        rng = random.Random(5)
        for _ in range(40):
            n, m = rng.randint(1, 6), rng.randint(1, 6)
            links = {
                (rng.randrange(n), rng.randrange(m))
                for _ in range(rng.randint(0, 8))
            }
            pair = (_tokens(n, "s"), _tokens(m, "t"))
            for pp in extract_phrases(pair, links, max_len=4):
                (i1, i2), (j1, j2) = pp.src_span, pp.tgt_span
                assert any(i1 <= i < i2 and j1 <= j < j2 for i, j in links)
                for i, j in links:
                    assert (i1 <= i < i2) == (j1 <= j < j2)
                assert pp.src == pair[0][i1:i2]
                assert pp.tgt == pair[1][j1:j2]


class TestEstimation:
    def test_relative_frequencies(self):
        extracted = [(("s",), ("t",))] * 3 + [(("s",), ("u",))]
        table = estimate_table(extracted)
        cands = dict((tgt, lp) for tgt, lp, _ in table.query(("s",)))
        assert abs(math.exp(cands[("t",)]) - 0.75) < 1e-12
        assert abs(math.exp(cands[("u",)]) - 0.25) < 1e-12

    def test_single_pair_has_log_zero(self):
        table = estimate_table([(("s",), ("t",))])
        [(tgt, log_fwd, log_bwd)] = table.query(("s",))
        assert tgt == ("t",) and log_fwd == 0.0 and log_bwd == 0.0

    def test_rows_sum_to_one(self):
        rng = random.Random(31)
        extracted = []
        for _ in range(200):
            src = (f"s{rng.randrange(5)}",)
            tgt = (f"t{rng.randrange(5)}",)
            extracted.append((src, tgt))
        table = estimate_table(extracted)
        for src, cands in table.entries.items():
            assert abs(sum(math.exp(lp) for _, lp, _ in cands) - 1.0) < 1e-9

    def test_backward_probabilities(self):
        extracted = [(("s",), ("t",)), (("r",), ("t",)), (("s",), ("t",))]
        table = estimate_table(extracted)
        # t seen 3 times total, twice from s
        [( _, _, log_bwd)] = table.query(("s",))
        assert abs(math.exp(log_bwd) - 2 / 3) < 1e-12

    def test_empty_input_rejected(self):
        with pytest.raises(DataError):
            estimate_table([])


class TestQuery:
    def test_best_first_with_lexicographic_ties(self):
        extracted = [(("s",), ("b",)), (("s",), ("a",)), (("s",), ("c",)),
                     (("s",), ("c",))]
        table = estimate_table(extracted)
        targets = [tgt for tgt, _, _ in table.query(("s",))]
        assert targets == [("c",), ("a",), ("b",)]

    def test_unknown_span_empty(self):
        table = estimate_table([(("s",), ("t",))])
        assert table.query(("zz",)) == []

    def test_monolingual_identity_sanity(self):
        pairs = [((w,), (w,)) for w in ("alpha", "beta", "gamma")]
        extracted = []
        for pair in pairs:
            extracted.extend(extract_phrases(pair, {(0, 0)}, max_len=2))
        table = estimate_table(extracted)
        for (w,), _ in pairs:
            top, log_fwd, _ = table.query((w,))[0]
            assert top == (w,) and log_fwd == 0.0


class TestSerialization:
    def test_round_trip_exact(self, tmp_path):
        rng = random.Random(77)
        extracted = []
        for _ in range(300):
            src = tuple(f"s{rng.randrange(4)}" for _ in range(rng.randint(1, 3)))
            tgt = tuple(f"t{rng.randrange(4)}" for _ in range(rng.randint(1, 3)))
            extracted.append((src, tgt))
        table = estimate_table(extracted)
        path = tmp_path / "pt.txt"
        write_phrase_table(table, path)
        again = read_phrase_table(path)
        assert again.entries == table.entries

    def test_file_is_sorted_and_parseable(self, tmp_path):
        table = estimate_table([(("b", "c"), ("y",)), (("a",), ("x", "z"))])
        path = tmp_path / "pt.txt"
        write_phrase_table(table, path)
        lines = path.read_text().splitlines()
        assert lines == sorted(lines)
        assert all(line.count(" ||| ") == 2 for line in lines)

    def test_bad_line_reports_position(self, tmp_path):
        path = tmp_path / "pt.txt"
        path.write_text("a ||| b ||| 0.0 0.0\nbroken line\n")
        with pytest.raises(DataError, match="2"):
            read_phrase_table(path)
