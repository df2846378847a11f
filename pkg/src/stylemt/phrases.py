"""Alignment-consistent phrase pair extraction and relative-frequency tables.

A span pair is extractable iff it contains at least one alignment link and
no link crosses its boundary; spans may extend over unaligned boundary
words on the target side (unaligned source words are covered by the outer
span loop itself).
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .corpus import Segment
from .errors import DataError

DEFAULT_MAX_PHRASE_LEN = 7


@dataclass(frozen=True)
class PhrasePair:
    src: tuple[str, ...]
    tgt: tuple[str, ...]
    src_span: tuple[int, int]
    tgt_span: tuple[int, int]


def extract_phrases(pair: tuple[Segment, Segment], links,
                    max_len: int = DEFAULT_MAX_PHRASE_LEN) -> set[PhrasePair]:
    """All consistent phrase pairs of one sentence pair, spans half-open."""
    f_seg, e_seg = pair
    n, m = len(f_seg), len(e_seg)
    for i, j in links:
        if not (0 <= i < n and 0 <= j < m):
            raise DataError(f"link {i}-{j} out of range for lengths {n}/{m}")

    aligned_tgt = {j for _, j in links}
    tgt_to_src = defaultdict(set)
    for i, j in links:
        tgt_to_src[j].add(i)

    out: set[PhrasePair] = set()
    for i1 in range(n):
        for i2 in range(i1 + 1, min(i1 + max_len, n) + 1):
            linked_tgt = {j for i, j in links if i1 <= i < i2}
            if not linked_tgt:
                continue
            j1, j2 = min(linked_tgt), max(linked_tgt) + 1
            if any(
                not i1 <= i < i2
                for j in range(j1, j2)
                for i in tgt_to_src.get(j, ())
            ):
                continue
            ja = j1
            while True:
                jb = j2
                while True:
                    if jb - ja <= max_len:
                        out.add(PhrasePair(
                            f_seg[i1:i2], e_seg[ja:jb], (i1, i2), (ja, jb)
                        ))
                    if jb >= m or jb in aligned_tgt or jb - ja >= max_len:
                        break
                    jb += 1
                if ja == 0 or (ja - 1) in aligned_tgt or j2 - ja >= max_len:
                    break
                ja -= 1
    return out


@dataclass
class PhraseTable:
    """src phrase -> candidates (tgt, log forward, log backward), best first."""

    entries: dict[tuple[str, ...], list[tuple[tuple[str, ...], float, float]]] = field(
        default_factory=dict
    )
    max_phrase_len: int = DEFAULT_MAX_PHRASE_LEN

    def query(self, src: Segment) -> list[tuple[tuple[str, ...], float, float]]:
        return self.entries.get(tuple(src), [])

    def log_fwd(self, src: Segment, tgt: Segment) -> float | None:
        for cand, log_fwd, _ in self.entries.get(tuple(src), []):
            if cand == tuple(tgt):
                return log_fwd
        return None


def estimate_table(extracted, max_phrase_len: int = DEFAULT_MAX_PHRASE_LEN
                   ) -> PhraseTable:
    """Relative-frequency estimates over extracted pairs (with multiplicity).

    Accepts any iterable of PhrasePair or (src, tgt) tuples; counts are
    per occurrence.
    """
    counts: Counter[tuple[tuple, tuple]] = Counter()
    for item in extracted:
        if isinstance(item, PhrasePair):
            counts[(item.src, item.tgt)] += 1
        else:
            src, tgt = item
            counts[(tuple(src), tuple(tgt))] += 1
    if not counts:
        raise DataError("no phrase pairs to estimate a table from")

    src_totals: Counter = Counter()
    tgt_totals: Counter = Counter()
    for (src, tgt), c in counts.items():
        src_totals[src] += c
        tgt_totals[tgt] += c

    grouped: dict[tuple, list] = defaultdict(list)
    for (src, tgt), c in counts.items():
        grouped[src].append((
            tgt,
            math.log(c / src_totals[src]),
            math.log(c / tgt_totals[tgt]),
        ))
    entries = {
        src: sorted(cands, key=lambda x: (-x[1], x[0]))
        for src, cands in sorted(grouped.items())
    }
    return PhraseTable(entries, max_phrase_len)


def write_phrase_table(table: PhraseTable, path) -> None:
    """'src ||| tgt ||| log_fwd log_bwd' lines sorted by (src, tgt)."""
    with open(path, "w", encoding="utf-8") as fh:
        for src in sorted(table.entries):
            for tgt, log_fwd, log_bwd in sorted(table.entries[src]):
                fh.write(
                    f"{' '.join(src)} ||| {' '.join(tgt)} ||| {log_fwd!r} {log_bwd!r}\n"
                )


def read_phrase_table(path, max_phrase_len: int = DEFAULT_MAX_PHRASE_LEN
                      ) -> PhraseTable:
    grouped: dict[tuple, list] = defaultdict(list)
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(" ||| ")
            if len(parts) != 3:
                raise DataError(f"{path}:{line_no}: expected 3 '|||' fields")
            src = tuple(parts[0].split())
            tgt = tuple(parts[1].split())
            try:
                log_fwd, log_bwd = (float(x) for x in parts[2].split())
            except ValueError as exc:
                raise DataError(f"{path}:{line_no}: bad probability field") from exc
            grouped[src].append((tgt, log_fwd, log_bwd))
    entries = {
        src: sorted(cands, key=lambda x: (-x[1], x[0]))
        for src, cands in sorted(grouped.items())
    }
    return PhraseTable(entries, max_phrase_len)
