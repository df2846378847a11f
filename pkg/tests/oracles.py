"""Independent reference implementations used to check the real ones.

Everything here favors obviousness over speed: exhaustive enumeration of
span pairs, joint alignment vectors, and full derivations.
"""

import itertools
import math

from stylemt.ngram import EOS

_LN10 = math.log(10.0)


def brute_force_phrase_spans(n, m, links, max_len):
    """Every consistent span pair by direct definition: at least one link
    inside, and every link either fully inside or fully outside."""
    out = set()
    for i1 in range(n):
        for i2 in range(i1 + 1, min(i1 + max_len, n) + 1):
            for j1 in range(m):
                for j2 in range(j1 + 1, min(j1 + max_len, m) + 1):
                    inside = [
                        (i, j) for (i, j) in links
                        if i1 <= i < i2 and j1 <= j < j2
                    ]
                    if not inside:
                        continue
                    if all((i1 <= i < i2) == (j1 <= j < j2) for (i, j) in links):
                        out.add(((i1, i2), (j1, j2)))
    return out


def _prior(i, j, m, n, p0, tension, diagonal):
    """Alignment prior for target j -> source i (1-based; i=0 is NULL)."""
    if i == 0:
        return p0
    if not diagonal:
        return (1.0 - p0) / n
    feats = [-abs(k / n - j / m) for k in range(1, n + 1)]
    z = sum(math.exp(tension * h) for h in feats)
    return (1.0 - p0) * math.exp(tension * feats[i - 1]) / z


def enumeration_em(pairs, iterations, p0=0.08, tension=4.0, diagonal=True):
    """Plain EM where the E-step enumerates whole alignment vectors."""
    target_vocab = sorted({e for _, e_seg in pairs for e in e_seg})
    uniform = 1.0 / len(target_vocab)
    t = {}
    for f_seg, e_seg in pairs:
        for e in e_seg:
            t.setdefault("<NULL>", {})[e] = uniform
            for f in f_seg:
                t.setdefault(f, {})[e] = uniform

    for _ in range(iterations):
        counts = {}
        for f_seg, e_seg in pairs:
            n, m = len(f_seg), len(e_seg)
            vectors = list(itertools.product(range(n + 1), repeat=m))
            joint = []
            for vec in vectors:
                p = 1.0
                for j, i in enumerate(vec, start=1):
                    src = "<NULL>" if i == 0 else f_seg[i - 1]
                    p *= _prior(i, j, m, n, p0, tension, diagonal) * t[src][e_seg[j - 1]]
                joint.append(p)
            z = sum(joint)
            for vec, p in zip(vectors, joint):
                w = p / z
                for j, i in enumerate(vec, start=1):
                    src = "<NULL>" if i == 0 else f_seg[i - 1]
                    counts.setdefault(src, {}).setdefault(e_seg[j - 1], 0.0)
                    counts[src][e_seg[j - 1]] += w
        t = {
            f: {e: c / sum(row.values()) for e, c in row.items()}
            for f, row in counts.items()
        }
    return t


def derivation_options(src, table, oov_copy=True):
    """Per-span translation options mirroring the decoder's option rule."""
    n = len(src)
    options = {}
    covered = [False] * n
    for s in range(n):
        for e in range(s + 1, min(s + table.max_phrase_len, n) + 1):
            cands = table.query(src[s:e])
            if cands:
                options[(s, e)] = [(tgt, lp) for tgt, lp, _ in cands]
                for k in range(s, e):
                    covered[k] = True
    for p, c in enumerate(covered):
        if not c and oov_copy:
            options.setdefault((p, p + 1), []).append(((src[p],), 0.0))
    return options


def exhaustive_decode(src, table, lm, weights, oov_copy=True):
    """Best score over every segmentation, ordering, and phrase choice."""
    src = tuple(src)
    n = len(src)
    options = derivation_options(src, table, oov_copy)
    best = [None]

    # memoized LM transitions; same arithmetic, fewer repeated dict walks
    step_cache = {}

    def step(state, word):
        key = (state, word)
        if key not in step_cache:
            step_cache[key] = (
                lm.cond_log10(state, word) * _LN10, lm.advance(state, word)
            )
        return step_cache[key]

    def complete(f_phrase, f_lm, f_reorder, state):
        f_lm_total = f_lm + step(state, EOS)[0]
        score = (
            weights.phrase * f_phrase
            + weights.lm * f_lm_total
            + weights.reorder * f_reorder
        )
        if best[0] is None or score > best[0]:
            best[0] = score

    def rec(coverage, last_end, state, f_phrase, f_lm, f_reorder):
        if coverage == (1 << n) - 1:
            complete(f_phrase, f_lm, f_reorder, state)
            return
        for (s, e), cands in options.items():
            mask = ((1 << (e - s)) - 1) << s
            if coverage & mask:
                continue
            jump = -abs(s - last_end)
            for tgt, log_fwd in cands:
                st = state
                inc = 0.0
                for w in tgt:
                    winc, st = step(st, w)
                    inc += winc
                rec(coverage | mask, e, st, f_phrase + log_fwd,
                    f_lm + inc, f_reorder + jump)

    rec(0, 0, lm.begin_state(), 0.0, 0.0, 0.0)
    return best[0]
