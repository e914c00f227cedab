"""JIT-compiled twin of the lattice decoder and its brute-force oracle.

The exhaustive decoder-vs-oracle check runs over every string of length
<= 12 from a 3-character alphabet (797,161 strings); that is far outside
what the pure-Python oracle can enumerate in the time budget, so this
module re-implements both sides with numba over a fixed toy lexicon.
The test suite first pins these twins to the production implementations
(exhaustively at short lengths, by sampling at long lengths), then runs
the full exhaustive comparison jitted.

Encoding: alphabet "abc" -> 0..2; tags sorted("a","n","o","v") -> 0..3
so integer order equals lexicographic tag order; BOS=4, EOS=5 index the
transition matrix.  Scores accumulate in exactly the same order as the
production code (neg - emission - transition) so float ties agree
bit-for-bit.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MAX_LEN = 12
N_TAG = 6  # 4 real tags + BOS + EOS
BOS = 4
EOS = 5
OOV_TAG = 2  # "o"
OOV_LP = -12.0

ALPHABET = "abc"
TAG_NAMES = ("a", "n", "o", "v")

# 6-entry toy lexicon, tie-rich on purpose: "a" and "ab" are tag-ambiguous
# with equal emissions, and "c" has no entry so it exercises OOV fallback.
LEX_ROWS = [
    ("a", "n", -1.0),
    ("a", "v", -1.0),
    ("b", "n", -1.0),
    ("ab", "n", -2.0),
    ("ab", "v", -2.0),
    ("bc", "a", -1.5),
]
TRANSITIONS = {
    ("<s>", "n"): -0.5,
    ("n", "v"): -0.25,
    ("v", "n"): -0.25,
    ("a", "o"): -0.5,
    ("o", "</s>"): -0.5,
}
TRANS_FLOOR = 0.0


def build_tables():
    """Dense lookup tables for the jitted decoders."""
    tag_id = {name: i for i, name in enumerate(TAG_NAMES)}
    tag_id["<s>"] = BOS
    tag_id["</s>"] = EOS
    char_id = {ch: i for i, ch in enumerate(ALPHABET)}

    trans = np.full((N_TAG, N_TAG), TRANS_FLOOR, dtype=np.float64)
    for (prev, nxt), lp in TRANSITIONS.items():
        trans[tag_id[prev], tag_id[nxt]] = lp

    # emissions bucketed by surface length; production lookup returns
    # entries in sorted-tag order, mirrored here by sorting on tag id
    e1_cnt = np.zeros(3, dtype=np.int64)
    e1_tag = np.zeros((3, 2), dtype=np.int64)
    e1_lp = np.zeros((3, 2), dtype=np.float64)
    e2_cnt = np.zeros(9, dtype=np.int64)
    e2_tag = np.zeros((9, 2), dtype=np.int64)
    e2_lp = np.zeros((9, 2), dtype=np.float64)
    by_surface: dict[str, list] = {}
    for surface, tag, lp in LEX_ROWS:
        by_surface.setdefault(surface, []).append((tag_id[tag], lp))
    for surface, entries in by_surface.items():
        entries.sort()
        if len(surface) == 1:
            code = char_id[surface]
            e1_cnt[code] = len(entries)
            for k, (t, lp) in enumerate(entries):
                e1_tag[code, k] = t
                e1_lp[code, k] = lp
        else:
            code = char_id[surface[0]] * 3 + char_id[surface[1]]
            e2_cnt[code] = len(entries)
            for k, (t, lp) in enumerate(entries):
                e2_tag[code, k] = t
                e2_lp[code, k] = lp
    return trans, e1_cnt, e1_tag, e1_lp, e2_cnt, e2_tag, e2_lp


@njit(cache=True)
def _edges(s, n, i, e1_cnt, e1_tag, e1_lp, e2_cnt, e2_tag, e2_lp,
           el, et, ee):
    """Fill outgoing edges at position i; returns the edge count."""
    cnt = 0
    c = s[i]
    for k in range(e1_cnt[c]):
        el[cnt] = 1
        et[cnt] = e1_tag[c, k]
        ee[cnt] = e1_lp[c, k]
        cnt += 1
    if e1_cnt[c] == 0:
        el[cnt] = 1
        et[cnt] = OOV_TAG
        ee[cnt] = OOV_LP
        cnt += 1
    if i + 2 <= n:
        code = s[i] * 3 + s[i + 1]
        for k in range(e2_cnt[code]):
            el[cnt] = 2
            et[cnt] = e2_tag[code, k]
            ee[cnt] = e2_lp[code, k]
            cnt += 1
    return cnt


@njit(cache=True)
def _cand_beats(cneg, cntok, plens, ptags, pntok, add_len, add_tag,
                oneg, ontok, olens, otags):
    """Tie rule: (neg score, ntok, neg lens, tags) lexicographic compare.

    The candidate path is the parent prefix (plens/ptags, pntok tokens)
    plus one appended token.  True iff the candidate strictly wins.
    """
    if cneg != oneg:
        return cneg < oneg
    if cntok != ontok:
        return cntok < ontok
    for k in range(cntok):
        a = plens[k] if k < pntok else add_len
        if a != olens[k]:
            return a > olens[k]  # longer token first => smaller neg length
    for k in range(cntok):
        a = ptags[k] if k < pntok else add_tag
        if a != otags[k]:
            return a < otags[k]
    return False


@njit(cache=True)
def viterbi(s, n, trans, e1_cnt, e1_tag, e1_lp, e2_cnt, e2_tag, e2_lp,
            out_lens, out_tags):
    """Lattice decode; writes lens/tags into out arrays, returns ntok."""
    neg = np.zeros((n + 1, N_TAG), dtype=np.float64)
    ntok = np.zeros((n + 1, N_TAG), dtype=np.int64)
    lens = np.zeros((n + 1, N_TAG, MAX_LEN), dtype=np.int64)
    tags = np.zeros((n + 1, N_TAG, MAX_LEN), dtype=np.int64)
    used = np.zeros((n + 1, N_TAG), dtype=np.uint8)
    used[0, BOS] = 1
    el = np.zeros(6, dtype=np.int64)
    et = np.zeros(6, dtype=np.int64)
    ee = np.zeros(6, dtype=np.float64)
    for i in range(n):
        ecnt = _edges(s, n, i, e1_cnt, e1_tag, e1_lp, e2_cnt, e2_tag, e2_lp,
                      el, et, ee)
        for pt in range(N_TAG):
            if used[i, pt] == 0:
                continue
            for e in range(ecnt):
                length = el[e]
                tg = et[e]
                j = i + length
                cneg = neg[i, pt] - ee[e] - trans[pt, tg]
                cntok = ntok[i, pt] + 1
                if used[j, tg] == 1 and not _cand_beats(
                    cneg, cntok, lens[i, pt], tags[i, pt], ntok[i, pt],
                    length, tg, neg[j, tg], ntok[j, tg], lens[j, tg],
                    tags[j, tg],
                ):
                    continue
                neg[j, tg] = cneg
                ntok[j, tg] = cntok
                for k in range(ntok[i, pt]):
                    lens[j, tg, k] = lens[i, pt, k]
                    tags[j, tg, k] = tags[i, pt, k]
                lens[j, tg, cntok - 1] = length
                tags[j, tg, cntok - 1] = tg
                used[j, tg] = 1
    if n == 0:
        return 0
    have = False
    bneg = 0.0
    bntok = 0
    for t in range(N_TAG):
        if used[n, t] == 0:
            continue
        fneg = neg[n, t] - trans[t, EOS]
        if not have or _cand_beats(
            fneg, ntok[n, t], lens[n, t], tags[n, t], ntok[n, t],
            0, 0, bneg, bntok, out_lens, out_tags,
        ):
            have = True
            bneg = fneg
            bntok = ntok[n, t]
            for k in range(bntok):
                out_lens[k] = lens[n, t, k]
                out_tags[k] = tags[n, t, k]
    return bntok


@njit(cache=True)
def brute_force(s, n, trans, e1_cnt, e1_tag, e1_lp, e2_cnt, e2_tag, e2_lp,
                out_lens, out_tags):
    """Enumerate every segmentation x tagging via backtracking DFS."""
    if n == 0:
        return 0
    # per-position edge tables, computed once
    pe_cnt = np.zeros(n, dtype=np.int64)
    pe_len = np.zeros((n, 6), dtype=np.int64)
    pe_tag = np.zeros((n, 6), dtype=np.int64)
    pe_lp = np.zeros((n, 6), dtype=np.float64)
    el = np.zeros(6, dtype=np.int64)
    et = np.zeros(6, dtype=np.int64)
    ee = np.zeros(6, dtype=np.float64)
    for i in range(n):
        cnt = _edges(s, n, i, e1_cnt, e1_tag, e1_lp, e2_cnt, e2_tag, e2_lp,
                     el, et, ee)
        pe_cnt[i] = cnt
        for e in range(cnt):
            pe_len[i, e] = el[e]
            pe_tag[i, e] = et[e]
            pe_lp[i, e] = ee[e]

    have = False
    bneg = 0.0
    bntok = 0
    cur_lens = np.zeros(MAX_LEN, dtype=np.int64)
    cur_tags = np.zeros(MAX_LEN, dtype=np.int64)
    cur_neg = np.zeros(MAX_LEN + 1, dtype=np.float64)
    pos_at = np.zeros(MAX_LEN + 1, dtype=np.int64)
    prev_tag = np.zeros(MAX_LEN + 1, dtype=np.int64)
    eidx = np.zeros(MAX_LEN + 1, dtype=np.int64)
    prev_tag[0] = BOS
    depth = 0
    while depth >= 0:
        pos = pos_at[depth]
        if pos == n:
            fneg = cur_neg[depth] - trans[prev_tag[depth], EOS]
            if not have or _cand_beats(
                fneg, depth, cur_lens, cur_tags, depth, 0, 0,
                bneg, bntok, out_lens, out_tags,
            ):
                have = True
                bneg = fneg
                bntok = depth
                for k in range(depth):
                    out_lens[k] = cur_lens[k]
                    out_tags[k] = cur_tags[k]
            depth -= 1
            continue
        if eidx[depth] >= pe_cnt[pos]:
            eidx[depth] = 0
            depth -= 1
            continue
        e = eidx[depth]
        eidx[depth] += 1
        length = pe_len[pos, e]
        tg = pe_tag[pos, e]
        cur_lens[depth] = length
        cur_tags[depth] = tg
        cur_neg[depth + 1] = cur_neg[depth] - pe_lp[pos, e] - trans[prev_tag[depth], tg]
        prev_tag[depth + 1] = tg
        pos_at[depth + 1] = pos + length
        depth += 1
    return bntok


@njit(cache=True)
def exhaustive_compare(max_len, trans, e1_cnt, e1_tag, e1_lp,
                       e2_cnt, e2_tag, e2_lp):
    """Compare decoder vs oracle on every string of length <= max_len.

    Returns (strings checked, mismatches).
    """
    s = np.zeros(MAX_LEN, dtype=np.int64)
    vl = np.zeros(MAX_LEN, dtype=np.int64)
    vt = np.zeros(MAX_LEN, dtype=np.int64)
    bl = np.zeros(MAX_LEN, dtype=np.int64)
    bt = np.zeros(MAX_LEN, dtype=np.int64)
    total = 0
    mismatches = 0
    for length in range(max_len + 1):
        count = 3**length
        for code in range(count):
            x = code
            for k in range(length):
                s[k] = x % 3
                x //= 3
            nv = viterbi(s, length, trans, e1_cnt, e1_tag, e1_lp,
                         e2_cnt, e2_tag, e2_lp, vl, vt)
            nb = brute_force(s, length, trans, e1_cnt, e1_tag, e1_lp,
                             e2_cnt, e2_tag, e2_lp, bl, bt)
            total += 1
            if nv != nb:
                mismatches += 1
                continue
            for k in range(nv):
                if vl[k] != bl[k] or vt[k] != bt[k]:
                    mismatches += 1
                    break
    return total, mismatches


def decode_string(text: str):
    """Run the jitted decoder pair on one string; returns token tuples."""
    tables = build_tables()
    s = np.array([ALPHABET.index(ch) for ch in text], dtype=np.int64)
    vl = np.zeros(MAX_LEN, dtype=np.int64)
    vt = np.zeros(MAX_LEN, dtype=np.int64)
    bl = np.zeros(MAX_LEN, dtype=np.int64)
    bt = np.zeros(MAX_LEN, dtype=np.int64)
    nv = viterbi(s, len(text), *tables, vl, vt)
    nb = brute_force(s, len(text), *tables, bl, bt)
    vit = tuple((int(vl[k]), TAG_NAMES[vt[k]]) for k in range(nv))
    bru = tuple((int(bl[k]), TAG_NAMES[bt[k]]) for k in range(nb))
    return vit, bru
