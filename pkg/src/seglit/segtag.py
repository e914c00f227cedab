"""Joint word segmentation and POS tagging via lattice Viterbi decoding.

A deterministic first-order (tag-bigram) decoder over a supplied
lexicon, plus an exponential brute-force oracle used by the test suite.
Both sides score a candidate path as the sum of per-token emission
log-probs and tag-transition log-probs (with sentence-boundary tags),
and break exact score ties by: fewer tokens, then leftmost-longest
segmentation, then lexicographic tag order.
"""

from __future__ import annotations

import logging

from .errors import ValidationError
from .ingest import BOS, EOS, Lexicon
from .textmodel import POSTag, Scheme, Token

logger = logging.getLogger(__name__)

BRUTE_FORCE_LIMIT = 16


def _edges_at(text: str, i: int, lexicon: Lexicon):
    """Outgoing lattice edges at position i: (length, tag, emission)."""
    edges = []
    max_len = min(lexicon.max_entry_len, len(text) - i)
    for length in range(1, max_len + 1):
        entry = lexicon.entries.get(text[i : i + length])
        if entry:
            edges.extend((length, tag, lp) for tag, lp in entry)
    if not any(length == 1 for length, _, _ in edges):
        # OOV fallback guarantees lattice connectivity on any input
        edges.append((1, lexicon.oov_tag, lexicon.oov_penalty))
    return edges


def _warn_unknown_chars(text: str, lexicon: Lexicon) -> None:
    known = {ch for surface in lexicon.entries for ch in surface}
    unknown = sorted({ch for ch in text if ch not in known})
    if unknown and lexicon.entries:
        logger.warning(
            "characters outside the lexicon's script range, using OOV fallback: %r",
            "".join(unknown),
        )


def _to_tokens(text: str, lens: tuple[int, ...], tags: tuple[str, ...]) -> list[Token]:
    tokens = []
    pos = 0
    for length, tag in zip(lens, tags):
        tokens.append(Token(text[pos : pos + length], POSTag(Scheme.KHMER, tag), pos, pos + length))
        pos += length
    return tokens


def path_score(tokens: list[Token], lexicon: Lexicon) -> float:
    """Score an explicit (segmentation, tagging) path; used by tests."""
    score = 0.0
    prev = BOS
    for tok in tokens:
        entry = dict(lexicon.entries.get(tok.surface, ()))
        if tok.tag.label in entry:
            emission = entry[tok.tag.label]
        elif len(tok.surface) == 1 and tok.tag.label == lexicon.oov_tag:
            emission = lexicon.oov_penalty
        else:
            raise ValidationError(
                f"path uses unavailable edge {tok.surface!r}/{tok.tag.label}"
            )
        score += emission + lexicon.transition(prev, tok.tag.label)
        prev = tok.tag.label
    return score + lexicon.transition(prev, EOS)


def segment_tag(text: str, lexicon: Lexicon) -> list[Token]:
    """Decode the best-scoring (segmentation, tagging) of ``text``.

    Deterministic: exact score ties are broken by fewer tokens, then
    leftmost-longest, then lexicographic tag order.
    """
    n = len(text)
    if n == 0:
        return []
    _warn_unknown_chars(text, lexicon)

    # dp[pos][tag] = (neg_score, ntok, neg_lens, tags) for the best prefix
    # ending at pos with last tag `tag`; tuple order implements the tie rule.
    dp: list[dict[str, tuple]] = [dict() for _ in range(n + 1)]
    dp[0][BOS] = (0.0, 0, (), ())
    for i in range(n):
        if not dp[i]:
            continue
        edges = _edges_at(text, i, lexicon)
        for prev_tag, (neg, ntok, neg_lens, tags) in dp[i].items():
            for length, tag, emission in edges:
                cand = (
                    neg - emission - lexicon.transition(prev_tag, tag),
                    ntok + 1,
                    neg_lens + (-length,),
                    tags + (tag,),
                )
                cur = dp[i + length].get(tag)
                if cur is None or cand < cur:
                    dp[i + length][tag] = cand

    best = None
    for tag, (neg, ntok, neg_lens, tags) in dp[n].items():
        cand = (neg - lexicon.transition(tag, EOS), ntok, neg_lens, tags)
        if best is None or cand < best:
            best = cand
    lens = tuple(-x for x in best[2])
    return _to_tokens(text, lens, best[3])


def segment_tag_bruteforce(text: str, lexicon: Lexicon) -> list[Token]:
    """Oracle: enumerate every segmentation x tagging, return the argmax.

    Scores and tie rule are identical to segment_tag; exponential, so
    inputs are limited to BRUTE_FORCE_LIMIT characters.
    """
    n = len(text)
    if n > BRUTE_FORCE_LIMIT:
        raise ValidationError(
            f"brute force limited to {BRUTE_FORCE_LIMIT} characters, got {n}"
        )
    if n == 0:
        return []
    _warn_unknown_chars(text, lexicon)

    best: list[tuple | None] = [None]

    def recurse(i, prev_tag, neg, ntok, neg_lens, tags):
        if i == n:
            cand = (neg - lexicon.transition(prev_tag, EOS), ntok, neg_lens, tags)
            if best[0] is None or cand < best[0]:
                best[0] = cand
            return
        for length, tag, emission in _edges_at(text, i, lexicon):
            recurse(
                i + length,
                tag,
                neg - emission - lexicon.transition(prev_tag, tag),
                ntok + 1,
                neg_lens + (-length,),
                tags + (tag,),
            )

    recurse(0, BOS, 0.0, 0, (), ())
    lens = tuple(-x for x in best[0][2])
    return _to_tokens(text, lens, best[0][3])
