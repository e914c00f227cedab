"""Synthetic cohorts and fixtures: banks, documents, ballots, sessions.

Used to exercise the protocol and analysis machinery at desk scale with
known ground truth (injected condition effects, controlled exclusion
counts).  Everything is deterministic given a seed.
"""

from __future__ import annotations

import math
import random

from .ingest import QUESTION_KINDS, Question, QuestionBank, TextBank
from .protocol import (
    DIMENSIONS,
    PAIRS,
    NON_STYLED,
    STYLED,
    Assignment,
    ItemRecord,
    PreferenceBallot,
    SessionLog,
    Vote,
    generate_assignment,
)
from .textmodel import Document, Language, POSTag, Scheme, Token

# Small pseudo-Khmer word list (surface, tag); real Khmer code points so
# renderer fixtures exercise non-Latin text.
_KHMER_WORDS = [
    ("ការងារ", "n"),
    ("ធ្វើ", "v"),
    ("ល្អ", "a"),
    ("នៅ", "o"),
    ("ពីរ", "1"),
    ("នេះ", "det"),
    ("ផ្ទះ", "n"),
    ("ទៅ", "v"),
    ("ធំ", "a"),
    ("និង", "o"),
]

_JA_WORDS = [
    ("猫", "NOUN"),
    ("走る", "VERB"),
    ("大きい", "ADJ"),
    ("が", "PART"),
    ("東京", "PROPN"),
    ("です", "AUX"),
    ("。", "PUNCT"),
    ("とても", "ADV"),
    ("から", "ADP"),
    ("それ", "PRON"),
]


def make_documents(
    text_ids: list[str],
    language: Language = Language.KHMER,
    seed: int = 0,
    words_per_text: int = 40,
) -> list[Document]:
    rng = random.Random(seed)
    vocab = _KHMER_WORDS if language is Language.KHMER else _JA_WORDS
    docs = []
    for tid in text_ids:
        tokens = []
        pos = 0
        text_parts = []
        for _ in range(words_per_text):
            surface, tag = rng.choice(vocab)
            tokens.append(
                Token(surface, POSTag(language.scheme, tag), pos, pos + len(surface))
            )
            text_parts.append(surface)
            pos += len(surface)
        docs.append(Document(tid, language, "".join(text_parts), tokens))
    return docs


def make_bank(text_ids: list[str], seed: int = 0) -> QuestionBank:
    rng = random.Random(seed)
    texts = {}
    for tid in text_ids:
        questions = tuple(
            Question(
                kind=kind,
                prompt=f"{kind} question about {tid}",
                options=tuple(f"option {i}" for i in range(4)),
                answer=rng.randrange(4),
            )
            for kind in QUESTION_KINDS
        )
        targets = tuple(f"{tid}-kw{i}" for i in range(5))
        distractors = tuple(f"{tid}-dx{i}" for i in range(5))
        texts[tid] = TextBank(tid, questions, targets, distractors)
    return QuestionBank(texts)


def bank_to_json(bank: QuestionBank) -> list[dict]:
    return [
        {
            "text_id": tb.text_id,
            "questions": [
                {
                    "kind": q.kind,
                    "prompt": q.prompt,
                    "options": list(q.options),
                    "answer": q.answer,
                }
                for q in tb.questions
            ],
            "keywords": {
                "targets": list(tb.targets),
                "distractors": list(tb.distractors),
            },
        }
        for tb in bank.texts.values()
    ]


# ---------------------------------------------------------------------------
# Preference ballots


def make_ballots(
    n_participants: int,
    seed: int = 0,
    n_too_fast: int = 0,
    n_too_slow: int = 0,
    option_weights: dict[int, float] | None = None,
) -> list[PreferenceBallot]:
    """Ballots over all 28 pairs x 3 dimensions with controlled timing
    exclusions and per-option win propensities."""
    rng = random.Random(seed)
    weights = {opt: 1.0 for opt in range(1, 9)}
    weights.update(option_weights or {})
    ballots = []
    for i in range(n_participants):
        if i < n_too_fast:
            minutes = rng.uniform(1.0, 4.5)
        elif i < n_too_fast + n_too_slow:
            minutes = rng.uniform(12.5, 20.0)
        else:
            minutes = rng.uniform(6.0, 11.0)
        votes = []
        for dim in DIMENSIONS:
            for pair_id, (opt_a, opt_b) in enumerate(PAIRS, start=1):
                p_a = weights[opt_a] / (weights[opt_a] + weights[opt_b])
                votes.append(Vote(pair_id, "A" if rng.random() < p_a else "B", dim))
        ballots.append(PreferenceBallot(f"p{i:03d}", minutes, tuple(votes)))
    return ballots


# ---------------------------------------------------------------------------
# Readability sessions


def _logit(p: float) -> float:
    return math.log(p / (1.0 - p))


def _sigmoid(x: float) -> float:
    return 1.0 / (1.0 + math.exp(-x))


def make_sessions(
    bank: QuestionBank,
    text_ids: list[str],
    n_participants: int,
    seed: int = 0,
    base_accuracy: dict[str, float] | None = None,
    styled_logit_shift: dict[str, float] | None = None,
    target_rate: float = 0.75,
    distractor_rate: float = 0.30,
    keyword_styled_bonus: float = 0.0,
    mean_reading_s: float = 115.0,
    mean_answering_s: float = 100.0,
    short_session_participants: int = 0,
) -> list[SessionLog]:
    """Simulate complete 10-item sessions with known condition effects.

    ``styled_logit_shift`` maps question kinds to an additive shift on
    the correctness logit in the styled condition.  The first
    ``short_session_participants`` participants read unrealistically
    fast, producing sub-30-minute sessions for exclusion-filter tests.
    """
    rng = random.Random(seed)
    base_accuracy = base_accuracy or {k: 0.5 for k in QUESTION_KINDS}
    styled_logit_shift = styled_logit_shift or {}
    logs = []
    for i in range(n_participants):
        pid = f"sp{i:03d}"
        assignment: Assignment = generate_assignment(text_ids, rng.getrandbits(63), pid)
        fast = i < short_session_participants
        read_mu = 20.0 if fast else mean_reading_s
        ans_mu = 15.0 if fast else mean_answering_s
        now = rng.randrange(10_000)
        items = []
        for position, (tid, cond) in enumerate(assignment.items, start=1):
            tb = bank[tid]
            responses = []
            for q in tb.questions:
                p = base_accuracy[q.kind]
                if cond == STYLED:
                    p = _sigmoid(_logit(p) + styled_logit_shift.get(q.kind, 0.0))
                if rng.random() < p:
                    responses.append(q.answer)
                else:
                    responses.append(rng.choice([o for o in range(4) if o != q.answer]))
            t_rate = target_rate + (keyword_styled_bonus if cond == STYLED else 0.0)
            selected = [kw for kw in tb.targets if rng.random() < t_rate]
            selected += [kw for kw in tb.distractors if rng.random() < distractor_rate]
            # uniform +-10% keeps normal sessions safely over the 30-minute
            # exclusion floor and fast ones safely under it
            reading_ms = int(read_mu * rng.uniform(0.9, 1.1) * 1000)
            answering_ms = int(ans_mu * rng.uniform(0.9, 1.1) * 1000)
            shown = now
            opened = shown + reading_ms
            submitted = opened + answering_ms
            now = submitted + rng.randrange(200, 2_000)
            items.append(
                ItemRecord(
                    text_id=tid,
                    position=position,
                    condition=cond,
                    text_shown_at=shown,
                    answers_opened_at=opened,
                    answers_submitted_at=submitted,
                    mcq=tuple(responses),
                    keywords=tuple(selected),
                    difficulty=min(max(round(rng.gauss(3.0, 1.0)), 1), 5),
                )
            )
        logs.append(SessionLog(pid, tuple(items)))
    return logs
