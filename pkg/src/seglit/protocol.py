"""Experiment protocol machinery: counterbalanced assignments, preference
tallies, participant-exclusion filters, and timing derivation.

Assignments and session logs are persisted as JSON lines with a ``v``
schema-version field, one record per item event.
"""

from __future__ import annotations

import json
import random
import statistics
from dataclasses import dataclass, field
from itertools import combinations
from typing import IO, Iterable

from .errors import ValidationError

SCHEMA_VERSION = 1
PRNG_ALGO = "mt19937"  # Python's random.Random; recorded for replayability

STYLED = "S"
NON_STYLED = "NS"

DIMENSIONS = ("visual_appeal", "readability", "professionalism")

# 28 distinct pairs over 8 style options; pair_id is the 1-based index into
# this list.
STYLE_OPTIONS = tuple(range(1, 9))
PAIRS = tuple(combinations(STYLE_OPTIONS, 2))


@dataclass(frozen=True)
class Assignment:
    """Per-participant ordered (text_id, condition) list."""

    participant_id: str
    seed: int
    items: tuple[tuple[str, str], ...]
    algo: str = PRNG_ALGO


def generate_assignment(
    text_ids: list[str], seed: int, participant_id: str = ""
) -> Assignment:
    """Seeded uniform shuffle of texts with a coin-flipped, strictly
    alternating condition sequence (half styled, half non-styled)."""
    if len(text_ids) % 2 != 0:
        raise ValidationError(
            f"even count required to balance conditions, got {len(text_ids)} texts"
        )
    if len(set(text_ids)) != len(text_ids):
        raise ValidationError("duplicate text ids in assignment request")
    rng = random.Random(seed)
    order = list(text_ids)
    rng.shuffle(order)
    start_styled = rng.random() < 0.5
    items = tuple(
        (tid, STYLED if (i % 2 == 0) == start_styled else NON_STYLED)
        for i, tid in enumerate(order)
    )
    return Assignment(participant_id=participant_id, seed=seed, items=items)


def validate_assignment(a: Assignment) -> list[str]:
    """Check balance, strict alternation and text distinctness.

    Returns a list of violation messages; empty means ok.
    """
    violations = []
    conds = [c for _, c in a.items]
    if conds.count(STYLED) != conds.count(NON_STYLED):
        violations.append(
            f"unbalanced conditions: {conds.count(STYLED)} styled vs "
            f"{conds.count(NON_STYLED)} non-styled"
        )
    for i in range(1, len(conds)):
        if conds[i] == conds[i - 1]:
            violations.append(f"conditions do not alternate at position {i + 1}")
            break
    ids = [t for t, _ in a.items]
    if len(set(ids)) != len(ids):
        violations.append("repeated text ids")
    return violations


def generate_cohort(
    text_ids: list[str],
    participant_ids: Iterable[str],
    seed: int,
    latin_square: bool = False,
) -> list[Assignment]:
    """One assignment per participant.

    Default: independent seeding per participant.  ``latin_square``
    rotates a single shuffled base order across participants instead
    (an option, not a claim about the original protocol).
    """
    participant_ids = list(participant_ids)
    if not latin_square:
        return [
            generate_assignment(text_ids, seed + i, pid)
            for i, pid in enumerate(participant_ids)
        ]
    rng = random.Random(seed)
    base = list(text_ids)
    rng.shuffle(base)
    out = []
    for i, pid in enumerate(participant_ids):
        order = base[i % len(base) :] + base[: i % len(base)]
        start_styled = i % 2 == 0
        items = tuple(
            (tid, STYLED if (j % 2 == 0) == start_styled else NON_STYLED)
            for j, tid in enumerate(order)
        )
        out.append(Assignment(participant_id=pid, seed=seed, items=items))
    return out


# ---------------------------------------------------------------------------
# Preference survey


@dataclass(frozen=True)
class Vote:
    pair_id: int  # 1..28
    choice: str  # "A" | "B"
    dimension: str

    def __post_init__(self):
        if not 1 <= self.pair_id <= len(PAIRS):
            raise ValidationError(f"pair_id {self.pair_id} out of range")
        if self.choice not in ("A", "B"):
            raise ValidationError(f"choice must be A or B, got {self.choice!r}")
        if self.dimension not in DIMENSIONS:
            raise ValidationError(f"unknown dimension {self.dimension!r}")

    @property
    def option(self) -> int:
        pair = PAIRS[self.pair_id - 1]
        return pair[0] if self.choice == "A" else pair[1]


@dataclass(frozen=True)
class PreferenceBallot:
    participant_id: str
    completion_minutes: float
    votes: tuple[Vote, ...]

    def __post_init__(self):
        for dim in DIMENSIONS:
            ids = [v.pair_id for v in self.votes if v.dimension == dim]
            if len(set(ids)) != len(ids):
                raise ValidationError(
                    f"ballot {self.participant_id!r}: duplicate pair ids in {dim}"
                )


@dataclass
class PreferenceTally:
    counts: dict[str, dict[int, int]]  # dimension -> option -> votes
    overall: dict[int, int]
    n_counted: int
    n_excluded: int
    median_completion_minutes: float | None


def tally_preferences(
    ballots: list[PreferenceBallot],
    min_minutes: float = 5.0,
    max_minutes: float = 12.0,
) -> PreferenceTally:
    """Aggregate A/B votes per option per dimension.

    Ballots completed outside [min_minutes, max_minutes] are excluded
    (too fast: inattention; too slow: connectivity trouble).
    """
    kept = [b for b in ballots if min_minutes <= b.completion_minutes <= max_minutes]
    counts = {dim: {opt: 0 for opt in STYLE_OPTIONS} for dim in DIMENSIONS}
    for ballot in kept:
        for vote in ballot.votes:
            counts[vote.dimension][vote.option] += 1
    overall = {
        opt: sum(counts[dim][opt] for dim in DIMENSIONS) for opt in STYLE_OPTIONS
    }
    return PreferenceTally(
        counts=counts,
        overall=overall,
        n_counted=len(kept),
        n_excluded=len(ballots) - len(kept),
        median_completion_minutes=(
            statistics.median(b.completion_minutes for b in kept) if kept else None
        ),
    )


# ---------------------------------------------------------------------------
# Session logs


@dataclass(frozen=True)
class ItemRecord:
    """Answers and event timestamps (ms) for one text in one session."""

    text_id: str
    position: int  # 1-based position in the participant's reading order
    condition: str  # "S" | "NS"
    text_shown_at: int
    answers_opened_at: int
    answers_submitted_at: int
    mcq: tuple[int, ...] = ()  # one chosen option index per question
    keywords: tuple[str, ...] = ()
    difficulty: int = 3  # 1..5 Likert

    def __post_init__(self):
        if len(self.mcq) != 4:
            raise ValidationError(
                f"item {self.text_id!r}: expected 4 MCQ responses, got {len(self.mcq)}"
            )
        if not 1 <= self.difficulty <= 5:
            raise ValidationError(
                f"item {self.text_id!r}: difficulty {self.difficulty} outside 1..5"
            )


@dataclass(frozen=True)
class SessionLog:
    participant_id: str
    items: tuple[ItemRecord, ...]

    def total_minutes(self) -> float:
        if not self.items:
            return 0.0
        start = min(i.text_shown_at for i in self.items)
        end = max(i.answers_submitted_at for i in self.items)
        return (end - start) / 60_000.0


@dataclass(frozen=True)
class ItemTiming:
    text_id: str
    position: int
    condition: str
    reading_time_s: float
    answering_time_s: float
    cpm: float | None  # None when the text length is unknown


@dataclass(frozen=True)
class SessionTimings:
    participant_id: str
    items: tuple[ItemTiming, ...]
    cpm: float | None  # whole-session characters per minute


def derive_timings(
    log: SessionLog, text_lengths: dict[str, int] | None = None
) -> SessionTimings:
    """Reading/answering durations per item plus session-level CPM.

    Raises on non-monotonic timestamps, naming the offending item.
    """
    text_lengths = text_lengths or {}
    prev_end = None
    items = []
    total_chars = 0
    total_reading_s = 0.0
    for item in log.items:
        if not item.text_shown_at < item.answers_opened_at < item.answers_submitted_at:
            raise ValidationError(
                f"participant {log.participant_id!r}, item {item.text_id!r}: "
                "timestamps must be strictly increasing"
            )
        if prev_end is not None and item.text_shown_at <= prev_end:
            raise ValidationError(
                f"participant {log.participant_id!r}, item {item.text_id!r}: "
                "timestamps overlap the previous item"
            )
        prev_end = item.answers_submitted_at
        reading = (item.answers_opened_at - item.text_shown_at) / 1000.0
        answering = (item.answers_submitted_at - item.answers_opened_at) / 1000.0
        chars = text_lengths.get(item.text_id)
        cpm = None
        if chars is not None:
            cpm = 60.0 * chars / reading
            total_chars += chars
            total_reading_s += reading
        items.append(
            ItemTiming(item.text_id, item.position, item.condition, reading, answering, cpm)
        )
    session_cpm = 60.0 * total_chars / total_reading_s if total_reading_s else None
    return SessionTimings(log.participant_id, tuple(items), session_cpm)


def filter_participants(
    logs: list[SessionLog], min_total_minutes: float = 30.0
) -> tuple[list[SessionLog], list[SessionLog]]:
    """Partition logs on total session duration; (kept, excluded)."""
    kept = [l for l in logs if l.total_minutes() >= min_total_minutes]
    excluded = [l for l in logs if l.total_minutes() < min_total_minutes]
    return kept, excluded


# ---------------------------------------------------------------------------
# JSONL persistence


def assignment_record(a: Assignment) -> dict:
    return {
        "v": SCHEMA_VERSION,
        "kind": "assignment",
        "participant_id": a.participant_id,
        "seed": a.seed,
        "algo": a.algo,
        "items": [{"text_id": t, "condition": c} for t, c in a.items],
    }


def item_record(participant_id: str, item: ItemRecord) -> dict:
    return {
        "v": SCHEMA_VERSION,
        "kind": "item",
        "participant_id": participant_id,
        "text_id": item.text_id,
        "position": item.position,
        "condition": item.condition,
        "text_shown_at": item.text_shown_at,
        "answers_opened_at": item.answers_opened_at,
        "answers_submitted_at": item.answers_submitted_at,
        "mcq": list(item.mcq),
        "keywords": list(item.keywords),
        "difficulty": item.difficulty,
    }


def write_sessions(stream: IO[str], logs: list[SessionLog]) -> None:
    for log in logs:
        for item in log.items:
            stream.write(json.dumps(item_record(log.participant_id, item)) + "\n")


def read_sessions(stream: IO[str] | str) -> list[SessionLog]:
    """Group item records back into per-participant SessionLogs,
    ordered by position."""
    lines = stream.splitlines() if isinstance(stream, str) else stream
    per_participant: dict[str, list[ItemRecord]] = {}
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        rec = json.loads(line)
        if rec.get("kind") != "item":
            continue
        if rec.get("v") != SCHEMA_VERSION:
            raise ValidationError(
                f"line {lineno}: unsupported session schema version {rec.get('v')!r}"
            )
        per_participant.setdefault(rec["participant_id"], []).append(
            ItemRecord(
                text_id=rec["text_id"],
                position=rec["position"],
                condition=rec["condition"],
                text_shown_at=rec["text_shown_at"],
                answers_opened_at=rec["answers_opened_at"],
                answers_submitted_at=rec["answers_submitted_at"],
                mcq=tuple(rec["mcq"]),
                keywords=tuple(rec.get("keywords", ())),
                difficulty=rec.get("difficulty", 3),
            )
        )
    return [
        SessionLog(pid, tuple(sorted(items, key=lambda i: i.position)))
        for pid, items in per_participant.items()
    ]
