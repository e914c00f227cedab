"""Core domain types: tokens, POS tags, documents, and syntactic-role rules.

All types are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import ValidationError


class Scheme(str, Enum):
    KHMER = "khmer"
    UD = "ud"


class Role(str, Enum):
    # khmer scheme
    CONTENT = "content"
    FUNCTIONAL = "functional"
    # ud scheme
    ENTITY = "entity"
    PREDICATE = "predicate"
    MODIFIER = "modifier"
    CONNECTOR = "connector"
    PUNCTUATION = "punctuation"
    DEFAULT = "default"


KHMER_ROLES = (Role.CONTENT, Role.FUNCTIONAL)
UD_ROLES = (
    Role.ENTITY,
    Role.PREDICATE,
    Role.MODIFIER,
    Role.CONNECTOR,
    Role.PUNCTUATION,
    Role.DEFAULT,
)

# Content words carry semantic meaning: nouns, verbs, adjectives, numbers.
KHMER_CONTENT_TAGS = frozenset({"n", "v", "a", "1"})
# Base functional tags; experiments may extend this set via the lexicon header
# (the full Khmer functional tagset is configuration-supplied, not hardcoded).
KHMER_BASE_TAGS = KHMER_CONTENT_TAGS | frozenset({"o", "det", "part"})

# The 17 Universal Dependencies POS labels.
UPOS_LABELS = frozenset(
    {
        "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
        "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
    }
)

UD_ROLE_MAP = {
    "NOUN": Role.ENTITY,
    "PROPN": Role.ENTITY,
    "PRON": Role.ENTITY,
    "VERB": Role.PREDICATE,
    "AUX": Role.PREDICATE,
    "ADJ": Role.MODIFIER,
    "PART": Role.CONNECTOR,
    "ADP": Role.CONNECTOR,
    "SCONJ": Role.CONNECTOR,
    "PUNCT": Role.PUNCTUATION,
    "SYM": Role.PUNCTUATION,
}


@dataclass(frozen=True)
class POSTag:
    """A part-of-speech label within a declared tagging scheme."""

    scheme: Scheme
    label: str

    @property
    def unmapped(self) -> bool:
        """True for a UD label that the role map does not style specially."""
        return self.scheme is Scheme.UD and self.label not in UD_ROLE_MAP


def classify_role(tag: POSTag, extra_functional: frozenset[str] = frozenset()) -> Role:
    """Map a POS tag to its syntactic role.

    Khmer: n/v/a/1 are content words, every other declared label is
    functional; the khmer set is closed, so unknown labels raise.
    UD: Table-style mapping to entity/predicate/modifier/connector/
    punctuation; anything else falls back to the default role.
    """
    if tag.scheme is Scheme.KHMER:
        if tag.label in KHMER_CONTENT_TAGS:
            return Role.CONTENT
        if tag.label in KHMER_BASE_TAGS or tag.label in extra_functional:
            return Role.FUNCTIONAL
        raise ValidationError(f"unknown khmer POS label: {tag.label!r}")
    return UD_ROLE_MAP.get(tag.label, Role.DEFAULT)


def roles_for_scheme(scheme: Scheme) -> tuple[Role, ...]:
    return KHMER_ROLES if scheme is Scheme.KHMER else UD_ROLES


@dataclass(frozen=True)
class Token:
    """A surface form with its POS tag and half-open character span."""

    surface: str
    tag: POSTag
    start: int
    end: int

    def __post_init__(self):
        if not self.surface:
            raise ValidationError("token surface must be non-empty")
        if self.end - self.start != len(self.surface):
            raise ValidationError(
                f"span [{self.start}, {self.end}) does not fit surface {self.surface!r}"
            )


class Language(str, Enum):
    KHMER = "khmer"
    JAPANESE = "japanese"

    @property
    def scheme(self) -> Scheme:
        return Scheme.KHMER if self is Language.KHMER else Scheme.UD


@dataclass(frozen=True)
class Document:
    """A tokenized source text; token spans must tile the text exactly."""

    id: str
    language: Language
    source_text: str
    tokens: tuple[Token, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        pos = 0
        for tok in self.tokens:
            if tok.start != pos:
                raise ValidationError(
                    f"document {self.id}: token {tok.surface!r} starts at "
                    f"{tok.start}, expected {pos}"
                )
            if self.source_text[tok.start : tok.end] != tok.surface:
                raise ValidationError(
                    f"document {self.id}: token {tok.surface!r} does not match "
                    f"source text at [{tok.start}, {tok.end})"
                )
            if tok.tag.scheme is not self.language.scheme:
                raise ValidationError(
                    f"document {self.id}: tag scheme {tok.tag.scheme} does not "
                    f"match language {self.language}"
                )
            pos = tok.end
        if pos != len(self.source_text):
            raise ValidationError(
                f"document {self.id}: tokens cover [0, {pos}) but text has "
                f"length {len(self.source_text)}"
            )
