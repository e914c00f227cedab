"""Resolve token roles into concrete styles and validate WCAG contrast.

Styling never touches the character content: a scheme only assigns a
(weight, color) pair to each token, and adjacent tokens with identical
resolved styles are merged into maximal runs.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import IO

from .errors import ValidationError
from .textmodel import Document, Role, Scheme, classify_role, roles_for_scheme

_HEX_RE = re.compile(r"^#[0-9a-fA-F]{6}$")

WHITE = "#FFFFFF"
BLACK = "#000000"

# Linearization knee from the WCAG 2.1 text, kept verbatim for bit-stable
# results.
_WCAG_KNEE = 0.03928


def _check_hex(color: str) -> str:
    if not _HEX_RE.match(color):
        raise ValidationError(f"malformed sRGB hex color: {color!r}")
    return color.upper()


@dataclass(frozen=True)
class StyleSpec:
    """A resolved style: font weight and foreground/background colors."""

    weight: str = "regular"  # "regular" | "bold"
    color: str = BLACK
    background: str = WHITE

    def __post_init__(self):
        if self.weight not in ("regular", "bold"):
            raise ValidationError(f"unknown weight {self.weight!r}")
        object.__setattr__(self, "color", _check_hex(self.color))
        object.__setattr__(self, "background", _check_hex(self.background))

    @property
    def is_default(self) -> bool:
        return self.weight == "regular" and self.color == BLACK


@dataclass(frozen=True)
class StyleScheme:
    """A total mapping from syntactic roles to styles under one tag scheme."""

    name: str
    tag_scheme: Scheme
    mapping: dict[Role, StyleSpec]
    default: StyleSpec = StyleSpec()

    def __post_init__(self):
        missing = [r for r in roles_for_scheme(self.tag_scheme) if r not in self.mapping]
        if missing:
            raise ValidationError(
                f"scheme {self.name!r} is missing roles: {[r.value for r in missing]}"
            )

    def resolve(self, role: Role) -> StyleSpec:
        return self.mapping.get(role, self.default)


@dataclass(frozen=True)
class StyleRun:
    """A maximal contiguous character span sharing one resolved style."""

    start: int
    end: int
    style: StyleSpec


KHMER_BOLD = StyleScheme(
    name="khmer-bold",
    tag_scheme=Scheme.KHMER,
    mapping={
        Role.CONTENT: StyleSpec(weight="bold"),
        Role.FUNCTIONAL: StyleSpec(),
    },
)

JA_COLOR = StyleScheme(
    name="ja-color",
    tag_scheme=Scheme.UD,
    mapping={
        Role.ENTITY: StyleSpec(color="#1976D2"),
        Role.PREDICATE: StyleSpec(color="#D32F2F"),
        Role.MODIFIER: StyleSpec(color="#E65100"),
        Role.CONNECTOR: StyleSpec(color="#212121"),
        Role.PUNCTUATION: StyleSpec(color="#AAAAAA"),
        Role.DEFAULT: StyleSpec(color=BLACK),
    },
)

BUILTIN_SCHEMES = {s.name: s for s in (KHMER_BOLD, JA_COLOR)}

# Uniform no-op styling for the control (non-styled) condition.
PLAIN_KHMER = StyleScheme(
    name="plain",
    tag_scheme=Scheme.KHMER,
    mapping={r: StyleSpec() for r in roles_for_scheme(Scheme.KHMER)},
)
PLAIN_UD = StyleScheme(
    name="plain",
    tag_scheme=Scheme.UD,
    mapping={r: StyleSpec() for r in roles_for_scheme(Scheme.UD)},
)


def plain_scheme(tag_scheme: Scheme) -> StyleScheme:
    return PLAIN_KHMER if tag_scheme is Scheme.KHMER else PLAIN_UD


def get_scheme(name: str) -> StyleScheme:
    try:
        return BUILTIN_SCHEMES[name]
    except KeyError:
        raise ValidationError(
            f"unknown scheme {name!r}; built-ins: {sorted(BUILTIN_SCHEMES)}"
        ) from None


def apply_scheme(
    doc: Document,
    scheme: StyleScheme,
    extra_functional: frozenset[str] = frozenset(),
) -> list[StyleRun]:
    """Resolve every token's style and merge equal-style neighbours."""
    if doc.language.scheme is not scheme.tag_scheme:
        raise ValidationError(
            f"scheme {scheme.name!r} expects {scheme.tag_scheme.value} tags but "
            f"document {doc.id!r} is {doc.language.value}"
        )
    runs: list[StyleRun] = []
    for tok in doc.tokens:
        style = scheme.resolve(classify_role(tok.tag, extra_functional))
        if runs and runs[-1].style == style and runs[-1].end == tok.start:
            runs[-1] = StyleRun(runs[-1].start, tok.end, style)
        else:
            runs.append(StyleRun(tok.start, tok.end, style))
    return runs


def load_scheme(stream: IO[str] | str) -> StyleScheme:
    """Load a scheme definition JSON:
    ``{name, tag_scheme, background?, rules: {role: {weight?, color?}},
    default?: {weight?, color?}}``.
    """
    raw = stream if isinstance(stream, str) else stream.read()
    data = json.loads(raw)
    tag_scheme = Scheme(data["tag_scheme"])
    background = data.get("background", WHITE)

    def spec(d):
        return StyleSpec(
            weight=d.get("weight", "regular"),
            color=d.get("color", BLACK),
            background=background,
        )

    mapping = {Role(role): spec(rule) for role, rule in data.get("rules", {}).items()}
    return StyleScheme(
        name=data["name"],
        tag_scheme=tag_scheme,
        mapping=mapping,
        default=spec(data.get("default", {})),
    )


# ---------------------------------------------------------------------------
# WCAG 2.1 contrast


def _linearize(channel: int) -> float:
    c = channel / 255.0
    if c <= _WCAG_KNEE:
        return c / 12.92
    return ((c + 0.055) / 1.055) ** 2.4


def relative_luminance(color: str) -> float:
    """WCAG 2.1 relative luminance of an sRGB hex color, in [0, 1]."""
    color = _check_hex(color)
    r = _linearize(int(color[1:3], 16))
    g = _linearize(int(color[3:5], 16))
    b = _linearize(int(color[5:7], 16))
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


def contrast_ratio(fg: str, bg: str) -> float:
    """WCAG contrast ratio (L_lighter + 0.05) / (L_darker + 0.05), >= 1."""
    lf = relative_luminance(fg)
    lb = relative_luminance(bg)
    lighter, darker = max(lf, lb), min(lf, lb)
    return (lighter + 0.05) / (darker + 0.05)


@dataclass(frozen=True)
class ContrastReport:
    role: Role
    color: str
    background: str
    ratio: float
    passes: bool


def validate_scheme(scheme: StyleScheme, threshold: float = 4.5) -> list[ContrastReport]:
    """Check every role's foreground color against its background.

    Returns one row per role; overall verdict is ``all(r.passes ...)``.
    """
    rows = []
    for role in roles_for_scheme(scheme.tag_scheme):
        spec = scheme.resolve(role)
        ratio = contrast_ratio(spec.color, spec.background)
        rows.append(
            ContrastReport(role, spec.color, spec.background, ratio, ratio >= threshold)
        )
    return rows
