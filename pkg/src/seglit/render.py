"""Serialize style runs: HTML fragment, ANSI terminal text, span JSON.

Every renderer preserves the source text exactly; stripping markup from
any output reproduces the document byte-for-byte.  Output is UTF-8 with
LF newlines.
"""

from __future__ import annotations

import json

from .errors import ValidationError
from .styler import StyleRun
from .textmodel import Document

_HTML_ESCAPES = {"&": "&amp;", "<": "&lt;", ">": "&gt;", '"': "&quot;", "'": "&#x27;"}

ESC = "\x1b"


def _check_tiling(doc: Document, runs: list[StyleRun]) -> None:
    pos = 0
    for run in runs:
        if run.start != pos or run.end <= run.start:
            raise ValidationError(
                f"runs do not tile document {doc.id!r}: run [{run.start}, {run.end}) "
                f"at position {pos}"
            )
        pos = run.end
    if pos != len(doc.source_text):
        raise ValidationError(
            f"runs cover [0, {pos}) but document {doc.id!r} has length "
            f"{len(doc.source_text)}"
        )


def escape_html(text: str) -> str:
    return "".join(_HTML_ESCAPES.get(ch, ch) for ch in text)


def render_html(doc: Document, runs: list[StyleRun], css_classes: bool = False) -> str:
    """Emit an HTML fragment (no document wrapper) of styled spans.

    Default-styled runs are emitted as bare escaped text; styled runs as
    ``<span>`` with inline styles, or class names when ``css_classes``.
    """
    _check_tiling(doc, runs)
    out = []
    for run in runs:
        text = escape_html(doc.source_text[run.start : run.end])
        style = run.style
        if style.is_default:
            out.append(text)
            continue
        if css_classes:
            classes = []
            if style.weight == "bold":
                classes.append("sl-bold")
            if style.color != "#000000":
                classes.append(f"sl-c{style.color[1:]}")
            out.append(f'<span class="{" ".join(classes)}">{text}</span>')
        else:
            rules = []
            if style.weight == "bold":
                rules.append("font-weight:bold")
            if style.color != "#000000":
                rules.append(f"color:{style.color}")
            out.append(f'<span style="{";".join(rules)}">{text}</span>')
    return "".join(out)


def render_ansi(doc: Document, runs: list[StyleRun]) -> str:
    """Emit SGR-styled terminal text: 1 for bold, 38;2;R;G;B for color."""
    _check_tiling(doc, runs)
    out = []
    for run in runs:
        text = doc.source_text[run.start : run.end]
        style = run.style
        if style.is_default:
            out.append(text)
            continue
        codes = []
        if style.weight == "bold":
            codes.append("1")
        if style.color != "#000000":
            r = int(style.color[1:3], 16)
            g = int(style.color[3:5], 16)
            b = int(style.color[5:7], 16)
            codes.append(f"38;2;{r};{g};{b}")
        out.append(f"{ESC}[{';'.join(codes)}m{text}{ESC}[0m")
    return "".join(out)


def spans_payload(doc: Document, runs: list[StyleRun]) -> list[dict]:
    """Span records ``{start, end, weight, color}`` in document order."""
    _check_tiling(doc, runs)
    return [
        {
            "start": run.start,
            "end": run.end,
            "weight": run.style.weight,
            "color": run.style.color,
        }
        for run in runs
    ]


def render_spans(doc: Document, runs: list[StyleRun]) -> str:
    """JSON form of :func:`spans_payload` (the web-UI exchange format)."""
    return json.dumps(spans_payload(doc, runs), separators=(",", ":"))
