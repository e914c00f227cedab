import json
import re

import pytest

from seglit.errors import ValidationError
from seglit.render import (
    escape_html,
    render_ansi,
    render_html,
    render_spans,
    spans_payload,
)
from seglit.styler import JA_COLOR, KHMER_BOLD, StyleRun, StyleSpec, apply_scheme
from seglit.textmodel import Document, Language, POSTag, Scheme, Token

ANSI_RE = re.compile(r"\x1b\[[0-9;]*m")
TAG_RE = re.compile(r"<[^>]+>")

_UNESCAPES = {"&amp;": "&", "&lt;": "<", "&gt;": ">", "&quot;": '"', "&#x27;": "'"}


def _unescape(text):
    for k, v in _UNESCAPES.items():
        text = text.replace(k, v)
    return text


def _doc(pairs, language=Language.KHMER):
    scheme = language.scheme
    tokens = []
    pos = 0
    for surface, label in pairs:
        tokens.append(Token(surface, POSTag(scheme, label), pos, pos + len(surface)))
        pos += len(surface)
    return Document("d", language, "".join(s for s, _ in pairs), tokens)


class TestHtml:
    def test_bold_run(self):
        doc = _doc([("X", "n")])
        runs = apply_scheme(doc, KHMER_BOLD)
        assert render_html(doc, runs) == '<span style="font-weight:bold">X</span>'

    def test_default_run_escaped_bare(self):
        doc = _doc([("a<b", "o")])
        runs = apply_scheme(doc, KHMER_BOLD)
        assert render_html(doc, runs) == "a&lt;b"

    def test_color_run(self):
        doc = _doc([("猫", "NOUN")], Language.JAPANESE)
        runs = apply_scheme(doc, JA_COLOR)
        assert render_html(doc, runs) == '<span style="color:#1976D2">猫</span>'

    def test_css_classes_mode(self):
        doc = _doc([("X", "n")])
        runs = apply_scheme(doc, KHMER_BOLD)
        assert render_html(doc, runs, css_classes=True) == '<span class="sl-bold">X</span>'

    def test_escaping_all_specials(self):
        assert escape_html("&<>\"'") == "&amp;&lt;&gt;&quot;&#x27;"

    def test_non_tiling_runs_rejected(self):
        doc = _doc([("ab", "n")])
        with pytest.raises(ValidationError):
            render_html(doc, [StyleRun(0, 1, StyleSpec())])


class TestAnsi:
    def test_bold(self):
        doc = _doc([("X", "n")])
        runs = apply_scheme(doc, KHMER_BOLD)
        assert render_ansi(doc, runs) == "\x1b[1mX\x1b[0m"

    def test_default_plain(self):
        doc = _doc([("x", "o")])
        runs = apply_scheme(doc, KHMER_BOLD)
        assert render_ansi(doc, runs) == "x"

    def test_truecolor_code(self):
        doc = _doc([("走る", "VERB")], Language.JAPANESE)
        runs = apply_scheme(doc, JA_COLOR)
        assert render_ansi(doc, runs) == "\x1b[38;2;211;47;47m走る\x1b[0m"


class TestSpans:
    def test_default_run_payload(self):
        doc = _doc([("abcde", "o")])
        runs = apply_scheme(doc, KHMER_BOLD)
        assert render_spans(doc, runs) == (
            '[{"start":0,"end":5,"weight":"regular","color":"#000000"}]'
        )

    def test_adjacent_runs(self):
        doc = _doc([("ab", "n"), ("cd", "o")])
        payload = spans_payload(doc, apply_scheme(doc, KHMER_BOLD))
        assert len(payload) == 2
        assert payload[0]["end"] == payload[1]["start"]

    def test_three_alternating_roles(self):
        doc = _doc([("ab", "o"), ("cd", "n"), ("ef", "o")])
        payload = spans_payload(doc, apply_scheme(doc, KHMER_BOLD))
        assert [p["weight"] for p in payload] == ["regular", "bold", "regular"]


class TestStripRoundTrip:
    @pytest.mark.parametrize(
        "pairs,language,scheme",
        [
            ([("ការងារ", "n"), ("នៅ", "o"), ("<&>", "a")], Language.KHMER, KHMER_BOLD),
            ([("猫", "NOUN"), ("が", "PART"), ("走る", "VERB"), ("。", "PUNCT")],
             Language.JAPANESE, JA_COLOR),
        ],
    )
    def test_strip_reproduces_source(self, pairs, language, scheme):
        doc = _doc(pairs, language)
        runs = apply_scheme(doc, scheme)
        assert _unescape(TAG_RE.sub("", render_html(doc, runs))) == doc.source_text
        assert ANSI_RE.sub("", render_ansi(doc, runs)) == doc.source_text
        spans = json.loads(render_spans(doc, runs))
        assert "".join(doc.source_text[s["start"] : s["end"]] for s in spans) == (
            doc.source_text
        )
