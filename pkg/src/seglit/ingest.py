"""Loaders for external data: CoNLL-U, segmentation lexicons, question banks.

All parsers are pure functions over text streams and apply NFC
normalization on load.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass, field
from typing import IO, Iterable

from .errors import ParseError, ValidationError
from .textmodel import Document, Language, POSTag, Scheme, Token

BOS = "<s>"
EOS = "</s>"

QUESTION_KINDS = ("factual", "inferential", "global", "cloze")


def _lines(stream: IO[str] | str) -> Iterable[str]:
    if isinstance(stream, str):
        return stream.splitlines()
    return (line.rstrip("\n") for line in stream)


# ---------------------------------------------------------------------------
# CoNLL-U


def parse_conllu(
    stream: IO[str] | str,
    default_doc_id: str = "doc",
    language: Language = Language.JAPANESE,
) -> list[Document]:
    """Parse a 10-column CoNLL-U subset into Documents.

    Consumes columns 1 (ID), 2 (FORM) and 4 (UPOS).  Documents are split
    on ``# newdoc id`` comments; sentences on blank lines.  Character
    spans are reconstructed by matching surfaces left-to-right against
    the ``# text`` comments (no inter-token spacing is assumed).
    ``language`` selects the tag scheme column 4 is read under (the
    same container format carries the Khmer decoder's output).
    """
    docs: list[Document] = []
    doc_id = default_doc_id
    text_parts: list[str] = []
    pending: list[tuple[str, str]] = []  # (surface, upos) for current doc
    sent_text: str | None = None
    sent_tokens: list[tuple[str, str]] = []

    def close_sentence(lineno):
        nonlocal sent_text, sent_tokens
        if not sent_tokens:
            sent_text = None
            return
        surfaces = "".join(s for s, _ in sent_tokens)
        if sent_text is not None and sent_text != surfaces:
            raise ParseError(
                f"token surfaces {surfaces!r} do not tile sentence text "
                f"{sent_text!r}",
                line=lineno,
            )
        text_parts.append(surfaces)
        pending.extend(sent_tokens)
        sent_text = None
        sent_tokens = []

    def close_doc(lineno):
        close_sentence(lineno)
        if not pending and not text_parts:
            return
        text = "".join(text_parts)
        tokens = []
        pos = 0
        for surface, upos in pending:
            tokens.append(
                Token(surface, POSTag(language.scheme, upos), pos, pos + len(surface))
            )
            pos += len(surface)
        docs.append(Document(doc_id, language, text, tokens))
        text_parts.clear()
        pending.clear()

    for lineno, raw in enumerate(_lines(stream), start=1):
        line = unicodedata.normalize("NFC", raw)
        if not line.strip():
            close_sentence(lineno)
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if body.startswith("newdoc id"):
                close_doc(lineno)
                _, _, value = body.partition("=")
                doc_id = value.strip() or default_doc_id
            elif body.startswith("text"):
                key, _, value = body.partition("=")
                if key.strip() == "text":
                    sent_text = value.strip()
            continue
        cols = line.split("\t")
        if len(cols) != 10:
            raise ParseError(
                f"expected 10 tab-separated columns, got {len(cols)}", line=lineno
            )
        tok_id, form, upos = cols[0], cols[1], cols[3]
        if "-" in tok_id or "." in tok_id:
            raise ParseError(
                f"multiword/empty token id {tok_id!r} is not supported; supply "
                "composite tokens directly",
                line=lineno,
            )
        if not form:
            raise ParseError("empty FORM column", line=lineno)
        sent_tokens.append((form, upos))

    close_doc(None)
    return docs


def serialize_conllu(doc: Document) -> str:
    """Emit a Document back as minimal 10-column CoNLL-U."""
    out = [f"# newdoc id = {doc.id}", f"# text = {doc.source_text}"]
    for i, tok in enumerate(doc.tokens, start=1):
        out.append(
            "\t".join(
                [str(i), tok.surface, "_", tok.tag.label, "_", "_", "_", "_", "_", "_"]
            )
        )
    out.append("")
    return "\n".join(out)


# ---------------------------------------------------------------------------
# Lexicon


@dataclass(frozen=True)
class Lexicon:
    """Unigram emission + tag-bigram transition scores for the decoder.

    All probabilities are natural-log values <= 0.  Transitions not
    listed fall back to ``trans_floor``.  Out-of-vocabulary fallback
    emits single characters at ``oov_penalty`` with ``oov_tag``.
    """

    tagset: frozenset[str]
    entries: dict[str, tuple[tuple[str, float], ...]]
    transitions: dict[tuple[str, str], float]
    oov_penalty: float = -12.0
    trans_floor: float = -10.0
    oov_tag: str = "o"
    functional_tags: frozenset[str] = frozenset()

    @property
    def max_entry_len(self) -> int:
        return max((len(s) for s in self.entries), default=1)

    def transition(self, prev: str, nxt: str) -> float:
        return self.transitions.get((prev, nxt), self.trans_floor)


def build_lexicon(
    rows: Iterable[tuple[str, str, float]],
    tagset: Iterable[str],
    transitions: dict[tuple[str, str], float] | None = None,
    oov_penalty: float = -12.0,
    trans_floor: float = -10.0,
    functional_tags: Iterable[str] = (),
) -> Lexicon:
    """Assemble a validated Lexicon from in-memory rows."""
    tags = frozenset(tagset)
    table: dict[str, dict[str, float]] = {}
    for surface, tag, lp in rows:
        surface = unicodedata.normalize("NFC", surface)
        if lp > 0:
            raise ValidationError(f"log_prob {lp} > 0 for entry {surface!r}/{tag}")
        if tag not in tags:
            raise ValidationError(f"tag {tag!r} outside declared tagset for {surface!r}")
        slot = table.setdefault(surface, {})
        # duplicate (surface, tag) rows keep the maximum log_prob
        if tag not in slot or lp > slot[tag]:
            slot[tag] = lp
    for (prev, nxt), lp in (transitions or {}).items():
        if lp > 0:
            raise ValidationError(f"transition log_prob {lp} > 0 for {prev}->{nxt}")
    entries = {
        s: tuple(sorted(tag_lp.items())) for s, tag_lp in sorted(table.items())
    }
    return Lexicon(
        tagset=tags,
        entries=entries,
        transitions=dict(transitions or {}),
        oov_penalty=oov_penalty,
        trans_floor=trans_floor,
        functional_tags=frozenset(functional_tags),
    )


def load_lexicon(stream: IO[str] | str) -> Lexicon:
    """Load a lexicon TSV.

    Header lines start with ``#`` and declare, tab-separated:
    ``# tagset  n  v  ...``, ``# oov_penalty  -12.0``,
    ``# trans_floor  -10.0``, ``# functional  det  part`` and
    ``# trans  <prev>  <next>  <log_prob>``.  Entry rows are
    ``surface<TAB>tag<TAB>log_prob``.
    """
    tagset: list[str] = []
    transitions: dict[tuple[str, str], float] = {}
    oov_penalty = -12.0
    trans_floor = -10.0
    functional: list[str] = []
    rows: list[tuple[str, str, float]] = []

    for lineno, line in enumerate(_lines(stream), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            parts = line[1:].strip().split("\t")
            key, args = parts[0], parts[1:]
            if key == "tagset":
                tagset.extend(args)
            elif key == "oov_penalty":
                oov_penalty = float(args[0])
            elif key == "trans_floor":
                trans_floor = float(args[0])
            elif key == "functional":
                functional.extend(args)
            elif key == "trans":
                if len(args) != 3:
                    raise ParseError("trans header needs prev, next, log_prob", lineno)
                transitions[(args[0], args[1])] = float(args[2])
            else:
                raise ParseError(f"unknown header key {key!r}", lineno)
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise ParseError(
                f"expected surface<TAB>tag<TAB>log_prob, got {len(cols)} columns",
                lineno,
            )
        try:
            lp = float(cols[2])
        except ValueError as exc:
            raise ParseError(f"bad log_prob {cols[2]!r}", lineno) from exc
        rows.append((cols[0], cols[1], lp))

    if not tagset:
        raise ParseError("lexicon header declares no tagset")
    try:
        return build_lexicon(
            rows,
            tagset,
            transitions,
            oov_penalty=oov_penalty,
            trans_floor=trans_floor,
            functional_tags=functional,
        )
    except ValidationError as exc:
        raise ParseError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Document JSONL (internal exchange format for pre-tokenized texts)


def document_to_dict(doc: Document) -> dict:
    return {
        "id": doc.id,
        "language": doc.language.value,
        "text": doc.source_text,
        "tokens": [
            {"surface": t.surface, "tag": t.tag.label, "start": t.start, "end": t.end}
            for t in doc.tokens
        ],
    }


def document_from_dict(data: dict) -> Document:
    language = Language(data["language"])
    tokens = [
        Token(t["surface"], POSTag(language.scheme, t["tag"]), t["start"], t["end"])
        for t in data["tokens"]
    ]
    return Document(data["id"], language, data["text"], tokens)


def load_documents(stream: IO[str] | str) -> list[Document]:
    """Read documents from JSONL, one document per line."""
    return [
        document_from_dict(json.loads(line))
        for line in _lines(stream)
        if line.strip()
    ]


def dump_documents(docs: Iterable[Document]) -> str:
    return "".join(json.dumps(document_to_dict(d), ensure_ascii=False) + "\n" for d in docs)


# ---------------------------------------------------------------------------
# Question bank


@dataclass(frozen=True)
class Question:
    kind: str
    prompt: str
    options: tuple[str, ...]
    answer: int


@dataclass(frozen=True)
class TextBank:
    """Questions and keyword candidates for one text."""

    text_id: str
    questions: tuple[Question, ...]
    targets: tuple[str, ...]
    distractors: tuple[str, ...]

    @property
    def candidates(self) -> tuple[str, ...]:
        return self.targets + self.distractors


@dataclass(frozen=True)
class QuestionBank:
    texts: dict[str, TextBank] = field(default_factory=dict)

    def __getitem__(self, text_id: str) -> TextBank:
        return self.texts[text_id]

    def __contains__(self, text_id: str) -> bool:
        return text_id in self.texts

    @property
    def text_ids(self) -> list[str]:
        return list(self.texts)


def load_question_bank(stream: IO[str] | str) -> QuestionBank:
    """Load and validate a question-bank JSON document.

    Schema: a list of ``{text_id, questions: [{kind, prompt, options[4],
    answer}], keywords: {targets[5], distractors[5]}}`` objects.
    """
    raw = stream if isinstance(stream, str) else stream.read()
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"bank is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise ParseError("bank must be a JSON array of per-text entries")

    texts: dict[str, TextBank] = {}
    for entry in data:
        tid = entry.get("text_id")
        if not tid:
            raise ValidationError("bank entry missing text_id")
        if tid in texts:
            raise ValidationError(f"duplicate bank entry for text {tid!r}")
        questions = entry.get("questions", [])
        kinds = [q.get("kind") for q in questions]
        if sorted(kinds) != sorted(QUESTION_KINDS):
            raise ValidationError(
                f"text {tid!r}: need exactly one question of each kind "
                f"{QUESTION_KINDS}, got {kinds}"
            )
        parsed = []
        for q in questions:
            options = tuple(q.get("options", []))
            if len(options) != 4:
                raise ValidationError(f"text {tid!r}: question needs 4 options")
            answer = q.get("answer")
            if not isinstance(answer, int) or not 0 <= answer < 4:
                raise ValidationError(f"text {tid!r}: answer index out of range")
            parsed.append(Question(q["kind"], q.get("prompt", ""), options, answer))
        kw = entry.get("keywords", {})
        targets = tuple(kw.get("targets", []))
        distractors = tuple(kw.get("distractors", []))
        if len(targets) != 5 or len(set(targets)) != 5:
            raise ValidationError(f"text {tid!r}: need 5 distinct target keywords")
        if len(distractors) != 5 or len(set(distractors)) != 5:
            raise ValidationError(f"text {tid!r}: need 5 distinct distractor keywords")
        if set(targets) & set(distractors):
            raise ValidationError(
                f"text {tid!r}: targets and distractors must be disjoint"
            )
        texts[tid] = TextBank(tid, tuple(parsed), targets, distractors)
    return QuestionBank(texts)
