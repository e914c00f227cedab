"""Command-line entry point for the seglit pipeline.

Configuration precedence: flags > environment variables (SEGLIT_*) >
``seglit.toml`` (flat ``key = value`` lines) in the working directory.
Machine-parseable results go to stdout; diagnostics to stderr.  Exit
codes: 0 success, 1 data errors, 2 usage errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .analysis import analyze, report_to_csv
from .errors import SeglitError
from .ingest import (
    load_documents,
    load_lexicon,
    load_question_bank,
    serialize_conllu,
)
from .protocol import (
    PreferenceBallot,
    Vote,
    assignment_record,
    filter_participants,
    generate_cohort,
    read_sessions,
)
from .render import render_ansi, render_html, render_spans
from .segtag import segment_tag
from .styler import (
    BUILTIN_SCHEMES,
    apply_scheme,
    get_scheme,
    load_scheme,
    validate_scheme,
)
from .textmodel import Document, Language, POSTag, Token

CONFIG_FILE = "seglit.toml"


def _load_config(path: str | None) -> dict:
    """Flat ``key = value`` config; values are strings, # comments allowed."""
    cfg_path = Path(path or CONFIG_FILE)
    if not cfg_path.is_file():
        return {}
    out = {}
    for line in cfg_path.read_text(encoding="utf-8").splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise click.UsageError(f"{cfg_path}: malformed config line {line!r}")
        out[key.strip()] = value.strip().strip("\"'")
    return out


@click.group(context_settings={"auto_envvar_prefix": "SEGLIT"})
@click.option("--config", envvar="SEGLIT_CONFIG", default=None, help="Config file path.")
@click.pass_context
def main(ctx, config):
    """POS-conditioned styling and readability-experiment toolkit."""
    cfg = _load_config(config)
    if cfg:
        # flat keys apply to every subcommand that declares the option
        ctx.default_map = {
            cmd: dict(cfg) for cmd in main.commands
        }
        ctx.default_map["protocol"] = {"gen": dict(cfg)}


def _fail(exc: SeglitError):
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@main.command()
@click.argument("infile", type=click.File("r", encoding="utf-8"))
@click.option("--lexicon", "lexicon_path", required=True,
              type=click.File("r", encoding="utf-8"), help="Lexicon TSV.")
@click.option("--doc-id", default="doc", show_default=True)
def segtag(infile, lexicon_path, doc_id):
    """Segment and tag raw Khmer text; emits CoNLL-U on stdout.

    Each non-empty input line becomes one document (id suffixed by line
    number when there are several).
    """
    try:
        lexicon = load_lexicon(lexicon_path)
        lines = [l.strip() for l in infile if l.strip()]
        for i, line in enumerate(lines, start=1):
            tokens = segment_tag(line, lexicon)
            did = doc_id if len(lines) == 1 else f"{doc_id}-{i}"
            doc = Document(did, Language.KHMER, line, tokens)
            click.echo(serialize_conllu(doc))
    except SeglitError as exc:
        _fail(exc)


def _resolve_scheme(name_or_path: str):
    if name_or_path in BUILTIN_SCHEMES:
        return get_scheme(name_or_path)
    with open(name_or_path, encoding="utf-8") as fh:
        return load_scheme(fh)


@main.command()
@click.argument("infile", type=click.File("r", encoding="utf-8"))
@click.option("--scheme", "scheme_name", required=True,
              help="Built-in scheme name (khmer-bold, ja-color) or JSON file.")
@click.option("--check-contrast", is_flag=True,
              help="Report WCAG contrast per role to stderr.")
def style(infile, scheme_name, check_contrast):
    """Apply a style scheme to documents (JSONL or CoNLL-U); emits span JSON."""
    try:
        scheme = _resolve_scheme(scheme_name)
        if check_contrast:
            for row in validate_scheme(scheme):
                verdict = "pass" if row.passes else "FAIL"
                click.echo(
                    f"{row.role.value}: {row.color} on {row.background} "
                    f"ratio {row.ratio:.2f} {verdict}",
                    err=True,
                )
        for doc in _read_docs(infile, scheme.tag_scheme):
            runs = apply_scheme(doc, scheme)
            click.echo(json.dumps({"id": doc.id, "spans": json.loads(render_spans(doc, runs))},
                                  ensure_ascii=False))
    except SeglitError as exc:
        _fail(exc)


def _read_docs(infile, tag_scheme):
    from .ingest import parse_conllu

    text = infile.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return load_documents(text)
    language = Language.KHMER if tag_scheme.value == "khmer" else Language.JAPANESE
    return parse_conllu(text, language=language)


@main.command()
@click.argument("infile", type=click.File("r", encoding="utf-8"))
@click.option("--scheme", "scheme_name", required=True)
@click.option("--format", "fmt", type=click.Choice(["html", "ansi", "json"]),
              default="json", show_default=True)
@click.option("--css-classes", is_flag=True, help="Emit class names, not inline styles.")
def render(infile, scheme_name, fmt, css_classes):
    """Render styled documents as HTML fragments, ANSI text, or span JSON."""
    try:
        scheme = _resolve_scheme(scheme_name)
        for doc in _read_docs(infile, scheme.tag_scheme):
            runs = apply_scheme(doc, scheme)
            if fmt == "html":
                click.echo(render_html(doc, runs, css_classes=css_classes))
            elif fmt == "ansi":
                click.echo(render_ansi(doc, runs))
            else:
                click.echo(render_spans(doc, runs))
    except SeglitError as exc:
        _fail(exc)


@main.group()
def protocol():
    """Experiment protocol utilities."""


@protocol.command("gen")
@click.option("--texts", "texts_path", required=True,
              type=click.File("r", encoding="utf-8"),
              help="JSON array of text ids.")
@click.option("--participants", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--latin-square", is_flag=True,
              help="Rotate one base order instead of independent shuffles.")
def protocol_gen(texts_path, participants, seed, latin_square):
    """Generate counterbalanced assignments as JSONL on stdout."""
    try:
        text_ids = json.load(texts_path)
        pids = [f"p{i:03d}" for i in range(participants)]
        for a in generate_cohort(text_ids, pids, seed, latin_square=latin_square):
            click.echo(json.dumps(assignment_record(a)))
    except SeglitError as exc:
        _fail(exc)


def _read_ballots(stream) -> list[PreferenceBallot]:
    ballots = []
    for line in stream:
        if not line.strip():
            continue
        rec = json.loads(line)
        votes = tuple(
            Vote(v["pair_id"], v["choice"], v["dimension"]) for v in rec["votes"]
        )
        ballots.append(
            PreferenceBallot(rec["participant_id"], rec["completion_minutes"], votes)
        )
    return ballots


@main.command()
@click.argument("ballots_file", type=click.File("r", encoding="utf-8"))
@click.option("--min-minutes", type=float, default=5.0, show_default=True)
@click.option("--max-minutes", type=float, default=12.0, show_default=True)
def tally(ballots_file, min_minutes, max_minutes):
    """Tally A/B preference ballots (JSONL) into a vote report."""
    from .protocol import tally_preferences

    try:
        result = tally_preferences(
            _read_ballots(ballots_file), min_minutes, max_minutes
        )
        click.echo(
            json.dumps(
                {
                    "n_counted": result.n_counted,
                    "n_excluded": result.n_excluded,
                    "median_completion_minutes": result.median_completion_minutes,
                    "counts": result.counts,
                    "overall": result.overall,
                }
            )
        )
    except SeglitError as exc:
        _fail(exc)


@main.command("analyze")
@click.argument("sessions_file", type=click.File("r", encoding="utf-8"))
@click.option("--bank", "bank", required=True,
              type=click.File("r", encoding="utf-8"), help="Question bank JSON.")
@click.option("--group", "groups", multiple=True,
              type=click.Choice(["all", "3-8", "5-8"]),
              help="Temporal grouping(s); default all three.")
@click.option("--min-minutes", type=float, default=0.0, show_default=True,
              help="Exclude sessions shorter than this many minutes.")
@click.option("--texts", "texts", type=click.File("r", encoding="utf-8"),
              default=None, help="Documents JSONL for CPM/profile metrics.")
@click.option("--no-gee", is_flag=True, help="Skip the GEE cells.")
@click.option("--gee-corr", type=click.Choice(["exchangeable", "independence"]),
              default="exchangeable", show_default=True)
@click.option("--csv", "as_csv", is_flag=True, help="Emit the MCQ cells as CSV.")
def analyze_cmd(sessions_file, bank, groups, min_minutes, texts,
                no_gee, gee_corr, as_csv):
    """Run the full analysis battery over session logs; emits a JSON report."""
    try:
        logs = read_sessions(sessions_file)
        bank = load_question_bank(bank)
        if min_minutes > 0:
            logs, excluded = filter_participants(logs, min_minutes)
            if excluded:
                click.echo(
                    f"excluded {len(excluded)} participant(s) under "
                    f"{min_minutes:g} minutes",
                    err=True,
                )
        text_lengths = None
        if texts is not None:
            docs = load_documents(texts.read())
            text_lengths = {d.id: len(d.source_text) for d in docs}
        report = analyze(
            logs,
            bank,
            groups=groups or ("all", "3-8", "5-8"),
            text_lengths=text_lengths,
            gee=not no_gee,
            gee_corr=gee_corr,
        )
        click.echo(report_to_csv(report) if as_csv else json.dumps(report))
    except SeglitError as exc:
        _fail(exc)


@main.command()
@click.option("--docs", "docs_file", required=True,
              type=click.File("r", encoding="utf-8"), help="Documents JSONL.")
@click.option("--bank", "bank_file", required=True,
              type=click.File("r", encoding="utf-8"), help="Question bank JSON.")
@click.option("--data-dir", default="data", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--scheme", "scheme_name", default=None,
              help="Force one style scheme; default picks per language.")
def serve(docs_file, bank_file, data_dir, host, port, scheme_name):
    """Run the HTTP session service."""
    import uvicorn

    from .service import create_app

    try:
        app = create_app(
            load_documents(docs_file.read()),
            load_question_bank(bank_file),
            data_dir,
            scheme_name=scheme_name,
        )
    except SeglitError as exc:
        _fail(exc)
    uvicorn.run(app, host=host, port=port)


@main.command()
@click.option("--out", "out_dir", default="fixtures", show_default=True)
@click.option("--participants", type=int, default=50, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
def fixtures(out_dir, participants, seed):
    """Write a synthetic experiment bundle (documents, bank, sessions)."""
    from .ingest import dump_documents
    from .protocol import write_sessions
    from .synth import bank_to_json, make_bank, make_documents, make_sessions

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    text_ids = [f"t{i:02d}" for i in range(1, 11)]
    docs = make_documents(text_ids, seed=seed)
    bank = make_bank(text_ids, seed=seed)
    logs = make_sessions(bank, text_ids, participants, seed=seed)
    (out / "documents.jsonl").write_text(dump_documents(docs), encoding="utf-8")
    (out / "bank.json").write_text(json.dumps(bank_to_json(bank), indent=2),
                                   encoding="utf-8")
    with (out / "sessions.jsonl").open("w", encoding="utf-8") as fh:
        write_sessions(fh, logs)
    click.echo(f"wrote documents.jsonl, bank.json, sessions.jsonl to {out}", err=True)


if __name__ == "__main__":
    main()
