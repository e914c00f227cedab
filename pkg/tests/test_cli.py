import json

import pytest
from click.testing import CliRunner

from seglit.cli import main

LEXICON = (
    "# tagset\tn\tv\ta\to\t1\tdet\tpart\n"
    "# trans\t<s>\tn\t-0.3\n"
    "ការងារ\tn\t-1.0\n"
    "ធ្វើ\tv\t-1.2\n"
    "ល្អ\ta\t-0.8\n"
)

CONLLU = "\n".join(
    [
        "# newdoc id = j1",
        "# text = 猫が走る",
        "1\t猫\t_\tNOUN\t_\t_\t_\t_\t_\t_",
        "2\tが\t_\tPART\t_\t_\t_\t_\t_\t_",
        "3\t走る\t_\tVERB\t_\t_\t_\t_\t_\t_",
        "",
    ]
)


@pytest.fixture()
def runner():
    return CliRunner()


class TestSegtag:
    def test_emits_conllu(self, runner, tmp_path):
        (tmp_path / "lex.tsv").write_text(LEXICON, encoding="utf-8")
        (tmp_path / "in.txt").write_text("ការងារធ្វើល្អ\n", encoding="utf-8")
        result = runner.invoke(
            main,
            ["segtag", "--lexicon", str(tmp_path / "lex.tsv"), str(tmp_path / "in.txt")],
        )
        assert result.exit_code == 0
        assert "ការងារ\t_\tn" in result.output

    def test_bad_lexicon_is_data_error(self, runner, tmp_path):
        (tmp_path / "lex.tsv").write_text("no header\n", encoding="utf-8")
        (tmp_path / "in.txt").write_text("x\n", encoding="utf-8")
        result = runner.invoke(
            main,
            ["segtag", "--lexicon", str(tmp_path / "lex.tsv"), str(tmp_path / "in.txt")],
        )
        assert result.exit_code == 1

    def test_unknown_subcommand_is_usage_error(self, runner):
        assert runner.invoke(main, ["frobnicate"]).exit_code == 2


class TestRender:
    def test_html_golden(self, runner, tmp_path):
        (tmp_path / "in.conllu").write_text(CONLLU, encoding="utf-8")
        result = runner.invoke(
            main,
            ["render", "--scheme", "ja-color", "--format", "html",
             str(tmp_path / "in.conllu")],
        )
        assert result.exit_code == 0
        assert '<span style="color:#1976D2">猫</span>' in result.output

    def test_span_json(self, runner, tmp_path):
        (tmp_path / "in.conllu").write_text(CONLLU, encoding="utf-8")
        result = runner.invoke(
            main, ["render", "--scheme", "ja-color", str(tmp_path / "in.conllu")]
        )
        spans = json.loads(result.output)
        assert spans[0] == {"start": 0, "end": 1, "weight": "regular",
                            "color": "#1976D2"}


class TestProtocol:
    def test_gen(self, runner, tmp_path):
        (tmp_path / "ids.json").write_text(json.dumps([f"t{i}" for i in range(10)]))
        result = runner.invoke(
            main,
            ["protocol", "gen", "--texts", str(tmp_path / "ids.json"),
             "--participants", "3", "--seed", "1"],
        )
        assert result.exit_code == 0
        lines = [json.loads(l) for l in result.output.splitlines()]
        assert len(lines) == 3
        assert all(len(rec["items"]) == 10 for rec in lines)

    def test_odd_count_is_data_error(self, runner, tmp_path):
        (tmp_path / "ids.json").write_text(json.dumps([f"t{i}" for i in range(9)]))
        result = runner.invoke(
            main,
            ["protocol", "gen", "--texts", str(tmp_path / "ids.json"),
             "--participants", "1"],
        )
        assert result.exit_code == 1
        assert "even count" in result.output


class TestAnalyzePipeline:
    def test_fixtures_then_analyze(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["fixtures", "--out", str(tmp_path), "--participants", "8", "--seed", "2"],
        )
        assert result.exit_code == 0, result.output
        result = runner.invoke(
            main,
            ["analyze", str(tmp_path / "sessions.jsonl"),
             "--bank", str(tmp_path / "bank.json"),
             "--texts", str(tmp_path / "documents.jsonl")],
        )
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert len(report["mcq"]) == 12  # 4 questions x 3 groups
        assert report["n_participants"] == 8
        assert "profiles" in report

    def test_single_group(self, runner, tmp_path):
        runner.invoke(main, ["fixtures", "--out", str(tmp_path),
                             "--participants", "5"])
        result = runner.invoke(
            main,
            ["analyze", str(tmp_path / "sessions.jsonl"),
             "--bank", str(tmp_path / "bank.json"), "--group", "3-8", "--no-gee"],
        )
        report = json.loads(result.output)
        assert report["groups"] == ["3-8"]
        assert len(report["mcq"]) == 4

    def test_csv_output(self, runner, tmp_path):
        runner.invoke(main, ["fixtures", "--out", str(tmp_path),
                             "--participants", "5"])
        result = runner.invoke(
            main,
            ["analyze", str(tmp_path / "sessions.jsonl"),
             "--bank", str(tmp_path / "bank.json"), "--csv"],
        )
        header, *rows = result.output.strip().splitlines()
        assert header.startswith("group,question,")
        assert len(rows) == 12


class TestTally:
    def test_tally_report(self, runner, tmp_path):
        from seglit.synth import make_ballots

        ballots = make_ballots(10, seed=1, n_too_fast=2)
        lines = []
        for b in ballots:
            lines.append(json.dumps({
                "participant_id": b.participant_id,
                "completion_minutes": b.completion_minutes,
                "votes": [
                    {"pair_id": v.pair_id, "choice": v.choice, "dimension": v.dimension}
                    for v in b.votes
                ],
            }))
        (tmp_path / "ballots.jsonl").write_text("\n".join(lines), encoding="utf-8")
        result = runner.invoke(main, ["tally", str(tmp_path / "ballots.jsonl")])
        report = json.loads(result.output)
        assert report["n_counted"] == 8
        assert report["n_excluded"] == 2


class TestConfig:
    def test_config_file_supplies_defaults(self, runner, tmp_path):
        runner.invoke(main, ["fixtures", "--out", str(tmp_path), "--participants", "4"])
        (tmp_path / "seglit.toml").write_text(
            f'bank = "{tmp_path / "bank.json"}"\n', encoding="utf-8"
        )
        result = runner.invoke(
            main,
            ["--config", str(tmp_path / "seglit.toml"),
             "analyze", str(tmp_path / "sessions.jsonl"), "--no-gee"],
        )
        assert result.exit_code == 0, result.output
        assert json.loads(result.output)["n_participants"] == 4
