"""Assemble the full analysis report from session logs and a question bank.

The report mirrors the experiment's result tables: per-question
chi-squared cells across temporal groupings, GEE odds ratios, paired-t
keyword cells, timing/difficulty comparisons, consensus, and reader
profiles.  FDR families are the three temporal groupings per question
or task (m = 3).
"""

from __future__ import annotations

from .errors import AnalysisError
from .ingest import QuestionBank
from .protocol import NON_STYLED, STYLED, SessionLog, derive_timings
from .stats import (
    GROUPS,
    ContingencyTable2x2,
    GroupSpec,
    bh_fdr,
    chi2_yates,
    classify_profiles,
    crowd_consensus,
    gee_logistic,
    group_filter,
    keyword_score,
    lmm_random_intercept,
    paired_t,
)

QUESTION_ORDER = ("factual", "inferential", "global", "cloze")


def _item_correctness(item, bank: QuestionBank) -> dict[str, bool]:
    """Per question kind, whether the recorded response was correct."""
    tb = bank[item.text_id]
    out = {}
    for q, resp in zip(tb.questions, item.mcq):
        out[q.kind] = resp == q.answer
    return out


def _resolve_groups(groups) -> list[GroupSpec]:
    out = []
    for g in groups:
        if isinstance(g, GroupSpec):
            out.append(g)
        elif g in GROUPS:
            out.append(GROUPS[g])
        else:
            raise AnalysisError(f"unknown group {g!r}; options: {sorted(GROUPS)}")
    return out


def _mcq_cells(logs, bank, specs):
    cells = []
    for kind in QUESTION_ORDER:
        row = []
        for spec in specs:
            counts = {STYLED: [0, 0], NON_STYLED: [0, 0]}  # [correct, incorrect]
            for log in logs:
                for item in group_filter(log.items, spec):
                    correct = _item_correctness(item, bank)[kind]
                    counts[item.condition][0 if correct else 1] += 1
            (a, b), (c, d) = counts[STYLED], counts[NON_STYLED]
            table = ContingencyTable2x2(a, b, c, d)
            res = chi2_yates(table)
            row.append(
                {
                    "group": spec.label,
                    "question": kind,
                    "n_styled": a + b,
                    "n_non_styled": c + d,
                    "s_acc": 100.0 * a / (a + b),
                    "ns_acc": 100.0 * c / (c + d),
                    "delta": res.effect,
                    "statistic": res.statistic,
                    "p": res.p,
                    "flags": sorted(res.flags),
                }
            )
        qs = bh_fdr([cell["p"] for cell in row], m=len(row))
        for cell, q in zip(row, qs):
            cell["q"] = q
        cells.extend(row)
    return cells


def _gee_cells(logs, bank, specs, corr="exchangeable"):
    cells = []
    for kind in QUESTION_ORDER:
        row = []
        for spec in specs:
            clusters = []
            for log in logs:
                obs = [
                    (1 if item.condition == STYLED else 0,
                     1 if _item_correctness(item, bank)[kind] else 0)
                    for item in group_filter(log.items, spec)
                ]
                if obs:
                    clusters.append(obs)
            res = gee_logistic(clusters, corr=corr)
            row.append(
                {
                    "group": spec.label,
                    "question": kind,
                    "odds_ratio": res.effect,
                    "statistic": res.statistic,
                    "p": res.p,
                    "flags": sorted(res.flags),
                }
            )
        finite = [cell for cell in row if cell["p"] is not None]
        if finite:
            qs = bh_fdr([cell["p"] for cell in finite], m=len(finite))
            for cell, q in zip(finite, qs):
                cell["q"] = q
        cells.extend(row)
    return cells


def _keyword_cells(logs, bank, specs):
    row = []
    for spec in specs:
        diffs = []
        means = {STYLED: [], NON_STYLED: []}
        for log in logs:
            per_cond = {STYLED: [], NON_STYLED: []}
            for item in group_filter(log.items, spec):
                tb = bank[item.text_id]
                score = keyword_score(
                    set(item.keywords), set(tb.targets), set(tb.distractors)
                )
                per_cond[item.condition].append(score)
            if per_cond[STYLED] and per_cond[NON_STYLED]:
                s = sum(per_cond[STYLED]) / len(per_cond[STYLED])
                ns = sum(per_cond[NON_STYLED]) / len(per_cond[NON_STYLED])
                diffs.append(s - ns)
                means[STYLED].append(s)
                means[NON_STYLED].append(ns)
        res = paired_t(diffs)
        row.append(
            {
                "group": spec.label,
                "n": len(diffs),
                "s_acc": 100.0 * sum(means[STYLED]) / len(means[STYLED]),
                "ns_acc": 100.0 * sum(means[NON_STYLED]) / len(means[NON_STYLED]),
                "delta": 100.0 * res.effect,
                "statistic": res.statistic,
                "p": res.p,
            }
        )
    qs = bh_fdr([cell["p"] for cell in row], m=len(row))
    for cell, q in zip(row, qs):
        cell["q"] = q
    return row


def _paired_measure(logs, spec, value_of):
    """Paired t over per-participant condition means of one measure."""
    diffs = []
    s_means, ns_means = [], []
    for log in logs:
        per_cond = {STYLED: [], NON_STYLED: []}
        for item in group_filter(log.items, spec):
            per_cond[item.condition].append(value_of(item))
        if per_cond[STYLED] and per_cond[NON_STYLED]:
            s = sum(per_cond[STYLED]) / len(per_cond[STYLED])
            ns = sum(per_cond[NON_STYLED]) / len(per_cond[NON_STYLED])
            diffs.append(s - ns)
            s_means.append(s)
            ns_means.append(ns)
    res = paired_t(diffs)
    return {
        "n": len(diffs),
        "mean_s": sum(s_means) / len(s_means),
        "mean_ns": sum(ns_means) / len(ns_means),
        "delta": res.effect,
        "statistic": res.statistic,
        "p": res.p,
    }


def _timing_cells(logs, specs):
    cells = []
    timed = {log.participant_id: derive_timings(log) for log in logs}

    def measure(name, value_of):
        for spec in specs:
            timings = []
            for log in logs:
                items = group_filter(timed[log.participant_id].items, spec)
                timings.append(
                    SessionLogView(log.participant_id, items)
                )
            cell = _paired_measure(timings, spec, value_of)
            cell.update({"measure": name, "group": spec.label})
            cells.append(cell)

    measure("reading_time_s", lambda t: t.reading_time_s)
    measure("answering_time_s", lambda t: t.answering_time_s)
    # difficulty lives on the raw items, not the timing view
    for spec in specs:
        cell = _paired_measure(logs, spec, lambda item: float(item.difficulty))
        cell.update({"measure": "difficulty", "group": spec.label})
        cells.append(cell)
    return cells


class SessionLogView:
    """Adapter so timing items can flow through _paired_measure."""

    def __init__(self, participant_id, items):
        self.participant_id = participant_id
        self.items = items


def _lmm_cells(logs, specs):
    cells = []
    timed = {log.participant_id: derive_timings(log) for log in logs}
    for spec in specs:
        clusters = []
        for log in logs:
            obs = [
                (1 if t.condition == STYLED else 0, t.reading_time_s)
                for t in group_filter(timed[log.participant_id].items, spec)
            ]
            if len(obs) >= 2:
                clusters.append(obs)
        try:
            res = lmm_random_intercept(clusters)
        except AnalysisError:
            continue
        raw_s = [y for c in clusters for cond, y in c if cond == 1]
        raw_ns = [y for c in clusters for cond, y in c if cond == 0]
        cells.append(
            {
                "group": spec.label,
                "metric": "reading_time_s",
                "beta": res.beta1,
                "raw_delta": sum(raw_s) / len(raw_s) - sum(raw_ns) / len(raw_ns),
                "sigma_u2": res.sigma_u2,
                "sigma_e2": res.sigma_e2,
                "p": res.p,
                "converged": res.converged,
            }
        )
    return cells


def _consensus_cells(logs, bank, specs):
    cells = []
    for spec in specs:
        per_cond = {STYLED: [], NON_STYLED: []}
        for text_id, tb in bank.texts.items():
            for cond in (STYLED, NON_STYLED):
                selections = []
                for log in logs:
                    for item in group_filter(log.items, spec):
                        if item.text_id == text_id and item.condition == cond:
                            selections.append(set(item.keywords))
                if len(selections) >= 2:
                    per_cond[cond].append(
                        crowd_consensus(selections, list(tb.candidates))
                    )
        cell = {"group": spec.label}
        for cond, key in ((STYLED, "s"), (NON_STYLED, "ns")):
            vals = per_cond[cond]
            cell[key] = 100.0 * sum(vals) / len(vals) if vals else None
        cells.append(cell)
    return cells


def _profiles(logs, bank, text_lengths):
    deltas = []
    pids = []
    for log in logs:
        timing = derive_timings(log, text_lengths)
        per_cond_cpm = {STYLED: [], NON_STYLED: []}
        per_cond_diff = {STYLED: [], NON_STYLED: []}
        per_cond_acc = {STYLED: [], NON_STYLED: []}
        for item, t in zip(log.items, timing.items):
            if t.cpm is not None:
                per_cond_cpm[item.condition].append(t.cpm)
            per_cond_diff[item.condition].append(float(item.difficulty))
            correct = _item_correctness(item, bank)
            per_cond_acc[item.condition].append(
                sum(correct.values()) / len(correct)
            )
        if not per_cond_cpm[STYLED] or not per_cond_cpm[NON_STYLED]:
            continue

        def mean_delta(d):
            return sum(d[STYLED]) / len(d[STYLED]) - sum(d[NON_STYLED]) / len(
                d[NON_STYLED]
            )

        deltas.append(
            (mean_delta(per_cond_cpm), mean_delta(per_cond_diff), mean_delta(per_cond_acc))
        )
        pids.append(log.participant_id)
    labels = classify_profiles(deltas)
    counts = {}
    for label in labels:
        counts[label] = counts.get(label, 0) + 1
    return {"labels": dict(zip(pids, labels)), "counts": counts}


def analyze(
    logs: list[SessionLog],
    bank: QuestionBank,
    groups=("all", "3-8", "5-8"),
    text_lengths: dict[str, int] | None = None,
    gee: bool = True,
    gee_corr: str = "exchangeable",
) -> dict:
    """Run the whole battery and return a JSON-serializable report."""
    if not logs:
        raise AnalysisError("no session logs to analyze")
    specs = _resolve_groups(groups)
    report = {
        "n_participants": len(logs),
        "groups": [s.label for s in specs],
        "mcq": _mcq_cells(logs, bank, specs),
        "keyword": _keyword_cells(logs, bank, specs),
        "timing": _timing_cells(logs, specs),
        "lmm": _lmm_cells(logs, specs),
        "consensus": _consensus_cells(logs, bank, specs),
    }
    if gee:
        report["gee"] = _gee_cells(logs, bank, specs, corr=gee_corr)
    if text_lengths:
        report["profiles"] = _profiles(logs, bank, text_lengths)
    return report


def report_to_csv(report: dict) -> str:
    """Flatten the MCQ cells into CSV (one row per question x group)."""
    lines = ["group,question,s_acc,ns_acc,delta,statistic,p,q,flags"]
    for cell in report["mcq"]:
        lines.append(
            f"{cell['group']},{cell['question']},{cell['s_acc']:.2f},"
            f"{cell['ns_acc']:.2f},{cell['delta']:.2f},{cell['statistic']:.4f},"
            f"{cell['p']:.4f},{cell['q']:.4f},{';'.join(cell['flags'])}"
        )
    return "\n".join(lines) + "\n"
