"""Dataset ingestion, batch evaluation, and report generation.

Dataset files are line oriented: `#` lines are comments, fields split on a
TAB when one is present and on a comma otherwise; the first field is the
obfuscated expression and the second its ground truth.  Extra fields are
ignored so the public MBA dataset dumps load as-is.
"""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import IO

from .config import DEFAULT_CONFIG, SimplifyConfig
from .expr import Expr, Metric, ParseError, metric_value, parse, to_string
from .linear import simplify_linear
from .pipeline import simplify_general_ex
from .verify import OutcomeClass, check

ENGINES = ("simba", "gamba")


@dataclass(frozen=True)
class DatasetEntry:
    complex_expr: str
    ground_truth: str
    line: int
    error: str | None = None


@dataclass(frozen=True)
class RunRecord:
    entry: DatasetEntry
    simplified: str
    outcome: OutcomeClass
    evidence: str
    wall_ms: float
    timed_out: bool
    budget_exceeded: bool
    input_metrics: tuple[int, int, int]   # nodes, terms, alternation
    output_metrics: tuple[int, int, int]


@dataclass(frozen=True)
class RunSummary:
    total: int
    identical: int
    equivalent: int
    unproven: int
    timeout: int
    invalid: int
    mean_ms: float
    median_ms: float

    @property
    def percent(self) -> float:
        if not self.total:
            return 0.0
        return 100.0 * (self.identical + self.equivalent) / self.total


def load_dataset(path: str | Path, width: int = 64, strict: bool = False) -> list[DatasetEntry]:
    """Read entries, validating both fields under the expression grammar.

    Bad lines raise in strict mode; otherwise they become entries whose error
    field carries the line number and reason, surfacing in the run summary.
    """
    entries: list[DatasetEntry] = []
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t") if "\t" in line else line.split(",")
        fields = [f.strip() for f in fields]
        if len(fields) < 2 or not fields[0] or not fields[1]:
            entry = DatasetEntry(line, "", lineno, "expected two fields")
        else:
            entry = DatasetEntry(fields[0], fields[1], lineno)
            try:
                parse(fields[0], width)
                parse(fields[1], width)
            except ParseError as exc:
                entry = replace(entry, error=str(exc))
        if entry.error and strict:
            raise ValueError(f"{path}:{lineno}: {entry.error}")
        entries.append(entry)
    return entries


def _metrics(e: Expr) -> tuple[int, int, int]:
    return (
        metric_value(e, Metric.NODE_COUNT),
        metric_value(e, Metric.TERM_COUNT),
        metric_value(e, Metric.MBA_ALTERNATION),
    )


def _simplify(e: Expr, engine: str, cfg: SimplifyConfig) -> tuple[Expr, bool]:
    if engine == "simba":
        return simplify_linear(e, cfg), False
    outcome = simplify_general_ex(e, cfg)
    return outcome.expr, outcome.budget_exceeded


def run_dataset(entries: list[DatasetEntry], cfg: SimplifyConfig = DEFAULT_CONFIG,
                engine: str = "gamba") -> tuple[list[RunRecord], RunSummary]:
    """Simplify and verify every valid entry; invalid ones only count."""
    if engine not in ENGINES:
        raise ValueError(f"unknown engine {engine!r}")
    records: list[RunRecord] = []
    invalid = 0
    for entry in entries:
        if entry.error:
            invalid += 1
            continue
        source = parse(entry.complex_expr, cfg.width)
        truth = parse(entry.ground_truth, cfg.width)
        start = time.perf_counter()
        simplified, exceeded = _simplify(source, engine, cfg)
        wall_ms = (time.perf_counter() - start) * 1000.0
        timed_out = exceeded or wall_ms > cfg.time_budget_ms
        outcome = check(simplified, truth, cfg)
        records.append(RunRecord(
            entry=entry,
            simplified=to_string(simplified),
            outcome=outcome.klass,
            evidence=outcome.evidence,
            wall_ms=wall_ms,
            timed_out=timed_out,
            budget_exceeded=exceeded,
            input_metrics=_metrics(source),
            output_metrics=_metrics(simplified),
        ))
    times = [r.wall_ms for r in records]
    counted = [r for r in records if not r.timed_out]
    summary = RunSummary(
        total=len(records),
        identical=sum(r.outcome is OutcomeClass.IDENTICAL for r in counted),
        equivalent=sum(r.outcome is OutcomeClass.EQUIVALENT for r in counted),
        unproven=sum(r.outcome is OutcomeClass.UNPROVEN for r in counted),
        timeout=sum(r.timed_out for r in records),
        invalid=invalid,
        mean_ms=statistics.fmean(times) if times else 0.0,
        median_ms=statistics.median(times) if times else 0.0,
    )
    return records, summary


_CSV_COLUMNS = [
    "line", "complex", "ground_truth", "simplified", "outcome", "evidence",
    "in_nodes", "in_terms", "in_alternation",
    "out_nodes", "out_terms", "out_alternation", "timed_out",
]


def _record_row(r: RunRecord, timing: bool) -> dict:
    row = {
        "line": r.entry.line,
        "complex": r.entry.complex_expr,
        "ground_truth": r.entry.ground_truth,
        "simplified": r.simplified,
        "outcome": r.outcome.value,
        "evidence": r.evidence,
        "in_nodes": r.input_metrics[0],
        "in_terms": r.input_metrics[1],
        "in_alternation": r.input_metrics[2],
        "out_nodes": r.output_metrics[0],
        "out_terms": r.output_metrics[1],
        "out_alternation": r.output_metrics[2],
        "timed_out": int(r.timed_out),
    }
    if timing:
        row["wall_ms"] = round(r.wall_ms, 3)
    return row


def _summary_pairs(s: RunSummary, timing: bool) -> list[tuple[str, object]]:
    pairs: list[tuple[str, object]] = [
        ("total", s.total),
        ("identical", s.identical),
        ("equivalent", s.equivalent),
        ("unproven", s.unproven),
        ("timeout", s.timeout),
        ("invalid", s.invalid),
        ("percent", f"{s.percent:.1f}"),
    ]
    if timing:
        pairs += [("mean_ms", f"{s.mean_ms:.2f}"), ("median_ms", f"{s.median_ms:.2f}")]
    return pairs


def report(records: list[RunRecord], summary: RunSummary, sink: IO[str],
           fmt: str = "csv", timing: bool = False) -> None:
    """Write per-entry rows plus a Table-style summary block.

    Timing columns are opt-in so reports are byte-identical across runs with
    the same seed and configuration.
    """
    if fmt == "csv":
        columns = _CSV_COLUMNS + (["wall_ms"] if timing else [])
        sink.write(",".join(columns) + "\n")
        for r in records:
            row = _record_row(r, timing)
            sink.write(",".join(_csv_cell(row[c]) for c in columns) + "\n")
        for key, value in _summary_pairs(summary, timing):
            sink.write(f"# {key}={value}\n")
    elif fmt == "json":
        for r in records:
            sink.write(json.dumps(_record_row(r, timing), sort_keys=True) + "\n")
        sink.write(json.dumps({"summary": dict(_summary_pairs(summary, timing))},
                              sort_keys=True) + "\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")


def _csv_cell(value) -> str:
    text = str(value)
    if "," in text or '"' in text:
        return '"' + text.replace('"', '""') + '"'
    return text
