"""Text, JSON and CSV renderings of pond verdicts and classifier reports."""

import io
import json
from typing import Dict, Iterable, List, Sequence, Tuple

import pandas as pd

from app.errors import ValidationError
from app.ml.metrics import REPORT_SCHEMA_VERSION, RankedModel, Report, rank_models
from app.schemas import Parameter, PondVerdict

OUTPUT_FORMATS = ("text", "json", "csv")

# verdict table columns: heading, cell format
_VERDICT_COLUMNS: Dict[Parameter, Tuple[str, str]] = {
    Parameter.PH: ("pH", "{:.2f}"),
    Parameter.TEMPERATURE: ("Temperature (C)", "{:.2f}"),
    Parameter.TURBIDITY: ("Turbidity (NTU)", "{:.2f}"),
    Parameter.DEPTH: ("Depth (m)", "{:g}"),
    Parameter.CONDUCTIVITY: ("Conductivity (uS/cm)", "{:d}"),
}


def _frame_csv(frame: pd.DataFrame) -> str:
    buffer = io.StringIO()
    frame.to_csv(buffer, index=False, lineterminator="\n")
    return buffer.getvalue()


def _cell(parameter: Parameter, lo: float, hi: float) -> str:
    fmt = _VERDICT_COLUMNS[parameter][1]
    if parameter == Parameter.CONDUCTIVITY:
        lo, hi = int(lo), int(hi)
    return f"{fmt.format(lo)}-{fmt.format(hi)}"


def verdict_table(verdicts: Iterable[PondVerdict]) -> str:
    """Fixed-width table of observed ranges and remarks, one row per pond."""
    verdicts = list(verdicts)
    headings = ["Pond"] + [heading for heading, _ in _VERDICT_COLUMNS.values()] + ["Remarks"]
    rows = []
    for verdict in verdicts:
        observed = {status.parameter: status.observed_range for status in verdict.statuses}
        row = [f"Pond {verdict.pond_id}"]
        for parameter in _VERDICT_COLUMNS:
            row.append(_cell(parameter, *observed[parameter]) if parameter in observed else "-")
        row.append(verdict.remarks)
        rows.append(row)

    widths = [max(len(str(cell)) for cell in column) for column in zip(headings, *rows)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headings, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)

    notes = [
        f"Pond {verdict.pond_id}: {obs.parameter.value} median {obs.summary.median:g}"
        + (f" ({obs.oxygen_status.value})" if obs.oxygen_status else "")
        for verdict in verdicts
        for obs in verdict.observations
    ]
    if notes:
        lines.append("")
        lines.append("Recorded only:")
        lines.extend(f"  {note}" for note in notes)
    return "\n".join(lines) + "\n"


def verdicts_json(verdicts: Iterable[PondVerdict]) -> str:
    return json.dumps(
        [verdict.model_dump(mode="json", by_alias=True) for verdict in verdicts], indent=2
    ) + "\n"


def verdicts_csv(verdicts: Iterable[PondVerdict]) -> str:
    rows = [
        {
            "pond_id": verdict.pond_id,
            "parameter": status.parameter.value,
            "samples": status.sample_count,
            "min": status.observed_range[0],
            "max": status.observed_range[1],
            "median": status.median,
            "in_range_fraction": status.in_range_fraction,
            "pass": status.passed,
            "recommended": verdict.recommended,
            "remarks": verdict.remarks,
        }
        for verdict in verdicts
        for status in verdict.statuses
    ]
    return _frame_csv(pd.DataFrame(rows))


def render_verdicts(verdicts: Sequence[PondVerdict], fmt: str) -> str:
    if fmt == "text":
        return verdict_table(verdicts)
    if fmt == "json":
        return verdicts_json(verdicts)
    if fmt == "csv":
        return verdicts_csv(verdicts)
    raise ValidationError(f"unknown output format {fmt!r}")


def _metric(value: float, undefined: bool) -> str:
    return "?".rjust(9) if undefined else f"{value:9.3f}"


def report_text(report: Report) -> str:
    """Summary block, per-class table and confusion matrix in the Weka layout."""
    lines = [
        f"=== {report.algorithm}: Stratified cross-validation ===",
        "",
        "=== Summary ===",
        "",
        f"Correctly Classified Instances     {report.correct:8d}   {100 * report.accuracy:8.4f} %",
        f"Incorrectly Classified Instances   {report.incorrect:8d}   "
        f"{100 * (1 - report.accuracy):8.4f} %",
        f"Kappa statistic                    {report.kappa:12.4f}",
        f"Total Number of Instances          {report.total:8d}",
        "",
        "=== Detailed Accuracy By Class ===",
        "",
        "          TP Rate   FP Rate  Precision   Recall F-Measure  Class",
    ]
    for metrics in report.per_class:
        undefined = set(metrics.undefined)
        lines.append(
            "        "
            + _metric(metrics.tp_rate, "tp_rate" in undefined)
            + " "
            + _metric(metrics.fp_rate, "fp_rate" in undefined)
            + "  "
            + _metric(metrics.precision, "precision" in undefined)
            + " "
            + _metric(metrics.recall, "recall" in undefined)
            + " "
            + _metric(metrics.f1, "f1" in undefined)
            + f"  {metrics.class_name}"
        )
    lines.append(
        "Weighted"
        + f"{report.weighted_tp_rate:9.3f} {report.weighted_fp_rate:9.3f}  "
        + f"{report.weighted_precision:9.3f} {report.weighted_recall:9.3f} "
        + f"{report.weighted_f1:9.3f}"
    )
    lines.append(
        "Macro   "
        + " " * 21
        + f"{report.macro_precision:9.3f} {report.macro_recall:9.3f} {report.macro_f1:9.3f}"
    )

    letters = [_column_letter(i) for i in range(len(report.class_names))]
    width = max(5, max(len(str(c)) for row in report.confusion_matrix for c in row) + 1)
    lines += ["", "=== Confusion Matrix ===", ""]
    lines.append("".join(letter.rjust(width) for letter in letters) + "   <-- classified as")
    for letter, name, row in zip(letters, report.class_names, report.confusion_matrix):
        lines.append("".join(str(c).rjust(width) for c in row) + f" | {letter} = {name}")
    return "\n".join(lines) + "\n"


def _column_letter(index: int) -> str:
    letters = ""
    index += 1
    while index:
        index, remainder = divmod(index - 1, 26)
        letters = chr(ord("a") + remainder) + letters
    return letters


def rank_table(ranking: Sequence[RankedModel]) -> str:
    """Percentages to two decimals, best model first."""
    headings = ("Rank", "Algorithm", "Accuracy (%)", "Kappa (%)", "Avg. TP Rate (%)")
    rows = [
        (
            str(entry.rank),
            entry.algorithm,
            f"{100 * entry.accuracy:.2f}",
            f"{100 * entry.kappa:.2f}",
            f"{100 * entry.avg_tp_rate:.2f}",
        )
        for entry in ranking
    ]
    widths = [max(len(c) for c in column) for column in zip(headings, *rows)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headings, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    lines.extend("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in rows)
    return "\n".join(lines) + "\n"


def ranking_csv(ranking: Sequence[RankedModel]) -> str:
    frame = pd.DataFrame(
        [
            {
                "rank": entry.rank,
                "algorithm": entry.algorithm,
                "accuracy_pct": round(100 * entry.accuracy, 2),
                "kappa_pct": round(100 * entry.kappa, 2),
                "avg_tp_rate_pct": round(100 * entry.avg_tp_rate, 2),
            }
            for entry in ranking
        ],
        columns=["rank", "algorithm", "accuracy_pct", "kappa_pct", "avg_tp_rate_pct"],
    )
    return _frame_csv(frame)


def reports_document(reports: Sequence[Report]) -> Dict:
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "reports": [report.model_dump(mode="json") for report in reports],
        "ranking": [entry.model_dump(mode="json") for entry in rank_models(reports)],
    }


def load_reports(text: str) -> List[Report]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"report file is not valid JSON: {exc}") from exc
    if not isinstance(document, dict) or document.get("schema_version") != REPORT_SCHEMA_VERSION:
        raise ValidationError("unsupported report schema version")
    reports = [Report.model_validate(item) for item in document.get("reports", [])]
    if not reports:
        raise ValidationError("report file holds no reports")
    return reports


def render_reports(reports: Sequence[Report], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(reports_document(reports), indent=2) + "\n"
    ranking = rank_models(reports)
    if fmt == "csv":
        return ranking_csv(ranking)
    if fmt == "text":
        return "\n".join(report_text(report) for report in reports) + "\n" + rank_table(ranking)
    raise ValidationError(f"unknown output format {fmt!r}")
