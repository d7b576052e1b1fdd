"""Report files of a verification run.

``csv``  -> ``summary.csv`` plus ``checks/<name>.csv``
``json`` -> ``meta.json``
``xml``  -> ``report.xml``, validated against ``config_rules/report_schema.xsd``

Reals are written with 17 significant digits and nothing host- or
time-dependent enters a file, so equal runs give equal bytes.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Union

import numpy as np
from lxml import etree

from ..config import resolve_path
from ..models import CheckResult, DecayFit, VerificationReport
from ..validator import XMLValidationError, validate_xml

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SUMMARY_COLUMNS = ("check", "tier", "status", "metric", "value", "fit_C", "fit_q")
FORMATS = ("csv", "json", "xml")
DEFAULT_FORMATS = ("csv", "json")
DEFAULT_SCHEMA_PATH = "config_rules/report_schema.xsd"
REAL_FORMAT = ".17g"
_NON_FINITE = {"nan": math.nan, "inf": math.inf, "-inf": -math.inf}


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), REAL_FORMAT)
    return str(value)


def _summary_rows(report: VerificationReport) -> Iterable[List[str]]:
    for check in report.checks:
        fit_C = format_value(check.fit.C) if check.fit else ""
        fit_q = format_value(check.fit.q) if check.fit else ""
        head = [check.name, check.tier, check.status]
        if not check.measured:
            yield head + ["", "", fit_C, fit_q]
        for metric, value in check.measured.items():
            yield head + [metric, format_value(value), fit_C, fit_q]


def _detail_table(check: CheckResult) -> List[List[str]]:
    if not check.detail:
        rows = [["metric", "value"]]
        rows.extend([metric, format_value(v)] for metric, v in check.measured.items())
        return rows
    columns: List[str] = []
    for row in check.detail:
        columns.extend(key for key in row if key not in columns)
    table = [columns]
    table.extend([format_value(row.get(c)) for c in columns] for row in check.detail)
    return table


def _write_csv(path: Path, rows: Iterable[List[str]]) -> None:
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerows(rows)


def write_csv_report(report: VerificationReport, out_dir: Path) -> List[Path]:
    summary = out_dir / "summary.csv"
    _write_csv(summary, [list(SUMMARY_COLUMNS), *_summary_rows(report)])
    written = [summary]
    checks_dir = out_dir / "checks"
    checks_dir.mkdir(parents=True, exist_ok=True)
    for check in report.checks:
        path = checks_dir / f"{check.name}.csv"
        _write_csv(path, _detail_table(check))
        written.append(path)
    return written


def _json_ready(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_ready(v) for v in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return format_value(value)
    return value


def _fit_record(fit: Optional[DecayFit]) -> Optional[Dict[str, float]]:
    if fit is None:
        return None
    return {"C": fit.C, "q": fit.q, "residual": fit.residual}


def report_to_dict(report: VerificationReport) -> Dict[str, Any]:
    return _json_ready({
        "schema_version": SCHEMA_VERSION,
        "experiment_id": report.experiment_id,
        "environment": report.environment,
        "checks": [
            {
                "name": c.name,
                "tier": c.tier,
                "passed": c.passed,
                "status": c.status,
                "measured": c.measured,
                "fit": _fit_record(c.fit),
                "detail": c.detail,
            }
            for c in report.checks
        ],
    })


def write_json_report(report: VerificationReport, out_dir: Path) -> List[Path]:
    path = out_dir / "meta.json"
    text = json.dumps(report_to_dict(report), indent=2, ensure_ascii=False)
    path.write_text(text + "\n", encoding="utf-8")
    return [path]


def _restore(value: Any) -> Any:
    if isinstance(value, str) and value in _NON_FINITE:
        return _NON_FINITE[value]
    return value


def report_from_dict(data: Dict[str, Any]) -> VerificationReport:
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"Unsupported report schema version {version!r}")
    checks = []
    for item in data.get("checks", []):
        fit = item.get("fit")
        checks.append(
            CheckResult(
                name=item["name"],
                tier=item["tier"],
                passed=item.get("passed"),
                measured={k: _restore(v) for k, v in item.get("measured", {}).items()},
                fit=DecayFit(fit["C"], fit["q"], fit["residual"]) if fit else None,
                detail=[{k: _restore(v) for k, v in row.items()} for row in item.get("detail", [])],
            )
        )
    return VerificationReport(data["experiment_id"], data.get("environment", {}), checks)


def load_report(meta_path: Union[str, Path]) -> VerificationReport:
    """Rebuild a report from its ``meta.json``."""
    with Path(meta_path).open("r", encoding="utf-8") as f:
        return report_from_dict(json.load(f))


def report_to_xml(report: VerificationReport) -> str:
    root = etree.Element(
        "report",
        schemaVersion=str(SCHEMA_VERSION),
        experimentId=report.experiment_id,
    )
    env = etree.SubElement(root, "environment")
    for key, value in report.environment.items():
        text = " ".join(format_value(v) for v in value) if isinstance(value, (list, tuple)) else format_value(value)
        etree.SubElement(env, "param", name=str(key), value=text)
    checks = etree.SubElement(root, "checks")
    for c in report.checks:
        node = etree.SubElement(checks, "check", name=c.name, tier=c.tier, status=c.status)
        for metric, value in c.measured.items():
            etree.SubElement(node, "metric", name=metric, value=format_value(value))
        if c.fit is not None:
            etree.SubElement(
                node, "fit",
                C=format_value(c.fit.C), q=format_value(c.fit.q),
                residual=format_value(c.fit.residual),
            )
    return etree.tostring(root, pretty_print=True, xml_declaration=True, encoding="UTF-8").decode("utf-8")


def write_xml_report(
    report: VerificationReport, out_dir: Path, schema_path: Optional[str] = None
) -> List[Path]:
    xml_string = report_to_xml(report)
    xsd = resolve_path(schema_path or DEFAULT_SCHEMA_PATH)
    is_valid, errors = validate_xml(xml_string, str(xsd))
    if not is_valid:
        logger.error("report.xml FAILED validation: %s", errors)
        raise XMLValidationError("; ".join(errors))
    path = out_dir / "report.xml"
    path.write_text(xml_string, encoding="utf-8")
    return [path]


def emit_report(
    report: VerificationReport,
    fmt: str,
    out_dir: Union[str, Path],
    schema_path: Optional[str] = None,
) -> List[Path]:
    """Write the report files of one format; returns the written paths."""
    if fmt not in FORMATS:
        raise ValueError(f"Unknown report format '{fmt}' (expected one of {FORMATS})")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        return write_csv_report(report, out)
    if fmt == "json":
        return write_json_report(report, out)
    return write_xml_report(report, out, schema_path)


__all__ = [
    "SCHEMA_VERSION",
    "SUMMARY_COLUMNS",
    "FORMATS",
    "DEFAULT_FORMATS",
    "emit_report",
    "format_value",
    "load_report",
    "report_from_dict",
    "report_to_dict",
    "report_to_xml",
]
