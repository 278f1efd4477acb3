"""Chain files (JSON) and report files (CSV or JSON)."""
from __future__ import annotations

import csv
import io
import json
from importlib import resources
from pathlib import Path

from .chain import CYCLIC, FINITE, ChainSpec, validate_matrix
from .errors import ParseError, ValidationError

CSV_HEADER = ("chain", "method", "m", "n", "value")
CORPUS = ("p2", "c3", "witness3", "cyclic_pair", "instant")


def chain_from_dict(doc: dict, default_name: str = "") -> ChainSpec:
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    name = doc.get("name", default_name)
    if not isinstance(name, str):
        raise ParseError("name must be a string", field="name")
    if "matrix" in doc and "matrices" in doc:
        raise ParseError("give either 'matrix' or 'matrices', not both")
    if "matrix" in doc:
        try:
            return ChainSpec.homogeneous(doc["matrix"], name)
        except (ValidationError, TypeError, ValueError) as err:
            raise ParseError(str(err), field="matrix") from err
    if "matrices" not in doc:
        raise ParseError("missing 'matrix' or 'matrices'")
    if "schedule" not in doc:
        raise ParseError("time-varying chain needs a schedule", field="schedule")
    schedule = doc["schedule"]
    if schedule not in (CYCLIC, FINITE):
        raise ParseError(f"schedule must be 'cyclic' or 'finite', got {schedule!r}", field="schedule")
    mats = doc["matrices"]
    if not isinstance(mats, list) or not mats:
        raise ParseError("must be a non-empty list", field="matrices")
    validated = []
    for k, raw in enumerate(mats):
        try:
            validated.append(validate_matrix(raw))
        except (ValidationError, TypeError, ValueError) as err:
            raise ParseError(str(err), field=f"matrices[{k}]") from err
    try:
        return ChainSpec(tuple(validated), schedule, name)
    except ValidationError as err:
        raise ParseError(str(err), field="matrices") from err


def parse_chain_text(text: str, default_name: str = "") -> ChainSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, line=err.lineno) from err
    return chain_from_dict(doc, default_name)


def parse_chain_file(path) -> ChainSpec:
    path = Path(path)
    return parse_chain_text(path.read_text(), default_name=path.stem)


def load_corpus() -> dict:
    """The bundled chains, keyed by name."""
    base = resources.files("chainrate") / "data"
    return {name: parse_chain_text((base / f"{name}.json").read_text(), name) for name in CORPUS}


def _fmt(value: float) -> str:
    return format(value, ".17g")


def report_csv(report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in report.rows:
        writer.writerow((report.chain, row.method, "" if row.m is None else row.m, row.n, _fmt(row.value)))
    return buf.getvalue()


def report_json(report) -> str:
    return json.dumps(report.to_dict(), indent=2) + "\n"


def emit_report(report, fmt: str, path=None) -> str:
    """Serialize `report`; write it to `path` when given and return the text."""
    if fmt == "csv":
        text = report_csv(report)
    elif fmt == "json":
        text = report_json(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv_rows(text: str) -> list:
    """Parse report CSV back into ``(chain, method, m, n, value)`` tuples."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_HEADER:
        raise ParseError(f"unexpected header {header!r}", line=1)
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        try:
            chain, method, m, n, value = rec
            rows.append((chain, method, int(m) if m else None, int(n), float(value)))
        except ValueError as err:
            raise ParseError(str(err), line=lineno) from err
    return rows


def load_report(path):
    from .report import RateReport

    text = Path(path).read_text()
    try:
        return RateReport.from_dict(json.loads(text))
    except json.JSONDecodeError as err:
        raise ParseError(err.msg, line=err.lineno) from err
