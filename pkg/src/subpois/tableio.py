"""Table serialization: full-precision CSV and JSON, with an exact reader.

Floats are written as 17-significant-digit scientific notation, which
round-trips every IEEE double exactly; re-reading an emitted table must
reproduce the values bit for bit.
"""

from __future__ import annotations

import csv
import io
import json


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17e}"
    if value is None:
        return ""
    return str(value)


def _parse_value(text: str):
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def render_table(columns: list[str], rows: list[dict], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(c)) for c in columns])
        return buf.getvalue()
    if fmt == "json":
        return json.dumps({"columns": columns, "rows": rows}, indent=2) + "\n"
    raise ValueError(f"unknown table format {fmt!r}")


def parse_table(text: str) -> tuple[list[str], list[dict]]:
    """Re-read an emitted table (CSV or JSON) with exact float recovery."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        payload = json.loads(text)
        return payload["columns"], payload["rows"]
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = [dict(zip(header, (_parse_value(cell) for cell in line))) for line in reader if line]
    return header, rows


def render_paths_jsonl(paths: list[dict]) -> str:
    return "".join(json.dumps(p) + "\n" for p in paths)


def parse_paths_jsonl(text: str) -> list[dict]:
    return [json.loads(line) for line in text.splitlines() if line.strip()]
