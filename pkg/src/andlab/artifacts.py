"""Deterministic artifact serialization.

Every experiment emits the same two artifacts: a CSV table of rows and a
JSON summary.  Byte-for-byte reproducibility is a hard requirement, so
floats are rendered with ``repr`` (shortest round-trip form), JSON keys
are sorted, and nothing time- or host-dependent is ever written.  Each
CSV starts with comment lines carrying the schema version, the tool
version, and the resolved configuration, so any artifact is a complete
record of what produced it; readers skip lines starting with ``#``.
"""

from __future__ import annotations

import json
from pathlib import Path

SCHEMA_VERSION = 1


def format_cell(value) -> str:
    """Render one CSV cell deterministically."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def csv_text(
    name: str,
    columns: list[str],
    rows: list[list],
    version: str | None = None,
    config: dict | None = None,
) -> str:
    lines = [f"# schema: andlab/{name} v{SCHEMA_VERSION}"]
    if version is not None:
        lines.append(f"# tool: andlab {version}")
    if config is not None:
        lines.append("# config: " + json.dumps(config, sort_keys=True, separators=(",", ":")))
    lines.append(",".join(columns))
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(
                f"row width {len(row)} does not match {len(columns)} columns in {name}"
            )
        lines.append(",".join(format_cell(v) for v in row))
    return "\n".join(lines) + "\n"


def json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_result(
    out_dir: str | Path,
    name: str,
    columns: list[str],
    rows: list[list],
    summary: dict,
    extras: dict[str, str] | None = None,
    formats: tuple[str, ...] = ("csv", "json"),
) -> list[Path]:
    """Write the artifact set for one experiment; returns written paths.

    The CSV header embeds the tool version and config echo found under
    the summary's ``version`` and ``config`` keys.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if "csv" in formats:
        path = out / f"{name}.csv"
        path.write_text(
            csv_text(name, columns, rows, summary.get("version"), summary.get("config"))
        )
        written.append(path)
    if "json" in formats:
        path = out / f"{name}.summary.json"
        path.write_text(json_text(summary))
        written.append(path)
    for filename, content in (extras or {}).items():
        path = out / filename
        path.write_text(content)
        written.append(path)
    return written
