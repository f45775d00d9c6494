"""CSV and JSON result files with self-describing provenance headers."""

import csv
import json
from pathlib import Path
from typing import Any, Mapping, Sequence, Tuple

import numpy as np

from uav_channel_gan import __version__
from uav_channel_gan.exceptions import ConfigError

FORMATS = ("csv", "json")


def _format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _parse_value(text: str) -> Any:
    if text == "":
        return None
    if text in ("True", "False"):
        return text == "True"
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def provenance(params: Mapping[str, Any]) -> dict:
    """Header fields of every result file: package version plus the run parameters."""
    return {"version": __version__, **params}


def _to_json(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    raise TypeError(f"Cannot serialize {type(value).__name__}")


def write_csv(
    path: Path | str,
    rows: Sequence[Mapping[str, Any]],
    header: Mapping[str, Any],
    columns: Sequence[str] | None = None,
) -> Path:
    """
    Write rows as CSV preceded by "# key=value" header lines.

    Floats are written with repr, so reading the file back reproduces them exactly.

    Args:
        path: Output file
        rows: Records with identical keys
        header: Provenance fields
        columns: Column order (defaults to the keys of the first row)

    Returns:
        Path of the written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    columns = list(columns or (rows[0].keys() if rows else []))
    with open(path, "w", newline="") as f:
        for key, value in header.items():
            f.write(f"# {key}={_format_value(value)}\n")
        writer = csv.DictWriter(f, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _format_value(row.get(c)) for c in columns})
    return path


def read_csv(path: Path | str) -> Tuple[dict, list[dict]]:
    """Read a file written by write_csv; returns (header, rows) with typed values."""
    header, lines = {}, []
    with open(path, newline="") as f:
        for line in f:
            if line.startswith("# "):
                key, _, value = line[2:].rstrip("\n").partition("=")
                header[key] = _parse_value(value)
            else:
                lines.append(line)
    rows = [{k: _parse_value(v) for k, v in row.items()} for row in csv.DictReader(lines)]
    return header, rows


def write_json(path: Path | str, data: Any, header: Mapping[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump({"meta": dict(header), "data": data}, f, indent=2, default=_to_json)
        f.write("\n")
    return path


def read_json(path: Path | str) -> Tuple[dict, Any]:
    with open(path) as f:
        payload = json.load(f)
    return payload["meta"], payload["data"]


def write_table(
    out_dir: Path | str,
    name: str,
    rows: Sequence[Mapping[str, Any]],
    header: Mapping[str, Any],
    fmt: str = "csv",
) -> Path:
    """Write rows as <out_dir>/<name>.csv or .json."""
    if fmt not in FORMATS:
        raise ConfigError(f"Unknown output format '{fmt}', expected one of {FORMATS}")
    path = Path(out_dir) / f"{name}.{fmt}"
    if fmt == "csv":
        return write_csv(path, rows, header)
    return write_json(path, [dict(r) for r in rows], header)


def read_table(path: Path | str) -> Tuple[dict, list[dict]]:
    path = Path(path)
    if path.suffix == ".json":
        return read_json(path)
    return read_csv(path)
