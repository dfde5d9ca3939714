"""File output for experiment runs.

Everything is written atomically (temp file + rename) so a crashed run
never leaves a half-written table, and identical runs produce
byte-identical files.  Floats are serialized with repr, which round-trips
and is stable across runs.
"""

from __future__ import annotations

import configparser
import io
import json
import os
from fractions import Fraction


def _fmt(x) -> str:
    if hasattr(x, "item"):  # numpy scalar
        x = x.item()
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    return str(x)


def atomic_write_text(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def atomic_write_bytes(path: str, data: bytes) -> None:
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
        fh.flush()
        os.fsync(fh.fileno())
    os.replace(tmp, path)


def write_csv(path: str, header: list[str], rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_summary(path: str, summary: dict) -> None:
    atomic_write_text(path, json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator, "value": float(obj)}
    if hasattr(obj, "item"):  # numpy scalars
        return obj.item()
    return obj


def write_plot_data(path: str, x, y, yerr) -> None:
    write_csv(path, ["x", "y", "yerr"], zip(x, y, yerr))


def echo_config(path: str, sections: dict[str, dict]) -> None:
    """Write the fully resolved run configuration as diffable INI text."""
    cp = configparser.ConfigParser()
    for name, values in sections.items():
        cp[name] = {k: _fmt(v) for k, v in values.items() if v is not None}
    buf = io.StringIO()
    cp.write(buf)
    atomic_write_text(path, buf.getvalue())


def read_config(path: str) -> dict[str, dict[str, str]]:
    """Parse an INI config; raises ValueError with line diagnostics."""
    cp = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ValueError(f"config error in {path}: {exc}") from exc
    return {s: dict(cp[s]) for s in cp.sections()}
