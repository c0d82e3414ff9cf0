"""Deterministic CSV/JSON artifact writing.

Floats are printed with 13 significant digits in scientific notation, line
endings are LF, and JSON keys are sorted, so identical inputs always produce
byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np


def format_float(x) -> str:
    return f"{float(x):.12e}"


def csv_text(header, columns) -> str:
    """Render named columns to CSV text.

    ``header`` is a list of column names; ``columns`` the matching list of
    equal-length sequences.  Numeric cells go through format_float; strings
    pass through untouched.
    """
    if len(header) != len(columns):
        raise ValueError(f"{len(header)} names for {len(columns)} columns")
    lengths = {len(c) for c in columns}
    if len(lengths) > 1:
        raise ValueError(f"column lengths differ: {sorted(lengths)}")
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(
            cell if isinstance(cell, str) else format_float(cell) for cell in row))
    return "\n".join(lines) + "\n"


def write_csv(path, header, columns) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(csv_text(header, columns))


def _plain(value):
    """Recursively convert numpy scalars/arrays so json can serialize them."""
    if isinstance(value, dict):
        return {key: _plain(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, (complex, np.complexfloating)):
        return {"im": value.imag, "re": value.real}
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    return value


def json_text(payload) -> str:
    return json.dumps(_plain(payload), indent=2, sort_keys=True) + "\n"


def write_json(path, payload) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(json_text(payload))
