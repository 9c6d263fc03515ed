"""Text serialization helpers.

All floating-point values cross the text boundary as 17-significant-digit
decimals, which round-trips IEEE binary64 exactly. CSV files use comma
separators, a single header line, and "\n" line endings so output bodies are
byte-comparable across platforms and runs.
"""

from __future__ import annotations

import json
import math
from typing import Iterable, Sequence

from .errors import ParseError


def format_float(value: float) -> str:
    return "%.17g" % float(value)


def parse_float(token: str, path: str | None, line: int) -> float:
    """Parse one numeric token, rejecting NaN/Inf and garbage."""
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"not a number: {token!r}", path=path, line=line) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite value: {token!r}", path=path, line=line)
    return value


def csv_text(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    return "\n".join(lines) + "\n"


def write_text(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def read_csv_rows(text: str, expected_header: Sequence[str], path: str | None = None):
    """Split CSV text into token rows, enforcing the exact header.

    Yields ``(line_number, tokens)`` for each data row; line numbers are
    1-based file positions (the header is line 1).
    """
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty file", path=path, line=1)
    header = lines[0].split(",")
    if header != list(expected_header):
        raise ParseError(
            f"bad header: expected {','.join(expected_header)!r}, got {lines[0]!r}",
            path=path,
            line=1,
        )
    width = len(expected_header)
    for offset, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        tokens = line.split(",")
        if len(tokens) != width:
            raise ParseError(
                f"expected {width} fields, got {len(tokens)}", path=path, line=offset
            )
        yield offset, tokens


def dump_json(obj, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
