"""Deterministic CSV formatting shared by every sweep exporter.

Floats are written as ``%.12e`` with a two-digit exponent so that any
client holding the same IEEE-754 double (for instance after a JSON round
trip) can reproduce the file byte for byte.
"""

from __future__ import annotations

__all__ = ["fmt_float", "fmt_value", "render_csv"]


def fmt_float(x) -> str:
    return f"{float(x):.12e}"


def fmt_value(x) -> str:
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, str):
        return x
    return fmt_float(x)


def render_csv(header, rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt_value(x) for x in row))
    return "\n".join(lines) + "\n"
