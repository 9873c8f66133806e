"""Deterministic JSON emission for reports and certificates.

Floats are printed with 17 significant digits (round-trip exact for
doubles), keys keep their construction order, complex values appear as
[re, im] pairs.  Byte-identical output for identical inputs is part of the
CLI contract.
"""

from __future__ import annotations

import json


def _fmt_float(x: float) -> str:
    if x != x:  # NaN
        return "null"
    if x in (float("inf"), float("-inf")):
        return "null"
    if x == int(x) and abs(x) < 1e16:
        # keep a decimal point so the value round-trips as a float
        return f"{x:.1f}"
    return format(x, ".17g")


def dumps(obj, indent: int = 2) -> str:
    """Canonical JSON text with fixed float formatting."""

    def emit(node, depth: int) -> str:
        pad = " " * (indent * depth)
        pad_in = " " * (indent * (depth + 1))
        if node is None:
            return "null"
        if isinstance(node, bool):
            return "true" if node else "false"
        if isinstance(node, int):
            return str(node)
        if isinstance(node, float):
            return _fmt_float(node)
        if isinstance(node, complex):
            return emit([node.real, node.imag], depth)
        if isinstance(node, str):
            return json.dumps(node)
        if isinstance(node, dict):
            if not node:
                return "{}"
            items = ",\n".join(
                f"{pad_in}{json.dumps(str(k))}: {emit(v, depth + 1)}"
                for k, v in node.items()
            )
            return "{\n" + items + "\n" + pad + "}"
        if isinstance(node, (list, tuple)):
            if not node:
                return "[]"
            items = ",\n".join(f"{pad_in}{emit(v, depth + 1)}" for v in node)
            return "[\n" + items + "\n" + pad + "]"
        if hasattr(node, "to_json_dict"):
            return emit(node.to_json_dict(), depth)
        raise TypeError(f"cannot serialize {type(node)!r}")

    return emit(obj, 0) + "\n"
