"""Fixed-width and delimited report tables.

Both renderings are built from the same formatted cell strings, so the
table and the TSV carry identical numbers.
"""

from __future__ import annotations

import json
import math
from decimal import ROUND_HALF_EVEN, Decimal


def round_half_even(x: float, places: int) -> str:
    if x is None:
        return "-"
    if math.isinf(x) or math.isnan(x):
        return str(x)
    q = Decimal(1).scaleb(-places)
    return str(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_EVEN))


def fmt_wer(x):
    return round_half_even(x, 2)


def fmt_ratio(x):
    return round_half_even(x, 3)


SCORE_COLUMNS = [
    ("system", "System", "<"),
    ("recording", "Recording", "<"),
    ("wer", "WER", ">"),
    ("precision", "Precision", ">"),
    ("recall", "Recall", ">"),
    ("correct", "#C", ">"),
    ("substituted", "#S", ">"),
    ("deleted", "#D", ">"),
    ("inserted", "#I", ">"),
]

CURVE_COLUMNS = [
    ("system", "System", "<"),
    ("level", "Level", "<"),
    ("wer", "WER", ">"),
    ("n", "N", ">"),
    ("n_max", "N_max", ">"),
    ("n_90", "N_.9", ">"),
    ("n_50", "N_.5", ">"),
    ("bytes", "Bytes", ">"),
]


def metrics_row(system, recording, m) -> dict:
    return {
        "system": system,
        "recording": recording,
        "wer": fmt_wer(m.wer),
        "precision": fmt_ratio(m.precision),
        "recall": fmt_ratio(m.recall),
        "correct": str(m.correct),
        "substituted": str(m.substituted),
        "deleted": str(m.deleted),
        "inserted": str(m.inserted),
    }


def curve_row(system, level, row) -> dict:
    return {
        "system": system,
        "level": level,
        "wer": fmt_wer(row.wer),
        "n": row.n_label,
        "n_max": str(row.n_max),
        "n_90": str(row.n_90),
        "n_50": str(row.n_50),
        "bytes": str(row.size_bytes),
    }


def sort_by_wer(rows):
    """Stable sort on the formatted WER column (lowest first)."""
    return sorted(rows, key=lambda r: float(r["wer"]))


def format_table(rows, columns) -> str:
    widths = [len(h) for _, h, _ in columns]
    for r in rows:
        for k, (key, _, _) in enumerate(columns):
            widths[k] = max(widths[k], len(r.get(key, "")))

    def line(cells):
        parts = []
        for (_, _, al), w, c in zip(columns, widths, cells):
            parts.append(c.ljust(w) if al == "<" else c.rjust(w))
        return "  ".join(parts).rstrip()

    out = [line([h for _, h, _ in columns]), "  ".join("-" * w for w in widths)]
    out.extend(line([r.get(key, "") for key, _, _ in columns]) for r in rows)
    return "\n".join(out) + "\n"


def format_delimited(rows, columns, sep="\t") -> str:
    out = [sep.join(key for key, _, _ in columns)]
    out.extend(sep.join(r.get(key, "") for key, _, _ in columns) for r in rows)
    return "\n".join(out) + "\n"


def parse_delimited(text: str, sep="\t") -> list:
    lines = text.splitlines()
    keys = lines[0].split(sep)
    return [dict(zip(keys, line.split(sep))) for line in lines[1:] if line]


def format_json(rows) -> str:
    return json.dumps(rows, indent=1, sort_keys=True) + "\n"
