"""Deterministic CSV and JSON rendering of experiment records.

Floats are written with 12 significant digits, exact rationals as ``p/q``
strings in JSON (decimal in CSV), and wall times are never written.
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction

import numpy as np

from .core import NType, Pmf

CSV_HEADER = ("law", "n", "j", "epsilon", "tau", "value", "reference", "abs_error")


def fmt_float(x) -> str:
    return format(float(x), ".12g")


def csv_cell(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return fmt_float(x)


def jsonable(x):
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(fmt_float(x))
    if isinstance(x, NType):
        return list(x.counts)
    if isinstance(x, Pmf):
        return [jsonable(p) for p in x.probs]
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    return str(x)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow([r.law, r.n, r.j] + [csv_cell(v) for v in (r.epsilon, r.tau, r.value, r.reference, r.abs_error)])
    return buf.getvalue()


def record_dict(r) -> dict:
    return {
        "law": r.law, "n": r.n, "j": r.j, "epsilon": jsonable(r.epsilon), "tau": jsonable(r.tau),
        "value": jsonable(r.value), "reference": jsonable(r.reference), "abs_error": jsonable(r.abs_error),
        "detail": jsonable(r.detail),
    }


def records_to_json(records, extra=None) -> str:
    doc = {"records": [record_dict(r) for r in records]}
    if extra:
        doc.update(jsonable(extra))
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def render(records, fmt="csv", extra=None) -> str:
    return records_to_json(records, extra) if fmt == "json" else records_to_csv(records)
