"""JSON and CSV writers for reports, samples and sweep tables.

Every document carries ``schema`` (the format version) and ``config`` (the
parameters that produced it).  JSON is written with sorted keys and a fixed
float repr so identical inputs give byte-identical files.  CSV files start
with ``#``-prefixed lines holding the same schema tag and config echo.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict
from typing import Any, Iterable, Mapping, Optional, Sequence, TextIO

import numpy as np

from .geometry import DyadicNet, HyperboloidRegion
from .lattice import Box
from .partitions import PartitionTable, mantissa_exponent
from .sampling import GENERATOR_NAME, RandomSetSpec, SampleResult
from .semigroup import GapReport, GroupCoverage

SCHEMA_VERSION = "semigrouplab/1"

SWEEP_COLUMNS = (
    "cell", "trial", "d", "p", "seed", "extents", "model", "inner_c", "outer_C",
    "n_generators", "gap_count_semigroup", "certified", "certificate_reason",
    "gap_count_fs_in_box", "fs_shell_contained", "inner_region_size", "inner_overlap",
    "inner_overlap_fs", "outer_violations", "outer_violations_fs", "embedding_dimension",
    "minimal_inside_region", "error",
)
PARTITION_COLUMNS = ("n", "value", "digit_count", "leading_mantissa", "exponent")


class SchemaError(ValueError):
    pass


def _plain(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if math.isnan(v) else v
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def document(kind: str, config: Mapping[str, Any], body: Mapping[str, Any]) -> dict[str, Any]:
    return {"schema": SCHEMA_VERSION, "kind": kind, "config": _plain(config), **_plain(body)}


def dumps(doc: Mapping[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True) + "\n"


def write_text(text: str, path: Optional[str], stdout: TextIO) -> None:
    if path is None or path == "-":
        stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def sample_doc(res: SampleResult) -> dict[str, Any]:
    spec = res.spec
    config = {
        "dimension": spec.dimension,
        "p": spec.p,
        "seed": spec.seed,
        "extents": list(spec.box.extents),
        "include_origin": spec.include_origin,
        "generator": GENERATOR_NAME,
    }
    body = {"dimension": spec.dimension, "count": len(res), "points": res.points}
    return document("sample", config, body)


def read_sample(text: str) -> tuple[int, Box, np.ndarray]:
    """Dimension, box and points from a sample document."""
    doc = json.loads(text)
    if doc.get("schema") != SCHEMA_VERSION or doc.get("kind") != "sample":
        raise SchemaError("not a sample document of schema " + SCHEMA_VERSION)
    d = int(doc["dimension"])
    box = Box(tuple(doc["config"]["extents"]))
    pts = np.asarray(doc["points"], dtype=np.int64).reshape(-1, d)
    return d, box, pts


def gap_report_body(rep: GapReport, minimal: Optional[np.ndarray] = None) -> dict[str, Any]:
    body = asdict(rep)
    body["caveat"] = (
        None if rep.kind == "semigroup"
        else "in-box count only; subset-sum gap sets are never certified"
    )
    if rep.gaps is None:
        body.pop("gaps")
    if minimal is not None:
        body["minimal_generators"] = minimal
        body["embedding_dimension"] = len(minimal)
    return _plain(body)


def coverage_body(cov: GroupCoverage) -> dict[str, Any]:
    return {"moduli": list(cov.moduli), "covered_count": cov.covered_count, "full": cov.full}


def region_config(R: HyperboloidRegion, **extra) -> dict[str, Any]:
    return {"d": R.d, "L": R.L, "Z": R.Z, **extra}


def net_body(net: DyadicNet) -> dict[str, Any]:
    return {"net": net.kind, "size": len(net), "exponent_tuples": [list(t) for t in net.exponent_tuples]}


def _csv_text(header_lines: Sequence[str], columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow(["" if v is None else v for v in row])
    return buf.getvalue()


def csv_with_echo(kind: str, config: Mapping[str, Any], columns: Sequence[str], rows, extra=()) -> str:
    header = [
        f"schema {SCHEMA_VERSION} kind {kind}",
        "config " + json.dumps(_plain(config), sort_keys=True),
        *extra,
    ]
    return _csv_text(header, columns, rows)


def read_csv(text: str) -> tuple[list[str], list[str], list[list[str]]]:
    """Comment lines, column names and rows of a CSV written here."""
    comments, body = [], []
    for line in text.splitlines():
        (comments if line.startswith("# ") else body).append(line)
    rows = list(csv.reader(body))
    if not rows:
        raise SchemaError("empty CSV")
    return [c[2:] for c in comments], rows[0], rows[1:]


def partition_rows(table: PartitionTable):
    for n, v in enumerate(table.values):
        m, e = mantissa_exponent(v)
        yield n, v, len(str(v)), f"{m:.15f}", e


def points_csv(kind: str, config: Mapping[str, Any], pts: np.ndarray) -> str:
    d = pts.shape[1] if pts.ndim == 2 else 1
    cols = [f"x{i + 1}" for i in range(d)]
    return csv_with_echo(kind, config, cols, (list(map(int, r)) for r in np.asarray(pts).reshape(-1, d)))


def sweep_csv(table, config: Mapping[str, Any]) -> str:
    rows = []
    for ci, t, r in table.rows:
        rec = r.record()
        rec["cell"], rec["trial"] = ci, t
        rec["extents"] = "x".join(map(str, rec["extents"])) if rec["extents"] else None
        rows.append([_fmt(rec[c]) for c in SWEEP_COLUMNS])
    return csv_with_echo("sweep", config, SWEEP_COLUMNS, rows)


def _fmt(v: Any) -> Any:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def sweep_summary_doc(table, config: Mapping[str, Any], assertions=None) -> dict[str, Any]:
    body = {
        "cells": [asdict(c) for c in table.cells],
        "fits": [asdict(f) for f in table.fits],
        "trials": len(table.rows),
    }
    if assertions is not None:
        body["assertions"] = assertions
    return document("sweep_summary", config, body)


def spec_config(spec: RandomSetSpec) -> dict[str, Any]:
    return {"d": spec.dimension, "p": spec.p, "seed": spec.seed, "extents": list(spec.box.extents)}
