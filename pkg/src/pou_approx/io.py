"""Readers and writers for clouds, metrics, function families and reports."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .functions import FunctionOnM
from .metric_space import COORD_KINDS, CompactSubset, MetricError, MetricSpace


class InputError(ValueError):
    """Malformed input file; the message names the file and, where known, the line."""


def _read_json(path) -> object:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}: {exc.msg}") from None


def _read_csv_rows(path) -> list[tuple[int, list[str]]]:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
            continue
        rows.append((lineno, [c.strip() for c in row]))
    return rows


def _floats(cells, path, lineno) -> list[float]:
    try:
        return [float(c) for c in cells]
    except ValueError:
        raise InputError(f"{path}: line {lineno}: non-numeric value in {cells!r}") from None


def read_cloud_csv(path):
    """One point per row. A non-numeric first column is taken as the id; a header row is skipped."""
    rows = _read_csv_rows(path)
    if not rows:
        raise InputError(f"{path}: empty point cloud")
    first = rows[0][1]
    if not _is_number(first[-1]):
        rows = rows[1:]
    ids, coords = [], []
    with_ids = any(not _is_number(r[0]) for _, r in rows)
    for lineno, cells in rows:
        if with_ids:
            ids.append(cells[0])
            cells = cells[1:]
        coords.append(_floats(cells, path, lineno))
    dims = {len(c) for c in coords}
    if len(dims) != 1:
        raise InputError(f"{path}: rows have differing numbers of coordinates {sorted(dims)}")
    return (ids or None), np.asarray(coords, dtype=float)


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def read_cloud_json(path):
    data = _read_json(path)
    if not isinstance(data, dict) or "points" not in data:
        raise InputError(f"{path}: expected an object with a 'points' list")
    pts = data["points"]
    ids = [p.get("id", i) if isinstance(p, dict) else i for i, p in enumerate(pts)]
    coords = [p.get("coords") if isinstance(p, dict) else p for p in pts]
    if all(c is None for c in coords):
        X = None
    elif any(c is None for c in coords):
        raise InputError(f"{path}: some points have coordinates and some do not")
    else:
        try:
            X = np.asarray(coords, dtype=float).reshape(len(coords), -1)
        except ValueError:
            raise InputError(f"{path}: coordinate vectors must share one dimension") from None
    return ids, X, data.get("metric")


def read_table_csv(path) -> np.ndarray:
    rows = _read_csv_rows(path)
    table = [_floats(cells, path, lineno) for lineno, cells in rows]
    if not table or any(len(r) != len(table) for r in table):
        raise InputError(f"{path}: precomputed table must be square")
    return np.asarray(table)


def read_edges(path) -> list:
    data = _read_json(path)
    edges = data.get("edges") if isinstance(data, dict) else data
    if not isinstance(edges, list):
        raise InputError(f"{path}: expected {{'edges': [[i, j, w], ...]}}")
    for e in edges:
        if not (isinstance(e, list) and len(e) == 3):
            raise InputError(f"{path}: malformed edge {e!r}")
    return edges


def load_space(cloud: str | None = None, metric: str | dict | None = None) -> MetricSpace:
    """Assemble a :class:`MetricSpace` from CLI-style arguments.

    ``metric`` is a kind name, a path to a graph edge list (``.json``) or a
    precomputed table (``.csv``), or an inline dict as found in cloud JSON.
    """
    ids, X, inline = None, None, None
    if cloud is not None:
        if str(cloud).endswith(".json"):
            ids, X, inline = read_cloud_json(cloud)
        else:
            ids, X = read_cloud_csv(cloud)
    if metric is None:
        metric = inline or "euclidean"
    try:
        if isinstance(metric, dict):
            return _space_from_dict(metric, ids, X)
        if metric in COORD_KINDS:
            if X is None:
                raise InputError(f"metric {metric!r} needs a cloud with coordinates")
            return MetricSpace.from_coords(X, metric, ids)
        if metric == "discrete":
            if ids is None and X is None:
                raise InputError("discrete metric needs a cloud")
            n = len(ids) if ids is not None else X.shape[0]
            return MetricSpace.discrete(n=n, ids=ids, coords=X)
        path = Path(metric)
        if path.suffix == ".json":
            edges = read_edges(path)
            return MetricSpace.from_edges(edges, ids=ids, coords=X)
        if path.suffix in (".csv", ".txt"):
            return MetricSpace.from_table(read_table_csv(path), ids=ids, coords=X)
    except MetricError as exc:
        where = cloud if cloud is not None else metric
        raise InputError(f"{where}: {exc}") from None
    raise InputError(f"unrecognised metric {metric!r}")


def _space_from_dict(spec: dict, ids, X) -> MetricSpace:
    kind = spec.get("kind", "euclidean")
    if kind in COORD_KINDS:
        return MetricSpace.from_coords(X, kind, ids)
    if kind == "discrete":
        return MetricSpace.discrete(n=len(ids), ids=ids, coords=X)
    if kind in ("graph", "graph_shortest_path"):
        return MetricSpace.from_edges(spec["edges"], ids=ids, coords=X)
    if kind == "precomputed":
        return MetricSpace.from_table(spec["table"], ids=ids, coords=X)
    raise MetricError(f"unknown metric kind {kind!r}")


def load_family(path) -> list[FunctionOnM]:
    """JSON list of function specs, or ``{"family": [...]}``; a CSV gives one tabulated function per column."""
    if str(path).endswith(".csv"):
        rows = _read_csv_rows(path)
        header = None
        if rows and not all(_is_number(c) for c in rows[0][1]):
            header = rows[0][1]
            rows = rows[1:]
        cols = list(zip(*[_floats(c, path, ln) for ln, c in rows]))
        names = header or [f"column{j}" for j in range(len(cols))]
        return [FunctionOnM.tabulated(col, label=name) for col, name in zip(cols, names)]
    data = _read_json(path)
    items = data.get("family", data) if isinstance(data, dict) else data
    if isinstance(items, dict):
        items = [items]
    try:
        return [FunctionOnM.from_spec(s) for s in items]
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def load_subset(T, n: int) -> CompactSubset:
    if T is None or T == "all":
        return CompactSubset.whole(n)
    if isinstance(T, (list, tuple)):
        return CompactSubset.of(T, n)
    path = Path(T)
    if path.suffix == ".json":
        data = _read_json(path)
        idx = data.get("T", data.get("indices")) if isinstance(data, dict) else data
    else:
        idx = [int(float(c)) for _, row in _read_csv_rows(path) for c in row]
    try:
        return CompactSubset.of(idx, n)
    except (ValueError, IndexError) as exc:
        raise InputError(f"{path}: {exc}") from None


def dumps(obj) -> str:
    """Canonical JSON text: fixed key order as produced, repr floats, trailing newline."""
    return json.dumps(_plain(obj), indent=2, allow_nan=True) + "\n"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


CSV_FIELDS = ["k", "function_index", "function", "error", "bound", "bound_satisfied",
              "family_error", "family_bound", "rank", "n_centers", "max_multiplicity"]


def report_to_csv(report: dict) -> str:
    """Flatten a sweep report to one row per ``(k, function)``, sorted by ``k`` then function index."""
    sweep = report.get("sweep", report)
    names = sweep["functions"]
    rows = []
    for e in sweep["entries"]:
        for j, name in enumerate(names):
            rows.append([e["k"], j, name, repr(float(e["errors"][j])), repr(float(e["bounds"][j])),
                         e["errors"][j] <= e["bounds"][j] + 1e-12,
                         repr(float(e["family_error"])), repr(float(e["family_bound"])),
                         e["rank"], e["n_centers"], e["max_multiplicity"]])
    rows.sort(key=lambda r: (r[0], r[1]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    w.writerows(rows)
    return buf.getvalue()
