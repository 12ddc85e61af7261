"""Reading outcome and edge files.

Outcomes file: header ``id,x,d`` (the ``d`` column may be omitted), one row
per sampled unit. Edges file: header ``id_i,id_j``. Comma, tab and semicolon
delimiters are accepted.
"""
from __future__ import annotations

import csv
import hashlib
import logging
import math
from pathlib import Path

from .core import ObservedData, normalize_pair

log = logging.getLogger(__name__)


class DataFormatError(ValueError):
    """Malformed input file; carries the offending path and line."""

    def __init__(self, path, line: int | None, message: str):
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.line = line


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _rows(path):
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise DataFormatError(path, 1, "missing header")
    try:
        dialect = csv.Sniffer().sniff(lines[0], delimiters=",\t;")
        delim = dialect.delimiter
    except csv.Error:
        delim = ","
    reader = csv.reader(lines, delimiter=delim)
    header = [h.strip() for h in next(reader)]
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        yield header, lineno, [c.strip() for c in row]


def read_outcomes(path) -> tuple[list[str], list[float], list[int] | None]:
    """Return ``(ids, outcomes, degrees)``; ``degrees`` is None when absent."""
    ids: list[str] = []
    xs: list[float] = []
    ds: list[int] = []
    has_d = None
    seen = set()
    for header, lineno, row in _rows(path):
        if has_d is None:
            if header[:2] != ["id", "x"] or header[2:] not in ([], ["d"]):
                raise DataFormatError(path, 1, f"expected header id,x,d or id,x; got {','.join(header)}")
            has_d = len(header) == 3
        if len(row) != len(header):
            raise DataFormatError(path, lineno, f"expected {len(header)} fields, got {len(row)}")
        vid = row[0]
        if not vid:
            raise DataFormatError(path, lineno, "empty id")
        if vid in seen:
            raise DataFormatError(path, lineno, f"duplicate id {vid!r}")
        seen.add(vid)
        try:
            x = float(row[1])
        except ValueError:
            raise DataFormatError(path, lineno, f"outcome {row[1]!r} is not a number") from None
        if not math.isfinite(x):
            raise DataFormatError(path, lineno, f"outcome {row[1]!r} is not finite")
        if has_d:
            try:
                d = int(row[2])
            except ValueError:
                raise DataFormatError(path, lineno, f"degree {row[2]!r} is not an integer") from None
            if d < 0:
                raise DataFormatError(path, lineno, f"degree {d} is negative")
            ds.append(d)
        ids.append(vid)
        xs.append(x)
    if not ids:
        raise DataFormatError(path, None, "no data rows")
    return ids, xs, (ds if has_d else None)


def read_edges(path, ids: list[str]) -> list[tuple[int, int]]:
    """Edges as index pairs into ``ids``; duplicates are dropped with a warning."""
    index = {v: k for k, v in enumerate(ids)}
    edges: dict[tuple[int, int], int] = {}
    for header, lineno, row in _rows(path):
        if header != ["id_i", "id_j"]:
            raise DataFormatError(path, 1, f"expected header id_i,id_j; got {','.join(header)}")
        if len(row) != 2:
            raise DataFormatError(path, lineno, f"expected 2 fields, got {len(row)}")
        try:
            i, j = index[row[0]], index[row[1]]
        except KeyError as exc:
            raise DataFormatError(path, lineno, f"unknown id {exc.args[0]!r}") from None
        if i == j:
            raise DataFormatError(path, lineno, f"self-loop at {row[0]!r}")
        pair = normalize_pair(i, j)
        if pair in edges:
            log.warning("%s:%d: duplicate edge %s-%s ignored (first seen on line %d)",
                        path, lineno, row[0], row[1], edges[pair])
            continue
        edges[pair] = lineno
    return list(edges)


def load_data(outcomes_path, edges_path=None, global_degree_bound: int | None = None) -> ObservedData:
    """Read files into :class:`ObservedData`.

    A missing edges file means no edges were observed. ``global_degree_bound``
    replaces every degree; without it, absent degrees default to ``n - 1``.
    """
    ids, xs, ds = read_outcomes(outcomes_path)
    n = len(ids)
    if global_degree_bound is not None:
        if global_degree_bound < 0:
            raise ValueError("global degree bound must be nonnegative")
        ds = [int(global_degree_bound)] * n
    elif ds is None:
        log.warning("no degree column in %s; using the global bound n-1=%d for every unit "
                    "(maximally conservative)", outcomes_path, n - 1)
        ds = [n - 1] * n
    edges = read_edges(edges_path, ids) if edges_path is not None else []
    return ObservedData(xs, ds, tuple(edges), tuple(ids))


def write_outcomes(path, data: ObservedData) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "x", "d"])
        for i in range(data.n):
            w.writerow([data.label(i), repr(float(data.outcomes[i])), int(data.degrees[i])])


def write_edges(path, data: ObservedData) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["id_i", "id_j"])
        for i, j in data.observed_edges:
            w.writerow([data.label(i), data.label(j)])
