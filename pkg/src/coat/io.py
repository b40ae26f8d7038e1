"""Count-table ingestion and CSV/JSON writers."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .compositional import CompositionMatrix
from .errors import DataError, ParseError

PSEUDO_COUNT = 0.5


@dataclass(frozen=True)
class CountTable:
    counts: np.ndarray
    sample_ids: tuple
    taxon_ids: tuple

    def __post_init__(self):
        counts = np.asarray(self.counts)
        n, p = counts.shape
        if len(self.sample_ids) != n or len(self.taxon_ids) != p:
            raise DataError("id sequences do not match the count matrix")
        zero_rows = np.flatnonzero(counts.sum(axis=1) == 0)
        if zero_rows.size:
            raise DataError(f"sample {self.sample_ids[zero_rows[0]]!r} has no reads")

    def subset(self, sample_ids) -> "CountTable":
        index = {s: k for k, s in enumerate(self.sample_ids)}
        missing = [s for s in sample_ids if s not in index]
        if missing:
            raise DataError(f"unknown sample id {missing[0]!r}")
        rows = [index[s] for s in sample_ids]
        return CountTable(self.counts[rows], tuple(sample_ids), self.taxon_ids)


def _delimiter(path: Path, first_line: str) -> str:
    if path.suffix.lower() in (".tsv", ".tab", ".txt"):
        return "\t"
    if path.suffix.lower() == ".csv":
        return ","
    return "\t" if "\t" in first_line else ","


def read_counts(path) -> CountTable:
    """Parse a sample x taxon integer count table (CSV or TSV).

    The header is ``sample_id`` followed by taxon names; each following row
    is a sample id followed by nonnegative integer counts.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8-sig")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise DataError(f"{path} is empty")
    rows = list(csv.reader(lines, delimiter=_delimiter(path, lines[0])))
    header = rows[0]
    if len(header) < 3:
        raise DataError("header needs a sample id column and at least two taxa")
    taxa = tuple(h.strip() for h in header[1:])
    samples, data = [], []
    for r, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"line {r}: expected {len(header)} fields, got {len(row)}", row=r)
        samples.append(row[0].strip())
        values = []
        for c, cell in enumerate(row[1:], start=2):
            try:
                v = int(cell.strip())
            except ValueError:
                raise ParseError(
                    f"line {r}, column {c} ({taxa[c - 2]}): not an integer: {cell!r}", row=r, column=c
                ) from None
            if v < 0:
                raise ParseError(f"line {r}, column {c} ({taxa[c - 2]}): negative count {v}", row=r, column=c)
            values.append(v)
        data.append(values)
    if not data:
        raise DataError(f"{path} has no samples")
    return CountTable(np.array(data, dtype=np.int64), tuple(samples), taxa)


def counts_to_composition(
    table: CountTable, min_prevalence: int = 0, pseudo: float = PSEUDO_COUNT
) -> CompositionMatrix:
    """Prevalence filter, zero replacement and closure.

    Taxa with a positive count in fewer than ``min_prevalence`` samples are
    dropped; remaining zeros become ``pseudo``; rows are divided by their sums.
    """
    if min_prevalence < 0:
        raise DataError(f"min_prevalence must be >= 0, got {min_prevalence}")
    if pseudo <= 0:
        raise DataError(f"pseudo count must be positive, got {pseudo}")
    counts = table.counts
    keep = np.count_nonzero(counts > 0, axis=0) >= min_prevalence
    if keep.sum() < 2:
        raise DataError(f"only {int(keep.sum())} taxa pass the prevalence filter")
    kept = counts[:, keep].astype(float)
    kept[kept == 0] = pseudo
    values = kept / kept.sum(axis=1, keepdims=True)
    taxa = [t for t, k in zip(table.taxon_ids, keep) if k]
    return CompositionMatrix(values, table.sample_ids, taxa)


def ingest_counts(path, min_prevalence: int = 0, pseudo: float = PSEUDO_COUNT) -> CompositionMatrix:
    return counts_to_composition(read_counts(path), min_prevalence, pseudo)


def read_groups(path) -> dict:
    """Two-column ``sample_id,group`` file -> {group: [sample ids]} in file order."""
    path = Path(path)
    lines = path.read_text(encoding="utf-8-sig").splitlines()
    rows = list(csv.reader(lines, delimiter=_delimiter(path, lines[0] if lines else "")))
    groups: dict = {}
    for r, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) < 2:
            raise ParseError(f"line {r}: expected sample_id and group", row=r)
        groups.setdefault(row[1].strip(), []).append(row[0].strip())
    return groups


def write_counts(path, counts, sample_ids, taxon_ids, delimiter: str = "\t") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, delimiter=delimiter, lineterminator="\n")
        w.writerow(["sample_id", *taxon_ids])
        for sid, row in zip(sample_ids, np.asarray(counts)):
            w.writerow([sid, *(int(v) for v in row)])


def fmt_float(v) -> str:
    """Shortest string that round-trips to the same double."""
    return repr(float(v))


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_matrix(path, matrix, labels) -> None:
    write_csv(path, labels, [list(map(float, r)) for r in np.asarray(matrix)])


def read_matrix(path) -> tuple[list, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array([[float(v) for v in r] for r in rows[1:]])


def write_json(path, doc) -> None:
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
