"""Long-format bilateral records to square matrices."""

from __future__ import annotations

import csv
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .domain import LocationIndex, check_trade_matrix
from .errors import MissingValueError, NonSquareError, OverflowShockError, ValidationError

DEFAULT_COLUMNS = {"exp_id": "exp_id", "imp_id": "imp_id", "flow": "flow", "partial": "partial"}


@dataclass(frozen=True)
class LongRecord:
    origin: str
    destination: str
    flow: float
    partial: float
    group: Optional[str] = None

    def __post_init__(self):
        for name in ("origin", "destination"):
            v = getattr(self, name)
            if v is None or str(v).strip() == "":
                raise MissingValueError(f"missing {name}")
            object.__setattr__(self, name, str(v))
        for name in ("flow", "partial"):
            v = getattr(self, name)
            if v is None or (isinstance(v, str) and v.strip() == ""):
                raise MissingValueError(f"missing {name} for {self.origin}->{self.destination}")
            try:
                v = float(v)
            except ValueError:
                raise ValidationError(f"non-numeric {name} {v!r}") from None
            if math.isnan(v):
                raise MissingValueError(f"missing {name} for {self.origin}->{self.destination}")
            object.__setattr__(self, name, v)
        if self.flow < 0:
            raise ValidationError(f"negative flow for {self.origin}->{self.destination}")
        if self.group is not None:
            object.__setattr__(self, "group", str(self.group))


@dataclass(frozen=True)
class PanelSlice:
    index: LocationIndex
    X: np.ndarray
    partial: np.ndarray
    group: Optional[str] = None

    @property
    def n(self) -> int:
        return len(self.index)


def parse_long_format(rows: Iterable[LongRecord], check_marginals: bool = False) -> PanelSlice:
    rows = list(rows)
    groups = {r.group for r in rows}
    if len(groups) > 1:
        raise ValidationError(f"rows span several groups: {sorted(map(str, groups))}")
    group = groups.pop() if groups else None
    exporters = {r.origin for r in rows}
    importers = {r.destination for r in rows}
    if exporters != importers:
        raise NonSquareError(
            f"exporter and importer sets differ (only exporting: {sorted(exporters - importers)}, "
            f"only importing: {sorted(importers - exporters)})")
    index = LocationIndex.from_unsorted(exporters)
    n = len(index)
    if len(rows) != n * n:
        raise NonSquareError(f"{len(rows)} records for {n} locations, expected {n * n}")
    pos = {lab: k for k, lab in enumerate(index.labels)}
    X = np.full((n, n), np.nan)
    partial = np.full((n, n), np.nan)
    for r in rows:
        i, j = pos[r.origin], pos[r.destination]
        if not np.isnan(X[i, j]):
            raise NonSquareError(f"duplicate pair {r.origin}->{r.destination}")
        X[i, j] = r.flow
        partial[i, j] = r.partial
    if check_marginals:
        check_trade_matrix(X)
    X.setflags(write=False)
    partial.setflags(write=False)
    return PanelSlice(index, X, partial, group)


def to_long_format(s: PanelSlice) -> list[LongRecord]:
    labs = s.index.labels
    return [LongRecord(labs[i], labs[j], s.X[i, j], s.partial[i, j], s.group)
            for i in range(s.n) for j in range(s.n)]


def shock_from_partial(partial) -> np.ndarray:
    """Exponentiate log partial effects into the multiplicative shock matrix."""
    partial = np.asarray(partial, dtype=float)
    if not np.all(np.isfinite(partial)):
        raise ValidationError("partial effects must be finite")
    with np.errstate(over="ignore"):
        B = np.exp(partial)
    if not np.all(np.isfinite(B)) or np.any(B == 0):
        raise OverflowShockError("partial effect too large in magnitude to exponentiate")
    return B


def _group_key(g: str):
    # numeric group labels (years) sort numerically
    try:
        return (0, float(g), g)
    except ValueError:
        return (1, 0.0, g)


def split_groups(rows: Iterable[LongRecord], strict: bool = True):
    """Split rows into one slice per group value, ordered by group.

    With ``strict=False`` a failing group does not abort the others: the
    result is a list of ``(group, slice_or_exception)`` pairs.
    """
    rows = list(rows)
    has_group = {r.group is not None for r in rows}
    if len(has_group) > 1:
        raise ValidationError("group value present on some rows but not others")
    buckets: dict = defaultdict(list)
    for r in rows:
        buckets[r.group].append(r)
    keys = sorted(buckets, key=lambda g: _group_key(g) if g is not None else (-1, 0.0, ""))
    out = []
    for g in keys:
        try:
            out.append((g, parse_long_format(buckets[g])))
        except ValidationError as exc:
            if strict:
                raise
            out.append((g, exc))
    return [s for _, s in out] if strict else out


def read_long_csv(path, columns: dict | None = None, by: str | None = None,
                  where: dict | None = None):
    """Read records from a CSV file.

    Returns ``(records, raw_rows, fieldnames)`` where ``raw_rows`` holds every
    input row as a dict (so outputs can be attached in input order) and
    ``records[k]`` is the parsed record for ``raw_rows[k]``, or None when the
    row is excluded by ``where``.
    """
    cols = dict(DEFAULT_COLUMNS)
    cols.update(columns or {})
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        fieldnames = list(reader.fieldnames or [])
        needed = [cols["exp_id"], cols["imp_id"], cols["flow"], cols["partial"]]
        needed += [by] if by else []
        needed += list(where or {})
        missing = [c for c in needed if c not in fieldnames]
        if missing:
            raise ValidationError(f"missing columns in {path}: {missing}")
        raw = list(reader)
    records = []
    for line, row in enumerate(raw, start=2):
        if where and any(row[k] != v for k, v in where.items()):
            records.append(None)
            continue
        try:
            records.append(LongRecord(
                row[cols["exp_id"]], row[cols["imp_id"]], row[cols["flow"]],
                row[cols["partial"]], row[by] if by else None))
        except ValidationError as exc:
            raise type(exc)(f"line {line}: {exc}") from None
    return records, raw, fieldnames


def read_vector_csv(path, index: LocationIndex, name: str = "value") -> np.ndarray:
    """Read a ``location,value`` file; locations not listed default to 1."""
    v = np.ones(len(index))
    pos = {lab: k for k, lab in enumerate(index.labels)}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#"):
                continue
            if len(row) < 2:
                raise ValidationError(f"{path}: expected 'location,value', got {row}")
            lab, val = row[0].strip(), row[1].strip()
            try:
                x = float(val)
            except ValueError:
                if lab.lower() in ("location", "label", "iso", "id"):
                    continue  # header line
                raise ValidationError(f"{path}: non-numeric {name} {val!r}") from None
            if lab in pos:
                v[pos[lab]] = x
    return v
