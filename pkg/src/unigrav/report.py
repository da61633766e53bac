"""Percent-change results table."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .domain import LocationIndex, Solution
from .errors import NoInternationalTradeError

COLUMNS = ("Exports", "Imports", "IntlTrade", "Domestic", "Output", "Welfare")
TITLE = "Results for the prototypical trade model (percent changes)"


@dataclass(frozen=True)
class ResultsTable:
    labels: LocationIndex | tuple  # a bare tuple allows tables of presentation-only rows
    columns: np.ndarray  # N x 6, percentage points; Welfare is NaN when undefined
    welfare_defined: bool = True

    def __post_init__(self):
        cols = np.asarray(self.columns, dtype=float)
        if cols.ndim != 2 or cols.shape != (len(self.row_labels), len(COLUMNS)):
            raise ValueError(f"columns must be {len(self.row_labels)} x {len(COLUMNS)}")

    @property
    def row_labels(self) -> tuple:
        if isinstance(self.labels, LocationIndex):
            return self.labels.labels
        return tuple(str(x) for x in self.labels)


def growth_table(X, X_hat, sol: Solution, Q_hat, W_hat: Optional[np.ndarray],
                 labels: LocationIndex | None = None) -> ResultsTable:
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    off = ~np.eye(n, dtype=bool)
    Xo = np.where(off, X, 0.0)
    Xpo = np.where(off, np.asarray(X_hat) * X, 0.0)
    exp0, imp0 = Xo.sum(axis=1), Xo.sum(axis=0)
    if np.any(exp0 <= 0) or np.any(imp0 <= 0):
        bad = np.flatnonzero((exp0 <= 0) | (imp0 <= 0)).tolist()
        raise NoInternationalTradeError(f"no international exports or imports at positions {bad}")

    g_exp = 100 * (Xpo.sum(axis=1) / exp0 / sol.p_hat - 1)
    g_imp = 100 * (Xpo.sum(axis=0) / imp0 / sol.P_hat - 1)
    g_intl = (g_exp * exp0 + g_imp * imp0) / (exp0 + imp0)
    g_dom = 100 * (np.diag(X_hat) / sol.P_hat - 1)
    g_q = 100 * (np.asarray(Q_hat) - 1)
    g_w = np.full(n, np.nan) if W_hat is None else 100 * (np.asarray(W_hat) - 1)

    if labels is None:
        labels = LocationIndex(tuple(f"{i + 1:0{len(str(n))}d}" for i in range(n)))
    cols = np.column_stack([g_exp, g_imp, g_intl, g_dom, g_q, g_w])
    cols.setflags(write=False)
    return ResultsTable(labels, cols, welfare_defined=W_hat is not None)


def _fmt(v: float) -> str:
    if np.isnan(v):
        return f"{'.':>10}"
    # adding 0.0 turns a rounded -0.0 into 0.0
    return f"{round(float(v), 3) + 0.0:10.3f}"


def render_table(t: ResultsTable) -> str:
    header = " ".join(f"{c:>10}" for c in COLUMNS) + " "
    lw = max([13] + [len(x) + 1 for x in t.row_labels]) + 1
    rule = "+" + "-" * lw + "+" + "-" * len(header) + "+"
    lines = [f"{TITLE:^{len(rule)}}".rstrip(), "", rule, f"|{'':{lw}}|{header}|", rule]
    for lab, row in zip(t.row_labels, t.columns):
        lines.append(f"|{lab:>{lw - 1}} |{' '.join(_fmt(v) for v in row)} |")
    lines.append(rule)
    return "\n".join(lines) + "\n"


def table_to_csv(t: ResultsTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("location",) + COLUMNS)
    for lab, row in zip(t.row_labels, t.columns):
        w.writerow([lab] + ["" if np.isnan(v) else repr(float(v)) for v in row])
    return buf.getvalue()
