import csv
import io

import numpy as np
import pytest

from conftest import random_instance
from unigrav import LocationIndex, Mode, ShiftVectors, Solution, compute_statics, growth_table, render_table, solve
from unigrav.errors import NoInternationalTradeError
from unigrav.report import COLUMNS, TITLE, ResultsTable, table_to_csv


def _unit_solution(n):
    return Solution(np.ones(n), np.ones(n), 1.0, np.ones(n), 1, 0.0, True, Mode.DEFAULT)


def _rows(text):
    return [" ".join(line.replace("|", " ").split()) for line in text.splitlines() if line.startswith("| ")]


def test_identity_table_is_zero():
    X = np.array([[3.0, 1.0, 2.0], [2.0, 7.0, 1.0], [1.0, 1.0, 5.0]])
    t = growth_table(X, np.ones((3, 3)), _unit_solution(3), np.ones(3), np.ones(3))
    np.testing.assert_array_equal(t.columns, 0)
    assert t.columns.shape == (3, 6)


def test_render_reference_row():
    t = ResultsTable(("ARG",), np.array([[0.066, -0.312, -0.020, -0.012, -0.002, -0.021]]))
    assert "ARG 0.066 -0.312 -0.020 -0.012 -0.002 -0.021" in _rows(render_table(t))


def test_render_layout():
    t = ResultsTable(LocationIndex(("CAN", "USA")), np.zeros((2, 6)))
    text = render_table(t)
    lines = text.splitlines()
    assert lines[0].strip() == TITLE
    assert all(c in text for c in COLUMNS)
    widths = {len(line) for line in lines[2:]}
    assert len(widths) == 1
    assert _rows(text)[1:] == ["CAN " + " ".join(["0.000"] * 6), "USA " + " ".join(["0.000"] * 6)]


def test_render_negative_zero():
    t = ResultsTable(LocationIndex(("A", "B")), np.array([[-1e-9] * 6, [0.0005] * 6]))
    rows = _rows(render_table(t))
    assert rows[1] == "A " + " ".join(["0.000"] * 6)
    np.testing.assert_array_equal(t.columns[0], -1e-9)


def test_render_welfare_placeholder():
    cols = np.zeros((2, 6))
    cols[:, 5] = np.nan
    t = ResultsTable(LocationIndex(("A", "B")), cols, welfare_defined=False)
    for row in _rows(render_table(t))[1:]:
        assert row.endswith("0.000 .")


def test_explicit_c_table_has_no_welfare(rng):
    X, B, el = random_instance(rng, n=4)
    sv = ShiftVectors.build(4, c_hat=[1.05, 1.0, 1.0, 0.97])
    sol = solve(X, B, el, sv)
    s = compute_statics(X, B, el, sv, sol)
    t = growth_table(X, s.X_hat, sol, s.Q_hat, s.W_hat)
    assert not t.welfare_defined
    assert np.isnan(t.columns[:, 5]).all() and np.isfinite(t.columns[:, :5]).all()


def test_intl_is_convex_combination(rng):
    for _ in range(20):
        X, B, el = random_instance(rng)
        sv = ShiftVectors.ones(len(X))
        sol = solve(X, B, el, sv)
        s = compute_statics(X, B, el, sv, sol)
        c = growth_table(X, s.X_hat, sol, s.Q_hat, s.W_hat).columns
        lo, hi = np.minimum(c[:, 0], c[:, 1]), np.maximum(c[:, 0], c[:, 1])
        assert np.all(c[:, 2] >= lo - 1e-12) and np.all(c[:, 2] <= hi + 1e-12)


def test_hand_computed_columns():
    X = np.array([[4.0, 1.0, 3.0], [2.0, 6.0, 2.0], [1.0, 1.0, 8.0]])
    X_hat = np.array([[0.9, 1.2, 1.1], [1.3, 1.0, 0.8], [1.05, 0.7, 0.95]])
    p = np.array([1.1, 0.9, 1.0])
    P = np.array([1.02, 0.98, 1.01])
    sol = Solution(p, P, 1.0, np.ones(3), 5, 0.0, True, Mode.DEFAULT)
    Q = np.array([1.01, 0.99, 1.0])
    W = np.array([1.03, 0.97, 1.02])
    c = growth_table(X, X_hat, sol, Q, W).columns
    exp0 = (1.0 * 1.2 + 3.0 * 1.1) / 4.0
    imp0 = (2.0 * 1.3 + 1.0 * 1.05) / 3.0
    assert c[0, 0] == pytest.approx(100 * (exp0 / 1.1 - 1), rel=1e-13)
    assert c[0, 1] == pytest.approx(100 * (imp0 / 1.02 - 1), rel=1e-13)
    assert c[0, 2] == pytest.approx((c[0, 0] * 4 + c[0, 1] * 3) / 7, rel=1e-13)
    assert c[0, 3] == pytest.approx(100 * (0.9 / 1.02 - 1), rel=1e-13)
    np.testing.assert_allclose(c[:, 4], 100 * (Q - 1), rtol=1e-13)
    np.testing.assert_allclose(c[:, 5], 100 * (W - 1), rtol=1e-13)


def test_no_international_trade():
    X = np.array([[5.0, 0.0, 0.0], [0.0, 5.0, 1.0], [0.0, 1.0, 5.0]])
    with pytest.raises(NoInternationalTradeError):
        growth_table(X, np.ones((3, 3)), _unit_solution(3), np.ones(3), np.ones(3))


def test_csv_full_precision():
    v = np.array([[1 / 3, -2 / 7, 0.1, 1e-17, 12345.678901234567, np.nan]])
    t = ResultsTable(("A",), v, welfare_defined=False)
    rows = list(csv.reader(io.StringIO(table_to_csv(t))))
    assert rows[0] == ["location", *COLUMNS]
    assert [float(x) for x in rows[1][1:6]] == list(v[0, :5])
    assert rows[1][6] == ""


def test_render_matches_printed_layout():
    t = ResultsTable(("ARG",), np.array([[0.066, -0.312, -0.020, -0.012, -0.002, -0.021]]))
    lines = render_table(t).splitlines()
    assert "|          ARG |     0.066     -0.312     -0.020     -0.012     -0.002     -0.021 |" in lines
    assert "|              |   Exports    Imports  IntlTrade   Domestic     Output    Welfare |" in lines
    assert lines[2] == "+" + "-" * 14 + "+" + "-" * 66 + "+"


def test_render_long_labels_widen_cell():
    t = ResultsTable(("A_VERY_LONG_LABEL", "B"), np.zeros((2, 6)))
    lines = render_table(t).splitlines()
    assert len({len(line) for line in lines[2:]}) == 1
    assert lines[5].startswith("| A_VERY_LONG_LABEL |")
