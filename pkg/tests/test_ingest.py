import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unigrav.errors import MissingValueError, NonSquareError, OverflowShockError, ValidationError
from unigrav.ingest import (
    LongRecord,
    parse_long_format,
    read_long_csv,
    read_vector_csv,
    shock_from_partial,
    split_groups,
    to_long_format,
)

R = LongRecord


def square(labels, group=None, flow=lambda i, j: 1.0 + i + 2 * j):
    return [R(a, b, flow(i, j), 0.0, group) for i, a in enumerate(labels) for j, b in enumerate(labels)]


def test_minimal_square_panel():
    rows = [R("A", "A", 10, 0), R("A", "B", 5, 0), R("B", "A", 5, 0), R("B", "B", 10, 0)]
    s = parse_long_format(rows)
    np.testing.assert_array_equal(s.X, [[10, 5], [5, 10]])
    assert s.index.labels == ("A", "B")


def test_missing_pair():
    rows = [R("A", "A", 10, 0), R("A", "B", 5, 0), R("B", "A", 5, 0)]
    with pytest.raises(NonSquareError):
        parse_long_format(rows)


def test_duplicate_pair_is_not_summed():
    rows = [R("A", "A", 10, 0), R("A", "B", 5, 0), R("A", "B", 5, 0), R("B", "B", 10, 0)]
    with pytest.raises(NonSquareError):
        parse_long_format(rows)


def test_exporter_importer_sets_differ():
    rows = [R("A", "A", 1, 0), R("A", "B", 1, 0), R("C", "A", 1, 0), R("C", "B", 1, 0)]
    with pytest.raises(NonSquareError):
        parse_long_format(rows)


def test_canonical_sort():
    rows = square(["C", "A", "B"])
    random.Random(3).shuffle(rows)
    s = parse_long_format(rows)
    assert s.index.labels == ("A", "B", "C")
    # flow(i, j) was defined on the C, A, B order
    order = {"C": 0, "A": 1, "B": 2}
    for i, a in enumerate(s.index.labels):
        for j, b in enumerate(s.index.labels):
            assert s.X[i, j] == 1.0 + order[a] + 2 * order[b]


@pytest.mark.parametrize("kw", [dict(flow=None), dict(flow=""), dict(partial=float("nan")),
                                dict(origin=""), dict(destination=None)])
def test_missing_values(kw):
    base = dict(origin="A", destination="B", flow=1.0, partial=0.0)
    base.update(kw)
    with pytest.raises(MissingValueError):
        R(**base)


def test_negative_flow():
    with pytest.raises(ValidationError):
        R("A", "B", -1.0, 0.0)


def test_shock_no_partial():
    np.testing.assert_array_equal(shock_from_partial(np.zeros((3, 3))), np.ones((3, 3)))


def test_shock_values():
    # exp evaluated to 30 digits with mpmath
    assert shock_from_partial([[0.5]])[0, 0] == pytest.approx(1.64872127070012814684865078781, rel=1e-15)
    spain_1970 = (-0.428) - (-0.604)
    assert shock_from_partial([[spain_1970]])[0, 0] == pytest.approx(1.19243805865066946782474119572,
                                                                     rel=1e-12)


def test_shock_overflow():
    with pytest.raises(OverflowShockError):
        shock_from_partial([[1000.0]])
    with pytest.raises(OverflowShockError):
        shock_from_partial([[-1000.0]])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=4, max_size=4), st.lists(st.floats(-5, 5), min_size=4, max_size=4))
def test_shock_is_multiplicative(a, b):
    a = np.array(a).reshape(2, 2)
    b = np.array(b).reshape(2, 2)
    np.testing.assert_allclose(shock_from_partial(a + b), shock_from_partial(a) * shock_from_partial(b),
                               rtol=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.randoms(use_true_random=False))
def test_round_trip_records(n, rand):
    labels = [f"L{k}" for k in range(n)]
    rows = [R(a, b, float(rand.randint(0, 100)), rand.uniform(-1, 1)) for a in labels for b in labels]
    rand.shuffle(rows)
    back = to_long_format(parse_long_format(rows))
    key = lambda r: (r.origin, r.destination)  # noqa: E731
    assert sorted(back, key=key) == sorted(rows, key=key)


def test_split_groups_by_year():
    rows = square(["A", "B"], "1960") + square(["A", "B", "C"], "1950")
    slices = split_groups(rows)
    assert [s.group for s in slices] == ["1950", "1960"]
    assert [s.n for s in slices] == [3, 2]


def test_split_groups_numeric_order():
    rows = square(["A", "B"], "10") + square(["A", "B"], "9")
    assert [s.group for s in split_groups(rows)] == ["9", "10"]


def test_split_groups_single():
    slices = split_groups(square(["A", "B"]))
    assert len(slices) == 1 and slices[0].group is None


def test_split_groups_differing_sizes():
    rows = square([f"C{i:02d}" for i in range(74)], "1950") + square([f"C{i:02d}" for i in range(77)], "1960")
    assert [s.n for s in split_groups(rows)] == [74, 77]


def test_split_groups_nonsquare_isolated():
    bad = square(["A", "B"], "1950")[:-1]
    rows = bad + square(["A", "B"], "1960")
    with pytest.raises(NonSquareError):
        split_groups(rows)
    out = split_groups(rows, strict=False)
    assert isinstance(out[0][1], NonSquareError)
    assert out[1][1].n == 2


def test_mixed_group_presence():
    with pytest.raises(ValidationError):
        split_groups(square(["A", "B"], "1") + square(["A", "B"]))


def test_read_csv(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("iso_o,iso_d,flow,pe,year\nA,A,1,0,1\nA,B,2,0,1\nB,A,3,0,1\nB,B,4,0,1\nA,A,1,0,2\n")
    recs, raw, fields = read_long_csv(p, {"exp_id": "iso_o", "imp_id": "iso_d", "partial": "pe"},
                                      where={"year": "1"})
    assert fields == ["iso_o", "iso_d", "flow", "pe", "year"]
    assert recs[-1] is None and len(raw) == 5
    s = parse_long_format([r for r in recs if r])
    np.testing.assert_array_equal(s.X, [[1, 2], [3, 4]])


def test_read_csv_missing_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValidationError):
        read_long_csv(p)


def test_read_vector(tmp_path):
    s = parse_long_format(square(["A", "B", "C"]))
    p = tmp_path / "a.csv"
    p.write_text("location,value\nB,1.1\nZZZ,5\n")
    np.testing.assert_array_equal(read_vector_csv(p, s.index), [1, 1.1, 1])
    assert math.isclose(read_vector_csv(p, s.index)[1], 1.1)
