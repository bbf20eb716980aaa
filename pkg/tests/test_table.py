import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from stabdef.table import (
    FormulaTable, GroupFunction, TableParseError, TableValidationError, constant, format_table,
    from_group, half_graph, load_table, parse_table, restrict, transpose,
)

tables = st.integers(1, 6).flatmap(
    lambda r: st.integers(1, 6).flatmap(
        lambda c: arrays(float, (r, c), elements=st.floats(0, 1))
    )
).map(FormulaTable)


def test_load_swap(data_dir):
    t = load_table(data_dir / "swap2.csv")
    assert t.values.tolist() == [[0, 1], [1, 0]]
    assert t.is_boolean
    assert t.row_labels == ("r0", "r1") and t.col_labels == ("c0", "c1")


def test_load_out_of_range_names_cell(data_dir):
    with pytest.raises(TableValidationError) as exc:
        load_table(data_dir / "bad.csv")
    assert (exc.value.row, exc.value.col) == (1, 1)
    assert "row 1, col 1" in str(exc.value)


def test_load_halfgraph3(data_dir):
    t = load_table(data_dir / "halfgraph3.csv")
    assert t.is_boolean
    assert t.values[0].tolist() == [0, 1, 1]
    assert t == half_graph(3)


def test_labels_header(data_dir):
    t = load_table(data_dir / "maj3.csv")
    assert t.row_labels == ("a0", "a1", "a2")
    assert t.col_labels == ("b0", "b1", "b2")


def test_crlf_and_non_boolean(data_dir):
    t = load_table(data_dir / "crlf.csv")
    assert t.values.tolist() == [[0, 0.25], [0.5, 1]]
    assert not t.is_boolean


def test_column_labels_only():
    t = parse_table("#u,v\n0,1\n")
    assert t.col_labels == ("u", "v") and t.row_labels == ("r0",)


@pytest.mark.parametrize("name,line,col", [("ragged.csv", 2, 2), ("nan.csv", 1, 2)])
def test_parse_errors_locate(data_dir, name, line, col):
    with pytest.raises(TableParseError) as exc:
        load_table(data_dir / name)
    assert (exc.value.line, exc.value.column) == (line, col)


def test_duplicate_labels_rejected():
    with pytest.raises(TableValidationError):
        parse_table("#a,a\n0,1\n")


def test_format_roundtrip():
    t = FormulaTable([[0.1, 1.0], [0.0, 0.3]], ["p", "q"], ["u", "v"])
    assert parse_table(format_table(t)) == t


def test_transpose_example():
    t = FormulaTable([[0, 1], [0, 0]])
    assert transpose(t).values.tolist() == [[0, 0], [1, 0]]


def test_transpose_halfgraph():
    tt = transpose(half_graph(3)).values
    for i in range(3):
        for j in range(3):
            assert tt[j, i] == (1.0 if i < j else 0.0)


@given(tables)
def test_transpose_involution(t):
    assert transpose(transpose(t)) == t


@given(tables, st.data())
def test_restrict_commutes_with_transpose(t, data):
    rows = data.draw(st.lists(st.integers(0, t.n_rows - 1), min_size=1, unique=True))
    cols = data.draw(st.lists(st.integers(0, t.n_cols - 1), min_size=1, unique=True))
    assert transpose(restrict(t, rows, cols)) == restrict(transpose(t), cols, rows)


def test_restrict_examples():
    h = half_graph(4)
    assert restrict(h, range(4), range(4)) == h
    assert restrict(h, [0, 1], [2, 3]).values.tolist() == [[1, 1], [1, 1]]
    with pytest.raises(TableValidationError):
        restrict(h, [0], [])
    with pytest.raises(IndexError, match="column index 7"):
        restrict(h, [0], [7])


def test_group_parity():
    t = from_group(GroupFunction.cyclic([0, 1, 0, 1]))
    g = np.arange(4)
    assert np.array_equal(t.values, (g[:, None] + g[None, :]) % 2)


def test_group_constant_and_shift():
    assert np.all(from_group(GroupFunction.cyclic([0.3] * 5)).values == 0.3)
    t = from_group(GroupFunction.cyclic([0, 0.5, 1]))
    for g in range(3):
        assert t.values[g].tolist() == np.roll([0, 0.5, 1], -g).tolist()


def test_group_rows_are_permutations():
    # symmetric group S3 via permutation composition
    from itertools import permutations

    perms = list(permutations(range(3)))
    idx = {p: i for i, p in enumerate(perms)}
    cay = [[idx[tuple(p[q[k]] for k in range(3))] for q in perms] for p in perms]
    f = [0.0, 0.2, 0.2, 0.5, 0.9, 1.0]
    t = from_group(GroupFunction(np.array(cay), f))
    for line in list(t.values) + list(t.values.T):
        assert sorted(line) == sorted(f)


def test_latin_square_violation():
    with pytest.raises(TableValidationError, match="permutation"):
        GroupFunction(np.array([[0, 1], [0, 1]]), [0, 1])


def test_boolean_flag_recomputed():
    assert constant(2, 2, 1.0).is_boolean
    assert not constant(2, 2, 0.5).is_boolean
    assert FormulaTable([[0.0, 1.0]]).is_boolean


def test_immutable():
    t = half_graph(2)
    with pytest.raises(ValueError):
        t.values[0, 0] = 1.0
