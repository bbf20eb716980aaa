import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oracles import best_ladder_margin, brute_ladder_index
from stabdef.kernel import parse, sample_table
from stabdef.order import (
    HIGH_ABOVE, LOW_ABOVE, Ladder, double_limit, find_ladder, iterated_limits, ladder_index,
    ladder_lower_bound, ladder_to_gap, verify_ladder, window_limit,
)
from stabdef.table import (
    FormulaTable, GroupFunction, constant, from_group, half_graph, identity, restrict, transpose,
)

small_tables = st.integers(1, 5).flatmap(
    lambda r: st.integers(1, 5).flatmap(
        lambda c: arrays(float, (r, c), elements=st.sampled_from([0.0, 0.25, 0.5, 0.75, 1.0]))
    )
).map(FormulaTable)
margins = st.sampled_from([1.0, 0.75, 0.5, 0.25])

LT = parse("lt(x[0], y[0])")
LE = parse("le(x[0], y[0])")
DOT = parse("0.5*(1+dot(x,y))")
A_SEQ = [1 - 2.0 ** -n for n in range(1, 21)]
B_SEQ = [1 - 3.0 ** -m for m in range(1, 21)]


def test_verify_identity_ladder():
    good = Ladder(range(3), range(3), 0.0, 1.0, HIGH_ABOVE)
    assert verify_ladder(half_graph(3), good)
    assert not verify_ladder(half_graph(3), Ladder(range(3), range(3), 0.0, 1.0, LOW_ABOVE))


def test_verify_rejects_bad_indices():
    with pytest.raises(ValueError, match="distinct"):
        verify_ladder(half_graph(3), Ladder([0, 0, 1], [0, 1, 2], 0.0, 1.0))
    with pytest.raises(IndexError):
        verify_ladder(half_graph(3), Ladder([0, 5], [0, 1], 0.0, 1.0))


def test_find_halfgraph5():
    lad = find_ladder(half_graph(5), 5, 1.0)
    assert lad == Ladder(range(5), range(5), 0.0, 1.0, HIGH_ABOVE)


def test_find_constant_none():
    assert find_ladder(constant(3, 3, 0.5), 2, 0.5) is None
    assert find_ladder(constant(3, 3, 0.5), 2, 0.01) is None


def test_find_identity():
    # frozen from the permutation oracle: I_4 has margin-1 ladders of length 2, not 3
    assert best_ladder_margin(np.eye(4), 2) == 1.0
    assert best_ladder_margin(np.eye(4), 3) == 0.0
    assert find_ladder(identity(4), 3, 1.0) is None
    lad = find_ladder(identity(4), 2, 1.0)
    assert lad is not None and verify_ladder(identity(4), lad)


@pytest.mark.parametrize("n", range(1, 8))
def test_index_halfgraph(n):
    assert ladder_index(half_graph(n), 1.0) == n


@pytest.mark.parametrize("n", range(3, 7))
def test_index_identity(n):
    assert ladder_index(identity(n), 1.0) == 2


def test_index_parity_group():
    assert ladder_index(from_group(GroupFunction.cyclic([0, 1, 0, 1])), 1.0) == 1


def test_length_one_convention():
    # a single cell needs value <= 1 - delta (high-above) or >= delta (low-above)
    assert ladder_index(constant(2, 2, 0.5), 0.5) == 1
    assert ladder_index(constant(2, 2, 0.5), 0.6) == 0
    lad = find_ladder(constant(1, 1, 0.0), 1, 1.0)
    assert (lad.r, lad.s, lad.direction) == (0.0, 1.0, HIGH_ABOVE)
    lad = find_ladder(constant(1, 1, 1.0), 1, 1.0)
    assert (lad.r, lad.s, lad.direction) == (0.0, 1.0, LOW_ABOVE)


def test_find_preconditions():
    with pytest.raises(ValueError):
        find_ladder(half_graph(3), 4, 1.0)
    with pytest.raises(ValueError):
        find_ladder(half_graph(3), 2, 0.0)


@settings(max_examples=150, deadline=None)
@given(small_tables, margins)
def test_index_matches_oracle(t, delta):
    assert ladder_index(t, delta) == brute_ladder_index(t.values, delta)


@settings(max_examples=150, deadline=None)
@given(small_tables, margins)
def test_transpose_duality(t, delta):
    assert ladder_index(t, delta) == ladder_index(transpose(t), delta)


@settings(max_examples=100, deadline=None)
@given(small_tables)
def test_reversed_ladder_transposes(t):
    lad = find_ladder(t, ladder_index(t, 0.25) or 1, 0.25) if ladder_index(t, 0.25) else None
    if lad is None:
        return
    flipped = Ladder(lad.col_indices[::-1], lad.row_indices[::-1], lad.r, lad.s, lad.direction)
    assert verify_ladder(transpose(t), flipped)


@settings(max_examples=100, deadline=None)
@given(small_tables, margins, margins)
def test_monotone_in_margin(t, d1, d2):
    lo, hi = sorted([d1, d2])
    assert ladder_index(t, lo) >= ladder_index(t, hi)


@settings(max_examples=100, deadline=None)
@given(small_tables, margins, st.data())
def test_restriction_monotone(t, delta, data):
    rows = data.draw(st.lists(st.integers(0, t.n_rows - 1), min_size=1, unique=True))
    cols = data.draw(st.lists(st.integers(0, t.n_cols - 1), min_size=1, unique=True))
    assert ladder_index(restrict(t, rows, cols), delta) <= ladder_index(t, delta)


@settings(max_examples=100, deadline=None)
@given(small_tables, margins)
def test_found_ladders_verify(t, delta):
    for n in range(1, min(t.shape) + 1):
        lad = find_ladder(t, n, delta)
        if lad is None:
            break
        assert len(lad) == n and verify_ladder(t, lad) and lad.margin >= delta


@settings(max_examples=60, deadline=None)
@given(small_tables, margins, st.integers(0, 10_000))
def test_lower_bound_sound(t, delta, seed):
    lad = ladder_lower_bound(t, delta, seed=seed, budget=8)
    if lad is not None:
        assert verify_ladder(t, lad) and lad.margin >= delta
        assert len(lad) <= ladder_index(t, delta)


def test_boolean_ladders_are_half_graphs():
    rng = np.random.default_rng(5)
    for _ in range(40):
        t = FormulaTable(rng.integers(0, 2, size=(5, 5)).astype(float))
        n = ladder_index(t, 1.0)
        lad = find_ladder(t, n, 1.0)
        sub = t.values[np.ix_(lad.row_indices, lad.col_indices)]
        pattern = half_graph(n).values
        expected = pattern if lad.direction == HIGH_ABOVE else 1 - pattern
        assert np.array_equal(sub, expected)


def test_lower_bound_halfgraph50():
    t = half_graph(50)
    lad = ladder_lower_bound(t, 1.0, seed=0, budget=8)
    assert verify_ladder(t, lad)
    assert len(lad) >= 25


def test_lower_bound_constant_and_determinism():
    assert ladder_lower_bound(constant(4, 4, 0.5), 1.0, seed=3) is None
    t = FormulaTable(np.random.default_rng(1).random((12, 12)))
    assert ladder_lower_bound(t, 0.5, seed=7) == ladder_lower_bound(t, 0.5, seed=7)


# Double limits

def test_window_limit_rules():
    assert window_limit([0, 1, 1, 1], 3, 0.01) == 1.0
    assert window_limit([0.3] * 5, 5, 1e-9) == 0.3
    assert window_limit([0, 0.5, 1.0], 3, 0.01) is None
    assert window_limit([0.5, 0.501, 0.502], 3, 0.01) == pytest.approx(0.501)
    assert window_limit([None, 1, 1], 2, 0.01) == 1.0
    assert window_limit([1, None, 1], 2, 0.01) is None


def test_double_limit_lt():
    rep = double_limit(LT, A_SEQ, B_SEQ, window=5, tol=0.01)
    assert (rep.limit_nm, rep.limit_mn, rep.gap) == (1.0, 0.0, 1.0)


def test_double_limit_constant():
    rep = double_limit(parse("0.3"), A_SEQ, B_SEQ, window=5, tol=0.01)
    assert (rep.limit_nm, rep.limit_mn, rep.gap) == (0.3, 0.3, 0.0)


def test_double_limit_dot_basis():
    basis = np.eye(20)
    # oracle: the finite grid itself is 1 on the diagonal and 0.5 elsewhere
    grid = 0.5 * (1 + basis @ basis.T)
    assert np.all(grid[np.triu_indices(20, 1)] == 0.5)
    rep = double_limit(DOT, basis, basis, window=5, tol=0.01)
    assert (rep.limit_nm, rep.limit_mn, rep.gap) == (0.5, 0.5, 0.0)


def test_double_limit_preconditions():
    with pytest.raises(ValueError):
        double_limit(LT, A_SEQ[:9], B_SEQ, window=5, tol=0.01)
    with pytest.raises(ValueError):
        iterated_limits(np.zeros((10, 10)), 1, 0.01)
    with pytest.raises(ValueError):
        iterated_limits(np.zeros((10, 10)), 2, 0.0)


def test_double_limit_not_converged():
    rng = np.random.default_rng(0)
    rep = iterated_limits(rng.random((20, 20)), 5, 0.01)
    assert rep.limit_nm is None and rep.gap is None


def test_ladder_to_gap_examples():
    assert ladder_to_gap(LT, A_SEQ, B_SEQ).gap == 1.0
    rep = ladder_to_gap(LE, A_SEQ, A_SEQ)
    assert (rep.limit_nm, rep.limit_mn, rep.gap) == (1.0, 0.0, 1.0)
    assert ladder_to_gap(DOT, A_SEQ, A_SEQ).gap == pytest.approx(0.0, abs=0.01)
    with pytest.raises(ValueError, match="monotone"):
        ladder_to_gap(LT, [0.1, 0.3, 0.2] * 4, B_SEQ)


def test_ladder_family_gap_at_least_margin():
    # a margin-delta ladder family along interleaved samples gives gap >= delta - tol
    delta, tol = 0.6, 0.01
    kern = parse(f"0.2 + {delta} * lt(x[0], y[0])")
    rep = ladder_to_gap(kern, A_SEQ, B_SEQ, 5, tol)
    assert rep.gap >= delta - tol


def test_dot_kernel_bounded_while_lt_grows():
    # exact indices stay under 4, the longest margin-0.5 ladder numerical optimization finds on S^2;
    # the unstable lt kernel ladders the whole sample, and the heuristic never exceeds exact
    rng = np.random.default_rng(0)
    pts = rng.normal(size=(60, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    line = np.linspace(0.01, 0.99, 30)[:, None]
    for n in (10, 20, 30):
        t = sample_table(DOT, pts[:n], pts[30:30 + n])
        exact = ladder_index(t, 0.5)
        assert 2 <= exact <= 4
        lad = ladder_lower_bound(t, 0.5, seed=0)
        assert lad is not None and len(lad) <= exact
        assert ladder_index(sample_table(LT, line[:n], line[:n]), 0.5) == n
