from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fot.core import ContractError, DomainError, INF
from fot.pwl import PiecewiseLinear, minimum

F = Fraction

small_fractions = st.fractions(min_value=-8, max_value=8, max_denominator=12)
positive_fractions = st.fractions(min_value=F(1, 12), max_value=8, max_denominator=12)


@st.composite
def pwl_functions(draw, monotone=False, strictly_increasing=False):
    start = F(0)
    n = draw(st.integers(min_value=0, max_value=4))
    xs = [start]
    for _ in range(n):
        xs.append(xs[-1] + draw(positive_fractions))
    if strictly_increasing:
        slope_strategy = positive_fractions
    elif monotone:
        slope_strategy = st.fractions(min_value=0, max_value=8, max_denominator=12)
    else:
        slope_strategy = small_fractions
    y = draw(small_fractions)
    points = [(xs[0], y)]
    for a, b in zip(xs, xs[1:]):
        y = y + draw(slope_strategy) * (b - a)
        points.append((b, y))
    final = draw(slope_strategy)
    return PiecewiseLinear.from_points(points, final)


def sample_grid(*funcs):
    """Breakpoints, segment midpoints, and points beyond the last breakpoint."""
    start = max(f.xs[0] for f in funcs)
    xs = sorted({x for f in funcs for x in f.xs if x >= start} | {start})
    grid = list(xs)
    for a, b in zip(xs, xs[1:]):
        grid.append((a + b) / 2)
    grid.extend([xs[-1] + 1, xs[-1] + F(7, 3)])
    return grid


# -- frozen examples ---------------------------------------------------------


def test_eval_identity():
    assert PiecewiseLinear.identity()(F(7, 2)) == F(7, 2)


def test_eval_constant_tail():
    f = PiecewiseLinear.from_points([(F(0), F(0)), (F(1), F(2))], F(0))
    assert f(F(3)) == F(2)


def test_eval_cumulative_inflow_shape():
    # rate 2 on [0,1), rate 1 afterwards, integrated from zero
    f = PiecewiseLinear.from_rate_segments([(F(0), F(2)), (F(1), F(1))])
    assert f(F(2)) == F(3)
    assert f(F(1, 2)) == F(1)
    with pytest.raises(DomainError):
        f(F(-1))


def test_min_identity_vs_constant():
    got = minimum(PiecewiseLinear.identity(), PiecewiseLinear.constant(F(5)))
    assert got == PiecewiseLinear.from_points([(F(0), F(0)), (F(5), F(5))], F(0))


def test_min_affine_crossing():
    f = PiecewiseLinear.affine(F(1), F(1))  # x + 1
    g = PiecewiseLinear.affine(F(2), F(0))  # 2x
    got = minimum(f, g)
    assert F(1) in got.xs and got(F(1)) == F(2)
    assert got(F(1, 2)) == F(1) and got(F(2)) == F(3)


def test_compose_with_identity():
    f = PiecewiseLinear.from_points([(F(0), F(1)), (F(2), F(0))], F(3))
    assert f.compose(PiecewiseLinear.identity()) == f


def test_compose_affine():
    doubling = PiecewiseLinear.affine(F(2), F(0))
    shift = PiecewiseLinear.affine(F(1), F(1))
    assert doubling.compose(shift) == PiecewiseLinear.affine(F(2), F(2))


def test_compose_sink_arrivals_after_labels():
    # Cumulative sink arrivals and sink label of the two-link base run:
    # arrivals have rate 1 until time 2 and rate 2 afterwards; the label is
    # 2x until 1 and x+1 afterwards.  Their composition is exactly 2x.
    gamma = PiecewiseLinear.from_points([(F(0), F(0)), (F(2), F(2))], F(2))
    label = PiecewiseLinear.from_points([(F(0), F(0)), (F(1), F(2))], F(1))
    assert gamma.compose(label) == PiecewiseLinear.affine(F(2), F(0))


def test_compose_requires_nondecreasing_inner():
    f = PiecewiseLinear.identity()
    dec = PiecewiseLinear.affine(F(-1), F(0))
    with pytest.raises(ContractError):
        f.compose(dec)


def test_inverse_simple():
    assert PiecewiseLinear.identity().inverse() == PiecewiseLinear.identity()
    assert PiecewiseLinear.affine(F(2), F(0)).inverse() == PiecewiseLinear.affine(F(1, 2), F(0))


def test_inverse_two_piece():
    f = PiecewiseLinear.from_points([(F(0), F(1)), (F(1), F(3))], F(1))
    inv = f.inverse()
    assert inv == PiecewiseLinear.from_points([(F(1), F(0)), (F(3), F(1))], F(1))
    assert inv(F(2)) == F(1, 2)
    with pytest.raises(DomainError):
        inv(F(0))  # left of the range of f


def test_inverse_requires_strict_increase():
    with pytest.raises(ContractError):
        PiecewiseLinear.constant(F(1)).inverse()


def test_canonical_form_merges_collinear_points():
    a = PiecewiseLinear.from_points(
        [(F(0), F(0)), (F(1), F(1)), (F(2), F(2)), (F(3), F(4))], F(2))
    b = PiecewiseLinear.from_points([(F(0), F(0)), (F(2), F(2))], F(2))
    assert a == b
    with pytest.raises(ContractError):
        PiecewiseLinear((F(0), F(1)), (F(0), F(1)), F(1))  # collinear, non-canonical


def test_supremum_and_rate_pairs():
    f = PiecewiseLinear.from_points([(F(0), F(0)), (F(1), F(2))], F(-1))
    assert f.supremum() == F(2)
    assert PiecewiseLinear.identity().supremum() is INF
    assert f.rate_pairs() == [(F(0), F(2)), (F(1), F(-1))]
    assert PiecewiseLinear.from_rate_segments(f.rate_pairs()) == f


# -- properties --------------------------------------------------------------


@settings(max_examples=120)
@given(pwl_functions(), pwl_functions())
def test_min_matches_pointwise_oracle(f, g):
    got = minimum(f, g)
    for x in sample_grid(f, g, got):
        assert got(x) == min(f(x), g(x))


@settings(max_examples=80)
@given(pwl_functions(), pwl_functions(), pwl_functions())
def test_min_commutative_associative_idempotent(f, g, h):
    assert minimum(f, g) == minimum(g, f)
    assert minimum(minimum(f, g), h) == minimum(f, minimum(g, h))
    assert minimum(f, f) == f


@settings(max_examples=120)
@given(pwl_functions(), pwl_functions())
def test_add_sub_match_pointwise_oracle(f, g):
    total = f + g
    diff = f - g
    for x in sample_grid(f, g):
        assert total(x) == f(x) + g(x)
        assert diff(x) == f(x) - g(x)


@settings(max_examples=120)
@given(pwl_functions(), pwl_functions(monotone=True))
def test_compose_matches_pointwise_oracle(f, g):
    shifted = g.add_constant(f.xs[0] - g.ys[0])  # force range into f's domain
    got = f.compose(shifted)
    for x in sample_grid(shifted, got):
        assert got(x) == f(shifted(x))


@settings(max_examples=100)
@given(pwl_functions(strictly_increasing=True))
def test_inverse_roundtrip(f):
    inv = f.inverse()
    assert inv.compose(f) == PiecewiseLinear.identity(f.xs[0])
    for y in sample_grid(inv):
        assert f(inv(y)) == y
