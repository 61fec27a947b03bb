import io
import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from freeplate.bounds import (
    BOUND_KINDS,
    BoundInput,
    DomainError,
    F_ratio,
    G_limit,
    PreconditionViolated,
    _F_slope_sign,
    bounds_table,
    closed_form_argmin,
    kroger_eig_bound,
    kroger_sum_bound,
    sum_lemma_holds,
    minimize_F,
    plate_eig_bound,
    plate_sum_bound,
    threshold_radius,
    write_bounds_csv,
)
from conftest import lemma_instances
from freeplate.exact_spectra import free_beam, rectangle_neumann

mpmath.mp.dps = 40
MP_2PI = 2 * mpmath.pi


def mp_ball(n):
    return mpmath.pi ** (mpmath.mpf(n) / 2) / mpmath.gamma(mpmath.mpf(n) / 2 + 1)


def mp_V(n, vol):
    return mp_ball(n) * mpmath.mpf(vol)


def mp_kroger_sum(n, vol, m):
    n = mpmath.mpf(n)
    return MP_2PI**2 * n / (n + 2) * mp_V(n, vol) ** (-2 / n) * mpmath.mpf(m) ** ((n + 2) / n)


def mp_kroger_eig(n, vol, m):
    n = mpmath.mpf(n)
    return MP_2PI**2 * ((n + 2) / (2 * mp_V(n, vol))) ** (2 / n) * mpmath.mpf(m) ** (2 / n)


def mp_plate_sum(n, vol, tau, m):
    n = mpmath.mpf(n)
    V = mp_V(n, vol)
    m = mpmath.mpf(m)
    return (MP_2PI**4 * n / (n + 4) * V ** (-4 / n) * m ** ((n + 4) / n)
            + tau * MP_2PI**2 * n / (n + 2) * V ** (-2 / n) * m ** ((n + 2) / n))


def mp_plate_eig_closed(n, vol, m):
    n = mpmath.mpf(n)
    return MP_2PI**4 * ((n + 4) / (4 * mp_V(n, vol))) ** (4 / n) * mpmath.mpf(m) ** (4 / n)


def mp_F_min(n, vol, tau, m):
    V = mp_V(n, vol)
    F = lambda r: n * V * (r ** (n + 4) / (n + 4) + tau * r ** (n + 2) / (n + 2)) / (V * r**n - m * MP_2PI**n)
    r0 = MP_2PI * (m / V) ** (mpmath.mpf(1) / n)
    r = mpmath.findroot(lambda r: mpmath.diff(F, r), 1.3 * r0)
    return F(r)


# values frozen from the 40-digit oracle above
FROZEN = [
    # (n, vol, tau, m, kroger_sum, kroger_eig, plate_sum, plate_eig)
    (2, math.pi, 0.0, 1, 2.0, 8.0, 16 / 3, 36.0),
    (2, math.pi, 0.0, 4, 32.0, 32.0, 1024 / 3, 576.0),
    (2, 1.0, 0.0, 4, 32 * math.pi, 32 * math.pi, None, None),
]


@pytest.mark.parametrize("row", FROZEN)
def test_frozen_examples(row):
    n, vol, tau, m, ks, ke, ps, pe = row
    b = BoundInput(n, vol, tau, m)
    assert kroger_sum_bound(b) == pytest.approx(ks, rel=1e-13)
    assert kroger_eig_bound(b) == pytest.approx(ke, rel=1e-13)
    if ps is not None:
        assert plate_sum_bound(b) == pytest.approx(ps, rel=1e-13)
        assert plate_eig_bound(b) == pytest.approx(pe, rel=1e-13)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("vol", [0.5, 1.0, math.pi])
@pytest.mark.parametrize("m", [1, 2, 7, 30])
def test_against_mpmath_oracle(n, vol, m):
    for tau in (0.0, 1.0, 10.0):
        b = BoundInput(n, vol, tau, m)
        assert kroger_sum_bound(b) == pytest.approx(float(mp_kroger_sum(n, vol, m)), rel=1e-13)
        assert kroger_eig_bound(b) == pytest.approx(float(mp_kroger_eig(n, vol, m)), rel=1e-13)
        assert plate_sum_bound(b) == pytest.approx(float(mp_plate_sum(n, vol, tau, m)), rel=1e-13)
    assert plate_eig_bound(BoundInput(n, vol, 0.0, m)) == pytest.approx(
        float(mp_plate_eig_closed(n, vol, m)), rel=1e-13)


@pytest.mark.parametrize("n, vol, tau, m", [(2, math.pi, 1.0, 1), (2, 1.0, 10.0, 5), (1, 1.0, 3.0, 2),
                                            (3, 2.0, 0.5, 4)])
def test_tension_minimum_against_mpmath(n, vol, tau, m):
    assert plate_eig_bound(BoundInput(n, vol, tau, m)) == pytest.approx(
        float(mp_F_min(n, vol, tau, m)), rel=1e-10)


def test_beam_example():
    b = BoundInput(1, 1.0, 0.0, 2)
    # omega_1 |Omega| = 2, so (n+4)/(4V) = 5/8
    closed = (2 * math.pi) ** 4 * (5 / 8) ** 4 * 2**4
    assert closed == pytest.approx(float(mp_plate_eig_closed(1, 1, 2)), rel=1e-14)
    assert plate_eig_bound(b) == pytest.approx(closed, rel=1e-13)
    assert plate_eig_bound(b) >= free_beam(1, 3).values[2]


def test_zero_m():
    assert kroger_eig_bound(BoundInput(2, 1.0, 0.0, 0)) == 0.0
    for tau in (0.0, 1.0):
        assert plate_eig_bound(BoundInput(2, 1.0, tau, 0)) == 0.0


def test_tension_example_exceeds_zero_tension():
    assert plate_eig_bound(BoundInput(2, math.pi, 1.0, 1)) >= 36.0


def test_sum_bound_additivity():
    b0 = BoundInput(2, math.pi, 0.0, 3)
    b1 = BoundInput(2, math.pi, 1.0, 3)
    assert plate_sum_bound(b1) - plate_sum_bound(b0) == pytest.approx(kroger_sum_bound(b0), rel=1e-13)


def test_F_examples():
    b = BoundInput(2, math.pi, 0.0, 1)
    assert F_ratio(b, math.sqrt(6)) == pytest.approx(36.0, rel=1e-14)
    assert F_ratio(b, 3.0) == pytest.approx(48.6, rel=1e-14)
    r0 = threshold_radius(b)
    assert r0 == pytest.approx(2.0)
    # simple pole: F(r0 (1 + e)) = (64/3) / (8 e) to leading order
    assert F_ratio(b, r0 * (1 + 1e-6)) == pytest.approx(8 / 3 * 1e6, rel=1e-5)
    assert F_ratio(b, r0 * (1 + 1e-7)) > 1e5 * 36.0
    with pytest.raises(DomainError):
        F_ratio(b, r0)
    with pytest.raises(DomainError):
        F_ratio(b, 1.0)


def test_argmin_example():
    b = BoundInput(2, math.pi, 0.0, 1)
    r, val = minimize_F(b)
    assert r == pytest.approx(math.sqrt(6), rel=1e-10)
    assert closed_form_argmin(b) == pytest.approx(math.sqrt(6), rel=1e-15)
    assert val == pytest.approx(36.0, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("m", range(1, 11))
def test_argmin_and_slope_sign(n, m):
    b = BoundInput(n, 1.7, 0.0, m)
    r_star = closed_form_argmin(b)
    assert minimize_F(b)[0] == pytest.approx(r_star, rel=1e-8)
    h = 1e-4 * r_star
    assert F_ratio(b, r_star + h) > F_ratio(b, r_star) < F_ratio(b, r_star - h)
    assert _F_slope_sign(b, r_star - h) < 0 < _F_slope_sign(b, r_star + h)
    assert plate_eig_bound(b) == pytest.approx(F_ratio(b, r_star), rel=1e-12)


dims = st.integers(1, 3)
vols = st.floats(0.05, 50)
taus = st.floats(0, 50)
ms = st.integers(1, 60)


@settings(max_examples=150, deadline=None)
@given(dims, vols, taus, ms)
def test_limit_identity(n, vol, tau, m):
    b = BoundInput(n, vol, tau, m)
    assert plate_sum_bound(b) == pytest.approx(G_limit(b, threshold_radius(b)), rel=1e-12)


@settings(max_examples=150, deadline=None)
@given(dims, vols, taus, ms)
def test_monotone_in_m(n, vol, tau, m):
    lo, hi = BoundInput(n, vol, tau, m), BoundInput(n, vol, tau, m + 1)
    for f in (kroger_sum_bound, kroger_eig_bound, plate_sum_bound, plate_eig_bound):
        assert f(hi) > f(lo)


@settings(max_examples=100, deadline=None)
@given(dims, vols, taus, st.floats(0.01, 20), ms)
def test_plate_bounds_increase_in_tau(n, vol, tau, dt, m):
    lo, hi = BoundInput(n, vol, tau, m), BoundInput(n, vol, tau + dt, m)
    assert plate_sum_bound(hi) > plate_sum_bound(lo)
    assert plate_eig_bound(hi) > plate_eig_bound(lo)


@settings(max_examples=150, deadline=None)
@given(dims, vols, ms)
def test_volume_scaling(n, vol, m):
    a = BoundInput(n, vol, 0.0, m)
    b = BoundInput(n, vol * 2**n, 0.0, m)
    # doubling every length: membrane bounds drop by 4, plate bounds by 16
    assert kroger_sum_bound(b) == pytest.approx(kroger_sum_bound(a) / 4, rel=1e-12)
    assert kroger_eig_bound(b) == pytest.approx(kroger_eig_bound(a) / 4, rel=1e-12)
    assert plate_sum_bound(b) == pytest.approx(plate_sum_bound(a) / 16, rel=1e-12)
    assert plate_eig_bound(b) == pytest.approx(plate_eig_bound(a) / 16, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(dims, vols, taus, ms, st.floats(1.001, 10))
def test_minimum_below_F_everywhere(n, vol, tau, m, factor):
    b = BoundInput(n, vol, tau, m)
    assume(tau > 0)
    val = plate_eig_bound(b)
    assert val <= F_ratio(b, factor * threshold_radius(b)) * (1 + 1e-12)


def test_weyl_order_on_square():
    mu = rectangle_neumann(1, 1, 51).values
    for m in range(5, 51):
        ratio = kroger_sum_bound(BoundInput(2, 1.0, 0.0, m)) / mu[:m].sum()
        assert 1 <= ratio <= 3


def test_bounds_invalid_input():
    for args in [(0, 1.0), (2, 0.0), (2, 1.0, -1.0), (2, 1.0, 0.0, -1)]:
        with pytest.raises(ValueError):
            BoundInput(*args)


# ---- lemma


def test_lemma_examples():
    assert sum_lemma_holds(2, 2, 1, [1], [1, 1])
    assert sum_lemma_holds(5, 3, 1, [0.5, 1], [0, 0, 1])


@pytest.mark.parametrize("args", [
    (2, 1, 1, [1], [1, 1]),            # b <= m c
    (1, 2, 1, [1], [1, 5]),            # hypothesis fails
    (2, 2, 1, [1.5], [1, 1]),          # c_j > c
    (2, 2, 1, [1], [2, 1]),            # not ascending
    (2, 2, 1, [1], [1]),               # wrong length
])
def test_lemma_preconditions(args):
    with pytest.raises(PreconditionViolated):
        sum_lemma_holds(*args)


def test_lemma_random_instances():
    checked = 0
    counterexamples = 0
    for a, b, c, cs, lam in lemma_instances(10_000):
        try:
            ok = sum_lemma_holds(a, b, c, cs, lam)
        except PreconditionViolated:
            continue
        checked += 1
        counterexamples += not ok
    assert counterexamples == 0
    assert checked == 10_000


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 6), st.floats(0.1, 10), st.data())
def test_lemma_property(m, c, data):
    cs = [data.draw(st.floats(0.01, 1)) * c for _ in range(m)]
    b = m * c + data.draw(st.floats(1e-6, 50))
    lam = sorted(data.draw(st.lists(st.floats(0, 1e3), min_size=m + 1, max_size=m + 1)))
    a = lam[m] * (b - sum(cs)) + sum(l * cj for l, cj in zip(lam, cs)) + data.draw(st.floats(0, 10))
    assume(a > 0)
    try:
        assert sum_lemma_holds(a, b, c, cs, lam)
    except PreconditionViolated:
        # rounding may tip a boundary case over; such inputs do not test the lemma
        pass


# ---- tables


def test_bounds_table_row():
    (row,) = bounds_table(2, math.pi, 0.0, 1)
    assert [row[k] for k in BOUND_KINDS] == pytest.approx([2, 8, 16 / 3, 36], rel=1e-13)


def test_bounds_table_empty_and_monotone():
    assert bounds_table(2, math.pi, 0.0, 0) == []
    rows = bounds_table(1, 1.0, 0.0, 3)
    assert len(rows) == 3
    for k in BOUND_KINDS:
        assert rows[0][k] < rows[1][k] < rows[2][k]


def test_csv_layouts():
    rows = bounds_table(2, math.pi, 0.0, 2)
    buf = io.StringIO()
    write_bounds_csv(rows, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "m,kroger_sum,kroger_eig,plate_sum,plate_eig"
    assert lines[1].startswith("1,2.00000000000e+00,8.00000000000e+00,5.33333333333e+00,3.60000000000e+01")
    buf = io.StringIO()
    write_bounds_csv(rows, buf, long=True)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "m,bound_kind,value"
    assert len(lines) == 1 + 2 * 4
    assert lines[1] == "1,kroger_sum,2.00000000000e+00"
