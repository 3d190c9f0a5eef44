import math
import warnings
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from nsystems import lattice
from nsystems.construct import build_max_system
from nsystems.lattice import (BoxParam, BudgetError, LatticePoint, Sample, XiVector, L_samples,
                              compare_to_system, full_enumeration_minima, liouville_xi, point_norm,
                              samples_from_csv, samples_to_csv, successive_minima)

XI1 = liouville_xi(3, 1)
XI2 = liouville_xi(3, 2)


def test_liouville_examples():
    assert XI1.xi == (F(1, 10), F(1, 100))
    assert XI2.xi == (F(1, 10) + F(1, 10 ** 6), F(1, 100) + F(1, 10 ** 24))
    assert all(v < F(1, 5) for v in liouville_xi(4, 2).xi)


def test_liouville_budget():
    with pytest.raises(BudgetError, match="digits"):
        liouville_xi(3, 5)
    with pytest.raises(BudgetError):
        liouville_xi(3, 4, digit_budget=40319)
    assert liouville_xi(3, 4, digit_budget=40320).xi[1].denominator == 10 ** math.factorial(8)


def test_xi_json_round_trip():
    assert XiVector.from_json(XI2.to_json()) == XI2


def test_box_param():
    assert BoxParam(10).q_float == pytest.approx(math.log(10))
    with pytest.raises(ValueError):
        BoxParam(1)


def test_point_norm_examples():
    b = BoxParam(10)
    p = LatticePoint.from_xy(XI1, 1, (0, 0))
    assert p.embedded == (1, F(1, 10), F(1, 100))
    assert point_norm(p, b) == 1
    for y in [(1, 0), (0, -1), (2, 3)]:
        assert point_norm(LatticePoint.from_xy(XI1, 0, y), b) >= 10


@given(st.integers(-50, 50), st.integers(-6, 6), st.integers(-3, 3), st.integers(1, 9),
       st.fractions(min_value=F(8, 7), max_value=200, max_denominator=7))
def test_point_norm_homogeneous(x, y1, y2, k, T):
    b = BoxParam(T)
    p = LatticePoint.from_xy(XI2, x, (y1, y2))
    q = LatticePoint.from_xy(XI2, k * x, (k * y1, k * y2))
    assert point_norm(q, b) == k * point_norm(p, b)
    assert p.consistent(XI2)


def test_minima_terms1_T10():
    r = successive_minima(XI1, BoxParam(10), 1000)
    assert r.lambdas[0] <= 1
    assert r.certified
    assert r.lambdas == [1, 1, 1]


def check_result(r, xi, b):
    assert r.lambdas == sorted(r.lambdas)
    for lam, w in zip(r.lambdas, r.witnesses):
        assert w.consistent(xi)
        assert point_norm(w, b) == lam
        # exact membership in lam K(q)
        z0, z1, z2 = w.embedded
        assert abs(z0) <= lam * b.T ** 2 and abs(z1) <= lam / b.T and abs(z2) <= lam / b.T
    m = [list(w.coords) for w in r.witnesses]
    det = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
           + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
    assert det != 0


@pytest.mark.parametrize("xi", [XI1, XI2])
@pytest.mark.parametrize("T", [10, 100, F(1000)])
def test_certified_minima_bounds(xi, T):
    b = BoxParam(T)
    r = successive_minima(xi, b, 10 ** 9)
    assert r.certified
    check_result(r, xi, b)
    prod = r.lambdas[0] * r.lambdas[1] * r.lambdas[2]
    assert r.lambdas[0] <= 1
    assert F(1, 6) <= prod <= 1


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([XI1, XI2]), st.fractions(min_value=F(6, 5), max_value=100, max_denominator=5),
       st.integers(1, 50))
def test_matches_full_enumeration(xi, T, x_max):
    b = BoxParam(T)
    r = successive_minima(xi, b, x_max)
    check_result(r, xi, b)
    assert r.lambdas == full_enumeration_minima(xi, b, x_max)


@pytest.mark.parametrize("T", [10, 37, 100, 1000])
def test_float_prefilter_agrees_with_int64_path(T, monkeypatch):
    b = BoxParam(T)
    exact = successive_minima(XI1, b, 10 ** 9)
    monkeypatch.setattr(lattice._Scaled, "int64_ok", lambda self, hi: False)
    if T == 1000:
        # the float path does not tile residues; keep the run short
        assert successive_minima(XI1, b, 10 ** 6).lambdas[:1] == exact.lambdas[:1]
        return
    assert successive_minima(XI1, b, 10 ** 9).lambdas == exact.lambdas


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([XI1, XI2]), st.integers(2, 300), st.integers(1, 4))
def test_certification_is_monotone(xi, T, factor):
    b = BoxParam(T)
    r = successive_minima(xi, b, 10 ** 9)
    assert r.certified
    bigger = successive_minima(xi, b, r.search_bound * factor + 1)
    assert bigger.lambdas == r.lambdas


def test_partial_result_when_budget_small():
    r = successive_minima(XI2, BoxParam(1000), 10)
    assert not r.certified
    assert r.certified_count < 3
    assert len(r.lambdas) == 3


def test_oracle_n3_only():
    with pytest.raises(NotImplementedError):
        successive_minima(liouville_xi(4, 1), BoxParam(10), 10)


def test_l_samples_properties():
    samples = L_samples(XI2, [F(5), F(10), F(20), F(100)], 10 ** 7)
    for smp in samples:
        assert smp.L[0] <= smp.L[1] <= smp.L[2]
        if smp.certified:
            assert -math.log(6) - 1e-12 <= sum(smp.L) <= 1e-12
    with pytest.raises(ValueError):
        L_samples(XI2, [F(10), F(5)], 100)


def test_samples_csv_round_trip():
    samples = L_samples(XI1, [F(10), F(100)], 10 ** 6)
    back = samples_from_csv(samples_to_csv(samples))
    assert [s.lambdas for s in back] == [s.lambdas for s in samples]
    assert [s.certified for s in back] == [s.certified for s in samples]
    assert [s.L for s in back] == [s.L for s in samples]


def test_compare_to_own_trace_is_zero():
    s, _ = build_max_system(3, [F(1), F(6), F(42)])
    samples = []
    for q in (F(1, 2), F(3), F(10), F(41)):
        vals = s.values(F(float(q)))
        samples.append(Sample(F(2), float(q), tuple(float(v) for v in vals), (), True, 3, 0))
    dev, per = compare_to_system(samples, s)
    assert dev == 0
    assert len(per) == 4


def test_compare_skips_outside_horizon():
    s, _ = build_max_system(3, [F(1), F(6)])
    smp = Sample(F(2), 100.0, (0.0, 0.0, 0.0), (), True, 3, 0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        dev, per = compare_to_system([smp], s)
    assert per == [] and caught
