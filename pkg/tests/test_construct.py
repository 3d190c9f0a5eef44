from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from nsystems.construct import (AlternatingSpec, BuildError, ScheduleSpec, build_alternating_system,
                                build_max_system, default_lacunary, lacunary, nsystem_targets)
from nsystems.core import evaluate, validate

MARGIN = [F(1), F(6), F(42), F(336), F(3024), F(30240)]


def test_default_lacunary_examples():
    assert default_lacunary(1, 4) == [1, 2, 6, 24]
    assert default_lacunary(1, 1) == [1]


@given(st.fractions(min_value=F(1, 100), max_value=100), st.integers(3, 20))
def test_lacunary_ratios_increase(l0, count):
    for rule in ("factorial", "exp"):
        l = lacunary(l0, count, rule)
        ratios = [b / a for a, b in zip(l, l[1:])]
        assert all(a < b for a, b in zip(ratios, ratios[1:]))
        assert l[0] == l0


def test_schedule_spec_sequence_length():
    assert len(ScheduleSpec(F(1), epochs=14).sequence()) == 15


def test_step0_meeting():
    s, sched = build_max_system(3, MARGIN[:3])
    assert sched.r[1] == 2
    assert evaluate(s.components[0], 2) == -1


def test_top_component_untouched_until_first_fall():
    s, sched = build_max_system(3, MARGIN)
    assert evaluate(s.components[2], sched.l[1]) == sched.l[1]


@pytest.mark.parametrize("l", [MARGIN, default_lacunary(1, 12)])
def test_w_formula_every_epoch(l):
    s, sched = build_max_system(3, l)
    for i, ws in enumerate(sched.w):
        p2, p3 = evaluate(s.components[1], sched.l[i]), evaluate(s.components[2], sched.l[i])
        assert ws[0] == sched.l[i] + (p3 - p2) / 3
        assert ws[0] / sched.l[i] - 1 == (p3 - p2) / (3 * sched.l[i])


def test_w_over_l_shrinks_toward_one():
    s, sched = build_max_system(3, default_lacunary(1, 15))
    gaps = [ws[0] / l - 1 for ws, l in zip(sched.w, sched.l)]
    tail = gaps[4:]
    assert all(a > b for a, b in zip(tail, tail[1:]))
    assert tail[-1] < F(1, 10)


def test_margin_schedule_interleaves_strictly():
    _, sched = build_max_system(3, MARGIN)
    assert sched.interleaved(strict=True)
    assert all(sched.r[t] < 2 * sched.l[t - 1] for t in range(2, len(sched.r)))


def test_factorial_schedule_ties_at_l1():
    # r_1 = 2 l_0 = l_1: a zero-length fall, tolerated
    s, sched = build_max_system(3, default_lacunary(1, 8))
    assert sched.r[1] == sched.l[1] == 2
    assert sched.interleaved()
    assert not sched.interleaved(strict=True)
    assert validate(s, sched).valid


def test_rejects_l_below_r():
    with pytest.raises(BuildError, match="epoch"):
        build_max_system(3, [F(1), F(3, 2), F(10)])


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        build_max_system(2, MARGIN)
    with pytest.raises(ValueError):
        build_max_system(3, [F(1), F(1)])
    with pytest.raises(ValueError):
        build_max_system(3, [F(1)])


def test_r_positions_are_p1_maxima_and_p2_minima():
    s, sched = build_max_system(3, MARGIN)
    p1, p2 = s.components[0], s.components[1]

    def local(c, first, second):
        return {c.breakpoints[k][0] for k in range(1, len(c.slopes))
                if c.slopes[k - 1] == first and c.slopes[k] == second}

    assert local(p1, 1, -2) == set(sched.r[1:])
    assert local(p2, -2, 1) == set(sched.r[1:])


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 6), st.integers(2, 9), st.integers(1, 5))
def test_every_maximal_build_is_valid(n, count, l0):
    s, sched = build_max_system(n, lacunary(F(l0), count, "exp"))
    assert validate(s, sched).valid
    assert sched.interleaved()
    for i, ws in enumerate(sched.w):
        assert sched.l[i] <= ws[0]
        assert all(a <= b for a, b in zip(ws, ws[1:]))
        assert ws[-1] <= sched.r[i + 1]


def test_slope_set_generalizes():
    s, _ = build_max_system(5, lacunary(F(1), 9, "exp"))
    slopes = {m for c in s.components for m in c.slopes}
    assert slopes == {F(-4), F(1)}


@pytest.fixture(scope="module")
def alternating():
    return build_alternating_system(AlternatingSpec())


def test_alternating_is_valid(alternating):
    s, sched, _ = alternating
    assert validate(s, sched).valid


def test_zigzag_nodes_descend_by_half_step(alternating):
    s, sched, _ = alternating
    for nodes, D in zip(sched.b, sched.zigzag_step):
        base = [evaluate(c, nodes[0]) for c in s.components[1:]]
        assert base[0] == base[1]
        for m, b in enumerate(nodes):
            for c, v0 in zip(s.components[1:], base):
                assert evaluate(c, b) - v0 == -m * D / 2


def test_qtilde_small(alternating):
    _, sched, _ = alternating
    spec = AlternatingSpec()
    assert all(r <= 3 * spec.D / (2 * spec.l0) for r in sched.qtilde_ratio)


def test_phase_boundary_eps_decrease(alternating):
    _, sched, _ = alternating
    eps = sched.boundary_eps
    assert all(a > b for a, b in zip(eps, eps[1:]))


def test_phase_marks(alternating):
    _, sched, marks = alternating
    kinds = [m.kind for m in marks]
    assert kinds == ["maximal"] + ["intermediate", "maximal"] * 3
    qs = [m.q for m in marks]
    assert qs == sorted(qs)


def test_alternating_rejects_large_d():
    with pytest.raises(BuildError):
        build_alternating_system(AlternatingSpec(D=F(1, 2)))
    with pytest.raises(BuildError):
        build_alternating_system(AlternatingSpec(n=4))


def test_targets():
    assert nsystem_targets("maximal", 3) == ([-2, F(-1, 2), 1], [F(-1, 2), 1, 1])
    assert nsystem_targets("alternating", 3) == ([-2, F(-1, 2), 0], [0, 1, 1])
    assert nsystem_targets("maximal", 4) == ([-3, -1, 1, 1], [-1, 1, 1, 1])
    with pytest.raises(ValueError):
        nsystem_targets("maximal", 2)
