import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfric.errors import NotScattering, UnsupportedOrder
from qfric.response import CorrelationFactor, Temperature
from qfric.trajectory import PerturbedLine, SampledTrajectory, Trajectory, static, uniform_line
from qfric.work import closest_approach, scattering_window, work_order, work_sobolev_form

L1 = CorrelationFactor(1, 2.1e-8, "test", Temperature(0.01))
L2 = CorrelationFactor(2, -0.125, "test", Temperature(0.01))
L3 = CorrelationFactor(3, -3.2e-5, "test", Temperature(0.01))
BUMPY = PerturbedLine((0.2, 0.05, 0.0), (0.1, 0.3, 1.0), (((0.3, 0.1, 0.2), 0.5, 2.0), ((0.0, 0.2, -0.1), -1.0, 1.5)))


@st.composite
def scattering_paths(draw):
    speed = draw(st.floats(0.05, 0.5))
    b = draw(st.floats(0.5, 2.0))
    if draw(st.booleans()):
        return uniform_line(speed, b)
    amp = draw(st.tuples(*[st.floats(-0.3, 0.3)] * 3))
    return PerturbedLine((speed, 0.0, 0.0), (0.0, 0.0, b), ((amp, draw(st.floats(-2, 2)), draw(st.floats(1, 4))),))


@dataclass(frozen=True)
class Circle(Trajectory):
    radius: float = 1.0

    def derivative(self, t, k):
        t = np.asarray(t, float)
        phase = t + k * math.pi / 2
        return self.radius * np.stack([np.cos(phase), np.sin(phase), np.zeros_like(t)], axis=-1)


def test_closest_approach_of_lines():
    tc, b = closest_approach(uniform_line(0.3, 1.5))
    assert tc == pytest.approx(0.0, abs=1e-6) and b == pytest.approx(1.5, rel=1e-12)
    tc, b = closest_approach(BUMPY)
    grid = np.linspace(tc - 0.5, tc + 0.5, 2001)
    assert b <= np.min(np.linalg.norm(BUMPY.r(grid), axis=1)) + 1e-12


def test_scattering_window_reaches_far_field():
    lo, hi, tc, b = scattering_window(BUMPY)
    for t in (lo, hi):
        assert np.linalg.norm(BUMPY.r(t)) == pytest.approx(50 * b, rel=1e-9)


def test_non_scattering_paths_are_refused():
    with pytest.raises(NotScattering):
        scattering_window(Circle())
    with pytest.raises(NotScattering):
        work_order(static((0, 0, 1.0)), 1, L1)
    short = SampledTrajectory.from_function(uniform_line(0.3, 1.0), np.linspace(-20, 20, 41))
    with pytest.raises(NotScattering):
        work_order(short, 1, L1)


def test_even_order_does_no_work():
    rep = work_order(uniform_line(0.3, 1.0), 2, L2)
    assert rep.theorem_verdict == "even_zero"
    assert abs(rep.total_work) < 1e-6 * rep.abs_power


def test_first_order_dissipates_everywhere():
    rep = work_order(uniform_line(0.3, 1.0), 1, L1)
    assert rep.total_work < 0 and rep.theorem_verdict == "odd_sign_ok"
    assert np.all(rep.power_trace[1] <= 0)


def test_third_order_has_local_gain_but_dissipates():
    rep = work_order(uniform_line(0.3, 1.0), 3, L3)
    assert rep.total_work < 0 and rep.theorem_verdict == "odd_sign_ok"
    assert np.max(rep.power_trace[1]) > 0


def test_tail_is_small():
    for n, lam in ((1, L1), (2, L2), (3, L3)):
        rep = work_order(BUMPY, n, lam)
        assert rep.tail_estimate < 1e-3 * max(abs(rep.total_work), rep.abs_power)


@settings(max_examples=5)
@given(scattering_paths())
def test_work_theorems_on_random_paths(tr):
    w2 = work_order(tr, 2, L2)
    assert abs(w2.total_work) < 1e-4 * w2.abs_power
    w1 = work_order(tr, 1, L1)
    assert w1.total_work < 0 and np.all(w1.power_trace[1] <= 0)
    w3 = work_order(tr, 3, L3)
    assert w3.total_work < 0


def test_sign_follows_correlation_factor():
    flipped = CorrelationFactor(3, 3.2e-5, "test", Temperature(0.0))
    rep = work_order(uniform_line(0.3, 1.0), 3, flipped)
    assert rep.total_work > 0 and rep.theorem_verdict == "odd_sign_ok"


def test_reversed_path_dissipates_equally():
    forward = work_order(BUMPY, 1, L1).total_work
    backward = work_order(BUMPY.reversed(), 1, L1).total_work
    assert backward == pytest.approx(forward, rel=1e-8)


@pytest.mark.parametrize("n,lam,tol", [(1, L1, 1e-4), (3, L3, 1e-3)])
@pytest.mark.parametrize("path", ["line", "bumpy"])
def test_squared_form_agrees(n, lam, tol, path):
    tr = uniform_line(0.3, 1.0) if path == "line" else BUMPY
    assert work_sobolev_form(tr, n, lam) == pytest.approx(work_order(tr, n, lam).total_work, rel=tol)


def test_squared_form_guards():
    with pytest.raises(UnsupportedOrder):
        work_sobolev_form(uniform_line(0.3, 1.0), 2, L2)
    with pytest.raises(ValueError):
        work_sobolev_form(uniform_line(0.3, 1.0), 1, L3)
    with pytest.raises(UnsupportedOrder):
        work_order(uniform_line(0.3, 1.0), 4, L3)


def test_explicit_window_checked():
    with pytest.raises(NotScattering):
        work_order(uniform_line(0.3, 1.0), 1, L1, window=(-10.0, 10.0))
    full = work_order(uniform_line(0.3, 1.0), 1, L1)
    wide = work_order(uniform_line(0.3, 1.0), 1, L1, window=(-400.0, 400.0))
    assert wide.total_work == pytest.approx(full.total_work, rel=1e-6)


def test_sampled_path_work():
    line = uniform_line(0.3, 1.0)
    times = np.linspace(-250, 250, 5001)
    sampled = SampledTrajectory.from_function(line, times)
    assert work_order(sampled, 1, L1).total_work == pytest.approx(work_order(line, 1, L1).total_work, rel=1e-3)


def test_squared_form_on_sampled_path():
    sampled = SampledTrajectory.from_function(uniform_line(0.3, 1.0), np.linspace(-250, 250, 5001))
    assert work_sobolev_form(sampled, 1, L1) == pytest.approx(work_order(sampled, 1, L1).total_work, rel=1e-3)
