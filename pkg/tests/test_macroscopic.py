import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfric.dynamics import force_closed, force_order
from qfric.errors import UnsupportedOrder
from qfric.macroscopic import (
    MediumConfig,
    _ring,
    angular_average,
    angular_average_numeric,
    half_space_closed,
    half_space_force,
    loglog_slope,
    pair_force_uniform,
)
from qfric.response import CorrelationFactor, LorentzModel, Temperature
from qfric.trajectory import UniformLine

MODEL = LorentzModel.single()
T = Temperature(0.01)
coords = st.floats(-3, 3)


def cfg(z0=1.0, v=(0.3, 0.0, 0.0), density=1.0):
    return MediumConfig(density, z0, v, MODEL, MODEL, T)


@settings(max_examples=25)
@given(st.integers(0, 3), st.tuples(coords, coords, st.floats(0.3, 3)), st.tuples(coords, coords, coords))
def test_pair_force_matches_single_point(n, r, v):
    got = pair_force_uniform(n, np.array([r]), v, 0.7)[0]
    ref = force_order(UniformLine(v, r), 0.0, n, CorrelationFactor(n, 0.7, "test", T)).value
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-13 * np.linalg.norm(ref))
    if n in (1, 3):
        assert np.allclose(got, force_closed(n, r, v, 0.7), rtol=1e-12, atol=1e-13 * np.linalg.norm(ref))


def test_ring_second_moment_is_isotropic():
    # <rho_i rho_j> over the ring = rho^2 / 2 delta_ij in the plane
    pts = _ring(1.7, 0.4)
    moment = np.einsum("ki,kj->ij", pts[:, :2], pts[:, :2]) / len(pts)
    assert np.allclose(moment, 1.7**2 / 2 * np.eye(2), atol=1e-14)


@settings(max_examples=25)
@given(st.sampled_from([1, 3]), st.floats(0, 5), st.floats(0.2, 5), st.floats(0, 2 * math.pi), st.floats(0.05, 1))
def test_closed_average_matches_trapezoid(n, rho, d, angle, speed):
    v = (speed * math.cos(angle), speed * math.sin(angle), 0.0)
    closed = angular_average(n, v, rho, d, -1.3)
    numeric = angular_average_numeric(n, v, rho, d, -1.3)
    assert np.allclose(closed, numeric, rtol=1e-8, atol=1e-8 * np.max(np.abs(numeric)))


def test_closed_average_parallel_to_velocity():
    v = np.array([0.2, -0.1, 0.0])
    for n in (1, 3):
        f = angular_average(n, v, 0.8, 1.1, 1.0)
        assert abs(f[0] * v[1] - f[1] * v[0]) < 1e-15 * np.linalg.norm(f) and f[2] == 0.0


def test_trapezoid_converged_at_default_points():
    for n in range(4):
        a = angular_average_numeric(n, (0.3, 0.1, 0.0), 1.2, 0.7, 1.0)
        b = angular_average_numeric(n, (0.3, 0.1, 0.0), 1.2, 0.7, 1.0, m=256)
        assert np.allclose(a, b, rtol=1e-13, atol=1e-14 * np.max(np.abs(b)))


def test_half_space_odd_orders_match_closed():
    c = cfg()
    for n in (1, 3):
        for averaging in ("closed", "numeric"):
            got = half_space_force(c, n, lam=1.0, averaging=averaging)
            assert np.allclose(got, half_space_closed(c, n, 1.0), rtol=1e-8, atol=1e-12)


def test_half_space_first_order_prefactor():
    # F = -(3 pi / 4) N Lambda v / z0^5
    f = half_space_force(cfg(z0=2.0), 1, lam=1.0)
    assert f[0] == pytest.approx(-0.75 * math.pi * 0.3 / 2.0**5, rel=1e-9)


def test_half_space_static_attraction():
    # zeroth order: normal force -(3 pi / 4) N Lambda_0 / z0^4 pulls toward the surface
    f = half_space_force(cfg(z0=1.5), 0, lam=1.0, averaging="numeric")
    assert f[2] == pytest.approx(-0.75 * math.pi / 1.5**4, rel=1e-9)
    assert np.allclose(f[:2], 0, atol=1e-12 * abs(f[2]))


@pytest.mark.parametrize("n", [0, 2])
def test_even_orders_have_no_lateral_force(n):
    f = half_space_force(cfg(v=(0.2, 0.15, 0.0)), n, lam=1.0, averaging="numeric")
    assert np.linalg.norm(f[:2]) < 1e-12 * abs(f[2])


@pytest.mark.parametrize("n,power", [(1, 5), (3, 7)])
def test_gap_scaling(n, power):
    near = half_space_force(cfg(z0=1.0), n, lam=1.0)
    far = half_space_force(cfg(z0=2.0), n, lam=1.0)
    assert near[0] / far[0] == pytest.approx(2.0**power, rel=5e-3)
    gaps = [1.0, 2.0, 4.0]
    slope = loglog_slope(gaps, [half_space_force(cfg(z0=g), n, lam=1.0) for g in gaps])
    assert slope == pytest.approx(-power, abs=1e-6)


def test_linear_in_density_and_lambda():
    base = half_space_force(cfg(), 3, lam=1.0)
    assert np.allclose(half_space_force(cfg(density=2.5), 3, lam=1.0), 2.5 * base, rtol=1e-9)
    assert np.allclose(half_space_force(cfg(), 3, lam=-0.4), -0.4 * base, rtol=1e-9)


def test_local_gain_inside_dissipating_medium():
    v = np.array([0.3, 0.0, 0.0])
    lam = -1.0  # sign of the low-temperature third-order factor
    net = half_space_force(cfg(), 3, lam=lam)
    assert net @ v < 0
    rho, phi, d = np.meshgrid(np.linspace(0, 3, 13), np.linspace(0, 2 * math.pi, 24), np.linspace(1, 3, 5))
    r = np.stack([-rho * np.cos(phi), -rho * np.sin(phi), d], axis=-1).reshape(-1, 3)
    power = pair_force_uniform(3, r, v, lam) @ v
    assert np.any(power > 0) and np.any(power < 0)


def test_default_lambda_from_models():
    f = half_space_force(cfg(), 1)
    assert f[0] < 0


def test_medium_validation():
    with pytest.raises(ValueError):
        cfg(v=(0.1, 0.0, 0.1))
    with pytest.raises(ValueError):
        cfg(z0=0.0)
    with pytest.raises(ValueError):
        cfg(density=-1.0)
    with pytest.raises(UnsupportedOrder):
        half_space_force(cfg(), 2, lam=1.0)
    with pytest.raises(UnsupportedOrder):
        half_space_closed(cfg(), 0, 1.0)
    with pytest.raises(ValueError):
        half_space_force(cfg(), 1, lam=1.0, averaging="spline")
    assert cfg(v=(0.3, 0.4, 0.0)).speed == pytest.approx(0.5)
