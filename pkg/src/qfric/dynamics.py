"""Dynamical vectors, the velocity-series force and the memory-kernel oracle.

The n-th force term factorises as ``F_n = D_n(r(t)) * Lambda_n`` with

    D_n = ((-1)^n / (2 n!)) (grad G_lm)(r(t)) d^n/dt^n G_lm(r(t)).

``d_vector`` evaluates D_n from the closed contraction tensors,
``d_vector_numeric`` by finite differences in time, and ``force_direct``
integrates the un-expanded memory kernel for comparison with the series.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize

from .errors import (
    MissingOrder,
    OrderMismatch,
    StepUnderflow,
    UnsupportedOrder,
    WindowTooShort,
    ZeroSeparation,
)
from .green_tensor import KAPPA, EPS, central_weights, green, green_contraction_closed, green_gradient
from .response import CorrelationFactor, LorentzModel, Temperature, memory_kernel
from .trajectory import Trajectory


@dataclass(frozen=True)
class ForceTerm:
    order: int
    value: np.ndarray
    D: np.ndarray
    Lambda: CorrelationFactor
    t: float


@dataclass(frozen=True)
class RegimeReport:
    eps_ret: float
    eps_dis: float
    tau_m_estimate: float
    non_retarded: bool
    perturbative: bool


def _lambda_value(lam) -> float:
    return float(lam.value) if isinstance(lam, CorrelationFactor) else float(lam)


def _state(traj: Trajectory, t: float):
    r = np.asarray(traj.r(t), float)
    if np.linalg.norm(r) == 0.0:
        raise ZeroSeparation(f"atoms coincide at t={t}")
    return r, np.asarray(traj.v(t), float), np.asarray(traj.a(t), float), np.asarray(traj.j(t), float)


def d_vector(traj: Trajectory, t: float, n: int, kinematic_terms: bool = True) -> np.ndarray:
    """D_n from the closed-form contraction tensors (n <= 3).

    ``kinematic_terms=False`` drops the acceleration and jerk pieces of
    D_2 and D_3, leaving the velocity-only part.
    """
    if n not in (0, 1, 2, 3):
        raise UnsupportedOrder(f"closed-form D available for n <= 3, got {n}")
    r, v, a, j = _state(traj, t)
    if n == 0:
        return 0.5 * green_contraction_closed(r, 0).components
    g1 = green_contraction_closed(r, 1).components
    if n == 1:
        return -0.5 * g1 @ v
    g2 = green_contraction_closed(r, 2).components
    if n == 2:
        out = np.einsum("ikn,k,n->i", g2, v, v)
        if kinematic_terms:
            out = out + g1 @ a
        return 0.25 * out
    g3 = green_contraction_closed(r, 3).components
    out = np.einsum("ikns,k,n,s->i", g3, v, v, v)
    if kinematic_terms:
        out = out + 3 * np.einsum("ikn,k,n->i", g2, v, a) + g1 @ j
    return -out / 12.0


def _time_scale(traj: Trajectory, t: float) -> float:
    r, v, a, j = _state(traj, t)
    rn = np.linalg.norm(r)
    rate = max(np.linalg.norm(v) / rn, math.sqrt(np.linalg.norm(a) / rn), (np.linalg.norm(j) / rn) ** (1 / 3))
    return 1.0 / rate if rate > 0 else rn


def _time_derivative(func, t: float, m: int, h: float) -> np.ndarray:
    offsets, weights = central_weights(m)

    def stencil(step):
        vals = func(t + step * np.asarray(offsets, float))
        return np.tensordot(np.asarray(weights), vals, axes=(0, 0)) / step**m

    d0, d1, d2 = stencil(h), stencil(h / 2), stencil(h / 4)
    e0, e1 = (4 * d1 - d0) / 3, (4 * d2 - d1) / 3
    return (16 * e1 - e0) / 15


def d_vector_numeric(traj: Trajectory, t: float, n: int, step: float | None = None) -> np.ndarray:
    """D_n with d^n G/dt^n from Richardson-extrapolated central differences in t."""
    if not 0 <= n <= 5:
        raise UnsupportedOrder(f"numeric D supports 0 <= n <= 5, got {n}")
    r = _state(traj, t)[0]
    grad = green_gradient(r)
    if n == 0:
        gn = green(r)
    else:
        tau = _time_scale(traj, t)
        # Richardson removes h^2 and h^4, so balance h^6 against eps / h^n
        h = tau * EPS ** (1.0 / (n + 6)) if step is None else float(step)
        if h < 1e3 * EPS * max(abs(t), tau):
            raise StepUnderflow(f"time step {h:g} too small at t={t:g}")
        gn = _time_derivative(lambda tt: green(traj.r(tt)), t, n, h)
    return (-1) ** n / (2 * math.factorial(n)) * np.einsum("ilm,lm->i", grad, gn)


def force_order(traj: Trajectory, t: float, n: int, lam: CorrelationFactor, kinematic_terms: bool = True) -> ForceTerm:
    if lam.order != n:
        raise OrderMismatch(f"correlation factor has order {lam.order}, force term needs {n}")
    d = d_vector(traj, t, n, kinematic_terms)
    return ForceTerm(n, d * lam.value, d, lam, float(t))


def force_closed(n: int, r, v, lam) -> np.ndarray:
    """Closed forms for uniform motion.

    n = 1: ``-9 [2 (v.rh) rh + v] Lambda / r^8``
    n = 3: ``-(45/2) [(5 (v.rh)^2 - v^2) v + 5 (v.rh)((v.rh)^2 - v^2) rh] Lambda / r^10``
    """
    r = np.asarray(r, float)
    v = np.asarray(v, float)
    rn = float(np.linalg.norm(r))
    if rn == 0.0:
        raise ZeroSeparation("force evaluated at zero separation")
    lv = _lambda_value(lam)
    rh = r / rn
    c = float(v @ rh)
    v2 = float(v @ v)
    if n == 1:
        return -9.0 * (2 * c * rh + v) * lv / rn**8
    if n == 3:
        return -22.5 * ((5 * c * c - v2) * v + 5 * c * (c * c - v2) * rh) * lv / rn**10
    raise UnsupportedOrder(f"closed force available for n in (1, 3), got {n}")


def gain_polynomial(kappa3=None) -> np.ndarray:
    """Coefficients (in s = sin theta, descending powers of s^2) of F_3.v for uniform motion.

    Contracting v_i v_k v_n v_s with the rank-4 basis gives
    ``k6 s^4 + 3 (k7 + k8) s^2 + 3 k9`` (in units of v^4 / r^10), up to the
    factor ``-Lambda_3 / 12``.
    """
    k6, k7, k8, k9 = KAPPA[3] if kappa3 is None else kappa3
    return np.array([k6, 3 * (k7 + k8), 3 * k9], float)


def gain_angle(kappa3=None) -> float:
    """Angle (degrees) between r and the normal to v beyond which F_3.v > 0 when Lambda_3 < 0."""
    roots = np.roots(gain_polynomial(kappa3))
    s2 = [x.real for x in roots if abs(x.imag) < 1e-12 and 0 < x.real <= 1]
    if len(s2) != 1:
        raise ValueError(f"no unique root of the gain polynomial in (0, 1]: {roots}")
    return math.degrees(math.asin(math.sqrt(s2[0])))


def force_series(traj: Trajectory, t: float, n_max: int, lambdas) -> np.ndarray:
    if not 0 <= n_max <= 3:
        raise UnsupportedOrder(f"series available up to n_max = 3, got {n_max}")
    lam_by_order = {lam.order: lam for lam in lambdas}
    missing = [n for n in range(n_max + 1) if n not in lam_by_order]
    if missing:
        raise MissingOrder(f"no correlation factor for orders {missing}")
    return sum(force_order(traj, t, n, lam_by_order[n]).value for n in range(n_max + 1))


# --- memory-kernel oracle -----------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


@lru_cache(maxsize=8)
def _kernel_grid(model_a: LorentzModel, model_b: LorentzModel, theta: float, window: float, panel: float):
    """Gauss-Legendre nodes on [0, window] and the weights times K(s).

    The first panel is split geometrically towards s = 0 where K has a weak
    s^3 log s singularity.
    """
    edges = [0.0] + [panel * 2.0**-k for k in range(30, 0, -1)]
    n_panels = int(math.ceil(window / panel))
    edges += list(panel * np.arange(1, n_panels + 1))
    edges = np.asarray(edges)
    edges[-1] = window
    lo, hi = edges[:-1, None], edges[1:, None]
    half = (hi - lo) / 2
    s = (lo + half * (_GL_NODES + 1)).ravel()
    w = (half * _GL_WEIGHTS).ravel()
    k = memory_kernel(model_a, model_b, s, Temperature(theta))
    s.setflags(write=False)
    wk = w * k
    wk.setflags(write=False)
    return s, wk


def kernel_moment(model_a: LorentzModel, model_b: LorentzModel, n: int, temperature, cutoff: float = 1e-14) -> float:
    """``Int_0^W s^n K(s) ds`` on the oracle grid (equals Lambda_n up to truncation)."""
    theta = temperature.theta if isinstance(temperature, Temperature) else float(temperature)
    window, panel = _window(model_a, model_b, cutoff)
    s, wk = _kernel_grid(model_a, model_b, theta, window, panel)
    return float(np.sum(s**n * wk))


def _window(model_a, model_b, cutoff: float) -> tuple[float, float]:
    gmin = min(float(model_a.gammas.min()), float(model_b.gammas.min()))
    wmax = max(float(model_a.omegas.max()), float(model_b.omegas.max()))
    return 2 * math.log(1 / cutoff) / gmin, 0.25 / wmax


def force_direct(
    traj: Trajectory,
    t: float,
    model_a: LorentzModel,
    model_b: LorentzModel,
    temperature,
    cutoff: float = 1e-14,
) -> np.ndarray:
    """Un-expanded force ``F_i = (1/2) d_i G_lm(r(t)) Int_0^W G_lm(r(t - s)) K(s) ds``.

    The history window W ends where the slowest envelope exp(-gamma s / 2)
    drops below ``cutoff`` or at the trajectory start, whichever is first.
    """
    theta = temperature.theta if isinstance(temperature, Temperature) else float(temperature)
    gmin = min(float(model_a.gammas.min()), float(model_b.gammas.min()))
    window, panel = _window(model_a, model_b, cutoff)
    available = t - traj.t_start
    if available < 30.0 / gmin:
        raise WindowTooShort(f"only {available:g} of history before t={t:g}; need >= {30.0 / gmin:g}")
    window = min(window, available)
    s, wk = _kernel_grid(model_a, model_b, theta, float(window), panel)
    pos = traj.r(t - s)
    _check_no_collision(traj, t, s, pos)
    g = green(pos).reshape(len(s), 9)
    # pairwise summation along a contiguous axis keeps the round-off at ~log(N) eps
    hist = np.ascontiguousarray((g * wk[:, None]).T).sum(axis=1).reshape(3, 3)
    grad = green_gradient(np.asarray(traj.r(t), float))
    return 0.5 * np.einsum("ilm,lm->i", grad, hist)


def _check_no_collision(traj: Trajectory, t: float, s: np.ndarray, pos: np.ndarray, rel_tol: float = 1e-6) -> None:
    """Refine the closest node-to-origin distance; G(r(t - s)) is not integrable through r = 0."""
    dist = np.linalg.norm(pos, axis=1)
    i = int(np.argmin(dist))
    lo, hi = s[max(i - 1, 0)], s[min(i + 1, s.size - 1)]
    res = optimize.minimize_scalar(lambda x: float(np.linalg.norm(traj.r(t - x))), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-12 * max(1.0, hi)})
    closest = min(float(res.fun), float(dist[i]))
    if closest <= rel_tol * float(np.linalg.norm(traj.r(t))):
        raise ZeroSeparation(f"trajectory passes within {closest:g} of the other atom inside the memory window")


def regime_check(v: float, r: float, omega0: float, c: float) -> RegimeReport:
    """Retardation and dispersion small parameters for a given speed and distance."""
    for name, x in (("v", v), ("r", r), ("omega0", omega0), ("c", c)):
        if not x > 0:
            raise ValueError(f"{name} must be positive, got {x}")
    nu0 = omega0 / (2 * math.pi)
    lam0 = 2 * math.pi * c / omega0
    eps_dis = v / (r * nu0)
    return RegimeReport(
        eps_ret=2 * v / c,
        eps_dis=eps_dis,
        tau_m_estimate=1.0 / omega0,
        non_retarded=r < lam0 / 2,
        perturbative=eps_dis < 0.1,
    )
