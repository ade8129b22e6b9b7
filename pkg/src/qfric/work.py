"""Work done by individual force orders along scattering trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .dynamics import _time_derivative, d_vector
from .errors import NotScattering, UnsupportedOrder
from .green_tensor import EPS, green
from .response import CorrelationFactor
from .trajectory import Trajectory

SCATTER_FACTOR = 50.0


@dataclass(frozen=True)
class WorkReport:
    order: int
    total_work: float
    power_trace: tuple[np.ndarray, np.ndarray]
    tail_estimate: float
    abs_power: float
    theorem_verdict: str


def closest_approach(traj: Trajectory) -> tuple[float, float]:
    """Time and distance of closest approach."""
    lo, hi = traj.t_start, traj.t_end
    if math.isinf(lo) or math.isinf(hi):
        r0, v0 = traj.r(0.0), traj.v(0.0)
        speed2 = float(v0 @ v0)
        if speed2 == 0.0:
            raise NotScattering("trajectory is at rest at t = 0")
        tc = -float(r0 @ v0) / speed2
        span = 10 * np.linalg.norm(traj.r(tc)) / math.sqrt(speed2) + 10 * abs(tc)
        lo, hi = tc - span, tc + span
    grid = np.linspace(lo, hi, 4001)
    dist = np.linalg.norm(traj.r(grid), axis=-1)
    i = int(np.argmin(dist))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = optimize.minimize_scalar(lambda t: float(np.linalg.norm(traj.r(t))), bounds=(a, b), method="bounded",
                                   options={"xatol": 1e-12 * max(1.0, abs(b - a))})
    return float(res.x), float(res.fun)


def scattering_window(traj: Trajectory, factor: float = SCATTER_FACTOR) -> tuple[float, float, float, float]:
    """``(t_lo, t_hi, t_c, b)`` with |r(t_lo)|, |r(t_hi)| >= factor * b."""
    tc, b = closest_approach(traj)
    target = factor * b
    ends = []
    for sign, limit in ((-1, traj.t_start), (1, traj.t_end)):
        if not math.isinf(limit):
            if np.linalg.norm(traj.r(limit)) < target:
                raise NotScattering(
                    f"|r| = {np.linalg.norm(traj.r(limit)):g} at the window edge t = {limit:g} is below {factor:g} x closest approach {b:g}"
                )
            ends.append(limit)
            continue
        step = max(b / max(np.linalg.norm(traj.v(tc)), 1e-300), 1e-12)
        far = tc + sign * step
        n_expand = 0
        while np.linalg.norm(traj.r(far)) < target:
            step *= 2
            far = tc + sign * step
            n_expand += 1
            if n_expand > 200:
                raise NotScattering("|r| does not grow along the trajectory")
        ends.append(float(optimize.brentq(lambda t: np.linalg.norm(traj.r(t)) - target, tc, far, xtol=1e-12 * abs(far))))
    return ends[0], ends[1], tc, b


class _Simpson:
    """Adaptive Simpson rule that records every function value it uses."""

    def __init__(self, f, abs_tol: float, max_depth: int = 40):
        self.f = f
        self.tol = abs_tol
        self.max_depth = max_depth
        self.samples: dict[float, float] = {}

    def value(self, t: float) -> float:
        if t not in self.samples:
            self.samples[t] = self.f(t)
        return self.samples[t]

    def integrate(self, a: float, b: float, tol: float) -> float:
        fa, fb = self.value(a), self.value(b)
        m = 0.5 * (a + b)
        fm = self.value(m)
        whole = (b - a) / 6 * (fa + 4 * fm + fb)
        stack = [(a, b, fa, fm, fb, whole, tol, 0)]
        total = 0.0
        while stack:
            a, b, fa, fm, fb, whole, tol, depth = stack.pop()
            m = 0.5 * (a + b)
            lm, rm = 0.5 * (a + m), 0.5 * (m + b)
            flm, frm = self.value(lm), self.value(rm)
            left = (m - a) / 6 * (fa + 4 * flm + fm)
            right = (b - m) / 6 * (fm + 4 * frm + fb)
            delta = left + right - whole
            if depth >= self.max_depth or abs(delta) <= 15 * tol:
                total += left + right + delta / 15
            else:
                stack.append((m, b, fm, frm, fb, right, tol / 2, depth + 1))
                stack.append((a, m, fa, flm, fm, left, tol / 2, depth + 1))
        return total


def _panels(t_lo: float, t_hi: float, tc: float, scale: float) -> list[float]:
    """Breakpoints clustered around closest approach, geometric outwards."""
    pts = {t_lo, t_hi, min(max(tc, t_lo), t_hi)}
    k = 0
    while True:
        d = scale * 2.0 ** (k - 3)
        added = False
        for p in (tc - d, tc + d):
            if t_lo < p < t_hi:
                pts.add(p)
                added = True
        if not added and d > max(abs(t_hi - tc), abs(tc - t_lo)):
            break
        k += 1
    return sorted(pts)


def work_order(
    traj: Trajectory,
    n: int,
    lam: CorrelationFactor,
    rtol: float = 1e-10,
    zero_tol: float = 1e-6,
    window: tuple[float, float] | None = None,
) -> WorkReport:
    """Integrate the power F_n . v over a scattering window plus a power-law tail.

    The window extends until |r| reaches 50 x the closest approach on both
    sides (or is given explicitly and then checked).  Beyond it the power
    decays as |t|^-(n+7), which fixes the tail estimate ``P(T) T / (n+6)``.
    """
    if not 0 <= n <= 3:
        raise UnsupportedOrder(f"work available for n <= 3, got {n}")
    if lam.order != n:
        raise ValueError(f"correlation factor has order {lam.order}, expected {n}")
    t_lo, t_hi, tc, b = scattering_window(traj)
    if window is not None:
        t_lo, t_hi = window
        for t in (t_lo, t_hi):
            if np.linalg.norm(traj.r(t)) < SCATTER_FACTOR * b:
                raise NotScattering(f"window edge t = {t:g} is inside {SCATTER_FACTOR:g} x closest approach")
    lv = float(lam.value)

    def power(t: float) -> float:
        return float(d_vector(traj, t, n) @ traj.v(t)) * lv

    speed = max(float(np.linalg.norm(traj.v(tc))), 1e-300)
    edges = _panels(t_lo, t_hi, tc, b / speed)

    # first pass on |P| to set an absolute tolerance for the signed integral
    grid = np.concatenate([np.linspace(x, y, 9)[:-1] for x, y in zip(edges[:-1], edges[1:])] + [np.array([t_hi])])
    pv = np.array([power(t) for t in grid])
    abs_int = float(np.sum(0.5 * (np.abs(pv[1:]) + np.abs(pv[:-1])) * np.diff(grid)))

    simpson = _Simpson(power, 0.0)
    abs_tol = rtol * abs_int if abs_int > 0 else 0.0
    total = 0.0
    span = t_hi - t_lo
    for x, y in zip(edges[:-1], edges[1:]):
        total += simpson.integrate(x, y, abs_tol * (y - x) / span if abs_tol else 1e-300)
    ts = np.array(sorted(simpson.samples))
    ps = np.array([simpson.samples[t] for t in ts])
    abs_power_int = float(np.sum(0.5 * (np.abs(ps[1:]) + np.abs(ps[:-1])) * np.diff(ts)))

    tail = 0.0
    for t_edge in (t_lo, t_hi):
        tail += power(t_edge) * abs(t_edge - tc) / (n + 6)
    total += tail

    if n % 2 == 0:
        verdict = "even_zero" if abs(total) <= zero_tol * max(abs_power_int, 1e-300) else "violated"
    else:
        expected = np.sign((-1) ** ((n + 1) // 2) * lv)
        verdict = "odd_sign_ok" if np.sign(total) == expected else "violated"
    return WorkReport(n, float(total), (ts, ps), abs(tail), abs_power_int, verdict)


def work_sobolev_form(traj: Trajectory, n: int, lam: CorrelationFactor, rtol: float = 1e-9) -> float:
    """Odd-order work from the positive-definite form

        W_(2k+1) = (-1)^(k+1) Lambda / (2 (2k+1)!) Int sum_lm (d^(k+1) G_lm / dt^(k+1))^2 dt

    with time derivatives of G taken by finite differences along the path.
    """
    if n not in (1, 3):
        raise UnsupportedOrder(f"positive-definite work form implemented for n = 1, 3, got {n}")
    if lam.order != n:
        raise ValueError(f"correlation factor has order {lam.order}, expected {n}")
    k = (n - 1) // 2
    t_lo, t_hi, tc, b = scattering_window(traj)
    speed = max(float(np.linalg.norm(traj.v(tc))), 1e-300)
    tau = b / speed
    # two Richardson levels leave an h^6 error: balance it against eps / h^(k+1)
    h = tau * EPS ** (1.0 / (k + 7))

    def step(t: float) -> float:
        return h * max(1.0, np.linalg.norm(traj.r(t)) / b)

    def density(t: float) -> float:
        d = _time_derivative(lambda tt: green(traj.r(tt)), t, k + 1, step(t))
        return float(np.sum(d * d))

    # keep the difference stencil inside a finite sampled domain; the tail term covers the rest
    reach = (k + 2) // 2
    if not math.isinf(traj.t_start):
        t_lo = traj.t_start + 1.01 * reach * step(traj.t_start)
    if not math.isinf(traj.t_end):
        t_hi = traj.t_end - 1.01 * reach * step(traj.t_end)

    edges = _panels(t_lo, t_hi, tc, tau)
    grid = np.concatenate([np.linspace(x, y, 9)[:-1] for x, y in zip(edges[:-1], edges[1:])] + [np.array([t_hi])])
    dv = np.array([density(t) for t in grid])
    scale = float(np.sum(0.5 * (dv[1:] + dv[:-1]) * np.diff(grid)))
    simpson = _Simpson(density, 0.0)
    span = t_hi - t_lo
    total = sum(simpson.integrate(x, y, rtol * scale * (y - x) / span) for x, y in zip(edges[:-1], edges[1:]))
    # (d^(k+1) G)^2 ~ |t|^-(2k+8) in the asymptotic region
    for t_edge in (t_lo, t_hi):
        total += density(t_edge) * abs(t_edge - tc) / (2 * k + 7)
    return (-1) ** (k + 1) * float(lam.value) / (2 * math.factorial(n)) * total
