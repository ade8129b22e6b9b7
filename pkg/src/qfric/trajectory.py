"""Prescribed relative centre-of-mass trajectories r(t) and their time derivatives."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import hermite
from scipy.interpolate import make_interp_spline


class Trajectory:
    """Base class. Subclasses implement ``derivative(t, k)`` for k = 0..5.

    Times may be scalars or arrays; positions come back with a trailing axis
    of length 3.  ``t_start``/``t_end`` bound the domain (infinite for
    analytic paths).
    """

    t_start: float = -math.inf
    t_end: float = math.inf

    def derivative(self, t, k: int) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError

    def r(self, t) -> np.ndarray:
        return self.derivative(t, 0)

    def v(self, t) -> np.ndarray:
        return self.derivative(t, 1)

    def a(self, t) -> np.ndarray:
        return self.derivative(t, 2)

    def j(self, t) -> np.ndarray:
        return self.derivative(t, 3)

    def reversed(self) -> "Trajectory":
        return Reversed(self)


def _times(t) -> np.ndarray:
    return np.asarray(t, dtype=float)


@dataclass(frozen=True)
class UniformLine(Trajectory):
    """``r(t) = offset + velocity * t``; acceleration and jerk vanish exactly."""

    velocity: tuple[float, float, float]
    offset: tuple[float, float, float]

    def derivative(self, t, k: int) -> np.ndarray:
        t = _times(t)
        vel = np.asarray(self.velocity, float)
        if k == 0:
            return np.asarray(self.offset, float) + t[..., None] * vel
        if k == 1:
            return np.broadcast_to(vel, t.shape + (3,)).copy()
        return np.zeros(t.shape + (3,))


def uniform_line(v: float, z0: float) -> UniformLine:
    """Straight pass along x at impact parameter z0: ``r = (v t, 0, z0)``."""
    return UniformLine((float(v), 0.0, 0.0), (0.0, 0.0, float(z0)))


def static(position) -> UniformLine:
    return UniformLine((0.0, 0.0, 0.0), tuple(float(x) for x in position))


@dataclass(frozen=True)
class PerturbedLine(Trajectory):
    """Straight line plus Gaussian bumps ``sum_p c_p exp(-((t - t_p)/w_p)^2)``.

    Smooth to all orders and still a scattering path, so it exercises the
    acceleration and jerk terms while keeping |r| -> infinity at both ends.
    """

    velocity: tuple[float, float, float]
    offset: tuple[float, float, float]
    bumps: tuple[tuple[tuple[float, float, float], float, float], ...] = ()

    def derivative(self, t, k: int) -> np.ndarray:
        t = _times(t)
        out = UniformLine(self.velocity, self.offset).derivative(t, k)
        for amp, center, width in self.bumps:
            u = (t - center) / width
            # d^k/dt^k exp(-u^2) = (-1)^k H_k(u) exp(-u^2) / width^k
            coeffs = np.zeros(k + 1)
            coeffs[k] = 1.0
            shape = (-1) ** k * hermite.hermval(u, coeffs) * np.exp(-(u**2)) / width**k
            out = out + shape[..., None] * np.asarray(amp, float)
        return out


@dataclass(frozen=True)
class Reversed(Trajectory):
    """Time-reversed copy: ``r'(t) = r(-t)``."""

    base: Trajectory

    @property
    def t_start(self) -> float:  # type: ignore[override]
        return -self.base.t_end

    @property
    def t_end(self) -> float:  # type: ignore[override]
        return -self.base.t_start

    def derivative(self, t, k: int) -> np.ndarray:
        return (-1) ** k * self.base.derivative(-_times(t), k)

    def reversed(self) -> Trajectory:
        return self.base


@dataclass(frozen=True, eq=False)
class SampledTrajectory(Trajectory):
    """Quintic spline through sampled positions.

    Third and fourth derivatives are pinned to zero at both ends, the quintic
    analogue of natural end conditions; the interpolant is C^4 so jerk is
    continuous.
    """

    times: np.ndarray
    positions: np.ndarray
    _spline: object = field(init=False, repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, float)
        p = np.asarray(self.positions, float)
        if t.ndim != 1 or p.shape != (t.size, 3):
            raise ValueError("need times of shape (N,) and positions of shape (N, 3)")
        if t.size < 8:
            raise ValueError("a quintic spline needs at least 8 samples")
        if np.any(np.diff(t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        bc = ([(3, np.zeros(3)), (4, np.zeros(3))], [(3, np.zeros(3)), (4, np.zeros(3))])
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "positions", p)
        object.__setattr__(self, "_spline", make_interp_spline(t, p, k=5, bc_type=bc))

    @property
    def t_start(self) -> float:  # type: ignore[override]
        return float(self.times[0])

    @property
    def t_end(self) -> float:  # type: ignore[override]
        return float(self.times[-1])

    def derivative(self, t, k: int) -> np.ndarray:
        t = _times(t)
        if np.any((t < self.times[0]) | (t > self.times[-1])):
            raise ValueError("time outside the sampled window")
        return self._spline(t, nu=k) if k <= 5 else np.zeros(t.shape + (3,))

    def reversed(self) -> "SampledTrajectory":
        return SampledTrajectory(-self.times[::-1], self.positions[::-1])

    @classmethod
    def from_function(cls, traj: Trajectory, times) -> "SampledTrajectory":
        times = np.asarray(times, float)
        return cls(times, traj.r(times))


def read_trajectory(path: str | Path) -> SampledTrajectory:
    """Read whitespace-separated ``t x y z`` rows (``#`` lines are comments)."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 4:
        raise ValueError(f"{path}: expected 4 columns (t x y z), got {data.shape[1]}")
    return SampledTrajectory(data[:, 0], data[:, 1:])


def write_trajectory(path: str | Path, traj: SampledTrajectory) -> None:
    rows = np.column_stack([traj.times, traj.positions])
    np.savetxt(path, rows, header="t x y z", comments="# ", fmt="%.17g")
