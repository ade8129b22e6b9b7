"""Pairwise integration of the two-atom force over a dilute half-space.

Geometry: the medium fills z < 0, the moving atom sits at height z0 and moves
parallel to the surface.  A medium atom at in-plane distance rho and depth
z0 + z' below the moving atom contributes the pair force at
``r = (-rho cos phi, -rho sin phi, d)`` with ``d = z0 + z'``.  The net force is

    F_net = 2 pi N Int_z0^inf dd Int_0^inf rho drho <F>(rho, d)

where ``<F>`` is the azimuthal average.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .dynamics import _lambda_value
from .errors import QuadratureNoConvergence, UnsupportedOrder
from .green_tensor import KAPPA
from .response import LorentzModel, Temperature, lambda_n

N_PHI = 32


@dataclass(frozen=True)
class MediumConfig:
    number_density: float
    z0: float
    velocity: tuple[float, float, float]
    model_a: LorentzModel
    model_b: LorentzModel
    temperature: Temperature

    def __post_init__(self):
        if not self.number_density > 0:
            raise ValueError(f"number density must be positive, got {self.number_density}")
        if not self.z0 > 0:
            raise ValueError(f"gap must be positive, got {self.z0}")
        v = np.asarray(self.velocity, float)
        if v.shape != (3,) or not np.all(np.isfinite(v)):
            raise ValueError("velocity must be a finite 3-vector")
        if v[2] != 0.0:
            raise ValueError("velocity must be parallel to the surface (v_z = 0)")

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.velocity))


def pair_force_uniform(n: int, r, v, lam) -> np.ndarray:
    """n-th order force for uniform relative motion, vectorized over r (..., 3).

    Contracts the closed contraction tensors with v^n:
    ``F_n = (-1)^n / (2 n!) Gc_(i k...) v_k ... Lambda_n``.
    """
    if n not in KAPPA:
        raise UnsupportedOrder(f"uniform pair force available for n <= 3, got {n}")
    r = np.asarray(r, float)
    v = np.asarray(v, float)
    rn = np.linalg.norm(r, axis=-1, keepdims=True)
    u = r / rn
    c = np.sum(u * v, axis=-1, keepdims=True)
    v2 = float(v @ v)
    k = KAPPA[n]
    if n == 0:
        gv = k[0] * u
    elif n == 1:
        gv = k[0] * c * u + k[1] * v
    elif n == 2:
        gv = (k[0] * c * c + k[1] * v2) * u + 2 * k[2] * c * v
    else:
        gv = (k[0] * c**3 + 3 * k[1] * v2 * c) * u + (3 * k[2] * c * c + 3 * k[3] * v2) * v
    return (-1) ** n / (2 * math.factorial(n)) * gv * _lambda_value(lam) / rn ** (n + 7)


def _ring(rho: float, d: float, m: int = N_PHI) -> np.ndarray:
    phi = 2 * math.pi * np.arange(m) / m
    return np.stack([-rho * np.cos(phi), -rho * np.sin(phi), np.full(m, d)], axis=-1)


def angular_average_numeric(n: int, v, rho: float, d: float, lam, m: int = N_PHI) -> np.ndarray:
    """Azimuthal average by the periodic trapezoid rule.

    The pair force is a trigonometric polynomial of degree <= n + 1 in phi
    (|r| does not depend on phi), so m > n + 2 points integrate it exactly.
    """
    return pair_force_uniform(n, _ring(rho, d, m), v, lam).mean(axis=0)


def angular_average(n: int, v, rho: float, d: float, lam) -> np.ndarray:
    """Closed azimuthal averages for odd orders, v in the surface plane.

    n = 1: ``-9 Lambda v (1 + rho^2/R) / R^4``
    n = 3: ``-(45/2) Lambda v^2 v [15 rho^4 / (8 R^7) - 1/R^5]``
    with ``R = rho^2 + d^2``.  Both are parallel to v.
    """
    v = np.asarray(v, float)
    if v.shape != (3,) or v[2] != 0.0:
        raise ValueError("v must be a 3-vector in the surface plane")
    if rho < 0 or not d > 0:
        raise ValueError(f"need rho >= 0 and d > 0, got rho={rho}, d={d}")
    lv = _lambda_value(lam)
    big_r = rho * rho + d * d
    if n == 1:
        return -9.0 * lv * v * (1 + rho * rho / big_r) / big_r**4
    if n == 3:
        v2 = float(v @ v)
        return -22.5 * lv * v2 * v * (15 * rho**4 / (8 * big_r**7) - 1 / big_r**5)
    raise UnsupportedOrder(f"closed angular average available for n in (1, 3), got {n}; use angular_average_numeric")


def half_space_closed(cfg: MediumConfig, n: int, lam) -> np.ndarray:
    """Analytic value of the pair integral for odd orders.

    n = 1: ``-(3 pi / 4) N Lambda v / z0^5``;  n = 3: ``(45 pi / 64) N Lambda v^2 v / z0^7``.
    """
    v = np.asarray(cfg.velocity, float)
    lv = _lambda_value(lam)
    if n == 1:
        return -0.75 * math.pi * cfg.number_density * lv * v / cfg.z0**5
    if n == 3:
        return 45 * math.pi / 64 * cfg.number_density * lv * float(v @ v) * v / cfg.z0**7
    raise UnsupportedOrder(f"closed half-space force available for n in (1, 3), got {n}")


def half_space_force(
    cfg: MediumConfig,
    n: int,
    lam=None,
    averaging: str = "closed",
    epsrel: float = 1e-10,
) -> np.ndarray:
    """Net force on the moving atom from a numeric 2-D integral over the medium.

    Depth maps to u in [0, 1) via ``d = z0 / (1 - u)`` and the in-plane
    distance to psi in [0, pi/2) via ``rho = d tan psi``; both maps absorb
    the algebraic tails.  ``averaging="numeric"`` replaces the closed odd-order
    averages by the trapezoid average and also admits n = 0 and n = 2.
    ``lam`` defaults to the quadrature value for the configured models.
    """
    if averaging not in ("closed", "numeric"):
        raise ValueError(f"averaging must be 'closed' or 'numeric', got {averaging!r}")
    allowed = (1, 3) if averaging == "closed" else (0, 1, 2, 3)
    if n not in allowed:
        raise UnsupportedOrder(f"half-space force with {averaging} averaging supports n in {allowed}, got {n}")
    if lam is None:
        lam = lambda_n(cfg.model_a, cfg.model_b, n, cfg.temperature)
    v = np.asarray(cfg.velocity, float)
    z0 = cfg.z0
    average = angular_average if averaging == "closed" else angular_average_numeric

    def inner(u: float) -> np.ndarray:
        d = z0 / (1 - u)
        jac_d = z0 / (1 - u) ** 2

        def ring(psi: float) -> np.ndarray:
            rho = d * math.tan(psi)
            jac_rho = d / math.cos(psi) ** 2
            return average(n, v, rho, d, lam) * rho * jac_rho

        val, err = integrate.quad_vec(ring, 0.0, math.pi / 2, epsrel=epsrel, epsabs=0.0)
        return val * jac_d

    total, err = integrate.quad_vec(inner, 0.0, 1.0, epsrel=epsrel, epsabs=0.0)
    scale = float(np.max(np.abs(total)))
    if scale > 0 and err > 1e3 * epsrel * scale:
        raise QuadratureNoConvergence(f"half-space integral error {err:g} exceeds tolerance for |F| = {scale:g}")
    return 2 * math.pi * cfg.number_density * total


def loglog_slope(z0s, forces) -> float:
    """Least-squares slope of log|F| against log z0."""
    x = np.log(np.asarray(z0s, float))
    y = np.log(np.linalg.norm(np.atleast_2d(forces), axis=-1))
    return float(np.polyfit(x, y, 1)[0])
