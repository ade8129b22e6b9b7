"""Electrostatic dipole Green tensor and its gradient contractions.

Reduced units throughout: 4*pi*eps0 = 1, so ``G(r) = (3 rr/r^2 - I) / r^3``.

The contraction tensors

    Gc[i, j1, ..., jn](r) = (d_i G_lm(r)) (d_j1 ... d_jn G_lm(r))

have rank n + 1 and scale as r**-(n + 7).  For n <= 3 they are fixed by a
small set of dimensionless coefficients (kappa) on a basis of tensors built
from the unit vector and the Kronecker delta.  ``green_contraction_numeric``
evaluates them from finite differences and is used to check the closed forms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DegenerateSamples, StepUnderflow, UnsupportedOrder, ZeroSeparation

EPS = np.finfo(float).eps

# kappa_0 .. kappa_9 for the closed-form contractions.  Obtained from the
# contraction definition at axis-aligned points (e.g. Gc_yyx(x) = -72/x^9,
# Gc_xxxx(y) = -270/y^10) plus the Laplacian constraints; the finite-difference
# fit reproduces them to ~1e-7.
KAPPA = {
    0: (-18.0,),
    1: (36.0, 18.0),
    2: (-180.0, 108.0, -72.0),
    3: (1350.0, -450.0, 450.0, -90.0),
}
KAPPA_NAMES = {
    0: ("k0",),
    1: ("k1", "k2"),
    2: ("k3", "k4", "k5"),
    3: ("k6", "k7", "k8", "k9"),
}


def _as_point(r) -> tuple[np.ndarray, float]:
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValueError("position has non-finite components")
    norm = float(np.linalg.norm(r))
    if norm == 0.0:
        raise ZeroSeparation("Green tensor evaluated at zero separation")
    return r, norm


def green(r) -> np.ndarray:
    """Dipole kernel ``(3 r_l r_m / r^2 - delta_lm) / r^3``.

    Accepts a single point of shape (3,) or a stack of shape (..., 3) and
    returns matching (..., 3, 3) arrays.
    """
    r = np.asarray(r, dtype=float)
    r2 = np.einsum("...i,...i->...", r, r)
    if np.any(r2 == 0.0):
        raise ZeroSeparation("Green tensor evaluated at zero separation")
    inv_r3 = r2 ** -1.5
    outer = r[..., :, None] * r[..., None, :]
    return (3.0 * outer / r2[..., None, None] - np.eye(3)) * inv_r3[..., None, None]


def green_gradient(r) -> np.ndarray:
    """Analytic gradient ``out[..., i, l, m] = d_i G_lm``.

    The result is fully symmetric in (i, l, m) because the dipole field is
    curl free and G is symmetric.
    """
    r = np.asarray(r, dtype=float)
    r2 = np.einsum("...i,...i->...", r, r)
    if np.any(r2 == 0.0):
        raise ZeroSeparation("Green tensor evaluated at zero separation")
    inv_r5 = r2 ** -2.5
    inv_r7 = r2 ** -3.5
    eye = np.eye(3)
    term = (
        eye[:, :, None] * r[..., None, None, :]
        + eye[:, None, :] * r[..., None, :, None]
        + eye[None, :, :] * r[..., :, None, None]
    )
    rrr = r[..., :, None, None] * r[..., None, :, None] * r[..., None, None, :]
    return 3.0 * term * inv_r5[..., None, None, None] - 15.0 * rrr * inv_r7[..., None, None, None]


@dataclass(frozen=True)
class GreenContraction:
    order: int
    components: np.ndarray
    point: np.ndarray

    def scaled(self) -> np.ndarray:
        """Components multiplied by r**(n+7), i.e. the dimensionless angular part."""
        return self.components * np.linalg.norm(self.point) ** (self.order + 7)


@dataclass
class KappaSet:
    """Symmetry-basis coefficients, keyed ``k0`` ... ``k9``."""

    values: dict[str, float] = field(default_factory=dict)
    residual: float = 0.0

    def __getitem__(self, key: str) -> float:
        return self.values[key]

    def constraint_residuals(self) -> dict[str, float]:
        """Laplacian constraints; every entry should vanish."""
        v = self.values
        out = {}
        if {"k3", "k4", "k5"} <= v.keys():
            out["k3+3k4+2k5"] = v["k3"] + 3 * v["k4"] + 2 * v["k5"]
        if {"k6", "k7", "k8"} <= v.keys():
            out["k6+5k7+2k8"] = v["k6"] + 5 * v["k7"] + 2 * v["k8"]
        if {"k8", "k9"} <= v.keys():
            out["k8+5k9"] = v["k8"] + 5 * v["k9"]
        return out

    @classmethod
    def closed(cls) -> "KappaSet":
        values = {}
        for n, names in KAPPA_NAMES.items():
            values.update(dict(zip(names, KAPPA[n])))
        return cls(values=values, residual=0.0)


def symmetry_basis(rhat: np.ndarray, n: int) -> list[np.ndarray]:
    """Basis tensors (rank n+1) whose kappa-weighted sum gives r**(n+7) * Gc."""
    u = np.asarray(rhat, dtype=float)
    d = np.eye(3)
    if n == 0:
        return [u.copy()]
    if n == 1:
        return [np.einsum("i,k->ik", u, u), d.copy()]
    if n == 2:
        return [
            np.einsum("i,k,n->ikn", u, u, u),
            np.einsum("kn,i->ikn", d, u),
            np.einsum("ik,n->ikn", d, u) + np.einsum("in,k->ikn", d, u),
        ]
    if n == 3:
        b7 = (
            np.einsum("i,kn,s->ikns", u, d, u)
            + np.einsum("i,ks,n->ikns", u, d, u)
            + np.einsum("i,ns,k->ikns", u, d, u)
        )
        b8 = (
            np.einsum("ik,n,s->ikns", d, u, u)
            + np.einsum("in,k,s->ikns", d, u, u)
            + np.einsum("is,k,n->ikns", d, u, u)
        )
        b9 = (
            np.einsum("ik,ns->ikns", d, d)
            + np.einsum("in,ks->ikns", d, d)
            + np.einsum("is,kn->ikns", d, d)
        )
        return [np.einsum("i,k,n,s->ikns", u, u, u, u), b7, b8, b9]
    raise UnsupportedOrder(f"no symmetry basis for n={n}; use green_contraction_numeric")


def green_contraction_closed(r, n: int) -> GreenContraction:
    if n not in KAPPA:
        raise UnsupportedOrder(f"closed form available for n <= 3, got n={n}")
    r, norm = _as_point(r)
    basis = symmetry_basis(r / norm, n)
    comp = sum(k * b for k, b in zip(KAPPA[n], basis)) / norm ** (n + 7)
    return GreenContraction(order=n, components=comp, point=r)


# --- finite differences -------------------------------------------------------


@lru_cache(maxsize=None)
def central_weights(m: int) -> tuple[tuple[int, ...], tuple[float, ...]]:
    """Second-order central stencil for the m-th derivative on integer offsets."""
    if m == 0:
        return (0,), (1.0,)
    p = (m + 1) // 2
    offsets = np.arange(-p, p + 1)
    k = np.arange(len(offsets))
    vander = offsets[None, :].astype(float) ** k[:, None]
    rhs = np.zeros(len(offsets))
    rhs[m] = math.factorial(m)
    w = np.linalg.solve(vander, rhs)
    return tuple(int(o) for o in offsets), tuple(float(x) for x in w)


def _mixed_partial_fd(func, r: np.ndarray, counts: tuple[int, int, int], h: float) -> np.ndarray:
    """Tensor-product central difference of ``func`` for one multi-index."""
    stencils = [central_weights(m) for m in counts]
    pts = []
    weights = []
    for (ox, wx), (oy, wy), (oz, wz) in itertools.product(*[list(zip(*s)) for s in stencils]):
        pts.append(r + h * np.array([ox, oy, oz], dtype=float))
        weights.append(wx * wy * wz)
    vals = func(np.array(pts))
    return np.tensordot(np.array(weights), vals, axes=(0, 0)) / h ** sum(counts)


def _richardson_partial(func, r, counts, h) -> np.ndarray:
    """Two-level Richardson extrapolation (removes h^2 and h^4 error terms)."""
    d0 = _mixed_partial_fd(func, r, counts, h)
    d1 = _mixed_partial_fd(func, r, counts, h / 2)
    d2 = _mixed_partial_fd(func, r, counts, h / 4)
    e0 = (4 * d1 - d0) / 3
    e1 = (4 * d2 - d1) / 3
    return (16 * e1 - e0) / 15


def default_step(norm: float, n: int) -> float:
    return norm * EPS ** (1.0 / (n + 2))


def green_derivatives_numeric(r, n: int, step: float | None = None) -> np.ndarray:
    """All n-th partial derivatives of G: ``out[j1, ..., jn, l, m]``."""
    r, norm = _as_point(r)
    if n == 0:
        return green(r)
    h = default_step(norm, n) if step is None else float(step)
    if h < 1e3 * EPS * norm:
        raise StepUnderflow(f"step {h:g} below 1e3 machine epsilons of |r|={norm:g}")
    out = np.zeros((3,) * n + (3, 3))
    for combo in itertools.combinations_with_replacement(range(3), n):
        counts = tuple(combo.count(ax) for ax in range(3))
        val = _richardson_partial(green, r, counts, h)
        for perm in set(itertools.permutations(combo)):
            out[perm] = val
    return out


def green_contraction_numeric(r, n: int, step: float | None = None) -> GreenContraction:
    if n < 0 or n > 5:
        raise UnsupportedOrder(f"numeric contraction supports 0 <= n <= 5, got n={n}")
    r, norm = _as_point(r)
    grad = green_derivatives_numeric(r, 1, step=step)
    if n == 0:
        comp = np.einsum("ilm,lm->i", grad, green(r))
    else:
        higher = green_derivatives_numeric(r, n, step=step)
        comp = np.einsum("ilm,...lm->i...", grad, higher)
    return GreenContraction(order=n, components=comp, point=r)


def fit_kappa(samples) -> KappaSet:
    """Least-squares projection of sampled contractions onto the symmetry basis.

    ``samples`` is an iterable of ``(r, GreenContraction)`` pairs of one order.
    The returned residual is ``|A k - b| / |b|`` over all components.
    """
    samples = list(samples)
    if len(samples) < 10:
        raise DegenerateSamples(f"need at least 10 sample points, got {len(samples)}")
    orders = {gc.order for _, gc in samples}
    if len(orders) != 1:
        raise ValueError(f"samples mix contraction orders {sorted(orders)}")
    n = orders.pop()
    rows, rhs = [], []
    for r, gc in samples:
        _, norm = _as_point(r)
        basis = symmetry_basis(np.asarray(r, float) / norm, n)
        rows.append(np.stack([b.ravel() for b in basis], axis=1))
        rhs.append(gc.components.ravel() * norm ** (n + 7))
    a = np.concatenate(rows)
    b = np.concatenate(rhs)
    coef, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < a.shape[1]:
        raise DegenerateSamples(f"design matrix rank {rank} < {a.shape[1]}")
    residual = float(np.linalg.norm(a @ coef - b) / np.linalg.norm(b))
    return KappaSet(values=dict(zip(KAPPA_NAMES[n], map(float, coef))), residual=residual)
