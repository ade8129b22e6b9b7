"""Lorentz polarizabilities, thermal correlators and correlation factors.

Conventions (hbar = 1, frequencies in a reference unit, Theta = kT/hbar):

* ``alpha(w) = sum_a (w_a a0/2) [1/(w + w_a + i g/2) - 1/(w - w_a + i g/2)]``
* ``eta(w) = 2 coth(w / 2 Theta) Im alpha(w)`` (``2 sgn(w) Im alpha`` at zero
  temperature).
* The correlation factor of order n is the symmetrised moment

      Lambda_n = ((-i)^n / 2 pi) Int dw 1/2 [alpha_A^(n)(w) eta_B(w) + (A <-> B)]

  which equals ``Int_0^inf s^n K(s) ds`` for the time-domain memory kernel
  ``K(s) = [alpha_A(s) eta_B(s) + alpha_B(s) eta_A(s)] / 2``.

Odd orders at low temperature are tiny differences of huge resonance lobes,
so the frequency integrals are done in extended precision with mpmath.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy import integrate, special

from .errors import EvenOrder, NegativeLag, QuadratureNoConvergence, RegimeViolation, UnsupportedOrder

MAX_ORDER = 7


@dataclass(frozen=True)
class Transition:
    omega: float
    gamma: float
    alpha0: float


@dataclass(frozen=True)
class LorentzModel:
    """Sum of damped oscillator transitions ``(omega_a, gamma_a, alpha_a(0))``."""

    transitions: tuple[Transition, ...]

    def __post_init__(self):
        trs = tuple(t if isinstance(t, Transition) else Transition(*map(float, t)) for t in self.transitions)
        object.__setattr__(self, "transitions", trs)
        if not trs:
            raise ValueError("a Lorentz model needs at least one transition")
        for t in trs:
            if not (t.omega > 0 and t.gamma > 0 and t.alpha0 >= 0):
                raise ValueError(f"invalid transition {t}: need omega > 0, gamma > 0, alpha0 >= 0")
            if not t.gamma < t.omega:
                raise ValueError(f"transition {t} is not weakly damped (gamma >= omega)")

    @classmethod
    def single(cls, omega: float = 1.0, gamma: float = 0.01, alpha0: float = 1.0) -> "LorentzModel":
        return cls((Transition(float(omega), float(gamma), float(alpha0)),))

    @property
    def omegas(self) -> np.ndarray:
        return np.array([t.omega for t in self.transitions])

    @property
    def gammas(self) -> np.ndarray:
        return np.array([t.gamma for t in self.transitions])

    @property
    def alpha0s(self) -> np.ndarray:
        return np.array([t.alpha0 for t in self.transitions])

    def poles(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Residue weight c and the two lower half-plane poles of every transition."""
        w, g, a = self.omegas, self.gammas, self.alpha0s
        return w * a / 2, -w - 0.5j * g, w - 0.5j * g


@dataclass(frozen=True)
class Temperature:
    theta: float = 0.0

    def __post_init__(self):
        if not (self.theta >= 0 and math.isfinite(self.theta)):
            raise ValueError(f"temperature must be finite and >= 0, got {self.theta}")


@dataclass(frozen=True)
class CorrelationFactor:
    order: int
    value: float
    method: str
    temperature: Temperature
    error: float = 0.0


def _theta(temperature) -> float:
    if isinstance(temperature, Temperature):
        return temperature.theta
    return Temperature(float(temperature)).theta


def _temperature(temperature) -> Temperature:
    return temperature if isinstance(temperature, Temperature) else Temperature(float(temperature))


# --- frequency domain ---------------------------------------------------------


def alpha_derivative(model: LorentzModel, omega, n: int = 0):
    """n-th frequency derivative of alpha, differentiated pole by pole."""
    if n < 0:
        raise ValueError("derivative order must be non-negative")
    w = np.asarray(omega, dtype=complex)[..., None]
    if n == 0:
        # combined form alpha0 w_a^2 / (w_a^2 - (w + i g/2)^2): no cancellation in Im alpha near w = 0
        wa, g, a = model.omegas, model.gammas, model.alpha0s
        out = np.sum(a * wa**2 / (wa**2 - (w + 0.5j * g) ** 2), axis=-1)
        return out if out.ndim else complex(out)
    c, z1, z2 = model.poles()
    fac = (-1) ** n * math.factorial(n)
    out = fac * np.sum(c * ((w - z1) ** -(n + 1) - (w - z2) ** -(n + 1)), axis=-1)
    return out if out.ndim else complex(out)


def alpha(model: LorentzModel, omega):
    return alpha_derivative(model, omega, 0)


def alpha_I_deriv_zero(model: LorentzModel, order: int) -> float:
    """Weak-damping value of the odd derivative ``d^(2k+1) Im alpha / dw^(2k+1)`` at 0."""
    if order < 1 or order % 2 == 0:
        raise EvenOrder(f"order must be odd and positive, got {order}")
    w, g, a = model.omegas, model.gammas, model.alpha0s
    return float(math.factorial(order + 1) * np.sum(a / 2 * g / w ** (order + 1)))


def alpha_I_deriv_zero_exact(model: LorentzModel, order: int) -> float:
    """Same derivative from the exact pole expansion (no weak-damping approximation)."""
    return float(np.imag(alpha_derivative(model, 0.0, order)))


def eta_thermal(model: LorentzModel, omega, temperature):
    """Symmetrised dipole correlator from the fluctuation-dissipation theorem."""
    theta = _theta(temperature)
    w = np.asarray(omega, dtype=float)
    im = np.imag(alpha(model, w))
    if theta == 0.0:
        out = 2.0 * np.sign(w) * im
        return out if np.ndim(out) else float(out)
    x = w / (2 * theta)
    small = np.abs(w) < 1e-3 * theta
    slope = alpha_I_deriv_zero_exact(model, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        big = 2.0 / np.tanh(x) * im
        # coth x ~ 1/x + x/3 and Im alpha ~ slope * w near the origin
        ratio = np.where(w != 0, im / np.where(w == 0, 1.0, w), slope)
        series = 2.0 * (2 * theta + w * x / 3) * ratio
    out = np.where(small, series, big)
    return out if np.ndim(out) else float(out)


# --- correlation factors ------------------------------------------------------


def _mp_poles(model: LorentzModel):
    return [
        (mp.mpf(t.omega) * mp.mpf(t.alpha0) / 2, mp.mpc(-t.omega, -t.gamma / 2), mp.mpc(t.omega, -t.gamma / 2))
        for t in model.transitions
    ]


def _mp_alpha_n(poles, w, n: int):
    fac = (-1) ** n * mp.factorial(n)
    return fac * mp.fsum(c * ((w - z1) ** -(n + 1) - (w - z2) ** -(n + 1)) for c, z1, z2 in poles)


def _breakpoints(models, theta: float) -> list[float]:
    pts = set()
    for m in models:
        for t in m.transitions:
            pts.add(t.omega)
            for k in (1, 5, 20):
                for p in (t.omega - k * t.gamma, t.omega + k * t.gamma):
                    if p > 0:
                        pts.add(p)
    if theta > 0:
        for k in (1, 5, 20):
            pts.add(k * theta)
    return sorted(pts)


def _working_digits(models, n: int) -> int:
    wmax = max(float(m.omegas.max()) for m in models)
    gmin = min(float(m.gammas.min()) for m in models)
    return int(20 + (n + 3) * max(0.0, math.log10(wmax / gmin)))


def _quad(f, points, dps: int, tol: float, what: str):
    with mp.workdps(dps):
        val, err = mp.quad(f, [mp.mpf(0)] + [mp.mpf(p) for p in points] + [mp.inf], error=True)
    return val, float(abs(err))


def lambda_n(model_a: LorentzModel, model_b: LorentzModel, n: int, temperature, tol: float = 1e-6) -> CorrelationFactor:
    """Correlation factor of order n by extended-precision quadrature.

    The first order uses the integrated-by-parts form
    ``(1 / 2 pi Theta) Int_0^inf Im alpha_A Im alpha_B / sinh^2(w / 2 Theta) dw``,
    which is manifestly non-negative and vanishes identically at zero
    temperature.  Other orders fold the integrand onto w > 0 and keep the
    imaginary part as a consistency check.
    """
    if not 0 <= n <= MAX_ORDER:
        raise UnsupportedOrder(f"lambda_n supports 0 <= n <= {MAX_ORDER}, got {n}")
    temp = _temperature(temperature)
    theta = temp.theta
    models = (model_a, model_b)
    pts = _breakpoints(models, theta)
    dps = _working_digits(models, n)
    pa, pb = _mp_poles(model_a), _mp_poles(model_b)

    if n == 1:
        if theta == 0.0:
            return CorrelationFactor(1, 0.0, "quadrature", temp, 0.0)
        with mp.workdps(dps):
            th = mp.mpf(theta)

            def f(w):
                ga = mp.im(_mp_alpha_n(pa, w, 0))
                gb = mp.im(_mp_alpha_n(pb, w, 0))
                return ga * gb / mp.sinh(w / (2 * th)) ** 2

            val, err = _quad(f, pts, dps, tol, "lambda_1")
            with mp.workdps(dps):
                val = val / (2 * mp.pi * th)
            err = err / (2 * math.pi * theta)
        _check_convergence(float(val), err, tol, n)
        return CorrelationFactor(1, float(val), "quadrature", temp, err)

    with mp.workdps(dps):
        th = mp.mpf(theta)
        phase = (-1j) ** n
        phase = mp.mpc(round(phase.real), round(phase.imag))

        def kernel(w):
            return mp.coth(w / (2 * th)) if theta > 0 else mp.mpf(1)

        def f(w):
            k2 = 2 * kernel(w)
            eta_a = k2 * mp.im(_mp_alpha_n(pa, w, 0))
            eta_b = k2 * mp.im(_mp_alpha_n(pb, w, 0))
            sa = _mp_alpha_n(pa, w, n) + _mp_alpha_n(pa, -w, n)
            sb = _mp_alpha_n(pb, w, n) + _mp_alpha_n(pb, -w, n)
            return phase * (sa * eta_b + sb * eta_a) / 2

        val, err = _quad(f, pts, dps, tol, f"lambda_{n}")
        val = val / (2 * mp.pi)
        re, im = float(mp.re(val)), float(mp.im(val))
    err = err / (2 * math.pi)
    if abs(im) > 1e-10 * max(abs(re), 1e-300):
        raise QuadratureNoConvergence(f"lambda_{n}: imaginary residue {im:g} vs value {re:g}")
    _check_convergence(re, err, tol, n)
    return CorrelationFactor(n, re, "quadrature", temp, err)


def _check_convergence(value: float, err: float, tol: float, n: int) -> None:
    if value == 0.0 and err == 0.0:
        return
    if not math.isfinite(value) or err > tol * abs(value):
        raise QuadratureNoConvergence(f"lambda_{n}: error estimate {err:g} exceeds {tol:g} * |{value:g}|")


REGIMES = ("lowT_n1", "zeroT_n3", "zeroT_odd_general", "highT_n1")


def lambda_closed(regime: str, model_a: LorentzModel, model_b: LorentzModel, n: int, temperature) -> CorrelationFactor:
    """Asymptotic closed forms of the correlation factors.

    ``lowT_n1`` and the zero-temperature forms require Theta < 0.1 min(omega_a);
    ``highT_n1`` requires Theta >= 10 max(omega_a) and replaces coth(w/2Theta)
    by 2Theta/w inside the first-order integral.
    """
    temp = _temperature(temperature)
    theta = temp.theta
    wmin = min(float(m.omegas.min()) for m in (model_a, model_b))
    wmax = max(float(m.omegas.max()) for m in (model_a, model_b))
    if regime not in REGIMES:
        raise ValueError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    expected_n = {"lowT_n1": 1, "zeroT_n3": 3, "highT_n1": 1}.get(regime)
    if expected_n is not None and n != expected_n:
        raise ValueError(f"regime {regime} is defined for n={expected_n}, got n={n}")

    if regime == "highT_n1":
        if theta < 10 * wmax:
            raise RegimeViolation(f"highT_n1 needs Theta >= 10 max(omega) = {10 * wmax:g}, got {theta:g}")
        return _lambda1_high_t(model_a, model_b, temp)

    if theta >= 0.1 * wmin:
        raise RegimeViolation(f"{regime} needs Theta < 0.1 min(omega) = {0.1 * wmin:g}, got {theta:g}")
    if regime == "lowT_n1":
        value = 2 * math.pi * theta**2 / 3 * alpha_I_deriv_zero(model_a, 1) * alpha_I_deriv_zero(model_b, 1)
        return CorrelationFactor(1, value, "lowT_closed", temp)
    if regime == "zeroT_n3":
        value = -alpha_I_deriv_zero(model_a, 1) * alpha_I_deriv_zero(model_b, 1) / math.pi
        return CorrelationFactor(3, value, "zeroT_closed", temp)

    if n < 1 or n % 2 == 0:
        raise EvenOrder(f"zeroT_odd_general needs an odd order, got {n}")
    k = (n - 1) // 2
    total = 0.0
    for j in range(k):
        total += alpha_I_deriv_zero(model_a, 2 * k - 2 * j - 1) * alpha_I_deriv_zero(model_b, 2 * j + 1)
    return CorrelationFactor(n, (-1) ** k * total / math.pi, "zeroT_closed", temp)


def _lambda1_high_t(model_a, model_b, temp: Temperature) -> CorrelationFactor:
    # -(1/pi) Int f g d/dw(2 Theta / w) = (2 Theta / pi) Int f g / w^2
    models = (model_a, model_b)
    dps = _working_digits(models, 1)
    pa, pb = _mp_poles(model_a), _mp_poles(model_b)
    with mp.workdps(dps):

        def f(w):
            return mp.im(_mp_alpha_n(pa, w, 0)) * mp.im(_mp_alpha_n(pb, w, 0)) / w**2

        val, err = _quad(f, _breakpoints(models, 0.0), dps, 1e-6, "highT")
        val = 2 * temp.theta * val / mp.pi
    err = 2 * temp.theta * err / math.pi
    _check_convergence(float(val), err, 1e-6, 1)
    return CorrelationFactor(1, float(val), "highT_closed", temp, err)


def lambda_static_imaginary_axis(model_a: LorentzModel, model_b: LorentzModel, temperature) -> float:
    """Zeroth-order factor from the imaginary frequency axis.

    ``(1/pi) Int_0^inf alpha_A(i xi) alpha_B(i xi) d xi`` at zero temperature and
    the Matsubara sum ``2 Theta sum'_m alpha_A(i xi_m) alpha_B(i xi_m)`` above it.
    Independent of the real-axis quadrature used by :func:`lambda_n`.
    """
    theta = _theta(temperature)

    def prod(xi):
        return (alpha(model_a, 1j * xi) * alpha(model_b, 1j * xi)).real

    if theta == 0.0:
        scale = float(max(model_a.omegas.max(), model_b.omegas.max()))
        # compactify xi = scale * u / (1 - u) for a smooth finite-range integral
        val, _ = integrate.quad(
            lambda u: prod(scale * u / (1 - u)) * scale / (1 - u) ** 2, 0, 1, epsabs=0, epsrel=1e-12, limit=200
        )
        return float(val / math.pi)
    m = np.arange(0, 200000)
    xi = 2 * math.pi * theta * m
    terms = np.real(alpha(model_a, 1j * xi) * alpha(model_b, 1j * xi))
    terms[0] *= 0.5
    return float(2 * theta * math.fsum(terms))


# --- time domain --------------------------------------------------------------


def alpha_time(model: LorentzModel, tau):
    """Retarded response ``sum_a alpha_a0 omega_a exp(-gamma_a tau/2) sin(omega_a tau)``.

    Its one-sided Fourier transform reproduces :func:`alpha` exactly.
    """
    t = np.asarray(tau, dtype=float)
    if np.any(t < 0):
        raise NegativeLag("alpha_time is defined for tau >= 0")
    w, g, a = model.omegas, model.gammas, model.alpha0s
    tt = t[..., None]
    out = np.sum(a * w * np.exp(-g * tt / 2) * np.sin(w * tt), axis=-1)
    return out if out.ndim else float(out)


def eta_time(model: LorentzModel, tau, temperature, omega_max: float | None = None, tol: float = 1e-9):
    """Cosine transform ``(1/pi) Int_0^Omega eta(w) cos(w tau) dw`` with Omega >= 20 max(omega_a)."""
    wmax = float(model.omegas.max())
    cutoff = 20 * wmax if omega_max is None else max(float(omega_max), 20 * wmax)
    pts = [p for p in _breakpoints((model,), _theta(temperature)) if p < cutoff] + [cutoff]
    edges = [0.0] + pts
    scale = float(model.alpha0s.max() * wmax)

    def one(t):
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            with warnings.catch_warnings():
                warnings.simplefilter("error", integrate.IntegrationWarning)
                try:
                    if t == 0.0:
                        val, err = integrate.quad(
                            lambda w: eta_thermal(model, w, temperature),
                            lo,
                            hi,
                            epsabs=tol * scale * 1e-3,
                            epsrel=tol,
                            limit=400,
                        )
                    else:
                        val, err = integrate.quad(
                            lambda w: eta_thermal(model, w, temperature),
                            lo,
                            hi,
                            weight="cos",
                            wvar=abs(t),
                            epsabs=tol * scale * 1e-3,
                            epsrel=tol,
                            limit=400,
                        )
                except integrate.IntegrationWarning as exc:
                    raise QuadratureNoConvergence(f"eta_time at tau={t:g}: {exc}") from None
            total += val
        return total / math.pi

    t = np.asarray(tau, dtype=float)
    out = np.vectorize(one, otypes=[float])(t)
    return out if out.ndim else float(out)


def _exp_e1(z: np.ndarray) -> np.ndarray:
    """``exp(z) E1(z)`` for complex z off the negative real axis."""
    z = np.asarray(z, dtype=complex)
    out = np.empty_like(z)
    big = np.abs(z) > 40
    small = ~big
    if np.any(small):
        zs = z[small]
        out[small] = np.exp(zs) * special.exp1(zs)
    if np.any(big):
        zb = z[big]
        term = 1.0 / zb
        acc = term.copy()
        for k in range(1, 40):
            term = -term * k / zb
            acc += term
        out[big] = acc
    return out


def _residues(model: LorentzModel):
    """Partial fractions of Im alpha: ``sum_p r_p / (w - p)`` over four poles."""
    c, z1, z2 = model.poles()
    r = c / 2j
    poles = np.concatenate([z1, z2, np.conj(z1), np.conj(z2)])
    res = np.concatenate([r, -r, -r, r])
    return poles, res


def eta_time_residues(model: LorentzModel, tau, temperature, matsubara_terms: int = 4000):
    """Closed-form evaluation of the same cosine transform over the whole half line.

    Zero temperature uses exponential integrals of the four poles of Im alpha;
    finite temperature uses the lower half-plane residues (two oscillator
    poles plus the Matsubara series of coth) with an analytic tail for the
    truncated series.  Accurate to roughly machine precision, which the
    memory-kernel force needs.
    """
    theta = _theta(temperature)
    s = np.abs(np.asarray(tau, dtype=float))
    flat = s.ravel()
    poles, res = _residues(model)
    out = np.zeros(flat.shape, dtype=complex)
    if theta == 0.0:
        for p, r in zip(poles, res):
            ip = 1j * p
            with np.errstate(invalid="ignore", over="ignore"):
                plus = _exp_e1(ip * flat)
                minus = _exp_e1(-ip * flat)
            if p.real > 0 and p.imag > 0:
                plus = plus + 2j * np.pi * np.exp(ip * flat)
            if p.real > 0 and p.imag < 0:
                minus = minus - 2j * np.pi * np.exp(-ip * flat)
            out += r * 0.5 * (plus + minus)
        vals = (2 / np.pi) * out.real
        if np.any(flat == 0.0):
            vals[flat == 0.0] = _eta0_at_zero(model)
        return vals.reshape(s.shape) if s.ndim else float(vals[0])

    c, z1, z2 = model.poles()
    r = c / 2j
    for z, rz in ((z1, r), (z2, -r)):
        coth = 1 / np.tanh(z / (2 * theta))
        out += np.sum(2 * rz * coth * np.exp(-1j * np.outer(flat, z)), axis=1)
    # Matsubara poles at w = -i xi_m
    order = np.argsort(flat)
    sorted_s = flat[order]
    msum = np.zeros(flat.shape, dtype=complex)
    xi1 = 2 * np.pi * theta
    needed = np.where(sorted_s > 0, np.ceil(40 / (xi1 * np.maximum(sorted_s, 1e-300))), np.inf)
    needed = np.minimum(needed, matsubara_terms).astype(int)
    acc = np.zeros(sorted_s.shape, dtype=complex)
    mmax = int(needed.max()) if needed.size else 0
    for m in range(1, mmax + 1):
        active = needed >= m
        k = int(np.count_nonzero(active))
        if k == 0:
            break
        xi = xi1 * m
        ai = np.sum(res / (-1j * xi - poles))
        acc[:k] += 4 * theta * ai * np.exp(-xi * sorted_s[:k])
    # leading asymptotics Im alpha(-i xi) ~ -i A / xi^3 for the truncated remainder
    amp = float(np.sum(model.alpha0s * model.omegas**2 * model.gammas))
    mstart = needed + 0.5
    x = xi1 * mstart * sorted_s
    tail = 4 * theta * (-1j) * amp / xi1**3 * special.expn(3, x) / mstart**2
    acc += tail
    msum[order] = acc
    out += msum
    vals = (-1j * out).real
    return vals.reshape(s.shape) if s.ndim else float(vals[0])


def _eta0_at_zero(model: LorentzModel) -> float:
    # E1 diverges at zero lag; the transform itself is (2/pi) Int_0^inf Im alpha dw
    pts = _breakpoints((model,), 0.0)
    total = 0.0
    for lo, hi in zip([0.0] + pts, pts + [np.inf]):
        val, _ = integrate.quad(lambda w: float(np.imag(alpha(model, w))), lo, hi, limit=400, epsabs=0, epsrel=1e-13)
        total += val
    return 2 * total / np.pi


def memory_kernel(model_a: LorentzModel, model_b: LorentzModel, s, temperature) -> np.ndarray:
    """``K(s) = [alpha_A(s) eta_B(s) + alpha_B(s) eta_A(s)] / 2`` for s >= 0."""
    s = np.asarray(s, dtype=float)
    ea = eta_time_residues(model_a, s, temperature)
    eb = ea if model_b == model_a else eta_time_residues(model_b, s, temperature)
    return 0.5 * (alpha_time(model_b, s) * ea + alpha_time(model_a, s) * eb)
