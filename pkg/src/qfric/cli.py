"""Batch front-end: ``qfric <scenario> --config <path> --out <path> [--tol <x>]``.

Config files are flat ``key = value`` text with ``[section]`` headers and
``#`` comments.  Polarizability models are given as repeated
``transition = omega, gamma, alpha0`` lines, either in ``[model_a]`` /
``[model_b]`` sections or in a separate model file named by ``model_a =`` /
``model_b =`` under ``[run]``.

Units in CSV headers: ``L`` is the length unit (alpha0 in L^3), ``w0`` the
frequency unit; hbar = 1 and 4 pi eps0 = 1, so energies are in w0 and forces
in w0/L.

Exit codes: 0 success, 1 a validation check failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dynamics, green_tensor, macroscopic, response, work
from .errors import ConfigError, QfricError
from .response import CorrelationFactor, LorentzModel, Temperature, Transition
from .trajectory import PerturbedLine, read_trajectory, static, uniform_line

SCENARIOS = ("figure1", "lambda_table", "work_scan", "plate", "validate")


# --- config -------------------------------------------------------------------


def parse_config_text(text: str, source: str = "<config>") -> dict[str, list[tuple[str, str]]]:
    """Sections mapped to ordered ``(key, value)`` pairs; keys may repeat."""
    sections: dict[str, list[tuple[str, str]]] = {"run": []}
    current = "run"
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise ConfigError(f"{source}:{lineno}: malformed section header {raw.strip()!r}")
            current = line[1:-1].strip().lower()
            sections.setdefault(current, [])
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        sections[current].append((key.lower(), value))
    return sections


def _single(pairs: list[tuple[str, str]], key: str, section: str) -> str | None:
    values = [v for k, v in pairs if k == key]
    if len(values) > 1:
        raise ConfigError(f"[{section}] key {key!r} given {len(values)} times")
    return values[0] if values else None


def _floats(text: str, what: str) -> list[float]:
    try:
        out = [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ConfigError(f"{what}: cannot parse numbers from {text!r}") from exc
    if not out or not all(math.isfinite(x) for x in out):
        raise ConfigError(f"{what}: need finite numbers, got {text!r}")
    return out


def _model_from_pairs(pairs: list[tuple[str, str]], where: str) -> LorentzModel:
    transitions = []
    for key, value in pairs:
        if key != "transition":
            raise ConfigError(f"{where}: unknown key {key!r} (only 'transition' lines are allowed)")
        vals = _floats(value, f"{where} transition")
        if len(vals) != 3:
            raise ConfigError(f"{where}: transition needs 'omega, gamma, alpha0', got {value!r}")
        transitions.append(vals)
    try:
        return LorentzModel(tuple(Transition(*vals) for vals in transitions))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from exc


def read_model_file(path: str | Path) -> LorentzModel:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read model file {path}: {exc}") from exc
    sections = parse_config_text(text, str(path))
    pairs = [p for sec in sections.values() for p in sec]
    return _model_from_pairs(pairs, str(path))


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    model_a: LorentzModel = field(default_factory=LorentzModel.single)
    model_b: LorentzModel = field(default_factory=LorentzModel.single)
    temperature: Temperature = Temperature(0.01)
    speed: float | None = None
    gap: float = 1.0
    trajectory: Path | None = None
    out: Path | None = None
    tol: float | None = None
    options: dict[str, str] = field(default_factory=dict)

    def option_floats(self, key: str, default: list[float]) -> list[float]:
        return _floats(self.options[key], key) if key in self.options else list(default)

    def option_float(self, key: str, default: float) -> float:
        values = self.option_floats(key, [default])
        if len(values) != 1:
            raise ConfigError(f"{key}: expected a single number, got {self.options[key]!r}")
        return values[0]


RUN_KEYS = {"temperature", "speed", "gap", "trajectory", "tol", "model_a", "model_b"}


def load_config(scenario: str, path: str | Path | None, out: str | Path | None = None, tol: float | None = None) -> RunConfig:
    """Build a RunConfig from an optional file plus command-line overrides."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")
    sections: dict[str, list[tuple[str, str]]] = {"run": []}
    base = Path(".")
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        sections = parse_config_text(text, str(path))
        base = path.parent
    run = sections.get("run", [])
    for key, _ in run:
        if key not in RUN_KEYS:
            raise ConfigError(f"[run] unknown key {key!r}; allowed: {sorted(RUN_KEYS)}")

    def model(name: str) -> LorentzModel:
        ref = _single(run, name, "run")
        if ref is not None and name in sections:
            raise ConfigError(f"{name} given both as a file and as a [{name}] section")
        if ref is not None:
            return read_model_file(base / ref)
        if name in sections:
            return _model_from_pairs(sections[name], f"[{name}]")
        return LorentzModel.single()

    def number(key: str, default):
        raw = _single(run, key, "run")
        if raw is None:
            return default
        vals = _floats(raw, key)
        if len(vals) != 1:
            raise ConfigError(f"[run] {key}: expected one number, got {raw!r}")
        return vals[0]

    theta = number("temperature", 0.01)
    if theta < 0:
        raise ConfigError(f"temperature must be >= 0, got {theta}")
    speed = number("speed", None)
    if speed is not None and not speed > 0:
        raise ConfigError(f"speed must be positive, got {speed}")
    gap = number("gap", 1.0)
    if not gap > 0:
        raise ConfigError(f"gap must be positive, got {gap}")
    tol_value = number("tol", None) if tol is None else float(tol)
    if tol_value is not None and not tol_value > 0:
        raise ConfigError(f"tolerance must be positive, got {tol_value}")
    traj = _single(run, "trajectory", "run")
    options = {}
    for key, value in sections.get(scenario, []):
        if key in options:
            raise ConfigError(f"[{scenario}] key {key!r} repeated")
        options[key] = value
    return RunConfig(
        scenario=scenario,
        model_a=model("model_a"),
        model_b=model("model_b"),
        temperature=Temperature(theta),
        speed=speed,
        gap=gap,
        trajectory=None if traj is None else base / traj,
        out=None if out is None else Path(out),
        tol=tol_value,
        options=options,
    )


# --- CSV ----------------------------------------------------------------------


@dataclass(frozen=True)
class CsvTable:
    header: tuple[str, ...]
    rows: tuple[tuple, ...]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.header):
                raise ValueError(f"row has {len(row)} cells, header has {len(self.header)}")

    def column(self, name: str) -> list:
        i = self.header.index(name)
        return [row[i] for row in self.rows]

    def to_text(self) -> str:
        lines = [",".join(self.header)]
        lines += [",".join(_cell(x) for x in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text(), encoding="ascii", newline="\n")


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        # repr of a float is locale independent and round-trips exactly
        return repr(float(x)) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))
    text = str(x)
    if any(ch in text for ch in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


# --- scenarios ----------------------------------------------------------------


def _lambda(cfg: RunConfig, n: int, theta: float | None = None) -> CorrelationFactor:
    temp = cfg.temperature if theta is None else Temperature(theta)
    return response.lambda_n(cfg.model_a, cfg.model_b, n, temp, tol=cfg.tol or 1e-6)


def run_figure1(cfg: RunConfig) -> CsvTable:
    """Normalized F1_x and F3_x along the straight pass x = v t, z = z0.

    Without an explicit speed, v is chosen so that (Theta z0 / v)^2 equals
    ``theta_ratio`` (default 0.05).  The normalization is
    f = |F1(r = z0 z, v = v x)| = 9 v Lambda1 / z0^8.
    """
    theta = cfg.temperature.theta
    if theta <= 0:
        raise ConfigError("figure1 needs a finite temperature (F1 vanishes at Theta = 0)")
    z0 = cfg.gap
    ratio = cfg.option_float("theta_ratio", 0.05)
    if not ratio > 0:
        raise ConfigError(f"theta_ratio must be positive, got {ratio}")
    speed = cfg.speed if cfg.speed is not None else theta * z0 / math.sqrt(ratio)
    points = int(cfg.option_float("points", 241))
    x_max = cfg.option_float("x_max", 6.0)
    if points < 3 or not x_max > 0:
        raise ConfigError("figure1 needs points >= 3 and x_max > 0")
    lam1, lam3 = _lambda(cfg, 1), _lambda(cfg, 3)
    v = np.array([speed, 0.0, 0.0])
    f = float(np.linalg.norm(dynamics.force_closed(1, [0.0, 0.0, z0], v, lam1)))
    if f == 0.0:
        raise ConfigError("normalization force vanishes; check temperature and models")
    rows = []
    for x in np.linspace(-x_max, x_max, points).round(12):
        r = np.array([x * z0, 0.0, z0])
        f1 = dynamics.force_closed(1, r, v, lam1)[0]
        f3 = dynamics.force_closed(3, r, v, lam3)[0]
        rows.append((float(x), f1 / f, f3 / f, f1, f3))
    header = ("x/z0 [1]", "F1_x/f [1]", "F3_x/f [1]", "F1_x [w0/L]", "F3_x [w0/L]")
    return CsvTable(header, tuple(rows))


def _closed_or_nan(cfg: RunConfig, n: int, theta: float) -> tuple[float, str]:
    wmin = min(float(cfg.model_a.omegas.min()), float(cfg.model_b.omegas.min()))
    wmax = max(float(cfg.model_a.omegas.max()), float(cfg.model_b.omegas.max()))
    if n == 1:
        if theta == 0.0:
            return 0.0, "zero"
        if theta < 0.1 * wmin:
            regime = "lowT_n1"
        elif theta >= 10 * wmax:
            regime = "highT_n1"
        else:
            return math.nan, "none"
    else:
        if theta >= 0.1 * wmin:
            return math.nan, "none"
        regime = "zeroT_n3" if n == 3 else "zeroT_odd_general"
    return response.lambda_closed(regime, cfg.model_a, cfg.model_b, n, Temperature(theta)).value, regime


def _rel(a: float, b: float) -> float:
    if math.isnan(a) or math.isnan(b):
        return math.nan
    if b == 0.0:
        return 0.0 if a == 0.0 else math.inf
    return abs(a / b - 1)


def run_lambda_table(cfg: RunConfig) -> CsvTable:
    """Quadrature and closed-form Lambda_1, Lambda_3, Lambda_5 against Theta."""
    thetas = cfg.option_floats("thetas", [0.0, 0.005, 0.01, 0.02, 0.05])
    orders = [int(n) for n in cfg.option_floats("orders", [1, 3, 5])]
    for n in orders:
        if n < 1 or n % 2 == 0 or n > response.MAX_ORDER:
            raise ConfigError(f"lambda_table orders must be odd and <= {response.MAX_ORDER}, got {n}")
    if any(t < 0 for t in thetas):
        raise ConfigError("temperatures must be >= 0")
    unit = {n: f"[L^6 w0^{1 - n}]" for n in orders}
    header = ["theta [w0]"]
    for n in orders:
        header += [f"Lambda{n}_quad {unit[n]}", f"Lambda{n}_quad_err {unit[n]}", f"Lambda{n}_closed {unit[n]}",
                   f"Lambda{n}_closed_form [-]", f"Lambda{n}_rel_dev [1]"]
    header += ["ratio31_quad [w0^-2]", "ratio31_universal [w0^-2]", "ratio31_rel_dev [1]", "flags [-]"]
    rows = []
    for theta in thetas:
        row: list = [theta]
        quad: dict[int, float] = {}
        flags = []
        for n in orders:
            try:
                lam = _lambda(cfg, n, theta)
                quad[n] = lam.value
                err = lam.error if lam.error is not None else math.nan
            except QfricError as exc:
                quad[n], err = math.nan, math.nan
                flags.append(f"Lambda{n}:{type(exc).__name__}")
            closed, form = _closed_or_nan(cfg, n, theta)
            row += [quad[n], err, closed, form, _rel(quad[n], closed)]
        if 1 in quad and 3 in quad and theta > 0:
            ratio = quad[3] / quad[1] if quad[1] != 0 else math.nan
            universal = -3.0 / (2 * (math.pi * theta) ** 2)
            row += [ratio, universal, _rel(ratio, universal)]
        else:
            row += [math.nan, math.nan, math.nan]
        row.append(";".join(flags) if flags else "ok")
        rows.append(tuple(row))
    return CsvTable(tuple(header), tuple(rows))


def run_work_scan(cfg: RunConfig) -> CsvTable:
    """W1, W2, W3 and theorem verdicts over impact parameters and speeds.

    With ``trajectory`` set under [run], the scan is the single sampled path.
    """
    lams = {n: _lambda(cfg, n) for n in (1, 2, 3)}
    cases = []
    if cfg.trajectory is not None:
        try:
            cases.append((str(cfg.trajectory), math.nan, math.nan, read_trajectory(cfg.trajectory)))
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot load trajectory {cfg.trajectory}: {exc}") from exc
    else:
        speeds = cfg.option_floats("speeds", [cfg.speed] if cfg.speed else [0.1, 0.3])
        impacts = cfg.option_floats("impacts", [0.5, 1.0, 2.0])
        if any(s <= 0 for s in speeds) or any(b <= 0 for b in impacts):
            raise ConfigError("speeds and impacts must be positive")
        for v in speeds:
            for b in impacts:
                cases.append(("line", b, v, uniform_line(v, b)))
    header = ("path [-]", "impact [L]", "speed [L*w0]", "W1 [w0]", "W2 [w0]", "W3 [w0]",
              "W2_over_abs_power [1]", "W1_max_power [w0^2]", "W3_max_power [w0^2]", "W1_verdict [-]",
              "W2_verdict [-]", "W3_verdict [-]", "W3_positive_interval [-]", "W_sum [w0]", "W1_sobolev_rel_dev [1]",
              "flags [-]")
    rows = []
    for name, b, v, traj in cases:
        try:
            reports = {n: work.work_order(traj, n, lams[n], rtol=min(1e-8, cfg.tol or 1e-8)) for n in (1, 2, 3)}
            w_sob = work.work_sobolev_form(traj, 1, lams[1]) if lams[1].value != 0 else 0.0
            r1, r2, r3 = reports[1], reports[2], reports[3]
            rows.append((name, b, v, r1.total_work, r2.total_work, r3.total_work,
                         abs(r2.total_work) / r2.abs_power if r2.abs_power > 0 else 0.0,
                         float(np.max(r1.power_trace[1])), float(np.max(r3.power_trace[1])),
                         r1.theorem_verdict, r2.theorem_verdict, r3.theorem_verdict,
                         bool(np.max(r3.power_trace[1]) > 0),
                         r1.total_work + r2.total_work + r3.total_work,
                         _rel(w_sob, r1.total_work), "ok"))
        except QfricError as exc:
            nan = math.nan
            rows.append((name, b, v, nan, nan, nan, nan, nan, nan, "n/a", "n/a", "n/a", False, nan, nan,
                         f"{type(exc).__name__}: {exc}"))
    return CsvTable(header, tuple(rows))


PRINTED_PLATE = {1: -3 * math.pi / 5, 3: 21 * math.pi / 64}


def run_plate(cfg: RunConfig) -> CsvTable:
    """Half-space force against the gap for orders 0..3.

    Odd orders are compared with the analytic pair integral and with the
    reference prefactors -3 pi/5 (n = 1) and 21 pi/64 (n = 3); the fitted
    log-log slope is reported next to the z0^-(n+4) law and the alternative
    z0^-(n+5) law.
    """
    density = cfg.option_float("density", 1.0)
    if not density > 0:
        raise ConfigError(f"density must be positive, got {density}")
    gaps = cfg.option_floats("gaps", [1.0, 2.0, 4.0, 8.0])
    if any(g <= 0 for g in gaps) or len(gaps) < 2:
        raise ConfigError("plate needs at least two positive gaps")
    speed = cfg.speed if cfg.speed is not None else 0.3
    lams = {n: _lambda(cfg, n) for n in (0, 1, 2, 3)}
    header = ("order [-]", "z0 [L]", "F_x [w0/L]", "F_y [w0/L]", "F_z [w0/L]", "F_closed_x [w0/L]",
              "F_reference_x [w0/L]", "rel_dev_closed [1]", "rel_dev_reference [1]", "parity_leak [1]",
              "slope_fit [1]", "slope_law [1]", "slope_alt_law [1]")
    rows = []
    for n in (0, 1, 2, 3):
        forces = []
        for z0 in gaps:
            medium = macroscopic.MediumConfig(density, z0, (speed, 0.0, 0.0), cfg.model_a, cfg.model_b, cfg.temperature)
            averaging = "closed" if n % 2 else "numeric"
            force = macroscopic.half_space_force(medium, n, lams[n], averaging=averaging, epsrel=min(1e-10, cfg.tol or 1e-10))
            forces.append(force)
            if n % 2:
                closed = macroscopic.half_space_closed(medium, n, lams[n])[0]
                reference = PRINTED_PLATE[n] * density * lams[n].value * speed ** (n - 1) * speed / z0 ** (n + 4)
                leak = abs(force[2]) / max(abs(force[0]), 1e-300)
            else:
                closed = reference = math.nan
                leak = math.hypot(force[0], force[1]) / max(abs(force[2]), 1e-300)
            rows.append([n, z0, force[0], force[1], force[2], closed, reference,
                         _rel(force[0], closed), _rel(force[0], reference), leak])
        slope = macroscopic.loglog_slope(gaps, forces)
        for row in rows[-len(gaps):]:
            row += [slope, float(-(n + 4)), float(-(n + 5))]
    return CsvTable(header, tuple(tuple(r) for r in rows))


# --- validation suite ----------------------------------------------------------


@dataclass(frozen=True)
class Check:
    name: str
    measured: float
    tolerance: float
    passed: bool


def _check(name: str, measured: float, tolerance: float) -> Check:
    return Check(name, float(measured), float(tolerance), bool(measured <= tolerance))


def _validation_checks(cfg: RunConfig) -> list[Check]:
    tol = cfg.tol if cfg.tol is not None else cfg.option_float("tol", 1e-4)
    perturb = cfg.option_float("perturb_k1", 0.0)
    checks: list[Check] = []

    rng = np.random.default_rng(int(cfg.option_float("seed", 7)))
    points = rng.normal(size=(12, 3))
    points *= rng.uniform(0.8, 2.0, size=(12, 1)) / np.linalg.norm(points, axis=1)[:, None]
    kappa_dev, constraint = 0.0, 0.0
    expected = green_tensor.KappaSet.closed().values
    expected["k1"] *= 1 + perturb
    for n in range(4):
        fitted = green_tensor.fit_kappa((r, green_tensor.green_contraction_numeric(r, n)) for r in points)
        kappa_dev = max(kappa_dev, max(abs(v / expected[k] - 1) for k, v in fitted.values.items()))
        res = fitted.constraint_residuals()
        if res:
            scale = max(abs(v) for v in fitted.values.values())
            constraint = max(constraint, max(abs(x) for x in res.values()) / scale)
    checks.append(_check("kappa_fit_rel_dev", kappa_dev, tol))
    checks.append(_check("kappa_laplacian_constraints", constraint, tol))

    pl = PerturbedLine((0.2, 0.05, 0.0), (0.1, 0.3, 1.0), (((0.3, 0.1, 0.2), 0.5, 2.0), ((0.0, 0.2, -0.1), -1.0, 1.5)))
    dmax = 0.0
    for n in range(4):
        a, b = dynamics.d_vector(pl, 0.3, n), dynamics.d_vector_numeric(pl, 0.3, n)
        dmax = max(dmax, float(np.max(np.abs(a - b)) / np.max(np.abs(a))))
    checks.append(_check("d_vector_closed_vs_time_fd", dmax, tol))

    model = cfg.model_a, cfg.model_b
    lam1 = response.lambda_n(*model, 1, Temperature(0.01))
    lam1_closed = response.lambda_closed("lowT_n1", *model, 1, Temperature(0.01))
    checks.append(_check("lambda1_lowT_rel_dev", _rel(lam1.value, lam1_closed.value), 0.02))
    lam3 = response.lambda_n(*model, 3, Temperature(0.0))
    lam3_closed = response.lambda_closed("zeroT_n3", *model, 3, Temperature(0.0))
    checks.append(_check("lambda3_zeroT_rel_dev", _rel(lam3.value, lam3_closed.value), 0.005))
    lam5 = response.lambda_n(*model, 5, Temperature(0.0))
    checks.append(_check("lambda_signs_violations", float((lam1.value < 0) + (lam3.value >= 0) + (lam5.value <= 0)), 0.0))
    lam0 = response.lambda_n(*model, 0, Temperature(0.0))
    lam0_axis = response.lambda_static_imaginary_axis(*model, Temperature(0.0))
    checks.append(_check("lambda0_real_vs_imaginary_axis", _rel(lam0.value, lam0_axis), 1e-6))

    lam2 = response.lambda_n(*model, 2, Temperature(0.01))
    worst_even, sob_dev, sign_bad, positive_pocket = 0.0, 0.0, 0, False
    for traj in (uniform_line(0.3, 1.0), pl):
        r1 = work.work_order(traj, 1, lam1)
        r2 = work.work_order(traj, 2, lam2)
        r3 = work.work_order(traj, 3, lam3)
        worst_even = max(worst_even, abs(r2.total_work) / r2.abs_power)
        sign_bad += (r1.total_work >= 0) + (r3.total_work >= 0) + bool(np.max(r1.power_trace[1]) > 0)
        positive_pocket |= bool(np.max(r3.power_trace[1]) > 0)
        for n, lam, rep in ((1, lam1, r1), (3, lam3, r3)):
            sob_dev = max(sob_dev, _rel(work.work_sobolev_form(traj, n, lam), rep.total_work))
    checks.append(_check("even_order_work_over_abs_power", worst_even, 1e-4))
    checks.append(_check("odd_order_work_sign_violations", float(sign_bad), 0.0))
    checks.append(_check("third_order_positive_power_missing", float(not positive_pocket), 0.0))
    checks.append(_check("work_sobolev_rel_dev", sob_dev, tol))

    # F3.v changes sign at the gain angle (r tilted by theta from the normal to v)
    theta = math.radians(dynamics.gain_angle())
    gain = dynamics.force_closed(3, [math.sin(theta), 0.0, math.cos(theta)], [1.0, 0.0, 0.0], -1.0)[0]
    checks.append(_check("gain_angle_power_zero", abs(gain) / 22.5, 1e-12))

    medium = macroscopic.MediumConfig(1.0, 1.0, (0.3, 0.0, 0.0), *model, Temperature(0.01))
    leak_even = 0.0
    for n in (0, 2):
        f = macroscopic.half_space_force(medium, n, 1.0, averaging="numeric")
        leak_even = max(leak_even, math.hypot(f[0], f[1]) / abs(f[2]))
    checks.append(_check("half_space_even_lateral_over_normal", leak_even, 1e-8))
    dev_odd, leak_odd = 0.0, 0.0
    for n in (1, 3):
        f = macroscopic.half_space_force(medium, n, 1.0, averaging="numeric")
        closed = macroscopic.half_space_closed(medium, n, 1.0)
        dev_odd = max(dev_odd, _rel(f[0], closed[0]))
        leak_odd = max(leak_odd, abs(f[2]) / abs(f[0]))
    checks.append(_check("half_space_odd_normal_over_lateral", leak_odd, 1e-8))
    checks.append(_check("half_space_closed_rel_dev", dev_odd, 1e-6))

    direct = dynamics.force_direct(static((0.0, 0.0, 2.0)), 0.0, *model, Temperature(0.0))
    london = -9 * lam0.value * np.array([0.0, 0.0, 1.0]) / 2.0**7
    checks.append(_check("static_direct_vs_london", float(np.linalg.norm(direct - london) / np.linalg.norm(london)), 0.01))
    return checks


def run_validate(cfg: RunConfig) -> tuple[int, CsvTable]:
    """Run the invariant suite; status 1 when any check fails.

    ``[validate] perturb_k1`` scales the reference k1 (negative control) and
    ``--tol`` sets the tolerance of the exact-agreement checks (default 1e-4).
    """
    checks = _validation_checks(cfg)
    header = ("check [-]", "measured [1]", "tolerance [1]", "passed [-]")
    table = CsvTable(header, tuple((c.name, c.measured, c.tolerance, c.passed) for c in checks))
    return (0 if all(c.passed for c in checks) else 1), table


RUNNERS = {
    "figure1": run_figure1,
    "lambda_table": run_lambda_table,
    "work_scan": run_work_scan,
    "plate": run_plate,
}


def run(cfg: RunConfig) -> tuple[int, CsvTable]:
    if cfg.scenario == "validate":
        return run_validate(cfg)
    return 0, RUNNERS[cfg.scenario](cfg)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="qfric", description="Velocity-series quantum friction between two atoms.")
    parser.add_argument("scenario", choices=SCENARIOS)
    parser.add_argument("--config", help="key = value config file with [section] headers")
    parser.add_argument("--out", required=True, help="CSV output path")
    parser.add_argument("--tol", type=float, help="tolerance override")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.scenario, args.config, args.out, args.tol)
    except ConfigError as exc:
        print(f"qfric: config error: {exc}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    try:
        status, table = run(cfg)
    except ConfigError as exc:
        print(f"qfric: config error: {exc}", file=sys.stderr)
        return 2
    table.write(cfg.out)
    print(f"qfric {cfg.scenario}: {len(table.rows)} rows -> {cfg.out} ({time.perf_counter() - start:.1f} s)", file=sys.stderr)
    if status:
        failed = [row[0] for row in table.rows if row[-1] is False]
        print(f"qfric validate: FAILED {', '.join(failed)}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
