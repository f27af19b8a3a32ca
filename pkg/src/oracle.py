"""
oracle.py

Brute-force time integration of one modal oscillator

    p'' = -(n xi)^2 p - mu p' + nu F(t)

with classical fixed-step RK4, used as ground truth for the closed forms in
modal/energy. Nothing here is used to produce results, only to check them.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import find_peaks

from src.config import SEED, STEPS_PER_PERIOD, TRANSIENT_DECAY
from src.errors import DomainError, NumericError, RegimeMismatchError, StepSizeError
from src.modal import steady_state
from src.params import ModeCoefficients, StringLawParams, classify_coefficients, frequency_band, mode_coefficients
from src.peaks import qint3
from src.signals import sine

TimeFunction = Callable[[np.ndarray], np.ndarray]

# Steps per block of precomputed forcing samples.
_BLOCK = 1 << 15

# Coarsest allowed step, as a fraction of the fastest natural period.
MIN_STEPS_PER_NATURAL_PERIOD = 64


@dataclass(frozen=True)
class OscillatorState:
    p: float
    v: float
    t: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(x) for x in (self.p, self.v, self.t)):
            raise DomainError(f"oscillator state must be finite, got {self!r}")


@dataclass(eq=False)
class Trajectory:
    t: np.ndarray
    p: np.ndarray
    v: np.ndarray
    step: float

    @property
    def final(self) -> OscillatorState:
        return OscillatorState(float(self.p[-1]), float(self.v[-1]), float(self.t[-1]))

    def to_rows(self) -> List[Tuple[float, float, float]]:
        return list(zip(self.t.tolist(), self.p.tolist(), self.v.tolist()))


@dataclass(frozen=True)
class ConvergenceFit:
    rate: float  # fitted slope of log|transient| (negative when decaying)
    expected: float  # -mu/2
    relative_error: float
    peak_times: np.ndarray = field(repr=False, compare=False)
    peak_values: np.ndarray = field(repr=False, compare=False)


@dataclass(frozen=True)
class OracleTuple:
    xi: float
    k: float
    n: int
    steps: int
    max_relative_deviation: float
    passed: bool


@dataclass
class OracleReport:
    params: str
    seed: int
    tolerance: float
    tuples: List[OracleTuple]
    logs: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.tuples)

    @property
    def worst(self) -> float:
        return max((t.max_relative_deviation for t in self.tuples), default=0.0)

    def to_json(self) -> Dict[str, Any]:
        return {
            "params": self.params,
            "seed": self.seed,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "worst_relative_deviation": self.worst,
            "tuples": [asdict(t) for t in self.tuples],
            "logs": list(self.logs),
        }


# ---------------------------------------------------------------------
# Integrator
# ---------------------------------------------------------------------


def _rk4(
    coeffs: ModeCoefficients,
    forcing: Optional[TimeFunction],
    state0: OscillatorState,
    h: float,
    n_steps: int,
    record_from: float,
    record_every: int,
) -> Trajectory:
    m2 = coeffs.natural**2
    mu = coeffs.mu
    nu = coeffs.nu
    half = 0.5 * h
    sixth = h / 6.0
    p, v, t0 = state0.p, state0.v, state0.t

    ts: List[float] = []
    ps: List[float] = []
    vs: List[float] = []
    if t0 >= record_from:
        ts.append(t0)
        ps.append(p)
        vs.append(v)

    done = 0
    while done < n_steps:
        count = min(_BLOCK, n_steps - done)
        if forcing is None or nu == 0.0:
            nuF = [0.0] * (2 * count + 1)
        else:
            grid = t0 + (done + 0.5 * np.arange(2 * count + 1)) * h
            nuF = (nu * np.asarray(forcing(grid), dtype=float)).tolist()
        for i in range(count):
            f0 = nuF[2 * i]
            fh = nuF[2 * i + 1]
            f1 = nuF[2 * i + 2]

            k1p = v
            k1v = f0 - m2 * p - mu * v
            k2p = v + half * k1v
            k2v = fh - m2 * (p + half * k1p) - mu * k2p
            k3p = v + half * k2v
            k3v = fh - m2 * (p + half * k2p) - mu * k3p
            k4p = v + h * k3v
            k4v = f1 - m2 * (p + h * k3p) - mu * k4p

            p += sixth * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
            v += sixth * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)

            step = done + i + 1
            if step % record_every == 0 or step == n_steps:
                t = t0 + step * h
                if t >= record_from or step == n_steps:
                    ts.append(t)
                    ps.append(p)
                    vs.append(v)
        done += count

    return Trajectory(np.array(ts), np.array(ps), np.array(vs), h)


def integrate_oscillator(
    coeffs: ModeCoefficients,
    forcing: Optional[TimeFunction],
    state0: OscillatorState,
    t_end: float,
    dt: float,
    record_from: float = -math.inf,
    record_every: int = 1,
) -> Trajectory:
    """
    RK4 from state0 to t_end. The step is shrunk to fit a whole number of
    steps into the span; it must resolve the natural period 64 times.
    """
    if not t_end > state0.t:
        raise DomainError(f"t_end must exceed the start time {state0.t}, got {t_end!r}")
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt!r}")
    limit = 2.0 * math.pi / coeffs.natural / MIN_STEPS_PER_NATURAL_PERIOD
    if dt > limit:
        raise StepSizeError(f"dt={dt:.3e} exceeds (2pi/(n xi))/64 = {limit:.3e}")
    span = t_end - state0.t
    n_steps = max(1, math.ceil(span / dt - 1e-9))
    return _rk4(coeffs, forcing, state0, span / n_steps, n_steps, record_from, max(1, int(record_every)))


def integrate_mode(
    params: StringLawParams,
    xi: float,
    n: int,
    forcing: Optional[TimeFunction],
    state0: OscillatorState,
    t_end: float,
    dt: float,
    **kwargs: Any,
) -> Trajectory:
    return integrate_oscillator(mode_coefficients(params, xi, n), forcing, state0, t_end, dt, **kwargs)


def closed_form_state(coeffs: ModeCoefficients, forcing: Optional[Any], t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Periodic solution (p, p') from the amplitude/phase closed form."""
    t = np.asarray(t, dtype=float)
    p = np.zeros_like(t)
    v = np.zeros_like(t)
    if forcing is None:
        return p, v
    for term in steady_state(coeffs, forcing.drives()):
        p += term.amplitude * np.sin(term.k * t + term.phase)
        v += term.amplitude * term.k * np.cos(term.k * t + term.phase)
    return p, v


def fastest_frequency(coeffs: ModeCoefficients, forcing: Optional[Any]) -> float:
    ks = [d.k for d in forcing.drives()] if forcing is not None else []
    return max([coeffs.natural] + ks)


def adaptive_steps_per_period(coeffs: ModeCoefficients, forcing: Optional[Any], floor: int = STEPS_PER_PERIOD) -> int:
    """
    Steps per fastest period so that the RK4 frequency error (h w)^4/120,
    amplified by the quality factor w/mu near resonance, stays near 1e-7.
    """
    if coeffs.mu <= 0:
        return floor
    q = fastest_frequency(coeffs, forcing) / coeffs.mu
    return max(floor, math.ceil(101.0 * q**0.25))


# ---------------------------------------------------------------------
# Transient decay
# ---------------------------------------------------------------------


def measure_decay_rate(
    coeffs: ModeCoefficients,
    forcing: Optional[Any],
    state0: OscillatorState,
    decay_times: float = 20.0,
    steps_per_period: int = 256,
    periods_if_undamped: int = 50,
) -> ConvergenceFit:
    """
    Fit log|p_rk4 - p_closed| at its local maxima against t.

    The transient is the free solution, so the slope should be -mu/2. Peaks
    are refined by a parabola through the neighbouring samples.
    """
    regime = classify_coefficients(coeffs)
    if not regime.underdamped:
        raise RegimeMismatchError(
            f"mode {coeffs.n} at xi={coeffs.xi:.6g} is overdamped; the transient does not oscillate"
        )
    omega = fastest_frequency(coeffs, forcing)
    dt = 2.0 * math.pi / omega / steps_per_period
    if coeffs.mu > 0:
        span = max(decay_times / coeffs.mu, 10.0 * 2.0 * math.pi / regime.omega)
    else:
        span = periods_if_undamped * 2.0 * math.pi / regime.omega
    traj = integrate_oscillator(coeffs, forcing, state0, state0.t + span, dt)
    p_cf, _ = closed_form_state(coeffs, forcing, traj.t)
    err = np.abs(traj.p - p_cf)

    idx, _ = find_peaks(err)
    idx = idx[(idx > 0) & (idx < err.size - 1)]
    if idx.size < 3:
        raise NumericError("too few transient maxima to fit a decay rate")
    values = np.array([qint3(err[i - 1], err[i], err[i + 1])[1] for i in idx])
    floor = 1e-6 * values.max()
    keep = values > floor
    times, values = traj.t[idx][keep], values[keep]
    if times.size < 3:
        raise NumericError("transient fell below the noise floor too early")
    slope, _ = np.polyfit(times, np.log(values), 1)
    expected = -coeffs.mu / 2.0
    scale = abs(expected) if expected != 0 else 1.0
    return ConvergenceFit(float(slope), expected, abs(slope - expected) / scale, times, values)


def convergence_rate(
    params: StringLawParams,
    xi: float,
    n: int,
    forcing: Optional[Any],
    state0: OscillatorState,
    **kwargs: Any,
) -> ConvergenceFit:
    return measure_decay_rate(mode_coefficients(params, xi, n), forcing, state0, **kwargs)


def rk4_order_ratio(
    coeffs: ModeCoefficients,
    forcing: Optional[Any],
    state0: OscillatorState,
    t_end: float,
    dt: float,
) -> float:
    """err(dt) / err(dt/2) at t_end, errors measured against a dt/16 run; about 16 for RK4."""

    def end_state(step: float) -> Tuple[float, float]:
        final = integrate_oscillator(coeffs, forcing, state0, t_end, step, record_from=t_end).final
        return final.p, final.v

    ref = end_state(dt / 16.0)
    w = coeffs.natural

    def error(step: float) -> float:
        p, v = end_state(step)
        return math.hypot(p - ref[0], (v - ref[1]) / w)

    return error(dt) / error(dt / 2.0)


# ---------------------------------------------------------------------
# Random-tuple suite
# ---------------------------------------------------------------------


def compare_tuple(
    params: StringLawParams,
    xi: float,
    k: float,
    n: int,
    tolerance: float = 1e-6,
    transient_decay: float = TRANSIENT_DECAY,
    base_steps: int = STEPS_PER_PERIOD,
) -> OracleTuple:
    """RK4 from rest under sin(k t); max deviation from the closed form after transient_decay/mu."""
    coeffs = mode_coefficients(params, xi, n)
    forcing = sine(k / (2.0 * math.pi))
    spp = adaptive_steps_per_period(coeffs, forcing, base_steps)
    omega = fastest_frequency(coeffs, forcing)
    dt = 2.0 * math.pi / omega / spp
    t_cut = transient_decay / coeffs.mu
    window = 2.0 * max(2.0 * math.pi / k, 2.0 * math.pi / coeffs.natural)
    traj = integrate_oscillator(coeffs, forcing, OscillatorState(0.0, 0.0), t_cut + window, dt, record_from=t_cut)
    p_cf, v_cf = closed_form_state(coeffs, forcing, traj.t)
    dev_p = float(np.max(np.abs(traj.p - p_cf))) / float(np.max(np.abs(p_cf)))
    dev_v = float(np.max(np.abs(traj.v - v_cf))) / float(np.max(np.abs(v_cf)))
    dev = max(dev_p, dev_v)
    steps = math.ceil((t_cut + window) / dt - 1e-9)
    return OracleTuple(float(xi), float(k), int(n), steps, dev, dev < tolerance)


def sample_tuples(
    params: StringLawParams,
    n_tuples: int,
    seed: int,
    modes: Sequence[int] = (1, 3, 5, 7),
    k_window: float = 8.0,
) -> List[Tuple[float, float, int]]:
    """xi log-uniform in the band; k log-uniform in the band within [xi/k_window, k_window xi]; n from modes."""
    rng = np.random.default_rng(seed)
    lo, hi = frequency_band(params)
    out = []
    for _ in range(n_tuples):
        xi = math.exp(rng.uniform(math.log(lo), math.log(hi)))
        k_lo, k_hi = max(lo, xi / k_window), min(hi, xi * k_window)
        k = math.exp(rng.uniform(math.log(k_lo), math.log(k_hi)))
        n = int(rng.choice(list(modes)))
        out.append((xi, k, n))
    return out


def _run_tuple(args: Tuple[StringLawParams, float, float, int, float]) -> OracleTuple:
    params, xi, k, n, tolerance = args
    return compare_tuple(params, xi, k, n, tolerance)


def oracle_check(
    params: StringLawParams,
    n_tuples: int = 20,
    seed: int = SEED,
    modes: Sequence[int] = (1, 3, 5, 7),
    tolerance: float = 1e-6,
    workers: int = 1,
) -> OracleReport:
    """Closed form vs RK4 over seeded random (xi, k, n) tuples."""
    tuples = sample_tuples(params, n_tuples, seed, modes)
    jobs = [(params, xi, k, n, tolerance) for xi, k, n in tuples]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_tuple, jobs))
    else:
        results = [_run_tuple(job) for job in jobs]

    logs = [f"[oracle] {params.name}: {n_tuples} tuples, seed {seed}"]
    for r in results:
        status = "ok" if r.passed else "FAIL"
        logs.append(
            f"[oracle] xi={r.xi / (2 * math.pi):.2f}Hz k={r.k / (2 * math.pi):.2f}Hz n={r.n} "
            f"steps={r.steps} dev={r.max_relative_deviation:.2e} {status}"
        )
    return OracleReport(params.name, seed, tolerance, results, logs)
