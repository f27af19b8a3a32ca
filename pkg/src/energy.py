"""
energy.py

Energy stored in each string, the quantity the model sends upstream:

    E_n(xi, t) = 1/2 (pi/ell)^2 T(xi) n^2 (p_n^2 + p_n'^2 / (xi n)^2)
    E(xi, t)   = sum over odd n of E_n

Fields are sampled on a log-spaced xi grid (uniform in position x) and a
time grid covering one period of E.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.errors import DomainError
from src.modal import ModalResponse, mode_phasors, odd_modes
from src.params import StringLawParams, T_of_xi, derive, frequency_band, rho_of_xi
from src.signals import Forcing, PeriodicSignal, TwoTone

ArrayLike = Union[float, np.ndarray]


@dataclass(eq=False)
class EnergyField:
    """
    Sampled E(xi, t).

    Attributes:
        xi_axis:  string angular frequencies [rad/s], shape (X,)
        t_axis:   times [s], shape (T,)
        total:    E(xi, t) [J], shape (X, T)
        modes:    mode indices summed into `total`
        per_mode: E_n stacked in `modes` order, shape (M, X, T), or None
        metadata: params id, signal, n_max, truncation bound, logs
    """

    xi_axis: np.ndarray
    t_axis: np.ndarray
    total: np.ndarray
    modes: Tuple[int, ...]
    per_mode: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def freq_hz(self) -> np.ndarray:
        return self.xi_axis / (2.0 * math.pi)

    def at_time(self, t_index: int = 0) -> np.ndarray:
        return self.total[:, t_index]

    def partial(self, modes: Iterable[int]) -> np.ndarray:
        """Sum of the retained E_n for the given modes (even modes contribute nothing)."""
        if self.per_mode is None:
            raise DomainError("field was computed without per-mode data")
        out = np.zeros_like(self.total)
        for n in modes:
            if n in self.modes:
                out = out + self.per_mode[self.modes.index(n)]
            elif n % 2 == 1:
                raise DomainError(f"mode {n} not in field (modes {self.modes})")
        return out

    def time_summary(self) -> Dict[str, np.ndarray]:
        return {
            "min": self.total.min(axis=1),
            "mean": self.total.mean(axis=1),
            "max": self.total.max(axis=1),
        }


@dataclass(frozen=True)
class TruncationBound:
    """Upper bound on sum_{n >= first_omitted_mode} E_n at one xi (inf when unavailable)."""

    value: float
    available: bool
    first_omitted_mode: int


# ---------------------------------------------------------------------
# Pointwise energies
# ---------------------------------------------------------------------


def energy_prefactor(params: StringLawParams, xi: ArrayLike) -> ArrayLike:
    """1/2 (pi/ell)^2 T(xi)."""
    return 0.5 * (math.pi / params.ell) ** 2 * T_of_xi(params, xi)


def energy_mode(params: StringLawParams, xi: float, resp: ModalResponse, n: int, t: ArrayLike) -> ArrayLike:
    if n % 2 == 0:
        out = np.zeros_like(np.asarray(t, dtype=float))
        return float(out) if out.ndim == 0 else out
    p = resp.displacement(n, t)
    v = resp.velocity(n, t)
    return energy_prefactor(params, xi) * n * n * (p * p + v * v / (xi * n) ** 2)


def kinetic_potential_energy(params: StringLawParams, xi: float, resp: ModalResponse, n: int, t: ArrayLike) -> ArrayLike:
    """Same E_n before substituting xi^2 = (T/rho)(pi/ell)^2: elastic plus kinetic part."""
    p = resp.displacement(n, t)
    v = resp.velocity(n, t)
    elastic = 0.5 * (math.pi / params.ell) ** 2 * T_of_xi(params, xi) * n * n * p * p
    kinetic = 0.5 * rho_of_xi(params, xi) * v * v
    return elastic + kinetic


def energy_sine_closed_form(
    params: StringLawParams, xi: ArrayLike, k: float, n: int, t: ArrayLike, phase: float = 0.0
) -> ArrayLike:
    """
    E_n for F = sin(k t + phase) written entirely in the exponential-law constants:

      1/2 (pi/ell)^2 B_T B_nu^2 xi^(2(2k_rho+k_T)/s) / D * (1 + (k^2/(xi n)^2 - 1) cos^2(k t + phase + phi_n))

    with D = k^4 + k^2((B_mu xi^alpha)^2 - 2 xi^2 n^2) + xi^4 n^4 and s = k_rho + k_T.
    """
    if n % 2 == 0:
        return 0.0 * np.asarray(xi, dtype=float) * np.asarray(t, dtype=float)
    d = derive(params)
    s = params.exponent_sum
    xi = np.asarray(xi, dtype=float)
    t = np.asarray(t, dtype=float)
    mu = d.B_mu * xi**d.alpha
    m2 = (xi * n) ** 2
    D = k**4 + k**2 * (mu**2 - 2.0 * m2) + m2**2
    phi_n = np.arctan2(k * mu, k * k - m2)
    amp = 0.5 * (math.pi / params.ell) ** 2 * d.B_T * d.B_nu**2 * xi ** (2.0 * (2.0 * params.k_rho + params.k_T) / s) / D
    return amp * (1.0 + (k * k / m2 - 1.0) * np.cos(k * t + phase + phi_n) ** 2)


def _mode_energy_grid(
    params: StringLawParams, xi: np.ndarray, forcing: Forcing, n: int, t: np.ndarray
) -> np.ndarray:
    if n % 2 == 0:
        return np.zeros((xi.size, t.size))
    A, ks = mode_phasors(params, xi, forcing, n)
    p = np.zeros((xi.size, t.size))
    v = np.zeros((xi.size, t.size))
    # Fixed summation order over drives keeps every grid point independent of chunking.
    for d in range(ks.size):
        rot = np.exp(1j * ks[d] * t)[None, :]
        line = A[:, d : d + 1] * rot
        p += line.imag
        v += (1j * ks[d] * line).imag
    pref = np.asarray(energy_prefactor(params, xi), dtype=float)[:, None]
    return pref * n * n * (p * p + v * v / ((xi[:, None] * n) ** 2))


def energy_at(params: StringLawParams, xi: float, forcing: Forcing, t: ArrayLike, n_max: int) -> np.ndarray:
    """Total E(xi, t) at one string for an array of times."""
    xi_arr = np.array([float(xi)])
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(t_arr.size)
    for n in odd_modes(n_max):
        out += _mode_energy_grid(params, xi_arr, forcing, n, t_arr)[0]
    return out


# ---------------------------------------------------------------------
# Grids
# ---------------------------------------------------------------------


def log_xi_grid(
    params: Optional[StringLawParams],
    points: int,
    f_lo_hz: Optional[float] = None,
    f_hi_hz: Optional[float] = None,
) -> np.ndarray:
    """Log-spaced xi grid in rad/s; defaults to the parameter set's band."""
    if points < 2:
        raise DomainError(f"xi grid needs at least 2 points, got {points}")
    if f_lo_hz is None or f_hi_hz is None:
        if params is None:
            raise DomainError("grid bounds need either explicit Hz limits or a parameter set")
        lo, hi = frequency_band(params)
        f_lo_hz = lo / (2.0 * math.pi) if f_lo_hz is None else f_lo_hz
        f_hi_hz = hi / (2.0 * math.pi) if f_hi_hz is None else f_hi_hz
    if not 0 < f_lo_hz < f_hi_hz:
        raise DomainError(f"need 0 < f_lo < f_hi, got [{f_lo_hz}, {f_hi_hz}]")
    return 2.0 * math.pi * np.geomspace(f_lo_hz, f_hi_hz, points)


def energy_period(forcing: Forcing) -> float:
    """
    Period of E(xi, .): pi/k for a pure sine, 2pi/k for a periodic signal,
    2pi q / (k1 - k0) for a two-tone with exact ratio u/w.
    """
    if isinstance(forcing, PeriodicSignal):
        return math.pi / forcing.k if forcing.is_single_sine() else 2.0 * math.pi / forcing.k
    if isinstance(forcing, TwoTone):
        if forcing.ratio is None:
            raise DomainError("two-tone energy period needs an exact frequency ratio")
        u, w = forcing.ratio.numerator, forcing.ratio.denominator
        q = (u - w) // math.gcd(u + w, u - w)
        return 2.0 * math.pi * q / (forcing.k1 - forcing.k0)
    raise DomainError(f"unsupported forcing {type(forcing).__name__}")


def energy_time_grid(forcing: Forcing, samples: int, period: Optional[float] = None) -> np.ndarray:
    if samples < 1:
        raise DomainError(f"time grid needs at least 1 sample, got {samples}")
    span = energy_period(forcing) if period is None else period
    return np.linspace(0.0, span, samples, endpoint=False)


def feedback_peak_hz(forcing: Forcing) -> float:
    """Frequency of the energy oscillation (2f for a pure sine); reported, never fed back."""
    return 1.0 / energy_period(forcing)


# ---------------------------------------------------------------------
# Truncation bound
# ---------------------------------------------------------------------


def truncation_bound(params: StringLawParams, forcing: Forcing, xi: float, n_max: int) -> TruncationBound:
    """
    Rigorous bound on the energy in odd modes above n_max.

    For n >= m (first omitted odd mode) and m xi > k_max:
      R_n(k) <= nu_n / (n^2 xi^2 - k^2) <= nu_n / (beta n^2 xi^2),  beta = 1 - (k_max / (m xi))^2
    so with B = B_nu xi^(2k_rho/s), C = sum |c_d|, K = sum |c_d| k_d,
      E_n <= pref B^2 / (beta^2 xi^4) (C^2 / n^4 + K^2 / (xi^2 n^6))
    and the odd-n tails are bounded by f(m) + (1/2) integral_m^inf f.
    """
    m = n_max + 2 if n_max % 2 == 1 else n_max + 1
    drives = forcing.drives()
    k_max = max(d.k for d in drives)
    if not m * xi > k_max:
        return TruncationBound(math.inf, False, m)
    beta = 1.0 - (k_max / (m * xi)) ** 2
    d = derive(params)
    B = d.B_nu * xi ** (2.0 * params.k_rho / params.exponent_sum)
    C = sum(abs(dr.amplitude) for dr in drives)
    K = sum(abs(dr.amplitude) * dr.k for dr in drives)
    tail4 = 1.0 / m**4 + 1.0 / (6.0 * m**3)
    tail6 = 1.0 / m**6 + 1.0 / (10.0 * m**5)
    pref = float(energy_prefactor(params, xi))
    value = pref * B * B / (beta * beta * xi**4) * (C * C * tail4 + K * K / (xi * xi) * tail6)
    return TruncationBound(value, True, m)


def truncation_bound_profile(params: StringLawParams, forcing: Forcing, xi_grid: np.ndarray, n_max: int) -> np.ndarray:
    return np.array([truncation_bound(params, forcing, float(x), n_max).value for x in xi_grid])


# ---------------------------------------------------------------------
# Fields
# ---------------------------------------------------------------------


def _chunk_field(
    params: StringLawParams, forcing: Forcing, xi: np.ndarray, t: np.ndarray, modes: Sequence[int]
) -> np.ndarray:
    return np.stack([_mode_energy_grid(params, xi, forcing, n, t) for n in modes])


def energy_field(
    params: StringLawParams,
    forcing: Forcing,
    xi_grid: np.ndarray,
    t_grid: np.ndarray,
    n_max: int,
    modes: Optional[Sequence[int]] = None,
    keep_modes: bool = True,
    workers: int = 1,
) -> EnergyField:
    """
    Sample E(xi, t) for any forcing.

    `modes` restricts the sum (default: every odd n <= n_max). Cross terms
    between drives are kept: each p_n is superposed before squaring.
    `workers` splits the xi grid across threads; the result does not depend on it.
    """
    xi = np.asarray(xi_grid, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    if xi.ndim != 1 or xi.size == 0 or t.ndim != 1 or t.size == 0:
        raise DomainError("xi and t grids must be nonempty 1-D arrays")
    if np.any(xi <= 0):
        raise DomainError("xi grid must be > 0")
    selected = tuple(odd_modes(n_max)) if modes is None else tuple(sorted(set(int(n) for n in modes)))
    if not selected or any(n < 1 for n in selected):
        raise DomainError(f"modes must be integers >= 1, got {modes!r}")

    logs: List[str] = []
    workers = max(1, int(workers))
    chunks = [c for c in np.array_split(xi, min(workers, xi.size)) if c.size]
    if len(chunks) == 1:
        stacks = [_chunk_field(params, forcing, xi, t, selected)]
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            stacks = list(pool.map(lambda c: _chunk_field(params, forcing, c, t, selected), chunks))
    per_mode = np.concatenate(stacks, axis=1)
    total = per_mode.sum(axis=0)
    logs.append(f"[energy] {xi.size}x{t.size} grid, modes {list(selected)}")

    bounds = truncation_bound_profile(params, forcing, xi, max(selected))
    finite = np.isfinite(bounds)
    positive = finite & (total.min(axis=1) > 0)
    rel = bounds[positive] / total.min(axis=1)[positive]
    if not finite.all():
        logs.append(f"[energy] truncation bound unavailable at {int((~finite).sum())} grid points; raise n_max")

    metadata: Dict[str, Any] = {
        "params": params.name,
        "signal": forcing.describe(),
        "n_max": int(max(selected)),
        "modes": list(selected),
        "truncation_bound_max": float(bounds[finite].max()) if finite.any() else None,
        "truncation_relative_max": float(rel.max()) if rel.size else None,
        "truncation_unavailable_points": int((~finite).sum()),
        "feedback_peak_hz": _safe_feedback(forcing),
        "logs": logs,
    }
    if isinstance(forcing, PeriodicSignal):
        metadata["fundamental_hz"] = forcing.fundamental_hz
        metadata["signal_json"] = forcing.to_json()
    else:
        metadata["fundamental_hz"] = forcing.k0 / (2.0 * math.pi)
    return EnergyField(xi, t, total, selected, per_mode if keep_modes else None, metadata)


def _safe_feedback(forcing: Forcing) -> Optional[float]:
    try:
        return feedback_peak_hz(forcing)
    except DomainError:
        return None


def energy_field_sine(
    params: StringLawParams, signal: PeriodicSignal, xi_grid: np.ndarray, t_grid: np.ndarray, n_max: int, **kwargs: Any
) -> EnergyField:
    if not (isinstance(signal, PeriodicSignal) and signal.is_single_sine()):
        raise DomainError("energy_field_sine needs a single-component signal")
    return energy_field(params, signal, xi_grid, t_grid, n_max, **kwargs)


def energy_field_periodic(
    params: StringLawParams, signal: PeriodicSignal, xi_grid: np.ndarray, t_grid: np.ndarray, n_max: int, **kwargs: Any
) -> EnergyField:
    if not isinstance(signal, PeriodicSignal):
        raise DomainError("energy_field_periodic needs a PeriodicSignal")
    return energy_field(params, signal, xi_grid, t_grid, n_max, **kwargs)


def energy_field_two_tone(
    params: StringLawParams, twotone: TwoTone, xi_grid: np.ndarray, t_grid: np.ndarray, n_max: int, **kwargs: Any
) -> EnergyField:
    if not isinstance(twotone, TwoTone):
        raise DomainError("energy_field_two_tone needs a TwoTone")
    return energy_field(params, twotone, xi_grid, t_grid, n_max, **kwargs)

