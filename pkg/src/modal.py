"""
modal.py

Steady-state (attracting periodic) response of the modal oscillators

    p_n'' = -(n xi)^2 p_n - mu(xi) p_n' + nu_n(xi) F(t)

to sinusoidal and periodic forcing, written in amplitude/phase form
R_n sin(k t + phi + phi_n - pi). The -pi carries the leading minus sign of
the periodic solution; phi_n itself stays on the branch atan2(k mu, k^2 - n^2 xi^2)
in (0, pi).

Transients are not represented here; the oracle module integrates them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Dict, Iterable, Optional, Tuple, Union

import numpy as np
from scipy.optimize import minimize_scalar

from src.errors import DomainError, UndefinedMaximumError
from src.params import (
    ModeCoefficients,
    StringLawParams,
    assumptions,
    derive,
    mode_coefficients,
    mu_of_xi,
    nu_n_of_xi,
)
from src.signals import Drive, Forcing, PeriodicSignal

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class ModalTerm:
    """One line of p_n(t): amplitude * sin(k t + phase)."""

    k: float
    n: int
    amplitude: float
    phase: float


@dataclass(frozen=True)
class ModalResponse:
    xi: float
    terms: Tuple[ModalTerm, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(self.terms))
        for term in self.terms:
            if term.n % 2 == 0:
                raise DomainError(f"even mode {term.n} cannot carry a forced response")
            if not term.amplitude >= 0:
                raise DomainError(f"term amplitude must be >= 0, got {term.amplitude!r}")

    @property
    def modes(self) -> Tuple[int, ...]:
        return tuple(sorted({term.n for term in self.terms}))

    def displacement(self, n: int, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            if term.n == n:
                out = out + term.amplitude * np.sin(term.k * t + term.phase)
        return float(out) if out.ndim == 0 else out

    def velocity(self, n: int, t: ArrayLike) -> ArrayLike:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for term in self.terms:
            if term.n == n:
                out = out + term.amplitude * term.k * np.cos(term.k * t + term.phase)
        return float(out) if out.ndim == 0 else out

    def scaled(self, factor: float) -> "ModalResponse":
        flip = math.pi if factor < 0 else 0.0
        return ModalResponse(
            self.xi,
            tuple(
                ModalTerm(t.k, t.n, abs(factor) * t.amplitude, _wrap(t.phase + flip))
                for t in self.terms
            ),
        )

    def to_json(self) -> Dict[str, Any]:
        return {
            "xi": self.xi,
            "terms": [
                {"k": t.k, "n": t.n, "amplitude": t.amplitude, "phase": t.phase}
                for t in self.terms
            ],
        }


def _wrap(phase: float) -> float:
    return math.remainder(phase, 2.0 * math.pi)


# ---------------------------------------------------------------------
# Coefficient-level closed forms
# ---------------------------------------------------------------------


def steady_amplitude(coeffs: ModeCoefficients, k: float) -> float:
    """nu / sqrt(k^4 + k^2 (mu^2 - 2 n^2 xi^2) + n^4 xi^4), radicand in factored form."""
    if coeffs.nu == 0.0:
        return 0.0
    denom = math.hypot(k * k - coeffs.natural**2, k * coeffs.mu)
    return math.inf if denom == 0.0 else abs(coeffs.nu) / denom


def steady_phase(coeffs: ModeCoefficients, k: float) -> float:
    return math.atan2(k * coeffs.mu, k * k - coeffs.natural**2)


def rational_form(coeffs: ModeCoefficients, k: float, t: ArrayLike, phase: float = 0.0) -> ArrayLike:
    """
    nu ((k^2 - n^2 xi^2) sin(k t + phase) + k mu cos(k t + phase)) / (k^4 + k^2 (mu^2 - 2 n^2 xi^2) + n^4 xi^4).

    This is the periodic solution without its leading minus sign, i.e. what
    R_n sin(k t + phase + phi_n) equals.
    """
    t = np.asarray(t, dtype=float)
    m = coeffs.natural
    theta = k * t + phase
    denom = k**4 + k**2 * (coeffs.mu**2 - 2.0 * m**2) + m**4
    out = coeffs.nu * ((k**2 - m**2) * np.sin(theta) + k * coeffs.mu * np.cos(theta)) / denom
    return float(out) if out.ndim == 0 else out


def steady_state(coeffs: ModeCoefficients, drives: Iterable[Drive]) -> Tuple[ModalTerm, ...]:
    """Periodic solution of one oscillator under a sum of sinusoidal drives."""
    terms = []
    for d in drives:
        R = steady_amplitude(coeffs, d.k)
        phase = d.phase + steady_phase(coeffs, d.k) - math.pi
        if d.amplitude < 0:
            phase += math.pi
        terms.append(ModalTerm(d.k, coeffs.n, abs(d.amplitude) * R, _wrap(phase)))
    return tuple(terms)


# ---------------------------------------------------------------------
# Parameter-set level operations
# ---------------------------------------------------------------------


def amplitude_Rn(params: StringLawParams, xi: ArrayLike, k: float, n: int) -> ArrayLike:
    """R_n(xi, k) >= 0; zero for even n. Vectorized over xi."""
    mu = mu_of_xi(params, xi)
    nu = nu_n_of_xi(params, xi, n)
    m = n * np.asarray(xi, dtype=float)
    return nu / np.hypot(k * k - m * m, k * mu)


def phase_phin(params: StringLawParams, xi: ArrayLike, k: float, n: int) -> ArrayLike:
    """phi_n(xi, k) = atan2(k mu, k^2 - n^2 xi^2), in (0, pi) for mu > 0. Vectorized over xi."""
    mu = mu_of_xi(params, xi)
    m = n * np.asarray(xi, dtype=float)
    return np.arctan2(k * mu, k * k - m * m)


def amplitude_profile(
    params: StringLawParams, k: float, n: int, xi_grid: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    xi_grid = np.asarray(xi_grid, dtype=float)
    return amplitude_Rn(params, xi_grid, k, n), phase_phin(params, xi_grid, k, n)


def odd_modes(n_max: int) -> Tuple[int, ...]:
    if int(n_max) != n_max or n_max < 1:
        raise DomainError(f"n_max must be an integer >= 1, got {n_max!r}")
    return tuple(range(1, int(n_max) + 1, 2))


def response(params: StringLawParams, xi: float, forcing: Forcing, n_max: int) -> ModalResponse:
    """Superposed steady state of every odd mode n <= n_max for any forcing."""
    drives = forcing.drives()
    terms = []
    for n in odd_modes(n_max):
        terms.extend(steady_state(mode_coefficients(params, xi, n), drives))
    return ModalResponse(float(xi), tuple(terms))


def response_sine(params: StringLawParams, xi: float, signal: PeriodicSignal, n_max: int) -> ModalResponse:
    if not signal.is_single_sine():
        raise DomainError("response_sine needs a single-component signal")
    return response(params, xi, signal, n_max)


def response_periodic(params: StringLawParams, xi: float, signal: PeriodicSignal, n_max: int) -> ModalResponse:
    return response(params, xi, signal, n_max)


def mode_phasors(
    params: StringLawParams, xi: np.ndarray, forcing: Forcing, n: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Complex amplitudes A[i, d] with p_n(xi_i, t) = Im(sum_d A[i, d] e^(i k_d t)).

    A = c_d nu_n e^(i phi_d) / (n^2 xi^2 - k_d^2 + i k_d mu); same solution as
    the amplitude/phase form, in a shape that vectorizes over the xi grid.
    """
    xi = np.asarray(xi, dtype=float)
    drives = forcing.drives()
    ks = np.array([d.k for d in drives], dtype=float)
    amps = np.array([d.amplitude * np.exp(1j * d.phase) for d in drives], dtype=complex)
    if n % 2 == 0:
        return np.zeros((xi.size, ks.size), dtype=complex), ks
    mu = np.asarray(mu_of_xi(params, xi), dtype=float)[:, None]
    nu = np.asarray(nu_n_of_xi(params, xi, n), dtype=float)[:, None]
    m2 = (n * xi)[:, None] ** 2
    denom = m2 - ks[None, :] ** 2 + 1j * ks[None, :] * mu
    return amps[None, :] * nu / denom, ks


# ---------------------------------------------------------------------
# Response maxima
# ---------------------------------------------------------------------


def max_drive_for_coefficients(coeffs: ModeCoefficients) -> float:
    radicand = coeffs.natural**2 - coeffs.mu**2 / 2.0
    if radicand <= 0:
        raise UndefinedMaximumError(
            f"no drive maximum: n^2 xi^2 - mu^2/2 = {radicand:.6g} <= 0 (xi={coeffs.xi:.6g}, n={coeffs.n})"
        )
    return math.sqrt(radicand)


def max_drive_frequency(params: StringLawParams, xi: float, n: int) -> float:
    """k_n^max = sqrt(n^2 xi^2 - mu^2/2): the drive that maximizes R_n for a fixed string."""
    return max_drive_for_coefficients(mode_coefficients(params, xi, n))


def _golden_max_log(objective, center: float, window: float = 100.0, points: int = 4001, tol: float = 1e-10) -> float:
    grid = np.linspace(math.log(center / window), math.log(center * window), points)
    values = np.asarray(objective(np.exp(grid)), dtype=float)
    i = int(np.argmax(values))
    if i == 0 or i == points - 1:
        raise UndefinedMaximumError("response maximum not interior to the search window")
    res = minimize_scalar(
        lambda s: -float(objective(math.exp(s))),
        bracket=(grid[i - 1], grid[i], grid[i + 1]),
        method="golden",
        tol=tol,
    )
    return math.exp(float(res.x))


def max_string_for_drive(
    params: StringLawParams, k: float, n: int, assumption: Optional[str] = "auto"
) -> float:
    """
    xi_n^max: the string whose mode n responds most to drive k.

    assumption:
      "auto"  -> closed form when the parameters satisfy A03 or A01, else numeric
      "A03"   -> k / n
      "A01"   -> sqrt(k) (B_mu^2 + k^2)^(1/4) / n
      None    -> numeric: log-grid scan then golden-section refinement in log xi
    """
    if not k > 0:
        raise DomainError(f"drive frequency must be > 0, got {k!r}")
    if n % 2 == 0:
        raise UndefinedMaximumError(f"even mode {n} has no response")
    held = assumptions(params)
    if assumption == "auto":
        assumption = "A03" if "A03" in held else "A01" if "A01" in held else None
    elif assumption is not None and assumption not in held:
        raise DomainError(f"parameters {params.name!r} do not satisfy {assumption}")

    if assumption == "A03":
        return k / n
    if assumption == "A01":
        return math.sqrt(k) * (derive(params).B_mu ** 2 + k**2) ** 0.25 / n
    if assumption is not None:
        raise DomainError(f"unknown assumption {assumption!r} (A03 | A01 | auto | None)")
    return _golden_max_log(lambda xi: amplitude_Rn(params, xi, k, n), k / n)


# ---------------------------------------------------------------------
# Spatial reconstruction
# ---------------------------------------------------------------------


def reconstruct_displacement(
    params: StringLawParams,
    resp: ModalResponse,
    z: float,
    t: ArrayLike,
    n_max: Optional[int] = None,
) -> ArrayLike:
    """u(t, z) = sum_n p_n(t) sqrt(2/ell) sin(pi n z / ell), truncated at n_max."""
    ell = params.ell
    if not 0.0 <= z <= ell:
        raise DomainError(f"z must lie in [0, {ell}]")
    t = np.asarray(t, dtype=float)
    if z == 0.0 or z == ell:
        out = np.zeros_like(t)
        return float(out) if out.ndim == 0 else out
    out = np.zeros_like(t)
    for n in resp.modes:
        if n_max is not None and n > n_max:
            continue
        out = out + resp.displacement(n, t) * math.sqrt(2.0 / ell) * math.sin(math.pi * n * z / ell)
    return float(out) if out.ndim == 0 else out
