"""
params.py

String-bank parameterization: the exponential laws for mass density,
tension and damping along the cochlea, the constants derived from them,
and the two named parameter sets.

Angular frequency (rad/s) is the internal unit everywhere in this module.

Public API:
  - StringLawParams, DerivedParams, ModeCoefficients, DampingClass
  - derive(params) -> DerivedParams
  - xi_of_x / x_of_xi / frequency_band / band_hz
  - mu_of_xi / nu_n_of_xi / T_of_xi / rho_of_xi / ell_of_x
  - mode_coefficients / damping_class / damping_crossover / string_frequencies
  - assumptions(params) -> set of {"A01", "A02", "A03"}
  - builtin_parameter_sets / resolve_params / load_params_file / save_params_file
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Dict, Optional, Set, Tuple, Union

import numpy as np

from src.errors import ConfigError, DomainError

ArrayLike = Union[float, np.ndarray]

# Relative slack when checking xi against the band edges, so that
# xi_of_x(L) round-trips through x_of_xi despite floating-point error.
_BAND_SLACK = 1e-12


@dataclass(frozen=True)
class StringLawParams:
    """
    Coefficients of the exponential laws rho = A_rho e^(k_rho x), T = A_T e^(-k_T x),
    gamma = A_gamma e^(k_gamma x).

    Attributes:
        A_rho:   surface mass density coefficient [kg/m^2]
        k_rho:   mass density exponent (> 0)
        A_T:     tension coefficient [kg/s^2]
        k_T:     tension exponent (> 0)
        A_gamma: damping coefficient [kg/(m^2 s)]
        k_gamma: damping exponent, any sign
        ell:     string length [m]
        L:       cochlea length, normalized to 1
        c:       forcing coupling, normalized to 1
        name:    identifier used in reports and metadata
    """

    A_rho: float
    k_rho: float
    A_T: float
    k_T: float
    A_gamma: float
    k_gamma: float
    ell: float
    L: float = 1.0
    c: float = 1.0
    name: str = "custom"

    def __post_init__(self) -> None:
        for f in fields(self):
            if f.name == "name":
                continue
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise DomainError(f"{f.name} must be a finite number, got {value!r}")
        for key in ("A_rho", "A_T", "A_gamma", "k_rho", "k_T", "ell", "L", "c"):
            if getattr(self, key) <= 0:
                raise DomainError(f"{key} must be > 0, got {getattr(self, key)!r}")

    @property
    def exponent_sum(self) -> float:
        return self.k_rho + self.k_T


@dataclass(frozen=True)
class DerivedParams:
    """Constants of the xi-parameterized laws mu = B_mu xi^alpha, T = B_T xi^(2k_T/s), nu_n = B_nu xi^(2k_rho/s)/n."""

    alpha: float
    B_mu: float
    B_T: float
    B_nu: float
    A_tilde: float
    k_tilde: float


@dataclass(frozen=True)
class ModeCoefficients:
    """
    Coefficients of one modal oscillator  p'' = -(n xi)^2 p - mu p' + nu F(t).

    Built from a parameter set by mode_coefficients(), or directly when a
    caller needs mu = 0 or nu = 0 (free or undamped oscillators).
    """

    xi: float
    n: int
    mu: float
    nu: float

    def __post_init__(self) -> None:
        if not self.xi > 0:
            raise DomainError(f"xi must be > 0, got {self.xi!r}")
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"mode index must be an integer >= 1, got {self.n!r}")
        if self.mu < 0:
            raise DomainError(f"mu must be >= 0, got {self.mu!r}")

    @property
    def natural(self) -> float:
        return self.n * self.xi


@dataclass(frozen=True)
class DampingClass:
    kind: str  # "underdamped" | "overdamped"
    omega: Optional[float] = None  # free resonance sqrt(n^2 xi^2 - (mu/2)^2), underdamped only

    @property
    def underdamped(self) -> bool:
        return self.kind == "underdamped"


@dataclass(frozen=True)
class StringFrequencies:
    """The three characteristic angular frequencies of a string (mode 1)."""

    xi: float
    omega_1: Optional[float]
    k1_max: Optional[float]


# ---------------------------------------------------------------------
# Derived constants
# ---------------------------------------------------------------------


def derive(params: StringLawParams) -> DerivedParams:
    s = params.exponent_sum
    A_tilde = math.sqrt(params.A_T / params.A_rho) * math.pi / params.ell
    alpha = 2.0 * (params.k_rho - params.k_gamma) / s
    B_mu = (params.A_gamma / params.A_rho) * A_tilde ** (-alpha)
    B_T = params.A_T * A_tilde ** (-2.0 * params.k_T / s)
    B_nu = (
        (params.c / params.A_rho)
        * A_tilde ** (-2.0 * params.k_rho / s)
        * (2.0 * math.sqrt(2.0) / math.pi)
        * math.sqrt(params.ell)
    )
    return DerivedParams(
        alpha=alpha,
        B_mu=B_mu,
        B_T=B_T,
        B_nu=B_nu,
        A_tilde=A_tilde,
        k_tilde=s / 2.0,
    )


def assumptions(params: StringLawParams, rel_tol: float = 1e-12) -> Set[str]:
    """Which of the simplifying exponent relations A01/A02/A03 the parameters satisfy."""
    close = lambda a, b: math.isclose(a, b, rel_tol=rel_tol, abs_tol=rel_tol)  # noqa: E731
    out: Set[str] = set()
    if close(params.k_gamma, params.k_rho) and close(params.k_rho, params.k_T):
        out.add("A01")
    if close(params.k_gamma, params.exponent_sum / 2.0):
        out.add("A02")
    if close(params.k_gamma, 0.0):
        out.add("A03")
    return out


# ---------------------------------------------------------------------
# Position <-> frequency map
# ---------------------------------------------------------------------


def _check_positive(name: str, value: ArrayLike) -> None:
    arr = np.asarray(value, dtype=float)
    if arr.size == 0 or not np.all(np.isfinite(arr)) or np.any(arr <= 0):
        raise DomainError(f"{name} must be finite and > 0")


def _check_mode(n: int) -> None:
    if int(n) != n or n < 1:
        raise DomainError(f"mode index must be an integer >= 1, got {n!r}")


def xi_of_x(params: StringLawParams, x: ArrayLike) -> ArrayLike:
    """Undamped fundamental angular frequency of the string at position x."""
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0) or np.any(arr > params.L):
        raise DomainError(f"x must lie in [0, {params.L}]")
    d = derive(params)
    out = d.A_tilde * np.exp(-d.k_tilde * arr)
    return float(out) if np.ndim(out) == 0 else out


def frequency_band(params: StringLawParams) -> Tuple[float, float]:
    """(xi(L), xi(0)) in rad/s."""
    d = derive(params)
    return d.A_tilde * math.exp(-d.k_tilde * params.L), d.A_tilde


def band_hz(params: StringLawParams) -> Tuple[float, float]:
    lo, hi = frequency_band(params)
    return lo / (2.0 * math.pi), hi / (2.0 * math.pi)


def x_of_xi(params: StringLawParams, xi: ArrayLike) -> ArrayLike:
    """Position of the string whose undamped fundamental is xi."""
    _check_positive("xi", xi)
    lo, hi = frequency_band(params)
    arr = np.asarray(xi, dtype=float)
    if np.any(arr < lo * (1.0 - _BAND_SLACK)) or np.any(arr > hi * (1.0 + _BAND_SLACK)):
        raise DomainError(
            f"xi outside the covered band [{lo:.6g}, {hi:.6g}] rad/s"
        )
    d = derive(params)
    out = np.clip(np.log(d.A_tilde / arr) / d.k_tilde, 0.0, params.L)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------
# Coefficients as functions of xi
# ---------------------------------------------------------------------


def mu_of_xi(params: StringLawParams, xi: ArrayLike) -> ArrayLike:
    """Damping rate mu = gamma/rho = B_mu xi^alpha [1/s]."""
    _check_positive("xi", xi)
    d = derive(params)
    return d.B_mu * np.power(xi, d.alpha)


def nu_n_of_xi(params: StringLawParams, xi: ArrayLike, n: int) -> ArrayLike:
    """Forcing gain of mode n; exactly zero for even n."""
    _check_positive("xi", xi)
    _check_mode(n)
    if n % 2 == 0:
        return 0.0 * np.asarray(xi, dtype=float) if np.ndim(xi) else 0.0
    d = derive(params)
    return d.B_nu * np.power(xi, 2.0 * params.k_rho / params.exponent_sum) / n


def T_of_xi(params: StringLawParams, xi: ArrayLike) -> ArrayLike:
    _check_positive("xi", xi)
    d = derive(params)
    return d.B_T * np.power(xi, 2.0 * params.k_T / params.exponent_sum)


def rho_of_xi(params: StringLawParams, xi: ArrayLike) -> ArrayLike:
    _check_positive("xi", xi)
    d = derive(params)
    return params.A_rho * np.power(np.asarray(xi, dtype=float) / d.A_tilde, -2.0 * params.k_rho / params.exponent_sum)


def ell_of_x(params: StringLawParams, x: ArrayLike) -> ArrayLike:
    """String length at x. Constant in this version; every closed form assumes it."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr > params.L):
        raise DomainError(f"x must lie in [0, {params.L}]")
    out = np.full_like(arr, params.ell)
    return float(out) if np.ndim(out) == 0 else out


def mode_coefficients(params: StringLawParams, xi: float, n: int) -> ModeCoefficients:
    return ModeCoefficients(
        xi=float(xi),
        n=int(n),
        mu=float(mu_of_xi(params, xi)),
        nu=float(nu_n_of_xi(params, xi, n)),
    )


# ---------------------------------------------------------------------
# Damping regime
# ---------------------------------------------------------------------


def classify_coefficients(coeffs: ModeCoefficients) -> DampingClass:
    half = coeffs.mu / 2.0
    if coeffs.natural > half:
        return DampingClass("underdamped", math.sqrt(coeffs.natural**2 - half**2))
    return DampingClass("overdamped", None)


def damping_class(params: StringLawParams, xi: float, n: int) -> DampingClass:
    """Underdamped iff n xi > mu(xi)/2; the eigenvalues are -mu/2 +- i omega_n."""
    return classify_coefficients(mode_coefficients(params, xi, n))


def damping_crossover(params: StringLawParams, n: int = 1, factor: float = 0.5) -> float:
    """
    The xi where n xi = factor * mu(xi).

    factor=0.5 is the under/overdamped boundary. factor=1 is where the string
    frequency equals the damping rate, which for the modified set lands near 18 Hz.
    """
    _check_mode(n)
    d = derive(params)
    if d.alpha >= 1.0:
        raise DomainError("closed-form crossover needs alpha < 1")
    return (factor * d.B_mu / n) ** (1.0 / (1.0 - d.alpha))


def string_frequencies(params: StringLawParams, xi: float) -> StringFrequencies:
    """xi, the damped resonance omega_1 and the response-maximizing drive k_1^max (None if undefined)."""
    coeffs = mode_coefficients(params, xi, 1)
    regime = classify_coefficients(coeffs)
    radicand = xi**2 - coeffs.mu**2 / 2.0
    return StringFrequencies(
        xi=float(xi),
        omega_1=regime.omega,
        k1_max=math.sqrt(radicand) if radicand > 0 else None,
    )


# ---------------------------------------------------------------------
# Named parameter sets
# ---------------------------------------------------------------------


def builtin_parameter_sets() -> Dict[str, StringLawParams]:
    return {
        "nobili2003": StringLawParams(
            A_rho=3.4e-3, k_rho=2.9,
            A_T=1.5, k_T=8.5,
            A_gamma=8.3, k_gamma=-1.6,
            ell=2.9e-4,
            name="nobili2003",
        ),
        "modified_a03": StringLawParams(
            A_rho=6.9e-3, k_rho=2.3,
            A_T=0.94, k_T=11.5,
            A_gamma=8.3, k_gamma=0.0,
            ell=2.9e-4,
            name="modified_a03",
        ),
    }


_NUMERIC_KEYS = ("A_rho", "k_rho", "A_T", "k_T", "A_gamma", "k_gamma", "ell", "L", "c")
_REQUIRED_KEYS = ("A_rho", "k_rho", "A_T", "k_T", "A_gamma", "k_gamma", "ell")
_LINE_RE = re.compile(r"^(?P<key>[A-Za-z_]\w*)\s*=\s*(?P<value>.+?)$")


def load_params_file(path: Union[str, Path]) -> StringLawParams:
    """
    Parse a flat key-value parameter file.

    Expected format (SI units, '#' starts a comment):

      A_rho = 6.9e-3
      k_rho = 2.3
      ...
      name = my_set      # optional, defaults to the file stem
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read params file {p}: {exc}") from exc

    values: Dict[str, float] = {}
    name = p.stem
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE_RE.match(line)
        if not m:
            raise ConfigError(f"{p}:{lineno}: expected 'name = value', got {raw!r}")
        key, value = m.group("key"), m.group("value").strip()
        if key == "name":
            name = value
            continue
        if key not in _NUMERIC_KEYS:
            raise ConfigError(f"{p}:{lineno}: unknown parameter {key!r}")
        try:
            values[key] = float(value)
        except ValueError as exc:
            raise ConfigError(f"{p}:{lineno}: {key} is not a number: {value!r}") from exc

    missing = [k for k in _REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigError(f"{p}: missing parameters {', '.join(missing)}")
    try:
        return StringLawParams(name=name, **values)
    except DomainError as exc:
        raise ConfigError(f"{p}: {exc}") from exc


def save_params_file(params: StringLawParams, path: Union[str, Path]) -> Path:
    p = Path(path)
    lines = [f"# string-bank parameters ({params.name}), SI units", f"name = {params.name}"]
    lines += [f"{key} = {getattr(params, key)!r}" for key in _NUMERIC_KEYS]
    p.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return p


def resolve_params(ref: str) -> StringLawParams:
    """Builtin id or path to a params file."""
    sets = builtin_parameter_sets()
    if ref in sets:
        return sets[ref]
    if Path(ref).is_file():
        return load_params_file(ref)
    raise ConfigError(
        f"unknown parameter set {ref!r} (builtin: {', '.join(sorted(sets))}; or a params file path)"
    )
