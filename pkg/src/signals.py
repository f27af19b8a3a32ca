"""
signals.py

Forcing signals F(t) acting uniformly along each string:

- PeriodicSignal: sum_j c_j sin(j k t + phi_j), zero average
- TwoTone:        c1 sin(k1 t + phi1) + c0 sin(k0 t + phi2), k1 > k0

plus WAV ingestion (autocorrelation pitch + harmonic projection) and the
`kind:arg:arg` spec strings accepted by the CLI.

Hz appears only in constructors and serialized forms; the stored k values
are angular frequencies.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.io import wavfile
from scipy.signal import correlate, find_peaks

from src.errors import ConfigError, DomainError, NotGenuineSoundError

TWO_PI = 2.0 * math.pi


# -----------------------------------------------------------------------------
# Signal contracts
# -----------------------------------------------------------------------------
#
# Every forcing exposes:
#   - drives() -> Tuple[Drive, ...]     (the sinusoidal lines the strings respond to)
#   - __call__(t), derivative(t)        (vectorized over t)
#   - describe() -> str                 (short label for metadata)
#
# The modal and energy modules only ever look at drives().
# -----------------------------------------------------------------------------


@dataclass(frozen=True)
class Drive:
    """One sinusoidal line amplitude * sin(k t + phase)."""

    k: float
    amplitude: float
    phase: float


@dataclass(frozen=True)
class Component:
    j: int
    amplitude: float
    phase: float


@dataclass(frozen=True)
class PeriodicSignal:
    k: float
    components: Tuple[Component, ...]

    def __post_init__(self) -> None:
        if not (math.isfinite(self.k) and self.k > 0):
            raise DomainError(f"fundamental angular frequency must be > 0, got {self.k!r}")
        object.__setattr__(self, "components", tuple(self.components))
        last = 0
        for comp in self.components:
            if int(comp.j) != comp.j or comp.j <= last:
                raise DomainError("harmonic indices must be integers >= 1, strictly increasing")
            if not (math.isfinite(comp.amplitude) and math.isfinite(comp.phase)):
                raise DomainError(f"component {comp.j} has a non-finite amplitude or phase")
            last = comp.j

    @property
    def fundamental_hz(self) -> float:
        return self.k / TWO_PI

    @property
    def period(self) -> float:
        return TWO_PI / self.k

    def drives(self) -> Tuple[Drive, ...]:
        return tuple(Drive(c.j * self.k, c.amplitude, c.phase) for c in self.components)

    def __call__(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for d in self.drives():
            out = out + d.amplitude * np.sin(d.k * t + d.phase)
        return float(out) if out.ndim == 0 else out

    def derivative(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for d in self.drives():
            out = out + d.amplitude * d.k * np.cos(d.k * t + d.phase)
        return float(out) if out.ndim == 0 else out

    def scaled(self, factor: float) -> "PeriodicSignal":
        return PeriodicSignal(
            self.k,
            tuple(Component(c.j, c.amplitude * factor, c.phase) for c in self.components),
        )

    def is_single_sine(self) -> bool:
        return len(self.components) == 1

    def describe(self) -> str:
        return f"periodic f={self.fundamental_hz:.6g}Hz J={len(self.components)}"

    def to_json(self) -> Dict[str, Any]:
        return {
            "fundamental_hz": self.fundamental_hz,
            "components": [[c.j, c.amplitude, c.phase] for c in self.components],
        }

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "PeriodicSignal":
        try:
            comps = tuple(Component(int(j), float(c), float(phi)) for j, c, phi in data["components"])
            return cls(TWO_PI * float(data["fundamental_hz"]), comps)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed periodic-signal JSON: {exc}") from exc


@dataclass(frozen=True)
class TwoTone:
    """Two simultaneous sines. `ratio` is the exact k1/k0 when built from integers."""

    k1: float
    k0: float
    c1: float = 1.0
    c0: float = 1.0
    phi1: float = 0.0
    phi2: float = 0.0
    ratio: Optional[Fraction] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if not (self.k0 > 0 and self.k1 > self.k0):
            raise DomainError(f"two-tone needs k1 > k0 > 0, got k1={self.k1!r}, k0={self.k0!r}")

    def drives(self) -> Tuple[Drive, ...]:
        return (Drive(self.k1, self.c1, self.phi1), Drive(self.k0, self.c0, self.phi2))

    def __call__(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        t = np.asarray(t, dtype=float)
        out = self.c1 * np.sin(self.k1 * t + self.phi1) + self.c0 * np.sin(self.k0 * t + self.phi2)
        return float(out) if out.ndim == 0 else out

    def derivative(self, t: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        t = np.asarray(t, dtype=float)
        out = self.c1 * self.k1 * np.cos(self.k1 * t + self.phi1) + self.c0 * self.k0 * np.cos(
            self.k0 * t + self.phi2
        )
        return float(out) if out.ndim == 0 else out

    def scaled(self, factor: float) -> "TwoTone":
        return TwoTone(self.k1, self.k0, self.c1 * factor, self.c0 * factor, self.phi1, self.phi2, self.ratio)

    def as_periodic(self, u: int, w: int) -> PeriodicSignal:
        """Same signal written over the common fundamental k0/w (u, w coprime)."""
        g = self.k0 / w
        return PeriodicSignal(
            g,
            (Component(w, self.c0, self.phi2), Component(u, self.c1, self.phi1)),
        )

    def describe(self) -> str:
        ratio = f" ratio={self.ratio}" if self.ratio is not None else ""
        return f"twotone f1={self.k1 / TWO_PI:.6g}Hz f0={self.k0 / TWO_PI:.6g}Hz{ratio}"


Forcing = Union[PeriodicSignal, TwoTone]


# ---------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------


def sine(freq_hz: float, amplitude: float = 1.0, phase: float = 0.0) -> PeriodicSignal:
    if not freq_hz > 0:
        raise DomainError(f"frequency must be > 0 Hz, got {freq_hz!r}")
    return PeriodicSignal(TWO_PI * freq_hz, (Component(1, float(amplitude), float(phase)),))


def sawtooth(freq_hz: float, n_harmonics: int) -> PeriodicSignal:
    """
    Rising sawtooth with peak 1: (2/pi) sum (-1)^(j+1) sin(j k t)/j.

    The sign is carried by the phase (0 for odd j, pi for even j), so every
    stored amplitude is positive.
    """
    if not freq_hz > 0:
        raise DomainError(f"frequency must be > 0 Hz, got {freq_hz!r}")
    if int(n_harmonics) != n_harmonics or n_harmonics < 1:
        raise DomainError(f"n_harmonics must be an integer >= 1, got {n_harmonics!r}")
    comps = tuple(
        Component(j, 2.0 / (math.pi * j), 0.0 if j % 2 == 1 else math.pi)
        for j in range(1, int(n_harmonics) + 1)
    )
    return PeriodicSignal(TWO_PI * freq_hz, comps)


def two_tone(
    k0_hz: float,
    u: int,
    w: int,
    c1: float = 1.0,
    c0: float = 1.0,
    phi1: float = 0.0,
    phi2: float = 0.0,
) -> TwoTone:
    """Two tones at f0 and (u/w) f0, with the ratio kept exactly."""
    if not k0_hz > 0:
        raise DomainError(f"frequency must be > 0 Hz, got {k0_hz!r}")
    ratio = Fraction(int(u), int(w))
    if ratio <= 1:
        raise DomainError(f"two-tone ratio must exceed 1, got {u}/{w}")
    k0 = TWO_PI * k0_hz
    k1 = k0 * ratio.numerator / ratio.denominator
    return TwoTone(k1, k0, c1, c0, phi1, phi2, ratio)


# ---------------------------------------------------------------------
# Audio: synthesis and ingestion
# ---------------------------------------------------------------------


def synthesize(forcing: Forcing, sample_rate: int, duration: float) -> np.ndarray:
    n = int(round(sample_rate * duration))
    t = np.arange(n, dtype=float) / sample_rate
    return np.asarray(forcing(t), dtype=float)


def write_wav(
    path: Union[str, Path],
    forcing: Forcing,
    sample_rate: int = 44100,
    duration: float = 1.0,
    sample_format: str = "int16",
) -> Path:
    """Render forcing to a mono WAV; int16 output is peak-normalized to 0.9 full scale."""
    x = synthesize(forcing, sample_rate, duration)
    if sample_format == "int16":
        peak = float(np.max(np.abs(x))) if x.size else 0.0
        scale = 0.9 * 32767.0 / peak if peak > 0 else 0.0
        data = np.round(x * scale).astype(np.int16)
    elif sample_format == "float32":
        data = x.astype(np.float32)
    else:
        raise ConfigError(f"unsupported sample format {sample_format!r} (int16 | float32)")
    p = Path(path)
    wavfile.write(str(p), sample_rate, data)
    return p


def _pcm_to_float(data: np.ndarray) -> np.ndarray:
    if data.dtype == np.int16:
        return data.astype(float) / 32768.0
    if data.dtype == np.int32:
        return data.astype(float) / 2147483648.0
    if data.dtype == np.uint8:
        return (data.astype(float) - 128.0) / 128.0
    if np.issubdtype(data.dtype, np.floating):
        return data.astype(float)
    raise ConfigError(f"unsupported WAV sample type {data.dtype}")


def _normalized_acf(x: np.ndarray, max_lag: int) -> np.ndarray:
    """Unbiased autocorrelation normalized to 1 at lag 0."""
    n = len(x)
    full = correlate(x, x, mode="full", method="fft")[n - 1 : n - 1 + max_lag + 1]
    acf = full / (n - np.arange(len(full)))
    return acf / acf[0]


def estimate_fundamental(
    x: np.ndarray,
    sample_rate: int,
    min_hz: float = 20.0,
    threshold: float = 0.5,
) -> float:
    """
    Fundamental via the first strong autocorrelation peak.

    Candidates are ACF maxima past the first zero crossing that reach `threshold`;
    the earliest one within 90% of the best is taken (octave-error guard), then
    refined by parabolic interpolation.
    """
    from src.peaks import qint3  # peaks imports signals through energy

    max_lag = min(int(sample_rate / min_hz), len(x) // 2)
    if max_lag < 4:
        raise NotGenuineSoundError("signal too short for pitch analysis")
    acf = _normalized_acf(x, max_lag)

    below = np.nonzero(acf <= 0.0)[0]
    if below.size == 0:
        raise NotGenuineSoundError("autocorrelation never decays")
    start = int(below[0])

    idx, props = find_peaks(acf[start:], height=threshold)
    if idx.size == 0:
        raise NotGenuineSoundError(f"no autocorrelation peak above {threshold}")
    heights = props["peak_heights"]
    lag = int(idx[np.nonzero(heights >= 0.9 * heights.max())[0][0]]) + start
    if lag + 1 >= len(acf):
        raise NotGenuineSoundError("autocorrelation peak at the edge of the lag range")

    offset, _ = qint3(acf[lag - 1], acf[lag], acf[lag + 1])
    return sample_rate / (lag + offset)


def project_harmonics(
    x: np.ndarray,
    sample_rate: int,
    fundamental_hz: float,
    j_max: int = 32,
) -> List[Component]:
    """Least-squares projection onto sin/cos at j f0, j = 1..j_max below Nyquist."""
    nyquist = sample_rate / 2.0
    js = [j for j in range(1, j_max + 1) if j * fundamental_hz < nyquist]
    t = np.arange(len(x), dtype=float) / sample_rate
    basis = []
    for j in js:
        w = TWO_PI * j * fundamental_hz
        basis.append(np.sin(w * t))
        basis.append(np.cos(w * t))
    coef, *_ = np.linalg.lstsq(np.column_stack(basis), x, rcond=None)
    comps: List[Component] = []
    for i, j in enumerate(js):
        a, b = coef[2 * i], coef[2 * i + 1]
        # a sin + b cos = c sin(theta + phi)
        comps.append(Component(j, float(math.hypot(a, b)), float(math.atan2(b, a))))
    return comps


def from_wav(
    path: Union[str, Path],
    j_max: int = 32,
    threshold: float = 0.5,
    min_hz: float = 20.0,
    analysis_periods: int = 32,
    min_rel_amplitude: float = 1e-3,
) -> PeriodicSignal:
    """
    Read a (nearly) periodic PCM WAV into a PeriodicSignal.

    Steps: first channel, mean removed -> autocorrelation fundamental ->
    harmonic projection over an integer number of estimated periods.
    Components weaker than min_rel_amplitude * strongest are dropped.
    """
    try:
        sample_rate, data = wavfile.read(str(path))
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read WAV file {path}: {exc}") from exc

    if data.ndim > 1:
        data = data[:, 0]
    x = _pcm_to_float(data)
    x = x - x.mean() if x.size else x
    if x.size == 0 or not np.any(x):
        raise NotGenuineSoundError("silent or empty input")

    window = x[: min(len(x), 1 << 16)]
    f0 = estimate_fundamental(window, sample_rate, min_hz=min_hz, threshold=threshold)

    period_samples = sample_rate / f0
    periods = max(1, min(analysis_periods, int(len(x) / period_samples)))
    n = int(round(periods * period_samples))
    comps = project_harmonics(x[:n], sample_rate, f0, j_max=j_max)

    strongest = max(c.amplitude for c in comps)
    kept = tuple(c for c in comps if c.amplitude >= min_rel_amplitude * strongest)
    return PeriodicSignal(TWO_PI * f0, kept)


# ---------------------------------------------------------------------
# CLI spec strings
# ---------------------------------------------------------------------


def _number(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"{what} must be a number, got {text!r}") from exc


def _whole(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"{what} must be an integer, got {text!r}") from exc


def parse_ratio(text: str) -> Tuple[int, int]:
    """'7/3' -> (7, 3). Integers only: frequency pairs are never rounded into ratios."""
    try:
        num, den = text.split("/")
        u, w = int(num), int(den)
    except ValueError as exc:
        raise ConfigError(f"ratio must look like 'u/w' with integers, got {text!r}") from exc
    if w < 1 or u <= w:
        raise ConfigError(f"ratio must satisfy u > w >= 1, got {text!r}")
    return u, w


def parse_signal_spec(spec: str) -> Forcing:
    """
    Parse a signal spec string:

      sine:262[:amp[:phase]]
      sawtooth:262[:n_harmonics]     (default 8 harmonics)
      twotone:262:7/3                (f0 = 262 Hz, f1 = 7/3 f0)
      wav:path/to/file.wav
      json:path/to/signal.json
    """
    kind, _, rest = spec.partition(":")
    args: Sequence[str] = rest.split(":") if rest else []

    if kind in ("wav", "json"):
        if not rest:
            raise ConfigError(f"{kind} spec needs a path, e.g. {kind}:file")
        if kind == "wav":
            return from_wav(rest)
        try:
            return PeriodicSignal.from_json(json.loads(Path(rest).read_text(encoding="utf-8")))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read signal JSON {rest}: {exc}") from exc

    if kind == "sine" and 1 <= len(args) <= 3:
        values = [_number(a, "sine argument") for a in args]
        return sine(*values)
    if kind == "sawtooth" and 1 <= len(args) <= 2:
        f = _number(args[0], "frequency")
        n = _whole(args[1], "n_harmonics") if len(args) == 2 else 8
        return sawtooth(f, n)
    if kind == "twotone" and len(args) == 2:
        u, w = parse_ratio(args[1])
        return two_tone(_number(args[0], "frequency"), u, w)

    raise ConfigError(
        f"bad signal spec {spec!r} (sine:F[:A[:PHI]] | sawtooth:F[:N] | twotone:F:U/W | wav:PATH | json:PATH)"
    )
