"""
combtone.py

Combination tones of two simultaneous sines k1 = (u/w) k0, in exact
rational arithmetic:

  difference tone        k1 - k0                 = ((u - w)/w) k0
  GCD of the frequencies GCD(k0, k1)             = k0 / w
  energy oscillation     (k1 - k0) / q           with (k1 + k0)/(k1 - k0) = p/q irreducible

The energy period 2 pi q / (k1 - k0) is checked numerically by sampling E(xi, t).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from src.energy import energy_at, energy_prefactor
from src.errors import DomainError, InconsistentIntervalError
from src.modal import response
from src.params import StringLawParams
from src.peaks import note_for_ratio
from src.signals import TwoTone

# Natural intervals within one octave, in the order of the published table.
NATURAL_INTERVALS: Tuple[Tuple[str, Fraction], ...] = (
    ("octave", Fraction(2)),
    ("fifth", Fraction(3, 2)),
    ("major third", Fraction(5, 4)),
    ("fourth", Fraction(4, 3)),
    ("minor third", Fraction(6, 5)),
    ("major sixth", Fraction(5, 3)),
    ("minor sixth", Fraction(8, 5)),
    ("major seventh", Fraction(15, 8)),
    ("minor seventh", Fraction(9, 5)),
    ("major tone", Fraction(9, 8)),
    ("minor tone", Fraction(10, 9)),
    ("diatonic semitone", Fraction(16, 15)),
    ("chromatic semitone", Fraction(25, 24)),
)


@dataclass(frozen=True)
class IntervalRatio:
    """k1/k0 = u/w in lowest terms; (u + w)/(u - w) = p/q in lowest terms; h = gcd(u + w, u - w)."""

    u: int
    w: int
    p: int
    q: int
    h: int
    reduced: bool = False  # input was not in lowest terms

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.u, self.w)


@dataclass(frozen=True)
class CombinationPrediction:
    """Frequencies as exact multiples of k0; periods as exact multiples of 2 pi / k0."""

    interval: IntervalRatio
    k0: float
    helmholtz: Fraction
    lagrange: Fraction
    ours: Fraction
    period_ours: Fraction
    period_helmholtz: Fraction
    period_lagrange: Fraction

    def angular(self, which: str) -> float:
        return float(getattr(self, which)) * self.k0

    def period_seconds(self, which: str = "ours") -> float:
        return float(getattr(self, f"period_{which}")) * 2.0 * math.pi / self.k0


# ---------------------------------------------------------------------
# Exact arithmetic
# ---------------------------------------------------------------------


def interval_from_fraction(u: int, w: int) -> IntervalRatio:
    if int(u) != u or int(w) != w or w < 1 or u <= w:
        raise DomainError(f"interval needs integers u > w >= 1, got {u}/{w}")
    u, w = int(u), int(w)
    g = math.gcd(u, w)
    u, w = u // g, w // g
    h = math.gcd(u + w, u - w)
    return IntervalRatio(u, w, (u + w) // h, (u - w) // h, h, reduced=g > 1)


def rational_gcd(x: Fraction, y: Fraction) -> Fraction:
    """Largest g with x = a g and y = b g for integers a, b."""
    x, y = Fraction(x), Fraction(y)
    den = x.denominator * y.denominator // math.gcd(x.denominator, y.denominator)
    return Fraction(math.gcd(x.numerator * (den // x.denominator), y.numerator * (den // y.denominator)), den)


def predict(interval: IntervalRatio, k0: float) -> CombinationPrediction:
    if not k0 > 0:
        raise DomainError(f"k0 must be > 0, got {k0!r}")
    u, w, q = interval.u, interval.w, interval.q
    helmholtz = Fraction(u - w, w)
    lagrange = rational_gcd(Fraction(1), Fraction(u, w))
    ours = helmholtz / q
    return CombinationPrediction(
        interval=interval,
        k0=float(k0),
        helmholtz=helmholtz,
        lagrange=lagrange,
        ours=ours,
        period_ours=1 / ours,
        period_helmholtz=1 / helmholtz,
        period_lagrange=1 / lagrange,
    )


# ---------------------------------------------------------------------
# Table of natural intervals
# ---------------------------------------------------------------------


@dataclass(frozen=True)
class Table1Row:
    interval: str
    ratio: Fraction
    k1_note: str
    helmholtz: Fraction
    helmholtz_note: str
    lagrange: Fraction
    lagrange_note: str
    p_over_q: Fraction
    q: int
    ours: Fraction
    ours_note: str

    def cells(self) -> List[str]:
        return [
            self.interval,
            str(self.ratio),
            self.k1_note,
            str(self.helmholtz),
            self.helmholtz_note,
            str(self.lagrange),
            self.lagrange_note,
            str(self.p_over_q),
            str(self.q),
            str(self.ours),
            self.ours_note,
        ]


TABLE1_HEADER = [
    "interval", "ratio", "k1_note",
    "helmholtz", "helmholtz_note",
    "lagrange", "lagrange_note",
    "p_over_q", "q",
    "ours", "ours_note",
]


def table1(k0_note: str = "C4") -> List[Table1Row]:
    rows: List[Table1Row] = []
    for name, ratio in NATURAL_INTERVALS:
        interval = interval_from_fraction(ratio.numerator, ratio.denominator)
        pred = predict(interval, 1.0)
        rows.append(
            Table1Row(
                interval=name,
                ratio=ratio,
                k1_note=note_for_ratio(ratio, k0_note).label,
                helmholtz=pred.helmholtz,
                helmholtz_note=note_for_ratio(pred.helmholtz, k0_note).label,
                lagrange=pred.lagrange,
                lagrange_note=note_for_ratio(pred.lagrange, k0_note).label,
                p_over_q=Fraction(interval.p, interval.q),
                q=interval.q,
                ours=pred.ours,
                ours_note=note_for_ratio(pred.ours, k0_note).label,
            )
        )
    return rows


def format_table1_csv(rows: List[Table1Row]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TABLE1_HEADER)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()


def format_table1_text(rows: List[Table1Row]) -> str:
    grid = [TABLE1_HEADER] + [row.cells() for row in rows]
    widths = [max(len(r[i]) for r in grid) for i in range(len(TABLE1_HEADER))]
    lines = ["  ".join(cell.ljust(width) for cell, width in zip(r, widths)).rstrip() for r in grid]
    lines.insert(1, "  ".join("-" * width for width in widths))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------
# Two-tone modal response
# ---------------------------------------------------------------------


@dataclass(frozen=True)
class TwoToneModeTerms:
    """
    E_n(t) = (a1 sin(k1 t + alpha1) + a0 sin(k0 t + alpha0))^2
           + (b1 sin(k1 t + beta1)  + b0 sin(k0 t + beta0))^2
    """

    n: int
    a1: float
    a0: float
    alpha1: float
    alpha0: float
    b1: float
    b0: float
    beta1: float
    beta0: float


@dataclass(frozen=True)
class TwoToneModalResponse:
    xi: float
    k1: float
    k0: float
    modes: Tuple[TwoToneModeTerms, ...]

    def split(self, t: np.ndarray, n: Optional[int] = None) -> Dict[str, np.ndarray]:
        """f0, f1, f2 (displacement part) and g0, g1, g2 (velocity part), summed over the selected modes."""
        t = np.asarray(t, dtype=float)
        parts = {key: np.zeros_like(t) for key in ("f0", "f1", "f2", "g0", "g1", "g2")}
        for m in self.modes:
            if n is not None and m.n != n:
                continue
            s1, s0 = np.sin(self.k1 * t + m.alpha1), np.sin(self.k0 * t + m.alpha0)
            c1, c0 = np.sin(self.k1 * t + m.beta1), np.sin(self.k0 * t + m.beta0)
            parts["f0"] += (m.a0 * s0) ** 2
            parts["f1"] += (m.a1 * s1) ** 2
            parts["f2"] += 2.0 * m.a1 * m.a0 * s1 * s0
            parts["g0"] += (m.b0 * c0) ** 2
            parts["g1"] += (m.b1 * c1) ** 2
            parts["g2"] += 2.0 * m.b1 * m.b0 * c1 * c0
        return parts

    def energy(self, t: np.ndarray, n: Optional[int] = None) -> np.ndarray:
        return sum(self.split(t, n).values())


def two_tone_response(params: StringLawParams, xi: float, twotone: TwoTone, n_max: int) -> TwoToneModalResponse:
    resp = response(params, xi, twotone, n_max)
    scale = math.sqrt(float(energy_prefactor(params, xi)))
    modes = []
    for n in resp.modes:
        by_k = {term.k: term for term in resp.terms if term.n == n}
        t1, t0 = by_k[twotone.k1], by_k[twotone.k0]
        a1, a0 = scale * n * t1.amplitude, scale * n * t0.amplitude
        modes.append(
            TwoToneModeTerms(
                n=n,
                a1=a1,
                a0=a0,
                alpha1=t1.phase,
                alpha0=t0.phase,
                b1=a1 * twotone.k1 / (xi * n),
                b0=a0 * twotone.k0 / (xi * n),
                beta1=t1.phase + math.pi / 2.0,
                beta0=t0.phase + math.pi / 2.0,
            )
        )
    return TwoToneModalResponse(float(xi), twotone.k1, twotone.k0, tuple(modes))


# ---------------------------------------------------------------------
# Period verification
# ---------------------------------------------------------------------


@dataclass
class PeriodVerification:
    interval: IntervalRatio
    xi: float
    claimed_period: float
    claimed_period_units: Fraction  # multiple of 2 pi / k0
    measured_ok: bool
    smaller_divisors_fail: bool
    divisor_checks: Dict[int, bool]
    helmholtz_period_holds: Optional[bool]
    lagrange_period_holds: bool
    lagrange_multiple: Fraction
    max_relative_deviation: float
    degenerate: bool = False
    logs: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        if self.degenerate:
            return True
        return self.measured_ok and self.smaller_divisors_fail and self.helmholtz_period_holds is not True

    def to_json(self) -> Dict[str, Any]:
        return {
            "u": self.interval.u,
            "w": self.interval.w,
            "p": self.interval.p,
            "q": self.interval.q,
            "h": self.interval.h,
            "xi": self.xi,
            "xi_hz": self.xi / (2.0 * math.pi),
            "claimed_period": self.claimed_period,
            "claimed_period_over_2pi_by_k0": str(self.claimed_period_units),
            "measured_ok": self.measured_ok,
            "smaller_divisors_fail": self.smaller_divisors_fail,
            "divisor_checks": {str(d): holds for d, holds in sorted(self.divisor_checks.items())},
            "helmholtz_period_holds": self.helmholtz_period_holds,
            "lagrange_period_holds": self.lagrange_period_holds,
            "lagrange_multiple": str(self.lagrange_multiple),
            "max_relative_deviation": self.max_relative_deviation,
            "degenerate": self.degenerate,
            "passed": self.passed,
            "logs": list(self.logs),
        }


def _prime_factors(value: int) -> List[int]:
    out, d = [], 2
    while d * d <= value:
        if value % d == 0:
            out.append(d)
            while value % d == 0:
                value //= d
        d += 1
    if value > 1:
        out.append(value)
    return out


def _check_consistent(twotone: TwoTone, interval: IntervalRatio) -> None:
    if twotone.ratio is not None:
        if twotone.ratio != interval.ratio:
            raise InconsistentIntervalError(f"two-tone ratio {twotone.ratio} != interval {interval.ratio}")
        return
    expected = interval.u / interval.w
    if abs(twotone.k1 / twotone.k0 - expected) > 1e-12 * expected:
        raise InconsistentIntervalError(
            f"k1/k0 = {twotone.k1 / twotone.k0!r} is not {interval.u}/{interval.w}"
        )


def verify_period(
    params: StringLawParams,
    twotone: TwoTone,
    interval: IntervalRatio,
    xi: float,
    n_max: int = 15,
    samples: int = 4096,
    rel_tol: float = 1e-9,
) -> PeriodVerification:
    """
    Check by sampling that E(xi, .) repeats after T = 2 pi q / (k1 - k0),
    and that it does not repeat after T/d for any prime d dividing 2 u w p q,
    nor after the difference-tone period when q > 1.
    """
    _check_consistent(twotone, interval)
    logs: List[str] = []
    pred = predict(interval, twotone.k0)
    period = pred.period_seconds("ours")
    t = np.linspace(0.0, 2.0 * period, samples, endpoint=False)
    base = energy_at(params, xi, twotone, t, n_max)
    scale = float(np.max(np.abs(base)))

    def deviation(shift: float) -> float:
        shifted = energy_at(params, xi, twotone, t + shift, n_max)
        return float(np.max(np.abs(shifted - base))) / scale

    if scale == 0.0:
        logs.append("[combtone] zero energy: every period holds, input is degenerate")
        return PeriodVerification(
            interval, float(xi), period, pred.period_ours, True, False, {}, None, True,
            pred.period_lagrange / pred.period_ours, 0.0, degenerate=True, logs=logs,
        )

    dev = deviation(period)
    measured_ok = dev < rel_tol
    logs.append(f"[combtone] T = {pred.period_ours} * 2pi/k0: max rel deviation {dev:.3e}")

    u, w, p, q = interval.u, interval.w, interval.p, interval.q
    divisor_checks = {d: deviation(period / d) < rel_tol for d in _prime_factors(2 * u * w * p * q)}
    for d, holds in divisor_checks.items():
        logs.append(f"[combtone] T/{d}: {'holds' if holds else 'fails'}")

    helmholtz_holds: Optional[bool] = None
    if q > 1:
        helmholtz_holds = deviation(pred.period_seconds("helmholtz")) < rel_tol
        logs.append(f"[combtone] difference-tone period: {'holds' if helmholtz_holds else 'fails'}")
    lagrange_holds = deviation(pred.period_seconds("lagrange")) < rel_tol

    return PeriodVerification(
        interval=interval,
        xi=float(xi),
        claimed_period=period,
        claimed_period_units=pred.period_ours,
        measured_ok=measured_ok,
        smaller_divisors_fail=not any(divisor_checks.values()),
        divisor_checks=divisor_checks,
        helmholtz_period_holds=helmholtz_holds,
        lagrange_period_holds=lagrange_holds,
        lagrange_multiple=pred.period_lagrange / pred.period_ours,
        max_relative_deviation=dev,
        logs=logs,
    )
