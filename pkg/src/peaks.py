"""
peaks.py

Peak detection over E(xi, t_index), harmonic / sub-harmonic classification
against a reference fundamental, and Scientific Pitch Notation names.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import find_peaks as _scipy_find_peaks

from src.energy import EnergyField
from src.errors import ConfigError, DomainError

# Flat spellings, matching the published interval table.
NOTE_NAMES = ("C", "D♭", "D", "E♭", "E", "F", "G♭", "G", "A♭", "A", "B♭", "B")
_ACCIDENTALS = {"": 0, "#": 1, "♯": 1, "b": -1, "♭": -1}
_NATURAL = {"C": 0, "D": 2, "E": 4, "F": 5, "G": 7, "A": 9, "B": 11}
_NOTE_RE = re.compile(r"^(?P<letter>[A-G])(?P<accidental>[#b♯♭]?)(?P<octave>-?\d+)$")

# Just ratios (octave-reduced) whose table spelling differs from the 12-TET
# nearest note when the reference is a C.
_JUST_SPELLINGS = {Fraction(25, 24): ("C♯", ""), Fraction(10, 9): ("D", "*")}

A4_HZ = 440.0
A4_MIDI = 69


@dataclass(frozen=True)
class NoteName:
    name: str
    octave: int
    cents: float = 0.0
    marker: str = ""

    @property
    def label(self) -> str:
        return f"{self.name}{self.octave}{self.marker}"

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class Classification:
    kind: str  # harmonic | subharmonic | mixed | unclassified
    j: Optional[int] = None
    n: Optional[int] = None
    cents_off: Optional[float] = None

    @property
    def label(self) -> str:
        if self.kind == "harmonic":
            return f"harmonic({self.j})"
        if self.kind == "subharmonic":
            return f"subharmonic({self.n})"
        if self.kind == "mixed":
            return f"mixed({self.j},{self.n})"
        return "unclassified"


@dataclass(frozen=True)
class Peak:
    xi: float
    freq_hz: float
    energy: float
    prominence: float
    classification: Classification
    note: NoteName
    index: int


# ---------------------------------------------------------------------
# Note naming
# ---------------------------------------------------------------------


def _midi_label(midi: int, cents: float = 0.0) -> NoteName:
    return NoteName(NOTE_NAMES[midi % 12], midi // 12 - 1, cents)


def note_name(freq_hz: float) -> NoteName:
    """Nearest 12-TET note (A4 = 440 Hz); cents offset in [-50, 50)."""
    if not freq_hz > 0:
        raise DomainError(f"frequency must be > 0 Hz, got {freq_hz!r}")
    x = A4_MIDI + 12.0 * math.log2(freq_hz / A4_HZ)
    midi = math.floor(x + 0.5)
    return _midi_label(midi, (x - midi) * 100.0)


def parse_note(text: str) -> int:
    """'C4' / 'A♭1' / 'Bb0' / 'C#4' / 'F-1' -> MIDI number."""
    m = _NOTE_RE.match(text.strip())
    if not m:
        raise ConfigError(f"not a note in scientific pitch notation: {text!r}")
    shift = _ACCIDENTALS[m.group("accidental")]
    return (int(m.group("octave")) + 1) * 12 + _NATURAL[m.group("letter")] + shift


def note_for_ratio(ratio: Fraction, base: str = "C4") -> NoteName:
    """
    Name of the note at ratio * base, counted in semitones from the base note.

    When the base is a C, the just ratios 25/24 and 10/9 keep the interval
    table's spellings (C♯, D*) instead of the 12-TET nearest name.
    """
    if ratio <= 0:
        raise DomainError(f"ratio must be > 0, got {ratio}")
    base_midi = parse_note(base)
    semis = math.floor(12.0 * math.log2(ratio) + 0.5)
    midi = base_midi + semis
    label = _midi_label(midi)
    if base_midi % 12 == 0:
        reduced, octaves = Fraction(ratio), 0
        while reduced >= 2:
            reduced, octaves = reduced / 2, octaves + 1
        while reduced < 1:
            reduced, octaves = reduced * 2, octaves - 1
        if reduced in _JUST_SPELLINGS:
            name, marker = _JUST_SPELLINGS[reduced]
            return NoteName(name, base_midi // 12 - 1 + octaves, 0.0, marker)
    return label


# ---------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------


def classify(
    freq_hz: float,
    fundamental_hz: float,
    tolerance_cents: float = 15.0,
    j_max: int = 16,
    n_max: int = 15,
) -> Classification:
    """
    Smallest j/n (odd n <= n_max, j <= j_max) within tolerance of freq/fundamental.

    Minimal n wins, then minimal j: f/1 is harmonic(1), never mixed(3, 3).
    """
    if not fundamental_hz > 0:
        raise DomainError(f"fundamental must be > 0 Hz, got {fundamental_hz!r}")
    if not freq_hz > 0:
        return Classification("unclassified")
    for n in range(1, n_max + 1, 2):
        for j in range(1, j_max + 1):
            off = 1200.0 * math.log2(freq_hz * n / (j * fundamental_hz))
            if abs(off) <= tolerance_cents:
                if n == 1:
                    return Classification("harmonic", j, 1, off)
                if j == 1:
                    return Classification("subharmonic", 1, n, off)
                return Classification("mixed", j, n, off)
    return Classification("unclassified")


# ---------------------------------------------------------------------
# Peak detection
# ---------------------------------------------------------------------


def qint3(ym1: float, y0: float, yp1: float) -> Tuple[float, float]:
    """Vertex of the parabola through three equally spaced samples: (offset, value)."""
    denom = 2.0 * (2.0 * y0 - yp1 - ym1)
    if denom == 0.0:
        return 0.0, y0
    p = (yp1 - ym1) / denom
    return p, y0 - 0.25 * (ym1 - yp1) * p


def find_profile_peaks(
    xi: np.ndarray, values: np.ndarray, min_prominence_ratio: float = 1e-3
) -> List[Tuple[float, float, float, int]]:
    """
    Strict local maxima of a 1-D profile over a log-spaced xi axis.

    Returns (xi_refined, value_refined, prominence, grid_index) sorted by value, largest first.
    Refinement fits a parabola through the three samples around the maximum in log xi.
    """
    xi = np.asarray(xi, dtype=float)
    y = np.asarray(values, dtype=float)
    if y.size < 3:
        return []
    top = float(np.max(y))
    if not top > 0:
        return []
    idx, props = _scipy_find_peaks(y, prominence=min_prominence_ratio * top)
    log_xi = np.log(xi)
    out = []
    for i, prom in zip(idx, props["prominences"]):
        if not (y[i] > y[i - 1] and y[i] > y[i + 1]) or prom <= 0:
            continue
        p, value = qint3(y[i - 1], y[i], y[i + 1])
        step = (log_xi[i + 1] - log_xi[i - 1]) / 2.0
        out.append((float(math.exp(log_xi[i] + p * step)), float(value), float(prom), int(i)))
    out.sort(key=lambda row: row[1], reverse=True)
    return out


def find_peaks(
    field: EnergyField,
    t_index: int = 0,
    min_prominence_ratio: float = 1e-3,
    fundamental_hz: Optional[float] = None,
    modes: Optional[Sequence[int]] = None,
    tolerance_cents: float = 15.0,
) -> List[Peak]:
    """
    Peaks of E(xi, t_index) (or of the partial sum over `modes`), largest first.

    Without a fundamental (argument or field metadata) every peak is unclassified.
    """
    if field.total.size == 0:
        raise DomainError("empty field")
    if not 0 <= t_index < field.t_axis.size:
        raise DomainError(f"t_index must be in [0, {field.t_axis.size}), got {t_index}")
    profile = field.partial(modes)[:, t_index] if modes is not None else field.at_time(t_index)
    f0 = fundamental_hz if fundamental_hz is not None else field.metadata.get("fundamental_hz")

    peaks: List[Peak] = []
    for xi, value, prom, i in find_profile_peaks(field.xi_axis, profile, min_prominence_ratio):
        freq = xi / (2.0 * math.pi)
        cls = classify(freq, f0, tolerance_cents) if f0 else Classification("unclassified")
        peaks.append(Peak(xi, freq, value, prom, cls, note_name(freq), i))
    return peaks


def format_peaks_table(peaks: Sequence[Peak]) -> str:
    header = f"{'#':>3}  {'freq_hz':>12}  {'note':<6} {'cents':>7}  {'energy':>12}  {'prominence':>12}  class"
    lines = [header, "-" * len(header)]
    for rank, pk in enumerate(peaks, start=1):
        lines.append(
            f"{rank:>3}  {pk.freq_hz:>12.4f}  {pk.note.label:<6} {pk.note.cents:>+7.1f}  "
            f"{pk.energy:>12.5e}  {pk.prominence:>12.5e}  {pk.classification.label}"
        )
    return "\n".join(lines)
