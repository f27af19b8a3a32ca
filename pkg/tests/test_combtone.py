from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from src.combtone import (
    format_table1_csv,
    format_table1_text,
    interval_from_fraction,
    predict,
    rational_gcd,
    table1,
    two_tone_response,
    verify_period,
)
from src.energy import energy_at
from src.errors import DomainError, InconsistentIntervalError
from src.signals import TwoTone, two_tone

TWO_PI = 2.0 * math.pi
K0 = TWO_PI * 262.0
XI = TWO_PI * 250.0


def test_table1_matches_golden_file(data_dir):
    golden = (data_dir / "table1.csv").read_bytes()
    assert format_table1_csv(table1()).encode("utf-8") == golden


def test_table1_text_lists_every_interval():
    text = format_table1_text(table1())
    assert text.splitlines()[0].startswith("interval")
    assert "chromatic semitone" in text
    assert len(text.splitlines()) == 2 + 13


def test_interval_reduction():
    iv = interval_from_fraction(7, 3)
    assert (iv.u, iv.w, iv.p, iv.q, iv.h) == (7, 3, 5, 2, 2)
    reduced = interval_from_fraction(6, 4)
    assert (reduced.u, reduced.w) == (3, 2) and reduced.reduced
    with pytest.raises(DomainError):
        interval_from_fraction(2, 3)
    with pytest.raises(DomainError):
        interval_from_fraction(3, 0)


def test_rational_gcd():
    assert rational_gcd(Fraction(1), Fraction(7, 3)) == Fraction(1, 3)
    assert rational_gcd(Fraction(3, 4), Fraction(1, 6)) == Fraction(1, 12)
    assert rational_gcd(Fraction(2), Fraction(4)) == Fraction(2)


@pytest.mark.parametrize(
    "u, w, helmholtz, lagrange, ours",
    [
        (3, 2, Fraction(1, 2), Fraction(1, 2), Fraction(1, 2)),
        (7, 3, Fraction(4, 3), Fraction(1, 3), Fraction(2, 3)),
        (9, 5, Fraction(4, 5), Fraction(1, 5), Fraction(2, 5)),
        (15, 8, Fraction(7, 8), Fraction(1, 8), Fraction(1, 8)),
    ],
)
def test_predict(u, w, helmholtz, lagrange, ours):
    pred = predict(interval_from_fraction(u, w), K0)
    assert pred.helmholtz == helmholtz
    assert pred.lagrange == lagrange
    assert pred.ours == ours
    assert pred.angular("ours") == pytest.approx(float(ours) * K0)
    assert pred.period_seconds() == pytest.approx(TWO_PI / (float(ours) * K0))


def test_predict_rejects_bad_k0():
    with pytest.raises(DomainError):
        predict(interval_from_fraction(3, 2), 0.0)


@pytest.mark.parametrize("u, w", [(3, 2), (7, 3), (8, 5), (15, 8), (9, 5)])
def test_energy_period_verified(modified, u, w):
    tt = two_tone(262.0, u, w)
    result = verify_period(modified, tt, interval_from_fraction(u, w), XI, samples=1024)
    assert result.measured_ok
    assert result.smaller_divisors_fail
    assert result.lagrange_period_holds
    assert result.passed
    assert result.max_relative_deviation < 1e-9


def test_difference_tone_period_fails_for_seven_thirds(modified):
    tt = two_tone(262.0, 7, 3)
    result = verify_period(modified, tt, interval_from_fraction(7, 3), XI, samples=1024)
    assert result.interval.q == 2
    assert result.helmholtz_period_holds is False
    assert result.lagrange_multiple == 2
    payload = result.to_json()
    assert payload["passed"] is True
    assert payload["lagrange_multiple"] == "2"


def test_zero_amplitude_is_degenerate(modified):
    tt = two_tone(262.0, 3, 2, c1=0.0, c0=0.0)
    result = verify_period(modified, tt, interval_from_fraction(3, 2), XI, samples=64)
    assert result.degenerate
    assert result.passed
    assert any("degenerate" in line for line in result.logs)


def test_inconsistent_interval(modified):
    with pytest.raises(InconsistentIntervalError):
        verify_period(modified, two_tone(262.0, 3, 2), interval_from_fraction(5, 4), XI)
    loose = TwoTone(K0 * 1.5001, K0)
    with pytest.raises(InconsistentIntervalError):
        verify_period(modified, loose, interval_from_fraction(3, 2), XI)


def test_two_tone_split_sums_to_energy(modified):
    tt = two_tone(262.0, 7, 3, c1=0.6, phi1=0.25)
    resp = two_tone_response(modified, XI, tt, 7)
    t = np.linspace(0.0, 0.02, 101)
    parts = resp.split(t)
    assert set(parts) == {"f0", "f1", "f2", "g0", "g1", "g2"}
    np.testing.assert_allclose(resp.energy(t), energy_at(modified, XI, tt, t, 7), rtol=1e-10)


def test_two_tone_cross_terms_oscillate(modified):
    tt = two_tone(262.0, 3, 2)
    resp = two_tone_response(modified, XI, tt, 3)
    t = np.linspace(0.0, 0.05, 400)
    parts = resp.split(t, n=1)
    assert np.ptp(parts["f2"]) > 0.0
    assert np.all(parts["f0"] >= 0.0) and np.all(parts["g1"] >= 0.0)


COPRIME_PAIRS = [(u, w) for u in range(2, 33) for w in range(1, u) if math.gcd(u, w) == 1]


def test_energy_tone_is_h_times_the_gcd_tone():
    for u, w in COPRIME_PAIRS:
        interval = interval_from_fraction(u, w)
        pred = predict(interval, K0)
        assert interval.h in (1, 2), (u, w)
        assert pred.ours == interval.h * pred.lagrange, (u, w)


@pytest.mark.parametrize("r", range(1, 32))
def test_consecutive_harmonics_give_the_difference_tone(r):
    pred = predict(interval_from_fraction(r + 1, r), K0)
    assert pred.interval.q == 1
    assert pred.ours == pred.helmholtz == Fraction(1, r)


def _random_pairs(count: int, seed: int):
    rng = np.random.default_rng(seed)
    pairs = []
    while len(pairs) < count:
        u = int(rng.integers(2, 17))
        w = int(rng.integers(1, u))
        if math.gcd(u, w) == 1 and (u, w) not in pairs:
            pairs.append((u, w))
    return pairs


@pytest.mark.parametrize("u, w", _random_pairs(20, seed=7))
def test_energy_period_verified_on_random_intervals(modified, u, w):
    rng = np.random.default_rng(1000 * u + w)
    interval = interval_from_fraction(u, w)
    for f_xi in np.exp(rng.uniform(math.log(100.0), math.log(4000.0), 3)):
        result = verify_period(modified, two_tone(262.0, u, w), interval, TWO_PI * float(f_xi), samples=256)
        assert result.passed, (u, w, f_xi)
