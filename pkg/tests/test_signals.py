from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from scipy.io import wavfile

from src.errors import ConfigError, DomainError, NotGenuineSoundError
from src.signals import (
    Component,
    PeriodicSignal,
    TwoTone,
    from_wav,
    parse_ratio,
    parse_signal_spec,
    sawtooth,
    sine,
    two_tone,
    write_wav,
)

TWO_PI = 2.0 * math.pi


def test_sine_basics():
    s = sine(262.0)
    assert s.k == pytest.approx(TWO_PI * 262.0, rel=1e-15)
    assert len(s.components) == 1
    assert sine(1.0, 1.0, math.pi / 2)(0.0) == pytest.approx(1.0)


def test_zero_amplitude_sine_is_silent():
    s = sine(262.0, 0.0)
    assert np.all(s(np.linspace(0, 1, 50)) == 0.0)


def test_sawtooth_amplitudes():
    s = sawtooth(262.0, 3)
    amps = [c.amplitude for c in s.components]
    assert amps[0] / amps[0] == 1.0
    assert amps[1] / amps[0] == pytest.approx(1 / 2)
    assert amps[2] / amps[0] == pytest.approx(1 / 3)
    one = sawtooth(262.0, 1)
    assert one.components[0].amplitude == pytest.approx(2 / math.pi)


def test_sawtooth_partial_sums_converge():
    f = 5.0
    t = np.linspace(0.0, 1.0 / f, 20001, endpoint=False)
    ideal = 2.0 * ((t * f + 0.5) % 1.0) - 1.0  # rising sawtooth through 0 at t=0
    errors = []
    for n in (1, 3, 10, 30):
        err = np.mean((sawtooth(f, n)(t) - ideal) ** 2)
        errors.append(err)
    assert all(a > b for a, b in zip(errors, errors[1:]))


def test_periodicity():
    s = sawtooth(262.0, 8)
    t = np.linspace(0.0, 0.01, 97)
    np.testing.assert_allclose(s(t + s.period), s(t), rtol=1e-12, atol=1e-12)


def test_derivative_matches_finite_difference():
    s = sawtooth(100.0, 4)
    t = np.linspace(0.0, 0.02, 11)
    h = 1e-7
    fd = (s(t + h) - s(t - h)) / (2 * h)
    np.testing.assert_allclose(s.derivative(t), fd, rtol=1e-5, atol=1e-3)


def test_component_validation():
    with pytest.raises(DomainError):
        PeriodicSignal(100.0, (Component(2, 1.0, 0.0), Component(1, 1.0, 0.0)))
    with pytest.raises(DomainError):
        PeriodicSignal(-1.0, (Component(1, 1.0, 0.0),))
    with pytest.raises(DomainError):
        sine(0.0)
    with pytest.raises(DomainError):
        sawtooth(262.0, 0)


def test_json_round_trip():
    s = sawtooth(262.0, 5)
    back = PeriodicSignal.from_json(json.loads(json.dumps(s.to_json())))
    assert back.components == s.components
    assert back.k == pytest.approx(s.k, rel=1e-15)


def test_two_tone_keeps_exact_ratio():
    tt = two_tone(262.0, 7, 3)
    assert tt.ratio == Fraction(7, 3)
    assert tt.k1 / tt.k0 == pytest.approx(7 / 3, rel=1e-15)
    assert [d.k for d in tt.drives()] == [tt.k1, tt.k0]
    with pytest.raises(DomainError):
        two_tone(262.0, 2, 3)


def test_two_tone_as_periodic_is_same_signal():
    tt = two_tone(262.0, 7, 3, c1=0.5, phi1=0.3)
    per = tt.as_periodic(7, 3)
    t = np.linspace(0.0, 0.05, 501)
    np.testing.assert_allclose(per(t), tt(t), atol=1e-12)


def test_scaled_two_tone():
    tt = TwoTone(2.0, 1.0)
    assert tt.scaled(3.0)(0.4) == pytest.approx(3.0 * tt(0.4))


def test_parse_signal_spec():
    s = parse_signal_spec("sine:262")
    assert isinstance(s, PeriodicSignal) and s.is_single_sine()
    s = parse_signal_spec("sine:262:0.5:1.0")
    assert s.components[0].amplitude == 0.5 and s.components[0].phase == 1.0
    assert len(parse_signal_spec("sawtooth:262").components) == 8
    assert len(parse_signal_spec("sawtooth:262:3").components) == 3
    tt = parse_signal_spec("twotone:262:7/3")
    assert isinstance(tt, TwoTone) and tt.ratio == Fraction(7, 3)


@pytest.mark.parametrize("spec", ["", "sine", "sine:abc", "square:262", "sawtooth:262:8.5", "twotone:262:1.5", "twotone:262:2/3", "wav"])
def test_parse_signal_spec_errors(spec):
    with pytest.raises(ConfigError):
        parse_signal_spec(spec)


def test_parse_ratio():
    assert parse_ratio("15/8") == (15, 8)
    with pytest.raises(ConfigError):
        parse_ratio("2.33")


def test_json_spec(tmp_path: Path):
    p = tmp_path / "sig.json"
    p.write_text(json.dumps(sawtooth(110.0, 3).to_json()), encoding="utf-8")
    s = parse_signal_spec(f"json:{p}")
    assert s.fundamental_hz == pytest.approx(110.0)
    assert len(s.components) == 3


def test_wav_sine_round_trip(tmp_path: Path):
    path = write_wav(tmp_path / "c4.wav", sine(262.0), duration=1.0)
    s = from_wav(path)
    assert s.fundamental_hz == pytest.approx(262.0, rel=0.01)
    amps = {c.j: c.amplitude for c in s.components}
    assert amps[1] == max(amps.values())
    assert all(a < 1e-2 * amps[1] for j, a in amps.items() if j != 1)


@pytest.mark.parametrize("sample_format", ["int16", "float32"])
def test_wav_sawtooth_round_trip(tmp_path: Path, sample_format: str):
    path = write_wav(tmp_path / "saw.wav", sawtooth(262.0, 8), duration=1.0, sample_format=sample_format)
    s = from_wav(path)
    assert s.fundamental_hz == pytest.approx(262.0, rel=0.01)
    amps = {c.j: c.amplitude for c in s.components}
    assert amps[2] / amps[1] == pytest.approx(1 / 2, rel=0.05)
    assert amps[3] / amps[1] == pytest.approx(1 / 3, rel=0.05)


def test_white_noise_is_not_a_genuine_sound(tmp_path: Path):
    rng = np.random.default_rng(0)
    noise = (rng.standard_normal(44100) * 3000).astype(np.int16)
    path = tmp_path / "noise.wav"
    wavfile.write(str(path), 44100, noise)
    with pytest.raises(NotGenuineSoundError, match="not a genuine sound"):
        from_wav(path)


def test_unreadable_wav(tmp_path: Path):
    p = tmp_path / "broken.wav"
    p.write_bytes(b"not a wav")
    with pytest.raises(ConfigError):
        from_wav(p)
