from __future__ import annotations

from pathlib import Path

import pytest

from src.errors import ConfigError
from src.graph import pipeline_steps, run_pipeline
from src.graph_state import RunConfig


def _config(**overrides) -> RunConfig:
    base = dict(signal="sine:262", f_lo_hz=20.0, f_hi_hz=20_000.0, xi_points=512, t_samples=4)
    base.update(overrides)
    return RunConfig(**base)


def test_pipeline_steps():
    assert pipeline_steps("simulate") == ("resolve_params", "build_signal", "simulate", "export_field")
    assert pipeline_steps("peaks", from_file=True) == ("load_field", "detect_peaks", "export_peaks")
    with pytest.raises(ValueError):
        pipeline_steps("combtone")


def test_simulate_pipeline_to_stdout():
    state = run_pipeline("simulate", _config())
    assert state["output_path"] is None
    assert state["output_text"].startswith("xi_hz,t,n,energy\n")
    assert state["field"].total.shape == (512, 4)
    assert "simulate_seconds" in state["stats"]
    nodes = [line.split("]")[0] + "]" for line in state["logs"]]
    assert nodes.index("[resolve_params]") < nodes.index("[build_signal]") < nodes.index("[simulate]")
    assert nodes[-1] == "[export]"


def test_simulate_pipeline_to_file(tmp_path: Path):
    out = tmp_path / "c4.bin"
    state = run_pipeline("simulate", _config(out=str(out)))
    assert state["output_path"] == str(out)
    assert out.read_bytes()[:8] == b"BSLRFLD1"


def test_peaks_pipeline_finds_subharmonics():
    state = run_pipeline("peaks", _config(xi_points=2048))
    labels = [p.classification.label for p in state["peaks"][:3]]
    assert labels == ["harmonic(1)", "subharmonic(3)", "subharmonic(5)"]
    assert "harmonic(1)" in state["output_text"]


def test_peaks_from_saved_field(tmp_path: Path):
    saved = tmp_path / "field.json"
    run_pipeline("simulate", _config(xi_points=2048, out=str(saved)))
    state = run_pipeline("peaks", RunConfig(field_path=str(saved), out=str(tmp_path / "peaks.csv")))
    assert state["logs"][0].startswith("[load_field]")
    assert state["peaks"][0].classification.label == "harmonic(1)"
    assert (tmp_path / "peaks.csv").read_text(encoding="utf-8").startswith("rank,")


def test_bad_params_surface_as_config_error():
    with pytest.raises(ConfigError):
        run_pipeline("simulate", _config(params="no_such_set"))


def test_peaks_on_a_total_only_field_with_matching_modes():
    state = run_pipeline("peaks", _config(xi_points=2048, modes=(1, 3), keep_modes=False))
    assert state["field"].per_mode is None
    assert any("already sums modes [1, 3]" in line for line in state["logs"])
    assert state["peaks"][0].classification.label == "harmonic(1)"


def test_peaks_mode_filter_needs_per_mode_data(tmp_path: Path):
    saved = tmp_path / "total.bin"
    run_pipeline("simulate", _config(out=str(saved), keep_modes=False))
    with pytest.raises(ConfigError, match="per-mode"):
        run_pipeline("peaks", RunConfig(field_path=str(saved), modes=(1,)))
