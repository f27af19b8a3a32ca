# src/nodes/setup.py
from __future__ import annotations

from src.graph_state import RunState
from src.params import band_hz, derive, resolve_params
from src.signals import parse_signal_spec


def resolve_params_node(state: RunState) -> RunState:
    config = state["config"]
    params = resolve_params(config.params)
    d = derive(params)
    lo, hi = band_hz(params)

    state["params"] = params
    state.setdefault("logs", []).append(
        f"[resolve_params] {params.name}: alpha={d.alpha:.4f} B_mu={d.B_mu:.4g} band=[{lo:.1f}, {hi:.1f}] Hz"
    )
    return state


def build_signal_node(state: RunState) -> RunState:
    config = state["config"]
    forcing = parse_signal_spec(config.signal)

    state["forcing"] = forcing
    state.setdefault("logs", []).append(f"[build_signal] {forcing.describe()}")
    return state
