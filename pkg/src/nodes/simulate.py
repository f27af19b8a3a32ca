# src/nodes/simulate.py
from __future__ import annotations

import time

from src.energy import energy_field, energy_time_grid, log_xi_grid
from src.graph_state import RunState


def simulate_node(state: RunState) -> RunState:
    config = state["config"]
    params = state["params"]
    forcing = state["forcing"]

    xi_grid = log_xi_grid(params, config.xi_points, config.f_lo_hz, config.f_hi_hz)
    t_grid = energy_time_grid(forcing, config.t_samples)

    started = time.perf_counter()
    field = energy_field(
        params,
        forcing,
        xi_grid,
        t_grid,
        config.n_max,
        modes=config.modes,
        keep_modes=config.keep_modes,
        workers=config.workers,
    )
    elapsed = time.perf_counter() - started

    state["xi_grid"] = xi_grid
    state["t_grid"] = t_grid
    state["field"] = field
    state.setdefault("stats", {})["simulate_seconds"] = elapsed

    logs = state.setdefault("logs", [])
    logs.extend(field.metadata.get("logs", []))
    logs.append(f"[simulate] {xi_grid.size} x {t_grid.size} points, modes {list(field.modes)}, {elapsed:.2f}s")
    rel = field.metadata.get("truncation_relative_max")
    if rel is not None:
        logs.append(f"[simulate] truncation bound / E <= {rel:.2e}")
    return state
