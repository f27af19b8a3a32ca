# src/nodes/export.py
from __future__ import annotations

from src.formats import format_field_csv, format_peaks_csv, read_field, write_field, write_text
from src.graph_state import RunState
from src.peaks import format_peaks_table


def load_field_node(state: RunState) -> RunState:
    """Peaks on a saved field: skips resolve/build/simulate."""
    config = state["config"]
    field = read_field(config.field_path)

    state["field"] = field
    state.setdefault("logs", []).append(
        f"[load_field] {config.field_path}: {field.xi_axis.size} x {field.t_axis.size}, modes {list(field.modes)}"
    )
    return state


def export_field_node(state: RunState) -> RunState:
    config = state["config"]
    field = state["field"]

    if config.out:
        path = write_field(field, config.out, config.fmt)
        state["output_path"] = str(path)
        state["output_text"] = f"wrote {path}\n"
        state.setdefault("logs", []).append(f"[export] field -> {path}")
    else:
        state["output_path"] = None
        state["output_text"] = format_field_csv(field)
        state.setdefault("logs", []).append("[export] field CSV -> stdout")
    return state


def export_peaks_node(state: RunState) -> RunState:
    config = state["config"]
    peaks = state.get("peaks", [])

    state["output_text"] = format_peaks_table(peaks) + "\n"
    state["output_path"] = None
    if config.out:
        path = write_text(config.out, format_peaks_csv(peaks))
        state["output_path"] = str(path)
        state.setdefault("logs", []).append(f"[export] {len(peaks)} peaks -> {path}")
    return state
