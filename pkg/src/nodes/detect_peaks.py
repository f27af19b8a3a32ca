# src/nodes/detect_peaks.py
from __future__ import annotations

from src.errors import ConfigError
from src.graph_state import RunState
from src.peaks import find_peaks


def detect_peaks_node(state: RunState) -> RunState:
    config = state["config"]
    field = state["field"]
    logs = state.setdefault("logs", [])

    modes = config.modes
    if modes is not None and field.per_mode is None:
        # total already holds field.modes; any other selection cannot be rebuilt
        if tuple(sorted(set(modes))) != field.modes:
            raise ConfigError(
                f"--modes {list(modes)} needs per-mode data; field only has the total over modes {list(field.modes)}"
            )
        logs.append(f"[detect_peaks] field total already sums modes {list(field.modes)}")
        modes = None

    peaks = find_peaks(
        field,
        t_index=config.t_index,
        min_prominence_ratio=config.min_prominence,
        fundamental_hz=config.fundamental_hz,
        modes=modes,
        tolerance_cents=config.tolerance_cents,
    )

    state["peaks"] = peaks
    logs.append(f"[detect_peaks] {len(peaks)} peaks at t index {config.t_index}")
    if peaks:
        top = peaks[0]
        logs.append(f"[detect_peaks] main peak {top.freq_hz:.2f} Hz ({top.note.label}), {top.classification.label}")
    return state
