"""
graph_state.py

Defines the run configuration and the shared state passed between nodes in
the LangGraph pipeline behind `simulate` and `peaks`.

The shared state is the *contract* between nodes:
- Each node reads from the state.
- Each node writes its outputs back to the state.
- LangGraph moves this state through the pipeline.

Keeping it in one place means a new step only needs new fields here.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple, TypedDict

import numpy as np

from src.config import DEFAULT_PARAMS, N_MAX, T_SAMPLES, WORKERS, XI_POINTS
from src.energy import EnergyField
from src.peaks import Peak
from src.params import StringLawParams


@dataclass(frozen=True)
class RunConfig:
    """Everything the CLI collected for one run. Hz at this boundary."""

    params: str = DEFAULT_PARAMS  # builtin id or path to a params file
    signal: str = "sine:262"
    f_lo_hz: Optional[float] = None  # None: edge of the parameter set's band
    f_hi_hz: Optional[float] = None
    xi_points: int = XI_POINTS
    t_samples: int = T_SAMPLES
    n_max: int = N_MAX
    modes: Optional[Tuple[int, ...]] = None  # None: every odd n <= n_max
    fmt: Optional[str] = None  # csv | json | bin; None: from the --out suffix
    out: Optional[str] = None
    workers: int = WORKERS
    keep_modes: bool = True

    # peaks only
    field_path: Optional[str] = None  # read a saved field instead of simulating
    fundamental_hz: Optional[float] = None
    t_index: int = 0
    min_prominence: float = 1e-3
    tolerance_cents: float = 15.0


class RunState(TypedDict, total=False):
    """
    Shared mutable state for the pipeline.

    Fields are optional because not every node
    produces or consumes every field.
    """

    # What to run
    config: RunConfig

    # resolve_params output
    params: StringLawParams

    # build_signal output: PeriodicSignal or TwoTone
    forcing: Any

    # simulate output: grids and the sampled field
    xi_grid: np.ndarray
    t_grid: np.ndarray
    field: EnergyField

    # detect_peaks output, largest first
    peaks: List[Peak]

    # export output: file written (if any) and text for stdout
    output_path: Optional[str]
    output_text: str

    # Trace messages added by nodes, "[node] message"
    logs: List[str]

    # Free-form per-run numbers worth reporting (timings, counts)
    stats: Dict[str, Any]
