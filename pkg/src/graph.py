"""
graph.py

Wires the pipeline nodes into LangGraph workflows.

  simulate:          resolve_params -> build_signal -> simulate -> export
  peaks:             resolve_params -> build_signal -> simulate -> detect_peaks -> export
  peaks (from file): load_field -> detect_peaks -> export
"""

from __future__ import annotations

from typing import List, Optional, Tuple

from langgraph.graph import END, StateGraph

from src.graph_state import RunConfig, RunState
from src.nodes.detect_peaks import detect_peaks_node
from src.nodes.export import export_field_node, export_peaks_node, load_field_node
from src.nodes.setup import build_signal_node, resolve_params_node
from src.nodes.simulate import simulate_node

_NODES = {
    "resolve_params": resolve_params_node,
    "build_signal": build_signal_node,
    "simulate": simulate_node,
    "load_field": load_field_node,
    "detect_peaks": detect_peaks_node,
    "export_field": export_field_node,
    "export_peaks": export_peaks_node,
}


def pipeline_steps(command: str, from_file: bool = False) -> Tuple[str, ...]:
    if command == "simulate":
        return ("resolve_params", "build_signal", "simulate", "export_field")
    if command == "peaks":
        head = ("load_field",) if from_file else ("resolve_params", "build_signal", "simulate")
        return head + ("detect_peaks", "export_peaks")
    raise ValueError(f"no pipeline for command {command!r}")


def build_graph(command: str, from_file: bool = False):
    steps = pipeline_steps(command, from_file)
    graph = StateGraph(RunState)
    for name in steps:
        graph.add_node(name, _NODES[name])

    graph.set_entry_point(steps[0])
    for a, b in zip(steps, steps[1:]):
        graph.add_edge(a, b)
    graph.add_edge(steps[-1], END)
    return graph.compile()


def run_pipeline(command: str, config: RunConfig, logs: Optional[List[str]] = None) -> RunState:
    app = build_graph(command, from_file=command == "peaks" and config.field_path is not None)
    state: RunState = {"config": config, "logs": list(logs or [])}
    return app.invoke(state)
