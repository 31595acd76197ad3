"""CSV and JSON output for simulation results, and re-summarising a CSV."""
from __future__ import annotations

import configparser
import io
import json
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .simulator import SimResult, consensus_metrics, tail_max


def atomic_write(path, data: str) -> None:
    """Write ``data`` to ``path`` through a temporary file and a rename, so a
    failure never leaves a partial file behind."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def csv_header(node_count: int, state_dim: int, edge_count: int) -> list[str]:
    cols = ["t"]
    cols += [f"x{i}_{d}" for i in range(1, node_count + 1) for d in range(1, state_dim + 1)]
    cols += [f"e{k}_norm" for k in range(1, edge_count + 1)]
    cols.append("disparity")
    return cols


def result_table(res: SimResult) -> np.ndarray:
    metrics = consensus_metrics(res)
    t = len(res.times)
    return np.column_stack([res.times, res.node_states.reshape(t, -1), res.edge_norms,
                            metrics.disparity])


def result_csv(res: SimResult) -> str:
    """CSV text: ``t``, every agent state component, every edge norm, disparity."""
    _, n_agents, dim = res.node_states.shape
    header = ",".join(csv_header(n_agents, dim, res.edge_states.shape[1]))
    buf = io.StringIO()
    np.savetxt(buf, result_table(res), fmt="%.17g", delimiter=",", header=header, comments="")
    return buf.getvalue()


def summary(res: SimResult, threshold: float = 0.1) -> dict:
    m = consensus_metrics(res)
    return {
        "samples": int(len(res.times)),
        "final_time": res.final_time,
        "aborted": bool(res.aborted),
        "message": res.message,
        "initial_disparity": float(m.disparity[0]),
        "final_disparity": float(m.disparity[-1]),
        "steady_state_disparity": m.steady_state_disparity,
        "steady_state_edge_norm": m.steady_state_edge_norm,
        "peak_edge_norm": float(m.max_edge_norm.max()),
        "convergence_threshold": threshold,
        "convergence_time": m.convergence_time_to(threshold),
    }


def config_echo(scenario_text: str) -> dict:
    """Scenario text as a nested ``{section: {key: value}}`` dict."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.read_string(scenario_text)
    return {s: dict(cp.items(s)) for s in cp.sections()}


def result_json(res: SimResult, scenario_text: str, seed: Optional[int] = None) -> str:
    doc = {"seed": seed, "metrics": summary(res), "aborted": bool(res.aborted),
           "config": config_echo(scenario_text)}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class CsvSummary:
    rows: int
    columns: int
    node_count: int
    state_dim: int
    edge_count: int
    final_time: float
    metrics: dict


_STATE = re.compile(r"x(\d+)_(\d+)$")
_EDGE = re.compile(r"e(\d+)_norm$")


def summarize_csv(path) -> CsvSummary:
    """Recompute summary metrics from a CSV written by :func:`result_csv`."""
    text = Path(path).read_text()
    lines = text.splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].split(",")
    if header[0] != "t" or header[-1] != "disparity":
        raise ValueError(f"{path}: not a simulation CSV (header starts {header[:2]})")
    states = [_STATE.match(h) for h in header[1:-1]]
    edges = [_EDGE.match(h) for h in header[1:-1]]
    n_state = sum(1 for s in states if s)
    n_edge = sum(1 for e in edges if e)
    if n_state + n_edge != len(header) - 2:
        raise ValueError(f"{path}: unrecognised columns in header")
    node_count = max((int(s.group(1)) for s in states if s), default=0)
    state_dim = n_state // node_count if node_count else 0
    try:
        data = np.loadtxt(io.StringIO(text), delimiter=",", skiprows=1, ndmin=2)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    if data.shape[1] != len(header):
        raise ValueError(f"{path}: rows have {data.shape[1]} columns, header has {len(header)}")
    times = data[:, 0]
    nodes = data[:, 1:1 + n_state].reshape(len(times), node_count, state_dim)
    norms = data[:, 1 + n_state:1 + n_state + n_edge]
    res = SimResult(times, nodes, np.zeros((len(times), n_edge, 0)), np.zeros((len(times), n_edge)),
                    None, None)
    m = summary(res)
    m["steady_state_edge_norm"] = tail_max(norms.max(axis=1)) if n_edge else 0.0
    m["peak_edge_norm"] = float(norms.max()) if n_edge else 0.0
    del m["aborted"], m["message"]
    return CsvSummary(len(times), len(header), node_count, state_dim, n_edge, float(times[-1]), m)


def format_summary(metrics: dict) -> str:
    width = max(len(k) for k in metrics)
    out = []
    for k, v in metrics.items():
        if isinstance(v, float):
            v = f"{v:.6g}"
        elif v is None:
            v = "-"
        out.append(f"{k:<{width}}  {v}")
    return "\n".join(out)
