"""File emission: legacy ASCII VTK fields, CSV iteration logs, run summaries.

Output is byte-deterministic for identical inputs: fields print with 17
significant digits (full float64 round trip) and the CSV layout is fixed.
"""

from __future__ import annotations

import os

import numpy as np

from .driver import IterationRecord, RunResult
from .grid import StructuredGrid

CSV_HEADER = (
    "iter,objective,constraint,w_fwd,w_adj,kind_fwd,kind_adj,"
    "cg_fwd,cg_adj,matvecs,basis_fwd,basis_adj,walltime_s"
)


def _fmt(value: float) -> str:
    return f"{value:.17g}"


def write_field(values: np.ndarray, grid: StructuredGrid, path, name: str = "field"):
    """Write per-cell values as a legacy ASCII VTK structured-points file."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.num_cells,):
        raise ValueError(
            f"field has {values.shape} values, grid has {grid.num_cells} cells"
        )
    point_dims = tuple(d + 1 for d in grid.dims) + (1,) * (3 - grid.ndim)
    spacing = grid.spacing + (1.0,) * (3 - grid.ndim)
    lines = [
        "# vtk DataFile Version 3.0",
        name,
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        "DIMENSIONS {} {} {}".format(*point_dims),
        "ORIGIN 0 0 0",
        "SPACING {} {} {}".format(*(_fmt(s) for s in spacing)),
        f"CELL_DATA {grid.num_cells}",
        f"SCALARS {name} double 1",
        "LOOKUP_TABLE default",
    ]
    lines.extend(_fmt(v) for v in values)
    try:
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"failed to write field to {path}: {exc}") from exc


def read_field(path):
    """Parse a file written by write_field. Returns (values, name)."""
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    name = None
    start = None
    for i, line in enumerate(lines):
        if line.startswith("SCALARS"):
            name = line.split()[1]
        if line.startswith("LOOKUP_TABLE"):
            start = i + 1
            break
    if start is None:
        raise ValueError(f"{path} is not a field file written by this package")
    values = np.array([float(v) for v in lines[start:] if v], dtype=float)
    return values, name


def _eq_columns(eq):
    w = "" if eq.mor_measure is None else _fmt(eq.mor_measure)
    return w, eq.solver_kind, str(eq.cg_iterations), str(eq.basis_size)


def append_log(record: IterationRecord, path):
    """Append one CSV row; the fixed header is written when the file is new."""
    w_f, kind_f, cg_f, basis_f = _eq_columns(record.forward)
    w_a, kind_a, cg_a, basis_a = _eq_columns(record.adjoint)
    row = ",".join(
        [
            str(record.index),
            _fmt(record.objective),
            _fmt(record.constraint),
            w_f,
            w_a,
            kind_f,
            kind_a,
            cg_f,
            cg_a,
            str(record.forward.matvecs + record.adjoint.matvecs),
            basis_f,
            basis_a,
            f"{record.walltime_s:.6f}",
        ]
    )
    try:
        fresh = not os.path.exists(path) or os.path.getsize(path) == 0
        with open(path, "a", encoding="ascii") as fh:
            if fresh:
                fh.write(CSV_HEADER + "\n")
            fh.write(row + "\n")
    except OSError as exc:
        raise OSError(f"failed to append log row to {path}: {exc}") from exc


def format_summary(result: RunResult, label: str, strategy_name: str) -> str:
    solver_total = sum(result.solver_time_by_kind.values())
    lines = [
        f"label: {label}",
        f"strategy: {strategy_name}",
        f"iterations: {len(result.history)}",
        f"completed: {'yes' if result.completed else 'no'}",
        f"final objective: {_fmt(result.final_objective)}",
        f"final constraint: {_fmt(result.final_constraint)}",
        f"feasible (within 1e-3): {'yes' if result.feasible else 'no'}",
        f"forward reductions: {result.forward_reductions}",
        f"adjoint reductions: {result.adjoint_reductions}",
        "linear-solver wall time [s]:",
    ]
    for kind in ("fom_full", "fom_oneshot", "mor"):
        lines.append(f"  {kind}: {result.solver_time_by_kind.get(kind, 0.0):.3f}")
    lines.append(f"  total: {solver_total:.3f}")
    lines.append(f"total wall time [s]: {result.wall_time:.3f}")
    return "\n".join(lines) + "\n"


def write_summary(result: RunResult, label: str, strategy_name: str, path):
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_summary(result, label, strategy_name))
