"""CSV ingestion, CSV emission, and the model document format.

Model documents are JSON-compatible structured text with a fixed field order
and reals printed with 17 significant digits, so serialize -> parse ->
serialize is byte-identical and every stored float round-trips exactly.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .errors import EmptyFile, ParseError, RaggedRows, SchemaVersionMismatch
from .types import (
    COLUMNS,
    ROWS,
    BiaaModel,
    DataMatrix,
    FitConfig,
    RssSurface,
    StochasticMatrix,
)

SCHEMA_VERSION = "1"

_MODEL_FIELDS = (
    "schema_version",
    "config",
    "alpha",
    "beta",
    "theta",
    "gamma",
    "z",
    "rss",
    "rss_trace",
    "iterations",
    "converged",
    "collapsed",
    "seed",
)
_CONFIG_FIELDS = ("k", "c", "penalty_c", "max_iter", "rel_tol", "n_restarts", "seed")


def _format_real(x: float) -> str:
    s = "%.17g" % x
    if "." not in s and "e" not in s and "n" not in s and "i" not in s:
        s += ".0"  # keep the parsed type a float
    return s


def read_csv(path, has_header: bool = True, delimiter: str = ",") -> DataMatrix:
    """Load a rectangular numeric CSV into a DataMatrix.

    Header names, when present, are retained on the result for labeling
    outputs. Error locations are reported with 1-based physical line numbers.
    """
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh, delimiter=delimiter))
    names = None
    start_line = 1
    if has_header:
        if not rows:
            raise EmptyFile(f"{path}: no rows")
        names = tuple(cell.strip() for cell in rows[0])
        rows = rows[1:]
        start_line = 2
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    width = len(rows[0])
    values = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        line = start_line + i
        if len(row) != width:
            raise RaggedRows(line, width, len(row))
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise ParseError(line, j + 1, f"not a number: {cell!r}") from None
    if names is not None and len(names) != width:
        raise RaggedRows(1, width, len(names))
    return DataMatrix(values, column_names=names)


def write_matrix_csv(path, values, header) -> None:
    """Emit a rectangular header-bearing CSV (round-trip-safe reals)."""
    arr = np.asarray(values, dtype=np.float64)
    lines = [",".join(header)]
    for row in arr:
        lines.append(",".join(_format_real(float(v)) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_surface_csv(path, surface: RssSurface) -> None:
    """Long-format (k, c, rss) CSV of an RSS surface."""
    lines = ["k,c,rss"]
    k_lo, _ = surface.k_range
    c_lo, _ = surface.c_range
    for i in range(surface.rss_grid.shape[0]):
        for j in range(surface.rss_grid.shape[1]):
            value = float(surface.rss_grid[i, j])
            lines.append(f"{k_lo + i},{c_lo + j},{_format_real(value)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_assignments_csv(path, row_assign, col_assign) -> None:
    """Long-format (axis, index, label) CSV; axis 0 is rows, 1 is columns.

    Indices and labels are 1-based.
    """
    lines = ["axis,index,label"]
    for i, label in enumerate(np.asarray(row_assign), start=1):
        lines.append(f"0,{i},{int(label)}")
    for j, label in enumerate(np.asarray(col_assign), start=1):
        lines.append(f"1,{j},{int(label)}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _render(value, indent: str) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _format_real(float(value))
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        inner = ",\n".join(
            f'{indent}  {json.dumps(key)}: {_render(val, indent + "  ")}'
            for key, val in value.items()
        )
        return "{\n" + inner + "\n" + indent + "}"
    if isinstance(value, (list, tuple)):
        if any(isinstance(v, (list, tuple)) for v in value):
            inner = ",\n".join(
                indent + "  " + _render(v, indent + "  ") for v in value
            )
            return "[\n" + inner + "\n" + indent + "]"
        return "[" + ", ".join(_render(v, indent) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def render_model_document(model: BiaaModel) -> str:
    """The structured-text document for a fitted model."""
    cfg = model.config
    doc = {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "k": cfg.k,
            "c": cfg.c,
            "penalty_c": float(cfg.penalty_c),
            "max_iter": cfg.max_iter,
            "rel_tol": float(cfg.rel_tol),
            "n_restarts": cfg.n_restarts,
            "seed": cfg.seed,
        },
        "alpha": model.alpha.values.tolist(),
        "beta": model.beta.values.tolist(),
        "theta": model.theta.values.tolist(),
        "gamma": model.gamma.values.tolist(),
        "z": model.z.tolist(),
        "rss": model.rss,
        "rss_trace": list(model.rss_trace),
        "iterations": model.iterations,
        "converged": model.converged,
        "collapsed": model.collapsed,
        "seed": cfg.seed,
    }
    return _render(doc, "") + "\n"


def write_model(model: BiaaModel, path) -> None:
    """Serialize a fitted model (see :func:`render_model_document`)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_model_document(model))


def read_model(path) -> BiaaModel:
    """Parse a model document back into a validated BiaaModel."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, exc.colno, exc.msg) from None
    if not isinstance(doc, dict):
        raise ParseError(1, 1, "document is not a key/value object")
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise SchemaVersionMismatch(
            f"schema version {version!r}, expected {SCHEMA_VERSION!r}"
        )
    missing = [f for f in _MODEL_FIELDS if f not in doc]
    if missing:
        raise ParseError(1, 1, f"missing fields: {', '.join(missing)}")
    cfg_doc = doc["config"]
    missing_cfg = [f for f in _CONFIG_FIELDS if f not in cfg_doc]
    if missing_cfg:
        raise ParseError(1, 1, f"missing config fields: {', '.join(missing_cfg)}")
    config = FitConfig(
        k=int(cfg_doc["k"]),
        c=int(cfg_doc["c"]),
        penalty_c=float(cfg_doc["penalty_c"]),
        max_iter=int(cfg_doc["max_iter"]),
        rel_tol=float(cfg_doc["rel_tol"]),
        n_restarts=int(cfg_doc["n_restarts"]),
        seed=int(cfg_doc["seed"]),
    )
    # strict constructors: re-validating must not perturb the stored values,
    # otherwise serialize -> parse -> serialize would not be byte-identical
    return BiaaModel(
        alpha=StochasticMatrix(np.asarray(doc["alpha"], dtype=np.float64), ROWS),
        beta=StochasticMatrix(np.asarray(doc["beta"], dtype=np.float64), ROWS),
        theta=StochasticMatrix(np.asarray(doc["theta"], dtype=np.float64), COLUMNS),
        gamma=StochasticMatrix(np.asarray(doc["gamma"], dtype=np.float64), COLUMNS),
        z=np.asarray(doc["z"], dtype=np.float64),
        rss=float(doc["rss"]),
        iterations=int(doc["iterations"]),
        rss_trace=tuple(float(v) for v in doc["rss_trace"]),
        converged=bool(doc["converged"]),
        collapsed=bool(doc["collapsed"]),
        config=config,
    )
