"""Biarchetype analysis.

Simultaneous extraction of row archetypes and column archetypes from a data
matrix by alternating simplex-constrained least squares, plus plain archetype
analysis, a hard double-k-means baseline, and RSS-surface model selection.
"""

from .datasets import planted_block_matrix, simulate_block_gaussian, toy_matrix
from .errors import (
    BiarchError,
    ConstantColumn,
    CsvError,
    DimensionMismatch,
    EmptyFile,
    InvalidRho,
    MaxIterationsExceeded,
    NoElbow,
    NonFinite,
    NotStochastic,
    ParseError,
    RaggedRows,
    SchemaVersionMismatch,
)
from .io import read_csv, read_model, write_model
from .selection import rss_surface, suggest_elbow
from .simplex import PenaltyProblem, backend_name, nnls, solve_simplex_ls
from .solvers import (
    DoubleKMeansModel,
    fit_aa,
    fit_biaa,
    fit_double_kmeans,
    grand_mean_model,
    project_rows,
    reconstruct,
    rss,
)
from .types import (
    COLUMNS,
    ROWS,
    BiaaModel,
    DataMatrix,
    FitConfig,
    RssSurface,
    StochasticMatrix,
    inverse_standardize,
    standardize,
    validate_stochastic,
)

__version__ = "0.1.0"

__all__ = [
    "BiaaModel",
    "BiarchError",
    "COLUMNS",
    "ConstantColumn",
    "CsvError",
    "DataMatrix",
    "DimensionMismatch",
    "DoubleKMeansModel",
    "EmptyFile",
    "FitConfig",
    "InvalidRho",
    "MaxIterationsExceeded",
    "NoElbow",
    "NonFinite",
    "NotStochastic",
    "ParseError",
    "PenaltyProblem",
    "ROWS",
    "RaggedRows",
    "RssSurface",
    "SchemaVersionMismatch",
    "StochasticMatrix",
    "backend_name",
    "fit_aa",
    "fit_biaa",
    "fit_double_kmeans",
    "grand_mean_model",
    "inverse_standardize",
    "nnls",
    "planted_block_matrix",
    "project_rows",
    "read_csv",
    "read_model",
    "reconstruct",
    "rss",
    "rss_surface",
    "simulate_block_gaussian",
    "solve_simplex_ls",
    "standardize",
    "suggest_elbow",
    "toy_matrix",
    "validate_stochastic",
    "write_model",
]
