"""Sparse graphical models for mixed continuous/ordinal data.

Pipeline: latent correlation estimation (rank bridge, polyserial,
polychoric), nearest-correlation repair, graphical lasso path and eBIC
model selection.
"""

__version__ = "0.1.0"

from .data import Continuous, MixedDataset, Ordinal, infer_variable_kinds, ingest_csv
from .errors import (
    ConvergenceError,
    DataError,
    DegenerateError,
    MixedGraphError,
    NumericalError,
    ParseError,
    ValidationError,
)
from .glasso import PrecisionPath, ebic_score, graphical_lasso, lambda_grid, select_model
from .latent import LatentCorrelationMatrix, estimate_latent_correlation, repair
from .metrics import frobenius_error, roc_auc, tp_fp
from .projection import nearest_psd_correlation
from .simulation import BenchConfig, GraphSpec, MixSpec, generate_graph, run_benchmark, sample_mixed
from .special import bvn_cdf, std_normal_cdf, std_normal_quantile

__all__ = [
    "BenchConfig", "Continuous", "ConvergenceError", "DataError", "DegenerateError", "GraphSpec",
    "LatentCorrelationMatrix", "MixSpec", "MixedDataset", "MixedGraphError", "NumericalError",
    "Ordinal", "ParseError", "PrecisionPath", "ValidationError", "bvn_cdf", "ebic_score",
    "estimate_latent_correlation", "frobenius_error", "generate_graph", "graphical_lasso",
    "infer_variable_kinds", "ingest_csv", "lambda_grid", "nearest_psd_correlation", "repair",
    "roc_auc", "run_benchmark", "sample_mixed", "select_model", "std_normal_cdf",
    "std_normal_quantile", "tp_fp",
]
