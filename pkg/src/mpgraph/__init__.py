"""Gaussian graphical model selection with minipatch ensembles."""

__version__ = "0.1.0"

from .estimator import MPGraph, ThresholdedGraphicalLasso
from .glasso import GlassoFit, GlassoOptions, fit_glasso, glasso_objective
from .minipatch import MPGraphConfig, MPGraphResult, coverage_diagnostics, run_mpgraph
from .synth import GroundTruthModel, make_model, sample_gaussian
from .tglasso import BaseEstimatorConfig, fit_thresholded

__all__ = [
    "MPGraph",
    "ThresholdedGraphicalLasso",
    "GlassoFit",
    "GlassoOptions",
    "fit_glasso",
    "glasso_objective",
    "MPGraphConfig",
    "MPGraphResult",
    "coverage_diagnostics",
    "run_mpgraph",
    "GroundTruthModel",
    "make_model",
    "sample_gaussian",
    "BaseEstimatorConfig",
    "fit_thresholded",
]
