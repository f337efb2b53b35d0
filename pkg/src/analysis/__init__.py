"""Evaluation metrics, significance testing and projections."""

from src.analysis.metrics import EvalResult, MMDResult, evaluate, macro_f1, mmd
from src.analysis.significance import WilcoxonResult, significance_tier, wilcoxon_signed_rank
from src.analysis.projection import export_projection, pca_project
