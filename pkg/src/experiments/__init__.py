"""Experiment orchestration: pipeline runs, ablations, sweeps and comparisons."""

from src.experiments.config import AblationSpec, DomainSplits, RunReport, seed_list
from src.experiments.runner import ExperimentRunner, RunOutput, resolve_eval_path
from src.experiments.ablation import parse_variants, run_ablation, summarize
from src.experiments.sweep import SWEEP_PARAMS, parse_values, run_sweep
from src.experiments.comparison import compare, seed_metrics
