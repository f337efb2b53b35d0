"""Full pipeline runs: train, evaluate, measure alignment, adapt, evaluate again."""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from src.analysis.metrics import EvalResult, MMDResult, evaluate, mmd
from src.core.config import TrainConfig
from src.core.logging_config import get_logger
from src.core.types import DomainPath
from src.data_layer.dataset import Dataset
from src.experiments.config import AblationSpec, DomainSplits, RunReport
from src.ml.models.vdt_model import ModelParams, gated_features, predict
from src.ml.online_learning.test_time import TTTReport, ttt_adapt
from src.ml.training.model_trainer import VDTTrainer

logger = get_logger()


def resolve_eval_path(config: TrainConfig) -> DomainPath:
    """``auto`` uses the target heads only when something trains them."""
    if config.eval_path == "source":
        return DomainPath.SOURCE
    if config.eval_path == "target":
        return DomainPath.TARGET
    if config.lambda2 > 0 or config.lambda3 > 0:
        return DomainPath.TARGET
    return DomainPath.SOURCE


def evaluate_params(
    params: ModelParams, data: Dataset, path: DomainPath, use_gate: bool = True
) -> Optional[EvalResult]:
    """Scores on ``data``; ``None`` when it carries unknown labels."""
    if not data.is_fully_labeled:
        logger.warning("Skipping evaluation of partially labeled data", samples=len(data))
        return None
    preds, _ = predict(params, data.features, path, use_gate)
    return evaluate(preds, data.labels)


def alignment_mmd(
    params: ModelParams,
    source: Dataset,
    target: Dataset,
    target_path: DomainPath,
    config: TrainConfig,
) -> Tuple[MMDResult, MMDResult]:
    """MMD between source and target on raw features and on gated features.

    Source rows pass through the source heads, target rows through ``target_path``.
    """
    raw = mmd(source.features, target.features, config.mmd_max_samples, config.seed)
    gated = mmd(
        gated_features(params, source.features, DomainPath.SOURCE, config.use_gate),
        gated_features(params, target.features, target_path, config.use_gate),
        config.mmd_max_samples,
        config.seed,
    )
    return raw, gated


@dataclass
class RunOutput:
    report: RunReport
    params: ModelParams


class ExperimentRunner:
    """Runs the train / evaluate / test-time-training pipeline for one configuration."""

    @staticmethod
    def test_time(
        params: ModelParams, target_test: Dataset, config: TrainConfig
    ) -> Tuple[ModelParams, TTTReport, Optional[EvalResult]]:
        """Adapt a copy of ``params`` on the unlabeled stream and score the result."""
        adapted = params.copy()
        report = ttt_adapt(adapted, target_test.without_labels(), config)
        eval_post = evaluate_params(adapted, target_test, DomainPath.TARGET, config.use_gate)
        return adapted, report, eval_post

    def run(
        self,
        splits: DomainSplits,
        config: TrainConfig,
        ablation: Optional[AblationSpec] = None,
        adapt: bool = True,
    ) -> RunOutput:
        """Train, score and, when enabled and ``adapt`` is set, run test-time training."""
        ablation = ablation or AblationSpec()
        started = time.perf_counter()
        cfg = ablation.apply(config)
        data = splits.for_run(cfg, ablation)
        path = resolve_eval_path(cfg)

        fit = VDTTrainer(cfg).fit(data.source_train, data.target_train)
        params = fit.params

        eval_pre = evaluate_params(params, data.target_test, path, cfg.use_gate)
        source_eval = (
            evaluate_params(params, data.source_test, DomainPath.SOURCE, cfg.use_gate)
            if data.source_test is not None
            else None
        )

        ttt_report, eval_post = None, None
        if cfg.use_ttt and adapt:
            if path is DomainPath.SOURCE:
                logger.warning("Test-time training adapts the target heads, which nothing trained")
            params, ttt_report, eval_post = self.test_time(params, data.target_test, cfg)

        # alignment is measured on the model the final scores come from
        final_path = DomainPath.TARGET if ttt_report is not None else path
        mmd_raw, mmd_gated = alignment_mmd(
            params, data.source_train, data.target_test, final_path, cfg
        )

        report = RunReport(
            config=cfg.to_dict(),
            config_hash=cfg.config_hash(),
            seed=cfg.seed,
            variant=ablation.name,
            eval_path=path.value,
            history=fit.history,
            eval_pre=eval_pre,
            eval_post=eval_post,
            source_eval=source_eval,
            mmd_raw=mmd_raw,
            mmd_gated=mmd_gated,
            ttt=ttt_report,
            wall_clock=time.perf_counter() - started,
        )
        final = report.final_eval
        logger.info(
            "Run complete",
            variant=report.variant,
            seed=cfg.seed,
            result=final.summary() if final else "unlabeled target",
            mmd_raw=mmd_raw.statistic,
            mmd_gated=mmd_gated.statistic,
        )
        return RunOutput(report=report, params=params)

    def run_grid(
        self,
        splits: DomainSplits,
        cells: Sequence[Tuple[TrainConfig, AblationSpec]],
        threads: int = 1,
    ) -> List[RunReport]:
        """Run independent cells, in order, on up to ``threads`` worker threads."""
        if threads <= 1:
            return [self.run(splits, cfg, ab).report for cfg, ab in cells]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(self.run, splits, cfg, ab) for cfg, ab in cells]
            return [f.result().report for f in futures]
