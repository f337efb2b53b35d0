"""Command-line entry point for variational domain-invariant training experiments."""

import argparse
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import yaml
from dotenv import load_dotenv

from src.analysis.metrics import mmd
from src.analysis.projection import export_projection
from src.core.config import ConfigManager, TrainConfig
from src.core.exceptions import ConfigError, DataError, VDTError
from src.core.logging_config import LogLevel, get_logger
from src.core.types import DomainPath
from src.data_layer.dataset import Dataset
from src.data_layer.feature_io import load_dataset, save_csv, save_vdtf
from src.data_layer.synthetic import SPLITS, SynthSpec, synth
from src.experiments.ablation import parse_variants, run_ablation
from src.experiments.comparison import compare
from src.experiments.config import DomainSplits, RunReport, seed_list
from src.experiments.report import read_json, write_json
from src.experiments.runner import ExperimentRunner, evaluate_params, resolve_eval_path
from src.experiments.sweep import SWEEP_PARAMS, parse_values, run_sweep
from src.ml.models.checkpoint import load_checkpoint, save_checkpoint
from src.ml.models.vdt_model import gated_features

logger = get_logger()

DEFAULT_SEEDS = "0,1,2,3,4"


def parse_overrides(pairs: Optional[List[str]]) -> Dict[str, Any]:
    """``key=value`` pairs; values are parsed as YAML scalars."""
    overrides: Dict[str, Any] = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key.strip():
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        overrides[key.strip()] = yaml.safe_load(value)
    return overrides


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML or JSON run configuration")
    common.add_argument("--seed", type=int, help="Override the configured seed")
    common.add_argument("--out", type=Path, help="Output directory (default: runs)")
    common.add_argument("--threads", type=int, help="Worker threads for independent runs")
    common.add_argument(
        "--log-level",
        choices=["quiet", "normal", "verbose", "debug"],
        help="Logging verbosity (default: normal, or VDT_LOG_LEVEL)",
    )
    common.add_argument(
        "--set", action="append", metavar="KEY=VALUE", help="Override any config field"
    )

    parser = argparse.ArgumentParser(
        description="Variational domain-invariant training with test-time adaptation"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[common], help="Write a synthetic benchmark")
    p.add_argument("--spec", type=Path, help="Synthetic spec (default: synth_spec from --config)")
    p.add_argument("--format", choices=["vdtf", "csv"], default="vdtf")

    sub.add_parser("train", parents=[common], help="Train and write a checkpoint plus report")

    p = sub.add_parser("ttt", parents=[common], help="Test-time training on a target stream")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--target", type=Path, help="Target test features (default: from config)")
    p.add_argument("--theta", type=float, help="Override the retention threshold")

    p = sub.add_parser("eval", parents=[common], help="Score a checkpoint on labeled features")
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--path", choices=["auto", "source", "target"], default="auto")

    p = sub.add_parser("ablate", parents=[common], help="Multi-seed ablation table")
    p.add_argument("--variants", default="full,no_diva,no_dcc,no_ttt,no_cvf")
    p.add_argument("--seeds", default=DEFAULT_SEEDS)

    p = sub.add_parser("sweep", parents=[common], help="Multi-seed hyperparameter sweep")
    p.add_argument("--param", required=True, help=f"One of {', '.join(SWEEP_PARAMS)}")
    p.add_argument("--values", required=True, help="Comma-separated values")
    p.add_argument("--seeds", default=DEFAULT_SEEDS)

    p = sub.add_parser("mmd", parents=[common], help="MMD between two feature files")
    p.add_argument("--source", type=Path, required=True)
    p.add_argument("--target", type=Path, required=True)
    p.add_argument("--checkpoint", type=Path, help="Also measure on gated features")

    p = sub.add_parser("project", parents=[common], help="Export a 2-D PCA projection as CSV")
    p.add_argument("--data", type=Path, nargs="+", required=True)
    p.add_argument("--checkpoint", type=Path, help="Project gated features instead of raw ones")
    p.add_argument("--path", choices=["source", "target"], default="target")

    p = sub.add_parser("compare", parents=[common], help="Wilcoxon test between two results")
    p.add_argument("report_a", type=Path)
    p.add_argument("report_b", type=Path)
    p.add_argument("--variant-a")
    p.add_argument("--variant-b")

    return parser


class CommandContext:
    """Configuration and output location shared by every command."""

    def __init__(self, args: argparse.Namespace, extra_overrides: Optional[Dict] = None):
        overrides = parse_overrides(args.set)
        overrides.update({"seed": args.seed, **(extra_overrides or {})})
        self.manager = ConfigManager(args.config, overrides)
        self.config: TrainConfig = self.manager.train
        if not args.log_level:
            logger.set_level(self.manager.runtime.log_level)
        self.threads = args.threads or self.manager.runtime.threads
        self.out_dir: Path = args.out or self.manager.runtime.out_dir

    def output(self, name: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name


def cmd_synth(args) -> int:
    ctx = CommandContext(args)
    spec_path = args.spec or ctx.config.synth_spec
    if spec_path is None:
        raise ConfigError("synth needs --spec or synth_spec in the config")
    spec = SynthSpec.from_file(spec_path)

    written = []
    for index, domain in enumerate(spec.domains):
        for split in SPLITS:
            dataset = synth(spec, split, (index,))
            target = ctx.output(f"{domain.name}_{split}.{args.format}")
            writer = save_vdtf if args.format == "vdtf" else save_csv
            written.append(str(writer(dataset, target)))
    logger.info("Synthetic benchmark written", files=len(written), out=str(ctx.out_dir))
    write_json({"files": written, "spec": spec.to_dict()})
    return 0


def cmd_train(args) -> int:
    ctx = CommandContext(args)
    output = ExperimentRunner().run(DomainSplits.from_config(ctx.config), ctx.config, adapt=False)
    save_checkpoint(
        output.params,
        ctx.output("model.vdtc"),
        config_hash=output.report.config_hash,
        metadata={"seed": ctx.config.seed, "eval_path": output.report.eval_path},
    )
    write_json(output.report, ctx.output("train_report.json"))
    logger.info("Training artifacts written", out=str(ctx.out_dir))
    return 0


def _target_stream(ctx: CommandContext, path: Optional[Path]) -> Dataset:
    if path is not None:
        return load_dataset(path)
    return DomainSplits.from_config(ctx.config).target_test


def cmd_ttt(args) -> int:
    ctx = CommandContext(args, {"theta": args.theta})
    cfg = ctx.config
    target = _target_stream(ctx, args.target)
    params, header = load_checkpoint(args.checkpoint, input_dim=target.dim)
    if header.get("config_hash") not in ("", cfg.config_hash()):
        logger.verbose(
            "Checkpoint was trained under a different config", checkpoint=header["config_hash"]
        )

    path = resolve_eval_path(cfg)
    eval_pre = evaluate_params(params, target, path, cfg.use_gate)
    adapted, ttt_report, eval_post = ExperimentRunner.test_time(params, target, cfg)

    report = RunReport(
        config=cfg.to_dict(),
        config_hash=cfg.config_hash(),
        seed=cfg.seed,
        variant="ttt",
        eval_path=path.value,
        eval_pre=eval_pre,
        eval_post=eval_post,
        ttt=ttt_report,
    )
    save_checkpoint(adapted, ctx.output("adapted.vdtc"), config_hash=cfg.config_hash())
    write_json(report, ctx.output("ttt_report.json"))
    logger.info("Test-time training written", summary=ttt_report.summary())
    return 0


def cmd_eval(args) -> int:
    ctx = CommandContext(args)
    data = load_dataset(args.data)
    params, _ = load_checkpoint(args.checkpoint, input_dim=data.dim)
    cfg = ctx.config if args.path == "auto" else ctx.config.replace(eval_path=args.path)
    result = evaluate_params(params, data, resolve_eval_path(cfg), cfg.use_gate)
    if result is None:
        raise DataError(f"{args.data} has unlabeled samples; nothing to score")
    write_json(result)
    return 0


def cmd_ablate(args) -> int:
    ctx = CommandContext(args)
    table = run_ablation(
        DomainSplits.from_config(ctx.config),
        ctx.config,
        parse_variants(args.variants),
        seed_list(args.seeds),
        ctx.threads,
    )
    write_json(table, ctx.output("ablation.json"))
    write_json(table["summary"])
    return 0


def cmd_sweep(args) -> int:
    ctx = CommandContext(args)
    table = run_sweep(
        DomainSplits.from_config(ctx.config),
        ctx.config,
        args.param,
        parse_values(args.values),
        seed_list(args.seeds),
        ctx.threads,
    )
    write_json(table, ctx.output(f"sweep_{args.param}.json"))
    write_json(table["summary"])
    return 0


def cmd_mmd(args) -> int:
    ctx = CommandContext(args)
    cfg = ctx.config
    source, target = load_dataset(args.source), load_dataset(args.target)
    result = {"raw": mmd(source.features, target.features, cfg.mmd_max_samples, cfg.seed).to_dict()}
    if args.checkpoint:
        params, _ = load_checkpoint(args.checkpoint, input_dim=source.dim)
        result["gated"] = mmd(
            gated_features(params, source.features, DomainPath.SOURCE, cfg.use_gate),
            gated_features(params, target.features, resolve_eval_path(cfg), cfg.use_gate),
            cfg.mmd_max_samples,
            cfg.seed,
        ).to_dict()
    write_json(result)
    return 0


def cmd_project(args) -> int:
    ctx = CommandContext(args)
    data = Dataset.concat(load_dataset(p) for p in args.data)
    features = data.features
    if args.checkpoint:
        params, _ = load_checkpoint(args.checkpoint, input_dim=data.dim)
        features = gated_features(params, data.features, DomainPath(args.path), ctx.config.use_gate)
    target = export_projection(data, features, ctx.output("projection.csv"))
    logger.info("Projection written", path=str(target), samples=len(data))
    return 0


def cmd_compare(args) -> int:
    result = compare(
        read_json(args.report_a), read_json(args.report_b), args.variant_a, args.variant_b
    )
    if args.out:
        write_json(result, Path(args.out) / "compare.json")
    write_json(result)
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "train": cmd_train,
    "ttt": cmd_ttt,
    "eval": cmd_eval,
    "ablate": cmd_ablate,
    "sweep": cmd_sweep,
    "mmd": cmd_mmd,
    "project": cmd_project,
    "compare": cmd_compare,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main execution function."""
    load_dotenv()
    args = build_parser().parse_args(argv)

    if args.log_level:
        logger.set_level(LogLevel[args.log_level.upper()])
    logger.verbose("Arguments", command=args.command)

    try:
        return COMMANDS[args.command](args)

    except VDTError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code

    except KeyboardInterrupt:
        logger.info("Interrupted by user")
        return 130

    except Exception as e:
        logger.error(f"Fatal error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
