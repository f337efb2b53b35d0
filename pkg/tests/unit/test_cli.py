"""Tests for the command-line entry point."""

import json

import numpy as np
import pytest
import yaml

from main import main, parse_overrides
from src.core.exceptions import ConfigError
from src.data_layer.dataset import Dataset
from src.data_layer.feature_io import load_dataset, save_vdtf


@pytest.fixture
def bench(tmp_path, tiny_spec):
    """Synthetic feature files plus a fast config that points at them."""
    spec_path = tmp_path / "spec.yaml"
    spec_path.write_text(yaml.safe_dump(tiny_spec.to_dict()))
    data_dir = tmp_path / "data"
    assert main(["synth", "--spec", str(spec_path), "--out", str(data_dir)]) == 0

    config = {
        "source_train": "data/source_train.vdtf",
        "target_train": "data/target_train.vdtf",
        "target_test": "data/target_test.vdtf",
        "source_test": "data/source_test.vdtf",
        "encoder_hidden": [16],
        "latent_dim": 8,
        "classifier_hidden": 16,
        "lr": 1e-3,
        "ttt_lr": 1e-4,
        "batch_size": 64,
        "epochs": 2,
        "early_stop_patience": 2,
        "mmd_max_samples": 100,
    }
    config_path = tmp_path / "run.yaml"
    config_path.write_text(yaml.safe_dump(config))
    return tmp_path, data_dir, config_path


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


class TestParseOverrides:
    """Test --set parsing."""

    def test_yaml_scalars(self):
        """Test values parse as YAML scalars."""
        assert parse_overrides(["theta=0.5", "use_ttt=false", "encoder_hidden=[8, 4]"]) == {
            "theta": 0.5,
            "use_ttt": False,
            "encoder_hidden": [8, 4],
        }

    def test_missing_equals(self):
        """Test pairs without '=' raise ConfigError."""
        with pytest.raises(ConfigError):
            parse_overrides(["theta"])


class TestSynthCommand:
    """Test synthetic data generation."""

    def test_writes_every_split(self, bench):
        """Test one file per domain and split."""
        _, data_dir, _ = bench
        names = sorted(p.name for p in data_dir.iterdir())
        assert names == [
            "source_test.vdtf",
            "source_train.vdtf",
            "target_test.vdtf",
            "target_train.vdtf",
        ]
        assert len(load_dataset(data_dir / "target_test.vdtf")) == 80

    def test_csv_format(self, tmp_path, tiny_spec):
        """Test CSV output."""
        spec_path = tmp_path / "spec.yaml"
        spec_path.write_text(yaml.safe_dump(tiny_spec.to_dict()))
        out = tmp_path / "csv"
        assert main(["synth", "--spec", str(spec_path), "--format", "csv", "--out", str(out)]) == 0
        assert load_dataset(out / "source_train.csv").domain_names == {0: "source"}

    def test_no_spec(self, tmp_path):
        """Test synth without a spec is a config error."""
        assert main(["synth", "--out", str(tmp_path)]) == 2


class TestPipelineCommands:
    """Test train, ttt, eval, mmd and project."""

    def test_train_then_ttt(self, bench, capsys):
        """Test training artifacts feed test-time training."""
        root, _, config = bench
        run = root / "run"
        assert main(["train", "--config", str(config), "--out", str(run)]) == 0
        report = json.loads((run / "train_report.json").read_text())
        assert report["ttt"] is None
        assert report["eval_pre"]["total"] == 80

        checkpoint = str(run / "model.vdtc")
        for name in ("a", "b"):
            args = ["ttt", "--config", str(config), "--checkpoint", checkpoint]
            assert main(args + ["--theta", "-10", "--out", str(root / name)]) == 0
        first = (root / "a" / "adapted.vdtc").read_bytes()
        assert first == (root / "b" / "adapted.vdtc").read_bytes()
        ttt = json.loads((root / "a" / "ttt_report.json").read_text())
        assert ttt["ttt"]["retained"] == 80
        assert ttt["eval_post"]["total"] == 80

    def test_reports_reproducible(self, bench):
        """Test two train then ttt runs write identical reports apart from wall clock."""
        root, _, config = bench
        reports = []
        for name in ("first", "second"):
            out = root / name
            assert main(["train", "--config", str(config), "--out", str(out)]) == 0
            checkpoint = str(out / "model.vdtc")
            args = ["ttt", "--config", str(config), "--checkpoint", checkpoint]
            assert main(args + ["--out", str(out)]) == 0
            documents = {}
            for report in ("train_report.json", "ttt_report.json"):
                data = json.loads((out / report).read_text())
                data.pop("wall_clock")
                documents[report] = data
            reports.append(documents)
        assert reports[0] == reports[1]
        assert reports[0]["train_report.json"]["history"]["epochs"]

    def test_high_theta_retains_nothing(self, bench):
        """Test an unreachable threshold skips every update."""
        root, _, config = bench
        assert main(["train", "--config", str(config), "--out", str(root / "run")]) == 0
        args = ["ttt", "--config", str(config), "--checkpoint", str(root / "run" / "model.vdtc")]
        assert main(args + ["--theta", "10", "--out", str(root / "t")]) == 0
        ttt = json.loads((root / "t" / "ttt_report.json").read_text())
        assert ttt["ttt"]["retained"] == 0
        assert ttt["ttt"]["updates"] == 0

    def test_eval_mmd_project(self, bench, capsys):
        """Test scoring, MMD and projection on a trained checkpoint."""
        root, data_dir, config = bench
        assert main(["train", "--config", str(config), "--out", str(root / "run")]) == 0
        checkpoint = str(root / "run" / "model.vdtc")
        capsys.readouterr()

        data = str(data_dir / "target_test.vdtf")
        args = ["eval", "--config", str(config), "--checkpoint", checkpoint, "--data", data]
        assert main(args) == 0
        assert 0.0 <= _stdout_json(capsys)["f1_macro"] <= 1.0

        source = str(data_dir / "source_test.vdtf")
        args = ["mmd", "--source", source, "--target", data, "--checkpoint", checkpoint]
        assert main(args) == 0
        result = _stdout_json(capsys)
        assert result["raw"]["statistic"] >= 0 and result["gated"]["statistic"] >= 0

        out = root / "proj"
        args = ["project", "--data", source, data, "--checkpoint", checkpoint, "--out", str(out)]
        assert main(args) == 0
        assert (out / "projection.csv").read_text().splitlines()[0] == "domain,label,pc1,pc2"


class TestTableCommands:
    """Test ablate, sweep and compare."""

    def test_ablate_and_sweep(self, bench, capsys):
        """Test tables are written to the output directory."""
        root, _, config = bench
        out = str(root / "tables")
        args = ["ablate", "--config", str(config), "--out", out]
        assert main(args + ["--variants", "full,no_ttt", "--seeds", "0"]) == 0
        table = json.loads((root / "tables" / "ablation.json").read_text())
        assert table["variants"] == ["full", "no_ttt"]

        args = ["sweep", "--config", str(config), "--out", out, "--param", "theta"]
        assert main(args + ["--values", "0.5,10", "--seeds", "0"]) == 0
        sweep = json.loads((root / "tables" / "sweep_theta.json").read_text())
        assert [r["variant"] for r in sweep["rows"]] == ["theta=0.5", "theta=10"]

    def test_compare(self, tmp_path, capsys):
        """Test comparing two saved tables."""
        for name, base in (("a", 0.8), ("b", 0.7)):
            rows = [
                {"variant": name, "seed": s, "f1_macro": base + 0.01 * s, "accuracy": base}
                for s in range(5)
            ]
            (tmp_path / f"{name}.json").write_text(json.dumps({"rows": rows}))
        assert main(["compare", str(tmp_path / "a.json"), str(tmp_path / "b.json")]) == 0
        result = _stdout_json(capsys)
        assert result["metrics"]["f1_macro"]["p_value"] == pytest.approx(2 / 32)


class TestExitCodes:
    """Test error mapping to exit codes."""

    def test_unknown_config_key(self, bench):
        """Test config errors exit with 2."""
        _, _, config = bench
        assert main(["train", "--config", str(config), "--set", "colour=blue"]) == 2

    def test_missing_config_file(self, tmp_path):
        """Test a missing config file exits with 2."""
        assert main(["train", "--config", str(tmp_path / "none.yaml")]) == 2

    def test_missing_checkpoint(self, bench):
        """Test data errors exit with 3."""
        root, data_dir, config = bench
        data = str(data_dir / "target_test.vdtf")
        args = ["eval", "--config", str(config), "--checkpoint", str(root / "none.vdtc")]
        assert main(args + ["--data", data]) == 3

    def test_undecodable_csv(self, bench):
        """Test a CSV with invalid UTF-8 exits with 3."""
        root, _, config = bench
        assert main(["train", "--config", str(config), "--out", str(root / "run")]) == 0
        bad = root / "bad.csv"
        bad.write_bytes(b"domain,label,f0\nbbc,0,1\n\xff\xfe,1,2\n")
        args = ["eval", "--config", str(config), "--checkpoint", str(root / "run" / "model.vdtc")]
        assert main(args + ["--data", str(bad)]) == 3

    def test_unlabeled_eval(self, bench):
        """Test scoring unlabeled data exits with 3."""
        root, data_dir, config = bench
        assert main(["train", "--config", str(config), "--out", str(root / "run")]) == 0
        unlabeled = load_dataset(data_dir / "target_test.vdtf").without_labels()
        path = save_vdtf(unlabeled, root / "unlabeled.vdtf")
        args = ["eval", "--config", str(config), "--checkpoint", str(root / "run" / "model.vdtc")]
        assert main(args + ["--data", str(path)]) == 3

    def test_dimension_mismatch(self, bench):
        """Test contract errors exit with 4."""
        root, _, config = bench
        assert main(["train", "--config", str(config), "--out", str(root / "run")]) == 0
        narrow = save_vdtf(Dataset(np.zeros((4, 3)), np.zeros(4), [0, 1, 0, 1]), root / "n.vdtf")
        args = ["eval", "--config", str(config), "--checkpoint", str(root / "run" / "model.vdtc")]
        assert main(args + ["--data", str(narrow)]) == 4
