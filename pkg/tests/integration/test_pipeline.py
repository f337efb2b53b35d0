"""End-to-end pipeline on a tiny synthetic benchmark."""

import pytest
import yaml

from main import main
from src.data_layer.feature_io import load_dataset
from src.experiments.config import AblationSpec, DomainSplits
from src.experiments.runner import ExperimentRunner
from src.ml.models.checkpoint import load_checkpoint, save_checkpoint
from src.ml.online_learning.test_time import ttt_adapt
from src.ml.training.model_trainer import VDTTrainer


@pytest.mark.integration
class TestPipeline:
    """Test the pipeline from generated files to adapted predictions."""

    def test_files_match_memory(self, tmp_path, tiny_spec, tiny_config):
        """Test training from written files matches training from memory."""
        spec_path = tmp_path / "spec.yaml"
        spec_path.write_text(yaml.safe_dump(tiny_spec.to_dict()))
        assert main(["synth", "--spec", str(spec_path), "--out", str(tmp_path)]) == 0

        from_files = DomainSplits(
            source_train=load_dataset(tmp_path / "source_train.vdtf"),
            target_train=load_dataset(tmp_path / "target_train.vdtf"),
            target_test=load_dataset(tmp_path / "target_test.vdtf"),
        )
        a = ExperimentRunner().run(from_files, tiny_config).report
        b = ExperimentRunner().run(DomainSplits.from_synth(tiny_spec), tiny_config).report
        assert a.eval_post == b.eval_post
        assert a.history == b.history

    def test_reloaded_checkpoint_adapts_identically(self, tmp_path, tiny_splits, tiny_config):
        """Test adapting a reloaded checkpoint matches adapting in memory."""
        data = tiny_splits.for_run(tiny_config, AblationSpec())
        params = VDTTrainer(tiny_config).fit(data.source_train, data.target_train).params
        path = save_checkpoint(params, tmp_path / "m.vdtc", tiny_config.config_hash())
        reloaded, header = load_checkpoint(path, input_dim=8)
        assert header["config_hash"] == tiny_config.config_hash()

        config = tiny_config.replace(theta=-10.0)
        stream = tiny_splits.target_test.without_labels()
        ttt_adapt(params, stream, config)
        ttt_adapt(reloaded, stream, config)
        assert all(params[n].tobytes() == reloaded[n].tobytes() for n in params.names())
