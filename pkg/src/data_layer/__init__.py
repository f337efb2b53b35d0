"""Feature ingestion, synthetic generation and batching."""

from src.data_layer.dataset import Dataset
from src.data_layer.feature_io import (
    load_csv,
    load_dataset,
    load_vdtf,
    parse_vdtf,
    save_csv,
    save_vdtf,
)
from src.data_layer.synthetic import DomainShift, SynthSpec, class_means, synth
from src.data_layer.batching import batches, paired_batches, train_validation_split
