"""Test-time adaptation on unlabeled target data."""

from src.ml.online_learning.test_time import (
    PseudoBatch,
    PseudoSample,
    TTTReport,
    cvf_filter,
    cvf_mask,
    pseudo_label,
    ttt_adapt,
)
