"""Log analytics, post-training and the ``nas`` command line."""

from .metrics import (BandPoint, TopEntry, TrajectoryBin, TrajectoryPoint, UtilizationBin,
                      mean_utilization, quantile_bands, stats, top_k, trajectory, trajectory_points,
                      utilization, utilization_at)
from .post_train import (PRESET_BASELINES, BaselineRecord, PostTrainReport, RatioRow, post_train,
                         ratio_row, reference_baseline, train_reference)

__all__ = [
    "BandPoint", "TopEntry", "TrajectoryBin", "TrajectoryPoint", "UtilizationBin",
    "mean_utilization", "quantile_bands", "stats", "top_k", "trajectory", "trajectory_points",
    "utilization", "utilization_at", "PRESET_BASELINES", "BaselineRecord", "PostTrainReport",
    "RatioRow", "post_train", "ratio_row", "reference_baseline", "train_reference",
]
