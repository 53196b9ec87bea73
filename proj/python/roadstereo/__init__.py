"""Road-surface stereo matching and reconstruction (C++ core)."""

from ._core import (
    CameraRig,
    PipelineConfig,
    PlanePrior,
    Pose,
    RoadStereoError,
    analytic_road_line,
    apply_pt,
    block_stats,
    estimate_pitch,
    measure_offsets,
    ncc_cost,
    render,
    reproject,
    rotation_matrix,
    run_pipeline,
    truth_compare,
)

__all__ = [
    "CameraRig",
    "PipelineConfig",
    "PlanePrior",
    "Pose",
    "RoadStereoError",
    "analytic_road_line",
    "apply_pt",
    "block_stats",
    "estimate_pitch",
    "measure_offsets",
    "ncc_cost",
    "render",
    "reproject",
    "rotation_matrix",
    "run_pipeline",
    "truth_compare",
]
