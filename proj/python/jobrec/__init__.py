"""Python bindings for the jobrec two-stage recommender."""

from ._core import (
    Dataset,
    JobrecError,
    baseline,
    jaccard,
    load_dataset,
    run_pipeline,
    set_quiet,
    synthesize,
    temporal_split,
    total_score,
    user_score,
    write_dataset,
)

__all__ = [
    "Dataset",
    "JobrecError",
    "baseline",
    "jaccard",
    "load_dataset",
    "run_pipeline",
    "set_quiet",
    "synthesize",
    "temporal_split",
    "total_score",
    "user_score",
    "write_dataset",
]
