"""Semantic few-shot task sampling and evaluation."""

from ._semtask import (
    DistanceMatrix,
    SemtaskError,
    Taxonomy,
    __version__,
    distance_matrix,
    evaluate,
    jc_distance,
    read_tasks,
    sample_testbed,
)

__all__ = [
    "DistanceMatrix",
    "SemtaskError",
    "Taxonomy",
    "__version__",
    "distance_matrix",
    "evaluate",
    "jc_distance",
    "read_tasks",
    "sample_testbed",
]
