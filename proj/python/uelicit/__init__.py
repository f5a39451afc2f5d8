"""Utility elicitation by loss-based clustering and question trees."""

from ._core import (
    ConflictError,
    DecisionModel,
    ElicitationTree,
    Error,
    NotFoundError,
    ParseError,
    StateError,
    UtilityDatabase,
    ValidationError,
    averaged_distance,
    best_strategy,
    build_tree,
    cluster,
    distance,
    entropy,
    expected_utility,
    generate,
    holdout_error,
    load_database,
    load_model,
    loocv_over_k,
    model_from_json,
    normalize,
    utility_loss,
)

__version__ = "0.3.0"
