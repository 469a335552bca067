from ..errors import ConfigurationError
from ..nets import Generator
from .base import (
    Prediction,
    Predictor,
    PredictorKind,
    check_history,
    compute_residual,
    residual_preview,
)
from .baselines import FrameDifferencePredictor, MotionCompensatedPredictor, fd_predict
from .learned import LearnedPredictor, lfp_predict
from .motion import BLOCK_SIZE, SEARCH_RANGE, MotionField, block_grid, mc_apply, mc_estimate


def make_predictor(
    kind: PredictorKind | str,
    generator: Generator | None = None,
    block: int = BLOCK_SIZE,
    search_range: int = SEARCH_RANGE,
) -> Predictor:
    kind = PredictorKind(kind)
    if kind is PredictorKind.FD:
        return FrameDifferencePredictor()
    if kind is PredictorKind.MC:
        return MotionCompensatedPredictor(block=block, search_range=search_range)
    if generator is None:
        raise ConfigurationError("the learned predictor needs a generator checkpoint")
    return LearnedPredictor(generator)


__all__ = [
    "BLOCK_SIZE",
    "SEARCH_RANGE",
    "FrameDifferencePredictor",
    "LearnedPredictor",
    "MotionCompensatedPredictor",
    "MotionField",
    "Prediction",
    "Predictor",
    "PredictorKind",
    "block_grid",
    "check_history",
    "compute_residual",
    "fd_predict",
    "lfp_predict",
    "make_predictor",
    "mc_apply",
    "mc_estimate",
    "residual_preview",
]
