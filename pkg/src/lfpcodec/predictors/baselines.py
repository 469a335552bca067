from collections.abc import Sequence
from dataclasses import dataclass, field

from ..data.frames import Frame
from ..errors import InputError
from .base import Prediction, PredictorKind, check_history
from .motion import BLOCK_SIZE, SEARCH_RANGE, MotionField, mc_apply, mc_estimate


def fd_predict(prev: Frame) -> Frame:
    return prev


@dataclass
class FrameDifferencePredictor:
    kind: PredictorKind = field(default=PredictorKind.FD, init=False)

    @property
    def history(self) -> int:
        return 1

    def predict(self, history: Sequence[Frame], target: Frame) -> Prediction:
        check_history(history, 1)
        return Prediction(fd_predict(history[-1]))

    def reconstruct(self, history: Sequence[Frame], motion: MotionField | None) -> Frame:
        check_history(history, 1)
        return fd_predict(history[-1])


@dataclass
class MotionCompensatedPredictor:
    block: int = BLOCK_SIZE
    search_range: int = SEARCH_RANGE
    kind: PredictorKind = field(default=PredictorKind.MC, init=False)

    @property
    def history(self) -> int:
        return 1

    def predict(self, history: Sequence[Frame], target: Frame) -> Prediction:
        check_history(history, 1)
        motion, frame = mc_estimate(history[-1], target, self.block, self.search_range)
        return Prediction(frame, motion)

    def reconstruct(self, history: Sequence[Frame], motion: MotionField | None) -> Frame:
        check_history(history, 1)
        if motion is None:
            raise InputError("motion compensated frame carries no motion field")
        return mc_apply(history[-1], motion)
