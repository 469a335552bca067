from collections.abc import Sequence
from dataclasses import dataclass, field

from ..data.frames import Frame, normalize, stack
from ..nets import Generator, to_uint8_frame
from ..nn import no_grad
from .base import Prediction, PredictorKind, check_history
from .motion import MotionField


def lfp_predict(generator: Generator, history: Sequence[Frame]) -> Frame:
    """Next frame from the last N frames, oldest first."""
    check_history(history, generator.config.input_frames)
    with no_grad():
        out = generator(normalize(stack(history)))
    return to_uint8_frame(out)


@dataclass
class LearnedPredictor:
    generator: Generator
    kind: PredictorKind = field(default=PredictorKind.LFP, init=False)

    @property
    def history(self) -> int:
        return self.generator.config.input_frames

    def predict(self, history: Sequence[Frame], target: Frame) -> Prediction:
        return Prediction(lfp_predict(self.generator, history))

    def reconstruct(self, history: Sequence[Frame], motion: MotionField | None) -> Frame:
        return lfp_predict(self.generator, history)
