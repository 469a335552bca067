from collections.abc import Sequence
from dataclasses import dataclass
from enum import StrEnum
from typing import Protocol

import numpy as np

from ..data.frames import Frame
from ..errors import DimensionError, UsageError
from .motion import MotionField


class PredictorKind(StrEnum):
    FD = "fd"
    MC = "mc"
    LFP = "lfp"


@dataclass
class Prediction:
    frame: Frame
    motion: MotionField | None = None


class Predictor(Protocol):
    """Encoder side sees the target, decoder side only what was transmitted."""

    kind: PredictorKind

    @property
    def history(self) -> int: ...

    def predict(self, history: Sequence[Frame], target: Frame) -> Prediction: ...

    def reconstruct(
        self, history: Sequence[Frame], motion: MotionField | None
    ) -> Frame: ...


def check_history(history: Sequence[Frame], needed: int) -> None:
    if len(history) != needed:
        raise UsageError(f"predictor needs exactly {needed} frames, got {len(history)}")
    first = history[0].shape
    for frame in history[1:]:
        if frame.shape != first:
            raise DimensionError(f"history frames differ in size: {frame.shape} vs {first}")


def compute_residual(original: Frame, predicted: Frame) -> np.ndarray:
    """original - predicted as int16, always within [-255, 255]."""
    if original.shape != predicted.shape:
        raise DimensionError(f"cannot subtract {predicted.shape} from {original.shape}")
    return original.pixels.astype(np.int16) - predicted.pixels.astype(np.int16)


def residual_preview(residual: np.ndarray, scale: float = 1.0) -> Frame:
    """Displayable residual: clamp(scale * r + 128) rounded to 8 bits."""
    shifted = np.asarray(residual, dtype=np.float64) * scale + 128.0
    return Frame(np.clip(np.floor(shifted + 0.5), 0, 255).astype(np.uint8))
