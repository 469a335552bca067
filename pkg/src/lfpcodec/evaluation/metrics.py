import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ..data.frames import Frame
from ..errors import DimensionError, InputError
from ..predictors import Predictor

logger = logging.getLogger(__name__)

PEAK = 255.0
PSNR_CAP = 99.0


def mse(a: Frame | np.ndarray, b: Frame | np.ndarray) -> float:
    x = a.pixels if isinstance(a, Frame) else np.asarray(a)
    y = b.pixels if isinstance(b, Frame) else np.asarray(b)
    if x.shape != y.shape:
        raise DimensionError(f"cannot compare {x.shape} with {y.shape}")
    diff = x.astype(np.float64) - y.astype(np.float64)
    return float(np.mean(diff * diff))


def psnr(a: Frame | np.ndarray, b: Frame | np.ndarray) -> float:
    """10 log10(255^2 / MSE); identical inputs give +inf."""
    error = mse(a, b)
    if error == 0.0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / error)


def mean_psnr(values: Sequence[float], cap: float = PSNR_CAP) -> float:
    """Average with every value capped, so lossless frames keep the mean finite."""
    if not values:
        raise InputError("no PSNR values to average")
    capped = [min(v, cap) for v in values]
    hits = sum(1 for v in values if v > cap)
    if hits:
        logger.warning("%d of %d PSNR values capped at %.1f dB", hits, len(values), cap)
    return sum(capped) / len(capped)


@dataclass
class PredictionCurve:
    label: str
    frames: list[int] = field(default_factory=list)  # 1-based frame numbers
    psnr: list[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def mean(self) -> float:
        return mean_psnr(self.psnr)


def prediction_curve(
    frames: Sequence[Frame],
    predictor: Predictor,
    start: int | None = None,
    label: str | None = None,
) -> PredictionCurve:
    """PSNR of each predicted frame, predicting from original (uncoded) frames.

    `start` is the 0-based index of the first predicted frame; it defaults to
    the predictor's history length and may not be smaller.
    """
    needed = predictor.history
    first = needed if start is None else start
    if first < needed:
        raise InputError(f"prediction cannot start before frame {needed + 1}")
    if len(frames) <= first:
        raise InputError(
            f"clip of {len(frames)} frames is too short to predict from frame {first + 1}"
        )
    curve = PredictionCurve(label or str(predictor.kind))
    for t in range(first, len(frames)):
        predicted = predictor.predict(frames[t - needed : t], frames[t]).frame
        curve.frames.append(t + 1)
        curve.psnr.append(psnr(frames[t], predicted))
    return curve


def _check_fps(fps: float) -> None:
    if not fps > 0:
        raise InputError(f"frame rate must be positive, got {fps}")


def bitrate(per_frame_bits: Sequence[int], fps: float) -> float:
    """Mean frame size times frame rate, in kbit/s."""
    _check_fps(fps)
    if not per_frame_bits:
        raise InputError("no frame sizes to average")
    return sum(per_frame_bits) / len(per_frame_bits) * fps / 1000.0


def bitrate_from_file(size_bytes: int, frame_count: int, fps: float) -> float:
    """Rate of a single-file stream: file size over frame count, in kbit/s."""
    _check_fps(fps)
    if frame_count < 1:
        raise InputError("frame count must be positive")
    return 8.0 * size_bytes / frame_count * fps / 1000.0
