"""Training patch sequences and the packed dataset file.

A sample is `length` temporally consecutive `side` x `side` patches cut at one
location. Samples are kept only if every consecutive pair of patches differs
by more than `threshold` in mean square difference, except that with
probability `ignore_prob` a draw is accepted without looking at motion.
"""

import logging
import struct
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import InputError, IntegrityError
from .frames import Frame, check_same_size, stack

logger = logging.getLogger(__name__)

PATCH_SIZE = 48
SAMPLE_FRAMES = 9
MOTION_THRESHOLD = 7.0
IGNORE_PROB = 0.05
RETRY_FACTOR = 100

MAGIC = b"LFPD"
VERSION = 1
_HEADER = struct.Struct("<4sHQHH")


@dataclass
class ExtractionResult:
    samples: np.ndarray  # (count, length, side, side) uint8
    draws: int
    unconditional: int
    requested: int

    @property
    def short(self) -> bool:
        return len(self.samples) < self.requested


def pairwise_mse(sample: np.ndarray) -> np.ndarray:
    """Mean square difference between each consecutive pair of patches."""
    values = sample.astype(np.float64)
    diffs = values[1:] - values[:-1]
    return (diffs * diffs).mean(axis=(1, 2))


def has_motion(sample: np.ndarray, threshold: float = MOTION_THRESHOLD) -> bool:
    return bool(np.all(pairwise_mse(sample) > threshold))


def extract_patch_samples(
    frames: Sequence[Frame] | Sequence[Sequence[Frame]],
    count: int,
    rng_seed: int,
    threshold: float = MOTION_THRESHOLD,
    ignore_prob: float = IGNORE_PROB,
    side: int = PATCH_SIZE,
    length: int = SAMPLE_FRAMES,
) -> ExtractionResult:
    """Draw up to `count` motion-gated patch sequences.

    `frames` is one clip or a list of clips; each draw picks a clip, a start
    frame and a location uniformly at random. Gives up after
    ``RETRY_FACTOR * count`` draws and returns what was accepted.
    """
    clips = [frames] if frames and isinstance(frames[0], Frame) else list(frames)
    if not clips:
        raise InputError("no clips to extract from")
    arrays = []
    for index, clip in enumerate(clips):
        check_same_size(clip)
        if len(clip) < length:
            raise InputError(f"clip {index} has {len(clip)} frames, need at least {length}")
        if clip[0].height < side or clip[0].width < side:
            raise InputError(f"clip {index} is {clip[0].shape}, smaller than {side}x{side} patches")
        arrays.append(stack(clip))

    rng = np.random.default_rng(rng_seed)
    accepted: list[np.ndarray] = []
    draws = unconditional = 0
    while len(accepted) < count and draws < RETRY_FACTOR * count:
        draws += 1
        video = arrays[rng.integers(len(arrays))] if len(arrays) > 1 else arrays[0]
        t0 = rng.integers(0, video.shape[0] - length + 1)
        y = rng.integers(0, video.shape[1] - side + 1)
        x = rng.integers(0, video.shape[2] - side + 1)
        ignore = rng.random() < ignore_prob
        sample = video[t0 : t0 + length, y : y + side, x : x + side]
        if ignore:
            unconditional += 1
        elif not has_motion(sample, threshold):
            continue
        accepted.append(sample.copy())

    result = ExtractionResult(
        samples=(
            np.stack(accepted) if accepted else np.zeros((0, length, side, side), np.uint8)
        ),
        draws=draws,
        unconditional=unconditional,
        requested=count,
    )
    if result.short:
        logger.warning(
            "extracted %d of %d samples after %d draws", len(accepted), count, draws
        )
    return result


@dataclass
class PatchDataset:
    samples: np.ndarray  # (count, length, side, side) uint8

    def __post_init__(self) -> None:
        if self.samples.ndim != 4 or self.samples.dtype != np.uint8:
            raise InputError(f"dataset samples must be 4-D uint8, got {self.samples.shape}")
        if self.samples.shape[2] != self.samples.shape[3]:
            raise InputError("dataset patches must be square")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def length(self) -> int:
        return self.samples.shape[1]

    @property
    def side(self) -> int:
        return self.samples.shape[2]

    def split(self, holdout: int) -> tuple["PatchDataset", "PatchDataset"]:
        """Last `holdout` samples become a held-out set."""
        cut = len(self) - holdout
        return PatchDataset(self.samples[:cut]), PatchDataset(self.samples[cut:])


def store_dataset(samples: np.ndarray | PatchDataset, path: Path) -> int:
    """Write the packed dataset; returns the file size in bytes."""
    dataset = samples if isinstance(samples, PatchDataset) else PatchDataset(samples)
    header = _HEADER.pack(MAGIC, VERSION, len(dataset), dataset.side, dataset.length)
    data = header + np.ascontiguousarray(dataset.samples).tobytes()
    Path(path).write_bytes(data)
    logger.info("stored %d samples in %s", len(dataset), path)
    return len(data)


def load_dataset(path: Path) -> PatchDataset:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise IntegrityError(f"{path}: dataset header truncated")
    magic, version, count, side, length = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise IntegrityError(f"{path}: not a patch dataset (magic {magic!r})")
    if version != VERSION:
        raise IntegrityError(f"{path}: unsupported dataset version {version}")
    expected = _HEADER.size + count * length * side * side
    if len(data) != expected:
        raise IntegrityError(f"{path}: expected {expected} bytes, found {len(data)}")
    raster = np.frombuffer(data, dtype=np.uint8, offset=_HEADER.size)
    return PatchDataset(raster.reshape(count, length, side, side).copy())
