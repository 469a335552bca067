"""8-bit grayscale frames and their on-disk forms (PGM P5, raw Y)."""

import logging
import re
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DimensionError, InputError

logger = logging.getLogger(__name__)

_PRINTF_INDEX = re.compile(r"%0?(\d*)d")
_DIGITS = re.compile(r"(\d+)")


@dataclass(frozen=True, eq=False)
class Frame:
    pixels: np.ndarray  # (height, width) uint8, row-major

    def __post_init__(self) -> None:
        if self.pixels.ndim != 2 or self.pixels.dtype != np.uint8:
            raise DimensionError(
                f"frame must be a 2-D uint8 array, got {self.pixels.dtype} {self.pixels.shape}"
            )
        if self.pixels.size == 0:
            raise DimensionError("frame has no pixels")

    @classmethod
    def from_array(cls, values: np.ndarray) -> "Frame":
        arr = np.asarray(values)
        if arr.dtype != np.uint8:
            arr = np.clip(arr, 0, 255).astype(np.uint8)
        return cls(np.ascontiguousarray(arr))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    __hash__ = None  # type: ignore[assignment]


def normalize(pixels: np.ndarray) -> np.ndarray:
    """Map 8-bit values to [-1, 1] as v / 127.5 - 1 (float32)."""
    return np.asarray(pixels, dtype=np.float32) / np.float32(127.5) - np.float32(1.0)


def parse_pgm(data: bytes, source: str | Path = "<bytes>") -> Frame:
    tokens: list[bytes] = []
    pos = 0
    # magic, width, height, maxval; '#' comments run to end of line
    while len(tokens) < 4:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos >= len(data):
            raise InputError(f"{source}: truncated PGM header")
        if data[pos : pos + 1] == b"#":
            end = data.find(b"\n", pos)
            pos = len(data) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        tokens.append(data[start:pos])
    pos += 1  # single whitespace before the raster

    if tokens[0] != b"P5":
        raise InputError(f"{source}: not a binary PGM (magic {tokens[0]!r})")
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError as exc:
        raise InputError(f"{source}: malformed PGM header") from exc
    if maxval != 255:
        raise InputError(f"{source}: only 8-bit PGM (maxval 255) is supported, got {maxval}")
    if width < 1 or height < 1:
        raise InputError(f"{source}: invalid dimensions {width}x{height}")
    raster = data[pos : pos + width * height]
    if len(raster) != width * height:
        raise InputError(f"{source}: raster truncated")
    return Frame(np.frombuffer(raster, dtype=np.uint8).reshape(height, width).copy())


def pgm_bytes(frame: Frame) -> bytes:
    return f"P5\n{frame.width} {frame.height}\n255\n".encode() + frame.pixels.tobytes()


def read_pgm(path: Path) -> Frame:
    return parse_pgm(Path(path).read_bytes(), path)


def write_pgm(frame: Frame, path: Path) -> None:
    Path(path).write_bytes(pgm_bytes(frame))


def _index_order(path: Path) -> list[tuple[int, str]]:
    """Numeric runs compare as numbers, so f2.pgm sorts before f10.pgm."""
    parts = _DIGITS.split(path.name)
    return [(int(part), "") if part.isdigit() else (-1, part) for part in parts]


def _pattern_files(pattern: str) -> list[Path]:
    path = Path(pattern)
    if path.is_dir():
        return sorted(path.glob("*.pgm"), key=_index_order)
    match = _PRINTF_INDEX.search(path.name)
    if match is None:
        return [path] if path.exists() else []
    width = int(match.group(1) or 0)
    prefix, suffix = path.name[: match.start()], path.name[match.end() :]
    index_re = re.compile(
        re.escape(prefix) + (rf"(\d{{{width}}})" if width else r"(\d+)") + re.escape(suffix) + "$"
    )
    found = []
    for candidate in path.parent.glob(f"{prefix}*{suffix}"):
        m = index_re.match(candidate.name)
        if m:
            found.append((int(m.group(1)), candidate))
    return [p for _, p in sorted(found)]


def load_frames(pattern: str | Path) -> list[Frame]:
    """Load a PGM sequence from a printf pattern (``%03d``), a directory or one file."""
    files = _pattern_files(str(pattern))
    if not files:
        raise InputError(f"no frames match {pattern}")
    frames = [read_pgm(f) for f in files]
    check_same_size(frames)
    logger.debug("loaded %d frames of %dx%d from %s", len(frames), frames[0].width, frames[0].height, pattern)
    return frames


def write_frames(frames: Sequence[Frame], pattern: str | Path) -> list[Path]:
    pattern = str(pattern)
    if _PRINTF_INDEX.search(Path(pattern).name) is None:
        raise InputError(f"output pattern {pattern} needs an index placeholder such as %03d")
    paths = []
    for index, frame in enumerate(frames):
        path = Path(pattern % index)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_pgm(frame, path)
        paths.append(path)
    return paths


def load_raw_y(path: Path, width: int, height: int) -> list[Frame]:
    """Read concatenated 8-bit Y planes."""
    data = Path(path).read_bytes()
    size = width * height
    if size == 0 or not data or len(data) % size:
        raise InputError(f"{path}: {len(data)} bytes is not a whole number of {width}x{height} frames")
    planes = np.frombuffer(data, dtype=np.uint8).reshape(-1, height, width)
    return [Frame(plane.copy()) for plane in planes]


def write_raw_y(frames: Sequence[Frame], path: Path) -> None:
    Path(path).write_bytes(b"".join(f.pixels.tobytes() for f in frames))


def check_same_size(frames: Sequence[Frame]) -> None:
    if not frames:
        raise InputError("empty frame sequence")
    first = frames[0].shape
    for index, frame in enumerate(frames):
        if frame.shape != first:
            raise InputError(f"frame {index} is {frame.shape}, expected {first}")


def stack(frames: Sequence[Frame]) -> np.ndarray:
    return np.stack([f.pixels for f in frames])
