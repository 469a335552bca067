"""Exhaustive block motion estimation with half-pel refinement.

Vectors are (dx, dy) in half-pel units. The prediction of pixel (y, x) inside
a block with vector (dx, dy) is the reference sampled at (y + dy/2, x + dx/2),
with the reference edge-extended outside the frame and half-pel positions
taken from bilinear averages rounded half up in integer arithmetic.
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from ..data.frames import Frame
from ..errors import DimensionError, InputError

logger = logging.getLogger(__name__)

BLOCK_SIZE = 16
SEARCH_RANGE = 31
MAX_HALF_PEL = 2 * SEARCH_RANGE

_HALF_PEL_NEIGHBOURS = [
    (hx, hy) for hy in (-1, 0, 1) for hx in (-1, 0, 1) if (hx, hy) != (0, 0)
]


@dataclass
class MotionField:
    block: int
    vectors: np.ndarray  # (rows, cols, 2) int16, (dx, dy) half-pel

    def __post_init__(self) -> None:
        vectors = np.asarray(self.vectors, dtype=np.int64)
        if vectors.ndim != 3 or vectors.shape[2] != 2:
            raise InputError(f"motion vectors must be (rows, cols, 2), got {vectors.shape}")
        if self.block < 1:
            raise InputError(f"block size must be positive, got {self.block}")
        if vectors.size and int(np.abs(vectors).max()) > MAX_HALF_PEL:
            raise InputError(f"motion vector component exceeds +-{MAX_HALF_PEL} half-pels")
        self.vectors = vectors.astype(np.int16)

    @property
    def grid(self) -> tuple[int, int]:
        return self.vectors.shape[0], self.vectors.shape[1]

    @classmethod
    def zeros(cls, shape: tuple[int, int], block: int = BLOCK_SIZE) -> "MotionField":
        return cls(block, np.zeros((*block_grid(shape, block), 2), np.int16))

    def raster(self) -> list[tuple[int, int]]:
        """Vectors in raster block order."""
        return [(int(dx), int(dy)) for dx, dy in self.vectors.reshape(-1, 2)]


def block_grid(shape: tuple[int, int], block: int) -> tuple[int, int]:
    """Rows and columns of blocks covering a frame; edge blocks may be partial."""
    height, width = shape
    return -(-height // block), -(-width // block)


def half_pel_plane(pixels: np.ndarray, pad: int) -> np.ndarray:
    """Edge-extended reference at twice the resolution.

    Integer position (y, x) of the padded reference lives at (2y, 2x); the
    odd positions hold the rounded bilinear averages of their neighbours.
    """
    ref = np.pad(pixels.astype(np.int32), pad, mode="edge")
    h, w = ref.shape
    plane = np.empty((2 * h - 1, 2 * w - 1), dtype=np.int32)
    plane[::2, ::2] = ref
    plane[::2, 1::2] = (ref[:, :-1] + ref[:, 1:] + 1) >> 1
    plane[1::2, ::2] = (ref[:-1] + ref[1:] + 1) >> 1
    plane[1::2, 1::2] = (ref[:-1, :-1] + ref[:-1, 1:] + ref[1:, :-1] + ref[1:, 1:] + 2) >> 2
    return plane


def _sample(
    plane: np.ndarray, pad: int, y0: int, x0: int, h: int, w: int, dx: int, dy: int
) -> np.ndarray:
    top = 2 * (y0 + pad) + dy
    left = 2 * (x0 + pad) + dx
    return plane[top : top + 2 * h : 2, left : left + 2 * w : 2]


def _block_starts(size: int, block: int) -> np.ndarray:
    return np.arange(0, size, block)


def _tie_key(dx: int, dy: int) -> tuple[int, int, int]:
    return abs(dx) + abs(dy), dy, dx


def _integer_search(
    reference: np.ndarray,
    target: np.ndarray,
    block: int,
    search_range: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Best integer vector per block, in full pels, and its block SSE."""
    height, width = target.shape
    ref = np.pad(reference.astype(np.int64), search_range, mode="edge")
    tgt = target.astype(np.int64)
    rows, cols = _block_starts(height, block), _block_starts(width, block)
    best_sse = np.full((len(rows), len(cols)), np.iinfo(np.int64).max, dtype=np.int64)
    best = np.zeros((len(rows), len(cols), 2), dtype=np.int64)

    # Candidates in tie-break order; a later candidate wins only when strictly better.
    span = range(-search_range, search_range + 1)
    candidates = sorted(itertools.product(span, span), key=lambda v: _tie_key(*v))
    for dx, dy in candidates:
        top, left = search_range + dy, search_range + dx
        diff = ref[top : top + height, left : left + width] - tgt
        sse = np.add.reduceat(np.add.reduceat(diff * diff, rows, axis=0), cols, axis=1)
        better = sse < best_sse
        best_sse[better] = sse[better]
        best[better] = (dx, dy)
    return best, best_sse


def mc_estimate(
    reference: Frame,
    target: Frame,
    block: int = BLOCK_SIZE,
    search_range: int = SEARCH_RANGE,
) -> tuple[MotionField, Frame]:
    """Motion field of `target` relative to `reference` and the compensated frame."""
    if reference.shape != target.shape:
        raise DimensionError(
            f"reference {reference.shape} and target {target.shape} differ in size"
        )
    if not 0 <= search_range <= SEARCH_RANGE:
        raise InputError(f"search range must be within [0, {SEARCH_RANGE}]")
    integer, _ = _integer_search(reference.pixels, target.pixels, block, search_range)

    pad = SEARCH_RANGE + 1
    plane = half_pel_plane(reference.pixels, pad)
    limit = 2 * search_range
    tgt = target.pixels.astype(np.int64)
    height, width = target.shape
    vectors = np.zeros(integer.shape, dtype=np.int16)
    for r, y0 in enumerate(_block_starts(height, block)):
        for c, x0 in enumerate(_block_starts(width, block)):
            h, w = min(block, height - y0), min(block, width - x0)
            goal = tgt[y0 : y0 + h, x0 : x0 + w]
            cx, cy = 2 * int(integer[r, c, 0]), 2 * int(integer[r, c, 1])
            chosen = None
            for ox, oy in [(0, 0), *_HALF_PEL_NEIGHBOURS]:
                hx, hy = cx + ox, cy + oy
                if abs(hx) > limit or abs(hy) > limit:
                    continue
                diff = _sample(plane, pad, y0, x0, h, w, hx, hy) - goal
                key = (int((diff * diff).sum()), *_tie_key(hx, hy))
                if chosen is None or key < chosen[0]:
                    chosen = (key, hx, hy)
            vectors[r, c] = chosen[1], chosen[2]

    field = MotionField(block, vectors)
    logger.debug("motion field %s over %dx%d blocks", field.grid, block, block)
    return field, mc_apply(reference, field)


def mc_apply(reference: Frame, field: MotionField) -> Frame:
    """Motion-compensated frame assembled from displaced reference blocks."""
    expected = block_grid(reference.shape, field.block)
    if field.grid != expected:
        raise InputError(f"motion field grid {field.grid} does not cover a {expected} block grid")
    pad = SEARCH_RANGE + 1
    plane = half_pel_plane(reference.pixels, pad)
    height, width = reference.shape
    out = np.empty((height, width), dtype=np.uint8)
    block = field.block
    for r, y0 in enumerate(_block_starts(height, block)):
        for c, x0 in enumerate(_block_starts(width, block)):
            h, w = min(block, height - y0), min(block, width - x0)
            dx, dy = (int(v) for v in field.vectors[r, c])
            out[y0 : y0 + h, x0 : x0 + w] = _sample(plane, pad, y0, x0, h, w, dx, dy)
    return Frame(out)
