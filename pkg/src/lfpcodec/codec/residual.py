"""Internal still-image codec for residuals and intra frames.

Images are edge-padded to a multiple of 8, split into 8x8 blocks and each
block is transformed with an orthonormal 2-D DCT-II. Coefficients are
quantized with Qstep = 2 ** ((QP - 4) / 6), scanned in zigzag order and
written as exp-Golomb symbols: se(level) followed by ue(zero run) for every
nonzero coefficient, and se(0) as the end-of-block marker.
"""

import logging
import struct
from dataclasses import dataclass

import numpy as np
from scipy.fft import dctn, idctn

from ..data.frames import Frame
from ..errors import DecodeError, DimensionError, InputError
from .bits import BitReader, BitWriter

logger = logging.getLogger(__name__)

MAGIC = b"LFPR"
VERSION = 1
HEADER = struct.Struct("<4sHHHBB")
FLAG_INTRA = 0x01
FLAG_EXTERNAL = 0x02

BLOCK = 8
QP_MIN, QP_MAX = 1, 51
RESIDUAL_LIMIT = 255
INTRA_SHIFT = 128

ZIGZAG = np.array(
    [
        0, 1, 8, 16, 9, 2, 3, 10,
        17, 24, 32, 25, 18, 11, 4, 5,
        12, 19, 26, 33, 40, 48, 41, 34,
        27, 20, 13, 6, 7, 14, 21, 28,
        35, 42, 49, 56, 57, 50, 43, 36,
        29, 22, 15, 23, 30, 37, 44, 51,
        58, 59, 52, 45, 38, 31, 39, 46,
        53, 60, 61, 54, 47, 55, 62, 63,
    ],
    dtype=np.intp,
)  # fmt: skip


@dataclass(eq=False)
class ResidualImage:
    values: np.ndarray  # (height, width) int16 in [-255, 255]

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.ndim != 2 or values.size == 0:
            raise DimensionError(f"residual must be a non-empty 2-D array, got {values.shape}")
        if values.size and int(np.abs(values.astype(np.int64)).max()) > RESIDUAL_LIMIT:
            raise InputError(f"residual values must lie in [-{RESIDUAL_LIMIT}, {RESIDUAL_LIMIT}]")
        self.values = values.astype(np.int16)

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResidualImage):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None  # type: ignore[assignment]


@dataclass
class StreamHeader:
    width: int
    height: int
    qp: int
    flags: int

    @property
    def intra(self) -> bool:
        return bool(self.flags & FLAG_INTRA)

    @property
    def external(self) -> bool:
        return bool(self.flags & FLAG_EXTERNAL)

    def pack(self) -> bytes:
        return HEADER.pack(MAGIC, VERSION, self.width, self.height, self.qp, self.flags)

    @classmethod
    def unpack(cls, data: bytes) -> "StreamHeader":
        if len(data) < HEADER.size:
            raise DecodeError("residual stream header truncated")
        magic, version, width, height, qp, flags = HEADER.unpack_from(data)
        if magic != MAGIC:
            raise DecodeError(f"not a residual stream (magic {magic!r})")
        if version != VERSION:
            raise DecodeError(f"unsupported residual stream version {version}")
        if width < 1 or height < 1 or not QP_MIN <= qp <= QP_MAX:
            raise DecodeError(f"invalid residual stream header {width}x{height} qp {qp}")
        return cls(width, height, qp, flags)


def check_qp(qp: int) -> int:
    if not QP_MIN <= qp <= QP_MAX:
        raise InputError(f"QP must be within [{QP_MIN}, {QP_MAX}], got {qp}")
    return qp


def qstep(qp: int) -> float:
    return 2.0 ** ((qp - 4) / 6.0)


def quantize(coefficients: np.ndarray, step: float) -> np.ndarray:
    """Uniform quantizer, rounding half away from zero."""
    return (np.sign(coefficients) * np.floor(np.abs(coefficients) / step + 0.5)).astype(
        np.int64
    )


def dequantize(levels: np.ndarray, step: float) -> np.ndarray:
    return levels.astype(np.float64) * step


def _to_blocks(values: np.ndarray) -> np.ndarray:
    height, width = values.shape
    pad_h, pad_w = -height % BLOCK, -width % BLOCK
    padded = np.pad(values.astype(np.float64), ((0, pad_h), (0, pad_w)), mode="edge")
    rows, cols = padded.shape[0] // BLOCK, padded.shape[1] // BLOCK
    return padded.reshape(rows, BLOCK, cols, BLOCK).transpose(0, 2, 1, 3)


def _from_blocks(blocks: np.ndarray, height: int, width: int) -> np.ndarray:
    rows, cols = blocks.shape[:2]
    plane = blocks.transpose(0, 2, 1, 3).reshape(rows * BLOCK, cols * BLOCK)
    return plane[:height, :width]


def transform(values: np.ndarray) -> np.ndarray:
    """Per-block DCT coefficients, shape (rows, cols, 8, 8)."""
    return dctn(_to_blocks(values), type=2, axes=(2, 3), norm="ortho")


def inverse_transform(coefficients: np.ndarray, height: int, width: int) -> np.ndarray:
    return _from_blocks(idctn(coefficients, type=2, axes=(2, 3), norm="ortho"), height, width)


def _write_block(writer: BitWriter, scanned: np.ndarray) -> None:
    run = 0
    for level in scanned:
        if level == 0:
            run += 1
            continue
        writer.write_se(int(level))
        writer.write_ue(run)
        run = 0
    writer.write_se(0)


def _read_block(reader: BitReader) -> np.ndarray:
    scanned = np.zeros(BLOCK * BLOCK, dtype=np.int64)
    pos = 0
    while True:
        level = reader.read_se()
        if level == 0:
            return scanned
        pos += reader.read_ue()
        if pos >= scanned.size:
            raise DecodeError("coefficient run past the end of the block")
        scanned[pos] = level
        pos += 1


def encode_levels(levels: np.ndarray) -> bytes:
    writer = BitWriter()
    rows, cols = levels.shape[:2]
    for r in range(rows):
        for c in range(cols):
            _write_block(writer, levels[r, c].reshape(-1)[ZIGZAG])
    return writer.getvalue()


def decode_levels(payload: bytes, height: int, width: int) -> np.ndarray:
    rows, cols = -(-height // BLOCK), -(-width // BLOCK)
    levels = np.zeros((rows, cols, BLOCK * BLOCK), dtype=np.int64)
    reader = BitReader(payload)
    for r in range(rows):
        for c in range(cols):
            levels[r, c, ZIGZAG] = _read_block(reader)
    if not reader.padding_only():
        raise DecodeError("trailing data after the last block")
    return levels.reshape(rows, cols, BLOCK, BLOCK)


def _encode_plane(values: np.ndarray, qp: int, flags: int) -> bytes:
    check_qp(qp)
    height, width = values.shape
    if height > 0xFFFF or width > 0xFFFF:
        raise DimensionError(f"image {width}x{height} too large for the stream header")
    levels = quantize(transform(values), qstep(qp))
    payload = encode_levels(levels)
    logger.debug("coded %dx%d plane at qp %d in %d bytes", width, height, qp, len(payload))
    return StreamHeader(width, height, qp, flags).pack() + payload


def _decode_plane(data: bytes) -> tuple[StreamHeader, np.ndarray]:
    header = StreamHeader.unpack(data)
    if header.external:
        raise DecodeError("stream was produced by the external codec")
    levels = decode_levels(data[HEADER.size :], header.height, header.width)
    values = inverse_transform(dequantize(levels, qstep(header.qp)), header.height, header.width)
    return header, np.floor(values + 0.5)


def encode_residual(residual: ResidualImage | np.ndarray, qp: int) -> bytes:
    r = residual if isinstance(residual, ResidualImage) else ResidualImage(residual)
    return _encode_plane(r.values, qp, 0)


def decode_residual(data: bytes) -> ResidualImage:
    _, values = _decode_plane(data)
    return ResidualImage(np.clip(values, -RESIDUAL_LIMIT, RESIDUAL_LIMIT))


def encode_intra(frame: Frame, qp: int) -> bytes:
    return _encode_plane(frame.pixels.astype(np.int16) - INTRA_SHIFT, qp, FLAG_INTRA)


def decode_intra(data: bytes) -> Frame:
    header, values = _decode_plane(data)
    if not header.intra:
        raise DecodeError("stream holds a residual, not an intra frame")
    return Frame(np.clip(values + INTRA_SHIFT, 0, 255).astype(np.uint8))
