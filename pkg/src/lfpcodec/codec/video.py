"""Closed-loop predictive video coding.

The first K frames are intra coded. Every later frame is predicted from the
decoder-side reconstructions of its predecessors, the residual against the
original is coded, and the reconstruction clamp(prediction + decoded
residual) joins the history. Encoder and decoder run the same loop, so both
ends hold bit-identical reconstructions.

Container layout (little endian): a fixed header followed by one chunk per
frame, each chunk being ``u8 type, u32 mv_len, mv bytes, u32 len, payload``.
"""

import logging
import math
import struct
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction

import numpy as np

from ..data.frames import Frame, check_same_size
from ..errors import DecodeError, InputError, ModelError
from ..nets import Generator, checkpoint_digest, config_hash
from ..predictors import (
    LearnedPredictor,
    MotionCompensatedPredictor,
    MotionField,
    Predictor,
    PredictorKind,
    block_grid,
    compute_residual,
    make_predictor,
)
from .backend import BackendKind, CodecBackend
from .bits import BitReader, BitWriter

logger = logging.getLogger(__name__)

MAGIC = b"LFPV"
VERSION = 1
HEADER = struct.Struct("<4sHHHIIIHBBBQQ")
CHUNK_TYPE = struct.Struct("<B")
LENGTH = struct.Struct("<I")
CHUNK_OVERHEAD_BITS = 8 * (CHUNK_TYPE.size + 2 * LENGTH.size)
DEFAULT_K = 8
DEFAULT_FPS = 25

_PREDICTOR_IDS = {PredictorKind.FD: 0, PredictorKind.MC: 1, PredictorKind.LFP: 2}
_BACKEND_IDS = {BackendKind.INTERNAL: 0, BackendKind.EXTERNAL: 1}


class ChunkType(IntEnum):
    INTRA = 0
    RESIDUAL = 1


@dataclass
class BitstreamHeader:
    width: int
    height: int
    frame_count: int
    k: int
    predictor: PredictorKind
    qp: int
    fps: Fraction = Fraction(DEFAULT_FPS)
    backend: BackendKind = BackendKind.INTERNAL
    config_hash: int = 0
    digest: int = 0

    def __post_init__(self) -> None:
        if self.k < 1 or self.frame_count < self.k:
            raise InputError(
                f"need K >= 1 and at least K frames, got K={self.k} "
                f"with {self.frame_count} frames"
            )
        if self.fps <= 0:
            raise InputError(f"frame rate must be positive, got {self.fps}")

    def pack(self) -> bytes:
        return HEADER.pack(
            MAGIC,
            VERSION,
            self.width,
            self.height,
            self.frame_count,
            self.fps.numerator,
            self.fps.denominator,
            self.k,
            _PREDICTOR_IDS[self.predictor],
            self.qp,
            _BACKEND_IDS[self.backend],
            self.config_hash,
            self.digest,
        )

    @classmethod
    def unpack(cls, data: bytes) -> "BitstreamHeader":
        if len(data) < HEADER.size:
            raise DecodeError("bitstream header truncated")
        (magic, version, width, height, count, num, den, k, pid, qp, bid, chash, digest) = (
            HEADER.unpack_from(data)
        )
        if magic != MAGIC:
            raise DecodeError(f"not an LFPV bitstream (magic {magic!r})")
        if version != VERSION:
            raise DecodeError(f"unsupported bitstream version {version}")
        predictors = {v: k for k, v in _PREDICTOR_IDS.items()}
        backends = {v: k for k, v in _BACKEND_IDS.items()}
        if pid not in predictors or bid not in backends or den == 0:
            raise DecodeError("bitstream header has an unknown predictor or backend")
        try:
            return cls(
                width, height, count, k, predictors[pid], qp,
                Fraction(num, den), backends[bid], chash, digest,
            )  # fmt: skip
        except InputError as exc:
            raise DecodeError(str(exc)) from exc


@dataclass
class FrameChunk:
    kind: ChunkType
    payload: bytes
    motion: bytes = b""

    def __post_init__(self) -> None:
        if self.motion and self.kind is not ChunkType.RESIDUAL:
            raise InputError("only residual chunks carry motion vectors")

    def pack(self) -> bytes:
        return b"".join(
            [
                CHUNK_TYPE.pack(self.kind),
                LENGTH.pack(len(self.motion)),
                self.motion,
                LENGTH.pack(len(self.payload)),
                self.payload,
            ]
        )

    @property
    def bits(self) -> int:
        return CHUNK_OVERHEAD_BITS + 8 * (len(self.motion) + len(self.payload))


@dataclass
class Bitstream:
    header: BitstreamHeader
    chunks: list[FrameChunk] = field(default_factory=list)

    def to_bytes(self) -> bytes:
        return self.header.pack() + b"".join(chunk.pack() for chunk in self.chunks)

    @classmethod
    def from_bytes(cls, data: bytes) -> "Bitstream":
        header = BitstreamHeader.unpack(data)
        pos = HEADER.size
        chunks = []

        def take(size: int, index: int) -> bytes:
            nonlocal pos
            if pos + size > len(data):
                raise DecodeError("chunk truncated", frame=index)
            piece = data[pos : pos + size]
            pos += size
            return piece

        for index in range(header.frame_count):
            (kind,) = CHUNK_TYPE.unpack(take(CHUNK_TYPE.size, index))
            if kind not in (ChunkType.INTRA, ChunkType.RESIDUAL):
                raise DecodeError(f"unknown chunk type {kind}", frame=index)
            (mv_len,) = LENGTH.unpack(take(LENGTH.size, index))
            motion = take(mv_len, index)
            (length,) = LENGTH.unpack(take(LENGTH.size, index))
            payload = take(length, index)
            expected = ChunkType.INTRA if index < header.k else ChunkType.RESIDUAL
            if kind != expected:
                raise DecodeError(f"expected a {expected.name.lower()} chunk", frame=index)
            if motion and (kind != ChunkType.RESIDUAL or header.predictor is not PredictorKind.MC):
                raise DecodeError("motion vectors in a stream without motion", frame=index)
            chunks.append(FrameChunk(ChunkType(kind), payload, motion))
        if pos != len(data):
            raise DecodeError(f"{len(data) - pos} trailing bytes after the last frame")
        return cls(header, chunks)


def encode_motion(motion: MotionField) -> bytes:
    """Block size, then each vector minus its raster predecessor."""
    writer = BitWriter()
    writer.write_ue(motion.block)
    prev_dx = prev_dy = 0
    for dx, dy in motion.raster():
        writer.write_se(dx - prev_dx)
        writer.write_se(dy - prev_dy)
        prev_dx, prev_dy = dx, dy
    return writer.getvalue()


def decode_motion(data: bytes, shape: tuple[int, int]) -> MotionField:
    reader = BitReader(data)
    block = reader.read_ue()
    if block < 1:
        raise DecodeError("motion field block size is zero")
    rows, cols = block_grid(shape, block)
    vectors = np.zeros((rows * cols, 2), dtype=np.int64)
    dx = dy = 0
    for i in range(rows * cols):
        dx += reader.read_se()
        dy += reader.read_se()
        vectors[i] = dx, dy
    if not reader.padding_only():
        raise DecodeError("trailing data after the motion field")
    try:
        return MotionField(block, vectors.reshape(rows, cols, 2))
    except InputError as exc:
        raise DecodeError(str(exc)) from exc


@dataclass
class FrameBits:
    index: int
    kind: ChunkType
    mv_bits: int
    residual_bits: int
    chunk_bits: int


@dataclass
class RateReport:
    header_bits: int
    frames: list[FrameBits]
    frame_count: int
    fps: Fraction
    mv_vectors: int = 0
    mv_entropy: float = 0.0  # bits per vector, zeroth order

    @property
    def total_bits(self) -> int:
        return self.header_bits + sum(f.chunk_bits for f in self.frames)

    @property
    def mv_bits(self) -> int:
        return sum(f.mv_bits for f in self.frames)

    @property
    def residual_bits(self) -> int:
        return sum(f.residual_bits for f in self.frames)

    @property
    def per_frame_bits(self) -> list[int]:
        return [f.chunk_bits for f in self.frames]

    @property
    def mv_entropy_bits(self) -> float:
        """Entropy estimate of the motion vector rate for the whole stream."""
        return self.mv_entropy * self.mv_vectors


@dataclass
class EncodeResult:
    bitstream: bytes
    reconstructions: list[Frame]
    report: RateReport


def _fps(value: float | Fraction | int) -> Fraction:
    fps = Fraction(value).limit_denominator(1001)
    if fps <= 0:
        raise InputError(f"frame rate must be positive, got {value}")
    return fps


def _check_k(k: int, predictor: Predictor, frame_count: int) -> None:
    needed = max(1, predictor.history)
    if k < needed:
        raise InputError(f"K={k} is below the {needed} frames the {predictor.kind} predictor needs")
    if frame_count < k:
        raise InputError(f"{frame_count} frames cannot cover {k} intra frames")
    if k > 0xFFFF:
        raise InputError(f"K={k} does not fit the bitstream header")


def _reconstruct(prediction: Frame, decoded: np.ndarray) -> Frame:
    values = prediction.pixels.astype(np.int16) + decoded
    return Frame(np.clip(values, 0, 255).astype(np.uint8))


def encode_video(
    frames: Sequence[Frame],
    predictor: Predictor,
    qp: int,
    k: int = DEFAULT_K,
    backend: CodecBackend | None = None,
    fps: float | Fraction = DEFAULT_FPS,
) -> EncodeResult:
    """Code `frames`; returns the stream, the in-loop reconstructions and the rates."""
    backend = backend or CodecBackend()
    if not frames:
        raise InputError("no frames to encode")
    for index, frame in enumerate(frames):
        if frame.shape != frames[0].shape:
            raise InputError(f"frame {index} is {frame.shape}, expected {frames[0].shape}")
    _check_k(k, predictor, len(frames))

    chash = digest = 0
    if isinstance(predictor, LearnedPredictor):
        chash = config_hash(predictor.generator.config)
        digest = checkpoint_digest(predictor.generator)
    height, width = frames[0].shape
    header = BitstreamHeader(
        width, height, len(frames), k, PredictorKind(predictor.kind), qp,
        _fps(fps), backend.kind, chash, digest,
    )  # fmt: skip
    stream = Bitstream(header)
    recon: list[Frame] = []

    for t, original in enumerate(frames):
        if t < k:
            payload = backend.encode_intra(original, qp)
            recon.append(backend.decode_intra(payload))
            stream.chunks.append(FrameChunk(ChunkType.INTRA, payload))
        else:
            history = recon[t - predictor.history : t]
            prediction = predictor.predict(history, original)
            payload = backend.encode_residual(compute_residual(original, prediction.frame), qp)
            decoded = backend.decode_residual(payload)
            recon.append(_reconstruct(prediction.frame, decoded.values))
            motion = b"" if prediction.motion is None else encode_motion(prediction.motion)
            stream.chunks.append(FrameChunk(ChunkType.RESIDUAL, payload, motion))
        logger.debug("frame %d coded in %d bits", t, stream.chunks[-1].bits)

    data = stream.to_bytes()
    return EncodeResult(data, recon, _report(stream))


def _predictor_for(header: BitstreamHeader, generator: Generator | None) -> Predictor:
    if header.predictor is not PredictorKind.LFP:
        return make_predictor(header.predictor)
    if generator is None:
        raise ModelError("stream needs the generator checkpoint it was encoded with")
    if config_hash(generator.config) != header.config_hash:
        raise ModelError("digest mismatch: generator configuration differs from the stream")
    if checkpoint_digest(generator) != header.digest:
        raise ModelError("digest mismatch")
    return LearnedPredictor(generator)


def decode_video(
    bitstream: bytes,
    generator: Generator | None = None,
    backend: CodecBackend | None = None,
) -> list[Frame]:
    """Reproduce the encoder's reconstructions from the stream alone."""
    stream = Bitstream.from_bytes(bitstream)
    header = stream.header
    if backend is None or backend.kind is not header.backend:
        backend = CodecBackend.resolve(header.backend, verify=False)
    # an intra-only stream needs no predictor
    predictor = _predictor_for(header, generator) if header.frame_count > header.k else None
    if predictor is not None and header.k < max(1, predictor.history):
        raise DecodeError(f"K={header.k} is below the predictor history {predictor.history}")

    recon: list[Frame] = []
    for t, chunk in enumerate(stream.chunks):
        try:
            if chunk.kind is ChunkType.INTRA:
                frame = backend.decode_intra(chunk.payload)
            else:
                motion = None
                if header.predictor is PredictorKind.MC:
                    if not chunk.motion:
                        raise DecodeError("motion compensated frame carries no motion field")
                    motion = decode_motion(chunk.motion, (header.height, header.width))
                    predictor = MotionCompensatedPredictor(block=motion.block)
                predicted = predictor.reconstruct(recon[t - predictor.history : t], motion)
                decoded = backend.decode_residual(chunk.payload)
                if decoded.shape != predicted.shape:
                    raise DecodeError(f"residual is {decoded.shape}, frame is {predicted.shape}")
                frame = _reconstruct(predicted, decoded.values)
        except DecodeError as exc:
            if exc.frame is not None:
                raise
            raise DecodeError(str(exc), frame=t) from exc
        if frame.shape != (header.height, header.width):
            raise DecodeError(f"decoded size {frame.shape} differs from the header", frame=t)
        recon.append(frame)
    check_same_size(recon)
    return recon


def _report(stream: Bitstream) -> RateReport:
    header = stream.header
    vectors: Counter[tuple[int, int]] = Counter()
    rows = []
    for index, chunk in enumerate(stream.chunks):
        if chunk.motion:
            field = decode_motion(chunk.motion, (header.height, header.width))
            vectors.update(field.raster())
        rows.append(
            FrameBits(index, chunk.kind, 8 * len(chunk.motion), 8 * len(chunk.payload), chunk.bits)
        )
    count = sum(vectors.values())
    entropy = 0.0
    if count:
        entropy = max(0.0, -sum(n / count * math.log2(n / count) for n in vectors.values()))
    return RateReport(
        header_bits=8 * HEADER.size,
        frames=rows,
        frame_count=header.frame_count,
        fps=header.fps,
        mv_vectors=count,
        mv_entropy=entropy,
    )


def stream_rate_report(bitstream: bytes) -> RateReport:
    """Exact bit accounting of a stream, motion vectors split from residuals."""
    return _report(Bitstream.from_bytes(bitstream))
