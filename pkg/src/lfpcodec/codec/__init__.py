from .backend import BackendKind, CodecBackend
from .external import ExternalCommands, map_residual, unmap_residual
from .residual import (
    QP_MAX,
    QP_MIN,
    ResidualImage,
    decode_intra,
    decode_residual,
    encode_intra,
    encode_residual,
    qstep,
)
from .video import (
    Bitstream,
    BitstreamHeader,
    EncodeResult,
    FrameChunk,
    RateReport,
    decode_video,
    encode_video,
    stream_rate_report,
)

__all__ = [
    "QP_MAX",
    "QP_MIN",
    "BackendKind",
    "Bitstream",
    "BitstreamHeader",
    "CodecBackend",
    "EncodeResult",
    "ExternalCommands",
    "FrameChunk",
    "RateReport",
    "ResidualImage",
    "decode_intra",
    "decode_residual",
    "decode_video",
    "encode_intra",
    "encode_residual",
    "encode_video",
    "map_residual",
    "qstep",
    "stream_rate_report",
    "unmap_residual",
]
