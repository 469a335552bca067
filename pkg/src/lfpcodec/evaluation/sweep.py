import asyncio
import logging
from collections.abc import Sequence
from fractions import Fraction

from ..codec import CodecBackend, decode_video, encode_video
from ..codec.video import DEFAULT_FPS, DEFAULT_K
from ..data.frames import Frame
from ..errors import LfpError
from ..jobs import SweepManager
from ..predictors import LearnedPredictor, Predictor
from .bd import RDCurve, RDPoint
from .metrics import bitrate, mean_psnr, psnr

logger = logging.getLogger(__name__)

DEFAULT_QPS = tuple(range(25, 36))


def rd_point(
    frames: Sequence[Frame],
    predictor: Predictor,
    qp: int,
    backend: CodecBackend,
    k: int = DEFAULT_K,
    fps: float | Fraction = DEFAULT_FPS,
) -> RDPoint:
    """Encode, decode and measure one QP."""
    result = encode_video(frames, predictor, qp, k, backend, fps)
    generator = predictor.generator if isinstance(predictor, LearnedPredictor) else None
    decoded = decode_video(result.bitstream, generator, backend)
    if decoded != result.reconstructions:
        raise LfpError(f"decoder drifted from the encoder at qp {qp}")
    quality = mean_psnr([psnr(a, b) for a, b in zip(frames, decoded)])
    rate = bitrate(result.report.per_frame_bits, float(result.report.fps))
    logger.info("qp %d: %.3f kbit/s, %.3f dB", qp, rate, quality)
    return RDPoint(bitrate=rate, psnr=quality, qp=qp)


def rd_sweep(
    frames: Sequence[Frame],
    predictor: Predictor,
    qp_list: Sequence[int] = DEFAULT_QPS,
    backend: CodecBackend | None = None,
    k: int = DEFAULT_K,
    fps: float | Fraction = DEFAULT_FPS,
    threads: int = 1,
    label: str | None = None,
) -> RDCurve:
    """One RD point per QP, ordered by QP.

    QPs whose stream costs exactly the bitrate of a lower QP add nothing to the
    curve and are dropped with a warning; the lowest such QP is kept.
    """
    backend = backend or CodecBackend()
    manager = SweepManager(threads)
    points = asyncio.run(
        manager.run(qp_list, lambda qp: rd_point(frames, predictor, qp, backend, k, fps))
    )
    kept: dict[float, RDPoint] = {}
    for point in points:
        if point.bitrate in kept:
            logger.warning(
                "qp %d repeats the %.3f kbit/s of qp %d, dropped",
                point.qp,
                point.bitrate,
                kept[point.bitrate].qp,
            )
            continue
        kept[point.bitrate] = point
    return RDCurve(label or str(predictor.kind), list(kept.values()))
