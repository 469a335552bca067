import numpy as np
import pytest
from lfpcodec.codec import CodecBackend
from lfpcodec.data import Frame
from lfpcodec.errors import InputError
from lfpcodec.evaluation import DEFAULT_QPS, rd_point, rd_sweep
from lfpcodec.predictors import FrameDifferencePredictor


def _clip(count=6, shape=(24, 32)):
    rng = np.random.default_rng(0)
    coarse = rng.integers(0, 256, (shape[0] // 4, (shape[1] + count) // 4 + 1))
    texture = np.kron(coarse, np.ones((4, 4))).astype(np.uint8)
    return [Frame(texture[:, t : t + shape[1]].copy()) for t in range(count)]


def test_default_qps():
    assert DEFAULT_QPS == tuple(range(25, 36))


def test_sweep_covers_every_qp():
    curve = rd_sweep(_clip(), FrameDifferencePredictor(), k=1, label="fd")
    assert curve.label == "fd"
    assert [p.qp for p in curve.points] == list(range(25, 36))
    by_qp = {p.qp: p for p in curve.points}
    assert by_qp[35].bitrate < by_qp[25].bitrate
    assert by_qp[35].psnr < by_qp[25].psnr


def test_threads_do_not_change_results():
    clip = _clip()
    one = rd_sweep(clip, FrameDifferencePredictor(), [25, 30, 35], k=1, threads=1)
    two = rd_sweep(clip, FrameDifferencePredictor(), [35, 25, 30], k=1, threads=2)
    assert one.points == two.points


def test_single_point_matches_sweep():
    clip = _clip()
    point = rd_point(clip, FrameDifferencePredictor(), 30, CodecBackend(), k=1)
    curve = rd_sweep(clip, FrameDifferencePredictor(), [30], k=1)
    assert curve.points == [point]


def test_bad_qp_fails_the_sweep():
    with pytest.raises(InputError, match="QP"):
        rd_sweep(_clip(), FrameDifferencePredictor(), [30, 60], k=1)


def test_static_clip_keeps_one_point_per_bitrate(caplog):
    still = [Frame(np.full((16, 16), 128, np.uint8)) for _ in range(4)]
    with caplog.at_level("WARNING", logger="lfpcodec.evaluation.sweep"):
        curve = rd_sweep(still, FrameDifferencePredictor(), [25, 30], k=1)
    assert [p.qp for p in curve.points] == [25]
    assert "qp 30 repeats" in caplog.text
