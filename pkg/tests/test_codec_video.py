import numpy as np
import pytest
from lfpcodec.codec import decode_video, encode_video, stream_rate_report
from lfpcodec.codec.video import HEADER, decode_motion, encode_motion
from lfpcodec.data import Frame
from lfpcodec.errors import DecodeError, InputError, ModelError
from lfpcodec.nets import GeneratorConfig, build_generator
from lfpcodec.predictors import (
    FrameDifferencePredictor,
    LearnedPredictor,
    MotionCompensatedPredictor,
    MotionField,
)

TINY = GeneratorConfig(input_frames=2, channels=3, residual_blocks=1)


def _clip(count=12, shape=(32, 48), seed=0):
    rng = np.random.default_rng(seed)
    coarse = rng.integers(0, 256, (shape[0] // 4, (shape[1] + count) // 4 + 1))
    texture = np.kron(coarse, np.ones((4, 4))).astype(np.uint8)
    return [Frame(texture[:, t : t + shape[1]].copy()) for t in range(count)]


def _predictor(kind):
    if kind == "fd":
        return FrameDifferencePredictor()
    if kind == "mc":
        return MotionCompensatedPredictor(block=16, search_range=4)
    return LearnedPredictor(build_generator(TINY, seed=0))


@pytest.mark.parametrize("qp", [1, 25, 35])
@pytest.mark.parametrize("kind", ["fd", "mc", "lfp"])
def test_decoder_matches_encoder_reconstructions(kind, qp):
    predictor = _predictor(kind)
    result = encode_video(_clip(), predictor, qp, k=2)
    generator = predictor.generator if kind == "lfp" else None
    decoded = decode_video(result.bitstream, generator=generator)
    assert decoded == result.reconstructions
    assert len(decoded) == 12


@pytest.mark.parametrize("kind", ["fd", "mc", "lfp"])
def test_rate_accounting_is_exact(kind):
    result = encode_video(_clip(), _predictor(kind), 25, k=2)
    report = result.report
    assert report.header_bits == 8 * HEADER.size == 344
    assert report.total_bits == 8 * len(result.bitstream)
    assert report.total_bits == stream_rate_report(result.bitstream).total_bits
    assert len(report.per_frame_bits) == 12
    if kind == "mc":
        assert report.mv_bits > 0
        assert report.mv_vectors == 10 * 2 * 3
        assert report.mv_entropy_bits == pytest.approx(report.mv_entropy * 60)
    else:
        assert report.mv_bits == 0
        assert report.mv_entropy == 0.0
        assert report.mv_entropy_bits == 0.0


def test_low_qp_costs_more_bits():
    clip = _clip()
    fine = encode_video(clip, FrameDifferencePredictor(), 20, k=1).report.total_bits
    coarse = encode_video(clip, FrameDifferencePredictor(), 35, k=1).report.total_bits
    assert coarse < fine


def test_truncated_stream_names_the_last_frame():
    data = encode_video(_clip(), FrameDifferencePredictor(), 30, k=1).bitstream
    with pytest.raises(DecodeError) as info:
        decode_video(data[:-1])
    assert info.value.frame == 11


def test_unknown_chunk_type():
    data = bytearray(encode_video(_clip(), FrameDifferencePredictor(), 30, k=1).bitstream)
    data[HEADER.size] = 7
    with pytest.raises(DecodeError, match="chunk type") as info:
        decode_video(bytes(data))
    assert info.value.frame == 0


def test_trailing_bytes_rejected():
    data = encode_video(_clip(), FrameDifferencePredictor(), 30, k=1).bitstream
    with pytest.raises(DecodeError, match="trailing"):
        decode_video(data + b"\x00")


def test_bad_magic_rejected():
    data = encode_video(_clip(count=2), FrameDifferencePredictor(), 30, k=1).bitstream
    with pytest.raises(DecodeError, match="magic"):
        decode_video(b"XXXX" + data[4:])


def test_wrong_generator_is_refused():
    clip = _clip()
    data = encode_video(clip, LearnedPredictor(build_generator(TINY, seed=0)), 30, k=2).bitstream
    with pytest.raises(ModelError, match="digest mismatch"):
        decode_video(data, generator=build_generator(TINY, seed=1))
    other = GeneratorConfig(input_frames=2, channels=4, residual_blocks=1)
    with pytest.raises(ModelError, match="configuration"):
        decode_video(data, generator=build_generator(other, seed=0))
    with pytest.raises(ModelError, match="checkpoint"):
        decode_video(data)


def test_intra_only_stream_needs_no_generator():
    clip = _clip(count=3)
    result = encode_video(clip, LearnedPredictor(build_generator(TINY, seed=0)), 20, k=3)
    assert decode_video(result.bitstream) == result.reconstructions


def test_k_must_cover_the_predictor_history():
    predictor = LearnedPredictor(build_generator(TINY, seed=0))
    with pytest.raises(InputError, match="K=1"):
        encode_video(_clip(), predictor, 30, k=1)
    with pytest.raises(InputError):
        encode_video(_clip(count=3), FrameDifferencePredictor(), 30, k=4)


def test_mixed_frame_sizes_rejected():
    frames = _clip(count=2) + [Frame(np.zeros((16, 16), np.uint8))]
    with pytest.raises(InputError, match="frame 2"):
        encode_video(frames, FrameDifferencePredictor(), 30, k=1)


def test_motion_field_coding():
    zero = MotionField(16, np.zeros((1, 1, 2), np.int16))
    assert encode_motion(zero) == b"\x08\xe0"
    vectors = np.array([[[0, 0], [2, -1], [62, -62]], [[-3, 5], [1, 1], [0, 0]]])
    field = MotionField(16, vectors)
    decoded = decode_motion(encode_motion(field), (20, 33))
    np.testing.assert_array_equal(decoded.vectors, vectors)
    assert decoded.block == 16


def test_motion_field_needs_matching_grid():
    field = MotionField(16, np.zeros((1, 1, 2), np.int16))
    with pytest.raises(DecodeError):
        decode_motion(encode_motion(field), (32, 32))
