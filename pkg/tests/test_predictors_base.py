import numpy as np
import pytest
from lfpcodec.data import Frame
from lfpcodec.errors import ConfigurationError, DimensionError, UsageError
from lfpcodec.nets import GeneratorConfig, build_generator
from lfpcodec.predictors import (
    FrameDifferencePredictor,
    LearnedPredictor,
    MotionCompensatedPredictor,
    PredictorKind,
    check_history,
    compute_residual,
    fd_predict,
    lfp_predict,
    make_predictor,
    residual_preview,
)

TINY = GeneratorConfig(input_frames=2, channels=3, residual_blocks=1)


def _frame(value, shape=(8, 12)):
    return Frame(np.full(shape, value, np.uint8))


def _zero_generator():
    g = build_generator(TINY, seed=0)
    for p in g.parameters():
        p.data[...] = 0
    return g


def test_check_history_length_and_sizes():
    check_history([_frame(1), _frame(2)], 2)
    with pytest.raises(UsageError, match="exactly 2"):
        check_history([_frame(1)], 2)
    with pytest.raises(DimensionError):
        check_history([_frame(1), _frame(2, (8, 13))], 2)


def test_residual_spans_the_full_range():
    residual = compute_residual(_frame(255, (2, 2)), _frame(0, (2, 2)))
    assert residual.dtype == np.int16
    assert (residual == 255).all()
    assert (compute_residual(_frame(0, (2, 2)), _frame(255, (2, 2))) == -255).all()
    with pytest.raises(DimensionError):
        compute_residual(_frame(0, (2, 2)), _frame(0, (2, 3)))


def test_residual_preview_mapping():
    preview = residual_preview(np.array([[0, -200, 100, 300]], np.int16))
    np.testing.assert_array_equal(preview.pixels, [[128, 0, 228, 255]])
    half = residual_preview(np.array([[100, -3]], np.int16), scale=0.5)
    np.testing.assert_array_equal(half.pixels, [[178, 127]])


def test_frame_difference_predicts_the_previous_frame():
    prev, target = _frame(40), _frame(90)
    predictor = FrameDifferencePredictor()
    prediction = predictor.predict([prev], target)
    assert prediction.frame == prev and prediction.motion is None
    assert predictor.reconstruct([prev], None) == prev
    assert fd_predict(prev) is prev
    assert predictor.kind is PredictorKind.FD and predictor.history == 1


def test_zero_generator_predicts_mid_grey():
    history = [_frame(10), _frame(200)]
    out = lfp_predict(_zero_generator(), history)
    assert out.shape == (8, 12)
    assert (out.pixels == 128).all()


def test_learned_predictor_is_the_same_on_both_sides():
    g = build_generator(TINY, seed=4)
    rng = np.random.default_rng(0)
    history = [Frame(rng.integers(0, 256, (10, 14), dtype=np.uint8)) for _ in range(2)]
    predictor = LearnedPredictor(g)
    encoded = predictor.predict(history, history[-1])
    assert encoded.motion is None
    assert predictor.reconstruct(history, None) == encoded.frame
    assert predictor.history == 2


def test_learned_predictor_rejects_wrong_history():
    with pytest.raises(UsageError):
        lfp_predict(_zero_generator(), [_frame(1)])


def test_make_predictor():
    assert isinstance(make_predictor("fd"), FrameDifferencePredictor)
    mc = make_predictor(PredictorKind.MC, block=8, search_range=4)
    assert isinstance(mc, MotionCompensatedPredictor)
    assert (mc.block, mc.search_range) == (8, 4)
    assert isinstance(make_predictor("lfp", _zero_generator()), LearnedPredictor)
    with pytest.raises(ConfigurationError):
        make_predictor("lfp")
    with pytest.raises(ValueError):
        make_predictor("bogus")
