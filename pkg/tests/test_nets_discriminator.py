import numpy as np
import pytest
from lfpcodec.errors import ConfigurationError, DimensionError
from lfpcodec.nets import DiscriminatorConfig, build_discriminator, discriminator_forward
from lfpcodec.nn import Tensor, avg_pool2d, conv2d, leaky_relu

SMALL = DiscriminatorConfig(input_frames=3, patch_size=18, kernel=3, channels=(4, 4))


def test_default_plan_reduces_48_to_one():
    cfg = DiscriminatorConfig()
    assert (cfg.input_frames, cfg.patch_size, cfg.kernel, cfg.channels) == (9, 48, 7, (64, 128))
    assert cfg.spatial_trace() == [48, 42, 21, 15, 7, 1]


def test_layer_shapes_follow_the_trace():
    d = build_discriminator(DiscriminatorConfig.desk(), seed=0)
    x = Tensor(np.zeros((1, 9, 48, 48), np.float32))
    first, second, last = d.convs
    x = conv2d(x, first)
    assert x.shape[2:] == (42, 42)
    x = avg_pool2d(leaky_relu(x))
    assert x.shape[2:] == (21, 21)
    x = conv2d(x, second)
    assert x.shape[2:] == (15, 15)
    x = avg_pool2d(leaky_relu(x))
    assert x.shape[2:] == (7, 7)
    assert conv2d(x, last).shape == (1, 1, 1, 1)


def test_patch_size_that_does_not_reduce_to_one_is_rejected():
    with pytest.raises(ConfigurationError):
        DiscriminatorConfig(patch_size=64)


def test_zero_parameters_give_one_half():
    d = build_discriminator(SMALL, seed=0)
    for p in d.parameters():
        p.data[...] = 0
    out = d(np.random.default_rng(0).uniform(-1, 1, (3, 18, 18)).astype(np.float32))
    assert out.shape == ()
    assert out.item() == 0.5


def test_output_is_a_probability():
    d = build_discriminator(DiscriminatorConfig.desk(), seed=1)
    x = np.random.default_rng(1).uniform(-1, 1, (4, 9, 48, 48)).astype(np.float32)
    out = d(x)
    assert out.shape == (4,)
    assert np.all((out.data > 0) & (out.data < 1))


def test_same_seed_gives_identical_parameters():
    a, b = build_discriminator(SMALL, seed=5), build_discriminator(SMALL, seed=5)
    for pa, pb in zip(a.parameters(), b.parameters()):
        np.testing.assert_array_equal(pa.data, pb.data)


@pytest.mark.parametrize("shape", [(9, 64, 64), (8, 48, 48), (9, 48, 47)])
def test_wrong_input_shape_rejected(shape):
    d = build_discriminator(DiscriminatorConfig.desk(), seed=0)
    with pytest.raises(DimensionError):
        discriminator_forward(d, np.zeros(shape, np.float32))
