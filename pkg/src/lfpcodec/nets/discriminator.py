from dataclasses import dataclass

import numpy as np

from ..errors import ConfigurationError, DimensionError
from ..nn import ConvParams, Tensor, avg_pool2d, conv2d, leaky_relu, sigmoid
from .generator import init_conv

LEAKY_SLOPE = 0.2


@dataclass(frozen=True)
class DiscriminatorConfig:
    input_frames: int = 9
    patch_size: int = 48
    kernel: int = 7
    channels: tuple[int, int] = (64, 128)

    def __post_init__(self) -> None:
        if min(self.input_frames, self.patch_size, self.kernel, *self.channels) < 1:
            raise ConfigurationError("discriminator sizes must be positive")
        trace = self.spatial_trace()
        if min(trace) < 1 or trace[-1] != 1:
            raise ConfigurationError(
                f"patch size {self.patch_size} with kernel {self.kernel} does not reduce "
                f"to a single output (trace {trace})"
            )

    @classmethod
    def desk(cls) -> "DiscriminatorConfig":
        return cls(channels=(8, 16))

    def spatial_trace(self) -> list[int]:
        """Side length after each conv / pool stage, input first."""
        k = self.kernel
        sizes = [self.patch_size]
        for stage in ("conv", "pool", "conv", "pool", "conv"):
            side = sizes[-1]
            sizes.append(side - k + 1 if stage == "conv" else (side - 2) // 2 + 1)
            if sizes[-1] < 1:
                break
        return sizes


@dataclass
class Discriminator:
    config: DiscriminatorConfig
    convs: list[ConvParams]

    def parameters(self) -> list[Tensor]:
        return [p for conv in self.convs for p in conv.parameters()]

    def __call__(self, sequence: Tensor | np.ndarray) -> Tensor:
        return discriminator_forward(self, sequence)


def build_discriminator(
    cfg: DiscriminatorConfig, seed: int, dtype: type = np.float32
) -> Discriminator:
    rng = np.random.default_rng(seed)
    c1, c2 = cfg.channels
    plan = [(cfg.input_frames, c1), (c1, c2), (c2, 1)]
    convs = [init_conv(rng, cin, cout, cfg.kernel, 0, dtype) for cin, cout in plan]
    return Discriminator(config=cfg, convs=convs)


def discriminator_forward(d: Discriminator, sequence: Tensor | np.ndarray) -> Tensor:
    """Probability that each stacked patch sequence is real.

    Accepts (9, P, P) and returns a scalar tensor, or (B, 9, P, P) and
    returns shape (B,).
    """
    x = sequence if isinstance(sequence, Tensor) else Tensor(sequence)
    cfg = d.config
    single = x.ndim == 3
    if single:
        x = x.reshape(1, *x.shape)
    expected = (cfg.input_frames, cfg.patch_size, cfg.patch_size)
    if x.ndim != 4 or x.shape[1:] != expected:
        raise DimensionError(f"discriminator expects (B, {expected}) input, got {sequence.shape}")

    first, second, last = d.convs
    x = avg_pool2d(leaky_relu(conv2d(x, first), LEAKY_SLOPE))
    x = avg_pool2d(leaky_relu(conv2d(x, second), LEAKY_SLOPE))
    out = sigmoid(conv2d(x, last))
    return out.reshape() if single else out.reshape(out.shape[0])
