"""Fully convolutional next-frame generator.

The topology is the constant-resolution residual trunk of EDSR without the
upsampling tail: a head convolution lifts the N stacked input frames to
`channels` feature maps, `residual_blocks` blocks of conv-ReLU-conv are each
scaled and added back to their input, a global skip adds the head output to
the trunk output, and a tail convolution followed by tanh produces one frame
in [-1, 1]. Every convolution uses stride 1 and padding (k - 1) / 2, so the
output has the input's height and width.
"""

from dataclasses import dataclass

import numpy as np

from ..data.frames import Frame
from ..errors import ConfigurationError, DimensionError
from ..nn import ConvParams, Tensor, conv2d, parameter, relu, tanh


@dataclass(frozen=True)
class GeneratorConfig:
    input_frames: int = 8
    channels: int = 256
    residual_blocks: int = 32
    kernel: int = 3
    residual_scale: float = 0.1

    def __post_init__(self) -> None:
        for name in ("input_frames", "channels", "residual_blocks", "kernel"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"generator {name} must be positive")
        if self.kernel % 2 == 0:
            raise ConfigurationError(f"generator kernel must be odd, got {self.kernel}")
        if not 0.0 < self.residual_scale <= 1.0:
            raise ConfigurationError(
                f"residual_scale must be in (0, 1], got {self.residual_scale}"
            )

    @classmethod
    def desk(cls) -> "GeneratorConfig":
        return cls(input_frames=4, channels=16, residual_blocks=4)

    @property
    def padding(self) -> int:
        return (self.kernel - 1) // 2


@dataclass
class ResidualBlock:
    first: ConvParams
    second: ConvParams


@dataclass
class Generator:
    config: GeneratorConfig
    head: ConvParams
    blocks: list[ResidualBlock]
    tail: ConvParams

    def parameters(self) -> list[Tensor]:
        params = self.head.parameters()
        for block in self.blocks:
            params += block.first.parameters() + block.second.parameters()
        return params + self.tail.parameters()

    def __call__(self, frames: Tensor | np.ndarray) -> Tensor:
        return generator_forward(self, frames)


def parameter_count(cfg: GeneratorConfig) -> int:
    k2 = cfg.kernel * cfg.kernel
    head = cfg.input_frames * cfg.channels * k2 + cfg.channels
    block = 2 * (cfg.channels * cfg.channels * k2 + cfg.channels)
    tail = cfg.channels * k2 + 1
    return head + cfg.residual_blocks * block + tail


def init_conv(
    rng: np.random.Generator,
    in_channels: int,
    out_channels: int,
    kernel: int,
    padding: int,
    dtype: type = np.float32,
) -> ConvParams:
    """Fan-in scaled uniform weights, zero bias."""
    bound = np.sqrt(6.0 / (in_channels * kernel * kernel))
    weight = rng.uniform(-bound, bound, size=(out_channels, in_channels, kernel, kernel))
    return ConvParams(
        weight=parameter(weight.astype(dtype)),
        bias=parameter(np.zeros(out_channels, dtype=dtype)),
        stride=1,
        padding=padding,
    )


def build_generator(cfg: GeneratorConfig, seed: int, dtype: type = np.float32) -> Generator:
    rng = np.random.default_rng(seed)
    k, pad, ch = cfg.kernel, cfg.padding, cfg.channels
    head = init_conv(rng, cfg.input_frames, ch, k, pad, dtype)
    blocks = [
        ResidualBlock(
            first=init_conv(rng, ch, ch, k, pad, dtype),
            second=init_conv(rng, ch, ch, k, pad, dtype),
        )
        for _ in range(cfg.residual_blocks)
    ]
    tail = init_conv(rng, ch, 1, k, pad, dtype)
    return Generator(config=cfg, head=head, blocks=blocks, tail=tail)


def generator_forward(
    g: Generator,
    frames: Tensor | np.ndarray,
    residual_scale: float | None = None,
) -> Tensor:
    """Predict the next frame from N stacked frames normalized to [-1, 1].

    Accepts (N, H, W) or a batch (B, N, H, W); returns (1, H, W) or (B, 1, H, W).
    `residual_scale` overrides the configured block scaling.
    """
    x = frames if isinstance(frames, Tensor) else Tensor(frames)
    single = x.ndim == 3
    if single:
        x = x.reshape(1, *x.shape)
    if x.ndim != 4 or x.shape[1] != g.config.input_frames:
        raise DimensionError(
            f"generator expects {g.config.input_frames} input frames, got shape {frames.shape}"
        )
    scale = g.config.residual_scale if residual_scale is None else residual_scale

    head = conv2d(x, g.head)
    body = head
    for block in g.blocks:
        body = conv2d(relu(conv2d(body, block.first)), block.second) * scale + body
    out = tanh(conv2d(body + head, g.tail))
    if single:
        out = out.reshape(*out.shape[1:])
    return out


def to_uint8_frame(x: Tensor | np.ndarray) -> Frame:
    """Map a (1, H, W) or (H, W) output in [-1, 1] to pixels round((x + 1) * 127.5)."""
    values = x.data if isinstance(x, Tensor) else np.asarray(x)
    if values.ndim == 3:
        if values.shape[0] != 1:
            raise DimensionError(f"expected a single-channel frame, got {values.shape}")
        values = values[0]
    scaled = (np.clip(values, -1.0, 1.0).astype(np.float64) + 1.0) * 127.5
    # non-negative, so floor(v + 0.5) rounds half away from zero
    return Frame(np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8))
