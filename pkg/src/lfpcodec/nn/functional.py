"""Differentiable layers: convolution, affine maps, activations, pooling, losses."""

from dataclasses import dataclass
from enum import StrEnum

import numpy as np
from scipy.special import expit

from ..errors import DimensionError, UsageError
from .tensor import Function, Tensor

BCE_EPS = 1e-7


@dataclass
class ConvParams:
    weight: Tensor  # (out_channels, in_channels, k, k)
    bias: Tensor  # (out_channels,)
    stride: int = 1
    padding: int = 0

    def __post_init__(self) -> None:
        if self.weight.ndim != 4 or self.weight.shape[2] != self.weight.shape[3]:
            raise DimensionError(f"conv weight must be (o, c, k, k), got {self.weight.shape}")
        if self.weight.shape[2] < 1:
            raise DimensionError("conv kernel side must be >= 1")
        if self.bias.shape != (self.weight.shape[0],):
            raise DimensionError(
                f"conv bias {self.bias.shape} does not match {self.weight.shape[0]} outputs"
            )
        if self.stride < 1 or self.padding < 0:
            raise DimensionError(f"invalid stride {self.stride} / padding {self.padding}")

    @property
    def in_channels(self) -> int:
        return self.weight.shape[1]

    @property
    def out_channels(self) -> int:
        return self.weight.shape[0]

    @property
    def kernel(self) -> int:
        return self.weight.shape[2]

    def parameters(self) -> list[Tensor]:
        return [self.weight, self.bias]


@dataclass
class LinearParams:
    weight: Tensor  # (m outputs, n inputs)
    bias: Tensor  # (m,)

    def __post_init__(self) -> None:
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise DimensionError(
                f"linear weight {self.weight.shape} and bias {self.bias.shape} disagree"
            )

    def parameters(self) -> list[Tensor]:
        return [self.weight, self.bias]


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    span = size + 2 * padding - kernel
    if span < 0:
        raise DimensionError(
            f"input side {size} (padding {padding}) is smaller than kernel {kernel}"
        )
    return span // stride + 1


def _window(start: int, count: int, stride: int) -> slice:
    return slice(start, start + stride * (count - 1) + 1, stride)


class Conv2d(Function):
    # Kernel offsets are visited in row-major order so sums are reproducible.

    def forward(
        self, x: np.ndarray, w: np.ndarray, b: np.ndarray, stride: int, padding: int
    ) -> np.ndarray:
        if x.ndim != 4:
            raise DimensionError(f"conv2d expects (n, c, h, w) input, got {x.shape}")
        n, c, h, wd = x.shape
        out_c, in_c, k, _ = w.shape
        if c != in_c:
            raise DimensionError(f"conv2d: input has {c} channels, kernel expects {in_c}")
        oh = conv_output_size(h, k, stride, padding)
        ow = conv_output_size(wd, k, stride, padding)

        xp = np.pad(x, ((0, 0), (0, 0), (padding, padding), (padding, padding)))
        out = np.zeros((out_c, n, oh, ow), dtype=x.dtype)
        for i in range(k):
            for j in range(k):
                patch = xp[:, :, _window(i, oh, stride), _window(j, ow, stride)]
                out += np.tensordot(w[:, :, i, j], patch, axes=([1], [1]))

        self.xp, self.w = xp, w
        self.geometry = (h, wd, oh, ow, stride, padding)
        return out.transpose(1, 0, 2, 3) + b[None, :, None, None]

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        h, wd, oh, ow, stride, padding = self.geometry
        xp, w = self.xp, self.w
        k = w.shape[2]
        g = grad.transpose(1, 0, 2, 3)
        grad_w = np.empty_like(w)
        grad_xp = np.zeros_like(xp)
        for i in range(k):
            for j in range(k):
                rows, cols = _window(i, oh, stride), _window(j, ow, stride)
                patch = xp[:, :, rows, cols]
                grad_w[:, :, i, j] = np.tensordot(g, patch, axes=([1, 2, 3], [0, 2, 3]))
                grad_xp[:, :, rows, cols] += np.tensordot(
                    w[:, :, i, j], g, axes=([0], [0])
                ).transpose(1, 0, 2, 3)
        grad_b = grad.sum(axis=(0, 2, 3))
        grad_x = grad_xp[:, :, padding : padding + h, padding : padding + wd]
        return grad_x, grad_w, grad_b


def conv2d(x: Tensor, params: ConvParams) -> Tensor:
    """2-D cross-correlation of a (n, c, h, w) batch plus per-channel bias."""
    return Conv2d.apply(
        x, params.weight, params.bias, stride=params.stride, padding=params.padding
    )


class Linear(Function):
    def forward(self, x: np.ndarray, w: np.ndarray, b: np.ndarray) -> np.ndarray:
        if x.ndim not in (1, 2) or x.shape[-1] != w.shape[1]:
            raise DimensionError(f"linear: input {x.shape} does not match weight {w.shape}")
        self.x, self.w = x, w
        return x @ w.T + b

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = self.x
        if x.ndim == 1:
            return grad @ self.w, np.outer(grad, x), grad
        return grad @ self.w, grad.T @ x, grad.sum(axis=0)


def linear(x: Tensor, params: LinearParams) -> Tensor:
    """Affine map y = W x + b for a vector or a (batch, n) matrix."""
    return Linear.apply(x, params.weight, params.bias)


class ReLU(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.mask = x > 0
        return np.where(self.mask, x, x.dtype.type(0))

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * self.mask,)


class LeakyReLU(Function):
    def forward(self, x: np.ndarray, slope: float) -> np.ndarray:
        self.factor = np.where(x > 0, x.dtype.type(1), x.dtype.type(slope))
        return x * self.factor

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * self.factor,)


class Tanh(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.out = np.tanh(x)
        return self.out

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * (1 - self.out * self.out),)


class Sigmoid(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.out = expit(x)
        return self.out

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray]:
        return (grad * self.out * (1 - self.out),)


def relu(x: Tensor) -> Tensor:
    return ReLU.apply(x)


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    return LeakyReLU.apply(x, slope=slope)


def tanh(x: Tensor) -> Tensor:
    return Tanh.apply(x)


def sigmoid(x: Tensor) -> Tensor:
    return Sigmoid.apply(x)


class ActivationKind(StrEnum):
    RELU = "relu"
    LEAKY_RELU = "leaky_relu"
    TANH = "tanh"
    SIGMOID = "sigmoid"


def activation(x: Tensor, kind: ActivationKind | str, slope: float | None = None) -> Tensor:
    kind = ActivationKind(kind)
    if kind is ActivationKind.LEAKY_RELU:
        if slope is None:
            raise UsageError("leaky_relu needs a slope")
        return leaky_relu(x, slope)
    return {
        ActivationKind.RELU: relu,
        ActivationKind.TANH: tanh,
        ActivationKind.SIGMOID: sigmoid,
    }[kind](x)


class AvgPool2d(Function):
    def forward(self, x: np.ndarray, kernel: int, stride: int) -> np.ndarray:
        if x.ndim != 4:
            raise DimensionError(f"avg_pool2d expects (n, c, h, w) input, got {x.shape}")
        h, w = x.shape[2:]
        if h < kernel or w < kernel:
            raise DimensionError(f"avg_pool2d: input {h}x{w} smaller than window {kernel}")
        oh = (h - kernel) // stride + 1
        ow = (w - kernel) // stride + 1
        out = np.zeros(x.shape[:2] + (oh, ow), dtype=x.dtype)
        for i in range(kernel):
            for j in range(kernel):
                out += x[:, :, _window(i, oh, stride), _window(j, ow, stride)]
        self.geometry = (x.shape, kernel, stride, oh, ow)
        return out / x.dtype.type(kernel * kernel)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray]:
        shape, kernel, stride, oh, ow = self.geometry
        share = grad / grad.dtype.type(kernel * kernel)
        grad_x = np.zeros(shape, dtype=grad.dtype)
        for i in range(kernel):
            for j in range(kernel):
                grad_x[:, :, _window(i, oh, stride), _window(j, ow, stride)] += share
        return (grad_x,)


def avg_pool2d(x: Tensor, kernel: int = 2, stride: int = 2) -> Tensor:
    return AvgPool2d.apply(x, kernel=kernel, stride=stride)


class MSELoss(Function):
    def forward(self, pred: np.ndarray, target: np.ndarray) -> np.ndarray:
        if pred.shape != target.shape:
            raise DimensionError(f"mse_loss: shape mismatch {pred.shape} vs {target.shape}")
        self.diff = pred - target
        return np.asarray(np.mean(self.diff * self.diff), dtype=pred.dtype)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        g = self.diff * (grad * 2 / self.diff.size)
        return g, -g


def mse_loss(pred: Tensor, target: Tensor) -> Tensor:
    """Mean of squared differences over every element."""
    return MSELoss.apply(pred, target)


class BCELoss(Function):
    def forward(self, pred: np.ndarray, label: np.ndarray) -> np.ndarray:
        if pred.shape != label.shape:
            raise DimensionError(f"bce_loss: shape mismatch {pred.shape} vs {label.shape}")
        eps = pred.dtype.type(BCE_EPS)
        self.inside = (pred > eps) & (pred < 1 - eps)
        p = np.clip(pred, eps, 1 - eps)
        self.p, self.label = p, label
        losses = -(label * np.log(p) + (1 - label) * np.log1p(-p))
        return np.asarray(losses.mean(), dtype=pred.dtype)

    def backward(self, grad: np.ndarray) -> tuple[np.ndarray, None]:
        p, y = self.p, self.label
        g = (p - y) / (p * (1 - p)) * (grad / p.size)
        return g * self.inside, None


def bce_loss(pred: Tensor, label: Tensor | float) -> Tensor:
    """Binary cross entropy, mean over elements; `pred` is clamped to [eps, 1 - eps]."""
    if not isinstance(label, Tensor):
        label = Tensor(np.full(pred.shape, label, dtype=pred.dtype))
    return BCELoss.apply(pred, label)
