"""MSE pre-training and adversarial fine tuning of the frame generator."""

import logging
import time
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..data.frames import normalize
from ..data.patches import PatchDataset
from ..errors import ConfigurationError, InputError, NumericError
from ..nets import (
    Discriminator,
    Generator,
    save_checkpoint,
)
from ..nn import Adam, Tensor, bce_loss, concat, mse_loss, no_grad
from .log import LrEvent, StepRecord, TrainLog

logger = logging.getLogger(__name__)

SMOOTHING_WINDOW = 100


@dataclass(frozen=True)
class TrainConfigMSE:
    steps: int
    lr0: float = 1e-4
    batch: int = 32
    plateau_window: int = 6000
    lr_factor: float = 0.5
    log_every: int = 100
    checkpoint_every: int = 0
    checkpoint_path: Path | None = None

    def __post_init__(self) -> None:
        if self.steps < 1 or self.batch < 1 or self.plateau_window < 1:
            raise ConfigurationError("steps, batch and plateau_window must be positive")
        if self.lr0 <= 0 or not 0 < self.lr_factor < 1:
            raise ConfigurationError("lr0 must be positive and lr_factor in (0, 1)")


@dataclass(frozen=True)
class TrainConfigGAN:
    steps: int
    lambda_ms: float = 0.95
    lambda_adv: float = 0.05
    gen_batch: int = 16
    disc_batch: int = 32
    gen_lr: float = 1e-6
    disc_lr: float = 1e-5
    log_every: int = 100
    checkpoint_every: int = 0
    checkpoint_path: Path | None = None
    disc_checkpoint_path: Path | None = None

    def __post_init__(self) -> None:
        if self.steps < 1 or self.gen_batch < 1:
            raise ConfigurationError("steps and gen_batch must be positive")
        if self.disc_batch != 2 * self.gen_batch:
            raise ConfigurationError(
                f"disc_batch {self.disc_batch} must hold gen_batch real + gen_batch generated"
            )
        if self.lambda_ms <= 0 or self.lambda_adv < 0:
            raise ConfigurationError("lambda_ms must be positive and lambda_adv non-negative")
        if self.gen_lr <= 0 or self.disc_lr <= 0:
            raise ConfigurationError("learning rates must be positive")


@dataclass
class TrainResult:
    generator: Generator
    log: TrainLog
    discriminator: Discriminator | None = None


class PlateauSchedule:
    """Scale the learning rate when the smoothed loss stops reaching new minima."""

    def __init__(self, lr: float, window: int, factor: float, smoothing: int) -> None:
        self.lr = lr
        self.window = window
        self.factor = factor
        self._recent: deque[float] = deque(maxlen=smoothing)
        self.best = float("inf")
        self.best_step = 0

    @property
    def smoothed(self) -> float:
        return sum(self._recent) / len(self._recent)

    def observe(self, step: int, loss: float) -> LrEvent | None:
        self._recent.append(loss)
        if self.smoothed < self.best:
            self.best, self.best_step = self.smoothed, step
            return None
        if step - self.best_step >= self.window:
            event = LrEvent(step=step, old_lr=self.lr, new_lr=self.lr * self.factor)
            self.lr = event.new_lr
            self.best_step = step
            return event
        return None


def split_sample(samples: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Context (the n patches before the last) and target (the last), normalized."""
    length = samples.shape[1]
    if n > length - 1:
        raise ConfigurationError(f"generator needs {n} context frames, samples hold {length}")
    context = normalize(samples[:, length - 1 - n : length - 1])
    target = normalize(samples[:, length - 1 :])
    return context, target


def combined_loss(
    mse: Tensor | float,
    disc_out: Tensor | float,
    lambda_ms: float = 0.95,
    lambda_adv: float = 0.05,
) -> Tensor:
    """lambda_ms * mse - lambda_adv * mean(log(disc_out)), disc_out clamped.

    With lambda_adv = 0 the generator follows train_mse bit for bit only when
    lambda_ms = 1; any other lambda_ms scales every gradient by that factor.
    """
    mse = mse if isinstance(mse, Tensor) else Tensor(mse)
    disc_out = disc_out if isinstance(disc_out, Tensor) else Tensor(disc_out)
    return mse * lambda_ms + bce_loss(disc_out, 1.0) * lambda_adv


def _snapshot(params: list[Tensor]) -> list[np.ndarray]:
    return [p.data.copy() for p in params]


def _restore(params: list[Tensor], snapshot: list[np.ndarray]) -> None:
    for p, saved in zip(params, snapshot):
        p.data = saved.copy()


def _abort(
    step: int,
    models: list[tuple[Generator | Discriminator, list[np.ndarray], Path | None]],
    reason: str,
) -> NumericError:
    for model, snapshot, path in models:
        _restore(model.parameters(), snapshot)
        if path is not None:
            save_checkpoint(model, path)
    logger.error("training aborted at step %d: %s", step, reason)
    return NumericError(f"{reason} at step {step}; last good parameters restored")


def _check_dataset(dataset: PatchDataset) -> None:
    if len(dataset) == 0:
        raise InputError("training dataset is empty")


def train_mse(
    generator: Generator,
    dataset: PatchDataset,
    cfg: TrainConfigMSE,
    seed: int,
) -> TrainResult:
    _check_dataset(dataset)
    n = generator.config.input_frames
    split_sample(dataset.samples[:1], n)

    rng = np.random.default_rng(seed)
    params = generator.parameters()
    opt = Adam(params)
    schedule = PlateauSchedule(cfg.lr0, cfg.plateau_window, cfg.lr_factor, SMOOTHING_WINDOW)
    log = TrainLog()
    snapshot = _snapshot(params)

    for step in range(1, cfg.steps + 1):
        started = time.perf_counter()
        idx = rng.integers(0, len(dataset), size=cfg.batch)
        context, target = split_sample(dataset.samples[idx], n)

        opt.zero_grad()
        loss = mse_loss(generator(context), Tensor(target))
        value = loss.item()
        if not np.isfinite(value):
            raise _abort(step, [(generator, snapshot, cfg.checkpoint_path)], "non-finite loss")
        loss.backward()
        try:
            opt.step(schedule.lr)
        except NumericError:
            raise _abort(step, [(generator, snapshot, cfg.checkpoint_path)], "non-finite gradient")

        lr_used = schedule.lr
        log.record(StepRecord(step, value, lr_used, (time.perf_counter() - started) * 1e3))
        event = schedule.observe(step, value)
        if event is not None:
            log.lr_events.append(event)
            logger.info("step %d: lr %.3g -> %.3g", step, event.old_lr, event.new_lr)
        if step % cfg.log_every == 0:
            logger.info("step %d: loss %.6f (smoothed %.6f) lr %.3g", step, value, schedule.smoothed, lr_used)
        if cfg.checkpoint_every and step % cfg.checkpoint_every == 0:
            snapshot = _snapshot(params)
            if cfg.checkpoint_path is not None:
                save_checkpoint(generator, cfg.checkpoint_path)
                log.checkpoints.append((step, cfg.checkpoint_path))

    return TrainResult(generator=generator, log=log)


def _generated_sequences(samples: np.ndarray, predicted: np.ndarray | Tensor) -> Tensor:
    """Original patches except the last, followed by the predicted last patch."""
    originals = Tensor(normalize(samples[:, :-1]))
    predicted = predicted if isinstance(predicted, Tensor) else Tensor(predicted)
    return concat([originals, predicted], axis=1)


def discriminator_batch(
    real: np.ndarray, generated: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Stack real (label 1) and generated (label 0) sequences, real first."""
    if real.shape != generated.shape:
        raise ConfigurationError(
            f"real {real.shape} and generated {generated.shape} halves differ"
        )
    inputs = np.concatenate([normalize(real), generated])
    labels = np.concatenate(
        [np.ones(len(real), np.float32), np.zeros(len(generated), np.float32)]
    )
    return inputs, labels


def train_adversarial(
    generator: Generator | None,
    discriminator: Discriminator,
    dataset: PatchDataset,
    cfg: TrainConfigGAN,
    seed: int,
) -> TrainResult:
    """Jointly fine tune a pretrained generator against a fresh discriminator."""
    if generator is None:
        raise ConfigurationError("adversarial training needs a pretrained generator")
    _check_dataset(dataset)
    n = generator.config.input_frames
    split_sample(dataset.samples[:1], n)
    if discriminator.config.input_frames != dataset.length:
        raise ConfigurationError(
            f"discriminator sees {discriminator.config.input_frames} patches, "
            f"samples hold {dataset.length}"
        )

    # The generator batch stream matches train_mse for the same seed.
    batch_rng = np.random.default_rng(seed)
    real_rng = np.random.default_rng([seed, 1])
    g_params, d_params = generator.parameters(), discriminator.parameters()
    gen_opt, disc_opt = Adam(g_params), Adam(d_params)
    log = TrainLog()
    g_snapshot, d_snapshot = _snapshot(g_params), _snapshot(d_params)
    half = cfg.disc_batch // 2

    def fail(step: int, reason: str) -> NumericError:
        return _abort(
            step,
            [
                (generator, g_snapshot, cfg.checkpoint_path),
                (discriminator, d_snapshot, cfg.disc_checkpoint_path),
            ],
            reason,
        )

    for step in range(1, cfg.steps + 1):
        started = time.perf_counter()
        gen_idx = batch_rng.integers(0, len(dataset), size=cfg.gen_batch)
        real_idx = real_rng.integers(0, len(dataset), size=half)
        gen_samples = dataset.samples[gen_idx]
        context, target = split_sample(gen_samples, n)

        # discriminator: generated halves are data, no gradient reaches the generator
        with no_grad():
            fake = _generated_sequences(gen_samples, generator(context)).data
        inputs, labels = discriminator_batch(dataset.samples[real_idx], fake)
        disc_opt.zero_grad()
        gen_opt.zero_grad()
        d_loss = bce_loss(discriminator(inputs), Tensor(labels))
        d_value = d_loss.item()
        if not np.isfinite(d_value):
            raise fail(step, "non-finite discriminator loss")
        d_loss.backward()
        try:
            disc_opt.step(cfg.disc_lr)
        except NumericError:
            raise fail(step, "non-finite discriminator gradient")

        # generator: discriminator gradients are computed but never applied
        disc_opt.zero_grad()
        gen_opt.zero_grad()
        predicted = generator(context)
        mse = mse_loss(predicted, Tensor(target))
        verdict = discriminator(_generated_sequences(gen_samples, predicted))
        loss = combined_loss(mse, verdict, cfg.lambda_ms, cfg.lambda_adv)
        value = loss.item()
        if not np.isfinite(value):
            raise fail(step, "non-finite generator loss")
        loss.backward()
        try:
            gen_opt.step(cfg.gen_lr)
        except NumericError:
            raise fail(step, "non-finite generator gradient")
        disc_opt.zero_grad()

        real_count = int(labels.sum())
        log.record(
            StepRecord(
                step,
                value,
                cfg.gen_lr,
                (time.perf_counter() - started) * 1e3,
                disc_loss=d_value,
                disc_real=real_count,
                disc_generated=len(labels) - real_count,
            )
        )
        if step % cfg.log_every == 0:
            logger.info("step %d: generator %.6f discriminator %.6f", step, value, d_value)
        if cfg.checkpoint_every and step % cfg.checkpoint_every == 0:
            g_snapshot, d_snapshot = _snapshot(g_params), _snapshot(d_params)
            if cfg.checkpoint_path is not None:
                save_checkpoint(generator, cfg.checkpoint_path)
                log.checkpoints.append((step, cfg.checkpoint_path))
            if cfg.disc_checkpoint_path is not None:
                save_checkpoint(discriminator, cfg.disc_checkpoint_path)

    return TrainResult(generator=generator, log=log, discriminator=discriminator)


def discriminator_bce(
    generator: Generator, discriminator: Discriminator, dataset: PatchDataset
) -> float:
    """Discriminator BCE on every sample of `dataset`, real and generated."""
    _check_dataset(dataset)
    with no_grad():
        context, _ = split_sample(dataset.samples, generator.config.input_frames)
        fake = _generated_sequences(dataset.samples, generator(context)).data
        inputs, labels = discriminator_batch(dataset.samples, fake)
        return bce_loss(discriminator(inputs), Tensor(labels)).item()


def mse_on(generator: Generator, dataset: PatchDataset) -> float:
    """Generator MSE on every sample of `dataset` (normalized units)."""
    _check_dataset(dataset)
    with no_grad():
        context, target = split_sample(dataset.samples, generator.config.input_frames)
        return mse_loss(generator(context), Tensor(target)).item()
