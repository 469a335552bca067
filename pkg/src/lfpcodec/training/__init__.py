from .log import LrEvent, StepRecord, TrainLog
from .trainer import (
    PlateauSchedule,
    TrainConfigGAN,
    TrainConfigMSE,
    TrainResult,
    combined_loss,
    discriminator_bce,
    mse_on,
    train_adversarial,
    train_mse,
)

__all__ = [
    "LrEvent",
    "PlateauSchedule",
    "StepRecord",
    "TrainConfigGAN",
    "TrainConfigMSE",
    "TrainLog",
    "TrainResult",
    "combined_loss",
    "discriminator_bce",
    "mse_on",
    "train_adversarial",
    "train_mse",
]
