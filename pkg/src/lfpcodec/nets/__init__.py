from .checkpoint import (
    checkpoint_digest,
    config_hash,
    load_checkpoint,
    load_generator,
    save_checkpoint,
)
from .discriminator import (
    Discriminator,
    DiscriminatorConfig,
    build_discriminator,
    discriminator_forward,
)
from .generator import (
    Generator,
    GeneratorConfig,
    build_generator,
    generator_forward,
    parameter_count,
    to_uint8_frame,
)

__all__ = [
    "Discriminator",
    "DiscriminatorConfig",
    "Generator",
    "GeneratorConfig",
    "build_discriminator",
    "build_generator",
    "checkpoint_digest",
    "config_hash",
    "discriminator_forward",
    "generator_forward",
    "load_checkpoint",
    "load_generator",
    "parameter_count",
    "save_checkpoint",
    "to_uint8_frame",
]
