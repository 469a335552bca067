"""Binary checkpoints for generators and discriminators.

Layout (little-endian): magic ``LFPC``, u16 version, u8 model kind, the
config block, then every parameter array in declaration order as float32,
followed by a u64 checksum of everything before it.
"""

import hashlib
import logging
import struct
from pathlib import Path

import numpy as np

from ..errors import IntegrityError
from .discriminator import Discriminator, DiscriminatorConfig, build_discriminator
from .generator import Generator, GeneratorConfig, build_generator

logger = logging.getLogger(__name__)

MAGIC = b"LFPC"
VERSION = 1
_PREAMBLE = struct.Struct("<4sHB")
_GENERATOR_CONFIG = struct.Struct("<IIIId")
_DISCRIMINATOR_CONFIG = struct.Struct("<IIIII")
_CHECKSUM = struct.Struct("<Q")

KIND_GENERATOR = 1
KIND_DISCRIMINATOR = 2

Model = Generator | Discriminator


def checksum64(payload: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(payload, digest_size=8).digest(), "little")


def config_block(cfg: GeneratorConfig | DiscriminatorConfig) -> bytes:
    if isinstance(cfg, GeneratorConfig):
        return _GENERATOR_CONFIG.pack(
            cfg.input_frames, cfg.channels, cfg.residual_blocks, cfg.kernel, cfg.residual_scale
        )
    return _DISCRIMINATOR_CONFIG.pack(
        cfg.input_frames, cfg.patch_size, cfg.kernel, *cfg.channels
    )


def config_hash(cfg: GeneratorConfig | DiscriminatorConfig) -> int:
    return checksum64(config_block(cfg))


def _payload(model: Model) -> bytes:
    kind = KIND_GENERATOR if isinstance(model, Generator) else KIND_DISCRIMINATOR
    parts = [_PREAMBLE.pack(MAGIC, VERSION, kind), config_block(model.config)]
    parts += [p.data.astype("<f4").tobytes() for p in model.parameters()]
    return b"".join(parts)


def serialize(model: Model) -> bytes:
    payload = _payload(model)
    return payload + _CHECKSUM.pack(checksum64(payload))


def checkpoint_digest(model: Model) -> int:
    """The checksum a saved checkpoint of `model` would carry."""
    return checksum64(_payload(model))


def deserialize(data: bytes) -> Model:
    if len(data) < _PREAMBLE.size + _CHECKSUM.size:
        raise IntegrityError("checkpoint truncated")
    payload, (stored,) = data[: -_CHECKSUM.size], _CHECKSUM.unpack(data[-_CHECKSUM.size :])
    magic, version, kind = _PREAMBLE.unpack_from(payload)
    if magic != MAGIC:
        raise IntegrityError(f"not a checkpoint (magic {magic!r})")
    if version != VERSION:
        raise IntegrityError(f"unsupported checkpoint version {version}")
    if checksum64(payload) != stored:
        raise IntegrityError("checkpoint checksum mismatch")

    offset = _PREAMBLE.size
    model: Model
    if kind == KIND_GENERATOR:
        fields = _GENERATOR_CONFIG.unpack_from(payload, offset)
        offset += _GENERATOR_CONFIG.size
        model = build_generator(GeneratorConfig(*fields), seed=0)
    elif kind == KIND_DISCRIMINATOR:
        frames, patch, kernel, c1, c2 = _DISCRIMINATOR_CONFIG.unpack_from(payload, offset)
        offset += _DISCRIMINATOR_CONFIG.size
        model = build_discriminator(
            DiscriminatorConfig(frames, patch, kernel, (c1, c2)), seed=0
        )
    else:
        raise IntegrityError(f"unknown model kind {kind}")

    for p in model.parameters():
        count = p.size
        end = offset + 4 * count
        if end > len(payload):
            raise IntegrityError("checkpoint parameter block truncated")
        p.data = np.frombuffer(payload, dtype="<f4", count=count, offset=offset).astype(
            np.float32
        ).reshape(p.shape)
        offset = end
    if offset != len(payload):
        raise IntegrityError("checkpoint has trailing bytes")
    return model


def save_checkpoint(model: Model, path: Path) -> int:
    """Write `model` to `path`; returns the checkpoint digest."""
    data = serialize(model)
    Path(path).write_bytes(data)
    digest = _CHECKSUM.unpack(data[-_CHECKSUM.size :])[0]
    logger.info("wrote checkpoint %s (digest %016x)", path, digest)
    return digest


def load_checkpoint(path: Path) -> Model:
    return deserialize(Path(path).read_bytes())


def load_generator(path: Path) -> Generator:
    model = load_checkpoint(path)
    if not isinstance(model, Generator):
        raise IntegrityError(f"{path} holds a discriminator, not a generator")
    return model
