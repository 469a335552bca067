import numpy as np
import pytest
from lfpcodec.errors import IntegrityError
from lfpcodec.nets import (
    Discriminator,
    DiscriminatorConfig,
    Generator,
    GeneratorConfig,
    build_discriminator,
    build_generator,
    checkpoint_digest,
    config_hash,
    load_checkpoint,
    load_generator,
    save_checkpoint,
)

CFG = GeneratorConfig(input_frames=2, channels=3, residual_blocks=1, residual_scale=0.25)


def test_generator_round_trip(tmp_path):
    g = build_generator(CFG, seed=3)
    path = tmp_path / "g.ckpt"
    digest = save_checkpoint(g, path)
    assert path.read_bytes()[:4] == b"LFPC"
    assert digest == checkpoint_digest(g)

    loaded = load_generator(path)
    assert isinstance(loaded, Generator)
    assert loaded.config == CFG
    for a, b in zip(g.parameters(), loaded.parameters()):
        np.testing.assert_array_equal(a.data, b.data)
    assert checkpoint_digest(loaded) == digest


def test_discriminator_round_trip(tmp_path):
    cfg = DiscriminatorConfig(input_frames=3, patch_size=18, kernel=3, channels=(2, 3))
    d = build_discriminator(cfg, seed=1)
    save_checkpoint(d, tmp_path / "d.ckpt")
    loaded = load_checkpoint(tmp_path / "d.ckpt")
    assert isinstance(loaded, Discriminator)
    assert loaded.config == cfg
    for a, b in zip(d.parameters(), loaded.parameters()):
        np.testing.assert_array_equal(a.data, b.data)


def test_digest_tracks_parameters():
    g = build_generator(CFG, seed=3)
    before = checkpoint_digest(g)
    g.tail.bias.data[0] += 1.0
    assert checkpoint_digest(g) != before


def test_config_hash_tracks_config():
    assert config_hash(CFG) == config_hash(GeneratorConfig(2, 3, 1, 3, 0.25))
    assert config_hash(CFG) != config_hash(GeneratorConfig(2, 3, 2, 3, 0.25))


def test_corrupted_byte_fails_checksum(tmp_path):
    path = tmp_path / "g.ckpt"
    save_checkpoint(build_generator(CFG, seed=0), path)
    data = bytearray(path.read_bytes())
    data[40] ^= 0xFF
    path.write_bytes(bytes(data))
    with pytest.raises(IntegrityError, match="checksum"):
        load_checkpoint(path)


def test_truncated_file_rejected(tmp_path):
    path = tmp_path / "g.ckpt"
    save_checkpoint(build_generator(CFG, seed=0), path)
    path.write_bytes(path.read_bytes()[:-20])
    with pytest.raises(IntegrityError):
        load_checkpoint(path)
    path.write_bytes(b"LFPC")
    with pytest.raises(IntegrityError, match="truncated"):
        load_checkpoint(path)


def test_wrong_magic_rejected(tmp_path):
    path = tmp_path / "x.ckpt"
    path.write_bytes(b"NOPE" + bytes(40))
    with pytest.raises(IntegrityError, match="magic"):
        load_checkpoint(path)


def test_load_generator_rejects_discriminator(tmp_path):
    cfg = DiscriminatorConfig(input_frames=3, patch_size=18, kernel=3, channels=(2, 2))
    save_checkpoint(build_discriminator(cfg, seed=0), tmp_path / "d.ckpt")
    with pytest.raises(IntegrityError, match="discriminator"):
        load_generator(tmp_path / "d.ckpt")
