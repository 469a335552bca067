"""Adapter for an external still-image codec executable.

Images are handed over as 8-bit PGM files in a temporary directory. The
encode and decode commands are templates with ``{in}``, ``{out}`` and
``{qp}`` placeholders, e.g. ``bpgenc -q {qp} -o {out} {in}``. Residuals are
mapped to 8 bits as clamp(r + 128, 0, 255) before encoding, so values below
-128 or above 127 do not survive the round trip.
"""

import asyncio
import logging
import os
import shlex
import tempfile
from dataclasses import dataclass
from pathlib import Path

import aiofiles
import numpy as np

from ..data.frames import Frame, parse_pgm, pgm_bytes
from ..errors import BackendError, ConfigurationError

logger = logging.getLogger(__name__)

ENV_VAR = "LFP_EXTERNAL_CODEC"
RESIDUAL_OFFSET = 128
PROBE_QP = 30


@dataclass(frozen=True)
class ExternalCommands:
    encode: str
    decode: str

    @classmethod
    def parse(cls, value: str) -> "ExternalCommands":
        """Parse ``"<encode template>|<decode template>"``."""
        encode, sep, decode = value.partition("|")
        if not sep or not encode.strip() or not decode.strip():
            raise ConfigurationError(
                f"{ENV_VAR} must hold '<encode command>|<decode command>', got {value!r}"
            )
        for name, template in (("encode", encode), ("decode", decode)):
            if "{in}" not in template or "{out}" not in template:
                raise ConfigurationError(f"{name} command needs {{in}} and {{out}} placeholders")
        return cls(encode.strip(), decode.strip())

    @classmethod
    def from_env(cls) -> "ExternalCommands | None":
        value = os.getenv(ENV_VAR)
        return cls.parse(value) if value else None


def map_residual(values: np.ndarray) -> Frame:
    return Frame(np.clip(values.astype(np.int32) + RESIDUAL_OFFSET, 0, 255).astype(np.uint8))


def unmap_residual(frame: Frame) -> np.ndarray:
    return frame.pixels.astype(np.int16) - RESIDUAL_OFFSET


def _command(template: str, src: Path, dst: Path, qp: int | None) -> list[str]:
    args = []
    for arg in shlex.split(template):
        arg = arg.replace("{in}", str(src)).replace("{out}", str(dst))
        if qp is not None:
            arg = arg.replace("{qp}", str(qp))
        args.append(arg)
    return args


async def _run(args: list[str], output_path: Path) -> None:
    try:
        proc = await asyncio.create_subprocess_exec(
            *args,
            stdout=asyncio.subprocess.DEVNULL,
            stderr=asyncio.subprocess.PIPE,
        )
    except OSError as exc:
        raise BackendError(f"cannot start {args[0]}: {exc}") from exc
    _, stderr = await proc.communicate()
    if proc.returncode != 0 or not output_path.exists():
        detail = stderr.decode(errors="replace").strip().splitlines()[-1:] if stderr else []
        raise BackendError(
            f"{args[0]} failed with exit status {proc.returncode}"
            + (f": {detail[0]}" if detail else "")
        )


async def encode_image(frame: Frame, qp: int, commands: ExternalCommands) -> bytes:
    with tempfile.TemporaryDirectory(prefix="lfp-ext-") as tmpdir:
        src, dst = Path(tmpdir) / "in.pgm", Path(tmpdir) / "out.bin"
        async with aiofiles.open(src, "wb") as fh:
            await fh.write(pgm_bytes(frame))
        await _run(_command(commands.encode, src, dst, qp), dst)
        async with aiofiles.open(dst, "rb") as fh:
            return await fh.read()


async def decode_image(payload: bytes, commands: ExternalCommands) -> Frame:
    with tempfile.TemporaryDirectory(prefix="lfp-ext-") as tmpdir:
        src, dst = Path(tmpdir) / "in.bin", Path(tmpdir) / "out.pgm"
        async with aiofiles.open(src, "wb") as fh:
            await fh.write(payload)
        await _run(_command(commands.decode, src, dst, None), dst)
        async with aiofiles.open(dst, "rb") as fh:
            data = await fh.read()
    try:
        return parse_pgm(data, "external decoder output")
    except Exception as exc:
        raise BackendError(f"external decoder output is not an 8-bit PGM: {exc}") from exc


def probe_frame(size: int = 16) -> Frame:
    ramp = np.arange(size * size, dtype=np.int64).reshape(size, size)
    return Frame(((ramp * 7) % 256).astype(np.uint8))


async def probe(commands: ExternalCommands, qp: int = PROBE_QP) -> None:
    """Round trip a small test image twice; the codec must be deterministic."""
    frame = probe_frame()
    first = await encode_image(frame, qp, commands)
    second = await encode_image(frame, qp, commands)
    if first != second:
        raise BackendError("external encoder is not deterministic on the probe image")
    decoded = await decode_image(first, commands)
    if decoded.shape != frame.shape:
        raise BackendError(
            f"external codec round trip changed the probe size to {decoded.shape}"
        )
    logger.info("external codec probe passed (%d bytes)", len(first))
