import asyncio
from dataclasses import dataclass
from enum import StrEnum

import numpy as np

from ..data.frames import Frame
from ..errors import ConfigurationError, DecodeError
from . import external, residual
from .external import ExternalCommands
from .residual import FLAG_EXTERNAL, FLAG_INTRA, HEADER, ResidualImage, StreamHeader


class BackendKind(StrEnum):
    INTERNAL = "internal"
    EXTERNAL = "external"


@dataclass(frozen=True)
class CodecBackend:
    """Still-image coder used for intra frames and residuals."""

    kind: BackendKind = BackendKind.INTERNAL
    commands: ExternalCommands | None = None

    def __post_init__(self) -> None:
        if self.kind is BackendKind.EXTERNAL and self.commands is None:
            raise ConfigurationError(
                f"external backend needs commands (set {external.ENV_VAR})"
            )

    @classmethod
    def resolve(cls, kind: BackendKind | str, verify: bool = True) -> "CodecBackend":
        """Backend of the given kind, external commands taken from the environment."""
        kind = BackendKind(kind)
        if kind is BackendKind.INTERNAL:
            return cls()
        backend = cls(kind, ExternalCommands.from_env())
        if verify:
            asyncio.run(external.probe(backend.commands))
        return backend

    def encode_residual(self, r: ResidualImage | np.ndarray, qp: int) -> bytes:
        if self.kind is BackendKind.INTERNAL:
            return residual.encode_residual(r, qp)
        r = r if isinstance(r, ResidualImage) else ResidualImage(r)
        return self._encode_external(external.map_residual(r.values), qp, 0)

    def decode_residual(self, data: bytes) -> ResidualImage:
        if self.kind is BackendKind.INTERNAL:
            return residual.decode_residual(data)
        return ResidualImage(external.unmap_residual(self._decode_external(data, intra=False)))

    def encode_intra(self, frame: Frame, qp: int) -> bytes:
        if self.kind is BackendKind.INTERNAL:
            return residual.encode_intra(frame, qp)
        return self._encode_external(frame, qp, FLAG_INTRA)

    def decode_intra(self, data: bytes) -> Frame:
        if self.kind is BackendKind.INTERNAL:
            return residual.decode_intra(data)
        return self._decode_external(data, intra=True)

    def _encode_external(self, image: Frame, qp: int, flags: int) -> bytes:
        residual.check_qp(qp)
        payload = asyncio.run(external.encode_image(image, qp, self.commands))
        header = StreamHeader(image.width, image.height, qp, flags | FLAG_EXTERNAL)
        return header.pack() + payload

    def _decode_external(self, data: bytes, intra: bool) -> Frame:
        header = StreamHeader.unpack(data)
        if not header.external:
            raise DecodeError("stream was produced by the internal codec")
        if header.intra != intra:
            raise DecodeError("intra/residual flag does not match the chunk type")
        image = asyncio.run(external.decode_image(data[HEADER.size :], self.commands))
        if image.shape != (header.height, header.width):
            raise DecodeError(
                f"external decoder returned {image.shape}, header says "
                f"{(header.height, header.width)}"
            )
        return image
