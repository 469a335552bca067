"""Exponential-Golomb bit packing, most significant bit first."""

from ..errors import DecodeError

MAX_PREFIX = 32


class BitWriter:
    def __init__(self) -> None:
        self._buffer = bytearray()
        self._acc = 0
        self._count = 0
        self.bits_written = 0

    def write(self, value: int, nbits: int) -> None:
        self._acc = (self._acc << nbits) | (value & ((1 << nbits) - 1))
        self._count += nbits
        while self._count >= 8:
            self._count -= 8
            self._buffer.append((self._acc >> self._count) & 0xFF)
        self._acc &= (1 << self._count) - 1
        self.bits_written += nbits

    def write_ue(self, value: int) -> None:
        if value < 0:
            raise ValueError(f"ue() needs a non-negative value, got {value}")
        code = value + 1
        length = code.bit_length()
        self.write(0, length - 1)
        self.write(code, length)

    def write_se(self, value: int) -> None:
        self.write_ue(2 * value - 1 if value > 0 else -2 * value)

    def getvalue(self) -> bytes:
        """Packed bytes, the last one zero-padded."""
        if self._count:
            return bytes(self._buffer) + bytes([self._acc << (8 - self._count)])
        return bytes(self._buffer)


class BitReader:
    def __init__(self, data: bytes) -> None:
        self._data = data
        self.position = 0

    @property
    def bits_left(self) -> int:
        return 8 * len(self._data) - self.position

    def read(self, nbits: int) -> int:
        if nbits > self.bits_left:
            raise DecodeError("bit stream truncated")
        value = 0
        for _ in range(nbits):
            byte = self._data[self.position >> 3]
            value = (value << 1) | ((byte >> (7 - (self.position & 7))) & 1)
            self.position += 1
        return value

    def read_ue(self) -> int:
        zeros = 0
        while self.read(1) == 0:
            zeros += 1
            if zeros > MAX_PREFIX:
                raise DecodeError("exp-Golomb prefix too long")
        return (1 << zeros) - 1 + self.read(zeros)

    def read_se(self) -> int:
        code = self.read_ue()
        return (code + 1) // 2 if code & 1 else -(code // 2)

    def padding_only(self) -> bool:
        """True when nothing but zero padding of the final byte remains."""
        return self.bits_left < 8 and self.read(self.bits_left) == 0


def ue_length(value: int) -> int:
    return 2 * (value + 1).bit_length() - 1


def se_length(value: int) -> int:
    return ue_length(2 * value - 1 if value > 0 else -2 * value)
