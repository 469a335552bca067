"""Resolved settings: documented defaults, then a config file, then flags.

Config files use dotenv syntax (``KEY=VALUE``, ``#`` comments); keys are
case-insensitive. Unknown keys and malformed lines are usage errors.
"""

import dataclasses
import os
from collections.abc import Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from dotenv.parser import parse_stream

from .errors import ConfigurationError


def default_threads() -> int:
    value = os.getenv("LFP_THREADS", "1")
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigurationError(f"LFP_THREADS must be an integer, got {value!r}") from exc


def parse_qp_list(text: str) -> tuple[int, ...]:
    """``25-35`` (inclusive range) or ``25,30,35``."""
    text = text.strip()
    try:
        if "-" in text and "," not in text:
            lo, hi = (int(part) for part in text.split("-", 1))
            qps = tuple(range(lo, hi + 1))
        else:
            qps = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigurationError(f"malformed QP list {text!r}") from exc
    if not qps:
        raise ConfigurationError(f"QP list {text!r} is empty")
    return qps


def format_qp_list(qps: tuple[int, ...]) -> str:
    if len(qps) > 1 and qps == tuple(range(qps[0], qps[-1] + 1)):
        return f"{qps[0]}-{qps[-1]}"
    return ",".join(str(q) for q in qps)


@dataclass(frozen=True)
class Settings:
    qp_list: tuple[int, ...] = tuple(range(25, 36))
    k: int = 8
    n: int = 8
    channels: int = 256
    residual_blocks: int = 32
    kernel: int = 3
    residual_scale: float = 0.1
    lambda_ms: float = 0.95
    lambda_adv: float = 0.05
    lr: float = 1e-4
    batch: int = 32
    plateau_window: int = 6000
    gen_lr: float = 1e-6
    disc_lr: float = 1e-5
    gen_batch: int = 16
    disc_batch: int = 32
    threshold: float = 7.0
    ignore_prob: float = 0.05
    patch_size: int = 48
    block: int = 16
    search_range: int = 31
    fps: float = 25.0
    backend: str = "internal"
    threads: int = field(default_factory=default_threads)

    def __post_init__(self) -> None:
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            if isinstance(value, int | float) and f.name not in ("lambda_adv", "ignore_prob"):
                if value <= 0:
                    raise ConfigurationError(f"{f.name.upper()} must be positive, got {value}")
        if self.lambda_adv < 0 or not 0 <= self.ignore_prob <= 1:
            raise ConfigurationError("LAMBDA_ADV must be >= 0 and IGNORE_PROB within [0, 1]")
        if any(not 1 <= qp <= 51 for qp in self.qp_list):
            raise ConfigurationError(f"QP_LIST values must lie in [1, 51], got {self.qp_list}")
        if self.backend not in ("internal", "external"):
            raise ConfigurationError(f"BACKEND must be internal or external, got {self.backend!r}")

    def lines(self) -> list[str]:
        out = []
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            text = format_qp_list(value) if f.name == "qp_list" else str(value)
            out.append(f"{f.name.upper()}={text}")
        return out


_FIELDS = {f.name: f for f in dataclasses.fields(Settings)}


def _convert(name: str, raw: Any) -> Any:
    if name == "qp_list":
        return parse_qp_list(raw) if isinstance(raw, str) else tuple(int(q) for q in raw)
    kind = _FIELDS[name].type
    try:
        return kind(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"{name.upper()}: cannot read {raw!r} as {kind.__name__}") from exc


def read_config_file(path: Path) -> dict[str, Any]:
    try:
        with open(path) as fh:
            bindings = list(parse_stream(fh))
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    values: dict[str, Any] = {}
    for binding in bindings:
        if binding.error:
            raise ConfigurationError(
                f"{path}:{binding.original.line}: malformed line {binding.original.string!r}"
            )
        if binding.key is None:
            continue
        name = binding.key.lower()
        if name not in _FIELDS:
            raise ConfigurationError(f"{path}:{binding.original.line}: unknown key {binding.key}")
        if binding.value is None:
            raise ConfigurationError(f"{path}:{binding.original.line}: {binding.key} has no value")
        values[name] = _convert(name, binding.value)
    return values


def config_load(
    path: Path | None = None, overrides: Mapping[str, Any] | None = None
) -> Settings:
    """Defaults, overlaid by `path`, overlaid by the non-None `overrides`."""
    values: dict[str, Any] = {}
    if path is not None:
        values.update(read_config_file(path))
    for name, value in (overrides or {}).items():
        if value is None:
            continue
        if name not in _FIELDS:
            raise ConfigurationError(f"unknown setting {name}")
        values[name] = _convert(name, value)
    return Settings(**values)
