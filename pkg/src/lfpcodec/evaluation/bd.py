"""Rate-distortion curves and the Bjontegaard delta PSNR."""

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DomainError, InputError, ParseError

CURVE_COLUMNS = ["label", "qp", "bitrate_kbps", "psnr_db"]
MIN_POINTS = 4


@dataclass(frozen=True)
class RDPoint:
    bitrate: float  # kbit/s
    psnr: float  # dB
    qp: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.bitrate) and self.bitrate > 0):
            raise InputError(f"bitrate must be positive, got {self.bitrate}")
        if not math.isfinite(self.psnr):
            raise InputError(f"PSNR must be finite, got {self.psnr}")


@dataclass
class RDCurve:
    label: str
    points: list[RDPoint] = field(default_factory=list)

    def __post_init__(self) -> None:
        rates = [p.bitrate for p in self.points]
        if len(set(rates)) != len(rates):
            raise InputError(f"curve {self.label!r} repeats a bitrate")

    def __len__(self) -> int:
        return len(self.points)

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.bitrate for p in self.points], dtype=np.float64)

    @property
    def psnrs(self) -> np.ndarray:
        return np.array([p.psnr for p in self.points], dtype=np.float64)


def _fit(curve: RDCurve) -> tuple[np.ndarray, float, float]:
    if len(curve) < MIN_POINTS:
        raise InputError(
            f"curve {curve.label!r} has {len(curve)} points, BD-PSNR needs {MIN_POINTS}"
        )
    log_rate = np.log10(curve.rates)
    return np.polyfit(log_rate, curve.psnrs, 3), float(log_rate.min()), float(log_rate.max())


def bd_psnr(test: RDCurve, anchor: RDCurve) -> float:
    """Average PSNR gap of `test` over `anchor` on their shared log-rate range.

    Positive values mean `test` delivers more quality at equal rate.
    """
    fit_test, lo_test, hi_test = _fit(test)
    fit_anchor, lo_anchor, hi_anchor = _fit(anchor)
    lo, hi = max(lo_test, lo_anchor), min(hi_test, hi_anchor)
    if hi <= lo:
        raise DomainError(
            f"curves {test.label!r} and {anchor.label!r} share no bitrate range"
        )
    int_test, int_anchor = np.polyint(fit_test), np.polyint(fit_anchor)
    area_test = np.polyval(int_test, hi) - np.polyval(int_test, lo)
    area_anchor = np.polyval(int_anchor, hi) - np.polyval(int_anchor, lo)
    return float((area_test - area_anchor) / (hi - lo))


def import_curve_csv(path: Path) -> RDCurve:
    """Read a curve written as ``label,qp,bitrate_kbps,psnr_db``."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not rows or [c.strip() for c in rows[0]] != CURVE_COLUMNS:
        raise ParseError(f"header must be {','.join(CURVE_COLUMNS)}", line=1)

    label: str | None = None
    points: list[RDPoint] = []
    seen: set[float] = set()
    for line, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(CURVE_COLUMNS):
            raise ParseError(f"expected {len(CURVE_COLUMNS)} fields, got {len(row)}", line)
        name = row[0].strip()
        try:
            point = RDPoint(bitrate=float(row[2]), psnr=float(row[3]), qp=int(row[1]))
        except ValueError as exc:
            raise ParseError(f"malformed number: {exc}", line) from exc
        except InputError as exc:
            raise ParseError(str(exc), line) from exc
        if label is None:
            label = name
        elif name != label:
            raise ParseError(f"label {name!r} differs from {label!r}", line)
        if point.bitrate in seen:
            raise ParseError(f"bitrate {point.bitrate} appears twice", line)
        seen.add(point.bitrate)
        points.append(point)
    if not points:
        raise ParseError("no data rows", line=2)
    return RDCurve(label or "", points)
