"""CSV reports with stable formatting (six decimals, ``inf`` for lossless)."""

import csv
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

from ..codec import RateReport
from ..errors import InputError
from .bd import CURVE_COLUMNS, RDCurve
from .metrics import PSNR_CAP, PredictionCurve


def fmt(value: float) -> str:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return f"{value:.6f}"


def _write(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    path = Path(path)
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc
    return path


def write_curve_csv(curve: RDCurve, path: Path) -> Path:
    return _write(
        path,
        CURVE_COLUMNS,
        ([curve.label, p.qp, fmt(p.bitrate), fmt(p.psnr)] for p in curve.points),
    )


def write_prediction_csv(curve: PredictionCurve, path: Path) -> Path:
    return _write(
        path, ["frame", "psnr_db"], ([n, fmt(v)] for n, v in zip(curve.frames, curve.psnr))
    )


def write_bd_csv(rows: Iterable[tuple[str, str, float]], path: Path) -> Path:
    return _write(
        path, ["test", "anchor", "bd_psnr_db"], ([t, a, fmt(v)] for t, a, v in rows)
    )


def write_rate_csv(report: RateReport, path: Path) -> Path:
    rows: list[list[object]] = [["header", "", 0, 0, report.header_bits]]
    rows += [
        [f.index, f.kind.name.lower(), f.mv_bits, f.residual_bits, f.chunk_bits]
        for f in report.frames
    ]
    return _write(path, ["frame", "type", "mv_bits", "residual_bits", "chunk_bits"], rows)


def write_summary_csv(curves: Sequence[PredictionCurve], path: Path) -> Path:
    """Mean prediction PSNR per curve, with the cap used for lossless frames."""
    return _write(
        path,
        ["label", "frames", "mean_psnr_db", "psnr_cap_db"],
        ([c.label, len(c), fmt(c.mean), fmt(PSNR_CAP)] for c in curves),
    )


def emit_reports(
    out_dir: Path,
    curves: Sequence[RDCurve] = (),
    predictions: Sequence[PredictionCurve] = (),
) -> list[Path]:
    """Write one CSV per result into `out_dir`, named after its label."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise InputError(f"cannot create {out_dir}: {exc}") from exc
    written = [write_curve_csv(c, out_dir / f"{c.label}.rd.csv") for c in curves]
    written += [
        write_prediction_csv(p, out_dir / f"{p.label}.prediction.csv") for p in predictions
    ]
    if predictions:
        written.append(write_summary_csv(predictions, out_dir / "prediction-summary.csv"))
    return written
