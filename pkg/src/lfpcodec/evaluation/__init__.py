from .bd import RDCurve, RDPoint, bd_psnr, import_curve_csv
from .metrics import (
    PSNR_CAP,
    PredictionCurve,
    bitrate,
    bitrate_from_file,
    mean_psnr,
    prediction_curve,
    psnr,
)
from .reports import (
    emit_reports,
    write_bd_csv,
    write_curve_csv,
    write_prediction_csv,
    write_rate_csv,
)
from .sweep import DEFAULT_QPS, rd_point, rd_sweep

__all__ = [
    "DEFAULT_QPS",
    "PSNR_CAP",
    "PredictionCurve",
    "RDCurve",
    "RDPoint",
    "bd_psnr",
    "bitrate",
    "bitrate_from_file",
    "emit_reports",
    "import_curve_csv",
    "mean_psnr",
    "prediction_curve",
    "psnr",
    "rd_point",
    "rd_sweep",
    "write_bd_csv",
    "write_curve_csv",
    "write_prediction_csv",
    "write_rate_csv",
]
