import numpy as np
import pytest
from lfpcodec.errors import DomainError, InputError, ParseError
from lfpcodec.evaluation import (
    PredictionCurve,
    RDCurve,
    RDPoint,
    bd_psnr,
    emit_reports,
    import_curve_csv,
    write_bd_csv,
    write_curve_csv,
    write_prediction_csv,
)
from scipy.integrate import trapezoid


def _curve(label, rates, psnrs, qps=(35, 32, 29, 26)):
    return RDCurve(label, [RDPoint(r, p, q) for r, p, q in zip(rates, psnrs, qps)])


ANCHOR = _curve("fd", [100, 200, 400, 800], [30.0, 33.0, 35.5, 37.5])
TEST = _curve("lfp", [120, 250, 500, 1000], [31.0, 33.5, 36.0, 37.9])


def _oracle(test, anchor, samples=100_000):
    lo = max(np.log10(test.rates).min(), np.log10(anchor.rates).min())
    hi = min(np.log10(test.rates).max(), np.log10(anchor.rates).max())
    x = np.linspace(lo, hi, samples)
    gap = np.polyval(np.polyfit(np.log10(test.rates), test.psnrs, 3), x) - np.polyval(
        np.polyfit(np.log10(anchor.rates), anchor.psnrs, 3), x
    )
    return trapezoid(gap, x) / (hi - lo)


def test_identical_curves_have_no_gap():
    assert bd_psnr(ANCHOR, ANCHOR) == pytest.approx(0.0, abs=1e-9)


def test_constant_offset():
    shifted = _curve("up", ANCHOR.rates, ANCHOR.psnrs + 1.0)
    assert bd_psnr(shifted, ANCHOR) == pytest.approx(1.0, abs=1e-9)


def test_antisymmetric():
    assert bd_psnr(TEST, ANCHOR) == pytest.approx(-bd_psnr(ANCHOR, TEST), abs=1e-12)


def test_matches_numerical_integration():
    assert bd_psnr(TEST, ANCHOR) == pytest.approx(_oracle(TEST, ANCHOR), abs=1e-4)


def test_point_order_does_not_matter():
    reordered = RDCurve("lfp", list(reversed(TEST.points)))
    assert bd_psnr(reordered, ANCHOR) == pytest.approx(bd_psnr(TEST, ANCHOR), abs=1e-9)


def test_needs_four_points():
    short = _curve("short", [100, 200, 400], [30, 31, 32])
    with pytest.raises(InputError, match="4"):
        bd_psnr(short, ANCHOR)


def test_disjoint_rate_ranges():
    far = _curve("far", [1000, 2000, 4000, 8000], [40, 41, 42, 43])
    with pytest.raises(DomainError):
        bd_psnr(far, ANCHOR)


def test_point_validation():
    with pytest.raises(InputError):
        RDPoint(0.0, 30.0, 25)
    with pytest.raises(InputError):
        RDPoint(100.0, float("inf"), 25)
    with pytest.raises(InputError, match="repeats"):
        _curve("dup", [100, 100, 200, 400], [30, 31, 32, 33])


def test_curve_csv_round_trip(tmp_path):
    path = write_curve_csv(ANCHOR, tmp_path / "fd.rd.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "label,qp,bitrate_kbps,psnr_db"
    assert lines[1] == "fd,35,100.000000,30.000000"
    curve = import_curve_csv(path)
    assert curve.label == "fd"
    assert curve.points == ANCHOR.points


def _write(tmp_path, text):
    path = tmp_path / "curve.csv"
    path.write_text(text)
    return path


def test_import_rejects_bad_header(tmp_path):
    with pytest.raises(ParseError, match="line 1"):
        import_curve_csv(_write(tmp_path, "qp,rate\n25,100\n"))


def test_import_reports_the_offending_line(tmp_path):
    text = "label,qp,bitrate_kbps,psnr_db\nfd,25,100,30\nfd,26,-5,29\n"
    with pytest.raises(ParseError, match="line 3") as info:
        import_curve_csv(_write(tmp_path, text))
    assert info.value.line == 3


def test_import_rejects_duplicates_and_garbage(tmp_path):
    dup = "label,qp,bitrate_kbps,psnr_db\nfd,25,100,30\nfd,26,100,29\n"
    with pytest.raises(ParseError, match="twice"):
        import_curve_csv(_write(tmp_path, dup))
    garbage = "label,qp,bitrate_kbps,psnr_db\nfd,25,abc,30\n"
    with pytest.raises(ParseError, match="line 2"):
        import_curve_csv(_write(tmp_path, garbage))
    mixed = "label,qp,bitrate_kbps,psnr_db\nfd,25,100,30\nmc,26,90,29\n"
    with pytest.raises(ParseError, match="label"):
        import_curve_csv(_write(tmp_path, mixed))


def test_reports_are_byte_stable(tmp_path):
    a = write_bd_csv([("lfp", "fd", bd_psnr(TEST, ANCHOR))], tmp_path / "a.csv")
    b = write_bd_csv([("lfp", "fd", bd_psnr(TEST, ANCHOR))], tmp_path / "b.csv")
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().startswith("test,anchor,bd_psnr_db\nlfp,fd,")


def test_prediction_csv_writes_inf(tmp_path):
    curve = PredictionCurve("fd", [2, 3], [float("inf"), 31.25])
    path = write_prediction_csv(curve, tmp_path / "p.csv")
    assert path.read_text() == "frame,psnr_db\n2,inf\n3,31.250000\n"


def test_emit_reports_names_files_by_label(tmp_path):
    out = tmp_path / "reports"
    written = emit_reports(out, [ANCHOR, TEST], [PredictionCurve("fd", [2], [30.0])])
    names = sorted(p.name for p in written)
    assert names == [
        "fd.prediction.csv",
        "fd.rd.csv",
        "lfp.rd.csv",
        "prediction-summary.csv",
    ]
    summary = (out / "prediction-summary.csv").read_text().splitlines()
    assert summary == ["label,frames,mean_psnr_db,psnr_cap_db", "fd,1,30.000000,99.000000"]
