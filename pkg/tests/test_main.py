import numpy as np
from lfpcodec.codec import encode_video
from lfpcodec.data import Frame, load_frames, write_frames
from lfpcodec.evaluation import RDCurve, RDPoint, write_curve_csv
from lfpcodec.main import run
from lfpcodec.nets import GeneratorConfig, build_generator, save_checkpoint
from lfpcodec.predictors import FrameDifferencePredictor

TINY = GeneratorConfig(input_frames=2, channels=3, residual_blocks=1)


def _clip(tmp_path, count=10):
    rng = np.random.default_rng(0)
    coarse = rng.integers(0, 256, (6, 12))
    texture = np.kron(coarse, np.ones((4, 4))).astype(np.uint8)
    frames = [Frame(texture[:, t : t + 32].copy()) for t in range(count)]
    write_frames(frames, tmp_path / "clip" / "%03d.pgm")
    return frames, str(tmp_path / "clip" / "%03d.pgm")


def test_help_exits_cleanly(capsys):
    assert run(["--help"]) == 0
    assert "encode" in capsys.readouterr().out


def test_missing_command_is_a_usage_error(capsys):
    assert run([]) == 1
    assert capsys.readouterr().err.startswith("ERROR:usage:")


def test_unknown_flag_is_a_usage_error(capsys):
    assert run(["encode", "--bogus"]) == 1
    assert "ERROR:usage:" in capsys.readouterr().err


def test_print_config(tmp_path, capsys):
    assert run(["--print-config"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert "QP_LIST=25-35" in out and "K=8" in out

    cfg = tmp_path / "lfp.env"
    cfg.write_text("K=4\n")
    argv = ["encode", "--predictor", "fd", "--qp", "30", "--out", "x.bin"]
    assert run([*argv, "--config", str(cfg), "--print-config"]) == 0
    assert "K=4" in capsys.readouterr().out.splitlines()
    assert run([*argv, "--config", str(cfg), "--k", "3", "--print-config"]) == 0
    assert "K=3" in capsys.readouterr().out.splitlines()


def test_bad_thread_environment_is_a_config_error(monkeypatch, capsys):
    monkeypatch.setenv("LFP_THREADS", "four")
    assert run(["--print-config"]) == 1
    assert capsys.readouterr().err.startswith("ERROR:config:LFP_THREADS")


def test_malformed_config_file(tmp_path, capsys):
    cfg = tmp_path / "lfp.env"
    cfg.write_text("K 4\n")
    assert run(["--config", str(cfg), "--print-config"]) == 1
    assert capsys.readouterr().err.startswith("ERROR:config:")


def test_missing_input_is_an_input_error(tmp_path, capsys):
    argv = ["encode", "--predictor", "fd", "--qp", "30", "--out", str(tmp_path / "s.bin")]
    assert run([*argv, "--in", str(tmp_path / "none" / "%03d.pgm")]) == 2
    assert capsys.readouterr().err.startswith("ERROR:input:")


def test_encode_decode_round_trip(tmp_path, capsys):
    frames, pattern = _clip(tmp_path)
    stream = tmp_path / "s.bin"
    argv = ["encode", "--in", pattern, "--predictor", "fd", "--qp", "30", "--k", "2"]
    assert run([*argv, "--out", str(stream), "--report", str(tmp_path / "r.csv")]) == 0
    expected = encode_video(frames, FrameDifferencePredictor(), 30, k=2)
    assert stream.read_bytes() == expected.bitstream
    assert (tmp_path / "r.csv").read_text().startswith("frame,type,mv_bits")

    out = tmp_path / "decoded" / "%03d.pgm"
    assert run(["decode", "--in", str(stream), "--out", str(out)]) == 0
    assert load_frames(str(out)) == expected.reconstructions
    assert "frames=10" in capsys.readouterr().out


def test_decode_with_the_wrong_checkpoint(tmp_path, capsys):
    _, pattern = _clip(tmp_path)
    good, bad = tmp_path / "good.ckpt", tmp_path / "bad.ckpt"
    save_checkpoint(build_generator(TINY, seed=0), good)
    save_checkpoint(build_generator(TINY, seed=1), bad)
    stream = tmp_path / "s.bin"
    argv = ["encode", "--in", pattern, "--predictor", "lfp", "--checkpoint", str(good)]
    assert run([*argv, "--qp", "30", "--k", "2", "--out", str(stream)]) == 0
    capsys.readouterr()

    out = str(tmp_path / "d" / "%03d.pgm")
    assert run(["decode", "--in", str(stream), "--checkpoint", str(bad), "--out", out]) == 3
    assert capsys.readouterr().err.startswith("ERROR:model:digest mismatch")
    assert run(["decode", "--in", str(stream), "--checkpoint", str(good), "--out", out]) == 0


def test_bd_psnr_of_identical_curves(tmp_path, capsys):
    rows = [(100, 30, 35), (200, 33, 32), (400, 35, 29), (800, 37, 26)]
    points = [RDPoint(r, p, q) for r, p, q in rows]
    write_curve_csv(RDCurve("a", points), tmp_path / "a.csv")
    write_curve_csv(RDCurve("b", points), tmp_path / "b.csv")
    argv = ["bd-psnr", "--test", str(tmp_path / "a.csv"), "--anchor", str(tmp_path / "b.csv")]
    assert run([*argv, "--out", str(tmp_path / "bd.csv")]) == 0
    assert capsys.readouterr().out.strip() == "0.000000"
    assert (tmp_path / "bd.csv").read_text() == "test,anchor,bd_psnr_db\na,b,0.000000\n"


def test_bd_psnr_with_too_few_points(tmp_path, capsys):
    write_curve_csv(RDCurve("a", [RDPoint(100, 30, 35)]), tmp_path / "a.csv")
    argv = ["bd-psnr", "--test", str(tmp_path / "a.csv"), "--anchor", str(tmp_path / "a.csv")]
    assert run(argv) == 2
    assert capsys.readouterr().err.startswith("ERROR:input:")


def test_eval_predict_writes_aligned_curves(tmp_path, capsys):
    _, pattern = _clip(tmp_path)
    ckpt = tmp_path / "g.ckpt"
    save_checkpoint(build_generator(TINY, seed=0), ckpt)
    argv = ["eval-predict", "--in", pattern, "--predictor", "fd", "--predictor", "lfp"]
    argv += ["--checkpoint", str(ckpt), "--out-dir", str(tmp_path / "reports")]
    assert run(argv) == 0
    fd = (tmp_path / "reports" / "fd.prediction.csv").read_text().splitlines()
    lfp = (tmp_path / "reports" / "lfp.prediction.csv").read_text().splitlines()
    assert fd[1].startswith("3,") and lfp[1].startswith("3,")
    assert len(fd) == len(lfp) == 9
    assert (tmp_path / "reports" / "prediction-summary.csv").exists()


def test_extract_and_train(tmp_path, capsys):
    _, pattern = _clip(tmp_path, count=12)
    dataset = tmp_path / "train.lfpd"
    extract = ["extract-dataset", "--in", pattern, "--count", "4", "--seed", "0"]
    extract += ["--ignore-prob", "1", "--patch-size", "16", "--length", "3", "--out", str(dataset)]
    assert run(extract) == 0
    assert "samples=4" in capsys.readouterr().out

    train = ["train-mse", "--dataset", str(dataset), "--seed", "0", "--steps", "3"]
    train += ["--n", "2", "--channels", "2", "--residual-blocks", "1", "--batch", "2"]
    assert run([*train, "--out", str(tmp_path / "g.ckpt"), "--log", str(tmp_path / "log.csv")]) == 0
    assert (tmp_path / "g.ckpt").exists()
    assert len((tmp_path / "log.csv").read_text().splitlines()) == 4
