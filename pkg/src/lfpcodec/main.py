import argparse
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path

from dotenv import load_dotenv

from .codec import CodecBackend, decode_video, encode_video, stream_rate_report
from .config import Settings, config_load
from .data import (
    PatchDataset,
    extract_patch_samples,
    load_dataset,
    load_frames,
    load_raw_y,
    store_dataset,
    write_frames,
    write_raw_y,
)
from .errors import ConfigurationError, InputError, LfpError, UsageError
from .evaluation import (
    bd_psnr,
    emit_reports,
    import_curve_csv,
    prediction_curve,
    rd_sweep,
    write_bd_csv,
    write_curve_csv,
    write_prediction_csv,
    write_rate_csv,
)
from .evaluation.reports import fmt, write_summary_csv
from .nets import (
    DiscriminatorConfig,
    GeneratorConfig,
    build_discriminator,
    build_generator,
    load_generator,
    save_checkpoint,
)
from .predictors import PredictorKind, compute_residual, make_predictor, residual_preview
from .training import (
    TrainConfigGAN,
    TrainConfigMSE,
    discriminator_bce,
    mse_on,
    train_adversarial,
    train_mse,
)

logger = logging.getLogger(__name__)


class CliParser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    group = common.add_argument_group("global options")
    group.add_argument("--config", type=Path, default=argparse.SUPPRESS, help="dotenv-style settings file")
    group.add_argument(
        "--print-config", action="store_true", default=argparse.SUPPRESS,
        help="print the resolved settings and exit",
    )  # fmt: skip
    group.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (1 = sequential)")
    group.add_argument(
        "--log-level", default=argparse.SUPPRESS,
        help="DEBUG, INFO, WARNING or ERROR (default from LFP_LOG_LEVEL)",
    )  # fmt: skip
    return common


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("--in", dest="inp", help="frame pattern (%%03d), directory or PGM file")
    p.add_argument("--raw", type=Path, help="raw concatenated 8-bit Y file instead of --in")
    p.add_argument("--width", type=int, help="frame width for --raw")
    p.add_argument("--height", type=int, help="frame height for --raw")


def _add_predictor(p: argparse.ArgumentParser, many: bool = False) -> None:
    p.add_argument(
        "--predictor",
        choices=[k.value for k in PredictorKind],
        action="append" if many else "store",
        required=True,
        help="fd, mc or lfp" + (" (repeatable)" if many else ""),
    )
    p.add_argument(
        "--checkpoint", type=Path, action="append" if many else "store",
        help="generator checkpoint for lfp" + (" (one per lfp predictor)" if many else ""),
    )  # fmt: skip
    p.add_argument("--block", type=int, help="motion compensation block size")
    p.add_argument("--search-range", type=int, help="integer motion search range")


def _add_generator_shape(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, help="context frames fed to the generator")
    p.add_argument("--channels", type=int, help="generator feature maps")
    p.add_argument("--residual-blocks", type=int, help="generator residual blocks")
    p.add_argument("--kernel", type=int, help="generator kernel size")
    p.add_argument("--residual-scale", type=float, help="residual block scaling")


def build_parser() -> CliParser:
    common = _common()
    parser = CliParser(
        prog="lfpcodec",
        description="Learned frame prediction video codec and evaluation tools.",
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("extract-dataset", parents=[common], help="cut motion-gated patch sequences")
    p.add_argument("--in", dest="inp", action="append", help="frame pattern of a clip (repeatable)")
    p.add_argument("--count", type=int, required=True, help="samples to extract")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--threshold", type=float, help="minimum MSE between consecutive patches")
    p.add_argument("--ignore-prob", type=float, help="probability of skipping the motion test")
    p.add_argument("--patch-size", type=int, help="patch side in pixels")
    p.add_argument("--length", type=int, help="patches per sample (default N + 1)")
    p.add_argument("--out", type=Path, required=True, help="dataset file")
    p.set_defaults(handler=cmd_extract_dataset)

    p = sub.add_parser("train-mse", parents=[common], help="train the generator on MSE")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--lr", type=float, help="initial learning rate")
    p.add_argument("--batch", type=int, help="minibatch size")
    p.add_argument("--plateau-window", type=int, help="steps without a new minimum before halving")
    p.add_argument("--checkpoint-every", type=int, default=0, help="steps between checkpoints")
    _add_generator_shape(p)
    p.add_argument("--out", type=Path, required=True, help="generator checkpoint")
    p.add_argument("--log", type=Path, help="training log CSV")
    p.set_defaults(handler=cmd_train_mse)

    p = sub.add_parser("train-gan", parents=[common], help="adversarial fine tuning")
    p.add_argument("--dataset", type=Path, required=True)
    p.add_argument("--generator", type=Path, help="pretrained generator checkpoint")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--lambda-ms", type=float)
    p.add_argument("--lambda-adv", type=float)
    p.add_argument("--gen-lr", type=float)
    p.add_argument("--disc-lr", type=float)
    p.add_argument("--gen-batch", type=int)
    p.add_argument("--disc-batch", type=int)
    p.add_argument("--disc-channels", help="discriminator feature maps as A,B (default 64,128)")
    p.add_argument("--holdout", type=int, default=0, help="samples held out for monitoring")
    p.add_argument("--checkpoint-every", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="generator checkpoint")
    p.add_argument("--disc-out", type=Path, help="discriminator checkpoint")
    p.add_argument("--log", type=Path, help="training log CSV")
    p.set_defaults(handler=cmd_train_gan)

    p = sub.add_parser("predict", parents=[common], help="predict frames from original history")
    _add_input(p)
    _add_predictor(p)
    p.add_argument("--out", required=True, help="output pattern for predicted frames")
    p.add_argument("--residual-out", help="output pattern for residual previews")
    p.add_argument(
        "--residual-scale", dest="preview_scale", type=float, default=1.0,
        help="residual preview gain",
    )  # fmt: skip
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("encode", parents=[common], help="encode a clip")
    _add_input(p)
    _add_predictor(p)
    p.add_argument("--qp", type=int, required=True)
    p.add_argument("--k", type=int, help="intra frames before prediction starts")
    p.add_argument("--fps", type=float)
    p.add_argument("--backend", choices=["internal", "external"])
    p.add_argument("--out", type=Path, required=True, help="bitstream file")
    p.add_argument("--report", type=Path, help="per-frame size report CSV")
    p.set_defaults(handler=cmd_encode)

    p = sub.add_parser("decode", parents=[common], help="decode a bitstream")
    p.add_argument("--in", dest="inp", type=Path, required=True, help="bitstream file")
    p.add_argument("--checkpoint", type=Path, help="generator checkpoint for lfp streams")
    p.add_argument("--out", help="output frame pattern (%%03d)")
    p.add_argument("--raw-out", type=Path, help="write one raw Y file instead")
    p.set_defaults(handler=cmd_decode)

    p = sub.add_parser("eval-predict", parents=[common], help="per-frame prediction PSNR")
    _add_input(p)
    _add_predictor(p, many=True)
    p.add_argument("--label", action="append", help="curve label per predictor")
    p.add_argument("--start", type=int, help="first predicted frame, 1-based")
    p.add_argument("--out", type=Path, action="append", help="curve CSV per predictor")
    p.add_argument("--out-dir", type=Path, help="write <label>.prediction.csv files here")
    p.add_argument("--summary", type=Path, help="mean PSNR per predictor CSV")
    p.set_defaults(handler=cmd_eval_predict)

    p = sub.add_parser("rd-sweep", parents=[common], help="rate-distortion curve over QPs")
    _add_input(p)
    _add_predictor(p)
    p.add_argument("--qp-list", help="e.g. 25-35 or 25,30,35")
    p.add_argument("--k", type=int)
    p.add_argument("--fps", type=float)
    p.add_argument("--backend", choices=["internal", "external"])
    p.add_argument("--label", help="curve label")
    p.add_argument("--out", type=Path, required=True, help="curve CSV")
    p.set_defaults(handler=cmd_rd_sweep)

    p = sub.add_parser("bd-psnr", parents=[common], help="Bjontegaard delta PSNR")
    p.add_argument("--test", type=Path, required=True, help="test curve CSV")
    p.add_argument("--anchor", type=Path, required=True, help="anchor curve CSV")
    p.add_argument("--out", type=Path, help="report CSV")
    p.set_defaults(handler=cmd_bd_psnr)
    return parser


_SETTING_FLAGS = (
    "qp_list", "k", "n", "channels", "residual_blocks", "kernel", "residual_scale",
    "lambda_ms", "lambda_adv", "lr", "batch", "plateau_window", "gen_lr", "disc_lr",
    "gen_batch", "disc_batch", "threshold", "ignore_prob", "patch_size", "block",
    "search_range", "fps", "backend", "threads",
)  # fmt: skip


def resolve_settings(args: argparse.Namespace) -> Settings:
    overrides = {name: getattr(args, name, None) for name in _SETTING_FLAGS}
    return config_load(getattr(args, "config", None), overrides)


def _frames(args: argparse.Namespace):
    if args.raw is not None:
        if args.inp is not None:
            raise UsageError("give either --in or --raw, not both")
        if args.width is None or args.height is None:
            raise UsageError("--raw needs --width and --height")
        return load_raw_y(args.raw, args.width, args.height)
    if args.inp is None:
        raise UsageError("an input is required (--in or --raw)")
    return load_frames(args.inp)


def _generator(path: Path | None):
    if path is None:
        raise ConfigurationError("the lfp predictor needs --checkpoint")
    return load_generator(path)


def _predictor(kind: str, checkpoint: Path | None, settings: Settings):
    generator = _generator(checkpoint) if kind == PredictorKind.LFP else None
    return make_predictor(kind, generator, settings.block, settings.search_range)


def _generator_config(settings: Settings) -> GeneratorConfig:
    return GeneratorConfig(
        input_frames=settings.n,
        channels=settings.channels,
        residual_blocks=settings.residual_blocks,
        kernel=settings.kernel,
        residual_scale=settings.residual_scale,
    )


def cmd_extract_dataset(args: argparse.Namespace, settings: Settings) -> int:
    if not args.inp:
        raise UsageError("at least one --in clip is required")
    clips = [load_frames(pattern) for pattern in args.inp]
    result = extract_patch_samples(
        clips,
        args.count,
        args.seed,
        threshold=settings.threshold,
        ignore_prob=settings.ignore_prob,
        side=settings.patch_size,
        length=args.length or settings.n + 1,
    )
    if len(result.samples) == 0:
        raise InputError("no patch sequence passed the motion test")
    size = store_dataset(result.samples, args.out)
    print(
        f"samples={len(result.samples)} requested={result.requested} "
        f"draws={result.draws} unconditional={result.unconditional} bytes={size}"
    )
    return 0


def cmd_train_mse(args: argparse.Namespace, settings: Settings) -> int:
    dataset = load_dataset(args.dataset)
    generator = build_generator(_generator_config(settings), args.seed)
    cfg = TrainConfigMSE(
        steps=args.steps,
        lr0=settings.lr,
        batch=settings.batch,
        plateau_window=settings.plateau_window,
        checkpoint_every=args.checkpoint_every,
        checkpoint_path=args.out,
    )
    result = train_mse(generator, dataset, cfg, args.seed)
    digest = save_checkpoint(result.generator, args.out)
    if args.log is not None:
        result.log.write_csv(args.log)
    print(f"steps={args.steps} loss={result.log.smoothed(args.steps):.6f} digest={digest:016x}")
    return 0


def _disc_channels(text: str | None) -> tuple[int, int]:
    if text is None:
        return DiscriminatorConfig.channels
    try:
        first, second = (int(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--disc-channels must be A,B, got {text!r}") from exc
    return first, second


def cmd_train_gan(args: argparse.Namespace, settings: Settings) -> int:
    if args.generator is None:
        raise ConfigurationError("adversarial training needs --generator (a pretrained checkpoint)")
    generator = load_generator(args.generator)
    dataset = load_dataset(args.dataset)
    held_out: PatchDataset | None = None
    if args.holdout:
        dataset, held_out = dataset.split(args.holdout)
    disc_cfg = DiscriminatorConfig(
        input_frames=dataset.length,
        patch_size=dataset.side,
        channels=_disc_channels(args.disc_channels),
    )
    discriminator = build_discriminator(disc_cfg, args.seed)
    cfg = TrainConfigGAN(
        steps=args.steps,
        lambda_ms=settings.lambda_ms,
        lambda_adv=settings.lambda_adv,
        gen_batch=settings.gen_batch,
        disc_batch=settings.disc_batch,
        gen_lr=settings.gen_lr,
        disc_lr=settings.disc_lr,
        checkpoint_every=args.checkpoint_every,
        checkpoint_path=args.out,
        disc_checkpoint_path=args.disc_out,
    )
    result = train_adversarial(generator, discriminator, dataset, cfg, args.seed)
    digest = save_checkpoint(result.generator, args.out)
    if args.disc_out is not None:
        save_checkpoint(result.discriminator, args.disc_out)
    if args.log is not None:
        result.log.write_csv(args.log)
    line = f"steps={args.steps} loss={result.log.smoothed(args.steps):.6f} digest={digest:016x}"
    if held_out is not None and len(held_out):
        bce = discriminator_bce(result.generator, result.discriminator, held_out)
        line += f" heldout_bce={bce:.6f} heldout_mse={mse_on(result.generator, held_out):.6f}"
    print(line)
    return 0


def cmd_predict(args: argparse.Namespace, settings: Settings) -> int:
    frames = _frames(args)
    predictor = _predictor(args.predictor, args.checkpoint, settings)
    needed = predictor.history
    if len(frames) <= needed:
        raise InputError(f"clip of {len(frames)} frames is too short for {needed} frames of history")
    predicted, previews = [], []
    for t in range(needed, len(frames)):
        frame = predictor.predict(frames[t - needed : t], frames[t]).frame
        predicted.append(frame)
        if args.residual_out:
            previews.append(residual_preview(compute_residual(frames[t], frame), args.preview_scale))
    write_frames(predicted, args.out)
    if args.residual_out:
        write_frames(previews, args.residual_out)
    print(f"predicted={len(predicted)} first_frame={needed + 1}")
    return 0


def cmd_encode(args: argparse.Namespace, settings: Settings) -> int:
    frames = _frames(args)
    predictor = _predictor(args.predictor, args.checkpoint, settings)
    backend = CodecBackend.resolve(settings.backend)
    result = encode_video(frames, predictor, args.qp, settings.k, backend, settings.fps)
    try:
        args.out.write_bytes(result.bitstream)
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc}") from exc
    if args.report is not None:
        write_rate_csv(result.report, args.report)
    report = result.report
    print(
        f"frames={len(frames)} bytes={len(result.bitstream)} "
        f"mv_bits={report.mv_bits} mv_entropy_bits={report.mv_entropy_bits:.1f} "
        f"residual_bits={report.residual_bits}"
    )
    return 0


def cmd_decode(args: argparse.Namespace, settings: Settings) -> int:
    if (args.out is None) == (args.raw_out is None):
        raise UsageError("give exactly one of --out or --raw-out")
    try:
        data = args.inp.read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read {args.inp}: {exc}") from exc
    report = stream_rate_report(data)
    generator = load_generator(args.checkpoint) if args.checkpoint is not None else None
    frames = decode_video(data, generator)
    if args.raw_out is not None:
        write_raw_y(frames, args.raw_out)
    else:
        write_frames(frames, args.out)
    print(f"frames={len(frames)} total_bits={report.total_bits}")
    return 0


def cmd_eval_predict(args: argparse.Namespace, settings: Settings) -> int:
    frames = _frames(args)
    kinds = args.predictor
    checkpoints = list(args.checkpoint or [])
    if sum(1 for k in kinds if k == PredictorKind.LFP) != len(checkpoints):
        raise UsageError("give one --checkpoint per lfp predictor")
    labels = args.label or []
    if labels and len(labels) != len(kinds):
        raise UsageError("give one --label per predictor")
    if args.out and len(args.out) != len(kinds):
        raise UsageError("give one --out per predictor")
    if not args.out and args.out_dir is None:
        raise UsageError("give --out per predictor or --out-dir")

    predictors = []
    for kind in kinds:
        checkpoint = checkpoints.pop(0) if kind == PredictorKind.LFP else None
        predictors.append(_predictor(kind, checkpoint, settings))
    # shared starting frame so the curves line up
    start = max(p.history for p in predictors) if args.start is None else args.start - 1
    curves = []
    for index, predictor in enumerate(predictors):
        label = labels[index] if labels else f"{predictor.kind}" + (
            f"-{index + 1}" if kinds.count(kinds[index]) > 1 else ""
        )
        curves.append(prediction_curve(frames, predictor, start=start, label=label))
    if args.out:
        for curve, path in zip(curves, args.out):
            write_prediction_csv(curve, path)
    if args.out_dir is not None:
        emit_reports(args.out_dir, predictions=curves)
    if args.summary is not None:
        write_summary_csv(curves, args.summary)
    for curve in curves:
        print(f"{curve.label}: frames={len(curve)} mean_psnr={fmt(curve.mean)}")
    return 0


def cmd_rd_sweep(args: argparse.Namespace, settings: Settings) -> int:
    frames = _frames(args)
    predictor = _predictor(args.predictor, args.checkpoint, settings)
    backend = CodecBackend.resolve(settings.backend)
    curve = rd_sweep(
        frames,
        predictor,
        settings.qp_list,
        backend,
        k=settings.k,
        fps=settings.fps,
        threads=settings.threads,
        label=args.label,
    )
    write_curve_csv(curve, args.out)
    print(f"points={len(curve)}")
    return 0


def cmd_bd_psnr(args: argparse.Namespace, settings: Settings) -> int:
    test, anchor = import_curve_csv(args.test), import_curve_csv(args.anchor)
    value = bd_psnr(test, anchor)
    if args.out is not None:
        write_bd_csv([(test.label, anchor.label, value)], args.out)
    print(fmt(value))
    return 0


def _configure_logging(level: str | None) -> None:
    name = (level or os.getenv("LFP_LOG_LEVEL", "WARNING")).upper()
    if name not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        raise UsageError(f"unknown log level {name}")
    logging.basicConfig(
        level=name,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


def run(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(getattr(args, "log_level", None))
        settings = resolve_settings(args)
        if getattr(args, "print_config", False):
            print("\n".join(settings.lines()))
            return 0
        if args.command is None:
            raise UsageError("a command is required (see --help)")
        return args.handler(args, settings)
    except SystemExit as exc:
        # --help
        return exc.code if isinstance(exc.code, int) else 0
    except LfpError as exc:
        print(f"ERROR:{exc.category}:{exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"ERROR:input:{exc}", file=sys.stderr)
        return InputError.exit_code
