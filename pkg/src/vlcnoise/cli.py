"""Command-line entry point.

Every command writes its outputs plus a ``<command>.manifest.json`` into
``--output-dir``; ``vlcnoise replay <manifest>`` re-executes the recorded
command and reproduces the outputs bit for bit.

Exit codes: 0 success, 1 usage, 2 data/validation, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .allan import allan_variance, central_decades, default_cluster_grid, extract_coefficients, fit_slope
from .cae import AdamConfig, CaeArchitecture, CaeModel, TrainConfig, rmse, split_indices, train
from .cae.serialize import load_model_with_metadata, save_model
from .dataset import build_dataset, load_dataset, save_dataset, sub_seed
from .errors import DataError, NumericalError
from .signals import ChannelParams, OokPattern, TimeSeries, load_capture, normalize_unit, save_capture
from .stattests import ljung_box
from .synth import NoiseComponent, NoiseRecipe, synthesize

log = logging.getLogger("vlcnoise")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

# argparse destinations holding input paths; absolutized in manifests
_INPUT_PATH_ATTRS = ("input", "inputs", "dataset", "model", "denoised", "clean")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# -- argument types ----------------------------------------------------------


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _positive_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {v}")
    return v


def _alpha(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not 0.0 <= v <= 2.0:
        raise argparse.ArgumentTypeError(f"alpha must lie in [0, 2], got {v}")
    return v


def _probability(text):
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {v}")
    return v


def _component(text):
    try:
        return NoiseComponent.parse(text)
    except DataError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _int_list(text):
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return vals


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _optional_norm(text):
    if text.lower() in ("none", "off"):
        return None
    return _positive_float(text)


# -- output helpers -----------------------------------------------------------


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _write_json(path: Path, obj):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


class _Run:
    """Collects outputs of one command and writes its manifest."""

    def __init__(self, args, command):
        self.args = args
        self.command = command
        self.out_dir = Path(args.output_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.outputs = []

    def path(self, name):
        p = self.out_dir / name
        self.outputs.append(name)
        return p

    def write_manifest(self, argv, parameters):
        name = self.command.replace(" ", "-") + ".manifest.json"
        manifest = {
            "tool": "vlcnoise",
            "version": __version__,
            "command": self.command,
            "argv": argv,
            "seed": self.args.seed,
            "parameters": parameters,
            "inputs": [str(Path(p).resolve()) for p in _input_paths(self.args)],
            "output_dir": str(self.out_dir.resolve()),
            "outputs": self.outputs,
        }
        _write_json(self.out_dir / name, manifest)


def _input_paths(args):
    paths = []
    for attr in _INPUT_PATH_ATTRS:
        v = getattr(args, attr, None)
        if v is None:
            continue
        paths.extend(v if isinstance(v, list) else [v])
    return paths


# -- commands -------------------------------------------------------------------


def cmd_analyze(args, run: _Run):
    ts = load_capture(args.input)
    if args.analysis == "ljung-box":
        res = ljung_box(ts, args.max_lag, args.alpha, demean=not args.raw)
        _write_csv(run.path("ljung_box.csv"), ["lag", "q_stat", "threshold", "reject"], res.rows())
        _write_json(run.path("ljung_box.json"), {
            "n_samples": res.n_samples,
            "alpha": res.alpha,
            "max_lag": args.max_lag,
            "demean": not args.raw,
            "rejected_lags": int(res.reject.sum()),
            "all_rejected": bool(res.reject.all()),
        })
        print(f"rejected H0 at {int(res.reject.sum())}/{args.max_lag} lags")
        return
    curve = allan_variance(ts, default_cluster_grid(len(ts), args.points_per_decade))
    if args.analysis == "avar":
        _write_csv(run.path("avar.csv"), ["tau_s", "avar", "adev"], zip(curve.taus, curve.avar, curve.adev))
        summary = {"n_samples": curve.n_samples, "sample_rate_hz": curve.sample_rate_hz,
                   "points": len(curve)}
        if np.log10(curve.taus[-1] / curve.taus[0]) >= 1:
            lo, hi = central_decades(curve, 3.0)
            seg = fit_slope(curve, lo, hi)
            summary["central_slope"] = {"tau_min": seg.tau_min, "tau_max": seg.tau_max, "slope": seg.slope}
        _write_json(run.path("avar.json"), summary)
        print(f"wrote {len(curve)} Allan variance points")
        return
    coeffs = extract_coefficients(curve, tolerance=args.tolerance, min_clusters=args.min_clusters)
    obj = coeffs.to_dict()
    obj["n_samples"] = curve.n_samples
    obj["sample_rate_hz"] = curve.sample_rate_hz
    _write_json(run.path("coeffs.json"), obj)
    print(json.dumps({k: obj[k] for k in ("white_n", "flicker_b", "random_walk_k")}))


def _recipe_components(args):
    if args.component:
        return list(args.component)
    if args.alpha is None:
        raise UsageError("synth: give --alpha/--sigma or at least one --component")
    return [NoiseComponent(args.alpha, args.sigma, 1.0)]


def cmd_synth(args, run: _Run):
    recipe = NoiseRecipe(tuple(_recipe_components(args)), args.length, args.seed, args.mean,
                         args.sample_rate, args.discard_prefix)
    ts = synthesize(recipe, label=args.label)
    save_capture(ts, run.path(f"{args.name}.{args.format}"), args.format)
    _write_json(run.path(f"{args.name}.recipe.json"), recipe.to_dict())
    print(f"wrote {len(ts)} samples")


def cmd_dataset(args, run: _Run):
    pattern = OokPattern(args.on_ms * 1e-3, args.off_ms * 1e-3, args.amp_on, args.amp_off, 1)
    recipe = NoiseRecipe(tuple(args.component), args.input_length, 0, args.noise_mean,
                         args.sample_rate, 0)
    channel = ChannelParams(args.responsivity, tuple(args.taps), args.dc_offset)
    ds = build_dataset(args.count, pattern, recipe, args.input_length, args.sample_rate,
                       channel, seed=args.seed, label=args.label, holdout_fraction=args.holdout)
    d = save_dataset(ds, run.out_dir / args.name)
    run.outputs += [f"{args.name}/manifest.json", f"{args.name}/noisy.npy", f"{args.name}/clean.npy"]
    print(f"wrote {len(ds)} pairs to {d}")


def cmd_train(args, run: _Run):
    ds = load_dataset(args.dataset)
    arch = CaeArchitecture.from_filters(ds.input_length, args.filters, args.kernel_size, args.stride)
    holdout = args.holdout if args.holdout is not None else ds.metadata.get("holdout_fraction", 0.3)
    split_seed = sub_seed(args.seed, 1)
    cfg = TrainConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        adam=AdamConfig(args.lr, args.beta1, args.beta2, args.epsilon),
        seed=split_seed,
        max_norm=args.max_norm,
        holdout_fraction=holdout,
    )
    model = CaeModel.initialize(arch, sub_seed(args.seed, 0))
    model, hist = train(model, ds.noisy, ds.clean, cfg)
    save_model(model, run.path("model.cae"), extra={
        "split_seed": split_seed,
        "holdout_fraction": holdout,
        "train_config": {"epochs": cfg.epochs, "batch_size": cfg.batch_size, "lr": cfg.adam.lr,
                         "beta1": cfg.adam.beta1, "beta2": cfg.adam.beta2,
                         "epsilon": cfg.adam.epsilon, "max_norm": cfg.max_norm},
    })
    _write_csv(run.path("loss_history.csv"), ["epoch", "train_loss", "holdout_loss"], hist.rows())
    print(f"final train loss {hist.train_loss[-1]:.6g}")


def cmd_denoise(args, run: _Run):
    model, _ = load_model_with_metadata(args.model)
    for src in args.inputs:
        ts = load_capture(src)
        if len(ts) != model.architecture.input_length:
            raise DataError(
                f"{src}: capture has {len(ts)} samples but the model expects "
                f"input_length {model.architecture.input_length}"
            )
        out = model.denoise(normalize_unit(ts).samples)[0]
        save_capture(TimeSeries(out, ts.sample_rate_hz, ts.label),
                     run.path(f"denoised_{Path(src).stem}.{args.format}"), args.format)
    print(f"denoised {len(args.inputs)} capture(s)")


def cmd_eval(args, run: _Run):
    rows = []
    if args.denoised is not None or args.clean is not None:
        if args.denoised is None or args.clean is None or args.model or args.dataset:
            raise UsageError("eval: use either --model/--dataset or --denoised/--clean")
        a, b = load_capture(args.denoised), load_capture(args.clean)
        rows.append((b.label or "capture", "pair", 1, float("nan"), rmse(a, b)))
    else:
        if args.model is None or args.dataset is None:
            raise UsageError("eval: --model and --dataset are required")
        model, meta = load_model_with_metadata(args.model)
        ds = load_dataset(args.dataset)
        if ds.input_length != model.architecture.input_length:
            raise DataError(f"dataset length {ds.input_length} != model input_length "
                            f"{model.architecture.input_length}")
        if args.split == "all":
            idx = np.arange(len(ds))
        else:
            _, idx = split_indices(len(ds), meta.get("holdout_fraction", 0.3), meta.get("split_seed", 0))
        labels = np.asarray(ds.labels, dtype=object)
        denoised = model.denoise(ds.noisy[idx])
        for label in sorted(set(labels[idx])):
            sel = labels[idx] == label
            rows.append((label, args.split, int(sel.sum()),
                         rmse(ds.noisy[idx][sel], ds.clean[idx][sel]),
                         rmse(denoised[sel], ds.clean[idx][sel])))
    _write_csv(run.path("rmse.csv"), ["label", "split", "count", "rmse_noisy", "rmse_denoised"], rows)
    for r in rows:
        print(f"{r[0]}: rmse_noisy={_fmt(r[3])} rmse_denoised={_fmt(r[4])}")


def cmd_replay(args):
    manifest = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    argv = list(manifest["argv"])
    out_dir = args.output_dir if args.output_dir is not None else manifest["output_dir"]
    return main(argv + ["--output-dir", str(out_dir)])


# -- parser -----------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed for all randomness")
    common.add_argument("--output-dir", default=".", help="directory for outputs and the manifest")
    common.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="capture file format for written signals")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="vlcnoise", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"vlcnoise {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    pa = sub.add_parser("analyze", help="Ljung-Box, Allan variance or noise coefficients of a capture")
    asub = pa.add_subparsers(dest="analysis", required=True, parser_class=_Parser)
    lb = asub.add_parser("ljung-box", parents=[common])
    lb.add_argument("input")
    lb.add_argument("--max-lag", type=_positive_int, default=100)
    lb.add_argument("--alpha", type=_probability, default=0.05, help="significance level")
    lb.add_argument("--raw", action="store_true", help="do not subtract the sample mean")
    av = asub.add_parser("avar", parents=[common])
    av.add_argument("input")
    av.add_argument("--points-per-decade", type=_positive_int, default=10)
    co = asub.add_parser("coeffs", parents=[common])
    co.add_argument("input")
    co.add_argument("--points-per-decade", type=_positive_int, default=10)
    co.add_argument("--tolerance", type=_positive_float, default=0.15)
    co.add_argument("--min-clusters", type=_positive_int, default=10)

    sy = sub.add_parser("synth", parents=[common], help="synthesize colored noise")
    sy.add_argument("--alpha", type=_alpha)
    sy.add_argument("--sigma", type=_positive_float, default=1.0)
    sy.add_argument("--component", type=_component, action="append",
                    help="alpha:sigma:weight; repeatable, overrides --alpha/--sigma")
    sy.add_argument("--length", type=_positive_int, required=True)
    sy.add_argument("--mean", type=float, default=0.0)
    sy.add_argument("--sample-rate", type=_positive_float, default=1.0)
    sy.add_argument("--discard-prefix", type=int, default=0)
    sy.add_argument("--label")
    sy.add_argument("--name", default="noise")

    dp = sub.add_parser("dataset", parents=[common], help="build noisy/clean OOK pulse pairs")
    dp.add_argument("--count", type=_positive_int, required=True)
    dp.add_argument("--input-length", type=_positive_int, default=256)
    dp.add_argument("--sample-rate", type=_positive_float, default=10_000.0)
    dp.add_argument("--on-ms", type=_positive_float, default=1.0)
    dp.add_argument("--off-ms", type=_positive_float, default=4.0)
    dp.add_argument("--amp-on", type=float, default=1.0)
    dp.add_argument("--amp-off", type=float, default=0.0)
    dp.add_argument("--component", type=_component, action="append")
    dp.add_argument("--noise-mean", type=float, default=0.0)
    dp.add_argument("--responsivity", type=_positive_float, default=1.0)
    dp.add_argument("--taps", type=_float_list, default=[1.0], help="channel impulse response")
    dp.add_argument("--dc-offset", type=float, default=0.0)
    dp.add_argument("--label", default="synthetic")
    dp.add_argument("--holdout", type=_probability, default=0.3)
    dp.add_argument("--name", default="dataset")

    tp = sub.add_parser("train", parents=[common], help="train the denoising autoencoder")
    tp.add_argument("--dataset", required=True)
    tp.add_argument("--filters", type=_int_list, default=[128, 32])
    tp.add_argument("--kernel-size", type=_positive_int, default=3)
    tp.add_argument("--stride", type=_positive_int, default=2)
    tp.add_argument("--epochs", type=_positive_int, default=100)
    tp.add_argument("--batch-size", type=_positive_int, default=50)
    tp.add_argument("--lr", type=_positive_float, default=1e-3)
    tp.add_argument("--beta1", type=float, default=0.9)
    tp.add_argument("--beta2", type=float, default=0.999)
    tp.add_argument("--epsilon", type=_positive_float, default=1e-8)
    tp.add_argument("--max-norm", type=_optional_norm, default=4.0)
    tp.add_argument("--holdout", type=_probability, default=None)

    dn = sub.add_parser("denoise", parents=[common], help="run captures through a trained model")
    dn.add_argument("--model", required=True)
    dn.add_argument("inputs", nargs="+")

    ev = sub.add_parser("eval", parents=[common], help="RMSE report")
    ev.add_argument("--model")
    ev.add_argument("--dataset")
    ev.add_argument("--split", choices=("holdout", "all"), default="holdout")
    ev.add_argument("--denoised")
    ev.add_argument("--clean")

    rp = sub.add_parser("replay", help="re-run a command from its manifest")
    rp.add_argument("manifest")
    rp.add_argument("--output-dir")
    return p


_COMMANDS = {
    "analyze": cmd_analyze,
    "synth": cmd_synth,
    "dataset": cmd_dataset,
    "train": cmd_train,
    "denoise": cmd_denoise,
    "eval": cmd_eval,
}


def _jsonable(v):
    if isinstance(v, NoiseComponent):
        return f"{v.alpha!r}:{v.sigma!r}:{v.weight!r}"
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (int, float, str, bool, type(None))):
        return v
    return repr(v)


def _record_argv(argv, args):
    """argv with input paths made absolute and --output-dir removed."""
    mapping = {}
    for attr in _INPUT_PATH_ATTRS:
        v = getattr(args, attr, None)
        for item in (v if isinstance(v, list) else [v] if v is not None else []):
            mapping[item] = str(Path(item).resolve())
    out = []
    skip = False
    for tok in argv:
        if skip:
            skip = False
            continue
        if tok == "--output-dir":
            skip = True
            continue
        if tok.startswith("--output-dir="):
            continue
        out.append(mapping.get(tok, tok))
    return out


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "replay":
            return cmd_replay(args)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.command == "dataset" and not args.component:
            args.component = [NoiseComponent(0.0, 0.15, 1.0), NoiseComponent(2.0, 0.005, 1.0)]
        command = args.command + (f" {args.analysis}" if args.command == "analyze" else "")
        recorded = _record_argv(argv, args)
        run = _Run(args, command)
        _COMMANDS[args.command](args, run)
        params = {k: _jsonable(v) for k, v in sorted(vars(args).items())
                  if k not in ("output_dir", "verbose")}
        run.write_manifest(recorded, params)
        return EXIT_OK
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"vlcnoise: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataError, OSError) as exc:
        print(f"vlcnoise: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
