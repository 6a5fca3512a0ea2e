"""Command-line front end: ``tensoralign {gen,align,eval,decompose}``.

Every subcommand accepts ``--config FILE`` holding ``key = value`` lines
(keys are long flag names, with or without the leading dashes); flags given
on the command line win over the file.
"""
import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .align import METHODS, AlignConfig, align, domain_features, mmt_diagnostic
from .baselines import Baseline, baseline_align
from .data import (GOLDEN_SPEC, SyntheticSpec, gen_synthetic, read_labels, read_tensor,
                   write_labels, write_tensor)
from .decomp import hooi, select_ranks
from .errors import InvalidArgumentError, TensorAlignError
from .evaluation import accuracy, intra_class_distance, nearest_centroid_fit_predict
from .tensor import vectorize_samples

log = logging.getLogger("tensoralign")

EXIT_ERROR = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"error: {message}\n")


def _int_list(text):
    try:
        return tuple(int(t) for t in str(text).replace(" ", "").split(",") if t)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


def _read_config(path):
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key.lstrip("-").replace("-", "_")] = value
    return values


def _write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _require(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


def _check_ranks(ranks, dims):
    if ranks is not None and (len(ranks) != len(dims) or any(not 1 <= r <= d for r, d in zip(ranks, dims))):
        raise UsageError(f"--ranks {','.join(map(str, ranks))} invalid for feature extents {tuple(dims)}")


def _labels(path, n, what):
    labels = np.asarray(read_labels(path))
    if len(labels) != n:
        raise InvalidArgumentError(f"{what}: {len(labels)} labels for {n} samples")
    return labels


def _metrics_row(name, Fs, ys, Ft, yt):
    pred = nearest_centroid_fit_predict(Fs, ys, Ft)
    return {
        "method": name,
        "accuracy": accuracy(pred, yt),
        "intra_class_distance": intra_class_distance(Fs, ys, Ft, yt),
    }


def _write_metrics(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["method", "accuracy", "intra_class_distance"])
        for r in rows:
            w.writerow([r["method"], repr(r["accuracy"]), repr(r["intra_class_distance"])])


# --- gen ---------------------------------------------------------------------

def cmd_gen(args):
    _require(args, "out")
    if args.golden:
        spec = SyntheticSpec(**{**GOLDEN_SPEC.to_dict(),
                                **({"seed": args.seed} if args.seed is not None else {})})
    else:
        spec = SyntheticSpec(
            num_classes=args.classes,
            samples_per_class_source=args.source_per_class,
            samples_per_class_target=args.target_per_class,
            dims=args.dims,
            class_separation=args.separation,
            shift_strength=args.shift,
            noise_sigma=args.noise,
            seed=args.seed if args.seed is not None else 0,
            prototype_rank=args.prototype_rank,
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    Xs, ys, Xt, yt = gen_synthetic(spec)
    write_tensor(out / "source.dten", Xs)
    write_tensor(out / "target.dten", Xt)
    write_labels(out / "source_labels.csv", ys)
    write_labels(out / "target_labels.csv", yt)
    _write_json(out / "spec.json", spec.to_dict())
    log.info("wrote %s and %s to %s", Xs.shape, Xt.shape, out)
    return 0


# --- align -------------------------------------------------------------------

def _write_loss_trace(path, result):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "loss", "J", "h"])
        for i, (f, J, h) in enumerate(zip(result.loss_trace, result.j_trace, result.h_trace)):
            w.writerow([i, repr(f), repr(J), repr(h)])


def cmd_align(args):
    _require(args, "source", "target", "out")
    if args.ranks is not None and args.variance_threshold is not None:
        raise UsageError("--ranks and --variance-threshold are mutually exclusive")
    cfg = AlignConfig.for_method(
        args.method,
        lam=args.lam,
        step_size=args.step,
        outer_iters=args.iters,
        ranks=args.ranks,
        variance_threshold=args.variance_threshold if args.variance_threshold is not None else 0.99,
        hooi_max_sweeps=args.hooi_sweeps,
        hooi_tol=args.hooi_tol,
        seed=args.seed,
        backtracking=args.backtracking,
    )
    Xs, Xt = read_tensor(args.source), read_tensor(args.target)
    _check_ranks(cfg.ranks, Xs.shape[:-1])
    t0 = time.perf_counter()
    result = align(Xs, Xt, cfg)
    elapsed = time.perf_counter() - t0

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k, (Mk, Uk) in enumerate(zip(result.M, result.U)):
        write_tensor(out / f"M_{k}.dten", Mk)
        write_tensor(out / f"U_{k}.dten", Uk)
    _write_loss_trace(out / "loss_trace.csv", result)

    metrics = []
    if args.labels_source and args.labels_target:
        ys = _labels(args.labels_source, Xs.shape[-1], "source")
        yt = _labels(args.labels_target, Xt.shape[-1], "target")
        Gs, Gt = domain_features(Xs, Xt, result.M, result.U, cfg.variant)
        metrics.append(_metrics_row(args.method, vectorize_samples(Gs), ys,
                                    vectorize_samples(Gt), yt))
    manifest = {
        "command": "align",
        "version": __version__,
        "method": args.method,
        "config": cfg.to_dict(),
        "seed": cfg.seed,
        "inputs": {"source": str(args.source), "target": str(args.target),
                   "source_shape": list(Xs.shape), "target_shape": list(Xt.shape)},
        "ranks": list(result.ranks),
        "iterations_run": result.iterations_run,
        "iterations_to_within_5pct_of_final": result.iterations_to_within(0.05),
        "loss_trace": result.loss_trace,
        "j_trace": result.j_trace,
        "h_trace": result.h_trace,
        "metrics": metrics,
        "wall_clock_seconds": elapsed,
    }
    _write_json(out / "manifest.json", manifest)
    log.info("%s: loss %.6g -> %.6g in %d iterations", args.method,
             result.loss_trace[0], result.loss_trace[-1], result.iterations_run)
    return 0


# --- eval --------------------------------------------------------------------

def load_model(model_dir):
    """Read ``(method, M, U)`` written by ``tensoralign align``."""
    model_dir = Path(model_dir)
    manifest = json.loads((model_dir / "manifest.json").read_text())
    K = len(manifest["ranks"])
    M = [read_tensor(model_dir / f"M_{k}.dten") for k in range(K)]
    U = [read_tensor(model_dir / f"U_{k}.dten") for k in range(K)]
    return manifest["method"], M, U


def cmd_eval(args):
    _require(args, "source", "target", "labels_source", "labels_target", "out")
    if (args.model_dir is None) == (args.baseline is None):
        raise UsageError("exactly one of --model-dir and --baseline is required")
    Xs, Xt = read_tensor(args.source), read_tensor(args.target)
    ys = _labels(args.labels_source, Xs.shape[-1], "source")
    yt = _labels(args.labels_target, Xt.shape[-1], "target")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.baseline is not None:
        name = args.baseline
        Fs, Ft = baseline_align(args.baseline, vectorize_samples(Xs), vectorize_samples(Xt), args.dim)
    else:
        name, M, U = load_model(args.model_dir)
        variant = METHODS[name][0]
        Gs, Gt = domain_features(Xs, Xt, M, U, variant)
        Fs, Ft = vectorize_samples(Gs), vectorize_samples(Gt)
        for k in range(len(M)):
            write_tensor(out / f"mmt_{k}.dten", mmt_diagnostic(M, k))
    row = _metrics_row(name, Fs, ys, Ft, yt)
    _write_metrics(out / "metrics.csv", [row])
    write_tensor(out / "features_source.dten", Fs)
    write_tensor(out / "features_target.dten", Ft)
    log.info("%s: accuracy %.4f, intra-class distance %.4f", name,
             row["accuracy"], row["intra_class_distance"])
    return 0


# --- decompose ---------------------------------------------------------------

def cmd_decompose(args):
    _require(args, "input", "out")
    if args.ranks is not None and args.variance_threshold is not None:
        raise UsageError("--ranks and --variance-threshold are mutually exclusive")
    X = read_tensor(args.input)
    if X.ndim < 2:
        raise InvalidArgumentError("input needs at least one feature mode plus a sample mode")
    if args.ranks is not None:
        _check_ranks(args.ranks, X.shape[:-1])
        ranks = args.ranks
    else:
        ranks = select_ranks(X, args.variance_threshold if args.variance_threshold is not None else 0.99)
    res = hooi(X, ranks, max_sweeps=args.max_sweeps, tol=args.tol)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k, Uk in enumerate(res.factors):
        write_tensor(out / f"U_{k}.dten", Uk)
    write_tensor(out / "core.dten", res.core)
    with open(out / "fit_trace.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["sweep", "fit"])
        for i, f in enumerate(res.fit_trace):
            w.writerow([i, repr(f)])
    _write_json(out / "manifest.json", {
        "command": "decompose", "version": __version__, "input": str(args.input),
        "ranks": list(res.ranks), "fit_trace": res.fit_trace,
        "max_sweeps": args.max_sweeps, "tol": args.tol,
    })
    log.info("fit %.6f after %d sweeps", res.fit_trace[-1], len(res.fit_trace) - 1)
    return 0


# --- wiring ------------------------------------------------------------------

def build_parser():
    parser = _Parser(prog="tensoralign", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def common(p):
        p.add_argument("--config", help="key = value file; command-line flags take precedence")
        p.add_argument("--out", help="output directory")
        return p

    p = common(sub.add_parser("gen", help="write a synthetic source/target pair"))
    p.add_argument("--golden", action="store_true", help="use the committed benchmark settings")
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--source-per-class", type=int, default=20)
    p.add_argument("--target-per-class", type=int, default=20)
    p.add_argument("--dims", type=_int_list, default=(16, 16))
    p.add_argument("--separation", type=float, default=1.0)
    p.add_argument("--shift", type=float, default=0.5)
    p.add_argument("--noise", type=float, default=0.1)
    p.add_argument("--prototype-rank", type=int, default=3)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gen)

    p = common(sub.add_parser("align", help="learn alignment matrices and a shared subspace"))
    p.add_argument("--source", help="source tensor (.dten), samples on the last axis")
    p.add_argument("--target", help="target tensor (.dten)")
    p.add_argument("--method", choices=sorted(METHODS), default="tda-o")
    p.add_argument("--lambda", dest="lam", type=float, default=1e-4, metavar="LAMBDA",
                   help="regularizer weight (default 1e-4)")
    p.add_argument("--step", type=float, default=1e-6, help="Riemannian step size (default 1e-6)")
    p.add_argument("--iters", type=int, default=80, help="outer alternations (default 80)")
    p.add_argument("--variance-threshold", type=float,
                   help="energy kept per mode when picking ranks (default 0.99)")
    p.add_argument("--ranks", type=_int_list, help="explicit Tucker ranks, e.g. 3,3")
    p.add_argument("--hooi-sweeps", type=int, default=20)
    p.add_argument("--hooi-tol", type=float, default=1e-6)
    p.add_argument("--backtracking", type=_bool, nargs="?", const=True, default=False,
                   help="halve the step until the objective does not increase")
    p.add_argument("--seed", type=int, default=0, help="recorded in the manifest")
    p.add_argument("--labels-source", help="optional; adds accuracy to the manifest")
    p.add_argument("--labels-target")
    p.set_defaults(func=cmd_align)

    p = common(sub.add_parser("eval", help="nearest-centroid evaluation of aligned features"))
    p.add_argument("--source")
    p.add_argument("--target")
    p.add_argument("--labels-source")
    p.add_argument("--labels-target")
    p.add_argument("--model-dir")
    p.add_argument("--baseline", choices=[b.value for b in Baseline])
    p.add_argument("--dim", type=int, help="subspace size for pca/sa")
    p.set_defaults(func=cmd_eval)

    p = common(sub.add_parser("decompose", help="standalone HOOI of one tensor"))
    p.add_argument("--input")
    p.add_argument("--ranks", type=_int_list)
    p.add_argument("--variance-threshold", type=float)
    p.add_argument("--max-sweeps", type=int, default=20)
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(func=cmd_decompose)
    parser.commands = sub.choices
    return parser


def _parse(parser, argv):
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        values = _read_config(args.config)
        subparser = parser.commands[args.command]
        if "lambda" in values:
            values["lam"] = values.pop("lambda")
        known = {a.dest for a in subparser._actions}
        unknown = sorted(set(values) - known)
        if unknown:
            raise UsageError(f"unknown config key(s): {', '.join(unknown)}")
        subparser.set_defaults(**values)
        args = parser.parse_args(argv)
        # string defaults of non-typed/boolean options are not converted by argparse
        for key in ("golden",):
            if isinstance(getattr(args, key, None), str):
                setattr(args, key, _bool(getattr(args, key)))
    return args


def main(argv=None):
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TensorAlignError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
