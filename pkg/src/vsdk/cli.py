"""Command line front end.

Every verb writes its files into ``--out`` (default: ``$VSDK_OUTPUT_DIR`` or
the working directory) and a JSON report to ``--report``.
"""
import argparse
import logging
import os
import sys

import numpy as np

from . import io
from .errors import ParameterError, VSDKError
from .experiments import (
    LABELINGS,
    MODES,
    ExperimentConfig,
    extract_labels,
    output_dir,
    run_convergence,
    run_perturbation,
    run_pipeline,
    save_convergence,
    save_perturbation,
    save_pipeline,
)
from .geometry import fill_distance_brute, fill_distance_closed, lissajous_nodes, uniform_grid
from .phantoms import make_phantom
from .segmentation import build_scaling

log = logging.getLogger("vsdk")

KERNELS = ("matern0", "matern2", "matern4", "gauss")


def _floats(text):
    return tuple(float(t) for t in text.split(",") if t.strip())


def _pair(text):
    parts = tuple(int(t) for t in text.split(","))
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected n1,n2 but got {text!r}")
    return parts


def _pairs(text):
    return tuple(_pair(p) for p in text.split(";") if p.strip())


def _common(p):
    p.add_argument("--out", help="output directory")
    p.add_argument("--report", help="JSON report path")
    p.add_argument("--config", help="JSON file with configuration values")


def _model_args(p):
    p.add_argument("--kernel", choices=KERNELS)
    p.add_argument("--lam", type=float, help="diagonal regularization (default 1e-12)")
    p.add_argument("--grid", type=int, help="evaluation grid size M (M x M points)")


def _segment_args(p):
    p.add_argument("--labeling", choices=LABELINGS)
    p.add_argument("--k", type=int, help="number of k-means clusters")
    p.add_argument("--thresholds", type=_floats, help="comma-separated increasing thresholds")
    p.add_argument("--fraction", type=float, help="fraction of the maximum for max-fraction labeling")
    p.add_argument("--svm-kernel", dest="svm_kernel", choices=KERNELS)
    p.add_argument("--svm-scale", dest="svm_scale", type=float)
    p.add_argument("--C", type=float, help="SVM box constraint")
    p.add_argument("--alphas", type=_floats, help="comma-separated scaling values per class")
    p.add_argument("--seed", type=int)


def _source_args(p):
    p.add_argument("--data", help="sample CSV with header x,y,f")
    p.add_argument("--phantom", choices=("shepp-logan", "geometric"))
    p.add_argument("--nodes", type=_pair, help="Lissajous frequencies n1,n2")


def build_parser():
    parser = argparse.ArgumentParser(prog="vsdk", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nodes", help="Lissajous node set as CSV")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--eps", type=int, default=2, choices=(1, 2))
    p.add_argument("--brute", type=int, default=0, metavar="RES",
                   help="also compute the fill distance on a RES x RES test grid")
    _common(p)

    p = sub.add_parser("phantom", help="rasterize a phantom to PGM and CSV")
    p.add_argument("--phantom", choices=("shepp-logan", "geometric"), default="shepp-logan")
    p.add_argument("--grid", type=int, default=150)
    p.add_argument("--ascii", action="store_true", help="write P2 instead of P5")
    _common(p)

    p = sub.add_parser("sample", help="sample a phantom at nodes")
    p.add_argument("--phantom", choices=("shepp-logan", "geometric"), default="geometric")
    p.add_argument("--nodes", type=_pair, default=(33, 32), help="Lissajous frequencies n1,n2")
    p.add_argument("--node-file", help="node CSV (x,y) instead of Lissajous nodes")
    _common(p)

    p = sub.add_parser("interpolate", help="RBF or VSDK reconstruction on a grid")
    p.add_argument("--mode", choices=MODES)
    p.add_argument("--psi-factor", dest="psi_factor", type=float)
    _source_args(p)
    _model_args(p)
    _segment_args(p)
    _common(p)

    p = sub.add_parser("segment", help="label data and train the classifier for psi")
    _source_args(p)
    _segment_args(p)
    p.add_argument("--grid", type=int)
    _common(p)

    p = sub.add_parser("convergence", help="fill distance vs RMSE sweep on the Shepp-Logan phantom")
    p.add_argument("--mode", choices=("rbf", "vsdk-known"))
    p.add_argument("--pairs", type=_pairs, help="semicolon-separated n1,n2 pairs")
    p.add_argument("--psi-factor", dest="psi_factor", type=float)
    _model_args(p)
    _common(p)

    p = sub.add_parser("perturbation", help="shifted scaling functions on the geometric phantom")
    p.add_argument("--offsets", type=_floats)
    _model_args(p)
    _common(p)
    return parser


_CONFIG_KEYS = {f for f in ExperimentConfig.__dataclass_fields__}


def resolve_config(args, **defaults):
    """Merge defaults, the ``--config`` file and explicit flags (in that order)."""
    values = dict(defaults)
    if getattr(args, "config", None):
        loaded = io.read_json(args.config)
        if not isinstance(loaded, dict):
            raise ParameterError(f"{args.config}: configuration must be a JSON object")
        values.update(loaded)
    for key, val in vars(args).items():
        if key in _CONFIG_KEYS and val is not None:
            values[key] = val
    return ExperimentConfig.from_dict(values)


def _cmd_nodes(args):
    nodes = lissajous_nodes(args.n1, args.n2, args.eps)
    out = args.out or os.environ.get("VSDK_OUTPUT_DIR") or "."
    io.write_nodes(os.path.join(out, "nodes.csv"), nodes)
    report = {"n1": args.n1, "n2": args.n2, "eps": args.eps, "count": len(nodes)}
    if args.eps == 2 and min(args.n1, args.n2) >= 2:
        report["fill_distance"] = fill_distance_closed(args.n1, args.n2)
    if args.brute:
        report["fill_distance_brute"] = fill_distance_brute(nodes, args.brute)
    io.write_json(args.report or os.path.join(out, "nodes.json"), report)
    return report


def _cmd_phantom(args):
    phantom = make_phantom(args.phantom)
    grid = uniform_grid(args.grid)
    values = phantom(grid)
    out = args.out or os.environ.get("VSDK_OUTPUT_DIR") or "."
    io.write_values(os.path.join(out, f"{args.phantom}.csv"), grid, values)
    io.write_pgm(os.path.join(out, f"{args.phantom}.pgm"), np.flipud(values.reshape(args.grid, args.grid)),
                 binary=not args.ascii)
    report = {"phantom": repr(phantom), "grid": args.grid, "min": float(values.min()), "max": float(values.max())}
    io.write_json(args.report or os.path.join(out, f"{args.phantom}.json"), report)
    return report


def _cmd_sample(args):
    phantom = make_phantom(args.phantom)
    nodes = io.read_nodes(args.node_file) if args.node_file else lissajous_nodes(*args.nodes)
    values = phantom(nodes)
    out = args.out or os.environ.get("VSDK_OUTPUT_DIR") or "."
    io.write_data(os.path.join(out, "data.csv"), nodes, values)
    report = {"phantom": repr(phantom), "count": len(nodes)}
    io.write_json(args.report or os.path.join(out, "sample.json"), report)
    return report


def _cmd_interpolate(args):
    config = resolve_config(args)
    result = run_pipeline(config)
    save_pipeline(result, config)
    return result.report


def _cmd_segment(args):
    config = resolve_config(args, mode="vsdk-segment")
    if config.data is not None:
        nodes, values = io.read_data(config.data)
    else:
        nodes = lissajous_nodes(*config.nodes)
        values = make_phantom(config.phantom)(nodes)
    labels, info = extract_labels(config, nodes, values)
    psi = build_scaling(nodes, labels, config.svm_spec, config.C, config.alphas)
    out = output_dir(config)
    grid = uniform_grid(config.grid)
    io.write_labels(os.path.join(out, "labels.csv"), nodes, labels)
    io.write_json(os.path.join(out, "classifier.json"), psi.to_dict())
    io.write_pgm(os.path.join(out, "psi.pgm"), np.flipud(psi(grid).reshape(config.grid, config.grid)))
    report = {
        "config": config.to_dict(),
        "labels": info,
        "classifier_accuracy": float(np.mean(psi.predict_labels(nodes) == labels)),
        "alphas": psi.alphas.tolist(),
    }
    io.write_json(config.report or os.path.join(out, "segment.json"), report)
    return report


def _cmd_convergence(args):
    config = resolve_config(args, mode="vsdk-known", phantom="shepp-logan")
    result = run_convergence(config)
    save_convergence(result, config)
    return {"kernel": config.kernel, "mode": config.mode, "slope": result.slope}


def _cmd_perturbation(args):
    config = resolve_config(args, mode="vsdk-known")
    result = run_perturbation(config)
    save_perturbation(result, config)
    return {"rel_l1": [row["rel_l1"] for row in result.rows]}


COMMANDS = {
    "nodes": _cmd_nodes,
    "phantom": _cmd_phantom,
    "sample": _cmd_sample,
    "interpolate": _cmd_interpolate,
    "segment": _cmd_segment,
    "convergence": _cmd_convergence,
    "perturbation": _cmd_perturbation,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        summary = COMMANDS[args.command](args)
    except VSDKError as exc:
        print(f"vsdk {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"vsdk {args.command}: {exc}", file=sys.stderr)
        return 1
    for key, val in summary.items():
        if not isinstance(val, (dict, list)) or key == "rel_l1":
            print(f"{key}: {val}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
