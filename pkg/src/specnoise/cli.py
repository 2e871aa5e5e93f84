"""Command-line interface.

Subcommands: synth, embed, probe, bounds, sweep, analyze, plot, verify.
Exit codes: 0 success, 1 usage/config error, 2 verification-suite failure,
3 I/O error.  The output directory can be overridden globally through the
SPECNOISE_OUT environment variable; nothing else is read from the
environment.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import acceptance, bounds as bounds_mod, textio
from .config import load_config
from .embedding import build_representation, eigendecompose, normalize
from .errors import ConfigError, SpecnoiseError
from .graphs import assumption_report, synthesize_structured
from .harness import plot_results, run_sweep, write_csv
from .labels import clean_labels, flip_noise, gaussian_noise, symmetric_flip_spec
from .probe import (
    expected_error_closed_form,
    ground_truth_accuracy,
    ground_truth_mse,
    ridge_fit,
)
from .structure import SubclassStructure

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_SUITE = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _out_dir(args) -> Path:
    env = os.environ.get("SPECNOISE_OUT")
    out = Path(args.out if args.out is not None else (env or "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _target(out: Path, name: str, overwrite: bool) -> Path:
    path = out / name
    if path.exists() and not overwrite:
        raise FileExistsError(f"{path} exists; pass --overwrite to replace it")
    return path


def _csv_floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip() != ""]


def _csv_ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip() != ""]


def _structure_from_args(args) -> SubclassStructure:
    if args.sizes:
        if not args.class_of:
            raise _UsageError("--sizes requires --class-of")
        return SubclassStructure(
            sizes=tuple(_csv_ints(args.sizes)), class_of=tuple(_csv_ints(args.class_of))
        )
    return SubclassStructure.balanced(args.classes, args.subclasses, args.block_size)


def _cmd_synth(args) -> int:
    structure = _structure_from_args(args)
    adj = synthesize_structured(structure, args.delta, args.xi, args.base_weight, args.seed)
    out = _out_dir(args)
    path = _target(out, args.name, args.overwrite)
    textio.write_adjacency(path, adj)
    report = assumption_report(adj)
    print(f"wrote {path}")
    print(
        f"measured delta={report.delta:.6g} "
        f"delta_prime={report.delta_prime:.6g} xi={report.xi:.6g}"
    )
    return EXIT_OK


def _cmd_embed(args) -> int:
    adj = textio.read_adjacency(args.graph)
    spec = eigendecompose(normalize(adj))
    out = _out_dir(args)
    spath = _target(out, "spectrum.txt", args.overwrite)
    textio.write_spectrum(spath, spec)
    print(f"wrote {spath}")
    if args.p is not None:
        rep = build_representation(spec, args.p, args.rotation_seed)
        rpath = _target(out, "representation.txt", args.overwrite)
        textio.write_matrix(rpath, rep.values, spec.structure)
        print(f"wrote {rpath}")
    return EXIT_OK


def _cmd_probe(args) -> int:
    spec = textio.read_spectrum(args.spectrum)
    structure = spec.structure
    rep = build_representation(spec, args.p, args.rotation_seed)
    clean = clean_labels(structure)
    rows = []
    for level in _csv_floats(args.levels):
        for beta in _csv_floats(args.betas):
            closed = None
            if args.noise == "gaussian":
                closed = expected_error_closed_form(spec, args.p, clean, beta, level)
            for seed in _csv_ints(args.seeds):
                if args.noise == "gaussian":
                    noisy = gaussian_noise(clean, level, seed)
                else:
                    noisy, _ = flip_noise(
                        clean, structure, symmetric_flip_spec(structure, level, seed)
                    )
                fit = ridge_fit(rep, noisy, beta)
                acc = ground_truth_accuracy(fit, clean)
                rows.append({
                    "beta": beta,
                    "sigma": level if args.noise == "gaussian" else None,
                    "alpha": level if args.noise == "flip" else None,
                    "noise_seed": seed,
                    "bias_sq": closed.bias_sq if closed else None,
                    "variance": closed.variance if closed else None,
                    "mse": ground_truth_mse(fit, clean),
                    "accuracy": acc.accuracy,
                    "ties": acc.ties,
                })
    out = _out_dir(args)
    path = _target(out, "probe.csv", args.overwrite)
    write_csv(
        path,
        ["beta", "sigma", "alpha", "noise_seed", "bias_sq", "variance",
         "mse", "accuracy", "ties"],
        rows,
    )
    print(f"wrote {path} ({len(rows)} rows)")
    return EXIT_OK


def _cmd_bounds(args) -> int:
    adj = textio.read_adjacency(args.graph)
    spec = eigendecompose(normalize(adj))
    p = args.p if args.p is not None else adj.structure.num_subclasses
    reports = bounds_mod.lemma_reports(adj, spec, p)
    out = _out_dir(args)
    path = _target(out, "bounds.csv", args.overwrite)
    write_csv(
        path,
        ["name", "bound", "observed", "slack", "holds"],
        [
            {
                "name": r.name, "bound": r.bound_value, "observed": r.observed_value,
                "slack": r.slack, "holds": r.holds,
            }
            for r in reports
        ],
    )
    print(f"wrote {path}")
    width = max(len(r.name) for r in reports)
    for r in reports:
        status = "ok " if r.holds else "FAIL"
        print(f"  {status} {r.name:<{width}} bound={r.bound_value:.6g} "
              f"observed={r.observed_value:.6g}")
    return EXIT_OK if all(r.holds for r in reports) else EXIT_SUITE


def _cmd_sweep(args) -> int:
    config = load_config(args.config)
    out = args.out if args.out is not None else (
        os.environ.get("SPECNOISE_OUT") or config.output_dir or "runs"
    )
    manifest = run_sweep(config, out, jobs=args.jobs, overwrite=args.overwrite)
    print(f"config digest {manifest.config_digest}")
    for f in manifest.files:
        print(f"wrote {f}")
    print(f"summary: {manifest.summary}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    values, structure, _ = textio.read_matrix(args.matrix)
    if args.vector:
        y = np.array([float(t) for t in Path(args.vector).read_text().split()])
    else:
        labels = clean_labels(structure)
        if not (0 <= args.column < labels.num_classes):
            raise _UsageError(f"--column {args.column} out of range")
        y = labels.values[:, args.column]
    from .analyzer import alignment_report, spectrum_gap

    report = alignment_report(values, y, args.top_k)
    head, tail = spectrum_gap(values, args.top_k)
    out = _out_dir(args)
    path = _target(out, "alignment.csv", args.overwrite)
    write_csv(
        path,
        ["top_k", "pi_inside", "pi_outside", "gram_ratio", "head_mass", "tail_mass"],
        [{
            "top_k": report.top_k, "pi_inside": report.pi_i_norm,
            "pi_outside": report.pi_n_norm, "gram_ratio": report.ratio,
            "head_mass": head, "tail_mass": tail,
        }],
    )
    svpath = _target(out, "singular_values.txt", args.overwrite)
    svpath.write_text(
        "\n".join(format(v, ".17g") for v in report.singular_values) + "\n"
    )
    print(f"wrote {path}")
    print(f"wrote {svpath}")
    return EXIT_OK


def _cmd_plot(args) -> int:
    out = _out_dir(args)
    path = _target(out, args.name, args.overwrite)
    plot_results(args.csv, args.kind, path)
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    if args.list:
        for name in acceptance.check_names():
            print(name)
        return EXIT_OK
    results = acceptance.run_verification_suite()
    out = _out_dir(args)
    files = acceptance.write_results(results, out)
    width = max(len(r.name) for r in results)
    print()
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"  {status}  {r.name:<{width}}  [{r.wall_time_s:6.1f}s]  {r.detail}")
    print()
    for f in files:
        print(f"wrote {f}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_SUITE


def build_parser() -> _Parser:
    parser = _Parser(prog="specnoise", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, overwrite=True):
        p.add_argument("--out", default=None, help="output directory")
        if overwrite:
            p.add_argument("--overwrite", action="store_true")

    p = sub.add_parser("synth", help="synthesize a clustered graph")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--subclasses", type=int, default=2)
    p.add_argument("--block-size", type=int, default=20)
    p.add_argument("--sizes", default=None, help="comma-separated block sizes")
    p.add_argument("--class-of", default=None, help="comma-separated class per block")
    p.add_argument("--delta", type=float, default=0.0)
    p.add_argument("--xi", type=float, default=0.0)
    p.add_argument("--base-weight", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default="graph.txt")
    add_common(p)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("embed", help="normalize, eigendecompose, embed")
    p.add_argument("--graph", required=True)
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--rotation-seed", type=int, default=None)
    add_common(p)
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("probe", help="closed-form ridge fits over a noise grid")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--rotation-seed", type=int, default=None)
    p.add_argument("--noise", choices=("gaussian", "flip"), required=True)
    p.add_argument("--levels", required=True, help="comma-separated sigmas or alphas")
    p.add_argument("--betas", required=True, help="comma-separated ridge weights")
    p.add_argument("--seeds", required=True, help="comma-separated noise seeds")
    add_common(p)
    p.set_defaults(func=_cmd_probe)

    p = sub.add_parser("bounds", help="block-structure inequality checks")
    p.add_argument("--graph", required=True)
    p.add_argument("--p", type=int, default=None)
    add_common(p)
    p.set_defaults(func=_cmd_bounds)

    p = sub.add_parser("sweep", help="run a configured experiment grid")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=os.cpu_count())
    add_common(p)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("analyze", help="singular spectrum and label alignment")
    p.add_argument("--matrix", required=True)
    p.add_argument("--vector", default=None, help="file of target-vector entries")
    p.add_argument("--column", type=int, default=0,
                   help="clean-label column when no --vector is given")
    p.add_argument("--top-k", type=int, required=True)
    add_common(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("plot", help="render figures from sweep CSV output")
    p.add_argument("--csv", required=True)
    p.add_argument("--kind", required=True,
                   choices=("accuracy-vs-alpha", "error-vs-beta", "singular-histogram"))
    p.add_argument("--name", default="plot.svg")
    add_common(p)
    p.set_defaults(func=_cmd_plot)

    p = sub.add_parser("verify", help="run the full verification suite")
    p.add_argument("--list", action="store_true", help="list checks without running")
    add_common(p, overwrite=False)
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FileExistsError, FileNotFoundError, IsADirectoryError, OSError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SpecnoiseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
