"""Configuration-driven sweeps: synthesize, embed, corrupt, fit, check, log.

A sweep walks the Cartesian grid (delta, xi, noise level, beta, noise seed).
Graph-level work (synthesis, eigendecomposition, per-graph bound checks) is
done once per (delta, xi) cell; the per-point work reuses it.  Cells fan out
across processes when ``jobs > 1``; results are gathered in grid order, so
the CSV bytes do not depend on the worker count.

Plotting is presentation-only: it re-reads the CSV and never recomputes a
metric.
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import bounds as bounds_mod
from .config import ExperimentConfig
from .embedding import build_representation, eigendecompose, normalize
from .graphs import (
    delta_prime_from_delta,
    measure_delta,
    measure_xi,
    split_block_and_residual,
    synthesize_structured,
)
from .labels import FlipSpec, clean_labels, flip_noise, gaussian_noise, symmetric_flip_spec
from .probe import (
    expected_error_closed_form,
    ground_truth_accuracy,
    ground_truth_mse,
    ridge_fit,
)

RESULT_COLUMNS = [
    "config_digest", "delta_target", "delta_measured", "xi_target", "xi_measured",
    "graph_seed", "p", "rotation_seed", "noise_model", "sigma", "alpha",
    "noise_seed", "beta", "mse", "accuracy", "ties",
    "bias_sq_closed", "variance_closed", "expected_total",
]

BOUND_COLUMNS = [
    "config_digest", "delta_target", "xi_target", "graph_seed", "beta", "sigma",
    "name", "bound", "observed", "slack", "holds",
]


@dataclass
class RunManifest:
    config_digest: str
    files: list
    wall_time_s: float
    summary: dict

    def write(self, path) -> None:
        Path(path).write_text(json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c)) for c in columns])


def _run_graph_cell(args):
    """All grid points sharing one (delta, xi) graph. Top-level for pickling."""
    config, delta_t, xi_t = args
    structure = config.structure
    digest = config.digest()
    adj = synthesize_structured(
        structure, delta_t, xi_t, config.base_weight, config.graph_seed
    )
    delta_m = measure_delta(adj)
    xi_m = measure_xi(adj)
    norm = normalize(adj)
    spec = eigendecompose(norm)
    rep = build_representation(spec, config.p, config.rotation_seed)
    clean = clean_labels(structure)

    base = {
        "config_digest": digest,
        "delta_target": delta_t,
        "delta_measured": delta_m,
        "xi_target": xi_t,
        "xi_measured": xi_m,
        "graph_seed": config.graph_seed,
        "p": config.p,
        "rotation_seed": config.rotation_seed,
        "noise_model": config.noise_model,
    }

    bound_rows = []
    bound_base = {
        "config_digest": digest, "delta_target": delta_t, "xi_target": xi_t,
        "graph_seed": config.graph_seed,
    }
    if "lemmas" in config.suites and xi_m == 0.0:
        for rep_ in bounds_mod.lemma_reports(adj, spec, config.p):
            bound_rows.append({**bound_base, **_report_row(rep_)})
    if "eigenvalue-shift" in config.suites and xi_m > 0.0:
        bar, tilde, _ = split_block_and_residual(adj)
        spec_bar = eigendecompose(bar)
        spec_tilde = eigendecompose(tilde)
        e_op = float(
            np.abs(np.linalg.eigvalsh(tilde.matrix - bar.matrix)).max()
        )
        rep_ = bounds_mod.weyl_check(
            spec_bar.eigenvalues, spec_tilde.eigenvalues, e_op
        )
        bound_rows.append({**bound_base, **_report_row(rep_)})

    rows = []
    for level in config.noise_levels:
        for beta in config.betas:
            closed = None
            if config.noise_model == "gaussian":
                closed = expected_error_closed_form(
                    spec, config.p, clean, beta, level
                )
                if "error-bounds" in config.suites and xi_m == 0.0:
                    dp = delta_prime_from_delta(delta_m)
                    for rep_ in bounds_mod.gaussian_error_bounds(
                        spec, clean, config.p, beta, level, dp
                    ):
                        bound_rows.append({
                            **bound_base, "beta": beta, "sigma": level,
                            **_report_row(rep_),
                        })
            for seed in config.noise_seeds:
                if config.noise_model == "gaussian":
                    noisy = gaussian_noise(clean, level, seed)
                    sigma, alpha = level, None
                else:
                    if config.has_explicit_flip_spec():
                        fspec = FlipSpec(
                            alphas=np.asarray(config.flip_alphas),
                            flip_dist=np.asarray(config.flip_dist),
                            seed=seed,
                        )
                    else:
                        fspec = symmetric_flip_spec(structure, level, seed)
                    noisy, _ = flip_noise(clean, structure, fspec)
                    sigma, alpha = None, level
                fit = ridge_fit(rep, noisy, beta)
                acc = ground_truth_accuracy(fit, clean)
                rows.append({
                    **base,
                    "sigma": sigma,
                    "alpha": alpha,
                    "noise_seed": seed,
                    "beta": beta,
                    "mse": ground_truth_mse(fit, clean),
                    "accuracy": acc.accuracy,
                    "ties": acc.ties,
                    "bias_sq_closed": closed.bias_sq if closed else None,
                    "variance_closed": closed.variance if closed else None,
                    "expected_total": closed.total if closed else None,
                })
    return rows, bound_rows


def _report_row(report: bounds_mod.BoundReport) -> dict:
    return {
        "name": report.name,
        "bound": report.bound_value,
        "observed": report.observed_value,
        "slack": report.slack,
        "holds": report.holds,
    }


def run_sweep(
    config: ExperimentConfig,
    out_dir,
    jobs: Optional[int] = None,
    overwrite: bool = False,
) -> RunManifest:
    start = time.monotonic()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results_path = out / "results.csv"
    if results_path.exists() and not overwrite:
        raise FileExistsError(
            f"{results_path} already exists; pass overwrite to replace it"
        )

    cells = [(config, d, x) for d in config.deltas for x in config.xis]
    if jobs is not None and jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_graph_cell, cells))
    else:
        outcomes = [_run_graph_cell(c) for c in cells]

    rows = [r for cell_rows, _ in outcomes for r in cell_rows]
    bound_rows = [r for _, cell_bounds in outcomes for r in cell_bounds]

    write_csv(results_path, RESULT_COLUMNS, rows)
    files = [str(results_path)]
    if bound_rows or config.suites:
        bounds_path = out / "bounds.csv"
        write_csv(bounds_path, BOUND_COLUMNS, bound_rows)
        files.append(str(bounds_path))

    by_name: dict[str, dict] = {}
    for r in bound_rows:
        entry = by_name.setdefault(r["name"], {"holding": 0, "failing": 0})
        entry["holding" if r["holds"] else "failing"] += 1
    manifest = RunManifest(
        config_digest=config.digest(),
        files=files,
        wall_time_s=time.monotonic() - start,
        summary={
            "result_rows": len(rows),
            "bound_rows": len(bound_rows),
            "bounds_by_name": by_name,
        },
    )
    manifest.write(out / "manifest.json")
    return manifest


# --------------------------------------------------------------------------
# Plotting (presentation only)
# --------------------------------------------------------------------------

PLOT_KINDS = ("accuracy-vs-alpha", "error-vs-beta", "singular-histogram")


def _read_rows(csv_path) -> list[dict]:
    with open(csv_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise ValueError(f"{csv_path} has no data rows; nothing to plot")
    return rows


def _require_columns(rows, needed, csv_path) -> None:
    missing = [c for c in needed if c not in rows[0]]
    if missing:
        raise ValueError(f"{csv_path} is missing column(s) {missing}")


def plot_results(csv_path, kind: str, out_path) -> str:
    """Render one figure from sweep output; returns the written path."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    if kind not in PLOT_KINDS:
        raise ValueError(f"unknown plot kind {kind!r}; known: {list(PLOT_KINDS)}")

    fig, ax = plt.subplots(figsize=(6, 4))
    if kind == "singular-histogram":
        values = [
            float(ln) for ln in Path(csv_path).read_text().split() if ln.strip()
        ]
        if not values:
            raise ValueError(f"{csv_path} has no values; nothing to plot")
        ax.hist(values, bins=min(50, max(5, len(values) // 4)))
        ax.set_xlabel("singular value")
        ax.set_ylabel("count")
    else:
        rows = _read_rows(csv_path)
        if kind == "accuracy-vs-alpha":
            xcol, ycol, group = "alpha", "accuracy", ("delta_target", "beta")
        else:
            xcol, ycol, group = "beta", "mse", ("delta_target", "sigma")
        _require_columns(rows, [xcol, ycol, *group], csv_path)
        series: dict[tuple, dict[float, list[float]]] = {}
        for row in rows:
            if row[xcol] == "" or row[ycol] == "":
                continue
            key = tuple(row[g] for g in group)
            series.setdefault(key, {}).setdefault(float(row[xcol]), []).append(
                float(row[ycol])
            )
        if not series:
            raise ValueError(f"{csv_path} has no usable ({xcol}, {ycol}) points")
        for key in sorted(series):
            xs = sorted(series[key])
            ys = [float(np.mean(series[key][x])) for x in xs]
            label = ", ".join(f"{g}={v}" for g, v in zip(group, key))
            ax.plot(xs, ys, marker="o", label=label)
        if kind == "error-vs-beta":
            ax.set_xscale("log")
        ax.set_xlabel(xcol)
        ax.set_ylabel(ycol)
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_path)
    plt.close(fig)
    return str(out_path)
