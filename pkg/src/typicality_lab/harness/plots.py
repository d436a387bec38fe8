"""Static vector-graphics plots rendered from report tables.

Plots are a convenience view of the CSV data, not a data source: every
number shown also lives in a table. Rendering failures are tolerated
(a missing optional table just skips its figure).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from ..reporting import ExperimentReport


def _save(fig, path: Path) -> None:
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _column(table, name: str) -> np.ndarray:
    idx = table.columns.index(name)
    return np.array([row[idx] for row in table.rows])


def _plot_ladder_measure(report, out_dir, size_column: str) -> None:
    table = report.table("ladder")
    sizes = _column(table, size_column).astype(float)
    measure = _column(table, "measure").astype(float)
    half = _column(table, "ci_halfwidth").astype(float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.errorbar(sizes, measure, yerr=half, marker="o", capsize=3)
    ax.set_xscale("log")
    ax.set_xlabel(size_column)
    ax.set_ylabel("deviation-set measure")
    ax.set_title(report.experiment)
    ax.grid(True, alpha=0.3)
    _save(fig, out_dir / "ladder.svg")


def _plot_maxwell(report, out_dir) -> None:
    _plot_ladder_measure(report, out_dir, "n_particles")
    hist = report.table("velocity_histogram")
    v = _column(hist, "v_center").astype(float)
    emp = _column(hist, "empirical_density").astype(float)
    lim = _column(hist, "limit_density").astype(float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.bar(v, emp, width=v[1] - v[0], alpha=0.5, label="sampled gas")
    ax.plot(v, lim, "k-", lw=1.5, label="limiting density")
    ax.set_xlabel("velocity component")
    ax.set_ylabel("density")
    ax.legend()
    _save(fig, out_dir / "histogram.svg")


def _plot_coin(report, out_dir) -> None:
    _plot_ladder_measure(report, out_dir, "n_tosses")
    table = report.table("ladder")
    sizes = _column(table, "n_tosses").astype(float)
    freq = _column(table, "mean_frequency").astype(float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.semilogx(sizes, freq, "o-")
    ax.axhline(0.5, color="k", ls="--", lw=1)
    ax.set_xlabel("n_tosses")
    ax.set_ylabel("heads frequency")
    ax.grid(True, alpha=0.3)
    _save(fig, out_dir / "frequency.svg")


def _plot_stone(report, out_dir) -> None:
    hist = report.table("deviation_histogram")
    centers = _column(hist, "deviation_center").astype(float)
    counts = _column(hist, "count").astype(float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    width = centers[1] - centers[0] if centers.size > 1 else 1.0
    ax.bar(centers, counts, width=width)
    threshold = report.config.get("resolved_threshold")
    if threshold:
        ax.axvline(threshold, color="r", ls="--", label="failure threshold")
        ax.legend()
    ax.set_xlabel("sup-norm deviation")
    ax.set_ylabel("runs")
    _save(fig, out_dir / "deviations.svg")


def _plot_liouville(report, out_dir) -> None:
    table = report.table("ratios")
    t = _column(table, "t").astype(float)
    ratio = _column(table, "ratio").astype(float)
    lo = _column(table, "ci_low").astype(float)
    hi = _column(table, "ci_high").astype(float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.errorbar(t, ratio, yerr=[ratio - lo, hi - ratio], marker="o", capsize=3)
    ax.axhline(1.0, color="k", ls="--", lw=1)
    ax.set_xlabel("t")
    ax.set_ylabel("volume ratio")
    _save(fig, out_dir / "ratios.svg")


def _plot_equivariance(report, out_dir) -> None:
    cp = report.table("checkpoints")
    t = _column(cp, "t").astype(float)
    l1 = _column(cp, "l1").astype(float)
    q99 = _column(cp, "noise_q99").astype(float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(t, l1, "o-", label="ensemble vs density")
    ax.plot(t, q99, "k--", lw=1, label="sampling noise (99%)")
    ax.set_xlabel("t")
    ax.set_ylabel("distance")
    ax.legend()
    _save(fig, out_dir / "checkpoints.svg")

    hist = report.table("final_histogram")
    c = _column(hist, "bin_center").astype(float)
    emp = _column(hist, "empirical_mass").astype(float)
    tgt = _column(hist, "target_mass").astype(float)
    keep = tgt > tgt.max() * 1e-4
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.bar(c[keep], emp[keep], width=(c[1] - c[0]), alpha=0.5, label="ensemble")
    ax.plot(c[keep], tgt[keep], "k-", lw=1.5, label="density")
    ax.set_xlabel("position")
    ax.set_ylabel("bin mass")
    ax.legend()
    _save(fig, out_dir / "final_histogram.svg")

    bundle = report.table("bundle")
    tb = _column(bundle, "t").astype(float)
    sample = _column(bundle, "sample").astype(int)
    pos = _column(bundle, "position").astype(float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    for s in np.unique(sample):
        keep = sample == s
        ax.plot(tb[keep], pos[keep], lw=0.7, alpha=0.7)
    ax.set_xlabel("t")
    ax.set_ylabel("position")
    ax.set_title("guided trajectories")
    _save(fig, out_dir / "bundle.svg")


def _plot_conditional_born(report, out_dir) -> None:
    table = report.table("bins")
    bins = _column(table, "bin").astype(int)
    l1 = _column(table, "l1")
    q99 = _column(table, "noise_q99")
    included = _column(table, "included").astype(bool)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    good = included & ~np.array([isinstance(v, float) and np.isnan(v) for v in l1])
    ax.bar(bins[good], l1[good].astype(float), label="bin distance")
    ax.plot(bins[good], q99[good].astype(float), "k_", markersize=12, label="noise (99%)")
    ax.set_xlabel("environment bin")
    ax.set_ylabel("distance")
    ax.legend()
    _save(fig, out_dir / "bins.svg")


def _plot_effective(report, out_dir) -> None:
    table = report.table("ladder")
    ratio = _column(table, "s_over_big_s").astype(float)
    score = _column(table, "score").astype(float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.semilogx(ratio, score, "o-")
    ax.set_xlabel("correlation width ratio")
    ax.set_ylabel("detection score")
    ax.grid(True, alpha=0.3)
    _save(fig, out_dir / "scores.svg")


def _plot_born_lln(report, out_dir) -> None:
    table = report.table("ladder")
    m = _column(table, "m").astype(float)
    measure = _column(table, "measure").astype(float)
    lo = _column(table, "ci_low").astype(float)
    hi = _column(table, "ci_high").astype(float)
    oracle = _column(table, "binomial_tail").astype(float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.errorbar(m, measure, yerr=[measure - lo, hi - measure], marker="o", capsize=3, label="estimate")
    ax.plot(m, oracle, "k--", lw=1, label="exact binomial tail")
    ax.set_xscale("log")
    ax.set_xlabel("ensemble size")
    ax.set_ylabel("deviation-set measure")
    ax.legend()
    _save(fig, out_dir / "ladder.svg")


def _plot_uncertainty(report, out_dir) -> None:
    table = report.table("ladder")
    sigma0 = _column(table, "sigma0").astype(float)
    dv = _column(table, "dv").astype(float)
    product = _column(table, "product").astype(float)
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.loglog(sigma0, dv, "o-", label="velocity spread")
    ax.loglog(sigma0, 0.5 / sigma0, "k--", lw=1, label="hbar / (2 m sigma0)")
    ax.set_xlabel("preparation width")
    ax.set_ylabel("velocity spread")
    ax.legend()
    _save(fig, out_dir / "spread.svg")

    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.semilogx(sigma0, product, "o-")
    ax.axhline(0.5, color="k", ls="--", lw=1)
    ax.set_xlabel("preparation width")
    ax.set_ylabel("spread product")
    _save(fig, out_dir / "product.svg")


_PLOTTERS = {
    "maxwell-lln": _plot_maxwell,
    "liouville-check": _plot_liouville,
    "coin-lln": _plot_coin,
    "stone-robustness": _plot_stone,
    "equivariance": _plot_equivariance,
    "conditional-born": _plot_conditional_born,
    "effective-detect": _plot_effective,
    "born-lln": _plot_born_lln,
    "absolute-uncertainty": _plot_uncertainty,
}


def render_report_plots(report: ExperimentReport, out_dir: Path) -> None:
    plotter = _PLOTTERS.get(report.experiment)
    if plotter is None:
        return
    out_dir.mkdir(parents=True, exist_ok=True)
    plotter(report, out_dir)
