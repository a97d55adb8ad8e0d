"""
PNG plots of sweep results and bound decay.

  errors_vs_n_alpha{a}.png   mean measured errors against n, with the empirical chain bound
  chain_slack_hist.png       distribution of chain_bound_emp - erasure_err over all runs
  bound_decay.png            eps_n, theta_n and their product past the crossover n0
"""
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from .bounds import DecayProfile  # noqa: E402
from .summary import ERROR_COLS  # noqa: E402


def _ok_rows(frame: pd.DataFrame) -> pd.DataFrame:
    d = frame.copy()
    if "error" in d.columns:
        d = d[d["error"].isna()]
    for c in ERROR_COLS + ("chain_bound_emp", "n", "alpha"):
        d[c] = pd.to_numeric(d[c], errors="coerce")
    return d


def plot_errors_vs_n(frame: pd.DataFrame, outdir: Path) -> List[Path]:
    d = _ok_rows(frame)
    written = []
    for alpha, group in d.groupby("alpha"):
        means = group.groupby("n")[["erasure_err", "marginal_err", "chain_bound_emp"]].mean()
        fig, ax = plt.subplots(figsize=(8, 5))
        ax.plot(means.index, means["erasure_err"], marker="o", label="erasure error")
        ax.plot(means.index, means["marginal_err"], marker="s", label="marginal error")
        ax.plot(means.index, means["chain_bound_emp"], linestyle="--", color="grey",
                label="2 Xi(eps) + 2 theta")
        ax.axhline(2.0, color="black", linewidth=0.6, alpha=0.4)
        ax.set_title(f"Measured errors, alpha = {alpha:g}")
        ax.set_xlabel("copies n")
        ax.set_ylabel("trace distance")
        ax.legend()
        fig.tight_layout()
        path = outdir / f"errors_vs_n_alpha{alpha:g}.png"
        fig.savefig(path, dpi=200)
        plt.close(fig)
        written.append(path)
    return written


def plot_chain_slack(frame: pd.DataFrame, outdir: Path) -> Path:
    d = _ok_rows(frame)
    slack = (d["chain_bound_emp"] - d["erasure_err"]).dropna()
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.hist(slack, bins=20, edgecolor="black")
    ax.set_title(f"Chain slack over {len(slack)} runs")
    ax.set_xlabel("chain_bound_emp - erasure_err")
    ax.set_ylabel("runs")
    fig.tight_layout()
    path = outdir / "chain_slack_hist.png"
    fig.savefig(path, dpi=200)
    plt.close(fig)
    return path


def plot_bound_decay(profile: DecayProfile, outdir: Path) -> Path:
    fig, ax = plt.subplots(figsize=(8, 5))
    ax.semilogy(profile.n_values, profile.eps, label="eps_n")
    ax.semilogy(profile.n_values, profile.theta, label="theta_n")
    ax.semilogy(profile.n_values, profile.product, label="eps_n theta_n")
    ax.set_title(f"Bound decay from n0 = {profile.n0}")
    ax.set_xlabel("copies n")
    ax.legend()
    fig.tight_layout()
    path = outdir / "bound_decay.png"
    fig.savefig(path, dpi=200)
    plt.close(fig)
    return path


def plot_sweep(frame: pd.DataFrame, outdir) -> List[Path]:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    return plot_errors_vs_n(frame, outdir) + [plot_chain_slack(frame, outdir)]
