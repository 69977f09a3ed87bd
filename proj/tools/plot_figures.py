#!/usr/bin/env python3
"""Render the figure data files produced by `hrg all-figures`.

Usage:
    hrg all-figures --out-dir figures --threads 8
    python3 tools/plot_figures.py figures [--out figures/plots]

Reads sigma2_scan.csv, kappa_surface.csv, tstar_surface.csv and
vstar_profile.csv from the given directory and writes one PNG per figure.
Comment lines starting with '#' carry the run configuration and are skipped.
"""
import argparse
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def read_csv(path: pathlib.Path) -> pd.DataFrame:
    if not path.exists():
        sys.exit(f"missing {path}; run `hrg all-figures` first")
    return pd.read_csv(path, comment="#")


def header_value(path: pathlib.Path, key: str) -> float:
    prefix = f"# {key}="
    with open(path) as fh:
        for line in fh:
            if line.startswith(prefix):
                return float(line[len(prefix):])
            if not line.startswith("#"):
                break
    raise KeyError(key)


def plot_sigma2(data_dir: pathlib.Path, out_dir: pathlib.Path) -> None:
    path = data_dir / "sigma2_scan.csv"
    df = read_csv(path)
    beta_c = header_value(path, "beta_c")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    ax1.plot(df.beta, df.sigma2, lw=1.5)
    ax1.plot(df.beta, 1.0 / df.beta, "k--", lw=0.8, label=r"$1/\beta$")
    ax1.axvline(beta_c, color="gray", ls=":", lw=0.8)
    ax1.set_xlabel(r"$\beta$")
    ax1.set_ylabel(r"$\sigma^2(\beta)$")
    ax1.legend()
    ax2.plot(df.beta, df.dsigma2_dbeta, lw=1.5)
    ax2.axvline(beta_c, color="gray", ls=":", lw=0.8)
    ax2.set_xlabel(r"$\beta$")
    ax2.set_ylabel(r"$d\sigma^2/d\beta$")
    fig.tight_layout()
    fig.savefig(out_dir / "sigma2_scan.png", dpi=160)
    plt.close(fig)


def plot_kappa_surface(data_dir: pathlib.Path, out_dir: pathlib.Path) -> None:
    df = read_csv(data_dir / "kappa_surface.csv")
    alphas = np.sort(df.alpha.unique())
    betas = np.sort(df.beta.unique())
    grid = df.pivot(index="alpha", columns="beta", values="kappa")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    im = ax.pcolormesh(betas, alphas, grid.values, shading="auto")
    fig.colorbar(im, ax=ax, label=r"$\kappa(\alpha,\beta)$")
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel(r"$\alpha$")
    fig.tight_layout()
    fig.savefig(out_dir / "kappa_surface.png", dpi=160)
    plt.close(fig)

    # cross sections at a few alphas
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for a in alphas[:: max(1, len(alphas) // 5)][1:]:
        sel = df[df.alpha == a]
        ax.plot(sel.beta, sel.kappa, label=rf"$\alpha={a:.2f}$")
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel(r"$\kappa$")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_dir / "kappa_sections.png", dpi=160)
    plt.close(fig)


def plot_tstar_surface(data_dir: pathlib.Path, out_dir: pathlib.Path) -> None:
    df = read_csv(data_dir / "tstar_surface.csv")
    alphas = np.sort(df.alpha.unique())
    betas = np.sort(df.beta.unique())
    grid = df.pivot(index="alpha", columns="beta", values="t_star")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    im = ax.pcolormesh(betas, alphas, grid.values, shading="auto")
    fig.colorbar(im, ax=ax, label=r"$t_\star(\alpha,\beta)$")
    ax.set_xlabel(r"$\beta$")
    ax.set_ylabel(r"$\alpha$")
    fig.tight_layout()
    fig.savefig(out_dir / "tstar_surface.png", dpi=160)
    plt.close(fig)


def plot_vstar(data_dir: pathlib.Path, out_dir: pathlib.Path) -> None:
    df = read_csv(data_dir / "vstar_profile.csv")
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for theta in sorted(df.theta.unique()):
        sel = df[df.theta == theta]
        ax.plot(sel.z, sel.exp_neg_vstar, label=rf"$\theta={theta:g}$")
    ax.axhline(1.0, color="gray", ls=":", lw=0.8)
    ax.set_xlabel(r"$z$")
    ax.set_ylabel(r"$e^{-v_\star(z)}$ (unit zero mode)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_dir / "vstar_profile.png", dpi=160)
    plt.close(fig)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("data_dir", type=pathlib.Path)
    ap.add_argument("--out", type=pathlib.Path, default=None,
                    help="output directory (default: <data_dir>/plots)")
    args = ap.parse_args()
    out_dir = args.out or args.data_dir / "plots"
    out_dir.mkdir(parents=True, exist_ok=True)
    plot_sigma2(args.data_dir, out_dir)
    plot_kappa_surface(args.data_dir, out_dir)
    plot_tstar_surface(args.data_dir, out_dir)
    plot_vstar(args.data_dir, out_dir)
    print(f"wrote plots to {out_dir}")


if __name__ == "__main__":
    main()
