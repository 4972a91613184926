#!/usr/bin/env python3
"""Plot mean SQNR against the sweep grid from `lcc sweep` CSV output.

    python3 scripts/plot_sweep.py sweep.csv -o sweep.png [--dashed other.csv]

Only the `mean` rows are used. A second CSV given with --dashed is drawn
with dashed lines on the same axes (e.g. adders-only next to total cost).
"""

import argparse

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402


def mean_rows(path):
    df = pd.read_csv(path, dtype={"trial": str, "dmax": str, "q": str, "flag": str})
    df = df[df["trial"] == "mean"].copy()
    df["sqnr_db"] = pd.to_numeric(df["sqnr_db"], errors="coerce")
    return df


def draw(ax, df, style):
    for label, group in df.groupby("algorithm", sort=False):
        group = group.sort_values("grid")
        ax.plot(group["grid"], group["sqnr_db"], style, marker="o", ms=3, label=f"{label}")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("csv")
    ap.add_argument("--dashed", help="second sweep drawn dashed")
    ap.add_argument("-o", "--out", default="sweep.png")
    ap.add_argument("--xlabel", default="budget")
    ap.add_argument("--title", default="")
    args = ap.parse_args()

    fig, ax = plt.subplots(figsize=(6, 4))
    draw(ax, mean_rows(args.csv), "-")
    if args.dashed:
        ax.set_prop_cycle(None)
        draw(ax, mean_rows(args.dashed), "--")
    ax.set_xlabel(args.xlabel)
    ax.set_ylabel("mean SQNR [dB]")
    if args.title:
        ax.set_title(args.title)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)


if __name__ == "__main__":
    main()
