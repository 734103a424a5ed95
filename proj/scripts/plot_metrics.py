#!/usr/bin/env python3
"""Plot sol simulation metrics CSVs.

Usage: plot_metrics.py metrics1.csv [metrics2.csv ...] [-o out.png]

Draws relations, bandwidth and crypto-operation panels; multiple CSVs
(e.g. one per degree or algorithm) are overlaid and labelled by filename.
"""

import argparse
import csv
import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def load(path):
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    cols = {k: [float(r[k]) for r in rows] for k in rows[0]}
    cols["time_min"] = [t / 60.0 for t in cols["time_s"]]
    return cols


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("csvs", nargs="+")
    ap.add_argument("-o", "--out", default="metrics.png")
    args = ap.parse_args()

    fig, axes = plt.subplots(1, 3, figsize=(15, 4))
    for path in args.csvs:
        data = load(path)
        label = pathlib.Path(path).stem
        t = data["time_min"]

        axes[0].plot(t, data["direct_total"], label=f"{label} direct")
        known = [k for k in data if k.startswith("known_d")]
        if known:
            widest = sorted(known)[-1]
            axes[0].plot(t, data[widest], linestyle="--", label=f"{label} transitive")

        axes[1].plot(t, [b / 1024 for b in data["handshake_bytes"]], label=f"{label} handshake")
        axes[1].plot(t, [b / 1024 for b in data["sync_query_bytes"]], linestyle="--",
                     label=f"{label} query")
        axes[1].plot(t, [b / 1024 for b in data["sync_response_bytes"]], linestyle=":",
                     label=f"{label} response")

        axes[2].plot(t, data["sign_ops"], label=f"{label} sign")
        axes[2].plot(t, data["verify_ops"], linestyle="--", label=f"{label} verify")

    for ax, (title, ylabel) in zip(
        axes,
        [("trust relations", "count"), ("bandwidth", "KiB cumulative"),
         ("crypto operations", "count cumulative")],
    ):
        ax.set_title(title)
        ax.set_xlabel("time [min]")
        ax.set_ylabel(ylabel)
        ax.legend(fontsize=7)
        ax.grid(True, alpha=0.3)

    fig.tight_layout()
    fig.savefig(args.out, dpi=130)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
