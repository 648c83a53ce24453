"""Optional figure rendering for the CLI's --plot flag.

Each function reads the data file a command just wrote and renders a
PNG next to it, so a figure is a pure function of the output bytes.
matplotlib is imported lazily here and nowhere else in the library.
"""

from __future__ import annotations

import csv
import json

import numpy as np

__all__ = ["plot_solve", "plot_sweep", "plot_trace", "plot_compare", "plot_twotier"]


def _axes():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0), layout="constrained")
    return plt, fig, ax


def _read_csv(path: str):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def plot_solve(data_path: str, png_path: str) -> None:
    payload = json.loads(open(data_path).read())
    plt, fig, ax = _axes()
    for name, marker in (("bisection", "."), ("iteration", "o")):
        trace = np.asarray(payload[name]["trace"], dtype=float)
        ax.plot(trace[:, 0], trace[:, 1], marker=marker, ms=4, lw=1, label=name)
    ax.axhline(payload["lambda_star_bps"], color="k", lw=0.6, ls=":")
    ax.set_xlabel("iteration")
    ax.set_ylabel("rate of return (bit/s)")
    ax.legend()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def plot_sweep(data_path: str, png_path: str) -> None:
    _, rows = _read_csv(data_path)
    data = np.asarray(rows, dtype=float)
    plt, fig, ax = _axes()
    ax.errorbar(data[:, 0], data[:, 1], yerr=data[:, 2], lw=1.2, elinewidth=0.8, capsize=2)
    best = int(np.argmax(data[:, 1]))
    ax.axvline(data[best, 0], color="k", lw=0.6, ls=":")
    ax.set_xlabel("connection threshold (bit/s/Hz)")
    ax.set_ylabel("average throughput (bit/s)")
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def plot_trace(data_path: str, png_path: str) -> None:
    _, rows = _read_csv(data_path)
    data = np.asarray(rows, dtype=float)
    plt, fig, ax = _axes()
    ax.step(data[:, 1], data[:, 2], where="post")
    ax.set_xlabel("elapsed search time (s)")
    ax.set_ylabel("best admissible reward (bit)")
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def plot_compare(data_path: str, png_path: str) -> None:
    _, rows = _read_csv(data_path)
    labels = [f"{r[0]}:{r[1]}" if r[1] else r[0] for r in rows]
    values = np.array([float(r[2]) for r in rows])
    errors = np.array([float(r[3]) for r in rows])
    plt, fig, ax = _axes()
    ax.bar(np.arange(len(labels)), values, yerr=errors, capsize=3)
    ax.set_xticks(np.arange(len(labels)), labels, rotation=20, ha="right")
    ax.set_ylabel("average throughput (bit/s)")
    fig.savefig(png_path, dpi=150)
    plt.close(fig)


def plot_twotier(data_path: str, png_path: str) -> None:
    _, rows = _read_csv(data_path)
    body = [r for r in rows if r[0] != "aggregate"]
    bs_ids = sorted({int(r[1]) for r in body})
    counts = {b: [] for b in bs_ids}
    tiers = {}
    for r in body:
        counts[int(r[1])].append(float(r[5]))
        tiers[int(r[1])] = r[2]
    means = [np.mean(counts[b]) for b in bs_ids]
    stds = [np.std(counts[b]) for b in bs_ids]
    colors = ["tab:blue" if tiers[b] == "macro" else "tab:orange" for b in bs_ids]
    plt, fig, ax = _axes()
    ax.bar(bs_ids, means, yerr=stds, capsize=3, color=colors)
    ax.set_xlabel("base station")
    ax.set_ylabel("associated users")
    ax.set_xticks(bs_ids)
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
