"""Deterministic artifact emission: delimited trajectory/sweep data, summary
JSON, and rendered figures.

Numbers are written with the %.17g round-trip format; missing values (NaN)
become empty CSV fields so downstream tools never parse the string "nan".
JSON is emitted with sorted keys and fixed indentation, making outputs
byte-identical for identical inputs.
"""
from __future__ import annotations

import json
import os

import numpy as np

TRAJECTORY_COLUMNS = ("t", "T00", "f_t", "det_T", "Iq", "Icl", "Ccoh",
                      "Cl1_p", "Cl1_q", "eigmin_K", "p_div_margin",
                      "cp_div_margin")


def _cell(value) -> str:
    if value is None:
        return ""
    v = float(value)
    if not np.isfinite(v):
        return ""
    return "%.17g" % v


def write_trajectory_csv(path: str, columns: dict) -> None:
    """Write the per-grid-point table with the fixed column order."""
    missing = [c for c in TRAJECTORY_COLUMNS if c not in columns]
    if missing:
        raise ValueError(f"missing trajectory columns: {missing}")
    rows = len(columns["t"])
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
        for k in range(rows):
            fh.write(",".join(_cell(columns[c][k])
                              for c in TRAJECTORY_COLUMNS) + "\n")


def write_sweep_csv(path: str, key: str, rows: list) -> None:
    """One row per swept parameter value; rows are dicts sharing keys."""
    if not rows:
        raise ValueError("empty sweep")
    header = [key] + [c for c in rows[0] if c != key]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for c in header:
                v = row[c]
                if isinstance(v, bool):
                    cells.append("1" if v else "0")
                elif v is None:
                    cells.append("")
                else:
                    cells.append(_cell(v))
            fh.write(",".join(cells) + "\n")


def _pyify(obj):
    if isinstance(obj, dict):
        return {k: _pyify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_pyify(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return None if np.isnan(v) else v
    if isinstance(obj, np.ndarray):
        return [_pyify(v) for v in obj.tolist()]
    return obj


def write_summary_json(path: str, summary: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(_pyify(summary), sort_keys=True, indent=2))
        fh.write("\n")


def render_trajectory_figure(path: str, grid, columns: dict,
                             title: str) -> None:
    """Two-panel overview: survival/divisibility data on top, information
    series below."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 6.4), sharex=True)
    ax1.plot(grid, columns["T00"], label="T00", color="tab:blue")
    ax1.plot(grid, columns["det_T"], label="det T", color="tab:gray",
             alpha=0.7)
    f = np.asarray(columns["f_t"], dtype=float)
    if np.any(np.isfinite(f)):
        axf = ax1.twinx()
        axf.plot(grid, f, label="f_t", color="tab:red", lw=0.9)
        axf.axhline(0.0, color="tab:red", lw=0.5, ls=":")
        axf.set_ylabel("f_t", color="tab:red")
    ax1.set_ylabel("T00, det T")
    ax1.legend(loc="upper right", fontsize=8)
    ax1.set_title(title)

    ax2.plot(grid, columns["Iq"], label="quantum info", color="tab:green")
    ax2.plot(grid, columns["Icl"], label="classical info",
             color="tab:orange")
    ax2.plot(grid, columns["Ccoh"], label="coherent info",
             color="tab:purple", lw=0.9)
    ax2.set_xlabel("t")
    ax2.set_ylabel("information")
    ax2.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_sweep_figure(path: str, key: str, rows: list) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    values = [row[key] for row in rows]
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for field, color in (("p_div_margin", "tab:blue"),
                         ("cp_div_margin", "tab:red"),
                         ("max_f_t", "tab:orange")):
        ys = [row.get(field) for row in rows]
        if any(y is not None for y in ys):
            ax.plot(values, [np.nan if y is None else y for y in ys],
                    marker="o", ms=3, label=field, color=color)
    ax.axhline(0.0, color="k", lw=0.6, ls=":")
    ax.set_xlabel(key)
    ax.set_ylabel("margin / max f_t")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path
