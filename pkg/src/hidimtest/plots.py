"""Figure rendering for experiment results.

Renders the two figure families the result tables support: rejection-rate
curves against the sample size (one panel per covariance/distribution
group, one line per test kind and aspect ratio) and the size-versus-excess-
kurtosis sweep.  Files are written as PNGs with deterministic names
derived from the group labels.
"""

from __future__ import annotations

import re
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = ["render_figures"]


def _slug(text: str) -> str:
    out = re.sub(r"[^A-Za-z0-9.]+", "-", text).strip("-")
    return out or "group"


def _group_key(row) -> str:
    if row.cov or row.dist:
        return f"{row.cov or 'unknown'}_{row.dist or 'unknown'}"
    return row.config_hash or "result"


def _is_sweep(rows) -> bool:
    deltas = {row.delta for row in rows}
    cells = {(row.p, row.n) for row in rows}
    return len(deltas) > 1 and len(cells) == 1 and all(
        row.test == rows[0].test for row in rows
    )


def _render_sweep(rows, outdir: Path) -> Path:
    rows = sorted(rows, key=lambda r: r.delta)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot([r.delta for r in rows], [r.rate for r in rows],
            marker="o", label=rows[0].test)
    ax.axhline(rows[0].alpha, linestyle="--", linewidth=1.0,
               label=f"nominal {rows[0].alpha:g}")
    ax.set_xlabel("excess kurtosis of entries")
    ax.set_ylabel("empirical size")
    ax.set_title(f"size vs fourth moment (p={rows[0].p}, n={rows[0].n})")
    ax.legend()
    path = outdir / "size_vs_delta.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def _render_rates(key: str, rows, outdir: Path) -> Path:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    lines = {}
    for row in rows:
        lines.setdefault((row.test, round(row.y_n, 6)), []).append(row)
    for (test, y), line_rows in sorted(lines.items()):
        line_rows = sorted(line_rows, key=lambda r: r.n)
        ax.plot([r.n for r in line_rows], [r.rate for r in line_rows],
                marker="o", label=f"{test}, y={y:g}")
    ax.axhline(rows[0].alpha, linestyle="--", linewidth=1.0)
    ax.set_xlabel("sample size n")
    ax.set_ylabel("rejection rate")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(key.replace("_", "  "))
    ax.legend(fontsize=8)
    path = outdir / f"rates_{_slug(key)}.png"
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    return path


def render_figures(rows, outdir) -> list:
    """Render one PNG per result group; returns the written paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    groups: dict = {}
    for row in rows:
        groups.setdefault(_group_key(row), []).append(row)
    written = []
    if _is_sweep(list(rows)):
        written.append(_render_sweep(list(rows), outdir))
        return written
    for key in sorted(groups):
        grp = groups[key]
        if _is_sweep(grp):
            written.append(_render_sweep(grp, outdir))
        else:
            written.append(_render_rates(key, grp, outdir))
    return written
