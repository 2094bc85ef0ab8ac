"""Figure rendering for experiment runs.

Writes PNGs next to the delimited output: one success-rate-vs-n panel per
(m, k, t, r) parameter combination with Wilson error bars against the
theoretical lower bound, plus an overview scatter of empirical rate versus
bound across all cells.
"""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _bound_curve(m: int, k: int, t: float, r: float, ns) -> list[float]:
    log_c = (t - r) ** 2 / 4.0
    return [max(0.0, 1.0 - m * k * math.exp(-n * log_c)) for n in ns]


def render_run(out_dir: Path, cell_dicts: list[dict]) -> list[Path]:
    """Render all figures for a run; returns the written paths."""
    fig_dir = Path(out_dir) / "figures"
    fig_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    groups: dict[tuple, list[dict]] = defaultdict(list)
    for c in cell_dicts:
        groups[(c["m"], c["k"], c["t"], c["r"])].append(c)

    for (m, k, t, r), cells in sorted(groups.items()):
        cells = sorted(cells, key=lambda c: c["n"])
        ns = [c["n"] for c in cells]
        rates = [c["rate"] for c in cells]
        err_lo = [max(0.0, c["rate"] - c["wilson_low"]) for c in cells]
        err_hi = [max(0.0, c["wilson_high"] - c["rate"]) for c in cells]

        fig, ax = plt.subplots(figsize=(6, 4))
        ax.errorbar(ns, rates, yerr=[err_lo, err_hi], fmt="o", capsize=3,
                    label="empirical (Wilson 95%)", color="tab:blue")
        curve_ns = range(1, max(ns) + 1) if max(ns) > 1 else [1]
        ax.plot(curve_ns, _bound_curve(m, k, t, r, curve_ns), "-",
                color="tab:red", label="theoretical lower bound")
        ax.set_xlabel("epoch pairs n")
        ax.set_ylabel("success rate")
        ax.set_ylim(-0.05, 1.05)
        ax.set_title(f"m={m}, k={k}, t={t}, r={r}")
        ax.legend(loc="lower right", fontsize=8)
        fig.tight_layout()
        path = fig_dir / f"rate_m{m}_k{k}_t{t}_r{r}.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    if cell_dicts:
        fig, ax = plt.subplots(figsize=(5, 5))
        xs = [c["bound_clamped"] for c in cell_dicts]
        ys = [c["rate"] for c in cell_dicts]
        colors = ["tab:green" if c["pass"] else "tab:red" for c in cell_dicts]
        ax.scatter(xs, ys, c=colors, s=25, alpha=0.8)
        ax.plot([0, 1], [0, 1], "k--", linewidth=1, label="rate = bound")
        ax.set_xlabel("theoretical lower bound (clamped)")
        ax.set_ylabel("empirical success rate")
        ax.set_xlim(-0.02, 1.02)
        ax.set_ylim(-0.02, 1.02)
        ax.set_title("bound dominance across cells")
        ax.legend(loc="upper left", fontsize=8)
        fig.tight_layout()
        path = fig_dir / "bound_dominance.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    return written
