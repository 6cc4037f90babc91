"""Figures summarising an exploration or a check run."""
from __future__ import annotations

from collections import Counter

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def lts_figure(lts_json: dict, path: str, title: str = "") -> None:
    """States per depth and how often each rule fires, side by side."""
    depths = Counter(s["depth"] for s in lts_json["states"])
    rules = Counter(e["rule"] for e in lts_json["edges"])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
    xs = sorted(depths)
    ax1.bar(xs, [depths[d] for d in xs], color="#4c72b0")
    ax1.set_xlabel("depth")
    ax1.set_ylabel("new states")
    ax1.set_xticks(xs)
    names = sorted(rules)
    ax2.barh(names, [rules[n] for n in names], color="#dd8452")
    ax2.set_xlabel("edges")
    ax2.invert_yaxis()
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def check_figure(report: dict, path: str, title: str = "") -> None:
    """Counts carried by a check report (anything numeric) against its violations."""
    counts = {k: v for k, v in report.items() if isinstance(v, int) and not isinstance(v, bool)}
    for k, v in report.items():
        if isinstance(v, list):
            counts[k] = len(v)
    names = sorted(counts)
    fig, ax = plt.subplots(figsize=(7, 0.5 * len(names) + 1.5))
    colours = ["#c44e52" if "violation" in n or n.endswith("not_atomic") or n.endswith("not_decoupled")
               else "#55a868" for n in names]
    ax.barh(names, [counts[n] for n in names], color=colours)
    ax.invert_yaxis()
    ax.set_xlabel("count")
    ax.set_title(title or report.get("schema", ""))
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
