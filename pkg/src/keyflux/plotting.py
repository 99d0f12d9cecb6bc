"""Figure rendering for reports: design-efficiency curves and risk
timelines, written as image files next to the delimited data."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .analysis import DesignCurve, RiskProfile

_KIND_COLORS = {
    "LB": "tab:blue",
    "JB": "tab:orange",
    "JLB": "tab:green",
    "TB": "tab:red",
    "MB": "tab:purple",
    "HY": "tab:brown",
}


def plot_design_curves(curves: list[DesignCurve], path: str, title: str | None = None) -> str:
    """Scatter/line chart: cost per month on x, risk percentage on y, one
    series per (kind, phase). Before-stabilisation series are dashed."""
    fig, ax = plt.subplots(figsize=(7.5, 5.5))
    for curve in curves:
        xs = [p.cost_per_month for p in curve.points]
        ys = [p.risk_percent for p in curve.points]
        color = _KIND_COLORS.get(curve.kind, "tab:gray")
        style = "--" if curve.phase == "before" else "-"
        marker = "s" if curve.phase == "before" else "o"
        ax.plot(
            xs,
            ys,
            style,
            marker=marker,
            color=color,
            label=f"{curve.kind} ({curve.phase})",
            markersize=5,
        )
        for p in curve.points:
            ax.annotate(
                str(p.threshold),
                (p.cost_per_month, p.risk_percent),
                textcoords="offset points",
                xytext=(4, 3),
                fontsize=7,
                color=color,
            )
    ax.set_xlabel("Cost of key update (updates / month)")
    ax.set_ylabel("Risk of key compromise (%)")
    ax.set_title(title or "Design-efficiency curves")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_risk_timeline(
    profile: RiskProfile,
    path: str,
    title: str | None = None,
    days_per_month: int = 30,
) -> str:
    """Monthly risk line with the steady-state level and the stabilisation
    month marked."""
    months = np.arange(1, len(profile.monthly_risk) + 1)
    fig, ax = plt.subplots(figsize=(7.5, 4.0))
    ax.plot(months, profile.monthly_risk, "-", color="tab:blue", label="monthly risk")
    ax.axhline(
        profile.steady_risk,
        color="tab:gray",
        linestyle=":",
        label=f"steady state ({profile.steady_risk:.4f})",
    )
    ax.axvline(
        profile.stabilisation_month,
        color="tab:red",
        linestyle="--",
        label=f"stabilisation (month {profile.stabilisation_month})",
    )
    ax.set_xlabel(f"Month ({days_per_month} days)")
    ax.set_ylabel("Probability of key compromise")
    ax.set_title(title or "Risk of key compromise over time")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
