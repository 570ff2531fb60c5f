"""Figure rendering for the CLI report path.

Each function takes the rows already written to CSV (list of dicts) and
renders a PNG next to the delimited output.  Rendering is headless.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = [
    "plot_coincidence",
    "plot_visibility_vs_chi",
    "plot_visibility_vs_distance",
    "plot_perfect_detector",
    "plot_keyrate_vs_distance",
    "plot_tgw_comparison",
    "plot_sweep",
]

_N_COLORS = {1: "tab:blue", 2: "tab:orange", 3: "tab:green"}


def _column(rows: list[dict], name: str) -> list[float]:
    out = []
    for r in rows:
        value = r.get(name)
        out.append(math.nan if value in (None, "NA") else float(value))
    return out


def _finite(xs: list[float], ys: list[float]) -> tuple[list[float], list[float]]:
    pairs = [(x, y) for x, y in zip(xs, ys) if math.isfinite(y)]
    if not pairs:
        return [], []
    return [p[0] for p in pairs], [p[1] for p in pairs]


def _save(fig, path: str) -> None:
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_coincidence(rows: list[dict], path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    x = _column(rows, "delta_b_pi")
    ax.plot(x, _column(rows, "q_corr"), "o--", ms=3, label="Q(1010)+Q(0101)")
    ax.plot(x, _column(rows, "q_anti"), "s-", ms=3, label="Q(1001)+Q(0110)")
    ax.set_xlabel(r"$\delta_B$ / $\pi$")
    ax.set_ylabel("coincidence probability")
    ax.legend()
    ax.grid(alpha=0.3)
    _save(fig, path)


def _per_n_lines(rows: list[dict], ax, x_name: str, y_name: str) -> None:
    ns = sorted({int(r["n_swaps"]) for r in rows})
    for n in ns:
        sub = [r for r in rows if int(r["n_swaps"]) == n]
        x, y = _finite(_column(sub, x_name), _column(sub, y_name))
        ax.plot(x, y, "o-", ms=3, color=_N_COLORS.get(n), label=f"N={n}")
    ax.legend()
    ax.grid(alpha=0.3)


def _wide_visibility_lines(rows: list[dict], ax, x_name: str) -> None:
    x = _column(rows, x_name)
    for name in rows[0]:
        if not name.startswith("visibility_n"):
            continue
        n = int(name.removeprefix("visibility_n"))
        xs, ys = _finite(x, _column(rows, name))
        ax.plot(xs, ys, "o-", ms=3, color=_N_COLORS.get(n), label=f"N={n}")
    ax.legend()
    ax.grid(alpha=0.3)


def plot_visibility_vs_chi(rows: list[dict], path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    _wide_visibility_lines(rows, ax, "chi")
    ax.set_xlabel(r"$\chi$")
    ax.set_ylabel("visibility")
    _save(fig, path)


def plot_visibility_vs_distance(rows: list[dict], path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    _wide_visibility_lines(rows, ax, "length_km")
    ax.set_xlabel("distance (km)")
    ax.set_ylabel("visibility")
    _save(fig, path)


def plot_perfect_detector(rows: list[dict], path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    x, y = _finite(_column(rows, "length_km"), _column(rows, "visibility"))
    ax.plot(x, y, "o-", ms=3)
    ax.set_xlabel("distance (km)")
    ax.set_ylabel("visibility")
    ax.set_ylim(0, 1.02)
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_keyrate_vs_distance(rows: list[dict], path: str) -> None:
    fig, axes = plt.subplots(1, 3, figsize=(13, 4))
    _per_n_lines(rows, axes[0], "length_km", "log10_r_max")
    axes[0].set_xlabel("distance (km)")
    axes[0].set_ylabel(r"$\log_{10} R_{max}$")
    _per_n_lines(rows, axes[1], "length_km", "chi_opt")
    axes[1].set_xlabel("distance (km)")
    axes[1].set_ylabel(r"$\chi_{opt}$")
    _per_n_lines(rows, axes[2], "length_km", "eta_opt")
    axes[2].set_xlabel("distance (km)")
    axes[2].set_ylabel(r"$\eta_{opt}$")
    _save(fig, path)


def plot_tgw_comparison(rows: list[dict], path: str) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    x = _column(rows, "length_km")
    ax.semilogy(x, _column(rows, "r_tgw"), "k-", label="TGW bound")
    for n in (1, 2, 3):
        name = f"upper_bound_n{n}"
        if name in rows[0]:
            ax.semilogy(x, _column(rows, name), "--", color=_N_COLORS[n], label=f"N={n}")
    ax.set_xlabel("distance (km)")
    ax.set_ylabel("rate per pulse")
    ax.legend()
    ax.grid(alpha=0.3, which="both")
    _save(fig, path)


def plot_sweep(rows: list[dict], x_name: str, path: str) -> None:
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    x = _column(rows, x_name)
    for name, style in (("visibility", "o-"), ("qber", "s--")):
        xs, ys = _finite(x, _column(rows, name))
        axes[0].plot(xs, ys, style, ms=3, label=name)
    axes[0].set_xlabel(x_name)
    axes[0].legend()
    axes[0].grid(alpha=0.3)
    for name, style in (("r_sifted", "o-"), ("r_net", "s-"), ("r_tgw", "k--")):
        xs, ys = _finite(x, _column(rows, name))
        pos = [(a, b) for a, b in zip(xs, ys) if b > 0]
        if pos:
            axes[1].semilogy([p[0] for p in pos], [p[1] for p in pos], style, ms=3, label=name)
    axes[1].set_xlabel(x_name)
    axes[1].legend()
    axes[1].grid(alpha=0.3, which="both")
    _save(fig, path)
