"""Figure rendering for the report path.

Every command that writes a delimited table can also render the matching
figure next to it.  Rendering is best-effort presentation; the CSV stays the
machine-readable source of truth.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def render_slot_se(slots, se, pilot_slots, path, units="nats"):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.stem(slots, se)
    for p in pilot_slots:
        ax.axvline(p, color="0.8", linestyle="--", linewidth=1)
    ax.set_xlabel("slot")
    ax.set_ylabel(f"deterministic SE [{units}]")
    ax.set_title("Per-slot deterministic spectral efficiency")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_sweep(values, ase, parameter, path, units="nats"):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.plot(values, ase, "o-")
    if len(values) > 1 and max(values) / max(min(values), 1e-12) > 50:
        ax.set_xscale("log")
    ax.set_xlabel(parameter)
    ax.set_ylabel(f"ASE [{units}]")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_montecarlo(slots, mc_mean, mc_std, se_det, path, units="nats"):
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.errorbar(slots, mc_mean, yerr=mc_std, fmt="o", capsize=3,
                label="Monte Carlo mean +/- std")
    ax.plot(slots, se_det, "s--", label="deterministic equivalent")
    ax.set_xlabel("slot")
    ax.set_ylabel(f"SE [{units}]")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_candidates(rows, path, units="nats"):
    """ASE of every enumerated layout, grouped by frame count."""
    fig, ax = plt.subplots(figsize=(8, 4))
    ok = [r for r in rows if not r.get("error")]
    frames = [r["frames"] for r in ok]
    ases = [r["ase_nats"] for r in ok]
    ax.scatter(range(len(ok)), ases, c=frames, cmap="viridis", s=18)
    best = max(range(len(ok)), key=lambda i: ases[i])
    ax.annotate(ok[best]["layout"], (best, ases[best]),
                textcoords="offset points", xytext=(4, 4))
    ax.set_xlabel("candidate (ordered by frame count, sizes)")
    ax.set_ylabel(f"ASE [{units}]")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_table_blocks(rows, path, units="nats"):
    """Grouped bars: computed vs reference ASE per block/layout."""
    fig, ax = plt.subplots(figsize=(10, 4.5))
    labels = [f"{r['block']}\n{r['layout']}" for r in rows]
    x = range(len(rows))
    computed = [r["ase_reported"] for r in rows]
    reference = [r["reference_ase"] for r in rows]
    ax.bar([i - 0.2 for i in x], computed, width=0.4, label="computed")
    ax.bar([i + 0.2 for i in x], reference, width=0.4, label="reference")
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, fontsize=6, rotation=60)
    ax.set_ylabel(f"ASE [{units}]")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
