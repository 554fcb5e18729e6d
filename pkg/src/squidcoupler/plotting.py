"""Figure rendering for the CLI report path.

Each CLI command that emits a CSV/JSON report can also render the matching
figure to an image file next to it.  Rendering is presentation only: every
number shown comes from the same rows that go into the delimited output.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .coupler import BetaPoint, QubitPair, SweepPoint
from .dynamics import PulseSchedule


def save_squid_curves(path, curves: dict[float, list[dict]], ic_rows: list[dict]) -> None:
    """J(Phi_s) for each bias ratio plus the Ic(Phi_s) inset curve."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    for ratio, rows in sorted(curves.items()):
        phi = [r["phi_s"] for r in rows if r["status"] == "ok"]
        j = [r["J_uA"] for r in rows if r["status"] == "ok"]
        ax.plot(phi, j, label=f"Ib/Ic(0.45) = {ratio:g}")
    ax.set_xlabel(r"$\Phi_s / \Phi_0$")
    ax.set_ylabel(r"J ($\mu$A)")
    ax.legend(fontsize=8, loc="lower left")
    inset = fig.add_axes([0.18, 0.62, 0.25, 0.25])
    inset.plot([r["phi_s"] for r in ic_rows], [r["Ic_uA"] for r in ic_rows], "k-")
    inset.set_xlabel(r"$\Phi_s/\Phi_0$", fontsize=7)
    inset.set_ylabel(r"$I_c$ ($\mu$A)", fontsize=7)
    inset.tick_params(labelsize=6)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def save_coupling_sweep(path, rows: list[SweepPoint]) -> None:
    """Net coupling K/h versus bias ratio, with the zero crossing marked."""
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    x = [r.ib_ratio for r in rows]
    ax.plot(x, [r.K_GHz for r in rows], "b-", label="K/h")
    ax.plot(x, [r.K0_GHz for r in rows], "k--", lw=0.8, label="K0/h")
    ax.plot(x, [r.Ks_GHz for r in rows], "r:", lw=0.8, label="Ks/h")
    ax.axhline(0.0, color="gray", lw=0.5)
    ax.set_xlabel(r"$I_b / I_c$")
    ax.set_ylabel("coupling (GHz)")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def save_beta_sweep(path, rows: list[BetaPoint]) -> None:
    """Highest achievable Ks versus the screening parameter."""
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    beta = [r.beta_L for r in rows]
    ks = [r.Ks_GHz for r in rows]
    ax.plot(beta, ks, "bo-", ms=3)
    ax.set_xscale("log")
    ax.set_xlabel(r"$\beta_L$")
    ax.set_ylabel(r"$K_s/h$ at $0.85\,I_c$ (GHz)")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def save_noise_curve(path, ratios: np.ndarray, alphas: np.ndarray, marker_ratio: float) -> None:
    """Ohmic coefficient versus bias ratio with the decoupling point marked."""
    fig, ax = plt.subplots(figsize=(5.4, 4.0))
    ax.plot(ratios, alphas, "b-")
    ax.axvline(marker_ratio, color="gray", lw=0.6, ls="--")
    ax.set_xlabel(r"$I_b / I_c$")
    ax.set_ylabel(r"$\alpha$")
    ax.set_yscale("log")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def save_pulse_sequence(path, schedule: PulseSchedule, qp: QubitPair, dt: float = 0.005) -> None:
    """Three-panel control timeline: eps1(t), eps2(t), K(t)."""
    t, eps1, eps2, k = schedule.trace(qp, dt)
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(6.4, 6.0))
    axes[0].plot(t, eps1, lw=0.6)
    axes[0].set_ylabel(r"$\epsilon_1/h$ (GHz)")
    axes[1].plot(t, eps2, lw=0.6)
    axes[1].set_ylabel(r"$\epsilon_2/h$ (GHz)")
    axes[2].plot(t, k, lw=0.8)
    axes[2].set_ylabel(r"$K/h$ (GHz)")
    axes[2].set_xlabel("t (ns)")
    fig.align_ylabels(axes)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
