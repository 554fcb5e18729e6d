"""Command-line interface reproducing the device's figures and numbers.

Data outputs are machine readable only: CSV for curves, JSON for reports,
written to stdout or to ``--out``.  Logs go to stderr.  When ``--out`` is
given, the matching figure is rendered to an image file alongside the data
(suppress with ``--no-plot``).  Every command is deterministic for a fixed
(config, seed); CSV outputs carry the config hash and seed in comment
headers for provenance.
"""

from __future__ import annotations

import io
import json
import math
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .cnot import SynthesisConfig, synthesize_cnot
from .config import DeviceConfig, paper_device
from .coupler import coupling_vs_bias, find_decoupling_bias, max_ks_vs_beta
from .errors import BeyondCritical, CouplerError
from .noise import dephasing_estimate, ohmic_alpha, ohmic_ratio_grid
from .squid import critical_current, solve_working_point

_PAPER_BIAS_RATIOS = "0,0.4,0.6,0.85"


def _load_config(path: str | None) -> DeviceConfig:
    if path is None:
        return paper_device()
    return DeviceConfig.load(path)


def _fmt(value) -> str:
    """Deterministic shortest round-trip formatting for CSV cells."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    f = float(value)
    if math.isnan(f):
        return "nan"
    return repr(f)


def _write_csv(out: str | None, header_lines: list[str], columns: list[str], rows) -> None:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    _emit(out, buf.getvalue())


def _write_json(out: str | None, doc: dict) -> None:
    _emit(out, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _emit(out: str | None, text: str) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _figure_path(out: str | None, plot: bool) -> Path | None:
    if out is None or not plot:
        return None
    return Path(out).with_suffix(".png")


def _fail(exc: CouplerError) -> None:
    payload = {"error": type(exc).__name__, "message": str(exc)}
    click.echo(json.dumps(payload), err=True)
    sys.exit(1)


@click.group()
@click.version_option(version=__version__, prog_name="squidcoupler")
def main():
    """Tunable SQUID-mediated flux-qubit coupling toolkit."""


_config_opt = click.option(
    "--config", "config_path", type=click.Path(exists=True, dir_okay=False),
    default=None, help="Device config JSON (defaults to the bundled reference device).",
)
_out_opt = click.option("--out", type=click.Path(dir_okay=False), default=None,
                        help="Output file (stdout when omitted).")
_seed_opt = click.option("--seed", type=int, default=0, show_default=True,
                         help="Seed for any randomized search; recorded in output.")
_plot_opt = click.option("--plot/--no-plot", default=True, show_default=True,
                         help="Render the matching figure next to --out.")


@main.command("squid-curves")
@_config_opt
@_out_opt
@_seed_opt
@_plot_opt
@click.option("--points", type=int, default=201, show_default=True,
              help="Flux grid points per curve.")
@click.option("--ratios", default=_PAPER_BIAS_RATIOS, show_default=True,
              help="Comma-separated bias ratios Ib/Ic(phi_s).")
def cmd_squid_curves(config_path, out, seed, plot, points, ratios):
    """Circulating current J(Phi_s) per bias ratio, plus Ic(Phi_s)."""
    try:
        cfg = _load_config(config_path)
        ratio_list = [float(r) for r in ratios.split(",") if r.strip() != ""]
        ic_ref = critical_current(cfg.squid, cfg.phi_s)
        phi_grid = np.linspace(0.0, 1.0, points)
        rows = []
        curves: dict[float, list[dict]] = {}
        for ratio in ratio_list:
            ib = ratio * ic_ref
            curve_rows = []
            for phi in phi_grid:
                try:
                    wp = solve_working_point(cfg.squid, ib, float(phi))
                    rec = dict(phi_s=float(phi), J_uA=wp.J_uA, gamma_bar=wp.gamma_bar,
                               delta_gamma=wp.delta_gamma, status="ok")
                except BeyondCritical:
                    rec = dict(phi_s=float(phi), J_uA=None, gamma_bar=None,
                               delta_gamma=None, status="beyond_critical")
                curve_rows.append(rec)
                rows.append(("J", ratio, rec["phi_s"], ib, rec["J_uA"],
                             rec["gamma_bar"], rec["delta_gamma"], rec["status"]))
            curves[ratio] = curve_rows
        ic_rows = []
        for phi in phi_grid:
            ic = critical_current(cfg.squid, float(phi))
            ic_rows.append(dict(phi_s=float(phi), Ic_uA=ic))
            rows.append(("Ic", None, float(phi), None, ic, None, None, "ok"))
        _write_csv(
            out,
            [f"config_sha256={cfg.sha256()}", f"seed={seed}",
             f"ic_reference_uA={_fmt(ic_ref)} at phi_s={_fmt(cfg.phi_s)}"],
            ["curve", "ib_ratio", "phi_s", "Ib_uA", "value_uA",
             "gamma_bar", "delta_gamma", "status"],
            rows,
        )
        fig = _figure_path(out, plot)
        if fig is not None:
            from .plotting import save_squid_curves

            save_squid_curves(fig, curves, ic_rows)
            click.echo(f"figure written to {fig}", err=True)
    except CouplerError as exc:
        _fail(exc)


@main.command("coupling-sweep")
@_config_opt
@_out_opt
@_seed_opt
@_plot_opt
@click.option("--points", type=int, default=201, show_default=True)
def cmd_coupling_sweep(config_path, out, seed, plot, points):
    """Net coupling K/h versus bias current at the operating flux."""
    try:
        cfg = _load_config(config_path)
        rows = coupling_vs_bias(cfg.qubits, cfg.squid, cfg.phi_s, points)
        _write_csv(
            out,
            [f"config_sha256={cfg.sha256()}", f"seed={seed}",
             f"phi_s={_fmt(cfg.phi_s)}"],
            list(rows[0]._fields),
            rows,
        )
        fig = _figure_path(out, plot)
        if fig is not None:
            from .plotting import save_coupling_sweep

            save_coupling_sweep(fig, rows)
            click.echo(f"figure written to {fig}", err=True)
    except CouplerError as exc:
        _fail(exc)


@main.command("beta-sweep")
@_config_opt
@_out_opt
@_seed_opt
@_plot_opt
@click.option("--points", type=int, default=30, show_default=True)
@click.option("--beta-min", type=float, default=0.01, show_default=True)
@click.option("--beta-max", type=float, default=0.9, show_default=True)
def cmd_beta_sweep(config_path, out, seed, plot, points, beta_min, beta_max):
    """Highest achievable Ks versus beta_L at I_b = 0.85 Ic (L fixed)."""
    try:
        cfg = _load_config(config_path)
        grid = np.geomspace(beta_min, beta_max, points)
        rows = max_ks_vs_beta(cfg.qubits, cfg.squid, grid, phi_s=cfg.phi_s)
        _write_csv(
            out,
            [f"config_sha256={cfg.sha256()}", f"seed={seed}",
             f"phi_s={_fmt(cfg.phi_s)}", "bias_fraction=0.85"],
            list(rows[0]._fields),
            rows,
        )
        fig = _figure_path(out, plot)
        if fig is not None:
            from .plotting import save_beta_sweep

            save_beta_sweep(fig, rows)
            click.echo(f"figure written to {fig}", err=True)
    except CouplerError as exc:
        _fail(exc)


@main.command("noise")
@_config_opt
@_out_opt
@_seed_opt
@_plot_opt
def cmd_noise(config_path, out, seed, plot):
    """Ohmic coefficient and dephasing estimate at the decoupling bias."""
    try:
        cfg = _load_config(config_path)
        ic = critical_current(cfg.squid, cfg.phi_s)
        ratio = find_decoupling_bias(cfg.qubits, cfg.squid, cfg.phi_s)
        wp = solve_working_point(cfg.squid, ratio * ic, cfg.phi_s)
        alpha = ohmic_alpha(cfg.qubits, cfg.squid, wp, cfg.noise.R_kohm)
        wp0 = solve_working_point(cfg.squid, 0.0, cfg.phi_s)
        alpha0 = ohmic_alpha(cfg.qubits, cfg.squid, wp0, cfg.noise.R_kohm)
        doc = {
            "config_sha256": cfg.sha256(),
            "seed": seed,
            "phi_s": cfg.phi_s,
            "R_kohm": cfg.noise.R_kohm,
            "temperature_K": cfg.noise.temperature_K,
            "Ic_uA": ic,
            "decoupling_ratio": ratio,
            "decoupling_Ib_uA": ratio * ic,
            "alpha_at_decoupling": alpha,
            "alpha_at_zero_bias": alpha0,
            "dephasing_ns_at_decoupling": dephasing_estimate(
                alpha, cfg.noise.temperature_K
            ),
        }
        _write_json(out, doc)
        fig = _figure_path(out, plot)
        if fig is not None:
            from .plotting import save_noise_curve

            ratios, alphas = ohmic_ratio_grid(cfg.qubits, cfg.squid, cfg.phi_s,
                                              cfg.noise.R_kohm, 60)
            save_noise_curve(fig, ratios, alphas, ratio)
            click.echo(f"figure written to {fig}", err=True)
    except CouplerError as exc:
        _fail(exc)


@main.command("synthesize")
@_config_opt
@_out_opt
@_seed_opt
@_plot_opt
@click.option("--no-crosstalk", is_flag=True, default=False,
              help="Disable both crosstalk channels (idealized run).")
@click.option("--dt", type=float, default=5e-4, show_default=True,
              help="Step size (ns) for the final reported propagation.")
def cmd_synthesize(config_path, out, seed, plot, no_crosstalk, dt):
    """Synthesize the CNOT pulse sequence and report the achieved gate."""
    try:
        cfg = _load_config(config_path)
        syn = SynthesisConfig(
            qp=cfg.qubits,
            squid=cfg.squid,
            phi_s=cfg.phi_s,
            kappa_mw=cfg.kappa_mw,
            enable_bias_crosstalk=not no_crosstalk,
            enable_mw_crosstalk=not no_crosstalk,
            dt_final=dt,
            seed=seed,
        )
        result = synthesize_cnot(syn)
        doc = result.to_json_dict()
        doc["config_sha256"] = cfg.sha256()
        doc["seed"] = seed
        _write_json(out, doc)
        if out is not None:
            trace_path = Path(out).with_suffix(".trace.csv")
            t, eps1, eps2, k = result.schedule.trace(cfg.qubits, dt=0.005)
            buf = io.StringIO()
            buf.write(f"# config_sha256={cfg.sha256()}\n# seed={seed}\n")
            buf.write("t_ns,eps1_GHz,eps2_GHz,K_GHz\n")
            for row in zip(t, eps1, eps2, k):
                buf.write(",".join(_fmt(v) for v in row) + "\n")
            trace_path.write_text(buf.getvalue())
            click.echo(f"schedule trace written to {trace_path}", err=True)
        fig = _figure_path(out, plot)
        if fig is not None:
            from .plotting import save_pulse_sequence

            save_pulse_sequence(fig, result.schedule, cfg.qubits)
            click.echo(f"figure written to {fig}", err=True)
    except CouplerError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
