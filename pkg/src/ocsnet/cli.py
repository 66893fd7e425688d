"""Batch command-line front end.

Verbs: ``analyze`` (closed-form sweeps), ``simulate`` (traffic generation
plus flow-level simulation with an analytic comparison column), and the
single-value helpers ``split``, ``threshold``, ``epl``. All outputs are
deterministic CSV with fixed headers.
"""
from __future__ import annotations

import csv
import math
import os

import click
import numpy as np

from . import analytics, config_io, simulator, topology, traffic
from .model import FlowClass, NetworkConfig, validate

ANALYZE_HEADER = [
    "x", "phi", "phi_m", "dct_expander_s", "dct_rotor_s", "dct_hybrid_s",
    "k_r_star", "k_c_star", "L_star_expander", "L_star_rotor", "L_star_hybrid",
    "large_threshold_bits", "z",
]
SIMULATE_HEADER = ["x", "seed", "dct_sim_s", "dct_analytic_s", "rel_err", "spill_count"]

SWEEP_VARS = ("load_x", "active_fraction_x", "phi", "k_c")


def parse_sweep(text):
    """``var=start:stop:step`` -> (var, inclusive grid)."""
    try:
        var, rng = text.split("=", 1)
        start, stop, step = (float(v) for v in rng.split(":"))
    except ValueError:
        raise click.BadParameter(
            f"expected var=start:stop:step, got {text!r}") from None
    if var not in SWEEP_VARS:
        raise click.BadParameter(f"sweep variable must be one of {SWEEP_VARS}")
    if step <= 0 or stop < start:
        raise click.BadParameter("need step > 0 and stop >= start")
    grid = np.arange(start, stop + step / 2, step)
    return var, [round(float(v), 12) for v in grid]


def _load(config_path, profile, **overrides):
    mapping = config_io.load_config(config_path, profile=profile)
    mapping.update({k: v for k, v in overrides.items() if v is not None})
    return mapping


def _fmt(v):
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(round(v, 12))
    return v


_config_opts = [
    click.option("--config", "config_path", type=click.Path(exists=True),
                 default=None, help="Dotted-key configuration file."),
    click.option("--profile", default="paper-numeric",
                 type=click.Choice(sorted(config_io.PROFILES)),
                 help="Preset parameter profile."),
]


def config_options(fn):
    for opt in reversed(_config_opts):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Analytic and simulated completion times for hybrid optical fabrics."""


@main.command()
@config_options
@click.option("--sweep", default="load_x=0.1:0.9:0.1", show_default=True)
@click.option("--seeds", default=3, show_default=True,
              help="Expander samples averaged for the path-length estimate.")
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
def analyze(config_path, profile, sweep, seeds, out_dir):
    """Evaluate the closed forms over a parameter sweep; writes analyze.csv."""
    mapping = _load(config_path, profile)
    config = config_io.network_config(mapping)
    dist = config_io.distribution(mapping)
    var, grid = parse_sweep(sweep)
    epl = topology.mean_expected_path_length(config.n, config.k, range(seeds))
    phi = float(mapping.get("traffic.phi", 1.0))
    phi_m = float(mapping.get("traffic.phi_m", phi))
    base_x = float(mapping.get("traffic.load_x", 0.5))

    rows = []
    for value in grid:
        x, p, pm, cfg = base_x, phi, phi_m, config
        if var in ("load_x", "active_fraction_x"):
            x = value
        elif var == "phi":
            p = pm = value
        else:  # k_c
            cfg = validate(NetworkConfig(
                n=config.n, k_s=config.k_s, k_r=config.k_r, k_c=int(value),
                r=config.r, delta=config.delta, R_r=config.R_r, R_c=config.R_c,
                medium_threshold_bits=config.medium_threshold_bits,
                large_threshold_bits=config.large_threshold_bits))
        try:
            rep = analytics.report(x, p, pm, dist, cfg, epl)
        except ValueError as exc:
            raise click.ClickException(f"grid point {var}={value}: {exc}")
        rows.append([_fmt(getattr(rep, col)) for col in ANALYZE_HEADER])

    path = _write_csv(out_dir, "analyze.csv", ANALYZE_HEADER, rows)
    click.echo(f"wrote {len(rows)} rows to {path}")


@main.command()
@config_options
@click.option("--sweep", default="load_x=0.2:0.6:0.2", show_default=True)
@click.option("--seeds", default=1, show_default=True)
@click.option("--out", "out_dir", type=click.Path(), default=".", show_default=True)
@click.option("--horizon", "horizon_s", type=float, default=None,
              help="Abort marker time for non-draining runs, in seconds.")
def simulate(config_path, profile, sweep, seeds, out_dir, horizon_s):
    """Generate traffic, simulate each grid point x seed, compare to the model."""
    mapping = _load(config_path, profile)
    config = config_io.network_config(mapping)
    dist = config_io.distribution(mapping)
    var, grid = parse_sweep(sweep)
    if var not in ("load_x", "active_fraction_x"):
        raise click.ClickException("simulate sweeps the load only (load_x)")
    epl_graph = topology.build_expander(config.n, config.k_s, 0) if config.k_s else None
    os.makedirs(out_dir, exist_ok=True)

    rows = []
    for x in grid:
        for seed in range(seeds):
            spec = traffic.TrafficSpec(
                model=mapping.get("traffic.model", "uniform"),
                load_x=x, distribution=dist,
                per_tor_rate_L=float(mapping.get("traffic.per_tor_rate_l", 1.0)),
                window_s=float(mapping.get("traffic.window_s", 1.0)), seed=seed)
            flows = traffic.generate(spec, config)
            tag = f"x{x:g}_seed{seed}"
            traffic.write_trace(flows, os.path.join(out_dir, f"trace_{tag}.csv"))
            result = simulator.run_batch(config, flows, seed=seed,
                                         expander=epl_graph, horizon_s=horizon_s)
            _write_csv(out_dir, f"flows_{tag}.csv", simulator.RESULT_HEADER,
                       [[rec.flow_id, _fmt(rec.arrival_s), _fmt(rec.completion_s),
                         rec.plane, rec.hops] for rec in result.records])
            ana = _analytic_dct(config, dist, flows, x, epl_graph) * spec.window_s
            rel = (result.dct_s - ana) / ana if ana > 0 else math.nan
            rows.append([_fmt(x), seed, _fmt(result.dct_s), _fmt(ana),
                         _fmt(rel) if result.completed else "did-not-complete",
                         result.spill_count])

    path = _write_csv(out_dir, "simulate.csv", SIMULATE_HEADER, rows)
    click.echo(f"wrote {len(rows)} rows to {path}")


def _analytic_dct(config, dist, flows, x, epl_graph):
    """Model prediction matching the configured switch mix, per second of demand."""
    if not flows:
        return 0.0
    if config.k_r > 0 and config.k_s == 0 and config.k_c == 0:
        demand = traffic.demand_matrix(flows, config.n)
        return analytics.dct_rotor(x, traffic.skewness_phi(demand), config)
    if config.k_s > 0 and config.k_r == 0 and config.k_c == 0:
        return analytics.dct_expander(x, topology.expected_path_length(epl_graph))
    try:
        demand_m = traffic.demand_matrix(flows, config.n, class_filter="medium")
        phi_m = traffic.skewness_phi(demand_m)
    except ValueError:
        phi_m = 1.0
    epl = topology.expected_path_length(epl_graph) if epl_graph is not None else None
    # the simulator serves each class on the switches actually configured
    return analytics.dct_hybrid_uniform(x, dist, phi_m, config, epl=epl,
                                        split=(config.k_r, config.k_c))


@main.command()
@config_options
@click.option("-x", "--load-x", default=0.5, show_default=True)
@click.option("--phi-m", default=1.0, show_default=True)
def split(config_path, profile, load_x, phi_m):
    """Optimal rotor/demand-aware division of the dynamic switches."""
    mapping = _load(config_path, profile)
    config = config_io.network_config(mapping)
    dist = config_io.distribution(mapping)
    k_r, k_c = analytics.optimal_split(dist, load_x, phi_m, config)
    click.echo(f"x={load_x} phi_m={phi_m} dynamic={config.k - config.k_s} "
               f"-> k_r_star={k_r} k_c_star={k_c}")


@main.command()
@config_options
@click.option("--phi", default=0.0, show_default=True)
def threshold(config_path, profile, phi):
    """Large-flow size threshold at the given skewness."""
    mapping = _load(config_path, profile)
    config = config_io.network_config(mapping)
    bits = analytics.large_flow_threshold(phi, config)
    click.echo(f"phi={phi} medium_bits={config.medium_threshold_bits:g} "
               f"-> large_threshold={bits:g} bits = {bits / 8e6:g} MB")


@main.command()
@click.option("-n", "--tors", "n", default=256, show_default=True)
@click.option("-k", "--degree", default=32, show_default=True)
@click.option("--seeds", default=10, show_default=True)
def epl(n, degree, seeds):
    """Mean shortest-path length of random regular expanders."""
    value = topology.mean_expected_path_length(n, degree, range(seeds))
    click.echo(f"n={n} degree={degree} seeds={seeds} -> epl={value:.4f}")


def _write_csv(out_dir, name, header, rows):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


if __name__ == "__main__":
    main()
