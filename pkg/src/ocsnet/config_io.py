"""Flat dotted-key configuration files, human units, and preset profiles.

Grammar: one ``section.key = value`` per line; ``#`` starts a comment;
values are integers, floats, or (optionally quoted) strings. The last
underscore-separated token of a key may name a unit (``_us``, ``_ms``,
``_gbps``, ``_mbit``, ``_mb``, ...) and is converted to the internal
base units (seconds, bits, bits/s) when the config is materialized.

Two presets ship: ``paper-numeric`` (10 Gbps links, the rate all the
worked threshold numbers assume) and ``paper-table1`` (40 Gbps links).
"""
from __future__ import annotations

import re

from .distributions import FlowSizeDistribution, default_mix
from .model import NetworkConfig, validate
from .traffic import TrafficSpec

# multiplier to the base unit (seconds / bits / bits-per-second)
UNIT_FACTORS = {
    "s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9,
    "bits": 1.0, "kbit": 1e3, "mbit": 1e6, "gbit": 1e9,
    "b": 8.0, "kb": 8e3, "mb": 8e6, "gb": 8e9,        # bytes
    "bps": 1.0, "mbps": 1e6, "gbps": 1e9,
}

_LINE = re.compile(r"^\s*([A-Za-z0-9_.]+)\s*=\s*(.+?)\s*$")


def convert(value, unit):
    """Scale a number in the named human unit to base units."""
    try:
        return float(value) * UNIT_FACTORS[unit]
    except KeyError:
        raise ValueError(f"unknown unit {unit!r}") from None


def base_value(key, value):
    """Apply the unit implied by the key's suffix, if any."""
    if isinstance(value, str):
        return value
    suffix = key.rsplit("_", 1)[-1] if "_" in key else None
    if suffix in UNIT_FACTORS:
        return convert(value, suffix)
    return value


def parse_config_text(text) -> dict:
    """Parse the flat grammar into a {dotted-key: raw value} mapping."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        m = _LINE.match(stripped)
        if not m:
            raise ValueError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, raw = m.groups()
        out[key] = _parse_value(raw)
    return out


def _parse_value(raw):
    if raw.startswith('"') and raw.endswith('"') and len(raw) >= 2:
        return raw[1:-1]
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def render_config(mapping) -> str:
    """Inverse of parse_config_text, with keys in sorted order."""
    lines = []
    for key in sorted(mapping):
        value = mapping[key]
        if isinstance(value, str):
            value = f'"{value}"'
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


PROFILES = {
    "paper-numeric": {
        "network.n": 256,
        "network.k_s": 5,
        "network.k_r": 16,
        "network.k_c": 16,
        "link.rate_gbps": 10,
        "timing.slot_us": 100,
        "timing.rotor_reconfig_us": 10,
        "timing.cache_reconfig_ms": 15,
        "thresholds.phi": 0.0,
        "traffic.model": "uniform",
        "traffic.load_x": 0.5,
        "traffic.window_s": 1,
        "traffic.seed": 0,
        "traffic.distribution.kind": "default-mix",
    },
}
PROFILES["paper-table1"] = {**PROFILES["paper-numeric"], "link.rate_gbps": 40}


def load_config(path=None, profile="paper-numeric", overrides=None) -> dict:
    """Profile defaults, then file entries, then explicit overrides."""
    if profile not in PROFILES:
        raise ValueError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}")
    merged = dict(PROFILES[profile])
    if path is not None:
        with open(path) as fh:
            merged.update(parse_config_text(fh.read()))
    if overrides:
        merged.update(overrides)
    return merged


def network_config(mapping) -> NetworkConfig:
    """Materialize and validate a NetworkConfig from a parsed mapping."""
    get = lambda k, d=None: base_value(k, mapping[k]) if k in mapping else d
    cfg = NetworkConfig(
        n=int(mapping["network.n"]),
        k_s=int(mapping["network.k_s"]),
        k_r=int(mapping["network.k_r"]),
        k_c=int(mapping["network.k_c"]),
        r=get("link.rate_gbps"),
        delta=get("timing.slot_us"),
        R_r=get("timing.rotor_reconfig_us"),
        R_c=get("timing.cache_reconfig_ms"),
        medium_threshold_bits=get("thresholds.medium_mbit"),
        large_threshold_bits=get("thresholds.large_mb"),
        threshold_phi=float(mapping.get("thresholds.phi", 0.0)),
    )
    return validate(cfg)


def distribution(mapping) -> FlowSizeDistribution:
    kind = mapping.get("traffic.distribution.kind", "default-mix")
    g = lambda k: base_value(k, mapping[k])
    if kind == "default-mix":
        return default_mix()
    if kind == "point":
        return FlowSizeDistribution.point(g("traffic.distribution.size_mbit"))
    if kind == "two-point":
        return FlowSizeDistribution.two_point(
            g("traffic.distribution.size_a_mbit"),
            g("traffic.distribution.size_b_mbit"),
            float(mapping["traffic.distribution.prob_a"]),
        )
    if kind == "two-point-bytes":
        return FlowSizeDistribution.two_point_by_bytes(
            g("traffic.distribution.size_a_mbit"),
            g("traffic.distribution.size_b_mbit"),
            float(mapping["traffic.distribution.byte_frac_a"]),
        )
    if kind == "log-uniform":
        return FlowSizeDistribution.log_uniform(
            g("traffic.distribution.lower_bits"), g("traffic.distribution.upper_bits"))
    if kind == "pareto":
        return FlowSizeDistribution.pareto(
            float(mapping["traffic.distribution.shape"]),
            g("traffic.distribution.lower_bits"))
    if kind == "file":
        return FlowSizeDistribution.from_csv(mapping["traffic.distribution.file"])
    raise ValueError(f"unknown distribution kind {kind!r}")


def traffic_spec(mapping, seed=None) -> TrafficSpec:
    return TrafficSpec(
        model=mapping.get("traffic.model", "uniform"),
        load_x=float(mapping.get("traffic.load_x", 0.5)),
        distribution=distribution(mapping),
        per_tor_rate_L=float(mapping.get("traffic.per_tor_rate_l", 1.0)),
        window_s=float(mapping.get("traffic.window_s", 1.0)),
        seed=int(mapping.get("traffic.seed", 0) if seed is None else seed),
    )


def network_to_mapping(config: NetworkConfig) -> dict:
    """Dotted-key form of a config; parse→materialize round-trips to identity."""
    return {
        "network.n": config.n,
        "network.k_s": config.k_s,
        "network.k_r": config.k_r,
        "network.k_c": config.k_c,
        "link.rate_gbps": config.r / UNIT_FACTORS["gbps"],
        "timing.slot_us": config.delta / UNIT_FACTORS["us"],
        "timing.rotor_reconfig_us": config.R_r / UNIT_FACTORS["us"],
        "timing.cache_reconfig_ms": config.R_c / UNIT_FACTORS["ms"],
        "thresholds.medium_mbit": config.medium_threshold_bits / UNIT_FACTORS["mbit"],
        "thresholds.large_mb": config.large_threshold_bits / UNIT_FACTORS["mb"],
        "thresholds.phi": config.threshold_phi,
    }
