"""Traffic generation, per-class byte rates, and skewness estimation.

Two generation models: every ToR active at load x (uniform), or a
random fraction x of ToRs active at per-ToR load L (skewed). Poisson
flow arrivals are calibrated by byte rate: the per-ToR flow rate is the
target bits/s divided by the mean flow size, so the compound process
carries the intended expected byte rate.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .distributions import FlowSizeDistribution
from .model import DemandMatrix, Flow, FlowClass, NetworkConfig

TRACE_HEADER = ["arrival_s", "src", "dst", "size_bits", "class"]


@dataclass(frozen=True)
class TrafficSpec:
    model: str                              # "uniform" | "skewed"
    load_x: float
    distribution: FlowSizeDistribution
    per_tor_rate_L: float = 1.0             # skewed model only
    window_s: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("uniform", "skewed"):
            raise ValueError(f"unknown traffic model {self.model!r}")
        if not 0.0 <= self.load_x <= 1.0:
            raise ValueError(f"load_x must lie in [0, 1], got {self.load_x}")
        if not 0.0 < self.per_tor_rate_L <= 1.0:
            raise ValueError(f"per_tor_rate_L must lie in (0, 1], got {self.per_tor_rate_L}")
        if self.window_s <= 0:
            raise ValueError("window_s must be positive")


@dataclass(frozen=True)
class ClassRates:
    """Expected bits/second per ToR carried by each flow class."""

    bits_per_s_small: float
    bits_per_s_medium: float
    bits_per_s_large: float

    @property
    def total(self):
        return self.bits_per_s_small + self.bits_per_s_medium + self.bits_per_s_large


def class_rates(distribution: FlowSizeDistribution, x, config: NetworkConfig) -> ClassRates:
    """Per-ToR byte rates split by class, computed analytically.

    At x=1 the three components sum to k*r.
    """
    base = x * config.k * config.r
    return ClassRates(
        bits_per_s_small=base * distribution.class_byte_fraction(FlowClass.SMALL, config),
        bits_per_s_medium=base * distribution.class_byte_fraction(FlowClass.MEDIUM, config),
        bits_per_s_large=base * distribution.class_byte_fraction(FlowClass.LARGE, config),
    )


def generate(spec: TrafficSpec, config: NetworkConfig) -> list[Flow]:
    """Generate one window of flows, sorted by arrival time; deterministic per seed."""
    rng = np.random.default_rng(spec.seed)
    n = config.n
    dist = spec.distribution
    mean_size = dist.mean_size()

    if spec.model == "uniform":
        sources = np.arange(n)
        rate = spec.load_x * config.k * config.r
        dest_pool = None
    else:
        n_active = math.ceil(spec.load_x * n)
        if n_active < 2:
            raise ValueError(
                f"skewed model with x={spec.load_x} activates {n_active} ToRs; "
                "need at least 2 for valid destinations"
            )
        sources = np.sort(rng.choice(n, size=n_active, replace=False))
        rate = spec.per_tor_rate_L * config.k * config.r
        dest_pool = sources

    lam = rate / mean_size * spec.window_s
    counts = rng.poisson(lam, size=len(sources))
    total = int(counts.sum())
    if total == 0:
        return []

    src = np.repeat(sources, counts)
    arrivals = rng.uniform(0.0, spec.window_s, size=total)
    sizes = dist.sample(rng, total)

    # destination uniform over the pool, excluding the source
    if dest_pool is None:
        offs = rng.integers(1, n, size=total)
        dst = (src + offs) % n
    else:
        pos = np.searchsorted(dest_pool, src)
        offs = rng.integers(1, len(dest_pool), size=total)
        dst = dest_pool[(pos + offs) % len(dest_pool)]

    order = np.argsort(arrivals, kind="stable")
    m_thr = config.medium_threshold_bits
    l_thr = config.large_threshold_bits
    flows = []
    for i in order:
        size = int(sizes[i])
        if size < m_thr:
            fc = FlowClass.SMALL
        elif size < l_thr:
            fc = FlowClass.MEDIUM
        else:
            fc = FlowClass.LARGE
        flows.append(Flow(int(src[i]), int(dst[i]), size, float(arrivals[i]), fc))
    return flows


def demand_matrix(flows, n, window_s=1.0, class_filter=None) -> DemandMatrix:
    """Accumulate flow sizes into an n x n matrix, optionally for one class."""
    cells = np.zeros((n, n))
    for f in flows:
        if class_filter is None or f.flow_class is FlowClass(class_filter):
            cells[f.src, f.dst] += f.size_bits
    return DemandMatrix(n=n, cells=cells, window_s=window_s)


def variation_distance(p) -> float:
    """Half the L1 distance of a discrete distribution from uniform."""
    p = np.asarray(p, dtype=float)
    if (p < 0).any():
        raise ValueError("distribution has negative mass")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"distribution must sum to 1, got {p.sum()}")
    return float(0.5 * np.abs(p - 1.0 / len(p)).sum())


def skewness_phi(demand: DemandMatrix, active_tors=None) -> float:
    """Byte-weighted mean over active sources of 1 - variation distance.

    Each source row is normalized over its destination set (all other
    ToRs by default, or ``active_tors`` minus the source under the
    skewed model). Ranges from ~1/n (single-destination rows) to 1
    (perfectly uniform rows).
    """
    cells = demand.cells
    dest_all = np.arange(demand.n) if active_tors is None else np.asarray(sorted(active_tors))
    weights = []
    phis = []
    sources = dest_all if active_tors is not None else np.arange(demand.n)
    for i in sources:
        dests = dest_all[dest_all != i]
        row = cells[i, dests]
        total = row.sum()
        if total <= 0:
            continue
        phis.append(1.0 - variation_distance(row / total))
        weights.append(total)
    if not weights:
        raise ValueError("demand matrix has no traffic on the selected rows")
    return float(np.average(phis, weights=weights))


def write_trace(flows, path):
    """Export flows as CSV ``arrival_s,src,dst,size_bits,class``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_HEADER)
        for f in flows:
            writer.writerow([repr(f.arrival_s), f.src, f.dst, f.size_bits, f.flow_class.value])


def read_trace(path) -> list[Flow]:
    flows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRACE_HEADER:
            raise ValueError(f"{path}: expected header {','.join(TRACE_HEADER)}")
        for row in reader:
            flows.append(Flow(int(row["src"]), int(row["dst"]), int(row["size_bits"]),
                              float(row["arrival_s"]), FlowClass(row["class"])))
    return flows
