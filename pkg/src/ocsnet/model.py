"""Core domain types: network parameters, flows, demand matrices.

All sizes are kept internally in bits (byte-denominated inputs are
converted at the boundary, 1 byte = 8 bits) and all times in seconds.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np


class FlowClass(str, Enum):
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


class MatchingFamily(str, Enum):
    SINGLE_FIXED = "single-fixed"
    ROTOR_CYCLE = "rotor-cycle"
    UNCONSTRAINED = "unconstrained"


@dataclass(frozen=True)
class SwitchSpec:
    """Abstract spine-switch description: matching family, hold time, reconfiguration time."""

    matching_family: MatchingFamily
    matching_count: int | None  # None = all n! permutations, kept symbolic
    hold_time_s: float          # math.inf for a fixed matching
    reconfig_s: float

    @classmethod
    def static(cls):
        return cls(MatchingFamily.SINGLE_FIXED, 1, math.inf, 0.0)

    @classmethod
    def rotor(cls, n, slot_s, reconfig_s):
        return cls(MatchingFamily.ROTOR_CYCLE, n - 1, slot_s, reconfig_s)

    @classmethod
    def demand_aware(cls, reconfig_s):
        return cls(MatchingFamily.UNCONSTRAINED, None, math.inf, reconfig_s)

    def __post_init__(self):
        fam = self.matching_family
        if fam is MatchingFamily.SINGLE_FIXED:
            if self.matching_count != 1 or self.hold_time_s != math.inf or self.reconfig_s != 0.0:
                raise ValueError("single-fixed switch must have m=1, infinite hold time, zero reconfig")
        elif fam is MatchingFamily.UNCONSTRAINED:
            if self.matching_count is not None:
                raise ValueError("unconstrained switch stores its matching count symbolically (None)")
        elif self.matching_count is None or self.matching_count < 1:
            raise ValueError("rotor-cycle switch needs an explicit matching count")


@dataclass(frozen=True)
class NetworkConfig:
    """Leaf/spine network parameters plus the flow-class size thresholds.

    ``medium_threshold_bits`` and ``large_threshold_bits`` may be left
    unset (None); :func:`validate` fills them with the derived defaults
    (slot-full of bits, and the rotor-vs-cache break-even size at
    ``threshold_phi``).
    """

    n: int                    # number of ToRs
    k_s: int                  # static spine switches
    k_r: int                  # rotor spine switches
    k_c: int                  # demand-aware spine switches
    r: float                  # link rate, bits/s
    delta: float              # rotor slot time, s
    R_r: float                # rotor reconfiguration time, s
    R_c: float                # demand-aware reconfiguration time, s
    medium_threshold_bits: float | None = None
    large_threshold_bits: float | None = None
    threshold_phi: float = 0.0  # skewness used when deriving the large threshold

    @property
    def k(self):
        return self.k_s + self.k_r + self.k_c

    @property
    def slot_period_s(self):
        """One rotor slot plus the reconfiguration gap."""
        return self.delta + self.R_r

    def to_dict(self):
        return {
            "n": self.n, "k_s": self.k_s, "k_r": self.k_r, "k_c": self.k_c,
            "r": self.r, "delta": self.delta, "R_r": self.R_r, "R_c": self.R_c,
            "medium_threshold_bits": self.medium_threshold_bits,
            "large_threshold_bits": self.large_threshold_bits,
            "threshold_phi": self.threshold_phi,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def validate(config: NetworkConfig) -> NetworkConfig:
    """Fill derived thresholds and check every invariant.

    Returns a new config with ``medium_threshold_bits`` defaulted to
    delta*r and ``large_threshold_bits`` defaulted to the rotor/cache
    break-even size at ``threshold_phi``. Raises ValueError naming the
    offending field otherwise.
    """
    c = config
    if c.n < 2:
        raise ValueError(f"n must be >= 2, got {c.n}")
    for name in ("k_s", "k_r", "k_c"):
        if getattr(c, name) < 0:
            raise ValueError(f"{name} must be >= 0, got {getattr(c, name)}")
    if c.k < 1:
        raise ValueError("k >= 1 required: k_s + k_r + k_c must be at least 1")
    if c.r <= 0:
        raise ValueError(f"r must be > 0, got {c.r}")
    if c.delta <= 0:
        raise ValueError(f"delta must be > 0, got {c.delta}")
    if c.R_r < 0 or c.R_c < 0:
        raise ValueError("reconfiguration times must be >= 0")
    if c.R_r > c.R_c:
        raise ValueError(f"R_r ({c.R_r}) must not exceed R_c ({c.R_c})")
    if c.R_c > 0 and c.R_r > 0.1 * c.R_c:
        warnings.warn(
            f"R_r ({c.R_r}) is not small compared to R_c ({c.R_c}); "
            "the rotor/cache trade-off assumes R_r << R_c",
            stacklevel=2,
        )

    medium = c.medium_threshold_bits
    if medium is None:
        medium = c.delta * c.r
    if medium <= 0:
        raise ValueError(f"medium_threshold_bits must be > 0, got {medium}")

    large = c.large_threshold_bits
    if large is None:
        # break-even flow size above which a reconfigured direct link beats the rotor
        from .analytics import large_flow_threshold

        probe = replace(c, medium_threshold_bits=medium, large_threshold_bits=math.inf)
        try:
            large = large_flow_threshold(c.threshold_phi, probe)
        except ValueError as exc:
            raise ValueError(
                "cannot derive large_threshold_bits: rotor transmission always wins, "
                "all flows would be medium"
            ) from exc
    if not medium < large:
        raise ValueError(
            f"medium_threshold_bits ({medium}) must be below large_threshold_bits ({large})"
        )
    return replace(c, medium_threshold_bits=medium, large_threshold_bits=large)


def class_of(size_bits, config: NetworkConfig) -> FlowClass:
    """Classify a flow size against the half-open intervals [|m|, |l|).

    A size exactly at the medium threshold is medium; a size exactly at
    the large threshold is large.
    """
    if size_bits <= 0:
        raise ValueError(f"flow size must be positive, got {size_bits}")
    if size_bits < config.medium_threshold_bits:
        return FlowClass.SMALL
    if size_bits < config.large_threshold_bits:
        return FlowClass.MEDIUM
    return FlowClass.LARGE


@dataclass(frozen=True, slots=True)
class Flow:
    src: int
    dst: int
    size_bits: int
    arrival_s: float
    flow_class: FlowClass

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError(f"flow source and destination coincide ({self.src})")
        if self.size_bits <= 0:
            raise ValueError(f"flow size must be positive, got {self.size_bits}")


def make_flow(src, dst, size_bits, arrival_s, config: NetworkConfig) -> Flow:
    return Flow(src, dst, int(size_bits), arrival_s, class_of(size_bits, config))


@dataclass(frozen=True)
class DemandMatrix:
    """n x n accumulated bits over a fixed window; diagonal is zero."""

    n: int
    cells: np.ndarray
    window_s: float = 1.0

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=float)
        if cells.shape != (self.n, self.n):
            raise ValueError(f"cells must be {self.n}x{self.n}, got {cells.shape}")
        if (cells < 0).any():
            raise ValueError("demand matrix entries must be nonnegative")
        if np.diagonal(cells).any():
            raise ValueError("demand matrix diagonal must be zero")
        object.__setattr__(self, "cells", cells)

    @property
    def total_bits(self):
        return float(self.cells.sum())
