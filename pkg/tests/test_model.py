import math

import pytest
from hypothesis import given, strategies as st

import numpy as np

from ocsnet.model import (
    DemandMatrix, Flow, FlowClass, MatchingFamily, NetworkConfig, SwitchSpec,
    class_of, make_flow, validate,
)


def base_config(**kw):
    args = dict(n=256, k_s=5, k_r=16, k_c=16,
                r=10e9, delta=100e-6, R_r=10e-6, R_c=15e-3)
    args.update(kw)
    return NetworkConfig(**args)


class TestValidate:
    def test_fills_medium_threshold_slot_full(self):
        cfg = validate(base_config())
        assert cfg.medium_threshold_bits == pytest.approx(1e6, rel=1e-12)

    def test_medium_threshold_at_40gbps(self):
        cfg = validate(base_config(r=40e9))
        assert cfg.medium_threshold_bits == pytest.approx(4e6, rel=1e-12)

    def test_fills_large_threshold_at_phi_zero(self):
        cfg = validate(base_config())
        assert cfg.large_threshold_bits == pytest.approx(1.25e8, rel=1e-9)

    def test_empty_network_rejected(self):
        with pytest.raises(ValueError, match="k >= 1"):
            validate(base_config(k_s=0, k_r=0, k_c=0))

    def test_too_few_tors_rejected(self):
        with pytest.raises(ValueError, match="n"):
            validate(base_config(n=1))

    def test_negative_switch_count_rejected(self):
        with pytest.raises(ValueError, match="k_r"):
            validate(base_config(k_r=-1))

    def test_rotor_reconfig_may_not_exceed_cache_reconfig(self):
        with pytest.raises(ValueError, match="R_r"):
            validate(base_config(R_r=0.02, R_c=0.015))

    def test_comparable_reconfig_times_warn(self):
        with pytest.warns(UserWarning, match="R_r"):
            validate(base_config(R_r=0.002, R_c=0.015, large_threshold_bits=1e9))

    def test_all_flows_medium_advisory(self):
        # slot capacity exceeds what a reconfigured link could ever win back
        with pytest.raises(ValueError, match="all flows would be medium"):
            validate(base_config(medium_threshold_bits=1e9))

    def test_threshold_ordering_enforced(self):
        with pytest.raises(ValueError, match="below"):
            validate(base_config(medium_threshold_bits=2e8,
                                 large_threshold_bits=1e8))

    def test_idempotent(self):
        cfg = validate(base_config())
        assert validate(cfg) == cfg

    def test_dict_round_trip(self):
        cfg = validate(base_config())
        assert NetworkConfig.from_dict(cfg.to_dict()) == cfg


class TestClassOf:
    def test_below_medium_is_small(self):
        cfg = validate(base_config())
        assert class_of(0.5e6, cfg) is FlowClass.SMALL

    def test_boundary_at_medium_is_medium(self):
        cfg = validate(base_config())
        assert class_of(1e6, cfg) is FlowClass.MEDIUM

    def test_boundary_at_large_is_large(self):
        cfg = validate(base_config(large_threshold_bits=1e9))
        assert class_of(1e9, cfg) is FlowClass.LARGE  # 125 MB at the 125 MB cut

    def test_nonpositive_size_rejected(self):
        cfg = validate(base_config())
        with pytest.raises(ValueError):
            class_of(0, cfg)

    @given(st.floats(min_value=1.0, max_value=1e12),
           st.floats(min_value=1.0, max_value=1e12))
    def test_monotone_in_size(self, a, b):
        cfg = validate(base_config())
        lo, hi = sorted((a, b))
        order = [FlowClass.SMALL, FlowClass.MEDIUM, FlowClass.LARGE]
        assert order.index(class_of(lo, cfg)) <= order.index(class_of(hi, cfg))

    @given(st.floats(min_value=1.0, max_value=1e15))
    def test_total_function(self, size):
        cfg = validate(base_config())
        assert class_of(size, cfg) in FlowClass


class TestSwitchSpec:
    def test_static_shape(self):
        s = SwitchSpec.static()
        assert s.matching_count == 1 and math.isinf(s.hold_time_s)

    def test_rotor_cycles_all_but_one(self):
        assert SwitchSpec.rotor(256, 100e-6, 10e-6).matching_count == 255

    def test_unconstrained_count_is_symbolic(self):
        s = SwitchSpec.demand_aware(15e-3)
        assert s.matching_count is None
        assert s.matching_family is MatchingFamily.UNCONSTRAINED

    def test_static_with_reconfig_rejected(self):
        with pytest.raises(ValueError):
            SwitchSpec(MatchingFamily.SINGLE_FIXED, 1, math.inf, 1e-3)


class TestFlow:
    def test_self_loop_rejected(self):
        with pytest.raises(ValueError):
            Flow(3, 3, 100, 0.0, FlowClass.SMALL)

    def test_nonpositive_size_rejected(self):
        with pytest.raises(ValueError):
            Flow(0, 1, 0, 0.0, FlowClass.SMALL)

    def test_make_flow_classifies(self):
        cfg = validate(base_config())
        assert make_flow(0, 1, 2e6, 0.0, cfg).flow_class is FlowClass.MEDIUM


class TestDemandMatrix:
    def test_nonzero_diagonal_rejected(self):
        with pytest.raises(ValueError, match="diagonal"):
            DemandMatrix(n=2, cells=np.eye(2))

    def test_negative_entry_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            DemandMatrix(n=2, cells=np.array([[0.0, -1.0], [0.0, 0.0]]))

    def test_total(self):
        dm = DemandMatrix(n=2, cells=np.array([[0.0, 3.0], [4.0, 0.0]]))
        assert dm.total_bits == 7.0
