import json

import numpy as np
import pytest

from qcgeom.circuits import (
    RotationScheme,
    Topology,
    build_template,
    sample_parameters,
)
from qcgeom.pruning import (
    LayerCompaction,
    layer_compaction_report,
    prune,
    render_slot_grid,
    verify_prune,
)
from qcgeom.qfi import compute_qfi, effective_dimension, eigendecompose, parameter_dimension
from qcgeom.statevector import GateKind


def chain_template(n=3, p=6, scheme=RotationScheme.RAND_XYZ, entangler=GateKind.CNOT, seed=0):
    return build_template(n, p, scheme, entangler, Topology.CHAIN, seed)


class TestPruneBasics:
    def test_z_chain_collapses_to_single_slot(self):
        # one qubit, all-z rotations: rank 1, so all but one slot must go
        t = chain_template(n=1, p=5, scheme=RotationScheme.FIXED_Z)
        theta = sample_parameters(t, 1)
        pruned, log = prune(t, theta)
        assert log.initial_M == 5
        assert log.final_M == 1
        assert log.D_C_before == 1
        assert log.iterations == 4
        assert pruned.parameter_count == 1
        assert render_slot_grid(pruned) == "zIIII"

    def test_full_rank_template_untouched(self):
        t = chain_template(n=2, p=1)
        theta = sample_parameters(t, 2)
        pruned, log = prune(t, theta)
        assert log.removed_indices == ()
        assert log.iterations == 0
        assert pruned == t

    def test_zero_theta_rejected(self):
        t = chain_template()
        with pytest.raises(ValueError, match="degenerate"):
            prune(t, np.zeros(t.parameter_count))

    def test_wrong_shape_rejected(self):
        t = chain_template()
        with pytest.raises(ValueError):
            prune(t, np.ones(3))

    def test_deterministic(self):
        t = chain_template(n=3, p=8, seed=5)
        theta = sample_parameters(t, 6)
        _, log_a = prune(t, theta)
        _, log_b = prune(t, theta)
        assert log_a == log_b

    def test_log_accounting(self):
        t = chain_template(n=3, p=8, seed=3)
        theta = sample_parameters(t, 4)
        pruned, log = prune(t, theta)
        assert log.final_M == log.initial_M - len(log.removed_indices)
        assert log.iterations == len(log.removed_indices)
        assert log.final_M == log.D_C_before
        assert len(set(log.removed_indices)) == len(log.removed_indices)
        assert set(log.removed_indices) <= set(t.active_slots)
        assert pruned.parameter_count == log.final_M

    def test_overparametrized_chain_prunes_to_capacity(self):
        # N = 3 saturates at 2^4 - 2 = 14 independent directions
        t = chain_template(n=3, p=6, seed=0)
        theta = sample_parameters(t, 100)
        pruned, log = prune(t, theta)
        assert log.initial_M == 18
        assert log.D_C_before == 14
        assert log.final_M == 14

    def test_idempotent_on_pruned_template(self):
        t = chain_template(n=3, p=6, seed=21)
        pruned, _ = prune(t, sample_parameters(t, 22))
        again, log = prune(pruned, sample_parameters(pruned, 23))
        assert log.removed_indices == ()
        assert again == pruned

    def test_log_json_roundtrip(self):
        t = chain_template(n=3, p=6, seed=7)
        _, log = prune(t, sample_parameters(t, 8))
        data = json.loads(log.to_json())
        assert data["initial_M"] == log.initial_M
        assert data["final_M"] == log.final_M
        assert tuple(data["removed_indices"]) == log.removed_indices
        assert data["D_C_before"] == log.D_C_before


class TestPrunedCircuitQuality:
    def test_pruned_metric_full_rank_at_fresh_theta(self):
        t = chain_template(n=4, p=10, entangler=GateKind.CPHASE, seed=2)
        pruned, log = prune(t, sample_parameters(t, 3))
        fresh = sample_parameters(pruned, 999)
        spec = eigendecompose(compute_qfi(pruned, fresh))
        assert effective_dimension(spec) == pruned.parameter_count

    def test_parameter_dimension_preserved(self):
        t = chain_template(n=3, p=6, seed=31)
        pruned, _ = prune(t, sample_parameters(t, 32))
        assert parameter_dimension(pruned, num_samples=3, seed=1) == parameter_dimension(
            t, num_samples=3, seed=1
        )

    def test_verify_prune_passes(self):
        t = chain_template(n=3, p=6, seed=41)
        pruned, _ = prune(t, sample_parameters(t, 42))
        ok, report = verify_prune(t, pruned, num_samples=3, seed=5)
        assert ok
        assert report["parameter_dimension_original"] == report["parameter_dimension_pruned"]
        assert report["pruned_parameter_count"] == report["parameter_dimension_pruned"]
        assert report["fresh_full_rank"] is True
        assert report["fresh_min_relative_eigenvalue"] > 0

    def test_verify_prune_detects_overpruning(self):
        t = chain_template(n=3, p=6, seed=51)
        pruned, _ = prune(t, sample_parameters(t, 52))
        mask = list(pruned.active_mask)
        mask[pruned.active_slots[0]] = False  # drop one slot too many
        broken = pruned.with_mask(mask)
        ok, report = verify_prune(t, broken, num_samples=3, seed=5)
        assert not ok
        assert report["pruned_parameter_count"] < report["parameter_dimension_original"]


class TestLayerCompaction:
    def test_no_dead_layers_initially(self):
        t = chain_template(n=2, p=3)
        report = layer_compaction_report(t)
        assert report == LayerCompaction(removable_layers=0, layer_indices=())

    def test_detects_fully_masked_layer(self):
        t = chain_template(n=2, p=3)
        mask = [True] * t.num_slots
        mask[2] = mask[3] = False  # layer 1 has slots 2, 3
        report = layer_compaction_report(t.with_mask(mask))
        assert report.removable_layers == 1
        assert report.layer_indices == (1,)

    def test_partially_masked_layer_not_removable(self):
        t = chain_template(n=2, p=2)
        mask = [True, False, True, True]
        assert layer_compaction_report(t.with_mask(mask)).removable_layers == 0


class TestSlotGrid:
    def test_shape_and_letters(self):
        t = chain_template(n=3, p=4)
        grid = render_slot_grid(t)
        lines = grid.split("\n")
        assert len(lines) == 3
        assert all(len(line) == 4 for line in lines)
        assert set("".join(lines)) <= set("xyzw")

    def test_zxz_three_columns_per_layer(self):
        t = chain_template(n=2, p=2, scheme=RotationScheme.ZXZ)
        lines = render_slot_grid(t).split("\n")
        assert len(lines) == 2
        assert lines[0] == "zxzzxz"

    def test_masked_slots_show_identity(self):
        t = chain_template(n=2, p=2, scheme=RotationScheme.FIXED_X)
        masked = t.with_mask([True, False, False, True])
        assert render_slot_grid(masked) == "xI\nIx"
