"""Iterative removal of redundant rotation slots via the metric null space.

The metric is computed once at a random point.  One slot goes per pass:
eigendecompose the current truncated matrix, collect the z lowest
eigenvectors (the null cluster), score each surviving slot by its summed
weight beta_j over that cluster, drop the highest-index slot with beta
above threshold, delete that row and column, and repeat until no zero
eigenvalues remain.  Each deletion removes exactly one null direction,
so the surviving count always lands on the starting rank.

The matrix is truncated between passes, not recomputed from the circuit.
Truncation keeps the removed angle at its drawn value, while the actual
pruned circuit freezes it at zero; the two diverge when zeroing a
removed rotation creates a new dependence among the survivors, e.g. two
z rotations that were independent only through an intervening x rotation
collapse to one when that x slot is dropped.  Single-axis and
random-axis slabs do not build such chains and prune cleanly; the
three-slot z-x-z scheme is the known offender.  verify_prune and its
fresh-theta full-rank check surface those cases rather than silently
repairing them.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .circuits import CircuitTemplate, RotationScheme, sample_parameters
from .errors import NumericalGuardError
from .qfi import DEFAULT_RANK_TOLERANCE, compute_qfi, effective_dimension, eigendecompose
from .seeds import derive_seed

# beta_j of an exact null vector is O(1) on unit-norm eigenvectors; anything
# below this is rounding noise, not null-space weight.
BETA_THRESHOLD = 1e-8

# Tolerance for "is this eigenvalue a structural zero" on a fresh draw.
# Structural zeros (a removable slot) sit at the ~1e-16 arithmetic floor;
# soft geometric minima near the capacity transition dip to ~1e-13..1e-10
# relative.  The safety check below must not confuse the two, so it uses
# this and not the physical rank tolerance.
STRUCTURAL_RANK_TOLERANCE = 1e-13


@dataclass(frozen=True)
class PruneLog:
    """Removal record; indices are template slot indices in removal order.

    final_M equals D_C_before by construction: the loop deletes exactly
    initial_M - D_C_before rows.  D_C_after is the rank of the surviving
    truncated submatrix at the same angles, not of the pruned circuit;
    the pruned circuit itself is judged by verify_prune.
    """

    removed_indices: tuple[int, ...]
    iterations: int
    initial_M: int
    final_M: int
    D_C_before: int
    D_C_after: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["removed_indices"] = list(self.removed_indices)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def prune(
    template: CircuitTemplate,
    theta: np.ndarray,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> tuple[CircuitTemplate, PruneLog]:
    """Mask redundant slots until the surviving metric has no null space.

    ``theta`` must be a generic point, e.g. drawn uniformly on [0, 2pi);
    the rank at a degenerate point (all zeros, or any exact multiple of
    pi on every slot) understates the parameter dimension and would cause
    wild over-pruning, so near-zero draws are rejected outright.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (template.parameter_count,):
        raise ValueError(
            f"theta must have shape ({template.parameter_count},), got {theta.shape}"
        )
    if template.parameter_count < 1:
        raise ValueError("template has no active slots")
    if np.max(np.abs(theta)) < 1e-9:
        raise ValueError(
            "theta = 0 is a degenerate point: the metric rank there is far below "
            "the parameter dimension and pruning would remove expressive slots. "
            "Draw theta uniformly on [0, 2pi), e.g. with sample_parameters()."
        )

    qfi_matrix = compute_qfi(template, theta)
    spectrum = eigendecompose(qfi_matrix)
    rank_before = effective_dimension(spectrum, rank_tolerance)
    initial_m = template.parameter_count

    # surviving[j] = template slot index of row/column j of the submatrix
    surviving = list(template.active_slots)
    sub = qfi_matrix.copy()
    removed: list[int] = []
    z = initial_m - rank_before
    iterations = 0

    while z > 0:
        eigvals, eigvecs = np.linalg.eigh(sub)
        # eigh sorts ascending: the first z columns span the null cluster
        beta = np.sum(np.abs(eigvecs[:, :z]) ** 2, axis=1)
        candidates = np.nonzero(beta > BETA_THRESHOLD)[0]
        if candidates.size == 0:
            raise NumericalGuardError(
                "null-space weights all below threshold; the metric null space "
                "has no removable slot, which should not happen for unit-norm "
                "eigenvectors"
            )
        k_local = int(candidates.max())
        removed.append(surviving.pop(k_local))
        sub = np.delete(np.delete(sub, k_local, axis=0), k_local, axis=1)
        z -= 1
        iterations += 1

    # rank of the surviving submatrix at the same theta; equals len(surviving)
    # by construction of the count, but computed honestly
    if sub.size:
        d_c_after = effective_dimension(eigendecompose(sub), rank_tolerance)
    else:
        d_c_after = 0

    mask = list(template.active_mask)
    for slot in removed:
        mask[slot] = False
    pruned = template.with_mask(mask)

    log = PruneLog(
        removed_indices=tuple(removed),
        iterations=iterations,
        initial_M=initial_m,
        final_M=pruned.parameter_count,
        D_C_before=rank_before,
        D_C_after=d_c_after,
    )
    return pruned, log


def verify_prune(
    original: CircuitTemplate,
    pruned: CircuitTemplate,
    num_samples: int = 3,
    seed: int = 0,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> tuple[bool, dict]:
    """Check that pruning preserved the parameter dimension.

    Passes iff the pruned template's parameter dimension equals the
    original's and the pruned parameter count equals that dimension,
    i.e. the pruned circuit is redundancy-free.  The report also carries
    a full-rank check of the pruned metric at a fresh random theta, at
    the structural tolerance (see STRUCTURAL_RANK_TOLERANCE): deletion
    from a fixed matrix could in principle diverge from the true pruned
    circuit, and this surfaces such cases.
    """
    from .qfi import parameter_dimension

    d_c_original = parameter_dimension(original, num_samples, seed, rank_tolerance)
    d_c_pruned = parameter_dimension(pruned, num_samples, seed, rank_tolerance)

    # stream num_samples is disjoint from the 0..num_samples-1 draws above
    fresh_theta = sample_parameters(pruned, derive_seed(seed, num_samples))
    fresh_spectrum = eigendecompose(compute_qfi(pruned, fresh_theta))
    eigvals = fresh_spectrum.eigenvalues
    scale = max(float(eigvals[0]), 0.25) if eigvals.size else 0.25
    min_relative = float(eigvals[-1]) / scale if eigvals.size else 0.0
    fresh_full_rank = bool(min_relative > STRUCTURAL_RANK_TOLERANCE)

    ok = d_c_pruned == d_c_original and pruned.parameter_count == d_c_original
    report = {
        "parameter_dimension_original": d_c_original,
        "parameter_dimension_pruned": d_c_pruned,
        "pruned_parameter_count": pruned.parameter_count,
        "fresh_full_rank": fresh_full_rank,
        "fresh_min_relative_eigenvalue": min_relative,
    }
    return ok, report


@dataclass(frozen=True)
class LayerCompaction:
    """Count of layers whose rotation slots are all masked.

    Those layers could be dropped together with their entangling gates
    without touching any surviving parameter; this only reports the
    candidates, it does not rebuild the circuit.
    """

    removable_layers: int
    layer_indices: tuple[int, ...]


def layer_compaction_report(template: CircuitTemplate) -> LayerCompaction:
    per_layer = template.slots_per_layer
    dead = []
    for layer in range(template.num_layers):
        lo = layer * per_layer
        if not any(template.active_mask[lo : lo + per_layer]):
            dead.append(layer)
    return LayerCompaction(removable_layers=len(dead), layer_indices=tuple(dead))


def render_slot_grid(template: CircuitTemplate) -> str:
    """Text grid of the template: one row per qubit, one letter per slot.

    Active slots show their rotation axis letter, masked slots show
    ``I``.  For the three-slot scheme each layer contributes three
    columns per qubit, otherwise one.  Rows are newline-joined, so the
    total letter count equals the number of slots.
    """
    per_qubit = 3 if template.scheme is RotationScheme.ZXZ else 1
    rows = [[] for _ in range(template.num_qubits)]
    for slot in range(template.num_slots):
        qubit = template.slot_qubit(slot)
        if template.active_mask[slot]:
            rows[qubit].append(template.axis_assignment[slot])
        else:
            rows[qubit].append("I")
    assert all(len(r) == template.num_layers * per_qubit for r in rows)
    return "\n".join("".join(r) for r in rows)
