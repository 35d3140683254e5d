"""Layered circuit templates and their tangent states.

A template describes the circuit ``U(theta)|0> = prod_l [W_l V_l(theta_l)] *
sqrtH^{(x)N} |0...0>``: one square-root-Hadamard on every qubit, then
``num_layers`` layers, each a slab of single-qubit rotations followed by a
fixed entangling layer.  Rotation axes are fixed per template (the "structure")
and the angles are the free parameters.

Slots are the rotation positions of the template, indexed flat in application
order: layer-major, then qubit-major (for the ZXZ scheme each qubit contributes
three consecutive slots z, x, z).  A boolean ``active_mask`` over slots supports
pruning: a masked slot is simply skipped, which is the same as freezing its
angle at zero, and the parameter vector ``theta`` indexes the active slots in
slot order.

Tangent states follow the product-rule insertion picture: the derivative with
respect to the angle of slot ``l`` is the circuit run with an extra factor
``-i sigma/2`` inserted immediately before that slot's rotation.  Each tangent
has norm exactly 1/2.  ``batch_tangent_states`` accumulates all tangents in a
single forward sweep, applying every gate once to a growing batch, so the cost
is one circuit run on ``M + 1`` stacked states rather than ``M`` separate runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from enum import Enum
from functools import cached_property

import numpy as np

from .statevector import (
    GateKind,
    StateVector,
    apply_entangler_kernel,
    apply_pauli_kernel,
    apply_rotation_kernel,
    apply_single_qubit_matrix,
    apply_sqrt_hadamard_kernel,
    init_zero_state,
    pauli_matrix,
)


class Topology(Enum):
    CHAIN = "chain"
    ALL = "all"
    ALT = "alt"


class RotationScheme(Enum):
    RAND_XYZ = "rand_xyz"
    RAND_XYW = "rand_xyw"
    FIXED_X = "fixed_x"
    FIXED_Y = "fixed_y"
    FIXED_Z = "fixed_z"
    ZXZ = "zxz"


_RANDOM_AXIS_SETS = {
    RotationScheme.RAND_XYZ: ("x", "y", "z"),
    RotationScheme.RAND_XYW: ("x", "y", "w"),
}

_FIXED_AXES = {
    RotationScheme.FIXED_X: "x",
    RotationScheme.FIXED_Y: "y",
    RotationScheme.FIXED_Z: "z",
}

ENTANGLER_KINDS = (GateKind.CNOT, GateKind.CPHASE, GateKind.SQRT_ISWAP)


def rotations_per_layer(scheme: RotationScheme, num_qubits: int) -> int:
    """Rotation slot count b per layer: N, or 3N for the ZXZ scheme."""
    return 3 * num_qubits if scheme is RotationScheme.ZXZ else num_qubits


def entangler_pairs(topology: Topology, num_qubits: int, layer_index: int) -> tuple[tuple[int, int], ...]:
    """Qubit pairs of one entangling layer, in application order.

    The first qubit of each pair is the CNOT control.  CHAIN couples nearest
    neighbours on an open line; ALL couples every pair (i, j) with i < j in
    lexicographic order; ALT alternates the two nearest-neighbour brickwork
    sublayers, starting with (0,1),(2,3),... on even ``layer_index``.
    """
    n = num_qubits
    if topology is Topology.CHAIN:
        return tuple((q, q + 1) for q in range(n - 1))
    if topology is Topology.ALL:
        return tuple((i, j) for i in range(n) for j in range(i + 1, n))
    if topology is Topology.ALT:
        start = 0 if layer_index % 2 == 0 else 1
        return tuple((q, q + 1) for q in range(start, n - 1, 2))
    raise ValueError(f"unknown topology {topology}")


def _draw_axes(scheme: RotationScheme, num_slots: int, structure_seed: int) -> tuple[str, ...]:
    if scheme in _FIXED_AXES:
        return (_FIXED_AXES[scheme],) * num_slots
    if scheme is RotationScheme.ZXZ:
        if num_slots % 3:
            raise ValueError("ZXZ slot count must be a multiple of 3")
        return ("z", "x", "z") * (num_slots // 3)
    axis_set = _RANDOM_AXIS_SETS[scheme]
    # Philox is counter based, so the draw is reproducible across platforms
    # and numpy versions for a fixed structure_seed.
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(structure_seed)))
    picks = rng.integers(0, len(axis_set), size=num_slots)
    return tuple(axis_set[int(i)] for i in picks)


@dataclass(frozen=True)
class CircuitTemplate:
    """Immutable circuit structure: sizes, axes per slot, and the active mask."""

    num_qubits: int
    num_layers: int
    scheme: RotationScheme
    entangler: GateKind
    topology: Topology
    structure_seed: int
    axis_assignment: tuple[str, ...]
    active_mask: tuple[bool, ...]

    @property
    def slots_per_layer(self) -> int:
        return rotations_per_layer(self.scheme, self.num_qubits)

    @property
    def num_slots(self) -> int:
        return self.slots_per_layer * self.num_layers

    @property
    def parameter_count(self) -> int:
        return sum(self.active_mask)

    @cached_property
    def active_slots(self) -> tuple[int, ...]:
        """Original slot index of each parameter, in parameter order."""
        return tuple(s for s, on in enumerate(self.active_mask) if on)

    def slot_qubit(self, slot: int) -> int:
        within = slot % self.slots_per_layer
        if self.scheme is RotationScheme.ZXZ:
            return within // 3
        return within

    def with_mask(self, active_mask) -> "CircuitTemplate":
        mask = tuple(bool(m) for m in active_mask)
        if len(mask) != self.num_slots:
            raise ValueError("mask length must equal num_slots")
        return replace(self, active_mask=mask)


def build_template(
    num_qubits: int,
    num_layers: int,
    scheme: RotationScheme,
    entangler: GateKind,
    topology: Topology,
    structure_seed: int,
) -> CircuitTemplate:
    """Construct a template with every slot active.

    Axes for the random schemes are drawn from ``structure_seed`` alone, so the
    call is a pure function of its arguments.  ``num_qubits = 1`` is allowed
    and simply has empty entangling layers.
    """
    if num_qubits < 1:
        raise ValueError("num_qubits must be >= 1")
    if num_layers < 1:
        raise ValueError("num_layers must be >= 1")
    if entangler not in ENTANGLER_KINDS:
        raise ValueError(f"{entangler} is not an entangling gate")
    num_slots = rotations_per_layer(scheme, num_qubits) * num_layers
    axes = _draw_axes(scheme, num_slots, structure_seed)
    return CircuitTemplate(
        num_qubits=num_qubits,
        num_layers=num_layers,
        scheme=scheme,
        entangler=entangler,
        topology=topology,
        structure_seed=structure_seed,
        axis_assignment=axes,
        active_mask=(True,) * num_slots,
    )


@dataclass(frozen=True)
class CircuitFamily:
    """A (scheme, entangler, topology) triple; templates differ only by size and seed."""

    scheme: RotationScheme
    entangler: GateKind
    topology: Topology

    def build(self, num_qubits: int, num_layers: int, structure_seed: int) -> CircuitTemplate:
        return build_template(
            num_qubits, num_layers, self.scheme, self.entangler, self.topology, structure_seed
        )

    def label(self) -> str:
        return f"{self.scheme.value}-{self.entangler.value}-{self.topology.value}"


def sample_parameters(template: CircuitTemplate, rng_seed: int) -> np.ndarray:
    """Angles i.i.d. uniform on [0, 2pi), one per active slot."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(rng_seed)))
    return rng.random(template.parameter_count) * (2.0 * np.pi)


def _check_theta(template: CircuitTemplate, theta: np.ndarray) -> np.ndarray:
    theta = np.asarray(theta, dtype=np.float64)
    if theta.shape != (template.parameter_count,):
        raise ValueError(
            f"theta must have shape ({template.parameter_count},), got {theta.shape}"
        )
    return theta


def _apply_tangent_generator(row: np.ndarray, qubit: int, axis: str) -> None:
    """Multiply ``row`` (a (1, dim) view) by ``-i/2 sigma_axis`` in place.

    The x, y, z factors go through the cheap Pauli kernels; sigma_w is a sum
    of two Paulis so it needs the dense 2x2 path.
    """
    if axis == "w":
        apply_single_qubit_matrix(row, qubit, pauli_matrix("w"))
    else:
        apply_pauli_kernel(row, qubit, axis)
    row *= -0.5j


def prepare_state(template: CircuitTemplate, theta: np.ndarray) -> StateVector:
    """Run the template circuit on ``|0...0>``."""
    theta = _check_theta(template, theta)
    state = init_zero_state(template.num_qubits)
    batch = state.amplitudes.reshape(1, -1)
    nq = template.num_qubits
    for q in range(nq):
        apply_sqrt_hadamard_kernel(batch, q)
    slot = 0
    param = 0
    for layer in range(template.num_layers):
        for _ in range(template.slots_per_layer):
            if template.active_mask[slot]:
                qubit = template.slot_qubit(slot)
                apply_rotation_kernel(
                    batch, qubit, template.axis_assignment[slot], float(theta[param])
                )
                param += 1
            slot += 1
        for a, b in entangler_pairs(template.topology, nq, layer):
            apply_entangler_kernel(batch, template.entangler, a, b)
    return state


def state_and_tangent_matrix(template: CircuitTemplate, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One forward sweep returning ``(psi, T)``.

    ``psi`` has shape ``(2**N,)`` and ``T`` shape ``(M, 2**N)`` with row ``k``
    the tangent state of the k-th active slot.  This is the workhorse behind
    the metric and the analytic gradients.
    """
    theta = _check_theta(template, theta)
    dim = 1 << template.num_qubits
    m = template.parameter_count
    batch = np.zeros((m + 1, dim), dtype=np.complex128)
    batch[0, 0] = 1.0
    rows = _run_layers_with_tangents(template, theta, batch)
    if rows != m + 1:
        raise AssertionError("tangent bookkeeping out of sync with active mask")
    return batch[0], batch[1:]


def _run_layers_with_tangents(template: CircuitTemplate, theta: np.ndarray, batch: np.ndarray) -> int:
    nq = template.num_qubits
    rows = 1
    for q in range(nq):
        apply_sqrt_hadamard_kernel(batch[:rows], q)
    slot = 0
    param = 0
    for layer in range(template.num_layers):
        for _ in range(template.slots_per_layer):
            if template.active_mask[slot]:
                axis = template.axis_assignment[slot]
                qubit = template.slot_qubit(slot)
                batch[rows] = batch[0]
                _apply_tangent_generator(batch[rows : rows + 1], qubit, axis)
                rows += 1
                apply_rotation_kernel(batch[:rows], qubit, axis, float(theta[param]))
                param += 1
            slot += 1
        for a, b in entangler_pairs(template.topology, nq, layer):
            apply_entangler_kernel(batch[:rows], template.entangler, a, b)
    return rows


def batch_tangent_states(template: CircuitTemplate, theta: np.ndarray) -> list[StateVector]:
    """All tangent states ``d/d theta_k U(theta)|0>`` in parameter order."""
    _, tangents = state_and_tangent_matrix(template, theta)
    return [StateVector(template.num_qubits, row.copy()) for row in tangents]


def tangent_state(template: CircuitTemplate, theta: np.ndarray, k: int) -> StateVector:
    """Single tangent state for parameter index ``k`` (active slots only).

    Runs the circuit once with the generator insertion at slot ``k``, so it is
    the cheap path when only one derivative is needed.
    """
    theta = _check_theta(template, theta)
    m = template.parameter_count
    if not 0 <= k < m:
        raise IndexError(f"parameter index {k} out of range for {m} active slots")
    nq = template.num_qubits
    state = init_zero_state(nq)
    batch = state.amplitudes.reshape(1, -1)
    target_slot = template.active_slots[k]
    slot = 0
    param = 0
    for q in range(nq):
        apply_sqrt_hadamard_kernel(batch, q)
    for layer in range(template.num_layers):
        for _ in range(template.slots_per_layer):
            if template.active_mask[slot]:
                axis = template.axis_assignment[slot]
                qubit = template.slot_qubit(slot)
                if slot == target_slot:
                    _apply_tangent_generator(batch, qubit, axis)
                apply_rotation_kernel(batch, qubit, axis, float(theta[param]))
                param += 1
            slot += 1
        for a, b in entangler_pairs(template.topology, nq, layer):
            apply_entangler_kernel(batch, template.entangler, a, b)
    return state


# ---------------------------------------------------------------------------
# Serialization.  Axes are recomputed from the seed on load, so the JSON stays
# small and cannot drift out of sync with the structure draw.
# ---------------------------------------------------------------------------


def template_to_dict(template: CircuitTemplate) -> dict:
    return {
        "num_qubits": template.num_qubits,
        "num_layers": template.num_layers,
        "scheme": template.scheme.value,
        "entangler": template.entangler.value,
        "topology": template.topology.value,
        "structure_seed": template.structure_seed,
        "active_mask": [1 if on else 0 for on in template.active_mask],
    }


def template_from_dict(data: dict) -> CircuitTemplate:
    required = {
        "num_qubits", "num_layers", "scheme", "entangler", "topology",
        "structure_seed", "active_mask",
    }
    missing = required - data.keys()
    if missing:
        raise ValueError(f"template JSON missing fields: {sorted(missing)}")
    extra = data.keys() - required
    if extra:
        raise ValueError(f"template JSON has unknown fields: {sorted(extra)}")
    template = build_template(
        num_qubits=int(data["num_qubits"]),
        num_layers=int(data["num_layers"]),
        scheme=RotationScheme(data["scheme"]),
        entangler=GateKind(data["entangler"]),
        topology=Topology(data["topology"]),
        structure_seed=int(data["structure_seed"]),
    )
    mask = data["active_mask"]
    if len(mask) != template.num_slots:
        raise ValueError(
            f"active_mask length {len(mask)} does not match {template.num_slots} slots"
        )
    return template.with_mask(bool(int(m)) for m in mask)


def template_to_json(template: CircuitTemplate) -> str:
    return json.dumps(template_to_dict(template), indent=2, sort_keys=True)


def template_from_json(text: str) -> CircuitTemplate:
    return template_from_dict(json.loads(text))
