"""Dense statevector simulation primitives.

Conventions used throughout the package:

* Qubit 0 is the least significant bit of the basis index, so a ket written
  ``|b_{N-1} ... b_1 b_0>`` lives at index ``sum_q b_q 2**q``.
* Rotation gates are ``R_alpha(theta) = exp(-i sigma_alpha theta / 2)`` for
  ``alpha`` in ``{x, y, z, w}`` where ``sigma_w = (sigma_x + sigma_y)/sqrt(2)``.
* ``SQRT_HADAMARD`` is the principal matrix square root of the Hadamard gate
  (eigenvalue -1 maps to +i), so applying it twice gives the Hadamard exactly.
* Two-qubit gates act on arbitrary qubit pairs; CNOT takes (control, target),
  CPHASE and SQRT_ISWAP are symmetric under swapping the pair.

All gate kernels mutate amplitudes in place through reshaped views of the flat
amplitude array.  They accept any C-contiguous array whose trailing dimension
is the state dimension, which lets the circuit layer batch many states (for
example a state plus its tangent vectors) through one kernel call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

# Hard cap on the register size: 2**26 complex128 amplitudes is 1 GiB, which
# is the most a desk-scale run should ever touch.  Sizes >= 20 are required
# to work; anything above MAX_QUBITS fails fast instead of thrashing.
MAX_QUBITS = 26

_INV_SQRT2 = 1.0 / math.sqrt(2.0)

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
PAULI_W = (PAULI_X + PAULI_Y) * _INV_SQRT2

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=np.complex128) * _INV_SQRT2

# Principal square root of the Hadamard: exp(i pi/4)/sqrt(2) * (I - i H).
# On the +1 eigenspace this is 1, on the -1 eigenspace it is +i.
SQRT_HADAMARD_MATRIX = (
    np.exp(0.25j * np.pi) * _INV_SQRT2 * (np.eye(2) - 1.0j * HADAMARD)
)

ROTATION_AXES = ("x", "y", "z", "w")

_AXIS_PAULI = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z, "w": PAULI_W}


class GateKind(Enum):
    ROT_X = "rot_x"
    ROT_Y = "rot_y"
    ROT_Z = "rot_z"
    ROT_W = "rot_w"
    SQRT_HADAMARD = "sqrt_hadamard"
    CNOT = "cnot"
    CPHASE = "cphase"
    SQRT_ISWAP = "sqrt_iswap"

    @property
    def is_rotation(self) -> bool:
        return self in _ROTATION_KINDS

    @property
    def is_entangler(self) -> bool:
        return self in _ENTANGLER_KINDS


_ROTATION_KINDS = {GateKind.ROT_X, GateKind.ROT_Y, GateKind.ROT_Z, GateKind.ROT_W}
_ENTANGLER_KINDS = {GateKind.CNOT, GateKind.CPHASE, GateKind.SQRT_ISWAP}

AXIS_TO_GATE = {
    "x": GateKind.ROT_X,
    "y": GateKind.ROT_Y,
    "z": GateKind.ROT_Z,
    "w": GateKind.ROT_W,
}


def pauli_matrix(axis: str) -> np.ndarray:
    """Return the 2x2 rotation generator for an axis label in {x, y, z, w}."""
    try:
        return _AXIS_PAULI[axis]
    except KeyError:
        raise ValueError(f"unknown rotation axis {axis!r}") from None


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """2x2 unitary cos(angle/2) I - i sin(angle/2) sigma_axis."""
    half = 0.5 * angle
    return math.cos(half) * np.eye(2) - 1.0j * math.sin(half) * pauli_matrix(axis)


@dataclass
class StateVector:
    """A pure state of ``num_qubits`` qubits as a flat complex amplitude array."""

    num_qubits: int
    amplitudes: np.ndarray

    def copy(self) -> "StateVector":
        return StateVector(self.num_qubits, self.amplitudes.copy())

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def init_zero_state(num_qubits: int) -> StateVector:
    """All-zeros computational basis state ``|0...0>``."""
    if not 1 <= num_qubits <= MAX_QUBITS:
        raise ValueError(
            f"num_qubits must be in [1, {MAX_QUBITS}], got {num_qubits}"
        )
    amps = np.zeros(1 << num_qubits, dtype=np.complex128)
    amps[0] = 1.0
    return StateVector(num_qubits, amps)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """``<a|b>`` with the conjugate on the first argument."""
    if a.num_qubits != b.num_qubits:
        raise ValueError("states live on different register sizes")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


# ---------------------------------------------------------------------------
# In-place kernels.  ``batch`` is any C-contiguous complex array whose last
# axis is the state dimension; leading axes are carried along untouched.
# ---------------------------------------------------------------------------


def _pair_view(batch: np.ndarray, qubit: int) -> np.ndarray:
    # (..., 2**nq) -> (-1, 2, 2**qubit): axis 1 is the target qubit's bit.
    return batch.reshape(-1, 2, 1 << qubit)


def _quad_view(batch: np.ndarray, hi: int, lo: int) -> np.ndarray:
    # axis 1 carries the bit of qubit ``hi``, axis 3 the bit of qubit ``lo``.
    return batch.reshape(-1, 2, 1 << (hi - lo - 1), 2, 1 << lo)


def _check_batch(batch: np.ndarray) -> None:
    if not batch.flags.c_contiguous:
        raise ValueError("gate kernels need a C-contiguous amplitude array")


def apply_single_qubit_matrix(batch: np.ndarray, qubit: int, matrix: np.ndarray) -> None:
    _check_batch(batch)
    view = _pair_view(batch, qubit)
    a0 = view[:, 0].copy()
    a1 = view[:, 1]
    view[:, 0] = matrix[0, 0] * a0 + matrix[0, 1] * a1
    view[:, 1] = matrix[1, 0] * a0 + matrix[1, 1] * a1


def apply_rotation_kernel(batch: np.ndarray, qubit: int, axis: str, angle: float) -> None:
    if axis == "z":
        # Diagonal fast path, no temporary copy.
        _check_batch(batch)
        view = _pair_view(batch, qubit)
        half = 0.5 * angle
        phase = complex(math.cos(half), -math.sin(half))
        view[:, 0] *= phase
        view[:, 1] *= phase.conjugate()
    else:
        apply_single_qubit_matrix(batch, qubit, rotation_matrix(axis, angle))


def apply_sqrt_hadamard_kernel(batch: np.ndarray, qubit: int) -> None:
    apply_single_qubit_matrix(batch, qubit, SQRT_HADAMARD_MATRIX)


def apply_entangler_kernel(batch: np.ndarray, kind: GateKind, a: int, b: int) -> None:
    """Apply a two-qubit gate.  For CNOT, ``a`` is the control and ``b`` the target."""
    _check_batch(batch)
    if a == b:
        raise ValueError("two-qubit gate needs distinct qubits")
    hi, lo = (a, b) if a > b else (b, a)
    view = _quad_view(batch, hi, lo)
    if kind is GateKind.CNOT:
        if a == hi:
            tmp = view[:, 1, :, 0].copy()
            view[:, 1, :, 0] = view[:, 1, :, 1]
            view[:, 1, :, 1] = tmp
        else:
            tmp = view[:, 0, :, 1].copy()
            view[:, 0, :, 1] = view[:, 1, :, 1]
            view[:, 1, :, 1] = tmp
    elif kind is GateKind.CPHASE:
        view[:, 1, :, 1] *= -1.0
    elif kind is GateKind.SQRT_ISWAP:
        # Identity on |00>, |11>; on span{|01>, |10>} the symmetric matrix
        # [[1, i], [i, 1]]/sqrt(2), so the qubit order does not matter.
        x = view[:, 0, :, 1].copy()
        y = view[:, 1, :, 0].copy()
        view[:, 0, :, 1] = _INV_SQRT2 * (x + 1.0j * y)
        view[:, 1, :, 0] = _INV_SQRT2 * (1.0j * x + y)
    else:
        raise ValueError(f"{kind} is not a two-qubit gate")


def apply_pauli_kernel(batch: np.ndarray, qubit: int, axis: str) -> None:
    """Multiply by a single Pauli factor (axis in {x, y, z})."""
    _check_batch(batch)
    view = _pair_view(batch, qubit)
    if axis == "x":
        tmp = view[:, 0].copy()
        view[:, 0] = view[:, 1]
        view[:, 1] = tmp
    elif axis == "y":
        tmp = view[:, 0].copy()
        view[:, 0] = -1.0j * view[:, 1]
        view[:, 1] = 1.0j * tmp
    elif axis == "z":
        view[:, 1] *= -1.0
    else:
        # w rotations exist but Pauli strings stick to the standard basis.
        raise ValueError(f"unsupported Pauli axis {axis!r}")


# ---------------------------------------------------------------------------
# StateVector-level wrappers.
# ---------------------------------------------------------------------------


def apply_rotation(state: StateVector, axis: str, qubit: int, angle: float) -> StateVector:
    _check_qubit(state, qubit)
    apply_rotation_kernel(state.amplitudes, qubit, axis, angle)
    return state


def apply_sqrt_hadamard(state: StateVector, qubit: int) -> StateVector:
    _check_qubit(state, qubit)
    apply_sqrt_hadamard_kernel(state.amplitudes, qubit)
    return state


def apply_entangler(state: StateVector, kind: GateKind, a: int, b: int) -> StateVector:
    _check_qubit(state, a)
    _check_qubit(state, b)
    apply_entangler_kernel(state.amplitudes, kind, a, b)
    return state


def _check_qubit(state: StateVector, qubit: int) -> None:
    if not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.num_qubits} qubits")


@dataclass(frozen=True)
class PauliString:
    """A product of single-qubit Pauli factors, e.g. ``{0: "z", 3: "x"}``.

    Qubits absent from ``factors`` carry the identity.  The empty string is
    the identity operator.
    """

    factors: tuple[tuple[int, str], ...]

    @classmethod
    def from_dict(cls, factors: dict[int, str]) -> "PauliString":
        for qubit, axis in factors.items():
            if axis not in ("x", "y", "z"):
                raise ValueError(f"unsupported Pauli axis {axis!r} on qubit {qubit}")
        return cls(tuple(sorted(factors.items())))

    def __str__(self) -> str:
        if not self.factors:
            return "I"
        return " ".join(f"{axis}{qubit}" for qubit, axis in self.factors)


def apply_pauli_string(state: StateVector, pauli: PauliString) -> StateVector:
    """Return ``P|state>`` as a new StateVector; the input is left untouched."""
    out = state.copy()
    for qubit, axis in pauli.factors:
        _check_qubit(state, qubit)
        apply_pauli_kernel(out.amplitudes, qubit, axis)
    return out
