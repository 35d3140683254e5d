"""Hamiltonian expectation values, analytic gradients, and ensemble statistics.

Energies are plain expectation values E = <psi|H|psi> of Pauli-sum
Hamiltonians.  Gradients come from the same tangent states the metric
uses: dE/dtheta_k = 2 Re <d_k psi|H|psi>, which matches central finite
differences to the step-size error.  The natural gradient solves
F^+ g with the spectral pseudo-inverse at the shared rank tolerance, so
it stays defined when F is exactly singular (any redundant circuit).

Ensemble quantities (the barren-plateau experiments) draw independent
(structure, theta) pairs from a master seed and accumulate
order-independent sums; variance is the population variance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .circuits import (
    CircuitFamily,
    CircuitTemplate,
    prepare_state,
    sample_parameters,
    state_and_tangent_matrix,
    tangent_state,
)
from .qfi import (
    DEFAULT_RANK_TOLERANCE,
    _rank_threshold,
    effective_dimension,
    eigendecompose,
    qfi_from_tangents,
)
from .seeds import derive_seed
from .statevector import PauliString, StateVector, apply_pauli_string


@dataclass(frozen=True)
class Hamiltonian:
    """Real linear combination of Pauli strings; hermitian by construction."""

    terms: tuple[tuple[float, PauliString], ...]

    def __post_init__(self):
        for coeff, op in self.terms:
            if not np.isfinite(coeff):
                raise ValueError("hamiltonian coefficients must be finite")
            if not isinstance(op, PauliString):
                raise TypeError("hamiltonian terms must be (coefficient, PauliString)")

    @property
    def num_terms(self) -> int:
        return len(self.terms)

    def max_qubit(self) -> int:
        """Largest qubit index touched; -1 for the empty Hamiltonian."""
        qubits = [q for _, op in self.terms for q, _ in op.factors]
        return max(qubits) if qubits else -1


def build_zz(num_qubits: int) -> Hamiltonian:
    """Z on qubits 0 and 1, the two-point correlator used throughout."""
    if num_qubits < 2:
        raise ValueError("build_zz needs at least 2 qubits")
    return Hamiltonian(((1.0, PauliString(((0, "z"), (1, "z")))),))


def build_ising(num_qubits: int, h: float = 1.0) -> Hamiltonian:
    """Transverse-field Ising chain with open boundary.

    N-1 nearest-neighbour ZZ couplings plus N transverse X terms with
    field h, 2N-1 terms total.  The open boundary matches the chain
    entangler layout.
    """
    if num_qubits < 2:
        raise ValueError("build_ising needs at least 2 qubits")
    terms = [(1.0, PauliString(((q, "z"), (q + 1, "z")))) for q in range(num_qubits - 1)]
    terms += [(float(h), PauliString(((q, "x"),))) for q in range(num_qubits)]
    return Hamiltonian(tuple(terms))


def apply_hamiltonian(state: StateVector, hamiltonian: Hamiltonian) -> StateVector:
    """Return H|psi> as a new state (not normalized)."""
    if hamiltonian.max_qubit() >= state.num_qubits:
        raise ValueError(
            f"hamiltonian acts on qubit {hamiltonian.max_qubit()} "
            f"but the state has {state.num_qubits} qubits"
        )
    acc = np.zeros_like(state.amplitudes)
    for coeff, op in hamiltonian.terms:
        acc += coeff * apply_pauli_string(state, op).amplitudes
    return StateVector(state.num_qubits, acc)


def expectation(state: StateVector, hamiltonian: Hamiltonian) -> float:
    """<psi|H|psi>; real for hermitian H, the float of the real part."""
    val = np.vdot(state.amplitudes, apply_hamiltonian(state, hamiltonian).amplitudes)
    return float(val.real)


def energy(template: CircuitTemplate, theta: np.ndarray, hamiltonian: Hamiltonian) -> float:
    return expectation(prepare_state(template, theta), hamiltonian)


def gradient(template: CircuitTemplate, theta: np.ndarray, hamiltonian: Hamiltonian) -> np.ndarray:
    """Analytic energy gradient, dE/dtheta_k = 2 Re <d_k psi|H|psi>."""
    psi, tangents = state_and_tangent_matrix(template, theta)
    hpsi = apply_hamiltonian(StateVector(template.num_qubits, psi), hamiltonian)
    return 2.0 * (tangents.conj() @ hpsi.amplitudes).real


def gradient_component(
    template: CircuitTemplate,
    theta: np.ndarray,
    hamiltonian: Hamiltonian,
    k: int = 0,
) -> float:
    """Single component of the gradient without the full tangent sweep.

    Replays the circuit once with one generator insertion, so ensembles
    that only track d_0 E stay cheap at large M.
    """
    psi = prepare_state(template, theta)
    tk = tangent_state(template, theta, k)
    hpsi = apply_hamiltonian(psi, hamiltonian)
    return float(2.0 * np.vdot(tk.amplitudes, hpsi.amplitudes).real)


def natural_gradient(
    qfi_matrix: np.ndarray,
    grad: np.ndarray,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> np.ndarray:
    """F^+ g with the spectral pseudo-inverse.

    Eigen-directions below the shared rank tolerance contribute zero, so
    the result equals the exact solve when F is full rank and projects
    out the null space otherwise.
    """
    qfi_matrix = np.asarray(qfi_matrix, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if qfi_matrix.ndim != 2 or qfi_matrix.shape[0] != qfi_matrix.shape[1]:
        raise ValueError("qfi matrix must be square")
    if grad.shape != (qfi_matrix.shape[0],):
        raise ValueError(f"gradient length {grad.shape} does not match matrix {qfi_matrix.shape}")
    eigvals, eigvecs = np.linalg.eigh(qfi_matrix)
    threshold = _rank_threshold(eigvals, rank_tolerance)
    keep = eigvals > threshold
    inv = np.zeros_like(eigvals)
    inv[keep] = 1.0 / eigvals[keep]
    return eigvecs @ (inv * (eigvecs.T @ grad))


def qng_component(
    template: CircuitTemplate,
    theta: np.ndarray,
    hamiltonian: Hamiltonian,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
    k: int = 0,
) -> float:
    """Component k of F^+ grad E; needs the full tangent sweep."""
    psi, tangents = state_and_tangent_matrix(template, theta)
    hpsi = apply_hamiltonian(StateVector(template.num_qubits, psi), hamiltonian)
    grad = 2.0 * (tangents.conj() @ hpsi.amplitudes).real
    qfi_matrix = qfi_from_tangents(psi, tangents)
    return float(natural_gradient(qfi_matrix, grad, rank_tolerance)[k])


@dataclass
class EnsembleStats:
    """Order-independent accumulator for scalar ensemble quantities.

    Keeps running sums for mean/variance plus the raw values for the
    jackknife error bar on the variance.  Merging accumulators is
    associative and commutative up to float rounding.
    """

    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0
    values: list = field(default_factory=list)

    def add(self, x: float) -> None:
        x = float(x)
        self.count += 1
        self.total += x
        self.total_sq += x * x
        self.values.append(x)

    def merge(self, other: "EnsembleStats") -> None:
        self.count += other.count
        self.total += other.total
        self.total_sq += other.total_sq
        self.values.extend(other.values)

    @property
    def mean(self) -> float:
        if self.count == 0:
            raise ValueError("empty ensemble")
        return self.total / self.count

    @property
    def variance(self) -> float:
        # population variance, clamped against tiny negative rounding
        if self.count == 0:
            raise ValueError("empty ensemble")
        var = self.total_sq / self.count - self.mean**2
        return max(var, 0.0)

    def jackknife_stderr_variance(self) -> float:
        """Jackknife standard error of the population variance."""
        n = self.count
        if n < 2:
            return float("nan")
        xs = np.asarray(self.values)
        loo_sum = self.total - xs
        loo_sq = self.total_sq - xs**2
        loo_var = loo_sq / (n - 1) - (loo_sum / (n - 1)) ** 2
        center = loo_var.mean()
        return float(np.sqrt((n - 1) / n * np.sum((loo_var - center) ** 2)))


QUANTITIES = ("gradient_component", "qng_component", "energy")


@dataclass(frozen=True)
class EnsembleExperiment:
    """One ensemble: a circuit family at fixed (N, p), a Hamiltonian, and a scalar."""

    family: CircuitFamily
    num_qubits: int
    num_layers: int
    hamiltonian: Hamiltonian
    num_instances: int
    master_seed: int
    quantity: str = "gradient_component"
    component_index: int = 0
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE

    def __post_init__(self):
        if self.quantity not in QUANTITIES:
            raise ValueError(f"unknown quantity {self.quantity!r}, expected one of {QUANTITIES}")
        if self.num_instances < 2:
            raise ValueError("ensembles need at least 2 instances")


def instance_seeds(master_seed: int, index: int) -> tuple[int, int]:
    """Deterministic (structure_seed, theta_seed) for ensemble instance `index`."""
    return derive_seed(master_seed, index, 0), derive_seed(master_seed, index, 1)


def ensemble_value(experiment: EnsembleExperiment, index: int) -> float:
    """The experiment's scalar for one instance; safe to call from workers."""
    structure_seed, theta_seed = instance_seeds(experiment.master_seed, index)
    template = experiment.family.build(
        experiment.num_qubits, experiment.num_layers, structure_seed
    )
    theta = sample_parameters(template, theta_seed)
    if experiment.quantity == "energy":
        return energy(template, theta, experiment.hamiltonian)
    if experiment.quantity == "gradient_component":
        return gradient_component(
            template, theta, experiment.hamiltonian, experiment.component_index
        )
    return qng_component(
        template,
        theta,
        experiment.hamiltonian,
        experiment.rank_tolerance,
        experiment.component_index,
    )


def ensemble_variance(experiment: EnsembleExperiment, indices: Iterable[int] | None = None) -> EnsembleStats:
    """Accumulate the experiment's scalar over all instances.

    `indices` exists so a worker pool can split the ensemble; the merged
    result is order-independent up to float rounding.
    """
    stats = EnsembleStats()
    if indices is None:
        indices = range(experiment.num_instances)
    for i in indices:
        stats.add(ensemble_value(experiment, i))
    return stats


@dataclass(frozen=True)
class ASweepRow:
    a: float
    mean_gc: float
    var_grad: float
    jackknife_stderr: float


def a_sweep(
    family: CircuitFamily,
    num_qubits: int,
    num_layers: int,
    a_values: Sequence[float],
    num_instances: int,
    master_seed: int,
    hamiltonian: Hamiltonian | None = None,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
    component_index: int = 0,
) -> list[ASweepRow]:
    """Scale random parameter draws by a in (0, 1] and track rank and gradients.

    The same theta draws are reused across every a within an instance,
    so the sweep isolates the amplitude effect from sampling noise.
    """
    for a in a_values:
        if not 0.0 < a <= 1.0:
            raise ValueError(f"a values must lie in (0, 1], got {a}")
    if hamiltonian is None:
        hamiltonian = build_zz(num_qubits)
    draws = []
    for i in range(num_instances):
        structure_seed, theta_seed = instance_seeds(master_seed, i)
        template = family.build(num_qubits, num_layers, structure_seed)
        draws.append((template, sample_parameters(template, theta_seed)))
    rows = []
    for a in a_values:
        ranks = []
        grads = EnsembleStats()
        for template, theta in draws:
            psi, tangents = state_and_tangent_matrix(template, a * theta)
            qfi_matrix = qfi_from_tangents(psi, tangents)
            ranks.append(effective_dimension(eigendecompose(qfi_matrix), rank_tolerance))
            hpsi = apply_hamiltonian(StateVector(num_qubits, psi), hamiltonian)
            grads.add(2.0 * np.vdot(tangents[component_index], hpsi.amplitudes).real)
        rows.append(
            ASweepRow(
                a=float(a),
                mean_gc=float(np.mean(ranks)),
                var_grad=grads.variance,
                jackknife_stderr=grads.jackknife_stderr_variance(),
            )
        )
    return rows
