"""Quantum Fisher information matrix and capacity measures.

The metric is (one quarter of) the quantum Fisher information of the pure
output state,

    F_ij = Re( <d_i psi | d_j psi> - <d_i psi | psi><psi | d_j psi> ),

built from the tangent states of a circuit template.  With the tangent norm
convention of this package every diagonal entry is bounded by 1/4.

Capacity measures derived from the spectrum of F:

* ``effective_dimension`` G_C: the rank of F at a given parameter point, i.e.
  the number of eigenvalues above ``rank_tolerance * max(lambda_max, 1/4)``.
  The 1/4 floor keeps the threshold meaningful when the whole spectrum is
  tiny, e.g. at an unentangled fixed point.
* ``parameter_dimension`` D_C: the maximum of G_C over random parameter draws.
  The rank at a generic point is almost surely the generic rank, so a handful
  of samples agree; a warning is issued when they do not.
* ``redundancy`` R = (M - D_C)/M: the wasted fraction of the M parameters.

D_C is bounded by 2**(N+1) - 2, the real dimension of the pure-state manifold
modulo phase and normalization, and ``predict_transition_depth`` turns a
measured pre-saturation redundancy plateau into the expected saturation depth.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from .circuits import CircuitTemplate, sample_parameters, state_and_tangent_matrix
from .errors import NumericalGuardError
from .seeds import derive_seed

DEFAULT_RANK_TOLERANCE = 1e-10

# Eigenvalues of a valid metric may dip this far below zero from rounding;
# anything lower trips the numerical guard.
PSD_GUARD = -1e-10


def qfi_from_tangents(psi: np.ndarray, tangents: np.ndarray) -> np.ndarray:
    """Metric from an explicit state and its stacked tangent vectors.

    ``tangents`` has one row per parameter.  This is the single place the
    metric formula lives; the template path and the analytic test circuits
    both go through it.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    tangents = np.atleast_2d(np.asarray(tangents, dtype=np.complex128))
    overlaps = tangents.conj() @ psi          # <d_i psi | psi>
    gram = tangents.conj() @ tangents.T       # <d_i psi | d_j psi>
    f = (gram - np.outer(overlaps, overlaps.conj())).real
    return 0.5 * (f + f.T)


def compute_qfi(template: CircuitTemplate, theta: np.ndarray) -> np.ndarray:
    """M x M metric of the template at ``theta`` via one batched tangent sweep."""
    psi, tangents = state_and_tangent_matrix(template, theta)
    return qfi_from_tangents(psi, tangents)


@dataclass
class Spectrum:
    """Eigenvalues in descending order with eigenvectors as aligned columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eigendecompose(matrix: np.ndarray, symmetry_tolerance: float = 1e-8) -> Spectrum:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("expected a square matrix")
    if matrix.size and np.max(np.abs(matrix - matrix.T)) > symmetry_tolerance:
        raise ValueError("matrix is not symmetric within tolerance")
    values, vectors = np.linalg.eigh(matrix)
    order = np.argsort(values)[::-1]
    return Spectrum(values[order], vectors[:, order])


def _rank_threshold(eigenvalues: np.ndarray, rank_tolerance: float) -> float:
    lam_max = float(eigenvalues[0]) if eigenvalues.size else 0.0
    return rank_tolerance * max(lam_max, 0.25)


def check_psd(spectrum: Spectrum) -> None:
    """Numerical guard: a metric eigenvalue far below zero means the tangent
    accumulation went wrong, not that the state is exotic."""
    if spectrum.eigenvalues.size and float(spectrum.eigenvalues[-1]) < PSD_GUARD:
        raise NumericalGuardError(
            f"metric has eigenvalue {spectrum.eigenvalues[-1]:.3e} below {PSD_GUARD}"
        )


def effective_dimension(spectrum: Spectrum, rank_tolerance: float = DEFAULT_RANK_TOLERANCE) -> int:
    """G_C: eigenvalue count above the relative rank threshold."""
    threshold = _rank_threshold(spectrum.eigenvalues, rank_tolerance)
    return int(np.sum(spectrum.eigenvalues > threshold))


def max_parameter_dimension(num_qubits: int) -> int:
    """Dimension bound 2**(N+1) - 2 of the normalized phase-free state space."""
    return (1 << (num_qubits + 1)) - 2


def parameter_dimension_samples(
    template: CircuitTemplate,
    num_samples: int = 5,
    seed: int = 0,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> list[int]:
    """G_C at ``num_samples`` independent uniform parameter draws."""
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    values = []
    for j in range(num_samples):
        theta = sample_parameters(template, derive_seed(seed, j))
        spectrum = eigendecompose(compute_qfi(template, theta))
        check_psd(spectrum)
        values.append(effective_dimension(spectrum, rank_tolerance))
    return values


def parameter_dimension(
    template: CircuitTemplate,
    num_samples: int = 5,
    seed: int = 0,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> int:
    """D_C: maximum of G_C over random parameter draws.

    Draws at a generic point all see the generic rank, so disagreement between
    samples signals a tolerance sitting inside the spectrum's tail; it is
    reported as a warning rather than an error.
    """
    values = parameter_dimension_samples(template, num_samples, seed, rank_tolerance)
    if len(set(values)) > 1:
        warnings.warn(
            f"rank disagrees across random draws: {values}; "
            "the rank tolerance may sit inside the nonzero tail",
            RuntimeWarning,
            stacklevel=2,
        )
    return max(values)


def redundancy(num_parameters: int, parameter_dim: int) -> float:
    """R = (M - D_C) / M."""
    if num_parameters < 1:
        raise ValueError("num_parameters must be >= 1")
    if not 0 <= parameter_dim <= num_parameters:
        raise ValueError("parameter_dim must lie in [0, num_parameters]")
    return (num_parameters - parameter_dim) / num_parameters


def predict_transition_depth(redundancy_plateau: float, num_qubits: int, rotations_per_layer: int) -> float:
    """Saturation depth estimate (1 - R_C)(2**(N+1) - 2) / b, not rounded."""
    if rotations_per_layer < 1:
        raise ValueError("rotations_per_layer must be >= 1")
    return (1.0 - redundancy_plateau) * max_parameter_dimension(num_qubits) / rotations_per_layer


@dataclass
class CapacityReport:
    """Capacity summary of a template at one parameter point."""

    effective_dimension: int
    parameter_dimension: int
    redundancy: float
    rank_tolerance: float

    def to_json(self) -> str:
        return json.dumps(
            {
                "effective_dimension": self.effective_dimension,
                "parameter_dimension": self.parameter_dimension,
                "redundancy": self.redundancy,
                "rank_tolerance": self.rank_tolerance,
            },
            indent=2,
            sort_keys=True,
        )


def capacity_report(
    template: CircuitTemplate,
    theta: np.ndarray,
    num_samples: int = 5,
    seed: int = 0,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
) -> CapacityReport:
    """G_C at ``theta`` plus sampled D_C and the implied redundancy.

    Any single-point rank is a lower bound on D_C, so the report folds the
    observed G_C into the D_C estimate; this keeps G_C <= D_C exact even when
    the random draws were unlucky.
    """
    spectrum = eigendecompose(compute_qfi(template, theta))
    check_psd(spectrum)
    g_c = effective_dimension(spectrum, rank_tolerance)
    d_c = max(
        g_c,
        parameter_dimension(template, num_samples, seed, rank_tolerance),
    )
    return CapacityReport(
        effective_dimension=g_c,
        parameter_dimension=d_c,
        redundancy=redundancy(template.parameter_count, d_c),
        rank_tolerance=rank_tolerance,
    )


@dataclass
class SpectrumStats:
    """Summary of the nonzero part of a metric spectrum.

    ``var_log_nonzero`` is the population variance of the natural log of the
    nonzero eigenvalues, ``min_nonzero`` the smallest of them, and the
    histogram bins their log10 values.
    """

    var_log_nonzero: float
    min_nonzero: float
    bin_edges: np.ndarray
    counts: np.ndarray

    def to_json(self) -> str:
        return json.dumps(
            {
                "var_log_nonzero": self.var_log_nonzero,
                "min_nonzero": self.min_nonzero,
                "histogram": {
                    "bin_edges": [float(x) for x in self.bin_edges],
                    "counts": [int(c) for c in self.counts],
                },
            },
            indent=2,
            sort_keys=True,
        )


def spectrum_stats(
    spectrum: Spectrum,
    rank_tolerance: float = DEFAULT_RANK_TOLERANCE,
    num_bins: int = 40,
) -> SpectrumStats:
    threshold = _rank_threshold(spectrum.eigenvalues, rank_tolerance)
    nonzero = spectrum.eigenvalues[spectrum.eigenvalues > threshold]
    if nonzero.size == 0:
        raise ValueError("spectrum has no nonzero eigenvalues above tolerance")
    logs = np.log(nonzero)
    log10s = np.log10(nonzero)
    lo, hi = float(log10s.min()), float(log10s.max())
    if hi - lo < 1e-9:
        # Degenerate spectra (all nonzero eigenvalues equal) would make the
        # bin width underflow; widen to a unit decade around the value.
        lo, hi = lo - 0.5, hi + 0.5
    counts, edges = np.histogram(log10s, bins=num_bins, range=(lo, hi))
    return SpectrumStats(
        var_log_nonzero=float(np.var(logs)),
        min_nonzero=float(nonzero.min()),
        bin_edges=edges,
        counts=counts,
    )


@dataclass
class MeasurementCosts:
    """Measurement counts for estimating the full M x M metric on hardware."""

    shift_rule_fidelities: int
    hadamard_tests: int
    pauli_measurements: int

    def to_json(self) -> str:
        return json.dumps(
            {
                "shift_rule_fidelities": self.shift_rule_fidelities,
                "hadamard_tests": self.hadamard_tests,
                "pauli_measurements": self.pauli_measurements,
            },
            indent=2,
            sort_keys=True,
        )


def measurement_costs(num_parameters: int) -> MeasurementCosts:
    """Closed-form counts: 2M(M-1)+M fidelities, M(M-1)/2 Hadamard tests, M Paulis."""
    m = num_parameters
    if m < 1:
        raise ValueError("num_parameters must be >= 1")
    return MeasurementCosts(
        shift_rule_fidelities=2 * m * (m - 1) + m,
        hadamard_tests=m * (m - 1) // 2,
        pauli_measurements=m,
    )
