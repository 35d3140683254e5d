"""Config-driven experiment runners with deterministic CSV output.

Every runner derives all randomness from the config's master seed and
the sorted sweep keys, so identical configs produce byte-identical
files.  Floats are written as their shortest round-trip decimal
(``repr``), line endings are ``\\n``, and rows are emitted in sorted key
order regardless of how the worker pool schedules the computation.

Each run ends by writing ``manifest.json`` with the config hash, the
package version, and the list of produced files.
"""

from __future__ import annotations

import csv
import json
import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np

from .circuits import (
    CircuitFamily,
    RotationScheme,
    Topology,
    rotations_per_layer,
    sample_parameters,
)
from .config import ENTANGLERS, ExperimentConfig
from .errors import ConfigError
from .pruning import layer_compaction_report, prune, render_slot_grid, verify_prune
from .qfi import (
    _rank_threshold,
    compute_qfi,
    effective_dimension,
    eigendecompose,
    max_parameter_dimension,
    measurement_costs,
    parameter_dimension,
    predict_transition_depth,
    redundancy,
    spectrum_stats,
)
from .seeds import derive_seed
from .statevector import GateKind
from .vqa import EnsembleExperiment, Hamiltonian, a_sweep, build_ising, build_zz, ensemble_variance

GC_ZERO_STALL = 3  # consecutive non-growing scan steps before early stop


def _fmt(value) -> str:
    """Canonical CSV cell: shortest round-trip floats, plain ints, raw strings."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_manifest(config: ExperimentConfig, out_dir: str, files: list[str]) -> str:
    path = os.path.join(out_dir, "manifest.json")
    from . import __version__

    payload = {
        "config_hash": config.config_hash(),
        "tool_version": __version__,
        "files": sorted(os.path.basename(f) for f in files),
    }
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _pool_map(fn: Callable, items: list, threads: int) -> list:
    """Order-preserving map, inline for threads <= 1."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _require_ranges(config: ExperimentConfig, **needed: str) -> None:
    for field_name, why in needed.items():
        if not getattr(config, field_name):
            raise ConfigError(f"config field '{field_name}': must be non-empty for {why}")


def _hamiltonian_for(config: ExperimentConfig, num_qubits: int) -> Hamiltonian:
    if config.hamiltonian == "ising":
        return build_ising(num_qubits)
    return build_zz(num_qubits)


# ---------------------------------------------------------------- dc_vs_p

def _dc_item(args) -> tuple[int, int, int, float, int]:
    config, n, p = args
    family = config.family()
    template = family.build(n, p, derive_seed(config.master_seed, n, p, 0))
    d_c = parameter_dimension(
        template,
        config.dc_samples,
        derive_seed(config.master_seed, n, p, 1),
        config.rank_tolerance,
    )
    m = template.parameter_count
    return n, p, d_c, redundancy(m, d_c), m


def run_dc_vs_p(config: ExperimentConfig) -> list[str]:
    _require_ranges(config, n_values="dc_vs_p", p_values="dc_vs_p")
    items = [(config, n, p) for n in sorted(config.n_values) for p in sorted(config.p_values)]
    results = _pool_map(_dc_item, items, config.threads)

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    main_path = os.path.join(out, "dc_vs_p.csv")
    _write_csv(main_path, ("N", "p", "D_C", "R", "M"), results)

    # per-N summary: detected saturation depth and the predicted one
    summary = []
    scheme = RotationScheme(config.scheme)
    for n in sorted(set(config.n_values)):
        curve = [(p, d_c, r) for (nn, p, d_c, r, _) in results if nn == n]
        bound = max_parameter_dimension(n)
        saturated = [p for p, d_c, _ in curve if d_c == bound]
        detected = min(saturated) if saturated else None
        # redundancy plateau: at saturation when reached, else at the deepest scan point
        if detected is not None:
            r_plateau = next(r for p, _, r in curve if p == detected)
        else:
            r_plateau = curve[-1][2]
        predicted = predict_transition_depth(r_plateau, n, rotations_per_layer(scheme, n))
        summary.append((n, detected, predicted))
    summary_path = os.path.join(out, "dc_vs_p_summary.csv")
    _write_csv(summary_path, ("N", "saturation_p", "predicted_p_c"), summary)

    files = [main_path, summary_path]
    files.append(_write_manifest(config, out, files))
    return files


# ---------------------------------------------------------- spectrum_vs_p

def _spectrum_item(args):
    config, n, p, instance = args
    family = config.family()
    template = family.build(n, p, derive_seed(config.master_seed, n, p, instance, 0))
    theta = sample_parameters(template, derive_seed(config.master_seed, n, p, instance, 1))
    spectrum = eigendecompose(compute_qfi(template, theta))
    stats = spectrum_stats(spectrum, config.rank_tolerance, config.num_bins)
    eigvals = spectrum.eigenvalues
    nonzero = eigvals[eigvals > _rank_threshold(eigvals, config.rank_tolerance)]
    return (n, p, instance, stats.var_log_nonzero, stats.min_nonzero), nonzero


def run_spectrum_vs_p(config: ExperimentConfig) -> list[str]:
    _require_ranges(config, n_values="spectrum_vs_p", p_values="spectrum_vs_p")
    items = [
        (config, n, p, i)
        for n in sorted(config.n_values)
        for p in sorted(config.p_values)
        for i in range(config.num_instances)
    ]
    results = _pool_map(_spectrum_item, items, config.threads)

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    main_path = os.path.join(out, "spectrum_vs_p.csv")
    _write_csv(
        main_path,
        ("N", "p", "instance", "var_log_nonzero", "min_nonzero"),
        [row for row, _ in results],
    )
    files = [main_path]

    # one aggregate log10 histogram per (N, p) over all instances
    by_key: dict[tuple[int, int], list[np.ndarray]] = {}
    for (n, p, _, _, _), nonzero in results:
        by_key.setdefault((n, p), []).append(nonzero)
    for (n, p) in sorted(by_key):
        pooled = np.log10(np.concatenate(by_key[(n, p)]))
        lo, hi = float(pooled.min()), float(pooled.max())
        if hi - lo < 1e-9:
            lo, hi = lo - 0.5, hi + 0.5
        counts, edges = np.histogram(pooled, bins=config.num_bins, range=(lo, hi))
        hist_path = os.path.join(out, f"spectrum_hist_N{n}_p{p}.csv")
        _write_csv(
            hist_path,
            ("bin_left_log10", "bin_right_log10", "count"),
            [(edges[i], edges[i + 1], int(counts[i])) for i in range(len(counts))],
        )
        files.append(hist_path)

    files.append(_write_manifest(config, out, files))
    return files


# ------------------------------------------------------------- variance

def _variance_item(args):
    config, n, p = args
    family = config.family()
    hamiltonian = _hamiltonian_for(config, n)
    shared_master = derive_seed(config.master_seed, n, p)
    grad = ensemble_variance(
        EnsembleExperiment(
            family,
            n,
            p,
            hamiltonian,
            config.num_instances,
            shared_master,
            "gradient_component",
            config.component_index,
            config.rank_tolerance,
        )
    )
    rows = [
        (n, p, "grad", grad.count, grad.mean, grad.variance, grad.jackknife_stderr_variance())
    ]
    # the natural gradient needs the full eigendecomposition; keep it to
    # circuits small enough that the sweep stays interactive
    m = rotations_per_layer(RotationScheme(config.scheme), n) * p
    if m <= config.qng_max_parameters:
        qng = ensemble_variance(
            EnsembleExperiment(
                family,
                n,
                p,
                hamiltonian,
                config.num_instances,
                shared_master,
                "qng_component",
                config.component_index,
                config.rank_tolerance,
            )
        )
        rows.append(
            (n, p, "qng", qng.count, qng.mean, qng.variance, qng.jackknife_stderr_variance())
        )
    return rows


def run_variance(config: ExperimentConfig) -> list[str]:
    if config.experiment_kind == "variance_vs_n":
        _require_ranges(config, n_values="variance_vs_n")
        # depth follows system size in the scaling sweep
        pairs = [(n, 2 * n) for n in sorted(config.n_values)]
    else:
        _require_ranges(config, n_values="variance_vs_p", p_values="variance_vs_p")
        pairs = [(n, p) for n in sorted(config.n_values) for p in sorted(config.p_values)]
    if config.num_instances < 2:
        raise ConfigError("config field 'num_instances': must be >= 2 for variance experiments")

    items = [(config, n, p) for n, p in pairs]
    results = _pool_map(_variance_item, items, config.threads)

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, f"{config.experiment_kind}.csv")
    header = (
        "experiment_id", "scheme", "entangler", "topology", "hamiltonian",
        "N", "p", "a", "quantity", "count", "mean", "variance", "jackknife_stderr",
    )
    rows = []
    for per_item in results:
        for (n, p, quantity, count, mean, var, jk) in per_item:
            rows.append(
                (config.experiment_kind, config.scheme, config.entangler, config.topology,
                 config.hamiltonian, n, p, None, quantity, count, mean, var, jk)
            )
    _write_csv(path, header, rows)
    files = [path]
    files.append(_write_manifest(config, out, files))
    return files


# -------------------------------------------------------------- a_sweep

def _a_sweep_item(args):
    config, n, p = args
    rows = a_sweep(
        config.family(),
        n,
        p,
        list(config.a_values),
        config.num_instances,
        derive_seed(config.master_seed, n, p),
        _hamiltonian_for(config, n),
        config.rank_tolerance,
        config.component_index,
    )
    return [(n, p, r.a, r.mean_gc, r.var_grad, r.jackknife_stderr) for r in rows]


def run_a_sweep(config: ExperimentConfig) -> list[str]:
    _require_ranges(config, n_values="a_sweep", p_values="a_sweep", a_values="a_sweep")
    if config.num_instances < 2:
        raise ConfigError("config field 'num_instances': must be >= 2 for a_sweep")
    items = [(config, n, p) for n in sorted(config.n_values) for p in sorted(config.p_values)]
    results = _pool_map(_a_sweep_item, items, config.threads)

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "a_sweep.csv")
    header = (
        "scheme", "entangler", "topology", "hamiltonian",
        "N", "p", "a", "mean_gc", "var_grad", "jackknife_stderr",
    )
    rows = []
    for per_item in results:
        for (n, p, a, mean_gc, var_grad, jk) in per_item:
            rows.append(
                (config.scheme, config.entangler, config.topology, config.hamiltonian,
                 n, p, a, mean_gc, var_grad, jk)
            )
    _write_csv(path, header, rows)
    files = [path]
    files.append(_write_manifest(config, out, files))
    return files


# ------------------------------------------------------ gc_zero_scaling

def _gc_zero_draw(args) -> tuple[str, int, int, int]:
    """Best rank at theta = 0 over the depth scan for one structure draw.

    The scan walks the sorted depth grid and stops after GC_ZERO_STALL
    consecutive steps without growth, mirroring how the curve is read
    off: past the plateau nothing new appears.
    """
    config, entangler, n, instance = args
    family = CircuitFamily(
        scheme=RotationScheme(config.scheme),
        entangler=GateKind(entangler),
        topology=Topology(config.topology),
    )
    best, stall = 0, 0
    for p in sorted(config.p_values):
        template = family.build(n, p, derive_seed(config.master_seed, n, p, instance))
        theta = np.zeros(template.parameter_count)
        rank = effective_dimension(
            eigendecompose(compute_qfi(template, theta)), config.rank_tolerance
        )
        if rank > best:
            best, stall = rank, 0
        else:
            stall += 1
            if stall >= GC_ZERO_STALL:
                break
    return entangler, n, instance, best


def run_gc_zero_scaling(config: ExperimentConfig) -> list[str]:
    """Compare the three entangling gates at theta = 0.

    The config's entangler field is not used here: the experiment is the
    comparison across all three, on the config's scheme and topology.
    Each row is the ensemble mean over num_instances structure draws of
    the per-draw best rank over the depth scan.
    """
    _require_ranges(config, n_values="gc_zero_scaling", p_values="gc_zero_scaling")
    items = [
        (config, entangler, n, i)
        for entangler in ENTANGLERS
        for n in sorted(config.n_values)
        for i in range(config.num_instances)
    ]
    results = _pool_map(_gc_zero_draw, items, config.threads)

    sums: dict[tuple[str, int], list[int]] = {}
    for entangler, n, _, best in results:
        sums.setdefault((entangler, n), []).append(best)
    rows = [
        (entangler, n, float(np.mean(sums[(entangler, n)])))
        for entangler, n in sorted(sums)
    ]

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "gc_zero.csv")
    _write_csv(path, ("entangler", "N", "gc_zero"), rows)
    files = [path]
    files.append(_write_manifest(config, out, files))
    return files


# ----------------------------------------------------------- prune_demo

def run_prune_demo(config: ExperimentConfig) -> list[str]:
    _require_ranges(config, n_values="prune_demo", p_values="prune_demo")
    n, p = config.n_values[0], config.p_values[0]
    family = config.family()
    template = family.build(n, p, derive_seed(config.master_seed, 0))
    theta = sample_parameters(template, derive_seed(config.master_seed, 1))
    pruned, log = prune(template, theta, config.rank_tolerance)
    ok, report = verify_prune(
        template, pruned, config.dc_samples, derive_seed(config.master_seed, 2),
        config.rank_tolerance,
    )
    compaction = layer_compaction_report(pruned)

    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    csv_path = os.path.join(out, "prune_demo.csv")
    _write_csv(
        csv_path,
        ("N", "p", "initial_M", "final_M", "D_C_before", "D_C_after",
         "removed_count", "removable_layers", "iterations", "verify_ok"),
        [(n, p, log.initial_M, log.final_M, log.D_C_before, log.D_C_after,
          len(log.removed_indices), compaction.removable_layers, log.iterations, ok)],
    )
    log_path = os.path.join(out, "prune_log.json")
    with open(log_path, "w", encoding="utf-8", newline="") as fh:
        json.dump(
            {
                "log": log.to_dict(),
                "verify_ok": ok,
                "verify_report": report,
                "removable_layers": compaction.removable_layers,
                "removable_layer_indices": list(compaction.layer_indices),
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    before_path = os.path.join(out, "prune_grid_before.txt")
    with open(before_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_slot_grid(template) + "\n")
    after_path = os.path.join(out, "prune_grid_after.txt")
    with open(after_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_slot_grid(pruned) + "\n")

    files = [csv_path, log_path, before_path, after_path]
    files.append(_write_manifest(config, out, files))
    return files


# ----------------------------------------------------------- cost_table

def run_cost_table(config: ExperimentConfig) -> list[str]:
    _require_ranges(config, m_values="cost_table")
    rows = []
    for m in sorted(config.m_values):
        costs = measurement_costs(m)
        rows.append((m, costs.shift_rule_fidelities, costs.hadamard_tests, costs.pauli_measurements))
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, "costs.csv")
    _write_csv(
        path,
        ("M", "shift_rule_fidelities", "hadamard_tests", "pauli_measurements"),
        rows,
    )
    files = [path]
    files.append(_write_manifest(config, out, files))
    return files


RUNNERS = {
    "dc_vs_p": run_dc_vs_p,
    "spectrum_vs_p": run_spectrum_vs_p,
    "variance_vs_p": run_variance,
    "variance_vs_n": run_variance,
    "a_sweep": run_a_sweep,
    "gc_zero_scaling": run_gc_zero_scaling,
    "prune_demo": run_prune_demo,
    "cost_table": run_cost_table,
}


def run_experiment(config: ExperimentConfig) -> list[str]:
    """Dispatch on experiment_kind; returns the list of files written."""
    runner = RUNNERS.get(config.experiment_kind)
    if runner is None:
        raise ConfigError(f"config field 'experiment_kind': unknown kind {config.experiment_kind!r}")
    return runner(config)
