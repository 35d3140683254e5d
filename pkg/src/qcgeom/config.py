"""Experiment configuration: a flat JSON schema with strict validation.

Configs are plain JSON objects.  Unknown keys are rejected and every
value is checked against its field rule, with the offending field named
in the error.  JSON syntax errors keep the parser's line/column info.
The canonical form (sorted keys, defaults filled in) is what gets
hashed into the run manifest, so two configs that mean the same thing
hash the same.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, fields
from typing import Any

from .circuits import CircuitFamily, RotationScheme, Topology
from .errors import ConfigError
from .statevector import MAX_QUBITS, GateKind

EXPERIMENT_KINDS = (
    "dc_vs_p",
    "spectrum_vs_p",
    "variance_vs_p",
    "variance_vs_n",
    "a_sweep",
    "gc_zero_scaling",
    "prune_demo",
    "cost_table",
)

SCHEMES = tuple(s.value for s in RotationScheme)
ENTANGLERS = ("cnot", "cphase", "sqrt_iswap")
TOPOLOGIES = tuple(t.value for t in Topology)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment_kind: str
    scheme: str = "rand_xyz"
    entangler: str = "cnot"
    topology: str = "chain"
    n_values: tuple = ()
    p_values: tuple = ()
    a_values: tuple = ()
    m_values: tuple = ()  # cost_table only
    hamiltonian: str = "zz"
    num_instances: int = 100
    master_seed: int = 0
    rank_tolerance: float = 1e-10
    output_dir: str = "out"
    component_index: int = 0
    dc_samples: int = 5
    num_bins: int = 40
    qng_max_parameters: int = 400
    threads: int = 1

    def family(self) -> CircuitFamily:
        return CircuitFamily(
            scheme=RotationScheme(self.scheme),
            entangler=GateKind(self.entangler),
            topology=Topology(self.topology),
        )

    def to_canonical_dict(self) -> dict:
        d = {}
        for f in fields(self):
            v = getattr(self, f.name)
            d[f.name] = list(v) if isinstance(v, tuple) else v
        return {k: d[k] for k in sorted(d)}

    def config_hash(self) -> str:
        payload = json.dumps(self.to_canonical_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode()).hexdigest()


def _require_int(name: str, v: Any, lo: int | None = None, hi: int | None = None) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"config field '{name}': expected an integer, got {v!r}")
    if lo is not None and v < lo:
        raise ConfigError(f"config field '{name}': must be >= {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(f"config field '{name}': must be <= {hi}, got {v}")
    return v


def _require_number(name: str, v: Any) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"config field '{name}': expected a number, got {v!r}")
    return float(v)


def _require_str_choice(name: str, v: Any, choices: tuple) -> str:
    if not isinstance(v, str):
        raise ConfigError(f"config field '{name}': expected a string, got {v!r}")
    if v not in choices:
        raise ConfigError(
            f"config field '{name}': {v!r} is not one of {', '.join(choices)}"
        )
    return v


def _require_list(name: str, v: Any) -> list:
    if not isinstance(v, list):
        raise ConfigError(f"config field '{name}': expected a list, got {v!r}")
    return v


def config_from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError(f"config: expected a JSON object, got {type(raw).__name__}")
    known = {f.name for f in fields(ExperimentConfig)}
    for key in raw:
        if key not in known:
            raise ConfigError(f"config: unknown field '{key}'")
    if "experiment_kind" not in raw:
        raise ConfigError("config field 'experiment_kind': required")

    out: dict[str, Any] = {}
    out["experiment_kind"] = _require_str_choice(
        "experiment_kind", raw["experiment_kind"], EXPERIMENT_KINDS
    )
    if "scheme" in raw:
        out["scheme"] = _require_str_choice("scheme", raw["scheme"], SCHEMES)
    if "entangler" in raw:
        out["entangler"] = _require_str_choice("entangler", raw["entangler"], ENTANGLERS)
    if "topology" in raw:
        out["topology"] = _require_str_choice("topology", raw["topology"], TOPOLOGIES)

    if "n_values" in raw:
        vals = _require_list("n_values", raw["n_values"])
        out["n_values"] = tuple(
            _require_int(f"n_values[{i}]", v, 1, MAX_QUBITS) for i, v in enumerate(vals)
        )
    if "p_values" in raw:
        vals = _require_list("p_values", raw["p_values"])
        out["p_values"] = tuple(
            _require_int(f"p_values[{i}]", v, 1) for i, v in enumerate(vals)
        )
    if "a_values" in raw:
        vals = _require_list("a_values", raw["a_values"])
        parsed = []
        for i, v in enumerate(vals):
            x = _require_number(f"a_values[{i}]", v)
            if not 0.0 < x <= 1.0:
                raise ConfigError(f"config field 'a_values[{i}]': must lie in (0, 1], got {x}")
            parsed.append(x)
        out["a_values"] = tuple(parsed)
    if "m_values" in raw:
        vals = _require_list("m_values", raw["m_values"])
        out["m_values"] = tuple(
            _require_int(f"m_values[{i}]", v, 1) for i, v in enumerate(vals)
        )

    if "hamiltonian" in raw:
        out["hamiltonian"] = _require_str_choice("hamiltonian", raw["hamiltonian"], ("zz", "ising"))
    if "num_instances" in raw:
        out["num_instances"] = _require_int("num_instances", raw["num_instances"], 1)
    if "master_seed" in raw:
        out["master_seed"] = _require_int("master_seed", raw["master_seed"], 0, 2**64 - 1)
    if "rank_tolerance" in raw:
        tol = _require_number("rank_tolerance", raw["rank_tolerance"])
        if not 0.0 < tol < 1.0:
            raise ConfigError(f"config field 'rank_tolerance': must lie in (0, 1), got {tol}")
        out["rank_tolerance"] = tol
    if "output_dir" in raw:
        if not isinstance(raw["output_dir"], str) or not raw["output_dir"]:
            raise ConfigError(
                f"config field 'output_dir': expected a non-empty string, got {raw['output_dir']!r}"
            )
        out["output_dir"] = raw["output_dir"]
    if "component_index" in raw:
        out["component_index"] = _require_int("component_index", raw["component_index"], 0)
    if "dc_samples" in raw:
        out["dc_samples"] = _require_int("dc_samples", raw["dc_samples"], 1)
    if "num_bins" in raw:
        out["num_bins"] = _require_int("num_bins", raw["num_bins"], 2)
    if "qng_max_parameters" in raw:
        out["qng_max_parameters"] = _require_int("qng_max_parameters", raw["qng_max_parameters"], 1)
    if "threads" in raw:
        out["threads"] = _require_int("threads", raw["threads"], 1)

    return ExperimentConfig(**out)


def config_from_json(text: str) -> ExperimentConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config: invalid JSON at line {err.lineno} column {err.colno}: {err.msg}") from err
    return config_from_dict(raw)


def config_from_file(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"config: cannot read {path}: {err.strerror}") from err
    return config_from_json(text)
