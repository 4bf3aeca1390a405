"""Config-driven experiment pipelines with reproducible batch outputs.

One scenario per invocation: parse a strict key-value config, derive all
randomness from the root seed through named substreams, run the pipeline,
and write machine-readable artifacts atomically (temp file + rename).
Identical config and seed give byte-identical numerical outputs; the
manifest additionally records wall time and content digests.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from . import __version__
from .born import compare_frequencies, sample_ontic_frequencies
from .decoherence import (
    BranchWeights,
    EnvironmentEnsemble,
    closed_form_ensemble_density,
    ensemble_density,
    phase_average_suppression,
    reduced_system_density,
    sample_entangled_basis,
)
from .flow import FlowField, GaussianPacket, PeriodicGrid, ehrenfest_check
from .hilbert import (
    delta_state,
    hamiltonian_from_permutation,
    reconstruct_unitary,
    schrodinger_evolve,
    unitary_from_permutation,
)
from .ontic import OutcomeLabeling, PermutationMap
from .seeding import substream

__all__ = [
    "ConfigError",
    "ScenarioRuntimeError",
    "ScenarioConfig",
    "CheckResult",
    "FileRecord",
    "RunManifest",
    "SCENARIO_KINDS",
    "validate_config",
    "load_config_file",
    "run_scenario",
]

SCENARIO_KINDS = ("cat", "born", "flow", "spectrum", "suppression-sweep")

MAX_SEED = 2**64 - 1


class ConfigError(ValueError):
    """Invalid scenario configuration; carries the full list of violations."""

    def __init__(self, errors: list[str]):
        super().__init__("; ".join(errors))
        self.errors = list(errors)


class ScenarioRuntimeError(RuntimeError):
    """A pipeline failed after the configuration was accepted."""


# --------------------------------------------------------------------------
# Configuration schema
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class CatParams:
    env_size: int = 16
    p_live: float = 0.6
    phases: str = "uniform-grid"  # uniform-grid | random


@dataclass(frozen=True)
class BornParams:
    num_states: int = 100_000
    num_samples: int = 1_000_000
    horizon: int = 1000
    live_fraction: float = 0.6
    exhaustive: bool = False
    labeling_path: str | None = None


@dataclass(frozen=True)
class FlowParams:
    grid_points: int = 256
    domain_length: float = 1.0
    flow_kind: str = "offset-sin"  # offset-sin | constant | csv
    flow_offset: float = 0.3
    flow_amplitude: float = 0.1
    flow_value: float = 0.3
    flow_path: str | None = None
    sigma_cells: float = 8.0
    center_fraction: float = 0.0
    horizon: float | None = None  # default: quarter-domain traversal time
    steps: int = 128
    derivative: str = "spectral"  # spectral | central
    max_deviation_bound: float | None = None


@dataclass(frozen=True)
class SpectrumParams:
    permutation: str = "random"  # random | identity | file
    size: int = 64
    path: str | None = None
    export_start: int | None = None
    export_time: float = 1.0


@dataclass(frozen=True)
class SweepParams:
    env_sizes: tuple[int, ...] = (100, 1000, 10_000, 100_000)
    seeds_per_size: int = 200


@dataclass(frozen=True)
class ScenarioConfig:
    kind: str
    seed: int
    out_dir: str
    format: str
    threads: int | None
    self_check: bool
    params: Any

    def echo(self) -> dict:
        """Canonical dictionary form, as recorded in the manifest."""
        section: dict[str, Any] = {}
        for key, value in vars(self.params).items():
            if isinstance(value, tuple):
                value = list(value)
            section[key] = value
        return {
            "scenario": self.kind,
            "seed": self.seed,
            "out": self.out_dir,
            "format": self.format,
            "threads": self.threads,
            "self_check": self.self_check,
            self.kind: section,
        }


def _check_int(raw, name, errors, lo=None, hi=None):
    if isinstance(raw, bool) or not isinstance(raw, int):
        errors.append(f"{name}: expected an integer, got {raw!r}")
        return None
    if lo is not None and raw < lo:
        errors.append(f"{name}: must be >= {lo}, got {raw}")
        return None
    if hi is not None and raw > hi:
        errors.append(f"{name}: must be <= {hi}, got {raw}")
        return None
    return int(raw)


def _check_float(raw, name, errors, lo=None, hi=None, positive=False):
    if isinstance(raw, bool) or not isinstance(raw, (int, float)):
        errors.append(f"{name}: expected a number, got {raw!r}")
        return None
    value = float(raw)
    if positive and not value > 0.0:
        errors.append(f"{name}: must be > 0, got {value}")
        return None
    if lo is not None and value < lo:
        errors.append(f"{name}: must be >= {lo}, got {value}")
        return None
    if hi is not None and value > hi:
        errors.append(f"{name}: must be in [{lo}, {hi}], got {value}" if lo is not None
                      else f"{name}: must be <= {hi}, got {value}")
        return None
    return value


def _check_choice(raw, name, errors, choices):
    if raw not in choices:
        errors.append(f"{name}: expected one of {sorted(choices)}, got {raw!r}")
        return None
    return raw


def _check_bool(raw, name, errors):
    if not isinstance(raw, bool):
        errors.append(f"{name}: expected true/false, got {raw!r}")
        return None
    return raw


def _check_str(raw, name, errors):
    if not isinstance(raw, str) or not raw:
        errors.append(f"{name}: expected a non-empty string, got {raw!r}")
        return None
    return raw


def _section(raw: Mapping, kind: str, errors: list[str]) -> dict:
    section = raw.get(kind, {})
    if section is None:
        section = {}
    if not isinstance(section, Mapping):
        errors.append(f"{kind}: expected a mapping of parameters")
        return {}
    return dict(section)


def _reject_unknown(section: dict, prefix: str, known: set[str], errors: list[str]) -> None:
    for key in sorted(set(section) - known):
        errors.append(f"{prefix}{key}: unknown key")


def _validate_cat(raw, errors) -> CatParams:
    known = {"env_size", "p_live", "phases"}
    _reject_unknown(raw, "cat.", known, errors)
    d = CatParams()
    env_size = _check_int(raw.get("env_size", d.env_size), "cat.env_size", errors, lo=1)
    p_live = _check_float(raw.get("p_live", d.p_live), "cat.p_live", errors, lo=0.0, hi=1.0)
    phases = _check_choice(
        raw.get("phases", d.phases), "cat.phases", errors, {"uniform-grid", "random"}
    )
    if errors:
        return d
    return CatParams(env_size=env_size, p_live=p_live, phases=phases)


def _validate_born(raw, errors) -> BornParams:
    known = {"num_states", "num_samples", "horizon", "live_fraction", "exhaustive", "labeling_path"}
    _reject_unknown(raw, "born.", known, errors)
    d = BornParams()
    num_states = _check_int(raw.get("num_states", d.num_states), "born.num_states", errors, lo=1)
    num_samples = _check_int(
        raw.get("num_samples", d.num_samples), "born.num_samples", errors, lo=1
    )
    horizon = _check_int(raw.get("horizon", d.horizon), "born.horizon", errors, lo=0)
    live_fraction = _check_float(
        raw.get("live_fraction", d.live_fraction), "born.live_fraction", errors, lo=0.0, hi=1.0
    )
    exhaustive = _check_bool(raw.get("exhaustive", d.exhaustive), "born.exhaustive", errors)
    labeling_path = raw.get("labeling_path", d.labeling_path)
    if labeling_path is not None:
        labeling_path = _check_str(labeling_path, "born.labeling_path", errors)
    if errors:
        return d
    return BornParams(
        num_states=num_states,
        num_samples=num_samples,
        horizon=horizon,
        live_fraction=live_fraction,
        exhaustive=exhaustive,
        labeling_path=labeling_path,
    )


def _validate_flow(raw, errors) -> FlowParams:
    known = {
        "grid_points", "domain_length", "flow", "sigma_cells", "center_fraction",
        "horizon", "steps", "derivative", "max_deviation_bound",
    }
    _reject_unknown(raw, "flow.", known, errors)
    d = FlowParams()
    grid_points = _check_int(raw.get("grid_points", d.grid_points), "flow.grid_points", errors, lo=8)
    domain_length = _check_float(
        raw.get("domain_length", d.domain_length), "flow.domain_length", errors, positive=True
    )
    sigma_cells = _check_float(
        raw.get("sigma_cells", d.sigma_cells), "flow.sigma_cells", errors, lo=2.0
    )
    center_fraction = _check_float(
        raw.get("center_fraction", d.center_fraction), "flow.center_fraction", errors, lo=0.0, hi=1.0
    )
    steps = _check_int(raw.get("steps", d.steps), "flow.steps", errors, lo=1)
    derivative = _check_choice(
        raw.get("derivative", d.derivative), "flow.derivative", errors, {"spectral", "central"}
    )
    horizon = raw.get("horizon", d.horizon)
    if horizon is not None:
        horizon = _check_float(horizon, "flow.horizon", errors, positive=True)
    bound = raw.get("max_deviation_bound", d.max_deviation_bound)
    if bound is not None:
        bound = _check_float(bound, "flow.max_deviation_bound", errors, positive=True)

    flow_kind, flow_offset, flow_amplitude = d.flow_kind, d.flow_offset, d.flow_amplitude
    flow_value, flow_path = d.flow_value, d.flow_path
    flow_raw = raw.get("flow")
    if flow_raw is not None:
        if not isinstance(flow_raw, Mapping):
            errors.append("flow.flow: expected a mapping with a 'kind' key")
        else:
            flow_raw = dict(flow_raw)
            flow_kind = _check_choice(
                flow_raw.pop("kind", None), "flow.flow.kind", errors,
                {"offset-sin", "constant", "csv"},
            )
            if flow_kind == "offset-sin":
                _reject_unknown(flow_raw, "flow.flow.", {"offset", "amplitude"}, errors)
                flow_offset = _check_float(flow_raw.get("offset", d.flow_offset),
                                           "flow.flow.offset", errors)
                flow_amplitude = _check_float(flow_raw.get("amplitude", d.flow_amplitude),
                                              "flow.flow.amplitude", errors)
            elif flow_kind == "constant":
                _reject_unknown(flow_raw, "flow.flow.", {"value"}, errors)
                flow_value = _check_float(flow_raw.get("value", d.flow_value),
                                          "flow.flow.value", errors)
            elif flow_kind == "csv":
                _reject_unknown(flow_raw, "flow.flow.", {"path"}, errors)
                flow_path = _check_str(flow_raw.get("path"), "flow.flow.path", errors)
    if errors:
        return d
    return FlowParams(
        grid_points=grid_points,
        domain_length=domain_length,
        flow_kind=flow_kind,
        flow_offset=flow_offset,
        flow_amplitude=flow_amplitude,
        flow_value=flow_value,
        flow_path=flow_path,
        sigma_cells=sigma_cells,
        center_fraction=center_fraction,
        horizon=horizon,
        steps=steps,
        derivative=derivative,
        max_deviation_bound=bound,
    )


def _validate_spectrum(raw, errors) -> SpectrumParams:
    known = {"permutation", "size", "path", "export_start", "export_time"}
    _reject_unknown(raw, "spectrum.", known, errors)
    d = SpectrumParams()
    permutation = _check_choice(
        raw.get("permutation", d.permutation), "spectrum.permutation", errors,
        {"random", "identity", "file"},
    )
    size = _check_int(raw.get("size", d.size), "spectrum.size", errors, lo=1)
    path = raw.get("path", d.path)
    if permutation == "file":
        path = _check_str(path, "spectrum.path", errors)
    export_start = raw.get("export_start", d.export_start)
    if export_start is not None:
        export_start = _check_int(export_start, "spectrum.export_start", errors, lo=0)
    export_time = _check_float(
        raw.get("export_time", d.export_time), "spectrum.export_time", errors
    )
    if errors:
        return d
    return SpectrumParams(
        permutation=permutation,
        size=size,
        path=path,
        export_start=export_start,
        export_time=export_time,
    )


def _validate_sweep(raw, errors) -> SweepParams:
    known = {"env_sizes", "seeds_per_size"}
    _reject_unknown(raw, "suppression-sweep.", known, errors)
    d = SweepParams()
    sizes_raw = raw.get("env_sizes", list(d.env_sizes))
    sizes: tuple[int, ...] = d.env_sizes
    if not isinstance(sizes_raw, (list, tuple)) or not sizes_raw:
        errors.append("suppression-sweep.env_sizes: expected a non-empty list of integers")
    else:
        checked = [
            _check_int(x, f"suppression-sweep.env_sizes[{i}]", errors, lo=1)
            for i, x in enumerate(sizes_raw)
        ]
        if all(x is not None for x in checked):
            sizes = tuple(checked)
    seeds_per_size = _check_int(
        raw.get("seeds_per_size", d.seeds_per_size), "suppression-sweep.seeds_per_size",
        errors, lo=1,
    )
    if errors:
        return d
    return SweepParams(env_sizes=sizes, seeds_per_size=seeds_per_size)


_SECTION_VALIDATORS = {
    "cat": _validate_cat,
    "born": _validate_born,
    "flow": _validate_flow,
    "spectrum": _validate_spectrum,
    "suppression-sweep": _validate_sweep,
}


def load_config_file(path: str | Path) -> Any:
    """Read a config file; YAML (JSON is a subset)."""
    text = Path(path).read_text(encoding="utf-8")
    return parse_config_text(text)


def parse_config_text(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError([f"config is not valid YAML: {exc}"]) from exc


def validate_config(
    raw: Any,
    seed_override: int | None = None,
    out_override: str | None = None,
    format_override: str | None = None,
    threads_override: int | None = None,
) -> ScenarioConfig:
    """Parse and validate a raw configuration (text or mapping).

    Collects every violation instead of stopping at the first; raises
    ConfigError carrying the full list. Unknown keys are rejected at all
    levels, and a seed is mandatory (no wall-clock seeding).
    """
    if isinstance(raw, str):
        raw = parse_config_text(raw)
    if raw is None:
        raw = {}
    errors: list[str] = []
    if not isinstance(raw, Mapping):
        raise ConfigError(["config root must be a mapping of keys to values"])
    raw = dict(raw)

    kind = _check_choice(raw.get("scenario"), "scenario", errors, set(SCENARIO_KINDS))

    top_known = {"scenario", "seed", "out", "format", "threads", "self_check"}
    if kind is not None:
        top_known = top_known | {kind}
    _reject_unknown(raw, "", top_known, errors)

    if seed_override is not None:
        seed = _check_int(seed_override, "seed", errors, lo=0, hi=MAX_SEED)
    elif "seed" in raw:
        seed = _check_int(raw["seed"], "seed", errors, lo=0, hi=MAX_SEED)
    else:
        errors.append("seed: required (wall-clock seeding is not supported)")
        seed = None

    out_dir = out_override if out_override is not None else raw.get("out", "out")
    out_dir = _check_str(out_dir, "out", errors)

    fmt = format_override if format_override is not None else raw.get("format", "csv")
    fmt = _check_choice(fmt, "format", errors, {"csv", "json"})

    threads = threads_override if threads_override is not None else raw.get("threads")
    if threads is not None:
        threads = _check_int(threads, "threads", errors, lo=1)

    self_check = _check_bool(raw.get("self_check", False), "self_check", errors)

    params = None
    if kind is not None:
        section = _section(raw, kind, errors)
        params = _SECTION_VALIDATORS[kind](section, errors)

    if errors:
        raise ConfigError(errors)
    return ScenarioConfig(
        kind=kind,
        seed=seed,
        out_dir=out_dir,
        format=fmt,
        threads=threads,
        self_check=self_check,
        params=params,
    )


# --------------------------------------------------------------------------
# Rendering and atomic output
# --------------------------------------------------------------------------

def _fmt_number(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def render_csv(header: list[str], rows: list[tuple]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([x if isinstance(x, str) else _fmt_number(x) for x in row])
    return buf.getvalue()


def render_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass(frozen=True)
class FileRecord:
    name: str
    sha256: str
    bytes: int

    def to_dict(self) -> dict:
        return {"name": self.name, "sha256": self.sha256, "bytes": self.bytes}


@dataclass(frozen=True)
class RunManifest:
    config: dict
    version: str
    files: tuple[FileRecord, ...]
    checks: tuple[CheckResult, ...]
    wall_time_s: float

    @property
    def all_checks_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "version": self.version,
            "files": [f.to_dict() for f in self.files],
            "checks": [c.to_dict() for c in self.checks],
            "wall_time_s": self.wall_time_s,
        }


def _probe_writable(out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    probe = out_dir / ".write-probe.tmp"
    with open(probe, "wb") as fh:
        fh.write(b"ok")
    probe.unlink()


def _commit_outputs(out_dir: Path, artifacts: dict[str, str]) -> list[FileRecord]:
    """Write artifacts atomically: temp file in the same directory, then
    rename. A failure leaves no non-temp files behind."""
    records: list[FileRecord] = []
    temps: list[Path] = []
    try:
        staged: list[tuple[Path, Path, bytes]] = []
        for name, text in artifacts.items():
            data = text.encode("utf-8")
            final = out_dir / name
            tmp = out_dir / (name + ".tmp")
            with open(tmp, "wb") as fh:
                fh.write(data)
            temps.append(tmp)
            staged.append((tmp, final, data))
        for tmp, final, data in staged:
            os.replace(tmp, final)
            records.append(
                FileRecord(
                    name=final.name,
                    sha256=hashlib.sha256(data).hexdigest(),
                    bytes=len(data),
                )
            )
    finally:
        for tmp in temps:
            if tmp.exists():
                tmp.unlink()
    return records


# --------------------------------------------------------------------------
# Pipelines
# --------------------------------------------------------------------------

def _density_csv(matrix: np.ndarray) -> str:
    rows = [
        (i, j, matrix[i, j].real, matrix[i, j].imag)
        for i in range(matrix.shape[0])
        for j in range(matrix.shape[1])
    ]
    return render_csv(["row", "col", "re", "im"], rows)


def _run_cat(cfg: ScenarioConfig) -> tuple[dict[str, str], list[CheckResult]]:
    p: CatParams = cfg.params
    weights = BranchWeights(p.p_live)
    if p.phases == "uniform-grid":
        env = EnvironmentEnsemble.uniform_grid(p.env_size)
    else:
        env = EnvironmentEnsemble.random_uniform(p.env_size, substream(cfg.seed, "phases"))
    basis = sample_entangled_basis(p.env_size, substream(cfg.seed, "basis"))
    rho = ensemble_density(basis, env, weights)
    closed = closed_form_ensemble_density(env, weights)
    identity_residual = float(np.max(np.abs(rho.matrix - closed.matrix)))
    reduced = reduced_system_density(rho)
    stat = phase_average_suppression(env)

    artifacts = {
        "density.csv": _density_csv(rho.matrix),
        "reduced.csv": _density_csv(reduced),
        "report.json": render_json(
            {
                "scenario": "cat",
                "env_size": p.env_size,
                "p_live": p.p_live,
                "phases": p.phases,
                "seed": cfg.seed,
                "block_identity_residual": identity_residual,
                "suppression_magnitude": stat.magnitude,
                "reduced_offdiagonal_magnitude": float(abs(reduced[0, 1])),
            }
        ),
    }
    checks = [
        CheckResult(
            "block-identity",
            identity_residual <= 1e-10,
            f"averaged mixture vs closed form: residual {identity_residual:.3e}",
        )
    ]
    if p.phases == "uniform-grid":
        target = np.diag([weights.p_live, weights.p_dead]).astype(complex)
        err = float(np.max(np.abs(reduced - target)))
        checks.append(
            CheckResult(
                "reduced-diagonal",
                err <= 1e-10,
                f"reduced density vs diag({weights.p_live}, {weights.p_dead}): "
                f"max error {err:.3e}",
            )
        )
    return artifacts, checks


def _load_labeling(path: str, expected_size: int) -> OutcomeLabeling:
    with open(path, "r", encoding="utf-8") as fh:
        labels = json.load(fh)
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise ScenarioRuntimeError(f"{path}: expected a JSON array of label strings")
    if len(labels) != expected_size:
        raise ScenarioRuntimeError(
            f"{path}: {len(labels)} labels for {expected_size} states"
        )
    return OutcomeLabeling.from_labels(labels)


def _run_born(cfg: ScenarioConfig) -> tuple[dict[str, str], list[CheckResult]]:
    p: BornParams = cfg.params
    perm = PermutationMap.random(p.num_states, substream(cfg.seed, "permutation"))
    if p.labeling_path is not None:
        labeling = _load_labeling(p.labeling_path, p.num_states)
    else:
        labeling = OutcomeLabeling.two_class(
            p.num_states, p.live_fraction, rng=substream(cfg.seed, "labeling")
        )
    report = sample_ontic_frequencies(
        perm,
        labeling,
        horizon=p.horizon,
        samples=p.num_samples,
        seed=substream(cfg.seed, "sampling"),
        exhaustive=p.exhaustive,
    )
    predicted = labeling.class_counts / labeling.size
    comparison = compare_frequencies(report, predicted)
    report = report.with_z_scores(comparison.z_scores)

    payload = report.to_dict()
    payload["seed"] = cfg.seed
    payload["predicted"] = [float(x) for x in predicted]
    payload["flagged"] = [bool(x) for x in comparison.flagged]
    payload["hard_failure"] = comparison.hard_failure
    artifacts = {"report.json": render_json(payload)}
    if cfg.format == "csv":
        rows = [
            (label, int(c), float(f), float(s), float(z))
            for label, c, f, s, z in zip(
                report.labels,
                report.counts,
                report.frequencies,
                report.std_errors,
                report.z_scores,
            )
        ]
        artifacts["summary.csv"] = render_csv(
            ["label", "count", "frequency", "std_error", "z_score"], rows
        )

    if p.exhaustive:
        exact = bool(np.array_equal(report.frequencies, predicted))
        checks = [
            CheckResult(
                "exhaustive-abundance",
                exact,
                "exhaustive frequencies equal destiny class fractions exactly"
                if exact
                else "exhaustive frequencies deviate from class fractions",
            )
        ]
    else:
        checks = [
            CheckResult(
                "sampling-z-scores",
                comparison.passed,
                f"max |z| = {float(np.max(np.abs(comparison.z_scores))):.3f} "
                f"against threshold 4",
            )
        ]
    return artifacts, checks


def _load_flow_table(path: str, grid: PeriodicGrid) -> FlowField:
    xs: list[float] = []
    fs: list[float] = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.reader(fh):
            if not row:
                continue
            try:
                x, f = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                continue  # header or malformed line
            xs.append(x)
            fs.append(f)
    if len(xs) < 2:
        raise ScenarioRuntimeError(f"{path}: needs at least two numeric (x, f) rows")
    return FlowField.from_table(xs, fs, grid)


def _run_flow(cfg: ScenarioConfig) -> tuple[dict[str, str], list[CheckResult]]:
    p: FlowParams = cfg.params
    grid = PeriodicGrid(p.grid_points, p.domain_length)
    if p.flow_kind == "constant":
        flow = FlowField.constant(p.flow_value, grid)
    elif p.flow_kind == "offset-sin":
        length = p.domain_length
        flow = FlowField.from_function(
            lambda x: p.flow_offset + p.flow_amplitude * np.sin(2.0 * np.pi * x / length),
            grid,
        )
    else:
        flow = _load_flow_table(p.flow_path, grid)

    horizon = p.horizon
    if horizon is None:
        mean_speed = float(np.mean(np.abs(flow.values)))
        if mean_speed == 0.0:
            raise ScenarioRuntimeError(
                "flow.horizon is required for a flow with zero mean speed"
            )
        horizon = 0.25 * p.domain_length / mean_speed

    packet = GaussianPacket(p.center_fraction * p.domain_length, p.sigma_cells * grid.spacing)
    report = ehrenfest_check(packet, flow, grid, horizon, p.steps, derivative=p.derivative)

    bound = p.max_deviation_bound
    if bound is None:
        bound = 0.02 * p.domain_length
    artifacts = {
        "trajectory.csv": render_csv(
            ["t", "expectation", "classical"],
            [(t, q, c) for t, q, c in report.trajectory_pairs],
        ),
        "report.json": render_json(
            {
                "scenario": "flow",
                "grid_points": p.grid_points,
                "domain_length": p.domain_length,
                "derivative": p.derivative,
                "sigma": packet.width,
                "center": packet.center,
                "horizon": horizon,
                "steps": p.steps,
                "seed": cfg.seed,
                "max_deviation": report.max_deviation,
                "deviation_bound": bound,
            }
        ),
    }
    if cfg.format == "csv":
        rows = [(t, q, "expectation") for t, q, _ in report.trajectory_pairs]
        rows += [(t, c, "classical") for t, _, c in report.trajectory_pairs]
        artifacts["plot_data.csv"] = render_csv(["x", "y", "series"], rows)
    checks = [
        CheckResult(
            "ehrenfest-tracking",
            report.max_deviation <= bound,
            f"max deviation {report.max_deviation:.3e} against bound {bound:.3e}",
        )
    ]
    return artifacts, checks


def _run_spectrum(cfg: ScenarioConfig) -> tuple[dict[str, str], list[CheckResult]]:
    p: SpectrumParams = cfg.params
    if p.permutation == "identity":
        perm = PermutationMap.identity(p.size)
    elif p.permutation == "random":
        perm = PermutationMap.random(p.size, substream(cfg.seed, "permutation"))
    else:
        with open(p.path, "r", encoding="utf-8") as fh:
            targets = json.load(fh)
        if not isinstance(targets, list):
            raise ScenarioRuntimeError(f"{p.path}: expected a JSON array of integers")
        perm = PermutationMap(np.asarray(targets))

    spectrum = hamiltonian_from_permutation(perm)
    unitary = unitary_from_permutation(perm)
    residual = float(
        np.max(np.abs(reconstruct_unitary(spectrum) - unitary.to_dense()))
    )
    artifacts = {
        "spectrum.csv": render_csv(
            ["index", "eigenphase"],
            [(i, float(theta)) for i, theta in enumerate(spectrum.eigenphases)],
        ),
        "report.json": render_json(
            {
                "scenario": "spectrum",
                "size": perm.size,
                "source": p.permutation,
                "seed": cfg.seed,
                "cycle_lengths": sorted(int(c.size) for c in perm.cycles),
                "roundtrip_residual": residual,
            }
        ),
    }
    if p.export_start is not None:
        psi = schrodinger_evolve(
            delta_state(p.export_start, perm.size), spectrum, p.export_time
        )
        artifacts["state.csv"] = render_csv(
            ["index", "re", "im"],
            [(i, a.real, a.imag) for i, a in enumerate(psi.amplitudes)],
        )
    checks = [
        CheckResult(
            "unitary-roundtrip",
            residual <= 1e-10,
            f"exp(-iH) vs permutation unitary: residual {residual:.3e}",
        )
    ]
    return artifacts, checks


def _run_sweep(cfg: ScenarioConfig) -> tuple[dict[str, str], list[CheckResult]]:
    p: SweepParams = cfg.params
    rows: list[tuple] = []
    medians: list[float] = []
    stream_index = 0
    for n in p.env_sizes:
        magnitudes = np.empty(p.seeds_per_size)
        for trial in range(p.seeds_per_size):
            env = EnvironmentEnsemble.random_uniform(
                n, substream(cfg.seed, "phases", index=stream_index)
            )
            stat = phase_average_suppression(env)
            magnitudes[trial] = stat.magnitude
            rows.append((int(n), trial, stat.magnitude))
            stream_index += 1
        medians.append(float(np.median(magnitudes)))

    if len(p.env_sizes) >= 2:
        slope = float(
            np.polyfit(np.log(np.asarray(p.env_sizes, float)), np.log(medians), 1)[0]
        )
    else:
        slope = float("nan")
    artifacts = {
        "sweep.csv": render_csv(["N", "seed", "magnitude"], rows),
        "report.json": render_json(
            {
                "scenario": "suppression-sweep",
                "env_sizes": list(p.env_sizes),
                "seeds_per_size": p.seeds_per_size,
                "seed": cfg.seed,
                "median_magnitudes": medians,
                "loglog_slope": slope,
            }
        ),
    }
    if cfg.format == "csv":
        plot = [(int(n), m, "median-magnitude") for n, m in zip(p.env_sizes, medians)]
        artifacts["plot_data.csv"] = render_csv(["x", "y", "series"], plot)
    checks = [
        CheckResult(
            "suppression-scaling",
            bool(len(p.env_sizes) >= 2 and -0.6 <= slope <= -0.4),
            f"log-log slope {slope:.4f} against [-0.6, -0.4]",
        )
    ]
    return artifacts, checks


_PIPELINES = {
    "cat": _run_cat,
    "born": _run_born,
    "flow": _run_flow,
    "spectrum": _run_spectrum,
    "suppression-sweep": _run_sweep,
}


def run_scenario(cfg: ScenarioConfig) -> RunManifest:
    """Run one validated scenario and write its artifacts.

    The output directory is probed for writability before any computation
    starts; outputs are committed atomically at the end, so a failed run
    leaves no non-temp files behind. Identical config and seed produce
    byte-identical data files (the manifest additionally records wall
    time, which varies run to run).
    """
    out_dir = Path(cfg.out_dir)
    _probe_writable(out_dir)
    started = time.perf_counter()
    artifacts, checks = _PIPELINES[cfg.kind](cfg)
    records = _commit_outputs(out_dir, artifacts)
    manifest = RunManifest(
        config=cfg.echo(),
        version=__version__,
        files=tuple(records),
        checks=tuple(checks),
        wall_time_s=time.perf_counter() - started,
    )
    _commit_outputs(out_dir, {"manifest.json": render_json(manifest.to_dict())})
    return manifest
