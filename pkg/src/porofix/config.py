"""JSON scenario configuration: parsing, validation, and resolution.

Validation errors always name the offending field with its dotted path
(for example ``physics.lambda``) so configuration mistakes are easy to
locate.  ``resolved()`` returns the fully resolved dictionary that goes
into run manifests, with "auto" values replaced by the numbers actually
used.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .assembly import PhysParams, SipConfig, default_delta0
from .solvers import SplitConfig, auto_stabilization

SOURCE_PRESETS = ("zero", "constant_f", "mms_flow", "mms_coupled", "locking_load")
STUDY_TYPES = ("none", "l_sweep", "h_refine", "t_refine", "locking")
MODES = ("split", "monolithic", "both")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


def _get(d: dict, key: str, path: str, default=None, required: bool = False):
    if key not in d:
        if required:
            raise ConfigError(f"{path}.{key} is required")
        return default
    return d[key]


def _number(value, path: str, *, positive=False, nonnegative=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path} must be a number")
    v = float(value)
    if positive and not v > 0:
        raise ConfigError(f"{path} must be positive")
    if nonnegative and v < 0:
        raise ConfigError(f"{path} must be nonnegative")
    return v


def _integer(value, path: str, *, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path} must be an integer")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{path} must be at least {minimum}")
    return value


def _choice(value, path: str, options) -> str:
    if value not in options:
        raise ConfigError(f"{path} must be one of {', '.join(options)}")
    return value


def _boolean(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigError(f"{path} must be a boolean")
    return value


@dataclass
class ScenarioConfig:
    """Fully validated scenario: discretization, physics, solver, study."""

    nx: int
    ny: int
    Lx: float
    Ly: float
    s: int
    r: int
    physics: PhysParams
    delta0: float
    beta_exp: float
    L: float
    tol: float
    max_iter: int
    warm_start: bool
    cold_start_diagnostics: bool
    T: float
    N: int
    preset: str
    mode: str
    study: str
    study_values: list[float] | None
    study_levels: int | None
    study_time_factor: int | None
    study_lambda_values: list[float] | None
    out_directory: str | None
    write_vtk: bool
    write_csv: bool
    write_figures: bool
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def sip(self) -> SipConfig:
        return SipConfig(delta0=self.delta0, beta_exp=self.beta_exp)

    @property
    def split(self) -> SplitConfig:
        return SplitConfig(L=self.L, tol=self.tol, max_iter=self.max_iter,
                           warm_start=self.warm_start)

    def resolved(self) -> dict:
        """Manifest-ready dictionary with every "auto" value resolved."""
        out = {
            "mesh": {"nx": self.nx, "ny": self.ny, "Lx": self.Lx, "Ly": self.Ly},
            "orders": {"s": self.s, "r": self.r},
            "physics": {
                "mu": self.physics.mu, "lambda": self.physics.lam,
                "b": self.physics.b, "c0": self.physics.c0,
                "K": self.physics.K.tolist(), "rho_b": self.physics.rho_b,
            },
            "sip": {"delta0": self.delta0, "beta_exp": self.beta_exp},
            "split": {
                "L": self.L, "tol": self.tol, "max_iter": self.max_iter,
                "warm_start": self.warm_start,
                "cold_start_diagnostics": self.cold_start_diagnostics,
            },
            "time": {"T": self.T, "N": self.N},
            "sources": {"preset": self.preset},
            "mode": self.mode,
            "study": {"type": self.study},
            "output": {
                "write_vtk": self.write_vtk, "write_csv": self.write_csv,
                "write_figures": self.write_figures,
            },
        }
        if self.study == "l_sweep":
            out["study"]["values"] = self.study_values
        elif self.study == "h_refine":
            out["study"]["levels"] = self.study_levels
            out["study"]["time_factor"] = self.study_time_factor
        elif self.study == "t_refine":
            out["study"]["levels"] = self.study_levels
        elif self.study == "locking":
            out["study"]["lambda_values"] = self.study_lambda_values
        if self.out_directory is not None:
            out["output"]["directory"] = self.out_directory
        return out


def parse_config(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be an object")

    mesh_d = _get(data, "mesh", "", required=True)
    if not isinstance(mesh_d, dict):
        raise ConfigError("mesh must be an object")
    nx = _integer(_get(mesh_d, "nx", "mesh", required=True), "mesh.nx", minimum=1)
    ny = _integer(_get(mesh_d, "ny", "mesh", required=True), "mesh.ny", minimum=1)
    Lx = _number(_get(mesh_d, "Lx", "mesh", 1.0), "mesh.Lx", positive=True)
    Ly = _number(_get(mesh_d, "Ly", "mesh", 1.0), "mesh.Ly", positive=True)

    orders_d = _get(data, "orders", "", {})
    s = _integer(_get(orders_d, "s", "orders", 0), "orders.s")
    if s not in (0, 1):
        raise ConfigError("orders.s must be 0 or 1")
    r = _integer(_get(orders_d, "r", "orders", 0), "orders.r")
    if r not in (0, 1):
        raise ConfigError("orders.r must be 0 or 1")

    phys_d = _get(data, "physics", "", required=True)
    if not isinstance(phys_d, dict):
        raise ConfigError("physics must be an object")
    mu = _number(_get(phys_d, "mu", "physics", required=True), "physics.mu", positive=True)
    lam = _number(_get(phys_d, "lambda", "physics", required=True),
                  "physics.lambda", positive=True)
    b = _number(_get(phys_d, "b", "physics", 1.0), "physics.b", positive=True)
    c0 = _number(_get(phys_d, "c0", "physics", 1.0), "physics.c0", nonnegative=True)
    K_raw = _get(phys_d, "K", "physics", 1.0)
    if isinstance(K_raw, (int, float)) and not isinstance(K_raw, bool):
        K = float(K_raw) * np.eye(2)
        if K_raw <= 0:
            raise ConfigError("physics.K must be positive")
    elif isinstance(K_raw, list):
        try:
            K = np.asarray(K_raw, dtype=float).reshape(2, 2)
        except (ValueError, TypeError):
            raise ConfigError("physics.K must be a number or a 2x2 matrix") from None
        if not np.allclose(K, K.T) or np.any(np.linalg.eigvalsh(K) <= 0):
            raise ConfigError("physics.K must be symmetric positive definite")
    else:
        raise ConfigError("physics.K must be a number or a 2x2 matrix")
    rho_b = _number(_get(phys_d, "rho_b", "physics", 1.0), "physics.rho_b", positive=True)
    try:
        physics = PhysParams(mu=mu, lam=lam, b=b, c0=c0, K=K, rho_b=rho_b)
    except ValueError as exc:
        raise ConfigError(f"physics: {exc}") from None

    sip_d = _get(data, "sip", "", {})
    delta0_raw = _get(sip_d, "delta0", "sip", "auto")
    if delta0_raw == "auto":
        delta0 = default_delta0(physics, s)
    else:
        delta0 = _number(delta0_raw, "sip.delta0", positive=True)
    beta_exp = _number(_get(sip_d, "beta_exp", "sip", 1.0), "sip.beta_exp", positive=True)

    split_d = _get(data, "split", "", {})
    L_raw = _get(split_d, "L", "split", "auto")
    if L_raw == "auto":
        L = auto_stabilization(physics)
    else:
        L = _number(L_raw, "split.L", nonnegative=True)
    tol = _number(_get(split_d, "tol", "split", 1e-10), "split.tol", positive=True)
    max_iter = _integer(_get(split_d, "max_iter", "split", 200), "split.max_iter", minimum=1)
    warm_start = _boolean(_get(split_d, "warm_start", "split", True), "split.warm_start")
    cold_diag = _boolean(
        _get(split_d, "cold_start_diagnostics", "split", True),
        "split.cold_start_diagnostics",
    )

    time_d = _get(data, "time", "", required=True)
    if not isinstance(time_d, dict):
        raise ConfigError("time must be an object")
    T = _number(_get(time_d, "T", "time", required=True), "time.T", positive=True)
    N = _integer(_get(time_d, "N", "time", required=True), "time.N", minimum=1)

    sources_d = _get(data, "sources", "", {"preset": "zero"})
    if not isinstance(sources_d, dict):
        raise ConfigError("sources must be an object")
    preset = _choice(_get(sources_d, "preset", "sources", "zero"),
                     "sources.preset", SOURCE_PRESETS)

    mode = _choice(_get(data, "mode", "", "split"), "mode", MODES)

    study_d = _get(data, "study", "", {"type": "none"})
    if not isinstance(study_d, dict):
        raise ConfigError("study must be an object")
    study = _choice(_get(study_d, "type", "study", "none"), "study.type", STUDY_TYPES)
    study_values = None
    study_levels = None
    study_time_factor = None
    study_lambdas = None
    if study == "l_sweep":
        raw_vals = _get(study_d, "values", "study", required=True)
        if not isinstance(raw_vals, list) or not raw_vals:
            raise ConfigError("study.values must be a nonempty list")
        study_values = [_number(v, "study.values", nonnegative=True) for v in raw_vals]
    elif study in ("h_refine", "t_refine"):
        study_levels = _integer(_get(study_d, "levels", "study", 3), "study.levels", minimum=2)
        if study == "h_refine":
            study_time_factor = _integer(
                _get(study_d, "time_factor", "study", 1),
                "study.time_factor", minimum=1,
            )
    elif study == "locking":
        raw_vals = _get(study_d, "lambda_values", "study", required=True)
        if not isinstance(raw_vals, list) or not raw_vals:
            raise ConfigError("study.lambda_values must be a nonempty list")
        study_lambdas = [_number(v, "study.lambda_values", positive=True) for v in raw_vals]

    out_d = _get(data, "output", "", {})
    directory = _get(out_d, "directory", "output")
    if directory is not None and not isinstance(directory, str):
        raise ConfigError("output.directory must be a string")
    write_vtk = _boolean(_get(out_d, "write_vtk", "output", True), "output.write_vtk")
    write_csv = _boolean(_get(out_d, "write_csv", "output", True), "output.write_csv")
    write_figures = _boolean(
        _get(out_d, "write_figures", "output", True), "output.write_figures"
    )

    return ScenarioConfig(
        nx=nx, ny=ny, Lx=Lx, Ly=Ly, s=s, r=r, physics=physics,
        delta0=delta0, beta_exp=beta_exp, L=L, tol=tol, max_iter=max_iter,
        warm_start=warm_start, cold_start_diagnostics=cold_diag,
        T=T, N=N, preset=preset, mode=mode, study=study,
        study_values=study_values, study_levels=study_levels,
        study_time_factor=study_time_factor,
        study_lambda_values=study_lambdas, out_directory=directory,
        write_vtk=write_vtk, write_csv=write_csv, write_figures=write_figures,
        raw=data,
    )


def load_config(path) -> ScenarioConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"configuration file not found: {path}")
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {path}: {exc}") from None
    return parse_config(data)
