"""Scenario orchestration: single runs, parameter sweeps, refinement
studies, and the locking stress test."""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np

from .assembly import SourceData, assemble_all, default_delta0, mass_norm
from .config import ScenarioConfig
from .fem_spaces import dof_layout
from .mesh import build_rect_mesh
from .report import write_outputs
from .solvers import auto_stabilization, march
from .time_slab import slab_coefficients, uniform_partition
from .verification import (
    error_norms,
    jump_indicator,
    mms_coupled,
    mms_flow,
    observed_order,
    run_contraction_study,
)


def build_sources(config: ScenarioConfig):
    """Source fields of the configured preset, plus the exact solution
    when the preset is manufactured."""
    if config.preset == "zero":
        return SourceData(), None
    if config.preset == "constant_f":
        return SourceData(f=lambda x, y, t: np.ones_like(x)), None
    if config.preset == "mms_flow":
        exact = mms_flow(config.physics, config.Lx, config.Ly)
        return exact.sources, exact
    if config.preset == "mms_coupled":
        exact = mms_coupled(config.physics, config.Lx, config.Ly)
        return exact.sources, exact
    if config.preset == "locking_load":
        half_x, half_y = config.Lx / 2.0, config.Ly / 2.0

        def f(x, y, t):
            return np.where((x < half_x) & (y < half_y), 1.0, 0.0)

        return SourceData(f=f), None
    raise ValueError(f"unknown source preset {config.preset!r}")


def _setup(config: ScenarioConfig):
    mesh = build_rect_mesh(config.nx, config.ny, config.Lx, config.Ly)
    spaces = dof_layout(mesh, config.s)
    ops = assemble_all(mesh, spaces, config.physics, config.sip)
    basis = slab_coefficients(config.r)
    partition = uniform_partition(config.T, config.N)
    sources, exact = build_sources(config)
    return mesh, spaces, ops, basis, partition, sources, exact


def run_single(config: ScenarioConfig, outdir) -> list[str]:
    """One scenario in the configured mode; returns written artifacts."""
    mesh, spaces, ops, basis, partition, sources, _ = _setup(config)
    diagnostics = None
    if config.mode == "both":
        trajectory, diagnostics = run_contraction_study(
            ops, mesh, spaces, basis, config.physics, config.split, sources,
            partition, cold_start=config.cold_start_diagnostics,
        )
    else:
        trajectory = march(ops, mesh, spaces, basis, config.physics,
                           config.split, sources, partition, mode=config.mode)
    return write_outputs(
        outdir, config.resolved(), mesh=mesh, spaces=spaces,
        trajectory=trajectory, diagnostics=diagnostics,
        write_vtk=config.write_vtk, write_csv_files=config.write_csv,
        write_figures=config.write_figures,
    )


def run_l_sweep(config: ScenarioConfig, outdir) -> list[str]:
    """Re-run the scenario for each stabilization value in its own
    subdirectory and aggregate the manifest."""
    outdir = Path(outdir)
    artifacts: list[str] = []
    for value in config.study_values:
        sub = dataclasses.replace(config, L=float(value), study="none",
                                  study_values=None)
        subdir = f"L_{value:g}"
        for name in run_single(sub, outdir / subdir):
            artifacts.append(f"{subdir}/{name}")
    write_outputs(outdir, config.resolved(), write_vtk=False,
                  write_figures=False,
                  extra_manifest={"sweep_artifacts": sorted(artifacts)})
    return artifacts + ["manifest.json"]


def _refinement_levels(config: ScenarioConfig, kind: str):
    """Discrete errors against the exact (or reference) solution per level.

    Spatial refinement doubles the mesh per level and multiplies the slab
    count by ``study.time_factor`` so the time step can track h at the
    rate that equilibrates the spatial and temporal error contributions.
    Temporal refinement halves tau on a fixed mesh and measures
    self-convergence against a reference run with tau/4 of the finest
    level, so it works with any source preset.
    """
    levels = []
    if kind == "h_refine":
        if config.preset not in ("mms_flow", "mms_coupled"):
            raise ValueError(
                "study.h_refine requires a manufactured-solution preset; "
                f"got sources.preset = {config.preset}"
            )
        time_factor = config.study_time_factor or 1
        for k in range(config.study_levels):
            scale = 2**k
            sub = dataclasses.replace(
                config, nx=config.nx * scale, ny=config.ny * scale,
                N=config.N * time_factor**k,
                study="none", study_levels=None, study_time_factor=None,
            )
            mesh, spaces, ops, basis, partition, sources, exact = _setup(sub)
            trajectory = march(ops, mesh, spaces, basis, sub.physics, sub.split,
                               sources, partition, mode="split")
            report = error_norms(trajectory, exact, mesh, spaces, partition, basis)
            levels.append({
                "h": mesh.h, "tau": partition.tau_max,
                "err_p": report.err_p_T, "err_q": report.err_q_T,
                "err_u": report.err_u_T,
            })
        x_key = "h"
    else:
        mesh, spaces, ops, basis, partition, sources, exact = _setup(config)
        ends = []
        taus = []
        for k in range(config.study_levels):
            Nk = config.N * 2**k
            part_k = uniform_partition(config.T, Nk)
            traj = march(ops, mesh, spaces, basis, config.physics, config.split,
                         sources, part_k, mode="split")
            ends.append(traj.end)
            taus.append(part_k.tau_max)
        N_ref = config.N * 2 ** (config.study_levels + 1)
        part_ref = uniform_partition(config.T, N_ref)
        ref = march(ops, mesh, spaces, basis, config.physics, config.split,
                    sources, part_ref, mode="split").end
        for end, tau in zip(ends, taus):
            levels.append({
                "h": mesh.h, "tau": tau,
                "err_p": mass_norm(ops.Mp, end.p_end - ref.p_end),
                "err_q": mass_norm(ops.Mv, end.q_end - ref.q_end),
                "err_u": mass_norm(ops.Md, end.u_end - ref.u_end),
            })
        x_key = "tau"

    sizes = [entry[x_key] for entry in levels]
    for key in ("p", "q", "u"):
        errs = [entry[f"err_{key}"] for entry in levels]
        orders = observed_order(errs, sizes)
        for i, entry in enumerate(levels):
            entry[f"order_{key}"] = float("nan") if i == 0 else float(orders[i - 1])
    return levels, x_key


def run_refinement(config: ScenarioConfig, outdir, kind: str) -> list[str]:
    levels, x_key = _refinement_levels(config, kind)
    return write_outputs(
        outdir, config.resolved(), rates_levels=levels, rates_x=x_key,
        write_vtk=False, write_csv_files=config.write_csv,
        write_figures=config.write_figures,
    )


def run_locking(config: ScenarioConfig, outdir) -> list[str]:
    """Run the locking scenario per lambda value and record the interior
    pressure-jump indicator of the final state."""
    outdir = Path(outdir)
    artifacts: list[str] = []
    entries = []
    for lam in config.study_lambda_values:
        physics = dataclasses.replace(config.physics, lam=float(lam))
        # The stabilization and penalty follow the swept lambda.
        sub = dataclasses.replace(
            config, physics=physics, study="none", study_lambda_values=None,
            L=auto_stabilization(physics), delta0=default_delta0(physics, config.s),
        )
        mesh, spaces, ops, basis, partition, sources, _ = _setup(sub)
        trajectory = march(ops, mesh, spaces, basis, sub.physics, sub.split,
                           sources, partition, mode="split")
        subdir = f"lambda_{lam:g}"
        for name in write_outputs(
            outdir / subdir, sub.resolved(), mesh=mesh, spaces=spaces,
            trajectory=trajectory, write_vtk=sub.write_vtk,
            write_csv_files=sub.write_csv, write_figures=sub.write_figures,
        ):
            artifacts.append(f"{subdir}/{name}")
        p_end = trajectory.end.p_end
        entries.append({
            "lam": float(lam),
            "iterations": sum(s.report.iterations for s in trajectory.slabs),
            "jump_indicator": jump_indicator(mesh, spaces, p_end),
            "p_min": float(p_end.min()),
            "p_max": float(p_end.max()),
        })
    for name in write_outputs(
        outdir, config.resolved(), locking_entries=entries,
        write_vtk=False, write_csv_files=config.write_csv,
        write_figures=config.write_figures,
    ):
        artifacts.append(name)
    return artifacts


def run_scenario(config: ScenarioConfig, outdir) -> list[str]:
    """Dispatch a validated configuration to its study driver."""
    if config.study == "none":
        return run_single(config, outdir)
    if config.study == "l_sweep":
        return run_l_sweep(config, outdir)
    if config.study in ("h_refine", "t_refine"):
        return run_refinement(config, outdir, config.study)
    if config.study == "locking":
        return run_locking(config, outdir)
    raise ValueError(f"unknown study type {config.study!r}")
