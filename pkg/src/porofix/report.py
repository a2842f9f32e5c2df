"""CSV, manifest, and figure serialization of run artifacts.

All delimited output is written with full double precision in scientific
notation and a fixed line terminator, so identical runs produce byte-
identical files.  The report path also renders matplotlib figures next
to the delimited output; figure rendering never changes the CSV bytes.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

ITERATIONS_HEADER = ["slab", "iter", "dp_norm", "du_norm", "ratio", "Sp_norm", "stop"]
RATES_HEADER = ["level", "h", "tau", "err_p_L2", "err_q_L2", "err_u_L2",
                "order_p", "order_q", "order_u"]
TRACES_HEADER = ["slab", "iter", "ep_trace", "eq_trace", "eu_trace"]
LOCKING_HEADER = ["lambda", "iterations", "jump_indicator", "p_min", "p_max"]


def _num(x) -> str:
    return f"{float(x):.17e}"


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def iteration_rows(trajectory, diagnostics=None):
    """Flatten per-slab iteration reports into CSV rows (slabs 1-based)."""
    rows = []
    for n, slab in enumerate(trajectory.slabs):
        rep = slab.report
        if rep is None:
            continue
        for k in range(rep.iterations):
            sp = rep.sp_norms[k] if rep.sp_norms is not None else float("nan")
            rows.append([
                n + 1, k + 1, _num(rep.dp_norms[k]), _num(rep.du_norms[k]),
                _num(rep.ratios[k]), _num(sp), rep.stop,
            ])
    return rows


def write_iterations_csv(path, trajectory, diagnostics=None) -> None:
    _write_csv(path, ITERATIONS_HEADER, iteration_rows(trajectory, diagnostics))


def write_rates_csv(path, levels) -> None:
    """``levels`` holds dicts with h, tau, errors, and orders per level."""
    rows = []
    for lvl, entry in enumerate(levels):
        rows.append([
            lvl,
            _num(entry["h"]), _num(entry["tau"]),
            _num(entry["err_p"]), _num(entry["err_q"]), _num(entry["err_u"]),
            _num(entry.get("order_p", float("nan"))),
            _num(entry.get("order_q", float("nan"))),
            _num(entry.get("order_u", float("nan"))),
        ])
    _write_csv(path, RATES_HEADER, rows)


def write_traces_csv(path, diagnostics) -> None:
    rows = []
    for n, diag in enumerate(diagnostics):
        for k in range(diag.ep_trace.size):
            rows.append([
                n + 1, k + 1, _num(diag.ep_trace[k]), _num(diag.eq_trace[k]),
                _num(diag.eu_trace[k]),
            ])
    _write_csv(path, TRACES_HEADER, rows)


def write_locking_csv(path, entries) -> None:
    rows = [
        [_num(e["lam"]), e["iterations"], _num(e["jump_indicator"]),
         _num(e["p_min"]), _num(e["p_max"])]
        for e in entries
    ]
    _write_csv(path, LOCKING_HEADER, rows)


def write_manifest(path, resolved_config: dict, artifacts: list[str],
                   extra: dict | None = None) -> None:
    payload = {"config": resolved_config, "artifacts": sorted(artifacts)}
    if extra:
        payload.update(extra)
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


# ---------------------------------------------------------------------------
# figures


def figure_iterations(path, trajectory) -> bool:
    series = [(n + 1, slab.report.dp_norms) for n, slab in enumerate(trajectory.slabs)
              if slab.report is not None and slab.report.dp_norms]
    if not series:
        return False
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for n, dp in series:
        ax.semilogy(np.arange(1, len(dp) + 1), dp, marker="o", ms=3, label=f"slab {n}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("pressure increment norm")
    ax.grid(True, which="both", ls=":")
    if len(series) <= 10:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return True


def figure_traces(path, diagnostics) -> bool:
    if not diagnostics:
        return False
    fig, ax = plt.subplots(figsize=(6, 4.5))
    diag = diagnostics[0]
    ks = np.arange(1, diag.ep_trace.size + 1)
    ax.semilogy(ks, np.maximum(diag.ep_trace, 1e-300), marker="o", ms=3, label="pressure")
    ax.semilogy(ks, np.maximum(diag.eq_trace, 1e-300), marker="s", ms=3, label="flux")
    ax.semilogy(ks, np.maximum(diag.eu_trace, 1e-300), marker="^", ms=3, label="displacement")
    ax.set_xlabel("iteration")
    ax.set_ylabel("end-of-slab error vs monolithic")
    ax.grid(True, which="both", ls=":")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return True


def figure_rates(path, levels, x_key: str = "h") -> bool:
    if len(levels) < 2:
        return False
    xs = np.array([entry[x_key] for entry in levels])
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for key, label, marker in (("err_p", "pressure", "o"),
                               ("err_q", "flux", "s"),
                               ("err_u", "displacement", "^")):
        ys = np.array([entry[key] for entry in levels])
        if np.all(ys > 0):
            ax.loglog(xs, ys, marker=marker, ms=4, label=label)
    for slope in (1, 2, 3):
        ref = levels[0]["err_p"] * (xs / xs[0]) ** slope
        ax.loglog(xs, ref, ls="--", lw=0.8, color="gray")
    ax.set_xlabel(x_key)
    ax.set_ylabel("error")
    ax.grid(True, which="both", ls=":")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return True


def figure_locking(path, entries) -> bool:
    if not entries:
        return False
    lams = np.array([e["lam"] for e in entries])
    ind = np.array([e["jump_indicator"] for e in entries])
    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.loglog(lams, np.maximum(ind, 1e-300), marker="o")
    ax.set_xlabel("lambda")
    ax.set_ylabel("interior pressure-jump indicator")
    ax.grid(True, which="both", ls=":")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return True


def write_outputs(outdir, resolved_config: dict, *, mesh=None, spaces=None,
                  trajectory=None, diagnostics=None, rates_levels=None,
                  rates_x: str = "h", locking_entries=None,
                  write_vtk: bool = True, write_csv_files: bool = True,
                  write_figures: bool = True, extra_manifest: dict | None = None) -> list[str]:
    """Serialize whatever artifacts the run produced and write the manifest.

    Returns the artifact file names (manifest included) relative to
    ``outdir``.
    """
    from .vtkio import write_vtk_fields

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    artifacts: list[str] = []

    if write_csv_files and trajectory is not None and any(
        slab.report is not None for slab in trajectory.slabs
    ):
        write_iterations_csv(outdir / "iterations.csv", trajectory, diagnostics)
        artifacts.append("iterations.csv")
    if write_csv_files and diagnostics:
        write_traces_csv(outdir / "traces.csv", diagnostics)
        artifacts.append("traces.csv")
    if write_csv_files and rates_levels:
        write_rates_csv(outdir / "rates.csv", rates_levels)
        artifacts.append("rates.csv")
    if write_csv_files and locking_entries:
        write_locking_csv(outdir / "locking.csv", locking_entries)
        artifacts.append("locking.csv")

    if write_vtk and trajectory is not None and mesh is not None and spaces is not None:
        for n, slab in enumerate(trajectory.slabs):
            name = f"fields_slab{n + 1}.vtk"
            write_vtk_fields(outdir / name, mesh, spaces, slab.p_end, slab.u_end)
            artifacts.append(name)

    if write_figures:
        if trajectory is not None and figure_iterations(outdir / "iterations.png", trajectory):
            artifacts.append("iterations.png")
        if diagnostics and figure_traces(outdir / "traces.png", diagnostics):
            artifacts.append("traces.png")
        if rates_levels and figure_rates(outdir / "rates.png", rates_levels, rates_x):
            artifacts.append("rates.png")
        if locking_entries and figure_locking(outdir / "locking.png", locking_entries):
            artifacts.append("locking.png")

    write_manifest(outdir / "manifest.json", resolved_config,
                   artifacts + ["manifest.json"], extra_manifest)
    return artifacts + ["manifest.json"]
