"""Legacy ASCII VTK output of broken fields on rectangular meshes.

Each cell is written with its own four corner points so the
discontinuous displacement is represented faithfully; pressure goes out
as one value per cell (the cell average) and displacement as a vector
per duplicated corner point.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .fem_spaces import Spaces, gauss_points_1d, nodal_basis, pressure_basis
from .mesh import Mesh

_CORNERS = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def _fmt(values) -> str:
    return " ".join(f"{float(v):.17e}" for v in np.atleast_1d(values))


def write_vtk_fields(path, mesh: Mesh, spaces: Spaces, pvec: np.ndarray,
                     u_free: np.ndarray) -> None:
    """Write one snapshot of pressure and displacement to a VTK file."""
    nc = mesh.num_cells
    disp = spaces.displacement

    corner_vals, _ = nodal_basis(disp.l, _CORNERS)
    raw = disp.scatter_free(u_free).reshape(nc, disp.nloc_scalar, 2)
    u_corners = np.einsum("cak,aq->cqk", raw, corner_vals)

    _, w1 = gauss_points_1d(spaces.s + 1)
    wnod = np.tile(w1, spaces.s + 1) * np.repeat(w1, spaces.s + 1)
    p_cells = pvec.reshape(nc, spaces.pressure.nloc) @ wnod

    origins = mesh.vertices[mesh.cells[:, 0]]
    pts = origins[:, None, :] + _CORNERS[None, :, :] * mesh.cell_extents[:, None, :]

    lines = [
        "# vtk DataFile Version 3.0",
        "porofix fields",
        "ASCII",
        "DATASET UNSTRUCTURED_GRID",
        f"POINTS {4 * nc} double",
    ]
    for c in range(nc):
        for q in range(4):
            lines.append(_fmt([pts[c, q, 0], pts[c, q, 1], 0.0]))
    lines.append(f"CELLS {nc} {5 * nc}")
    for c in range(nc):
        base = 4 * c
        lines.append(f"4 {base} {base + 1} {base + 2} {base + 3}")
    lines.append(f"CELL_TYPES {nc}")
    lines.extend(["9"] * nc)
    lines.append(f"CELL_DATA {nc}")
    lines.append("SCALARS pressure double 1")
    lines.append("LOOKUP_TABLE default")
    for c in range(nc):
        lines.append(_fmt(p_cells[c]))
    lines.append(f"POINT_DATA {4 * nc}")
    lines.append("VECTORS displacement double")
    for c in range(nc):
        for q in range(4):
            lines.append(_fmt([u_corners[c, q, 0], u_corners[c, q, 1], 0.0]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_vtk_fields(path):
    """Parse a file written by ``write_vtk_fields``.

    Returns (points, cells, pressure, displacement) arrays; intended for
    round-trip checks and lightweight post-processing.
    """
    tokens = Path(path).read_text().splitlines()
    idx = 0

    def expect(prefix: str) -> str:
        nonlocal idx
        while idx < len(tokens) and not tokens[idx].startswith(prefix):
            idx += 1
        if idx >= len(tokens):
            raise ValueError(f"missing section {prefix!r} in {path}")
        line = tokens[idx]
        idx += 1
        return line

    header = expect("POINTS")
    npts = int(header.split()[1])
    points = np.array([
        [float(v) for v in tokens[idx + k].split()] for k in range(npts)
    ])
    idx += npts

    header = expect("CELLS")
    ncells = int(header.split()[1])
    cells = np.array([
        [int(v) for v in tokens[idx + k].split()[1:]] for k in range(ncells)
    ])
    idx += ncells

    expect("LOOKUP_TABLE")
    pressure = np.array([float(tokens[idx + k]) for k in range(ncells)])
    idx += ncells

    expect("VECTORS")
    displacement = np.array([
        [float(v) for v in tokens[idx + k].split()] for k in range(npts)
    ])
    return points, cells, pressure, displacement
