"""Uniform rectangular meshes with fixed-orientation edge connectivity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Edge:
    """Mesh edge with a fixed unit normal and cell adjacency.

    For interior edges the normal points from the lower-indexed adjacent
    cell ``cells[0]`` toward ``cells[1]``.  Jumps and averages across the
    edge are always taken in that stored orientation, so the sign
    convention is fixed once at construction and never re-evaluated.
    """

    vertices: tuple[int, int]
    length: float
    normal: tuple[float, float]
    cells: tuple[int, int | None]
    boundary: bool


@dataclass(frozen=True)
class Mesh:
    """Axis-aligned rectangular grid of nx-by-ny cells on [0,Lx]x[0,Ly].

    Cells are enumerated row-major (cell ``(i, j)`` has index ``j*nx + i``)
    and store their corner vertices counterclockwise.  ``cell_edges`` lists
    the four edges of each cell in the order (left, right, bottom, top);
    the outward normal of a cell agrees with the stored edge normal on the
    right/top sides and is opposite on the left/bottom sides.
    """

    nx: int
    ny: int
    Lx: float
    Ly: float
    vertices: np.ndarray
    cells: np.ndarray
    edges: tuple[Edge, ...]
    cell_extents: np.ndarray
    cell_edges: np.ndarray
    interior_edges: np.ndarray

    @property
    def num_cells(self) -> int:
        return self.cells.shape[0]

    @property
    def num_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def h(self) -> float:
        return float(np.max(self.cell_extents))


def build_rect_mesh(nx: int, ny: int, Lx: float, Ly: float) -> Mesh:
    """Build a uniform nx-by-ny rectangular mesh of [0,Lx]x[0,Ly].

    Vertical edges are enumerated column by column, then horizontal edges
    row by row.  Interior edge normals point from the lower-indexed cell
    to the higher-indexed one, which for this enumeration is always +x
    (vertical edges) or +y (horizontal edges).
    """
    if not isinstance(nx, (int, np.integer)) or nx < 1:
        raise ValueError("mesh.nx must be a positive integer")
    if not isinstance(ny, (int, np.integer)) or ny < 1:
        raise ValueError("mesh.ny must be a positive integer")
    if not Lx > 0:
        raise ValueError("mesh.Lx must be positive")
    if not Ly > 0:
        raise ValueError("mesh.Ly must be positive")

    nx, ny = int(nx), int(ny)
    hx, hy = Lx / nx, Ly / ny

    xs = np.linspace(0.0, Lx, nx + 1)
    ys = np.linspace(0.0, Ly, ny + 1)
    vertices = np.column_stack(
        [np.tile(xs, ny + 1), np.repeat(ys, nx + 1)]
    )

    def vid(i: int, j: int) -> int:
        return j * (nx + 1) + i

    cells = np.empty((nx * ny, 4), dtype=int)
    for j in range(ny):
        for i in range(nx):
            cells[j * nx + i] = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1))

    edges: list[Edge] = []
    # Vertical edges at x = i*hx, column-major: index i*ny + j.
    for i in range(nx + 1):
        for j in range(ny):
            left = (i - 1) + j * nx if i > 0 else None
            right = i + j * nx if i < nx else None
            if left is not None and right is not None:
                adj: tuple[int, int | None] = (left, right)
                bnd = False
            else:
                adj = (left if left is not None else right, None)
                bnd = True
            edges.append(
                Edge(
                    vertices=(vid(i, j), vid(i, j + 1)),
                    length=hy,
                    normal=(1.0, 0.0),
                    cells=adj,
                    boundary=bnd,
                )
            )
    # Horizontal edges at y = j*hy, row-major: index offset + j*nx + i.
    for j in range(ny + 1):
        for i in range(nx):
            below = i + (j - 1) * nx if j > 0 else None
            above = i + j * nx if j < ny else None
            if below is not None and above is not None:
                adj = (below, above)
                bnd = False
            else:
                adj = (below if below is not None else above, None)
                bnd = True
            edges.append(
                Edge(
                    vertices=(vid(i, j), vid(i + 1, j)),
                    length=hx,
                    normal=(0.0, 1.0),
                    cells=adj,
                    boundary=bnd,
                )
            )

    n_vert_edges = (nx + 1) * ny
    cell_edges = np.empty((nx * ny, 4), dtype=int)
    for j in range(ny):
        for i in range(nx):
            c = j * nx + i
            cell_edges[c, 0] = i * ny + j
            cell_edges[c, 1] = (i + 1) * ny + j
            cell_edges[c, 2] = n_vert_edges + j * nx + i
            cell_edges[c, 3] = n_vert_edges + (j + 1) * nx + i

    cell_extents = np.full((nx * ny, 2), (hx, hy))
    interior = np.array(
        [e for e, edge in enumerate(edges) if not edge.boundary], dtype=int
    )

    return Mesh(
        nx=nx,
        ny=ny,
        Lx=float(Lx),
        Ly=float(Ly),
        vertices=vertices,
        cells=cells,
        edges=tuple(edges),
        cell_extents=cell_extents,
        cell_edges=cell_edges,
        interior_edges=interior,
    )


def cell_map(mesh: Mesh, c: int) -> tuple[np.ndarray, tuple[float, float]]:
    """Affine map data of cell c: origin and scale (hx, hy).

    The cell map sends the reference square [0,1]^2 to the physical cell
    via x = origin + (hx*xhat, hy*yhat); its Jacobian determinant is hx*hy.
    """
    if not 0 <= c < mesh.num_cells:
        raise IndexError(f"cell index {c} out of range for {mesh.num_cells} cells")
    origin = mesh.vertices[mesh.cells[c, 0]].copy()
    hx, hy = mesh.cell_extents[c]
    return origin, (float(hx), float(hy))
