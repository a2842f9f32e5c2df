"""Reference bases, quadrature, and DOF layouts for the discrete spaces.

Three spaces are built on a rectangular mesh:

* a fully discontinuous pressure space of per-cell tensor polynomials of
  degree s, with a nodal Lagrange basis at Gauss points (which makes the
  pressure mass matrix exactly diagonal);
* an H(div)-conforming Raviart-Thomas flux space of order s with edge
  moments as shared degrees of freedom;
* a broken vector displacement space of per-cell tensor polynomials of
  degree l = s+1 on Gauss-Lobatto nodes, with every node lying on the
  outer boundary constrained to zero so the trace vanishes identically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh

SUPPORTED_ORDERS = (0, 1)


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor-product Gauss rule on [0,1]^dim with weights summing to 1.

    A rule with npts points per direction integrates polynomials of
    per-direction degree up to 2*npts - 1 exactly.
    """

    points: np.ndarray
    weights: np.ndarray
    npts: int
    dim: int


def gauss_points_1d(npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights on the unit interval."""
    if npts < 1:
        raise ValueError("quadrature rule needs at least one point")
    x, w = np.polynomial.legendre.leggauss(npts)
    return (x + 1.0) / 2.0, w / 2.0


def gauss_rule(npts: int, dim: int) -> QuadratureRule:
    """Tensor Gauss-Legendre rule on [0,1]^dim, dim in {1, 2}."""
    if dim not in (1, 2):
        raise ValueError(f"unsupported quadrature dimension {dim}")
    x, w = gauss_points_1d(npts)
    if dim == 1:
        return QuadratureRule(points=x[:, None], weights=w, npts=npts, dim=1)
    # x runs fastest: point q = j*npts + i is (x_i, x_j) with weight w_i*w_j.
    pts = np.column_stack([np.tile(x, npts), np.repeat(x, npts)])
    wts = np.tile(w, npts) * np.repeat(w, npts)
    return QuadratureRule(points=pts, weights=wts, npts=npts, dim=2)


def lobatto_points(npts: int) -> np.ndarray:
    """Gauss-Lobatto points on [0,1], endpoints included."""
    if npts < 2:
        raise ValueError("Lobatto rule needs at least two points")
    interior = np.polynomial.legendre.Legendre.basis(npts - 1).deriv().roots()
    pts = np.concatenate(([-1.0], np.sort(interior), [1.0]))
    return (pts + 1.0) / 2.0


# ---------------------------------------------------------------------------
# 1D Lagrange helpers


def lagrange_values(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Values of the Lagrange basis on the given nodes, shape (nnode, len(x))."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = nodes.size
    vals = np.ones((n, x.size))
    for a in range(n):
        for b in range(n):
            if b != a:
                vals[a] *= (x - nodes[b]) / (nodes[a] - nodes[b])
    return vals


def lagrange_derivatives(nodes: np.ndarray, x: np.ndarray) -> np.ndarray:
    """First derivatives of the Lagrange basis, shape (nnode, len(x))."""
    nodes = np.asarray(nodes, dtype=float)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = nodes.size
    der = np.zeros((n, x.size))
    for a in range(n):
        for c in range(n):
            if c == a:
                continue
            term = np.full(x.size, 1.0 / (nodes[a] - nodes[c]))
            for b in range(n):
                if b in (a, c):
                    continue
                term *= (x - nodes[b]) / (nodes[a] - nodes[b])
            der[a] += term
    return der


def legendre_01(m: int, x: np.ndarray) -> np.ndarray:
    """Legendre polynomial of degree m shifted to [0,1]."""
    x = np.asarray(x, dtype=float)
    return np.polynomial.legendre.Legendre.basis(m)(2.0 * x - 1.0)


# ---------------------------------------------------------------------------
# scalar nodal bases


def nodal_basis(l: int, ref_points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scalar tensor Lagrange basis of degree l on Gauss-Lobatto nodes.

    Returns values of shape (nloc, npts) and reference gradients of shape
    (nloc, npts, 2).  Local nodes are ordered lexicographically with the
    x index running fastest.
    """
    if l not in (1, 2):
        raise ValueError(f"unsupported displacement order {l}; supported: 1, 2")
    pts = np.atleast_2d(np.asarray(ref_points, dtype=float))
    nodes1 = lobatto_points(l + 1)
    vx = lagrange_values(nodes1, pts[:, 0])
    vy = lagrange_values(nodes1, pts[:, 1])
    dx = lagrange_derivatives(nodes1, pts[:, 0])
    dy = lagrange_derivatives(nodes1, pts[:, 1])
    nloc = (l + 1) ** 2
    npts = pts.shape[0]
    vals = np.empty((nloc, npts))
    grads = np.empty((nloc, npts, 2))
    for iy in range(l + 1):
        for ix in range(l + 1):
            a = iy * (l + 1) + ix
            vals[a] = vx[ix] * vy[iy]
            grads[a, :, 0] = dx[ix] * vy[iy]
            grads[a, :, 1] = vx[ix] * dy[iy]
    return vals, grads


def pressure_basis(s: int, ref_points: np.ndarray) -> np.ndarray:
    """Nodal Lagrange basis of degree s at tensor Gauss points, (nloc, npts)."""
    if s not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported pressure order {s}; supported: {SUPPORTED_ORDERS}")
    pts = np.atleast_2d(np.asarray(ref_points, dtype=float))
    nodes1, _ = gauss_points_1d(s + 1)
    vx = lagrange_values(nodes1, pts[:, 0])
    vy = lagrange_values(nodes1, pts[:, 1])
    nloc = (s + 1) ** 2
    vals = np.empty((nloc, pts.shape[0]))
    for iy in range(s + 1):
        for ix in range(s + 1):
            vals[iy * (s + 1) + ix] = vx[ix] * vy[iy]
    return vals


# ---------------------------------------------------------------------------
# Raviart-Thomas reference element

_RT_COEFF_CACHE: dict[int, tuple[list[tuple[int, int, int]], np.ndarray]] = {}


def _rt_monomials(s: int) -> list[tuple[int, int, int]]:
    """Monomial basis (component, x-exponent, y-exponent) of the RT space."""
    mono: list[tuple[int, int, int]] = []
    for ay in range(s + 1):
        for ax in range(s + 2):
            mono.append((0, ax, ay))
    for ay in range(s + 2):
        for ax in range(s + 1):
            mono.append((1, ax, ay))
    return mono


def _rt_dof_on_monomial(s: int, mono: tuple[int, int, int]) -> np.ndarray:
    """All RT degree-of-freedom functionals applied to one monomial.

    DOF order: left edge moments m = 0..s, then right, bottom, top, then
    interior moments.  Edge moments use the shifted Legendre weights in
    the edge parameter increasing with the coordinate, and the +x / +y
    normals shared by the global edge orientation.
    """
    comp, ax, ay = mono
    nq = s + 2
    t, w = gauss_points_1d(nq)
    q = np.array([legendre_01(m, t) for m in range(s + 1)])
    dofs = []
    # Edge moments of the normal component; normals are +x (vertical
    # edges) and +y (horizontal edges).
    for m in range(s + 1):  # left: x = 0
        val = (0.0 ** ax if comp == 0 else 0.0)
        dofs.append(np.sum(w * q[m] * t**ay) * val if comp == 0 else 0.0)
    for m in range(s + 1):  # right: x = 1
        dofs.append(np.sum(w * q[m] * t**ay) if comp == 0 else 0.0)
    for m in range(s + 1):  # bottom: y = 0
        val = (0.0 ** ay if comp == 1 else 0.0)
        dofs.append(np.sum(w * q[m] * t**ax) * val if comp == 1 else 0.0)
    for m in range(s + 1):  # top: y = 1
        dofs.append(np.sum(w * q[m] * t**ax) if comp == 1 else 0.0)
    # Interior moments against (x^a y^b, 0), a <= s-1, b <= s, then
    # (0, x^a y^b), a <= s, b <= s-1.
    t2, w2 = gauss_points_1d(nq)
    X = np.tile(t2, nq)
    Y = np.repeat(t2, nq)
    W2 = np.tile(w2, nq) * np.repeat(w2, nq)
    for b in range(s + 1):
        for a in range(s):
            dofs.append(np.sum(W2 * X ** (ax + a) * Y ** (ay + b)) if comp == 0 else 0.0)
    for b in range(s):
        for a in range(s + 1):
            dofs.append(np.sum(W2 * X ** (ax + a) * Y ** (ay + b)) if comp == 1 else 0.0)
    return np.array(dofs, dtype=float)


def _rt_reference(s: int) -> tuple[list[tuple[int, int, int]], np.ndarray]:
    """Monomials and coefficient matrix of the RT reference basis.

    Column i of the coefficient matrix expands basis function i in the
    monomial list, such that every DOF functional is Kronecker on it.
    """
    if s not in _RT_COEFF_CACHE:
        if s not in SUPPORTED_ORDERS:
            raise ValueError(f"unsupported flux order {s}; supported: {SUPPORTED_ORDERS}")
        mono = _rt_monomials(s)
        V = np.column_stack([_rt_dof_on_monomial(s, m) for m in mono])
        _RT_COEFF_CACHE[s] = (mono, np.linalg.inv(V))
    return _RT_COEFF_CACHE[s]


def _eval_monomials(mono, pts):
    """Component values and divergences of the monomials, reference frame."""
    x, y = pts[:, 0], pts[:, 1]
    n = len(mono)
    vals = np.zeros((n, pts.shape[0], 2))
    divs = np.zeros((n, pts.shape[0]))
    for k, (comp, ax, ay) in enumerate(mono):
        vals[k, :, comp] = x**ax * y**ay
        if comp == 0 and ax > 0:
            divs[k] = ax * x ** (ax - 1) * y**ay
        elif comp == 1 and ay > 0:
            divs[k] = ay * x**ax * y ** (ay - 1)
    return vals, divs


def rt_basis(
    s: int, scale: tuple[float, float], ref_points: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Physical Raviart-Thomas basis values and divergences on one cell.

    The contravariant Piola map for an axis-aligned cell of extents
    (hx, hy) scales the components to (vx/hy, vy/hx) and the divergence
    by 1/(hx*hy), which keeps edge moments of the normal trace invariant.
    Returns values (nloc, npts, 2) and divergences (nloc, npts).
    """
    mono, coeff = _rt_reference(s)
    pts = np.atleast_2d(np.asarray(ref_points, dtype=float))
    mvals, mdivs = _eval_monomials(mono, pts)
    vals = np.einsum("ki,kqc->iqc", coeff, mvals)
    divs = np.einsum("ki,kq->iq", coeff, mdivs)
    hx, hy = scale
    vals = vals.copy()
    vals[:, :, 0] /= hy
    vals[:, :, 1] /= hx
    divs = divs / (hx * hy)
    return vals, divs


# ---------------------------------------------------------------------------
# global layouts


@dataclass(frozen=True)
class PressureSpace:
    """Fully discontinuous tensor polynomials of degree s per cell."""

    s: int
    nloc: int
    ndof: int

    def cell_dofs(self, c: int) -> np.ndarray:
        return np.arange(c * self.nloc, (c + 1) * self.nloc)


@dataclass(frozen=True)
class FluxSpace:
    """Raviart-Thomas space of order s with shared edge moments.

    Global numbering: edge DOFs first (edge e holds moments
    e*(s+1) + m), then per-cell interior DOFs.  Per-cell local order
    matches the reference element: left, right, bottom, top edge
    moments, then interior.
    """

    s: int
    nloc: int
    ndof: int
    n_edge_dofs: int
    cell_dofs: np.ndarray


@dataclass(frozen=True)
class DisplacementSpace:
    """Broken vector tensor polynomials of degree l with zero boundary trace.

    Raw DOF (c, node a, component k) has index c*nloc + 2*a + k.  Nodes
    lying geometrically on the outer boundary are constrained to zero;
    ``free_index`` maps raw indices to the compressed free numbering
    (-1 when constrained).
    """

    l: int
    nloc_scalar: int
    nloc: int
    ndof_raw: int
    boundary_mask: np.ndarray
    free_index: np.ndarray
    free_dofs: np.ndarray

    @property
    def nfree(self) -> int:
        return self.free_dofs.size

    def scatter_free(self, u_free: np.ndarray) -> np.ndarray:
        """Expand a free-DOF vector to the raw numbering with zero trace."""
        raw = np.zeros(self.ndof_raw)
        raw[self.free_dofs] = u_free
        return raw


@dataclass(frozen=True)
class Spaces:
    """Bundle of the three spaces plus cached reference-basis evaluations.

    The caches hold reference-frame values at the shared volume and edge
    quadrature points; assembly applies the per-cell affine and Piola
    scalings.  Edge caches are keyed by the cell side the trace is taken
    from ("left", "right", "bottom", "top").
    """

    mesh: Mesh
    s: int
    pressure: PressureSpace
    flux: FluxSpace
    displacement: DisplacementSpace
    volume_rule: QuadratureRule
    edge_rule: QuadratureRule
    p_vol: np.ndarray
    p_edge: dict[str, np.ndarray]
    rt_vol_vals: np.ndarray
    rt_vol_divs: np.ndarray
    d_vol_vals: np.ndarray
    d_vol_grads: np.ndarray
    d_edge_vals: dict[str, np.ndarray]
    d_edge_grads: dict[str, np.ndarray]

    def __iter__(self):
        return iter((self.pressure, self.flux, self.displacement))


def _side_points(side: str, t: np.ndarray) -> np.ndarray:
    if side == "left":
        return np.column_stack([np.zeros_like(t), t])
    if side == "right":
        return np.column_stack([np.ones_like(t), t])
    if side == "bottom":
        return np.column_stack([t, np.zeros_like(t)])
    if side == "top":
        return np.column_stack([t, np.ones_like(t)])
    raise ValueError(f"unknown side {side!r}")


def dof_layout(mesh: Mesh, s: int) -> Spaces:
    """Deterministic global DOF numbering of all three spaces for order s."""
    if s not in SUPPORTED_ORDERS:
        raise ValueError(f"unsupported order s={s}; supported: {SUPPORTED_ORDERS}")
    nc = mesh.num_cells
    l = s + 1

    pressure = PressureSpace(s=s, nloc=(s + 1) ** 2, ndof=nc * (s + 1) ** 2)

    n_em = s + 1
    n_int = 2 * s * (s + 1)
    nloc_v = 4 * n_em + n_int
    n_edge_dofs = mesh.num_edges * n_em
    cell_dofs_v = np.empty((nc, nloc_v), dtype=int)
    for c in range(nc):
        le, ri, bo, to = mesh.cell_edges[c]
        k = 0
        for e in (le, ri, bo, to):
            for m in range(n_em):
                cell_dofs_v[c, k] = e * n_em + m
                k += 1
        for m in range(n_int):
            cell_dofs_v[c, k] = n_edge_dofs + c * n_int + m
            k += 1
    flux = FluxSpace(
        s=s,
        nloc=nloc_v,
        ndof=n_edge_dofs + nc * n_int,
        n_edge_dofs=n_edge_dofs,
        cell_dofs=cell_dofs_v,
    )

    nloc_s = (l + 1) ** 2
    nloc_d = 2 * nloc_s
    ndof_raw = nc * nloc_d
    boundary_mask = np.zeros(ndof_raw, dtype=bool)
    for j in range(mesh.ny):
        for i in range(mesh.nx):
            c = j * mesh.nx + i
            for iy in range(l + 1):
                for ix in range(l + 1):
                    on_bnd = (
                        (i == 0 and ix == 0)
                        or (i == mesh.nx - 1 and ix == l)
                        or (j == 0 and iy == 0)
                        or (j == mesh.ny - 1 and iy == l)
                    )
                    if on_bnd:
                        a = iy * (l + 1) + ix
                        base = c * nloc_d + 2 * a
                        boundary_mask[base] = True
                        boundary_mask[base + 1] = True
    free_index = np.full(ndof_raw, -1, dtype=int)
    free_dofs = np.flatnonzero(~boundary_mask)
    free_index[free_dofs] = np.arange(free_dofs.size)
    displacement = DisplacementSpace(
        l=l,
        nloc_scalar=nloc_s,
        nloc=nloc_d,
        ndof_raw=ndof_raw,
        boundary_mask=boundary_mask,
        free_index=free_index,
        free_dofs=free_dofs,
    )

    vol = gauss_rule(s + 3, 2)
    edge = gauss_rule(s + 3, 1)
    t = edge.points[:, 0]

    p_vol = pressure_basis(s, vol.points)
    p_edge = {side: pressure_basis(s, _side_points(side, t)) for side in
              ("left", "right", "bottom", "top")}
    rt_vol_vals, rt_vol_divs = rt_basis(s, (1.0, 1.0), vol.points)
    d_vol_vals, d_vol_grads = nodal_basis(l, vol.points)
    d_edge_vals = {}
    d_edge_grads = {}
    for side in ("left", "right", "bottom", "top"):
        v, g = nodal_basis(l, _side_points(side, t))
        d_edge_vals[side] = v
        d_edge_grads[side] = g

    return Spaces(
        mesh=mesh,
        s=s,
        pressure=pressure,
        flux=flux,
        displacement=displacement,
        volume_rule=vol,
        edge_rule=edge,
        p_vol=p_vol,
        p_edge=p_edge,
        rt_vol_vals=rt_vol_vals,
        rt_vol_divs=rt_vol_divs,
        d_vol_vals=d_vol_vals,
        d_vol_grads=d_vol_grads,
        d_edge_vals=d_edge_vals,
        d_edge_grads=d_edge_grads,
    )
