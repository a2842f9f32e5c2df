"""Assembly of the mixed flow, interior-penalty elasticity, and coupling forms.

All operators are assembled sparse with deterministic cell and edge
ordering.  Interior-edge terms use the fixed edge orientation stored in
the mesh: jumps are (value on the lower-indexed cell) minus (value on the
higher-indexed cell) and the normal points from the lower-indexed cell to
the other one.  Boundary edges carry no penalty or consistency terms; the
displacement space enforces its zero trace strongly and the pressure
boundary condition is natural for the mixed pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .fem_spaces import Spaces, gauss_points_1d
from .mesh import Edge, Mesh

VectorField = Callable[[np.ndarray, np.ndarray, float], np.ndarray]
ScalarField = Callable[[np.ndarray, np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class PhysParams:
    """Constant material parameters of the coupled flow-mechanics problem."""

    mu: float
    lam: float
    b: float
    c0: float
    K: np.ndarray
    rho_b: float

    def __post_init__(self):
        K = np.asarray(self.K, dtype=float)
        if K.ndim == 0:
            K = float(K) * np.eye(2)
        if K.shape != (2, 2):
            raise ValueError("permeability K must be a scalar or a 2x2 tensor")
        object.__setattr__(self, "K", K)
        if not self.mu > 0:
            raise ValueError("shear modulus mu must be positive")
        if not self.lam > 0:
            raise ValueError("Lame parameter lambda must be positive")
        if not self.b > 0:
            raise ValueError("coupling coefficient b must be positive")
        if self.c0 < 0:
            raise ValueError("storage coefficient c0 must be nonnegative")
        if not self.rho_b > 0:
            raise ValueError("bulk density rho_b must be positive")
        if not np.allclose(K, K.T, rtol=0, atol=1e-14 * max(1.0, abs(K).max())):
            raise ValueError("permeability K must be symmetric")
        if np.any(np.linalg.eigvalsh(K) <= 0):
            raise ValueError("permeability K must be positive definite")

    @property
    def K_inv(self) -> np.ndarray:
        return np.linalg.inv(self.K)


@dataclass
class SourceData:
    """Volumetric source f, body force g, and optional initial fields.

    ``f(x, y, t)`` returns an array shaped like x; ``g(x, y, t)`` returns
    an (n, 2) array for n points.  ``p0(x, y)`` and ``u0(x, y)`` follow the
    same conventions; None means identically zero, matching the
    homogeneous initial state the scheme assumes by default.
    """

    f: ScalarField | None = None
    g: VectorField | None = None
    p0: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    u0: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None


@dataclass(frozen=True)
class SipConfig:
    """Interior penalty configuration: delta_e = delta0 on every edge,
    scaled by 1/|e|**beta_exp in the penalty form."""

    delta0: float
    beta_exp: float = 1.0

    def __post_init__(self):
        if not self.delta0 > 0:
            raise ValueError("sip.delta0 must be positive")
        if not self.beta_exp > 0:
            raise ValueError("sip.beta_exp must be positive")


def default_delta0(params: PhysParams, s: int) -> float:
    """Default penalty: scales with the elastic moduli and the square of
    the displacement polynomial degree plus one."""
    return 10.0 * (2.0 * params.mu + params.lam) * (s + 2) ** 2


@dataclass
class AssembledOperators:
    """All constant-in-time discrete operators of one configuration.

    Mp, Mq, D enter the flow block; A, C drive the mechanics solve;
    G pairs the broken displacement divergence with pressure tests
    (without the coupling coefficient b, applied at use sites).  Mv and
    Md are plain L2 masses of the flux and free displacement spaces,
    used for norms only.
    """

    Mp: sp.csr_matrix
    Mq: sp.csr_matrix
    D: sp.csr_matrix
    A: sp.csr_matrix
    C: sp.csr_matrix
    G: sp.csr_matrix
    Mv: sp.csr_matrix
    Md: sp.csr_matrix


def mass_norm(M: sp.spmatrix, x: np.ndarray) -> float:
    """Norm induced by a symmetric positive semidefinite mass matrix."""
    if x.size == 0:
        return 0.0
    return float(np.sqrt(max(x @ (M @ x), 0.0)))


# ---------------------------------------------------------------------------
# traces


def trace_ops(edge: Edge, values_K: np.ndarray, values_Kp: np.ndarray):
    """Jump and average of two-sided trace samples on an interior edge.

    ``values_K`` belongs to the lower-indexed adjacent cell; the jump is
    values_K - values_Kp and the average their mean, consistent with the
    stored edge normal.
    """
    if edge.boundary:
        raise ValueError("trace operators are defined on interior edges only")
    return values_K - values_Kp, 0.5 * (values_K + values_Kp)


# ---------------------------------------------------------------------------
# cell matrices


def _phys_disp_grads(spaces: Spaces, hx: float, hy: float) -> np.ndarray:
    g = spaces.d_vol_grads.copy()
    g[:, :, 0] /= hx
    g[:, :, 1] /= hy
    return g


def elasticity_cell_matrix(spaces: Spaces, hx: float, hy: float,
                           mu: float, lam: float) -> np.ndarray:
    """Volume stress-strain matrix of one cell, vector DOFs (node-major)."""
    w = spaces.volume_rule.weights * (hx * hy)
    Gp = _phys_disp_grads(spaces, hx, hy)
    Gw = Gp * w[None, :, None]
    S = np.einsum("aqk,bqk->ab", Gw, Gp)
    M1 = np.kron(S, np.eye(2))
    M2 = np.einsum("aqe,bqc->acbe", Gw, Gp)
    M3 = np.einsum("aqc,bqe->acbe", Gw, Gp)
    n = 2 * spaces.displacement.nloc_scalar
    return mu * (M1 + M2.reshape(n, n)) + lam * M3.reshape(n, n)


def _divergence_cell_matrix(spaces: Spaces, hx: float, hy: float) -> np.ndarray:
    """Pairing of displacement divergence against pressure tests on one cell."""
    w = spaces.volume_rule.weights * (hx * hy)
    Gp = _phys_disp_grads(spaces, hx, hy)
    psi_w = spaces.p_vol * w[None, :]
    loc = np.einsum("mq,aqc->mac", psi_w, Gp)
    return loc.reshape(spaces.pressure.nloc, 2 * spaces.displacement.nloc_scalar)


def _flux_mass_cell(spaces: Spaces, hx: float, hy: float, Kinv: np.ndarray) -> np.ndarray:
    w = spaces.volume_rule.weights * (hx * hy)
    V = spaces.rt_vol_vals.copy()
    V[:, :, 0] /= hy
    V[:, :, 1] /= hx
    Vw = V * w[None, :, None]
    return np.einsum("iqk,kl,jql->ij", Vw, Kinv, V)


def _flux_div_cell(spaces: Spaces) -> np.ndarray:
    """Divergence pairing; the Piola and volume scalings cancel exactly."""
    w = spaces.volume_rule.weights
    psi_w = spaces.p_vol * w[None, :]
    return np.einsum("mq,iq->mi", psi_w, spaces.rt_vol_divs)


def _disp_mass_cell(spaces: Spaces, hx: float, hy: float) -> np.ndarray:
    w = spaces.volume_rule.weights * (hx * hy)
    N = spaces.d_vol_vals
    S = np.einsum("aq,bq->ab", N * w[None, :], N)
    return np.kron(S, np.eye(2))


def _pressure_mass_cell(spaces: Spaces, hx: float, hy: float) -> np.ndarray:
    """Exact diagonal mass of the Gauss-nodal pressure basis."""
    _, w1 = gauss_points_1d(spaces.s + 1)
    return (hx * hy) * np.tile(w1, spaces.s + 1) * np.repeat(w1, spaces.s + 1)


# ---------------------------------------------------------------------------
# edge machinery

_EDGE_SIDES = {
    "vertical": ("right", "left", np.array([1.0, 0.0])),
    "horizontal": ("top", "bottom", np.array([0.0, 1.0])),
}


def _edge_orientation(edge: Edge) -> str:
    return "vertical" if edge.normal[0] != 0.0 else "horizontal"


def _edge_tractions(spaces: Spaces, side: str, hx: float, hy: float,
                    mu: float, lam: float, nu: np.ndarray) -> np.ndarray:
    """Stress-times-normal of each scalar-node/component pair on one side,
    shape (nloc_scalar, 2, nq, 2) indexed (node, component, point, axis)."""
    G = spaces.d_edge_grads[side].copy()
    G[:, :, 0] /= hx
    G[:, :, 1] /= hy
    gn = np.einsum("aqk,k->aq", G, nu)
    ns, nq = G.shape[0], G.shape[1]
    T = np.zeros((ns, 2, nq, 2))
    for c in range(2):
        for k in range(2):
            T[:, c, :, k] = mu * ((c == k) * gn + nu[c] * G[:, :, k]) \
                + lam * G[:, :, c] * nu[k]
    return T


def _edge_local_sip(spaces: Spaces, orientation: str, length: float,
                    hx: float, hy: float, mu: float, lam: float,
                    delta0: float, beta_exp: float):
    """Local penalty and consistency matrices of one interior edge.

    Row/column blocks are ordered (lower cell, higher cell) with the
    node-major vector layout inside each block.
    """
    side_K, side_Kp, nu = _EDGE_SIDES[orientation]
    w = spaces.edge_rule.weights * length
    ns = spaces.displacement.nloc_scalar
    n = 2 * ns
    N = [spaces.d_edge_vals[side_K], spaces.d_edge_vals[side_Kp]]
    T = [
        _edge_tractions(spaces, side_K, hx, hy, mu, lam, nu),
        _edge_tractions(spaces, side_Kp, hx, hy, mu, lam, nu),
    ]
    signs = (1.0, -1.0)

    pen = delta0 / length**beta_exp
    Jdelta = np.zeros((2 * n, 2 * n))
    Jd = np.zeros((2 * n, 2 * n))
    for X in range(2):
        for Y in range(2):
            S = np.einsum("aq,bq->ab", N[X] * w[None, :], N[Y])
            Jdelta[X * n:(X + 1) * n, Y * n:(Y + 1) * n] = \
                pen * signs[X] * signs[Y] * np.kron(S, np.eye(2))
            A1 = np.einsum("acqe,bq->acbe", T[X], N[Y] * w[None, :])
            A2 = np.einsum("beqc,aq->acbe", T[Y], N[X] * w[None, :])
            Jd[X * n:(X + 1) * n, Y * n:(Y + 1) * n] = \
                0.5 * (signs[Y] * A1.reshape(n, n) + signs[X] * A2.reshape(n, n))
    return Jdelta, Jd


def _edge_local_jp(spaces: Spaces, orientation: str, length: float):
    """Local pressure-average against displacement-jump pairing.

    Returns a (2*nloc_d, 2*nloc_p) matrix: displacement rows blocked by
    (lower, higher) cell, pressure columns likewise.
    """
    side_K, side_Kp, nu = _EDGE_SIDES[orientation]
    w = spaces.edge_rule.weights * length
    ns = spaces.displacement.nloc_scalar
    n = 2 * ns
    npb = spaces.pressure.nloc
    N = [spaces.d_edge_vals[side_K], spaces.d_edge_vals[side_Kp]]
    P = [spaces.p_edge[side_K], spaces.p_edge[side_Kp]]
    signs = (1.0, -1.0)
    Jp = np.zeros((2 * n, 2 * npb))
    for Y in range(2):
        for X in range(2):
            S = np.einsum("bq,mq->bm", N[Y] * w[None, :], P[X])
            block = np.zeros((n, npb))
            for e in range(2):
                if nu[e] != 0.0:
                    block[e::2, :] = 0.5 * signs[Y] * nu[e] * S
            Jp[Y * n:(Y + 1) * n, X * npb:(X + 1) * npb] = block
    return Jp


def _interior_edge_cells(mesh: Mesh, e: int) -> tuple[int, int]:
    cK, cKp = mesh.edges[e].cells
    assert cKp is not None
    return cK, cKp


# ---------------------------------------------------------------------------
# operator assembly


def assemble_flow_blocks(mesh: Mesh, spaces: Spaces, params: PhysParams):
    """Pressure mass Mp, permeability-weighted flux mass Mq, divergence D."""
    nc = mesh.num_cells
    nlp = spaces.pressure.nloc
    Kinv = params.K_inv

    mp_data = np.empty(nc * nlp)
    cache_mp: dict[tuple[float, float], np.ndarray] = {}
    cache_mq: dict[tuple[float, float], np.ndarray] = {}
    d_loc = _flux_div_cell(spaces)

    rows_q, cols_q, data_q = [], [], []
    rows_d, cols_d, data_d = [], [], []
    for c in range(nc):
        hx, hy = map(float, mesh.cell_extents[c])
        key = (hx, hy)
        if key not in cache_mp:
            cache_mp[key] = _pressure_mass_cell(spaces, hx, hy)
            cache_mq[key] = _flux_mass_cell(spaces, hx, hy, Kinv)
        mp_data[c * nlp:(c + 1) * nlp] = cache_mp[key]
        vdofs = spaces.flux.cell_dofs[c]
        pdofs = np.arange(c * nlp, (c + 1) * nlp)
        mq = cache_mq[key]
        rows_q.append(np.repeat(vdofs, vdofs.size))
        cols_q.append(np.tile(vdofs, vdofs.size))
        data_q.append(mq.ravel())
        rows_d.append(np.repeat(pdofs, vdofs.size))
        cols_d.append(np.tile(vdofs, pdofs.size))
        data_d.append(d_loc.ravel())

    ndw, ndv = spaces.pressure.ndof, spaces.flux.ndof
    Mp = sp.diags(mp_data, format="csr")
    Mq = sp.coo_matrix(
        (np.concatenate(data_q), (np.concatenate(rows_q), np.concatenate(cols_q))),
        shape=(ndv, ndv),
    ).tocsr()
    D = sp.coo_matrix(
        (np.concatenate(data_d), (np.concatenate(rows_d), np.concatenate(cols_d))),
        shape=(ndw, ndv),
    ).tocsr()
    return Mp, Mq, D


def assemble_elasticity(mesh: Mesh, spaces: Spaces, params: PhysParams,
                        sip: SipConfig) -> sp.csr_matrix:
    """Stress-strain volume form plus jump penalty minus the symmetric
    consistency form, restricted to the free displacement DOFs."""
    disp = spaces.displacement
    nld = disp.nloc
    rows, cols, data = [], [], []

    cache_vol: dict[tuple[float, float], np.ndarray] = {}
    for c in range(mesh.num_cells):
        hx, hy = map(float, mesh.cell_extents[c])
        key = (hx, hy)
        if key not in cache_vol:
            cache_vol[key] = elasticity_cell_matrix(spaces, hx, hy, params.mu, params.lam)
        dofs = np.arange(c * nld, (c + 1) * nld)
        rows.append(np.repeat(dofs, nld))
        cols.append(np.tile(dofs, nld))
        data.append(cache_vol[key].ravel())

    cache_edge: dict[tuple, tuple[np.ndarray, np.ndarray]] = {}
    for e in mesh.interior_edges:
        edge = mesh.edges[e]
        orientation = _edge_orientation(edge)
        cK, cKp = _interior_edge_cells(mesh, e)
        hx, hy = map(float, mesh.cell_extents[cK])
        key = (orientation, edge.length, hx, hy)
        if key not in cache_edge:
            cache_edge[key] = _edge_local_sip(
                spaces, orientation, edge.length, hx, hy,
                params.mu, params.lam, sip.delta0, sip.beta_exp,
            )
        Jdelta, Jd = cache_edge[key]
        dofs = np.concatenate([
            np.arange(cK * nld, (cK + 1) * nld),
            np.arange(cKp * nld, (cKp + 1) * nld),
        ])
        rows.append(np.repeat(dofs, dofs.size))
        cols.append(np.tile(dofs, dofs.size))
        data.append((Jdelta - Jd).ravel())

    A_raw = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(disp.ndof_raw, disp.ndof_raw),
    ).tocsr()
    free = disp.free_dofs
    return A_raw[free][:, free].tocsr()


def assemble_coupling(mesh: Mesh, spaces: Spaces, params: PhysParams):
    """Coupling operators C (pressure to mechanics) and G (divergence pairing).

    C realizes b * (volume pairing of pressure against displacement
    divergence minus the edge pairing of the pressure average against the
    displacement jump), on free displacement rows.  G is the plain broken
    divergence pairing with pressure tests; the coupling coefficient is
    applied where G is used.
    """
    disp = spaces.displacement
    nld = disp.nloc
    nlp = spaces.pressure.nloc
    ndw = spaces.pressure.ndof

    rows_g, cols_g, data_g = [], [], []
    cache_g: dict[tuple[float, float], np.ndarray] = {}
    for c in range(mesh.num_cells):
        hx, hy = map(float, mesh.cell_extents[c])
        key = (hx, hy)
        if key not in cache_g:
            cache_g[key] = _divergence_cell_matrix(spaces, hx, hy)
        pdofs = np.arange(c * nlp, (c + 1) * nlp)
        ddofs = np.arange(c * nld, (c + 1) * nld)
        rows_g.append(np.repeat(pdofs, nld))
        cols_g.append(np.tile(ddofs, nlp))
        data_g.append(cache_g[key].ravel())
    G_raw = sp.coo_matrix(
        (np.concatenate(data_g), (np.concatenate(rows_g), np.concatenate(cols_g))),
        shape=(ndw, disp.ndof_raw),
    ).tocsr()

    rows_j, cols_j, data_j = [], [], []
    cache_jp: dict[tuple, np.ndarray] = {}
    for e in mesh.interior_edges:
        edge = mesh.edges[e]
        orientation = _edge_orientation(edge)
        cK, cKp = _interior_edge_cells(mesh, e)
        key = (orientation, edge.length)
        if key not in cache_jp:
            cache_jp[key] = _edge_local_jp(spaces, orientation, edge.length)
        Jp = cache_jp[key]
        ddofs = np.concatenate([
            np.arange(cK * nld, (cK + 1) * nld),
            np.arange(cKp * nld, (cKp + 1) * nld),
        ])
        pdofs = np.concatenate([
            np.arange(cK * nlp, (cK + 1) * nlp),
            np.arange(cKp * nlp, (cKp + 1) * nlp),
        ])
        rows_j.append(np.repeat(ddofs, pdofs.size))
        cols_j.append(np.tile(pdofs, ddofs.size))
        data_j.append(Jp.ravel())
    if rows_j:
        Jp_raw = sp.coo_matrix(
            (np.concatenate(data_j), (np.concatenate(rows_j), np.concatenate(cols_j))),
            shape=(disp.ndof_raw, ndw),
        ).tocsr()
    else:
        Jp_raw = sp.csr_matrix((disp.ndof_raw, ndw))

    free = disp.free_dofs
    C = (params.b * (G_raw.T.tocsr() - Jp_raw))[free].tocsr()
    G = G_raw[:, free].tocsr()
    return C, G


def assemble_aux_masses(mesh: Mesh, spaces: Spaces):
    """Plain L2 mass matrices of the flux space and the free displacement DOFs."""
    nc = mesh.num_cells
    nld = spaces.displacement.nloc
    eye = np.eye(2)

    rows_v, cols_v, data_v = [], [], []
    rows_d, cols_d, data_d = [], [], []
    cache_v: dict[tuple[float, float], np.ndarray] = {}
    cache_d: dict[tuple[float, float], np.ndarray] = {}
    for c in range(nc):
        hx, hy = map(float, mesh.cell_extents[c])
        key = (hx, hy)
        if key not in cache_v:
            cache_v[key] = _flux_mass_cell(spaces, hx, hy, eye)
            cache_d[key] = _disp_mass_cell(spaces, hx, hy)
        vdofs = spaces.flux.cell_dofs[c]
        rows_v.append(np.repeat(vdofs, vdofs.size))
        cols_v.append(np.tile(vdofs, vdofs.size))
        data_v.append(cache_v[key].ravel())
        ddofs = np.arange(c * nld, (c + 1) * nld)
        rows_d.append(np.repeat(ddofs, nld))
        cols_d.append(np.tile(ddofs, nld))
        data_d.append(cache_d[key].ravel())

    Mv = sp.coo_matrix(
        (np.concatenate(data_v), (np.concatenate(rows_v), np.concatenate(cols_v))),
        shape=(spaces.flux.ndof, spaces.flux.ndof),
    ).tocsr()
    Md_raw = sp.coo_matrix(
        (np.concatenate(data_d), (np.concatenate(rows_d), np.concatenate(cols_d))),
        shape=(spaces.displacement.ndof_raw, spaces.displacement.ndof_raw),
    ).tocsr()
    free = spaces.displacement.free_dofs
    return Mv, Md_raw[free][:, free].tocsr()


def assemble_all(mesh: Mesh, spaces: Spaces, params: PhysParams,
                 sip: SipConfig) -> AssembledOperators:
    """Assemble every constant operator of the scheme once."""
    Mp, Mq, D = assemble_flow_blocks(mesh, spaces, params)
    A = assemble_elasticity(mesh, spaces, params, sip)
    C, G = assemble_coupling(mesh, spaces, params)
    Mv, Md = assemble_aux_masses(mesh, spaces)
    return AssembledOperators(Mp=Mp, Mq=Mq, D=D, A=A, C=C, G=G, Mv=Mv, Md=Md)


# ---------------------------------------------------------------------------
# loads, interpolation, slab right-hand sides


def _cell_quad_points(mesh: Mesh, spaces: Spaces):
    """Physical volume quadrature points of every cell, shape (nc, nq, 2)."""
    ref = spaces.volume_rule.points
    origins = mesh.vertices[mesh.cells[:, 0]]
    ext = mesh.cell_extents
    return origins[:, None, :] + ref[None, :, :] * ext[:, None, :]


def pressure_load(mesh: Mesh, spaces: Spaces, f: ScalarField | None,
                  t: float) -> np.ndarray:
    """Vector of the volumetric source paired with pressure test functions."""
    if f is None:
        return np.zeros(spaces.pressure.ndof)
    pts = _cell_quad_points(mesh, spaces)
    fv = np.asarray(f(pts[:, :, 0].ravel(), pts[:, :, 1].ravel(), t), dtype=float)
    fv = fv.reshape(pts.shape[0], pts.shape[1])
    w = spaces.volume_rule.weights
    areas = mesh.cell_extents[:, 0] * mesh.cell_extents[:, 1]
    loc = np.einsum("cq,mq->cm", fv * w[None, :], spaces.p_vol)
    return (loc * areas[:, None]).ravel()


def displacement_load(mesh: Mesh, spaces: Spaces, g: VectorField | None,
                      t: float) -> np.ndarray:
    """Vector of the body force paired with free displacement test functions."""
    disp = spaces.displacement
    if g is None:
        return np.zeros(disp.nfree)
    pts = _cell_quad_points(mesh, spaces)
    gv = np.asarray(g(pts[:, :, 0].ravel(), pts[:, :, 1].ravel(), t), dtype=float)
    gv = gv.reshape(pts.shape[0], pts.shape[1], 2)
    w = spaces.volume_rule.weights
    areas = mesh.cell_extents[:, 0] * mesh.cell_extents[:, 1]
    loc = np.einsum("cqk,aq->cak", gv * w[None, :, None], spaces.d_vol_vals)
    raw = (loc * areas[:, None, None]).reshape(mesh.num_cells, disp.nloc).ravel()
    return raw[disp.free_dofs]


def interpolate_pressure(mesh: Mesh, spaces: Spaces,
                         func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """Coefficients of the nodal interpolant of a scalar field."""
    s = spaces.s
    x1, _ = gauss_points_1d(s + 1)
    ref = np.column_stack([np.tile(x1, s + 1), np.repeat(x1, s + 1)])
    origins = mesh.vertices[mesh.cells[:, 0]]
    pts = origins[:, None, :] + ref[None, :, :] * mesh.cell_extents[:, None, :]
    vals = np.asarray(func(pts[:, :, 0].ravel(), pts[:, :, 1].ravel()), dtype=float)
    return vals.reshape(-1)


def interpolate_displacement(mesh: Mesh, spaces: Spaces,
                             func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """Raw nodal interpolant of a vector field (unconstrained numbering)."""
    from .fem_spaces import lobatto_points

    l = spaces.displacement.l
    x1 = lobatto_points(l + 1)
    ref = np.column_stack([np.tile(x1, l + 1), np.repeat(x1, l + 1)])
    origins = mesh.vertices[mesh.cells[:, 0]]
    pts = origins[:, None, :] + ref[None, :, :] * mesh.cell_extents[:, None, :]
    vals = np.asarray(func(pts[:, :, 0].ravel(), pts[:, :, 1].ravel()), dtype=float)
    return vals.reshape(-1)


def assemble_slab_rhs(ops: AssembledOperators, mesh: Mesh, spaces: Spaces,
                      sources: SourceData, basis, params: PhysParams,
                      tau_n: float, t_left: float,
                      p_minus: np.ndarray, u_minus: np.ndarray, i: int):
    """Right-hand-side vectors of slab node i.

    The flow vector carries the source sampled at the node time weighted
    by tau_n * beta_i plus the gamma_i-weighted storage and divergence
    history of the previous slab end state; the mechanics vector carries
    the body force at the node time.
    """
    if p_minus is None or u_minus is None:
        raise ValueError("slab right-hand side requires the previous end state")
    t_i = t_left + tau_n * float(basis.nodes[i])
    flow = tau_n * float(basis.beta[i]) * pressure_load(mesh, spaces, sources.f, t_i)
    hist = params.c0 * (ops.Mp @ p_minus) + params.b * (ops.G @ u_minus)
    flow += float(basis.gamma[i]) * hist
    mech = params.rho_b * displacement_load(mesh, spaces, sources.g, t_i)
    return flow, mech
