"""Manufactured solutions, error norms, observed orders, and split-versus-
monolithic contraction diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import sympy as sym

from .assembly import (
    AssembledOperators,
    PhysParams,
    SourceData,
    mass_norm,
)
from .fem_spaces import Spaces, gauss_points_1d
from .mesh import Mesh
from .solvers import (
    FlowSystem,
    MechanicsSolver,
    MonolithicSystem,
    SplitConfig,
    Trajectory,
    fixed_stress_slab,
    slab_end_values,
    solve_monolithic_slab,
)
from .time_slab import SlabBasis, SlabState, TimePartition, eval_polynomial


# ---------------------------------------------------------------------------
# manufactured solutions

_X, _Y, _T = sym.symbols("x y t")


def _lambdify_scalar(expr) -> Callable:
    fn = sym.lambdify((_X, _Y, _T), expr, modules="numpy")

    def call(x, y, t):
        x = np.asarray(x, dtype=float)
        out = fn(x, y, t)
        return np.broadcast_to(np.asarray(out, dtype=float), x.shape).copy()

    return call


def _lambdify_vector(exprs) -> Callable:
    fns = [sym.lambdify((_X, _Y, _T), e, modules="numpy") for e in exprs]

    def call(x, y, t):
        x = np.asarray(x, dtype=float)
        cols = [
            np.broadcast_to(np.asarray(fn(x, y, t), dtype=float), x.shape)
            for fn in fns
        ]
        return np.stack(cols, axis=-1)

    return call


@dataclass
class ManufacturedSolution:
    """Closed-form fields with the forcing that makes them exact.

    All callables are vectorized over point arrays; ``q`` is the Darcy
    flux of the exact pressure and ``div_u`` the displacement divergence.
    """

    p: Callable
    u: Callable
    q: Callable
    div_u: Callable
    sources: SourceData
    params: PhysParams
    p_expr: sym.Expr
    u_expr: tuple[sym.Expr, sym.Expr]


def mms_forcing(p_exact, u_exact, params: PhysParams) -> SourceData:
    """Forcing fields obtained by substituting exact fields into the
    mass-balance and momentum equations.

    ``p_exact`` is a sympy expression (or string) in x, y, t and
    ``u_exact`` a pair of them.  The volumetric source is the time
    derivative of the storage plus coupled divergence content minus the
    divergence of the Darcy flux, and the body force balances the
    effective-stress divergence minus the pore-pressure gradient term.
    """
    p = sym.sympify(p_exact)
    ux, uy = (sym.sympify(e) for e in u_exact)
    K = sym.Matrix(params.K)

    div_u = sym.diff(ux, _X) + sym.diff(uy, _Y)
    grad_p = sym.Matrix([sym.diff(p, _X), sym.diff(p, _Y)])
    flux = -K * grad_p
    f = sym.diff(params.c0 * p + params.b * div_u, _T) \
        + sym.diff(flux[0], _X) + sym.diff(flux[1], _Y)

    eps = sym.Matrix([
        [sym.diff(ux, _X), (sym.diff(ux, _Y) + sym.diff(uy, _X)) / 2],
        [(sym.diff(ux, _Y) + sym.diff(uy, _X)) / 2, sym.diff(uy, _Y)],
    ])
    sigma = 2 * params.mu * eps + params.lam * div_u * sym.eye(2) \
        - params.b * p * sym.eye(2)
    g = [
        -(sym.diff(sigma[0, 0], _X) + sym.diff(sigma[0, 1], _Y)) / params.rho_b,
        -(sym.diff(sigma[1, 0], _X) + sym.diff(sigma[1, 1], _Y)) / params.rho_b,
    ]

    f = sym.simplify(f)
    g = [sym.simplify(gi) for gi in g]
    return SourceData(f=_lambdify_scalar(f), g=_lambdify_vector(g))


def manufactured_solution(p_exact, u_exact, params: PhysParams) -> ManufacturedSolution:
    """Bundle exact fields, their derived quantities, and the forcing."""
    p = sym.sympify(p_exact)
    ux, uy = (sym.sympify(e) for e in u_exact)
    K = sym.Matrix(params.K)
    grad_p = sym.Matrix([sym.diff(p, _X), sym.diff(p, _Y)])
    flux = -K * grad_p
    div_u = sym.diff(ux, _X) + sym.diff(uy, _Y)
    return ManufacturedSolution(
        p=_lambdify_scalar(p),
        u=_lambdify_vector((ux, uy)),
        q=_lambdify_vector((flux[0], flux[1])),
        div_u=_lambdify_scalar(div_u),
        sources=mms_forcing(p, (ux, uy), params),
        params=params,
        p_expr=p,
        u_expr=(ux, uy),
    )


def mms_flow(params: PhysParams, Lx: float = 1.0, Ly: float = 1.0) -> ManufacturedSolution:
    """Flow-dominated family: a separable pressure, zero displacement."""
    p = _T * sym.sin(sym.pi * _X / Lx) * sym.sin(sym.pi * _Y / Ly)
    return manufactured_solution(p, (sym.Integer(0), sym.Integer(0)), params)


def mms_coupled(params: PhysParams, Lx: float = 1.0, Ly: float = 1.0) -> ManufacturedSolution:
    """Fully coupled family: matching separable pressure and displacement."""
    sx = sym.sin(sym.pi * _X / Lx)
    sy = sym.sin(sym.pi * _Y / Ly)
    p = _T * sx * sy
    return manufactured_solution(p, (_T * sx * sy, _T * sx * sy), params)


# ---------------------------------------------------------------------------
# error norms


@dataclass
class ErrorReport:
    """End-time and time-integrated discretization errors."""

    err_p_T: float
    err_q_T: float
    err_u_T: float
    err_p_L2L2: float
    err_q_L2L2: float
    err_u_L2L2: float


def _cell_points(mesh: Mesh, spaces: Spaces):
    ref = spaces.volume_rule.points
    origins = mesh.vertices[mesh.cells[:, 0]]
    return origins[:, None, :] + ref[None, :, :] * mesh.cell_extents[:, None, :]


def l2_error_pressure(mesh: Mesh, spaces: Spaces, pvec: np.ndarray,
                      exact: Callable, t: float) -> float:
    pts = _cell_points(mesh, spaces)
    ph = np.einsum("mq,cm->cq", spaces.p_vol,
                   pvec.reshape(mesh.num_cells, spaces.pressure.nloc))
    pe = exact(pts[:, :, 0].ravel(), pts[:, :, 1].ravel(), t).reshape(ph.shape)
    w = spaces.volume_rule.weights
    areas = mesh.cell_extents[:, 0] * mesh.cell_extents[:, 1]
    return float(np.sqrt(np.sum(areas[:, None] * w[None, :] * (ph - pe) ** 2)))


def l2_error_flux(mesh: Mesh, spaces: Spaces, qvec: np.ndarray,
                  exact: Callable, t: float) -> float:
    pts = _cell_points(mesh, spaces)
    w = spaces.volume_rule.weights
    total = 0.0
    for c in range(mesh.num_cells):
        hx, hy = map(float, mesh.cell_extents[c])
        V = spaces.rt_vol_vals.copy()
        V[:, :, 0] /= hy
        V[:, :, 1] /= hx
        coeffs = qvec[spaces.flux.cell_dofs[c]]
        qh = np.einsum("i,iqk->qk", coeffs, V)
        qe = exact(pts[c, :, 0], pts[c, :, 1], t)
        total += hx * hy * np.sum(w[:, None] * (qh - qe) ** 2)
    return float(np.sqrt(total))


def l2_error_displacement(mesh: Mesh, spaces: Spaces, u_free: np.ndarray,
                          exact: Callable, t: float) -> float:
    disp = spaces.displacement
    raw = disp.scatter_free(u_free).reshape(mesh.num_cells, disp.nloc_scalar, 2)
    pts = _cell_points(mesh, spaces)
    uh = np.einsum("cak,aq->cqk", raw, spaces.d_vol_vals)
    ue = exact(pts[:, :, 0].ravel(), pts[:, :, 1].ravel(), t).reshape(uh.shape)
    w = spaces.volume_rule.weights
    areas = mesh.cell_extents[:, 0] * mesh.cell_extents[:, 1]
    return float(np.sqrt(np.sum(
        areas[:, None, None] * w[None, :, None] * (uh - ue) ** 2
    )))


def error_norms(trajectory: Trajectory, exact: ManufacturedSolution,
                mesh: Mesh, spaces: Spaces, partition: TimePartition,
                basis: SlabBasis) -> ErrorReport:
    """End-time errors from the final slab plus slab-quadratured
    time-integrated errors of all three fields."""
    T = partition.T
    end = trajectory.end
    err_p_T = l2_error_pressure(mesh, spaces, end.p_end, exact.p, T)
    err_q_T = l2_error_flux(mesh, spaces, end.q_end, exact.q, T)
    err_u_T = l2_error_displacement(mesh, spaces, end.u_end, exact.u, T)

    tq, wq = gauss_points_1d(basis.r + 2)
    acc = np.zeros(3)
    for n, slab in enumerate(trajectory.slabs):
        tau_n = partition.tau(n)
        t_left = float(partition.times[n])
        for that, w in zip(tq, wq):
            t = t_left + tau_n * float(that)
            p_t = eval_polynomial(basis, slab.state.P, float(that))
            q_t = eval_polynomial(basis, slab.state.Q, float(that))
            u_t = eval_polynomial(basis, slab.state.U, float(that))
            acc[0] += tau_n * w * l2_error_pressure(mesh, spaces, p_t, exact.p, t) ** 2
            acc[1] += tau_n * w * l2_error_flux(mesh, spaces, q_t, exact.q, t) ** 2
            acc[2] += tau_n * w * l2_error_displacement(mesh, spaces, u_t, exact.u, t) ** 2
    return ErrorReport(
        err_p_T=err_p_T, err_q_T=err_q_T, err_u_T=err_u_T,
        err_p_L2L2=float(np.sqrt(acc[0])),
        err_q_L2L2=float(np.sqrt(acc[1])),
        err_u_L2L2=float(np.sqrt(acc[2])),
    )


def observed_order(errors, sizes) -> np.ndarray:
    """Pairwise convergence orders of an error sequence against sizes.

    A zero error makes the order undefined; the corresponding entry is
    NaN so callers can report it as such.
    """
    errors = np.asarray(errors, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    if errors.size < 2 or errors.size != sizes.size:
        raise ValueError("need matching error and size sequences of length >= 2")
    if np.any(sizes <= 0):
        raise ValueError("sizes must be positive")
    orders = np.full(errors.size - 1, np.nan)
    for i in range(errors.size - 1):
        if errors[i] > 0 and errors[i + 1] > 0:
            orders[i] = np.log(errors[i] / errors[i + 1]) / np.log(sizes[i] / sizes[i + 1])
    return orders


# ---------------------------------------------------------------------------
# contraction diagnostics


@dataclass
class ContractionDiag:
    """Split-minus-monolithic error history of one slab.

    ``ep_norms`` and ``sp_norms`` have shape (iterations, nodes); the
    alpha-combined increments use the same coefficient array as the
    solver.  Trace errors are the end-of-slab left limits of the three
    fields' differences, one value per iteration.
    """

    ep_norms: np.ndarray
    sp_norms: np.ndarray
    ratios: np.ndarray
    ep_trace: np.ndarray
    eq_trace: np.ndarray
    eu_trace: np.ndarray
    final_rel_gap: float


def contraction_diagnostics(iterates: list[SlabState], mono: SlabState,
                            basis: SlabBasis, ops: AssembledOperators) -> ContractionDiag:
    """Compare the recorded split iterates of one slab with the monolithic
    solution of the same slab and history."""
    if not iterates:
        raise ValueError("contraction diagnostics need at least one recorded iterate")
    r1 = basis.r + 1
    niter = len(iterates)
    ep = np.zeros((niter, r1))
    spn = np.zeros((niter, r1))
    ept = np.zeros(niter)
    eqt = np.zeros(niter)
    eut = np.zeros(niter)
    for k, state in enumerate(iterates):
        E = state.P - mono.P
        S = basis.alpha @ E
        for i in range(r1):
            ep[k, i] = mass_norm(ops.Mp, E[i])
            spn[k, i] = mass_norm(ops.Mp, S[i])
        ept[k] = mass_norm(ops.Mp, eval_polynomial(basis, E, 1.0))
        eqt[k] = mass_norm(ops.Mv, eval_polynomial(basis, state.Q - mono.Q, 1.0))
        eut[k] = mass_norm(ops.Md, eval_polynomial(basis, state.U - mono.U, 1.0))
    ratios = np.full((niter, r1), np.nan)
    for k in range(1, niter):
        for i in range(r1):
            if spn[k - 1, i] > 0:
                ratios[k, i] = spn[k, i] / spn[k - 1, i]
    mono_scale = max(max(mass_norm(ops.Mp, mono.P[i]) for i in range(r1)), 1e-300)
    final_rel_gap = float(ep[-1].max() / mono_scale)
    return ContractionDiag(
        ep_norms=ep, sp_norms=spn, ratios=ratios,
        ep_trace=ept, eq_trace=eqt, eu_trace=eut,
        final_rel_gap=final_rel_gap,
    )


def run_contraction_study(ops: AssembledOperators, mesh: Mesh, spaces: Spaces,
                          basis: SlabBasis, params: PhysParams,
                          split: SplitConfig, sources: SourceData,
                          partition: TimePartition, cold_start: bool = True):
    """March the split with per-slab monolithic references.

    Every slab is solved twice from the same incoming history: once with
    the split (cold-started by default, so increment ratios reflect the
    contraction factor rather than the starting guess) and once
    monolithically.  The history advances with the split end state, and
    the per-slab diagnostics are returned alongside the trajectory.
    """
    from .solvers import SlabResult, Trajectory, initial_history

    p_minus, u_minus = initial_history(ops, mesh, spaces, sources)
    mechanics = MechanicsSolver(ops)
    flow_cache: dict[float, FlowSystem] = {}
    mono_cache: dict[float, MonolithicSystem] = {}
    traj = Trajectory()
    diags: list[ContractionDiag] = []
    for n in range(partition.num_slabs):
        tau_n = partition.tau(n)
        t_left = float(partition.times[n])
        if tau_n not in flow_cache:
            flow_cache[tau_n] = FlowSystem(ops, basis, params, split.L, tau_n)
            mono_cache[tau_n] = MonolithicSystem(ops, basis, params, tau_n)
        state, report = fixed_stress_slab(
            ops, mesh, spaces, basis, params, split, sources,
            tau_n, t_left, p_minus, u_minus,
            flow_system=flow_cache[tau_n], mechanics=mechanics,
            cold_start=cold_start, record_iterates=True,
        )
        mono = solve_monolithic_slab(
            ops, mesh, spaces, basis, params, sources,
            tau_n, t_left, p_minus, u_minus, system=mono_cache[tau_n],
        )
        diag = contraction_diagnostics(report.iterates, mono, basis, ops)
        report.sp_norms = list(diag.sp_norms.max(axis=1))
        report.iterates = None
        diags.append(diag)
        p_end, q_end, u_end = slab_end_values(state, basis)
        traj.slabs.append(SlabResult(
            state=state, report=report, p_end=p_end, q_end=q_end,
            u_end=u_end, t_end=float(partition.times[n + 1]),
        ))
        p_minus, u_minus = p_end, u_end
    return traj, diags


# ---------------------------------------------------------------------------
# locking indicator


def jump_indicator(mesh: Mesh, spaces: Spaces, pvec: np.ndarray) -> float:
    """Integrated squared pressure jump over all interior edges."""
    from .assembly import _EDGE_SIDES, _edge_orientation

    nlp = spaces.pressure.nloc
    total = 0.0
    w = spaces.edge_rule.weights
    for e in mesh.interior_edges:
        edge = mesh.edges[e]
        side_K, side_Kp, _ = _EDGE_SIDES[_edge_orientation(edge)]
        cK, cKp = edge.cells
        pK = spaces.p_edge[side_K].T @ pvec[cK * nlp:(cK + 1) * nlp]
        pKp = spaces.p_edge[side_Kp].T @ pvec[cKp * nlp:(cKp + 1) * nlp]
        total += edge.length * np.sum(w * (pK - pKp) ** 2)
    return float(total)
