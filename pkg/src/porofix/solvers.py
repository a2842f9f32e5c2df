"""Per-slab split iteration, monolithic coupled solve, and time marching.

The split alternates the flow block solve (all slab nodes coupled, with
lagged displacement and the stabilization term on lagged pressure) and
the node-by-node mechanics solves with fresh pressure, until the relative
pressure increment drops below tolerance.  The monolithic solve couples
every unknown of the slab in one system with the stabilization terms
removed; it is the fixed point the split converges to and serves as the
reference in the verification diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import (
    AssembledOperators,
    PhysParams,
    SourceData,
    assemble_slab_rhs,
    mass_norm,
)
from .fem_spaces import Spaces
from .mesh import Mesh
from .time_slab import SlabBasis, SlabState, TimePartition, lagrange_weights

_REFINE_STEPS = 2
_REFINE_TARGET = 1e-13


@dataclass(frozen=True)
class SplitConfig:
    """Stabilization and stopping control of the split iteration."""

    L: float
    tol: float = 1e-10
    max_iter: int = 200
    warm_start: bool = True

    def __post_init__(self):
        if self.L < 0:
            raise ValueError("split.L must be nonnegative")
        if not self.tol > 0:
            raise ValueError("split.tol must be positive")
        if self.max_iter < 1:
            raise ValueError("split.max_iter must be at least 1")


def auto_stabilization(params: PhysParams) -> float:
    """Admissible default stabilization b^2 / (2 lambda)."""
    return params.b**2 / (2.0 * params.lam)


@dataclass
class IterationReport:
    """Increment history of one slab's split iteration.

    ``ratios[k]`` is the pressure-increment ratio of sweep k+1 to sweep k
    and is NaN for the first sweep.  ``sp_norms`` is filled by the
    contraction diagnostics when a monolithic reference is available.
    """

    dp_norms: list[float] = field(default_factory=list)
    du_norms: list[float] = field(default_factory=list)
    ratios: list[float] = field(default_factory=list)
    sp_norms: list[float] | None = None
    stop: str = "max_iter"
    iterates: list[SlabState] | None = None

    @property
    def iterations(self) -> int:
        return len(self.dp_norms)


@dataclass
class SlabResult:
    """Converged state of one slab plus its end-time field coefficients."""

    state: SlabState
    report: IterationReport | None
    p_end: np.ndarray
    q_end: np.ndarray
    u_end: np.ndarray
    t_end: float


@dataclass
class Trajectory:
    """Slab results in time order."""

    slabs: list[SlabResult] = field(default_factory=list)

    @property
    def num_slabs(self) -> int:
        return len(self.slabs)

    @property
    def end(self) -> SlabResult:
        return self.slabs[-1]


class FactorizedOperator:
    """Sparse LU factorization with residual-driven iterative refinement.

    With ``require_spd`` the factorization keeps pivots on the diagonal
    and checks their signs, so an indefinite matrix (penalty too small)
    is reported instead of silently factorized.
    """

    def __init__(self, matrix: sp.spmatrix, tag: str = "system",
                 require_spd: bool = False):
        self.tag = tag
        self.matrix = matrix.tocsc()
        self.n = self.matrix.shape[0]
        if self.n == 0:
            self.lu = None
            return
        try:
            if require_spd:
                self.lu = spla.splu(
                    self.matrix,
                    diag_pivot_thresh=0.0,
                    options={"SymmetricMode": True},
                )
            else:
                self.lu = spla.splu(self.matrix)
        except RuntimeError as exc:
            if require_spd:
                raise RuntimeError(
                    f"{tag}: matrix is not positive definite "
                    f"(factorization failed: {exc}); increase sip.delta0"
                ) from None
            raise RuntimeError(f"{tag}: singular system ({exc})") from None
        if require_spd:
            d = self.lu.U.diagonal()
            if not np.all(np.isfinite(d)) or np.any(d <= 0):
                raise RuntimeError(
                    f"{tag}: matrix is not positive definite; increase sip.delta0"
                )

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0)
        x = self.lu.solve(rhs)
        nb = np.linalg.norm(rhs)
        if nb == 0.0:
            return np.zeros_like(rhs)
        for _ in range(_REFINE_STEPS):
            r = rhs - self.matrix @ x
            if np.linalg.norm(r) <= _REFINE_TARGET * nb:
                break
            x = x + self.lu.solve(r)
        return x


def linear_solve(matrix: sp.spmatrix, rhs: np.ndarray, tag: str = "system") -> np.ndarray:
    """Direct sparse solve with a small relative-residual guarantee."""
    return FactorizedOperator(matrix, tag=tag).solve(np.asarray(rhs, dtype=float))


class FlowSystem:
    """Factorized saddle-point block of one slab's flow subproblem.

    Unknowns are the pressure coefficients of all slab nodes followed by
    the flux coefficients of all slab nodes.  The system matrix depends
    on the slab length, the stabilization L, and the material data only,
    so it is reused across iterations and across slabs of equal length.
    """

    def __init__(self, ops: AssembledOperators, basis: SlabBasis,
                 params: PhysParams, L: float, tau_n: float):
        self.ops = ops
        self.basis = basis
        self.params = params
        self.L = float(L)
        self.tau_n = float(tau_n)
        r1 = basis.r + 1
        self.r1 = r1
        self.ndw = ops.Mp.shape[0]
        self.ndv = ops.Mq.shape[0]
        eye = sp.identity(r1, format="csr")
        top = sp.hstack([
            (params.c0 + self.L) * sp.kron(basis.alpha, ops.Mp),
            self.tau_n * sp.kron(sp.diags(basis.beta), ops.D),
        ])
        bottom = sp.hstack([
            -sp.kron(eye, ops.D.T),
            sp.kron(eye, ops.Mq),
        ])
        matrix = sp.vstack([top, bottom]).tocsc()
        self.op = FactorizedOperator(matrix, tag=f"flow block (tau={tau_n:g})")

    def solve(self, flow_rhs: np.ndarray, P_lag: np.ndarray,
              U_lag: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """One flow sweep given the per-node base right-hand sides and the
        lagged pressure/displacement coefficient stacks."""
        alpha = self.basis.alpha
        rhs_p = flow_rhs.copy()
        for i in range(self.r1):
            acc = np.zeros(self.ndw)
            for j in range(self.r1):
                a = alpha[i, j]
                if a == 0.0:
                    continue
                if self.L != 0.0:
                    acc += (self.L * a) * (self.ops.Mp @ P_lag[j])
                acc -= (self.params.b * a) * (self.ops.G @ U_lag[j])
            rhs_p[i] += acc
        rhs = np.concatenate([rhs_p.ravel(), np.zeros(self.r1 * self.ndv)])
        x = self.op.solve(rhs)
        P = x[: self.r1 * self.ndw].reshape(self.r1, self.ndw)
        Q = x[self.r1 * self.ndw:].reshape(self.r1, self.ndv)
        return P, Q


def solve_flow_step(ops: AssembledOperators, basis: SlabBasis, params: PhysParams,
                    L: float, tau_n: float, flow_rhs: np.ndarray,
                    P_lag: np.ndarray, U_lag: np.ndarray,
                    system: FlowSystem | None = None):
    """Solve the flow subproblem of one sweep over all slab nodes."""
    if system is None:
        system = FlowSystem(ops, basis, params, L, tau_n)
    return system.solve(flow_rhs, P_lag, U_lag)


class MechanicsSolver:
    """Positive-definite factorization of the elasticity operator."""

    def __init__(self, ops: AssembledOperators):
        self.ops = ops
        self.op = FactorizedOperator(ops.A, tag="elasticity", require_spd=True)

    def solve(self, P_i: np.ndarray, mech_rhs_i: np.ndarray) -> np.ndarray:
        return self.op.solve(self.ops.C @ P_i + mech_rhs_i)


def solve_mechanics_step(ops: AssembledOperators, P_i: np.ndarray,
                         mech_rhs_i: np.ndarray,
                         solver: MechanicsSolver | None = None) -> np.ndarray:
    """Solve the mechanics subproblem of one slab node with fresh pressure."""
    if solver is None:
        solver = MechanicsSolver(ops)
    return solver.solve(P_i, mech_rhs_i)


class MonolithicSystem:
    """Factorized fully coupled block of one slab (stabilization removed)."""

    def __init__(self, ops: AssembledOperators, basis: SlabBasis,
                 params: PhysParams, tau_n: float):
        self.ops = ops
        self.basis = basis
        self.params = params
        self.tau_n = float(tau_n)
        r1 = basis.r + 1
        self.r1 = r1
        self.ndw = ops.Mp.shape[0]
        self.ndv = ops.Mq.shape[0]
        self.nfree = ops.A.shape[0]
        eye = sp.identity(r1, format="csr")
        blocks = [
            [
                params.c0 * sp.kron(basis.alpha, ops.Mp),
                self.tau_n * sp.kron(sp.diags(basis.beta), ops.D),
                params.b * sp.kron(basis.alpha, ops.G),
            ],
            [-sp.kron(eye, ops.D.T), sp.kron(eye, ops.Mq), None],
            [-sp.kron(eye, ops.C), None, sp.kron(eye, ops.A)],
        ]
        matrix = sp.bmat(blocks, format="csc")
        self.op = FactorizedOperator(matrix, tag=f"monolithic block (tau={tau_n:g})")

    def solve(self, flow_rhs: np.ndarray, mech_rhs: np.ndarray) -> SlabState:
        rhs = np.concatenate([
            flow_rhs.ravel(),
            np.zeros(self.r1 * self.ndv),
            mech_rhs.ravel(),
        ])
        x = self.op.solve(rhs)
        nPw = self.r1 * self.ndw
        nQv = self.r1 * self.ndv
        P = x[:nPw].reshape(self.r1, self.ndw)
        Q = x[nPw:nPw + nQv].reshape(self.r1, self.ndv)
        U = x[nPw + nQv:].reshape(self.r1, self.nfree)
        return SlabState(P=P, Q=Q, U=U)


def _slab_rhs_stacks(ops, mesh, spaces, sources, basis, params, tau_n, t_left,
                     p_minus, u_minus):
    r1 = basis.r + 1
    flow = np.empty((r1, ops.Mp.shape[0]))
    mech = np.empty((r1, ops.A.shape[0]))
    for i in range(r1):
        flow[i], mech[i] = assemble_slab_rhs(
            ops, mesh, spaces, sources, basis, params, tau_n, t_left,
            p_minus, u_minus, i,
        )
    return flow, mech


def fixed_stress_slab(ops: AssembledOperators, mesh: Mesh, spaces: Spaces,
                      basis: SlabBasis, params: PhysParams, split: SplitConfig,
                      sources: SourceData, tau_n: float, t_left: float,
                      p_minus: np.ndarray, u_minus: np.ndarray,
                      flow_system: FlowSystem | None = None,
                      mechanics: MechanicsSolver | None = None,
                      cold_start: bool = False,
                      record_iterates: bool = False):
    """Run the split iteration on one slab until the pressure increment
    stagnates below tolerance; returns the last iterate and its report.

    When neither the stabilization lag nor the displacement coupling
    feeds back into the flow equation, the first sweep is already the
    fixed point and the iteration stops after one sweep.
    """
    r1 = basis.r + 1
    ndw = ops.Mp.shape[0]
    nfree = ops.A.shape[0]
    if flow_system is None:
        flow_system = FlowSystem(ops, basis, params, split.L, tau_n)
    if mechanics is None:
        mechanics = MechanicsSolver(ops)
    flow_rhs, mech_rhs = _slab_rhs_stacks(
        ops, mesh, spaces, sources, basis, params, tau_n, t_left, p_minus, u_minus
    )

    warm = split.warm_start and not cold_start
    P = np.tile(p_minus, (r1, 1)) if warm else np.zeros((r1, ndw))
    U = np.tile(u_minus, (r1, 1)) if warm else np.zeros((r1, nfree))
    Q = np.zeros((r1, ops.Mq.shape[0]))

    lagged = split.L > 0.0 or (nfree > 0 and params.b != 0.0)
    report = IterationReport(iterates=[] if record_iterates else None)
    prev_dp = None
    for _ in range(split.max_iter):
        P_new, Q_new = flow_system.solve(flow_rhs, P, U)
        U_new = np.empty_like(U)
        for i in range(r1):
            U_new[i] = mechanics.solve(P_new[i], mech_rhs[i])

        dp = max(mass_norm(ops.Mp, P_new[i] - P[i]) for i in range(r1))
        du = max(mass_norm(ops.Md, U_new[i] - U[i]) for i in range(r1))
        scale = max(max(mass_norm(ops.Mp, P_new[i]) for i in range(r1)), 1e-300)
        ratio = dp / prev_dp if (prev_dp is not None and prev_dp > 0) else float("nan")
        report.dp_norms.append(dp)
        report.du_norms.append(du)
        report.ratios.append(ratio)
        prev_dp = dp
        P, Q, U = P_new, Q_new, U_new
        if record_iterates:
            report.iterates.append(SlabState(P=P.copy(), Q=Q.copy(), U=U.copy()))
        if not lagged or dp <= split.tol * scale:
            report.stop = "converged"
            break
    return SlabState(P=P, Q=Q, U=U), report


def solve_monolithic_slab(ops: AssembledOperators, mesh: Mesh, spaces: Spaces,
                          basis: SlabBasis, params: PhysParams,
                          sources: SourceData, tau_n: float, t_left: float,
                          p_minus: np.ndarray, u_minus: np.ndarray,
                          system: MonolithicSystem | None = None) -> SlabState:
    """Solve the fully coupled slab system in one shot."""
    if system is None:
        system = MonolithicSystem(ops, basis, params, tau_n)
    flow_rhs, mech_rhs = _slab_rhs_stacks(
        ops, mesh, spaces, sources, basis, params, tau_n, t_left, p_minus, u_minus
    )
    return system.solve(flow_rhs, mech_rhs)


def slab_end_values(state: SlabState, basis: SlabBasis):
    """Left limits of the slab polynomials at the slab end."""
    w = lagrange_weights(basis, 1.0)
    p_end = np.tensordot(w, state.P, axes=(0, 0))
    q_end = np.tensordot(w, state.Q, axes=(0, 0))
    u_end = np.tensordot(w, state.U, axes=(0, 0))
    return p_end, q_end, u_end


def initial_history(ops: AssembledOperators, mesh: Mesh, spaces: Spaces,
                    sources: SourceData):
    """End-state vectors representing the initial condition."""
    from .assembly import interpolate_displacement, interpolate_pressure

    if sources.p0 is not None:
        p_minus = interpolate_pressure(mesh, spaces, sources.p0)
    else:
        p_minus = np.zeros(spaces.pressure.ndof)
    if sources.u0 is not None:
        raw = interpolate_displacement(mesh, spaces, sources.u0)
        u_minus = raw[spaces.displacement.free_dofs]
    else:
        u_minus = np.zeros(spaces.displacement.nfree)
    return p_minus, u_minus


def march(ops: AssembledOperators, mesh: Mesh, spaces: Spaces, basis: SlabBasis,
          params: PhysParams, split: SplitConfig, sources: SourceData,
          partition: TimePartition, mode: str = "split") -> Trajectory:
    """March over all slabs, feeding each slab the previous end state.

    ``mode`` selects the split iteration or the monolithic solve per
    slab.  Factorizations are cached per distinct slab length.
    """
    if mode not in ("split", "monolithic"):
        raise ValueError(f"unknown march mode {mode!r}")
    p_minus, u_minus = initial_history(ops, mesh, spaces, sources)
    mechanics = MechanicsSolver(ops) if mode == "split" else None
    flow_cache: dict[float, FlowSystem] = {}
    mono_cache: dict[float, MonolithicSystem] = {}
    traj = Trajectory()
    for n in range(partition.num_slabs):
        tau_n = partition.tau(n)
        t_left = float(partition.times[n])
        try:
            if mode == "split":
                if tau_n not in flow_cache:
                    flow_cache[tau_n] = FlowSystem(ops, basis, params, split.L, tau_n)
                state, report = fixed_stress_slab(
                    ops, mesh, spaces, basis, params, split, sources,
                    tau_n, t_left, p_minus, u_minus,
                    flow_system=flow_cache[tau_n], mechanics=mechanics,
                )
            else:
                if tau_n not in mono_cache:
                    mono_cache[tau_n] = MonolithicSystem(ops, basis, params, tau_n)
                state = solve_monolithic_slab(
                    ops, mesh, spaces, basis, params, sources,
                    tau_n, t_left, p_minus, u_minus, system=mono_cache[tau_n],
                )
                report = None
        except RuntimeError as exc:
            raise RuntimeError(f"slab {n + 1}: {exc}") from None
        p_end, q_end, u_end = slab_end_values(state, basis)
        traj.slabs.append(SlabResult(
            state=state, report=report, p_end=p_end, q_end=q_end,
            u_end=u_end, t_end=float(partition.times[n + 1]),
        ))
        p_minus, u_minus = p_end, u_end
    return traj
