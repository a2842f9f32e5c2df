"""Operator assembly against hand values and an independent quadrature
oracle built from plain per-cell and per-edge loops."""

import numpy as np
import pytest

import porofix as pf
from porofix import PhysParams, SipConfig, build_rect_mesh, dof_layout
from porofix.assembly import (
    assemble_slab_rhs,
    elasticity_cell_matrix,
    mass_norm,
    trace_ops,
)
from porofix.fem_spaces import (
    gauss_points_1d,
    lagrange_derivatives,
    lagrange_values,
    lobatto_points,
    nodal_basis,
    pressure_basis,
    rt_basis,
)
from conftest import make_setup


# ---------------------------------------------------------------------------
# independent form evaluation (dense loops, no shared assembly code)


def _disp_cell_eval(spaces, ref_pts):
    """Scalar nodal values and reference gradients on one cell."""
    return nodal_basis(spaces.displacement.l, ref_pts)


def _disp_field(spaces, u_raw, c, vals, grads, hx, hy):
    """Vector values and physical gradients of u_h on cell c.

    Returns (nq, 2) values and (nq, 2, 2) gradients d u_k / d x_j.
    """
    ns = spaces.displacement.nloc_scalar
    coeff = u_raw[c * 2 * ns:(c + 1) * 2 * ns].reshape(ns, 2)
    uvals = np.einsum("aq,ak->qk", vals, coeff)
    ugrads = np.einsum("aqj,ak->qkj", grads, coeff)
    ugrads[:, :, 0] /= hx
    ugrads[:, :, 1] /= hy
    return uvals, ugrads


def _stress(ugrads, mu, lam):
    eps = 0.5 * (ugrads + np.swapaxes(ugrads, 1, 2))
    tr = np.trace(eps, axis1=1, axis2=2)
    sig = 2.0 * mu * eps
    sig[:, 0, 0] += lam * tr
    sig[:, 1, 1] += lam * tr
    return sig


def _volume_rule_2d(n):
    x, w = gauss_points_1d(n)
    pts = np.column_stack([np.tile(x, n), np.repeat(x, n)])
    wts = np.tile(w, n) * np.repeat(w, n)
    return pts, wts


def oracle_sip_form(mesh, spaces, params, sip, y_raw, z_raw):
    """Volume stress-strain form plus J_delta minus J_d by direct loops."""
    l = spaces.displacement.l
    pts, wts = _volume_rule_2d(l + 2)
    vals, grads = _disp_cell_eval(spaces, pts)
    total = 0.0
    for c in range(mesh.num_cells):
        _, (hx, hy) = pf.cell_map(mesh, c)
        _, gy = _disp_field(spaces, y_raw, c, vals, grads, hx, hy)
        _, gz = _disp_field(spaces, z_raw, c, vals, grads, hx, hy)
        sig = _stress(gy, params.mu, params.lam)
        eps_z = 0.5 * (gz + np.swapaxes(gz, 1, 2))
        total += hx * hy * np.sum(wts * np.einsum("qij,qij->q", sig, eps_z))

    t, tw = gauss_points_1d(l + 2)
    evals = {}
    for side, ref in (
        ("left", np.column_stack([np.zeros_like(t), t])),
        ("right", np.column_stack([np.ones_like(t), t])),
        ("bottom", np.column_stack([t, np.zeros_like(t)])),
        ("top", np.column_stack([t, np.ones_like(t)])),
    ):
        evals[side] = _disp_cell_eval(spaces, ref)

    for e in mesh.interior_edges:
        edge = mesh.edges[e]
        cK, cKp = edge.cells
        _, (hx, hy) = pf.cell_map(mesh, cK)
        nu = np.array(edge.normal)
        if edge.normal == (1.0, 0.0):
            side_K, side_Kp = "right", "left"
        else:
            side_K, side_Kp = "top", "bottom"
        w_edge = tw * edge.length
        yK, gyK = _disp_field(spaces, y_raw, cK, *evals[side_K], hx, hy)
        yKp, gyKp = _disp_field(spaces, y_raw, cKp, *evals[side_Kp], hx, hy)
        zK, gzK = _disp_field(spaces, z_raw, cK, *evals[side_K], hx, hy)
        zKp, gzKp = _disp_field(spaces, z_raw, cKp, *evals[side_Kp], hx, hy)
        jump_y, _ = trace_ops(edge, yK, yKp)
        jump_z, _ = trace_ops(edge, zK, zKp)
        pen = sip.delta0 / edge.length**sip.beta_exp
        total += pen * np.sum(w_edge * np.einsum("qk,qk->q", jump_y, jump_z))
        ty = 0.5 * (_stress(gyK, params.mu, params.lam)
                    + _stress(gyKp, params.mu, params.lam)) @ nu
        tz = 0.5 * (_stress(gzK, params.mu, params.lam)
                    + _stress(gzKp, params.mu, params.lam)) @ nu
        total -= np.sum(w_edge * np.einsum("qk,qk->q", ty, jump_z))
        total -= np.sum(w_edge * np.einsum("qk,qk->q", tz, jump_y))
    return total


def oracle_coupling_form(mesh, spaces, params, pvec, z_raw):
    """b<p, div z>_K - b*J_p(p, z) by direct loops."""
    l = spaces.displacement.l
    pts, wts = _volume_rule_2d(l + 2)
    vals, grads = _disp_cell_eval(spaces, pts)
    pbasis = pressure_basis(spaces.s, pts)
    nlp = spaces.pressure.nloc
    total = 0.0
    for c in range(mesh.num_cells):
        _, (hx, hy) = pf.cell_map(mesh, c)
        _, gz = _disp_field(spaces, z_raw, c, vals, grads, hx, hy)
        div_z = gz[:, 0, 0] + gz[:, 1, 1]
        p_at = pbasis.T @ pvec[c * nlp:(c + 1) * nlp]
        total += hx * hy * np.sum(wts * p_at * div_z)

    t, tw = gauss_points_1d(l + 2)
    refs = {
        "left": np.column_stack([np.zeros_like(t), t]),
        "right": np.column_stack([np.ones_like(t), t]),
        "bottom": np.column_stack([t, np.zeros_like(t)]),
        "top": np.column_stack([t, np.ones_like(t)]),
    }
    for e in mesh.interior_edges:
        edge = mesh.edges[e]
        cK, cKp = edge.cells
        _, (hx, hy) = pf.cell_map(mesh, cK)
        nu = np.array(edge.normal)
        side_K, side_Kp = (("right", "left") if edge.normal == (1.0, 0.0)
                           else ("top", "bottom"))
        w_edge = tw * edge.length
        zK, _ = _disp_field(spaces, z_raw, cK,
                            *_disp_cell_eval(spaces, refs[side_K]), hx, hy)
        zKp, _ = _disp_field(spaces, z_raw, cKp,
                             *_disp_cell_eval(spaces, refs[side_Kp]), hx, hy)
        jump_z, _ = trace_ops(edge, zK, zKp)
        pK = pressure_basis(spaces.s, refs[side_K]).T @ pvec[cK * nlp:(cK + 1) * nlp]
        pKp = pressure_basis(spaces.s, refs[side_Kp]).T @ pvec[cKp * nlp:(cKp + 1) * nlp]
        _, avg_p = trace_ops(edge, pK, pKp)
        total -= np.sum(w_edge * avg_p * (jump_z @ nu))
    return params.b * total


# ---------------------------------------------------------------------------
# parameter validation and small hand values


def test_phys_params_validation():
    good = dict(mu=1.0, lam=1.0, b=1.0, c0=1.0, K=1.0, rho_b=1.0)
    PhysParams(**good)
    for key, bad in (("mu", 0.0), ("lam", -1.0), ("b", 0.0),
                     ("c0", -0.1), ("rho_b", 0.0)):
        kwargs = dict(good)
        kwargs[key] = bad
        with pytest.raises(ValueError):
            PhysParams(**kwargs)
    with pytest.raises(ValueError):
        PhysParams(**{**good, "K": np.array([[1.0, 2.0], [2.0, 1.0]])})
    with pytest.raises(ValueError):
        PhysParams(**{**good, "K": np.array([[1.0, 0.1], [0.2, 1.0]])})


def test_phys_params_scalar_k():
    params = PhysParams(mu=1.0, lam=1.0, b=1.0, c0=1.0, K=2.0, rho_b=1.0)
    assert params.K == pytest.approx(2.0 * np.eye(2))
    assert params.K_inv == pytest.approx(0.5 * np.eye(2))


def test_default_delta0():
    params = PhysParams(mu=2.0, lam=3.0, b=1.0, c0=1.0, K=1.0, rho_b=1.0)
    assert pf.default_delta0(params, 0) == pytest.approx(10 * 7.0 * 4)
    assert pf.default_delta0(params, 1) == pytest.approx(10 * 7.0 * 9)


def test_sip_config_validation():
    with pytest.raises(ValueError):
        SipConfig(delta0=0.0)
    with pytest.raises(ValueError):
        SipConfig(delta0=1.0, beta_exp=0.0)


def test_mass_norm():
    import scipy.sparse as sp

    M = sp.diags([4.0, 9.0])
    assert mass_norm(M, np.array([1.0, 0.0])) == pytest.approx(2.0)
    assert mass_norm(M, np.array([0.0, 2.0])) == pytest.approx(6.0)
    assert mass_norm(sp.csr_matrix((0, 0)), np.zeros(0)) == 0.0


def test_trace_ops():
    mesh = build_rect_mesh(2, 1, 1.0, 1.0)
    edge = mesh.edges[mesh.interior_edges[0]]
    jump, avg = trace_ops(edge, np.array([3.0]), np.array([3.0]))
    assert jump == pytest.approx([0.0])
    assert avg == pytest.approx([3.0])
    jump, avg = trace_ops(edge, np.array([1.0]), np.array([0.0]))
    assert jump == pytest.approx([1.0])
    assert avg == pytest.approx([0.5])
    vy = np.array([[2.0, 0.0]])
    jump, avg = trace_ops(edge, vy, np.zeros((1, 2)))
    assert jump == pytest.approx(np.array([[2.0, 0.0]]))
    assert avg == pytest.approx(np.array([[1.0, 0.0]]))
    boundary = next(e for e in mesh.edges if e.boundary)
    with pytest.raises(ValueError):
        trace_ops(boundary, np.array([1.0]), np.array([1.0]))


# ---------------------------------------------------------------------------
# flow blocks


def test_pressure_mass_2x2_s0():
    mesh, spaces, ops, _, _ = make_setup(nx=2, ny=2)
    assert ops.Mp.toarray() == pytest.approx(0.25 * np.eye(4), abs=1e-15)


def test_flux_mass_unit_cell_hand_values():
    """RT0, K=I on the unit cell: diagonal 1/3, same-direction coupling
    1/6, no cross coupling between x- and y-type DOFs."""
    mesh, spaces, ops, _, _ = make_setup(nx=1, ny=1)
    expected = np.array([
        [1 / 3, 1 / 6, 0.0, 0.0],
        [1 / 6, 1 / 3, 0.0, 0.0],
        [0.0, 0.0, 1 / 3, 1 / 6],
        [0.0, 0.0, 1 / 6, 1 / 3],
    ])
    assert ops.Mq.toarray() == pytest.approx(expected, abs=1e-14)


def test_divergence_unit_cell_signs():
    """Constant pressure test against the four RT0 edge functions gives
    -1, +1, -1, +1 for (left, right, bottom, top) under the +x/+y normal
    convention."""
    mesh, spaces, ops, _, _ = make_setup(nx=1, ny=1)
    assert ops.D.toarray() == pytest.approx(np.array([[-1.0, 1.0, -1.0, 1.0]]),
                                            abs=1e-14)


@pytest.mark.parametrize("s", [0, 1])
def test_flux_mass_spd_and_anisotropic_K(s):
    K = np.array([[2.0, 0.5], [0.5, 1.0]])
    mesh, spaces, ops, _, params = make_setup(nx=3, ny=2, s=s, K=K)
    Mq = ops.Mq.toarray()
    assert Mq == pytest.approx(Mq.T, abs=1e-13)
    assert np.linalg.eigvalsh(Mq).min() > 0


@pytest.mark.parametrize("s", [0, 1])
def test_flux_operators_oracle(s):
    """Mq and D actions match direct per-cell quadrature with rt_basis."""
    rng = np.random.default_rng(7)
    K = np.array([[2.0, 0.5], [0.5, 1.0]])
    mesh, spaces, ops, _, params = make_setup(nx=2, ny=3, Lx=1.0, Ly=1.5, s=s, K=K)
    q = rng.standard_normal(spaces.flux.ndof)
    w = rng.standard_normal(spaces.flux.ndof)
    p = rng.standard_normal(spaces.pressure.ndof)

    pts, wts = _volume_rule_2d(s + 3)
    Kinv = params.K_inv
    nlp = spaces.pressure.nloc
    pbasis = pressure_basis(s, pts)
    val_mq = 0.0
    val_d = 0.0
    for c in range(mesh.num_cells):
        _, (hx, hy) = pf.cell_map(mesh, c)
        vals, divs = rt_basis(s, (hx, hy), pts)
        dofs = spaces.flux.cell_dofs[c]
        qv = np.einsum("iqk,i->qk", vals, q[dofs])
        wv = np.einsum("iqk,i->qk", vals, w[dofs])
        dv = divs.T @ q[dofs]
        p_at = pbasis.T @ p[c * nlp:(c + 1) * nlp]
        val_mq += hx * hy * np.sum(wts * np.einsum("qk,kl,ql->q", wv, Kinv, qv))
        val_d += hx * hy * np.sum(wts * p_at * dv)
    assert w @ (ops.Mq @ q) == pytest.approx(val_mq, rel=1e-12)
    assert p @ (ops.D @ q) == pytest.approx(val_d, rel=1e-12)


# ---------------------------------------------------------------------------
# elasticity


def test_elasticity_1x1_empty():
    mesh, spaces, ops, _, _ = make_setup(nx=1, ny=1)
    assert ops.A.shape == (0, 0)


def test_stress_strain_divergence_free_hand_value():
    """u = (x, -y) has eps = diag(1, -1) and div u = 0, so the cell energy
    is 4*mu*|K| independently of lambda."""
    mesh = build_rect_mesh(1, 1, 1.0, 1.0)
    spaces = dof_layout(mesh, 0)
    mu, lam = 2.0, 7.0
    E = elasticity_cell_matrix(spaces, 1.0, 1.0, mu, lam)
    nodes = lobatto_points(2)
    coords = np.column_stack([np.tile(nodes, 2), np.repeat(nodes, 2)])
    u = np.column_stack([coords[:, 0], -coords[:, 1]]).ravel()
    assert u @ E @ u == pytest.approx(4 * mu, rel=1e-14)


def test_elasticity_symmetric():
    for s in (0, 1):
        mesh, spaces, ops, _, _ = make_setup(nx=3, ny=2, s=s, lam=10.0)
        diff = (ops.A - ops.A.T).toarray()
        scale = max(abs(ops.A).max(), 1.0)
        assert np.abs(diff).max() <= 1e-12 * scale


def test_penalty_single_edge_value():
    """A constant unit jump across one interior edge of length h is
    penalized by exactly delta0/h^beta * h * 1 = delta0 for beta = 1."""
    from porofix.assembly import _edge_local_sip

    mesh = build_rect_mesh(2, 1, 1.0, 2.0)
    spaces = dof_layout(mesh, 0)
    edge = mesh.edges[mesh.interior_edges[0]]
    delta0 = 11.0
    Jdelta, Jd = _edge_local_sip(spaces, "vertical", edge.length, 0.5, 2.0,
                                 1.0, 1.0, delta0, 1.0)
    n = 2 * spaces.displacement.nloc_scalar
    y = np.zeros(2 * n)
    y[0:n:2] = 1.0  # x-component 1 at all nodes of the lower cell, 0 opposite
    assert y @ Jdelta @ y == pytest.approx(delta0, rel=1e-14)
    assert y @ Jd @ y == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("s", [0, 1])
def test_zero_jump_null(s):
    """Continuous interpolants pay no penalty: the quadratic form equals
    the volume stress-strain energy, for any delta0."""
    def field(x, y):
        return np.column_stack([
            np.sin(np.pi * x) * np.sin(np.pi * y),
            x * (1 - x) * y * (1 - y),
        ])

    mesh, spaces, ops, _, params = make_setup(nx=3, ny=3, s=s, mu=2.0, lam=5.0)
    mesh2, spaces2, ops2, _, _ = make_setup(nx=3, ny=3, s=s, mu=2.0, lam=5.0,
                                            delta0=999.0)
    from porofix.assembly import interpolate_displacement

    raw = interpolate_displacement(mesh, spaces, field)
    free = raw[spaces.displacement.free_dofs]
    e1 = free @ (ops.A @ free)
    e2 = free @ (ops2.A @ free)
    assert e1 == pytest.approx(e2, rel=1e-12)

    # and both equal the plain volume energy
    pts, wts = _volume_rule_2d(spaces.displacement.l + 2)
    vals, grads = _disp_cell_eval(spaces, pts)
    vol = 0.0
    for c in range(mesh.num_cells):
        _, (hx, hy) = pf.cell_map(mesh, c)
        _, g = _disp_field(spaces, raw, c, vals, grads, hx, hy)
        sig = _stress(g, params.mu, params.lam)
        eps = 0.5 * (g + np.swapaxes(g, 1, 2))
        vol += hx * hy * np.sum(wts * np.einsum("qij,qij->q", sig, eps))
    assert e1 == pytest.approx(vol, rel=1e-12)


@pytest.mark.parametrize("s", [0, 1])
def test_elasticity_oracle_random(s):
    """Full SIP form on random broken fields matches the dense oracle."""
    rng = np.random.default_rng(3)
    mesh, spaces, ops, _, params = make_setup(nx=2, ny=2, Lx=1.0, Ly=2.0,
                                              s=s, mu=1.5, lam=4.0)
    sip = SipConfig(delta0=pf.default_delta0(params, s))
    disp = spaces.displacement
    y_free = rng.standard_normal(disp.nfree)
    z_free = rng.standard_normal(disp.nfree)
    y_raw = disp.scatter_free(y_free)
    z_raw = disp.scatter_free(z_free)
    lhs = z_free @ (ops.A @ y_free)
    rhs = oracle_sip_form(mesh, spaces, params, sip, y_raw, z_raw)
    assert lhs == pytest.approx(rhs, rel=1e-12)


# ---------------------------------------------------------------------------
# coupling


def test_divergence_pairing_hand_value():
    """u = (x, y) against w = 1 integrates div u = 2 over the unit cell."""
    from porofix.assembly import _divergence_cell_matrix

    mesh = build_rect_mesh(1, 1, 1.0, 1.0)
    spaces = dof_layout(mesh, 0)
    loc = _divergence_cell_matrix(spaces, 1.0, 1.0)
    nodes = lobatto_points(2)
    coords = np.column_stack([np.tile(nodes, 2), np.repeat(nodes, 2)])
    u = coords.ravel()
    assert loc @ u == pytest.approx([2.0], rel=1e-14)


@pytest.mark.parametrize("s", [0, 1])
def test_coupling_adjoint_consistency(s):
    """C realizes b<p, div z>_K - b*J_p(p, z) for random p and z."""
    rng = np.random.default_rng(11)
    mesh, spaces, ops, _, params = make_setup(nx=3, ny=2, Lx=1.5, Ly=1.0,
                                              s=s, b=1.7)
    disp = spaces.displacement
    p = rng.standard_normal(spaces.pressure.ndof)
    z_free = rng.standard_normal(disp.nfree)
    z_raw = disp.scatter_free(z_free)
    lhs = z_free @ (ops.C @ p)
    rhs = oracle_coupling_form(mesh, spaces, params, p, z_raw)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_continuous_z_drops_edge_terms():
    """For continuous z the coupling reduces to the volume pairing."""
    mesh, spaces, ops, _, params = make_setup(nx=3, ny=3, b=2.0)
    from porofix.assembly import interpolate_displacement

    raw = interpolate_displacement(
        mesh, spaces,
        lambda x, y: np.column_stack([x * (1 - x) * y, np.sin(np.pi * y) * x]),
    )
    z_free = raw[spaces.displacement.free_dofs]
    # zero the boundary nodes; traces on interior edges stay single-valued
    raw = spaces.displacement.scatter_free(z_free)
    rng = np.random.default_rng(5)
    p = rng.standard_normal(spaces.pressure.ndof)
    lhs = z_free @ (ops.C @ p)

    pts, wts = _volume_rule_2d(spaces.displacement.l + 2)
    vals, grads = _disp_cell_eval(spaces, pts)
    pbasis = pressure_basis(spaces.s, pts)
    nlp = spaces.pressure.nloc
    vol = 0.0
    for c in range(mesh.num_cells):
        _, (hx, hy) = pf.cell_map(mesh, c)
        _, g = _disp_field(spaces, raw, c, vals, grads, hx, hy)
        div_z = g[:, 0, 0] + g[:, 1, 1]
        p_at = pbasis.T @ p[c * nlp:(c + 1) * nlp]
        vol += hx * hy * np.sum(wts * p_at * div_z)
    assert lhs == pytest.approx(params.b * vol, rel=1e-11)


@pytest.mark.parametrize("s", [0, 1])
def test_broken_divergence_oracle(s):
    """G pairs the raw broken divergence with pressure tests (no b)."""
    rng = np.random.default_rng(13)
    mesh, spaces, ops, _, params = make_setup(nx=2, ny=2, s=s, b=3.0)
    disp = spaces.displacement
    u_free = rng.standard_normal(disp.nfree)
    u_raw = disp.scatter_free(u_free)
    p = rng.standard_normal(spaces.pressure.ndof)

    pts, wts = _volume_rule_2d(disp.l + 2)
    vals, grads = _disp_cell_eval(spaces, pts)
    pbasis = pressure_basis(spaces.s, pts)
    nlp = spaces.pressure.nloc
    total = 0.0
    for c in range(mesh.num_cells):
        _, (hx, hy) = pf.cell_map(mesh, c)
        _, g = _disp_field(spaces, u_raw, c, vals, grads, hx, hy)
        div_u = g[:, 0, 0] + g[:, 1, 1]
        p_at = pbasis.T @ p[c * nlp:(c + 1) * nlp]
        total += hx * hy * np.sum(wts * p_at * div_u)
    assert p @ (ops.G @ u_free) == pytest.approx(total, rel=1e-12)


# ---------------------------------------------------------------------------
# slab right-hand sides


def test_slab_rhs_zero_data():
    mesh, spaces, ops, basis, params = make_setup()
    flow, mech = assemble_slab_rhs(
        ops, mesh, spaces, pf.SourceData(), basis, params, 0.5, 0.0,
        np.zeros(spaces.pressure.ndof), np.zeros(spaces.displacement.nfree), 0,
    )
    assert flow == pytest.approx(np.zeros_like(flow))
    assert mech == pytest.approx(np.zeros_like(mech))


def test_slab_rhs_constant_source_1x1():
    """r=0, f = 1 on the unit cell with tau = 0.5: the single pressure
    entry is tau * beta00 * <1, 1> = 0.5."""
    mesh, spaces, ops, basis, params = make_setup(nx=1, ny=1)
    sources = pf.SourceData(f=lambda x, y, t: np.ones_like(x))
    flow, mech = assemble_slab_rhs(
        ops, mesh, spaces, sources, basis, params, 0.5, 0.0,
        np.zeros(1), np.zeros(0), 0,
    )
    assert flow == pytest.approx([0.5], rel=1e-14)
    assert mech.size == 0


def test_slab_rhs_history_only():
    """c0 = 1, constant previous pressure 2: the history contribution sums
    to gamma0 * c0 * 2 * |Omega| over the pressure test functions."""
    mesh, spaces, ops, basis, params = make_setup(nx=2, ny=2, Lx=2.0, Ly=1.0)
    p_minus = np.full(spaces.pressure.ndof, 2.0)
    flow, _ = assemble_slab_rhs(
        ops, mesh, spaces, pf.SourceData(), basis, params, 0.5, 0.0,
        p_minus, np.zeros(spaces.displacement.nfree), 0,
    )
    assert flow.sum() == pytest.approx(2.0 * 2.0, rel=1e-14)


def test_slab_rhs_source_time_evaluation():
    """The source is sampled at the mapped node time t_left + tau*node."""
    mesh, spaces, ops, basis, params = make_setup(nx=1, ny=1)
    times = []

    def f(x, y, t):
        times.append(t)
        return np.ones_like(x)

    assemble_slab_rhs(ops, mesh, spaces, pf.SourceData(f=f), basis, params,
                      0.5, 2.0, np.zeros(1), np.zeros(0), 0)
    assert times == pytest.approx([2.25])


def test_slab_rhs_displacement_history():
    """The b * div(u_minus) history term matches direct quadrature."""
    rng = np.random.default_rng(17)
    mesh, spaces, ops, basis, params = make_setup(nx=2, ny=2, b=1.3, c0=0.0)
    disp = spaces.displacement
    u_minus = rng.standard_normal(disp.nfree)
    flow, _ = assemble_slab_rhs(
        ops, mesh, spaces, pf.SourceData(), basis, params, 0.5, 0.0,
        np.zeros(spaces.pressure.ndof), u_minus, 0,
    )
    # gamma0 * b * G u_minus is the only nonzero contribution
    expected = basis.gamma[0] * params.b * (ops.G @ u_minus)
    assert flow == pytest.approx(expected, rel=1e-13)


def test_mechanics_rhs_body_force():
    """rho_b <g, z> matches direct quadrature for a random smooth g."""
    mesh, spaces, ops, basis, params = make_setup(nx=2, ny=2, rho_b=2.5)

    def g(x, y, t):
        return np.column_stack([np.sin(x + t), np.cos(y)])

    _, mech = assemble_slab_rhs(
        ops, mesh, spaces, pf.SourceData(g=g), basis, params, 1.0, 0.0,
        np.zeros(spaces.pressure.ndof), np.zeros(spaces.displacement.nfree), 0,
    )
    t_node = basis.nodes[0] * 1.0
    pts, wts = _volume_rule_2d(spaces.s + 3)
    vals, _ = _disp_cell_eval(spaces, pts)
    disp = spaces.displacement
    raw = np.zeros(disp.ndof_raw)
    ns = disp.nloc_scalar
    for c in range(mesh.num_cells):
        origin, (hx, hy) = pf.cell_map(mesh, c)
        phys = origin + pts * (hx, hy)
        gv = g(phys[:, 0], phys[:, 1], t_node)
        for a in range(ns):
            for k in range(2):
                raw[c * 2 * ns + 2 * a + k] = hx * hy * np.sum(
                    wts * gv[:, k] * vals[a]
                )
    expected = params.rho_b * raw[disp.free_dofs]
    assert mech == pytest.approx(expected, rel=1e-12)
