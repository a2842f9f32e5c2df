"""Shared fixtures and the acceptance-summary reporting hook."""

import numpy as np
import pytest

import porofix as pf

ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)


def make_setup(nx=4, ny=4, Lx=1.0, Ly=1.0, s=0, r=0, mu=1.0, lam=1.0, b=1.0,
               c0=1.0, K=1.0, rho_b=1.0, delta0=None):
    """Mesh, spaces, operators, time basis, and parameters in one call."""
    params = pf.PhysParams(mu=mu, lam=lam, b=b, c0=c0, K=K, rho_b=rho_b)
    mesh = pf.build_rect_mesh(nx, ny, Lx, Ly)
    spaces = pf.dof_layout(mesh, s)
    if delta0 is None:
        delta0 = pf.default_delta0(params, s)
    ops = pf.assemble_all(mesh, spaces, params, pf.SipConfig(delta0=delta0))
    basis = pf.slab_coefficients(r)
    return mesh, spaces, ops, basis, params


@pytest.fixture
def desk():
    """The 4x4 unit-coefficient reference scenario used across tests."""
    mesh, spaces, ops, basis, params = make_setup()
    sources = pf.SourceData(f=lambda x, y, t: np.ones_like(x))
    partition = pf.uniform_partition(1.0, 2)
    split = pf.SplitConfig(L=0.5, tol=1e-10, max_iter=200, warm_start=False)
    return mesh, spaces, ops, basis, params, sources, partition, split
