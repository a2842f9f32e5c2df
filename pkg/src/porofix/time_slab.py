"""Time partition and per-slab polynomial bases with Gauss collocation nodes.

Each slab carries a Lagrange basis at the r+1 Gauss points of the
reference interval [0,1].  The coefficient arrays that enter the fully
discrete scheme are computed on the reference interval:

* ``alpha[i, j]`` is the time-derivative pairing of the basis plus the
  upwind jump contribution ``gamma[i] * gamma[j]``,
* ``beta[i]`` is the diagonal of the basis mass (the Gauss weight),
* ``gamma[i]`` is the basis value at the left endpoint.

With this normalization the slab length appears in the discrete flow
equations only as an explicit factor on the divergence and source terms,
and the r = 0 case collapses to an implicit-Euler-type step with the
source sampled at the slab midpoint.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fem_spaces import gauss_points_1d, lagrange_derivatives, lagrange_values

SUPPORTED_TIME_ORDERS = (0, 1)


@dataclass(frozen=True)
class TimePartition:
    """Strictly increasing time nodes 0 = t_0 < ... < t_N = T."""

    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size < 2:
            raise ValueError("time partition needs at least two nodes")
        if not np.all(np.diff(t) > 0):
            raise ValueError("time partition must be strictly increasing")
        object.__setattr__(self, "times", t)

    @property
    def num_slabs(self) -> int:
        return self.times.size - 1

    @property
    def T(self) -> float:
        return float(self.times[-1])

    def tau(self, n: int) -> float:
        return float(self.times[n + 1] - self.times[n])

    @property
    def tau_max(self) -> float:
        return float(np.max(np.diff(self.times)))


def uniform_partition(T: float, N: int) -> TimePartition:
    """Uniform partition of (0, T] into N slabs."""
    if not T > 0:
        raise ValueError("time.T must be positive")
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise ValueError("time.N must be a positive integer")
    return TimePartition(times=np.linspace(0.0, float(T), int(N) + 1))


@dataclass(frozen=True)
class SlabBasis:
    """Lagrange basis at the r+1 Gauss nodes of [0,1] and its coefficients."""

    r: int
    nodes: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray


def slab_coefficients(r: int) -> SlabBasis:
    """Coefficient arrays of the degree-r slab basis on [0,1]."""
    if r not in SUPPORTED_TIME_ORDERS:
        raise ValueError(f"unsupported time order r={r}; supported: {SUPPORTED_TIME_ORDERS}")
    nodes, _ = gauss_points_1d(r + 1)
    # Quadrature exact for the degree 2r integrands below.
    qx, qw = gauss_points_1d(r + 2)
    phi = lagrange_values(nodes, qx)
    dphi = lagrange_derivatives(nodes, qx)
    gamma = lagrange_values(nodes, np.array([0.0]))[:, 0]
    beta = np.array([np.sum(qw * phi[i] * phi[i]) for i in range(r + 1)])
    alpha = np.empty((r + 1, r + 1))
    for i in range(r + 1):
        for j in range(r + 1):
            alpha[i, j] = np.sum(qw * dphi[j] * phi[i]) + gamma[i] * gamma[j]
    return SlabBasis(r=r, nodes=nodes, alpha=alpha, beta=beta, gamma=gamma)


def lagrange_weights(basis: SlabBasis, that: float) -> np.ndarray:
    """Evaluation weights of the slab basis at reference time that."""
    return lagrange_values(basis.nodes, np.array([float(that)]))[:, 0]


def eval_polynomial(basis: SlabBasis, coefficients: np.ndarray, that: float) -> np.ndarray:
    """Evaluate the slab polynomial at reference time that in [0,1].

    ``coefficients`` stacks one coefficient array per node along axis 0;
    that = 1 gives the left limit at the slab end, that = 0 the right
    limit at the slab start (whose weights equal gamma by definition).
    """
    coeffs = np.asarray(coefficients)
    if coeffs.shape[0] != basis.r + 1:
        raise ValueError("coefficient stack must have one entry per slab node")
    w = lagrange_weights(basis, that)
    return np.tensordot(w, coeffs, axes=(0, 0))


@dataclass
class SlabState:
    """Per-node coefficient vectors of one slab: pressure, flux, displacement."""

    P: np.ndarray
    Q: np.ndarray
    U: np.ndarray

    def copy(self) -> "SlabState":
        return SlabState(P=self.P.copy(), Q=self.Q.copy(), U=self.U.copy())
