"""Fixed-stress split solver for quasi-static poroelasticity.

The flow subproblem is discretized with a mixed Raviart-Thomas pair, the
mechanics subproblem with a symmetric interior-penalty method, and time
with discontinuous piecewise polynomials on slabs.  Each slab is solved
either by the stabilized split iteration or by the fully coupled
monolithic system that the iteration converges to.
"""

from .assembly import (
    AssembledOperators,
    PhysParams,
    SipConfig,
    SourceData,
    assemble_all,
    assemble_coupling,
    assemble_elasticity,
    assemble_flow_blocks,
    assemble_slab_rhs,
    default_delta0,
    mass_norm,
    trace_ops,
)
from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .fem_spaces import (
    DisplacementSpace,
    FluxSpace,
    PressureSpace,
    QuadratureRule,
    Spaces,
    dof_layout,
    gauss_rule,
    nodal_basis,
    rt_basis,
)
from .mesh import Edge, Mesh, build_rect_mesh, cell_map
from .solvers import (
    IterationReport,
    SplitConfig,
    Trajectory,
    auto_stabilization,
    fixed_stress_slab,
    linear_solve,
    march,
    solve_flow_step,
    solve_mechanics_step,
    solve_monolithic_slab,
)
from .studies import run_scenario
from .time_slab import (
    SlabBasis,
    SlabState,
    TimePartition,
    eval_polynomial,
    slab_coefficients,
    uniform_partition,
)
from .verification import (
    ContractionDiag,
    ErrorReport,
    ManufacturedSolution,
    contraction_diagnostics,
    error_norms,
    jump_indicator,
    manufactured_solution,
    mms_coupled,
    mms_flow,
    mms_forcing,
    observed_order,
    run_contraction_study,
)

__version__ = "0.1.0"
