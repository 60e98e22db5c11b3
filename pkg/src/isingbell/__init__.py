"""Exact Bell-CHSH correlation experiments on Ising spin lattices.

Classical Boltzmann tables and quantum thermal z-distributions feed the same
pipeline: post-selected correlators, the CHSH combination, and worst-case
deviations from measurement / outcome / parameter independence and
factorability. A Metropolis sampler validates the exact engine and scales
past the enumeration cap; a parameter-search module reproduces the published
violation values.
"""

__version__ = "0.1.0"

from .chsh import ChshReport, PairwiseReport, chsh, correlator, pairwise_correlations
from .diagnostics import (
    DeviationResult,
    IndependenceReport,
    factorability_deviation,
    independence_report,
    mi_deviation,
    oi_deviation,
    pi_deviation,
    subset_sweep,
)
from .errors import CapExceededError, NumericalError, SpecError, SpecFileError
from .geometries import (
    GeometryCandidate,
    default_lattice,
    geometry_family,
    tuned_reference_spec,
    uniform_reference_spec,
)
from .gibbs import (
    DistributionTable,
    PartialAssignment,
    build_distribution,
    conditional,
    joint_table,
    marginal,
)
from .lattice import (
    LatticeSpec,
    RoleAssignment,
    SpinConfiguration,
    ValidationReport,
    all_energies,
    energy,
    enumerate_configurations,
    validate_spec,
    with_beta,
    with_extra_edge,
    with_fields,
    with_uniform_coupling,
)
from .mc import Estimate, McChshResult, McConfig, McResult, chsh_estimate, metropolis_run
from .quantum import (
    QuantumModel,
    build_hamiltonian,
    ground_state_z_distribution,
    scan_grid,
    thermal_z_distribution,
)
from .search import (
    ReproductionReport,
    SearchParameter,
    SearchProblem,
    SearchResult,
    SweepRow,
    grid_sweep,
    local_maximize,
    reproduce_published_points,
)
from .specfile import (
    QuantumParams,
    SpecDocument,
    bundled_spec,
    dump_spec_text,
    load_spec_file,
    parse_spec_text,
    save_spec_file,
)

__all__ = [name for name in dir() if not name.startswith("_")]
