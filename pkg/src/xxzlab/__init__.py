"""Numerical workbench for localization diagnostics of the random
anisotropic spin-1/2 chain in fixed-particle-number sectors."""

from .config_space import (
    Configuration,
    DomainError,
    Region,
    SectorBasis,
    cluster_count,
    dist_d1,
    dist_dH,
    dist_dH_mod,
    enumerate_bounded_clusters,
    enumerate_sector,
    hop_neighbors,
)
from .disorder import (
    Distribution,
    DisorderSample,
    MCEstimate,
    UNIFORM01,
    monte_carlo,
    parse_distribution,
    sample_field,
)
from .operators import (
    EnergyWindow,
    ModelParams,
    SectorOperator,
    assemble_hamiltonian,
    assemble_parts,
    boundary_operator,
    lifted_hamiltonian,
    projection,
)

__version__ = "0.1.0"

__all__ = [
    "Configuration",
    "DomainError",
    "Region",
    "SectorBasis",
    "cluster_count",
    "dist_d1",
    "dist_dH",
    "dist_dH_mod",
    "enumerate_bounded_clusters",
    "enumerate_sector",
    "hop_neighbors",
    "Distribution",
    "DisorderSample",
    "MCEstimate",
    "UNIFORM01",
    "monte_carlo",
    "parse_distribution",
    "sample_field",
    "EnergyWindow",
    "ModelParams",
    "SectorOperator",
    "assemble_hamiltonian",
    "assemble_parts",
    "boundary_operator",
    "lifted_hamiltonian",
    "projection",
    "__version__",
]
