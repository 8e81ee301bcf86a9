"""Quantum-classical correspondence for continuous-time walks on graphs."""

from .classical_walk import ClassicalWalk, check_semigroup, evolve_probability, propagate
from .correspondence import (
    count_parameters,
    correspondence_map,
    gauge_fix,
    sample_compatible_hamiltonians,
    verify_postulates,
)
from .decoherence import DecoherenceParams, evolve_density, extract_generator
from .graph import Graph, graph_from_laplacian, laplacian, validate_laplacian
from .lattice import (
    LatticeSpec,
    build_lattice_hamiltonian,
    continuum_convergence,
    discrete_magnetic_field,
    hofstadter_spectrum,
    peierls_phases,
)
from .linalg import eigh, stochastic_propagator_kernel, unitary_propagator
from .quantum_walk import (
    HamiltonianSpec,
    born_semigroup_violation,
    build_hamiltonian,
    gauge_transform,
    time_reversal_asymmetry,
    transition_probabilities,
)

__version__ = "0.1.0"
