"""Decoherence of a qubit through pure dephasing, and how to prepare the environment against it.

Submodules
----------
quantum_core
    Dense Hermitian linear algebra: spectral projectors, propagation, range intersection.
dephasing
    The qubit-environment model, branch overlaps ``r(t)``, echoes and purity.
coherence
    Existence and construction of decoherence-free environment states.
spin_bath
    The n-spin bath with a projector self-evolution; exact and perturbative echoes.
bloch
    Min-max choice of a single-spin environment state on the Bloch sphere.
cli
    ``dephasing-lab`` command-line tool.
"""

__version__ = "0.1.0"

from .coherence import (
    CommonEigenvector,
    DfsGroup,
    DfsReport,
    common_eigenvectors,
    decoherence_free_states,
    fragility_probe,
    verify_coherence,
)
from .dephasing import (
    DephasingModel,
    QubitAmplitudes,
    TrajectoryRecord,
    branch_hamiltonians,
    decoherence_factor,
    decoherence_factor_spectral,
    purity,
    time_averaged_echo,
    trajectory,
)
from .exceptions import ConfigError, DephasingLabError, NumericalPreconditionError, ValidationError
from .quantum_core import SpectralDecomposition, evolve, range_intersection, spectral_decompose, tensor_product, tensor_state
