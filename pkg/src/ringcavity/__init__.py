"""Spin arrays coupled to a two-mode ring cavity."""

from .dynamics import (
    PropagatorSettings,
    Trajectory,
    evolve,
    evolve_converged,
    fidelity,
    max_fidelity_over_window,
    populations,
)
from .errors import (
    BasisMismatchError,
    BasisTooLargeError,
    BasisTooSmallError,
    ConfigError,
    ConvergenceError,
    EmptyTrajectoryError,
    NormalizationError,
    ProtocolNotApplicableError,
    RingCavityError,
    ScheduleDomainError,
)
from .model import (
    BasisSpec,
    CavityPair,
    CouplingMatrix,
    DetuningSchedule,
    Excitation,
    HamiltonianMatrix,
    QuantumState,
    SpinArray,
    SystemSpec,
    build_coupling_matrix,
    build_fock_hamiltonian,
    build_single_excitation_hamiltonian,
    evaluate_detuning,
)
from .spectral import (
    PolaritonDecomposition,
    SpectrumTable,
    collective_modes,
    dark_state_basis,
    decompose,
    effective_coupling,
    energy_spectrum_sweep,
    locate_degeneracies,
    platform_coupling,
    polariton_decomposition,
    structure_factor,
)

__version__ = "0.1.0"
