"""Page-Wootters photon clock simulator.

Observer-mode conditional-probability clocks and super-observer tomography
for a polarization-entangled photon pair.
"""

__version__ = "0.1.0"

from pwclock.qlinalg import (
    eig_hermitian,
    fidelity,
    partial_trace,
    sqrt_psd,
    tensor_product,
)
from pwclock.optics import (
    ClockHamiltonian,
    Retarder,
    clock_hamiltonian_matrix,
    hwp,
    phase_plate,
    qwp,
    retarder_unitary,
    thickness_to_phase,
)
from pwclock.preparation import SourceConfig, ququart_state, singlet_state
from pwclock.observer import (
    ObserverConfig,
    ObserverDataset,
    conditional_probabilities_exact,
    fit_visibility,
    joint_detection_probabilities,
    run_observer,
)
from pwclock.tomography import (
    ProjectorSet,
    TomographyConfig,
    build_projector_set,
    erased_global_state,
    linear_reconstruction,
    mle_refine,
    run_superobserver,
    simulate_tomography_counts,
)

__all__ = [
    "ClockHamiltonian",
    "ObserverConfig",
    "ObserverDataset",
    "ProjectorSet",
    "Retarder",
    "SourceConfig",
    "TomographyConfig",
    "build_projector_set",
    "clock_hamiltonian_matrix",
    "conditional_probabilities_exact",
    "eig_hermitian",
    "erased_global_state",
    "fidelity",
    "fit_visibility",
    "hwp",
    "joint_detection_probabilities",
    "linear_reconstruction",
    "mle_refine",
    "partial_trace",
    "phase_plate",
    "qwp",
    "ququart_state",
    "retarder_unitary",
    "run_observer",
    "run_superobserver",
    "simulate_tomography_counts",
    "singlet_state",
    "sqrt_psd",
    "tensor_product",
    "thickness_to_phase",
]
