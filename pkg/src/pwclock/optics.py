"""Jones-calculus optical elements and the clock Hamiltonian.

Plate A is modelled as a standard linear retarder with its fast axis at 45
degrees, U(delta) = cos(delta/2) I - i sin(delta/2) sigma_x. It reduces to the
identity at zero thickness and equals exp(-i H t) for H = (omega/2) sigma_x
with delta = omega t.
"""

from dataclasses import dataclass

import numpy as np

from pwclock.qlinalg import I2, SIGMA_X, eig_hermitian


@dataclass(frozen=True)
class Retarder:
    """Linear retarder; ``retardation`` and ``axis`` in radians."""

    retardation: float
    axis: float = np.pi / 4

    def __post_init__(self):
        if not (np.isfinite(self.retardation) and np.isfinite(self.axis)):
            raise ValueError("Retarder parameters must be finite")


@dataclass(frozen=True)
class ClockHamiltonian:
    omega: float = 1.0

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")


def _rotation(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]], dtype=complex)


def retarder_unitary(r):
    d = r.retardation / 2.0
    core = np.diag([np.exp(-1j * d), np.exp(1j * d)])
    return _rotation(r.axis) @ core @ _rotation(-r.axis)


def plate_a(delta):
    """Plate-A evolution for optical thickness ``delta`` (axis at 45 deg)."""
    return retarder_unitary(Retarder(delta, np.pi / 4))


def hwp(angle):
    return retarder_unitary(Retarder(np.pi, angle))


def qwp(angle):
    return retarder_unitary(Retarder(np.pi / 2, angle))


def phase_plate(phi):
    """Relative phase ``phi`` on V with respect to H."""
    return np.diag([1.0, np.exp(1j * phi)]).astype(complex)


def clock_hamiltonian_matrix(h):
    return 0.5 * h.omega * SIGMA_X


def bilateral_hamiltonian(h):
    """H (x) I + I (x) H acting on both photons."""
    single = clock_hamiltonian_matrix(h)
    return np.kron(single, I2) + np.kron(I2, single)


def evolve(hamiltonian, t):
    """exp(-i H t) through the Hermitian eigendecomposition."""
    w, v = eig_hermitian(hamiltonian)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def thickness_to_phase(thickness, birefringence, wavelength):
    """Retardation 2 pi dn L / lambda of a birefringent plate."""
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    if thickness < 0:
        raise ValueError(f"thickness must be non-negative, got {thickness}")
    return 2.0 * np.pi * birefringence * thickness / wavelength
