"""Source states: the cos(theta)|HH> + e^{i phi} sin(theta)|VV> family and the singlet."""

from dataclasses import dataclass

import numpy as np

from pwclock.optics import hwp
from pwclock.qlinalg import I2

SINGLET = np.array([0.0, 1.0, -1.0, 0.0], dtype=complex) / np.sqrt(2.0)


@dataclass(frozen=True)
class SourceConfig:
    theta: float = np.pi / 4
    phi: float = 0.0
    singlet_mode: bool = False

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi / 2:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")
        if not 0.0 <= self.phi < 2 * np.pi:
            raise ValueError(f"phi must lie in [0, 2 pi), got {self.phi}")


def ququart_state(cfg):
    if cfg.singlet_mode:
        raise ValueError("ququart_state takes a config with singlet_mode=False; use singlet_state")
    return np.array(
        [np.cos(cfg.theta), 0.0, 0.0, np.exp(1j * cfg.phi) * np.sin(cfg.theta)],
        dtype=complex,
    )


def singlet_state():
    """(|HV> - |VH>)/sqrt(2) up to a global phase.

    Built optically: the source at theta=45 deg with a pi relative phase gives
    (|HH> - |VV>)/sqrt(2), and a half-wave plate at 45 deg on photon 1 turns
    it into the singlet. With phi=0 the same plate would give the triplet.
    """
    source = ququart_state(SourceConfig(theta=np.pi / 4, phi=np.pi))
    return np.kron(hwp(np.pi / 4), I2) @ source
