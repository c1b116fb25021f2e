"""Observer mode: the clock photon as a two-valued clock for the system photon.

Detector mapping: 1 = clock H, 2 = clock V, 3 = system V, 4 = system H.
Photon 1 of the pair is the system, photon 2 the clock.
"""

import csv
import io
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from pwclock.counting import make_stream, sample_multinomial
from pwclock.optics import plate_a
from pwclock.preparation import singlet_state
from pwclock.qlinalg import H, I2, projector

DETECTOR_PAIRS = ("13", "14", "23", "24")
CSV_HEADER = ("clock_label", "tau", "emergent_time", "p", "stderr")

# stream key prefix for observer cells; tomography uses 1
STREAM_TAG = 0


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class ObserverConfig:
    tau_list: tuple = field(default_factory=tuple)
    delta_grid_size: int = 32
    shots_per_delta: int = 0
    omega: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "tau_list", tuple(float(t) for t in self.tau_list))
        if self.delta_grid_size < 2:
            raise ValueError(f"delta_grid_size must be >= 2, got {self.delta_grid_size}")
        if self.shots_per_delta < 0:
            raise ValueError(f"shots_per_delta must be >= 0, got {self.shots_per_delta}")
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if any(t < 0 for t in self.tau_list):
            raise ValueError("clock delays must be non-negative")
        if self.rng_seed < 0:
            raise ValueError(f"rng_seed must be non-negative, got {self.rng_seed}")

    def delta_grid(self):
        return 2 * np.pi * np.arange(self.delta_grid_size) / self.delta_grid_size


class ObserverRow(NamedTuple):
    clock_label: str
    tau: float
    emergent_time: float
    p_conditional: float
    stderr: float


@dataclass
class ObserverDataset:
    rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def emergent_times(self):
        return np.array([r.emergent_time for r in self.rows])

    def probabilities(self):
        return np.array([r.p_conditional for r in self.rows])

    def stderrs(self):
        return np.array([r.stderr for r in self.rows])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([r.clock_label, repr(r.tau), repr(r.emergent_time), repr(r.p_conditional), repr(r.stderr)])
        return buf.getvalue()

    def to_records(self):
        return [
            {"clock_label": r.clock_label, "tau": r.tau, "emergent_time": r.emergent_time,
             "p": r.p_conditional, "stderr": r.stderr}
            for r in self.rows
        ]


def initialized_state():
    """Singlet after PBS1 post-selects the clock photon in H: |V>_sys |H>_clock."""
    psi = np.kron(I2, projector(H)) @ singlet_state()
    return psi / np.linalg.norm(psi)


def joint_detection_probabilities(delta, tau):
    """(p13, p14, p23, p24) for plate-A thickness ``delta`` and clock delay phase ``tau``.

    ``tau`` is the delay already expressed as a phase, omega * tau.
    """
    u = np.kron(plate_a(delta), plate_a(delta + tau))
    amp = (u @ initialized_state()).reshape(2, 2)  # [system, clock]
    p = np.abs(amp) ** 2
    # clock H is index 0, system V is index 1
    return float(p[1, 0]), float(p[0, 0]), float(p[1, 1]), float(p[0, 1])


def _joint_grid(cfg, tau):
    return np.array([joint_detection_probabilities(d, cfg.omega * tau) for d in cfg.delta_grid()])


def conditional_probabilities_exact(cfg, tau):
    """(P(3|1), P(3|2)) at clock delay ``tau`` marginalized over the delta grid."""
    p = _joint_grid(cfg, tau).mean(axis=0)
    p13, p14, p23, p24 = p
    return p13 / (p13 + p14), p23 / (p23 + p24)


def _rows_for(tau, omega, p1, p2, e1, e2):
    return [
        ObserverRow("t1", tau, tau, p1, e1),
        ObserverRow("t2", tau, tau + np.pi / omega, p2, e2),
    ]


def _binomial_stderr(k, n):
    if n == 0:
        return 0.0
    p = k / n
    return float(np.sqrt(p * (1 - p) / n))


def sampled_conditional_probabilities(cfg, tau, tau_index):
    """Monte Carlo estimate and binomial standard errors at one clock delay."""
    counts = np.zeros(4, dtype=np.int64)
    for j, row in enumerate(_joint_grid(cfg, tau)):
        stream = make_stream(cfg.rng_seed, STREAM_TAG, tau_index, j)
        rec = sample_multinomial(np.clip(row, 0.0, None), cfg.shots_per_delta, stream, labels=DETECTOR_PAIRS)
        counts += rec.counts
    c13, c14, c23, c24 = (int(c) for c in counts)
    n1, n2 = c13 + c14, c23 + c24
    p1 = c13 / n1 if n1 else float("nan")
    p2 = c23 / n2 if n2 else float("nan")
    return (p1, _binomial_stderr(c13, n1)), (p2, _binomial_stderr(c23, n2))


def run_observer(cfg):
    """Conditional-probability dataset, two rows per clock delay."""
    ds = ObserverDataset()
    order = sorted(range(len(cfg.tau_list)), key=lambda i: cfg.tau_list[i])
    for i in order:
        tau = cfg.tau_list[i]
        if cfg.shots_per_delta == 0:
            p1, p2 = conditional_probabilities_exact(cfg, tau)
            ds.rows.extend(_rows_for(tau, cfg.omega, float(p1), float(p2), 0.0, 0.0))
        else:
            (p1, e1), (p2, e2) = sampled_conditional_probabilities(cfg, tau, i)
            ds.rows.extend(_rows_for(tau, cfg.omega, p1, p2, e1, e2))
    return ds


def theory_curve(t, omega=1.0):
    """p(t) = 1/2 + cos(omega t)/4 for the two-valued clock."""
    return 0.5 + 0.25 * np.cos(omega * np.asarray(t, dtype=float))


def fit_visibility(ds, omega):
    """Least-squares fit of p(t) = offset + amplitude cos(omega t + phase).

    Returns ``(visibility, phase, offset)`` with visibility = amplitude / offset.
    """
    t = ds.emergent_times()
    p = ds.probabilities()
    if len(p) < 4 or len(np.unique(np.round(t, 12))) < 4:
        raise FitError("fit_visibility needs at least 4 rows at 4 distinct emergent times")
    design = np.column_stack([np.ones_like(t), np.cos(omega * t), np.sin(omega * t)])
    if np.linalg.matrix_rank(design) < 3:
        raise FitError("degenerate design matrix: emergent times do not resolve the sinusoid")
    (offset, a, b), *_ = np.linalg.lstsq(design, p, rcond=None)
    amplitude = float(np.hypot(a, b))
    if offset <= 0:
        raise FitError(f"non-positive fitted offset {offset}")
    phase = float(np.arctan2(-b, a)) if amplitude > 0 else 0.0
    return amplitude / float(offset), phase, float(offset)
