"""Super-observer mode: erased global state, 16-projection tomography, MLE.

The projections are the products of {H, V, D, R} on each photon with
D = (H + V)/sqrt(2) and R = (H - iV)/sqrt(2). Reconstruction solves the
linear system in the two-qubit Pauli basis and then refines by maximizing the
Poisson likelihood over rho = T^dag T / Tr(T^dag T), T lower-triangular.
"""

import csv
import io
import warnings
from dataclasses import dataclass, field

import numpy as np

from pwclock import _kernels
from pwclock.counting import CountRecord, make_stream, sample_poisson
from pwclock.optics import plate_a
from pwclock.preparation import SINGLET, singlet_state
from pwclock.qlinalg import (
    H,
    I2,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    V,
    eig_hermitian,
    fidelity,
    projector,
)

CSV_HEADER = ("external_time_over_omega", "fidelity")

# stream key prefix for tomography cells; the observer uses 0
STREAM_TAG = 1

SINGLE_PHOTON_STATES = {
    "H": H,
    "V": V,
    "D": (H + V) / np.sqrt(2.0),
    "R": (H - 1j * V) / np.sqrt(2.0),
}

_PAULIS = (I2, SIGMA_X, SIGMA_Y, SIGMA_Z)
PAULI_BASIS = np.array([np.kron(a, b) for a in _PAULIS for b in _PAULIS])

# measured reference fidelities keyed by external time (units of 1/omega)
REPORTED_FIDELITIES = {
    0.0: 0.953,
    np.pi / 4: 0.940,
    np.pi / 2: 0.928,
    3 * np.pi / 2: 0.932,
}
CALIBRATED_COUNTS = 500

# the source state, built once through the optics chain
_SOURCE = singlet_state()

# seed mixture that keeps every projection probability positive at the start
_INIT_MIX = 1e-6


class ProtocolError(RuntimeError):
    pass


class MLEConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ProjectorSet:
    labels: tuple
    vectors: np.ndarray

    @property
    def projectors(self):
        return np.einsum("ka,kb->kab", self.vectors, self.vectors.conj())

    def __len__(self):
        return len(self.labels)

    def measurement_matrix(self):
        """Real 16x16 matrix A with Tr(rho Pi_k) = A @ r / 4 for rho = sum r_m P_m / 4."""
        return np.einsum("kab,mba->km", self.projectors, PAULI_BASIS).real

    def probabilities(self, rho):
        rho = np.asarray(rho, dtype=complex)
        if rho.ndim == 1:
            return np.abs(self.vectors.conj() @ rho) ** 2
        return np.einsum("ka,ab,kb->k", self.vectors.conj(), rho, self.vectors).real


def build_projector_set():
    labels, vectors = [], []
    for a, va in SINGLE_PHOTON_STATES.items():
        for b, vb in SINGLE_PHOTON_STATES.items():
            labels.append(a + b)
            vectors.append(np.kron(va, vb))
    ps = ProjectorSet(tuple(labels), np.array(vectors))
    cond = np.linalg.cond(ps.measurement_matrix())
    if not np.isfinite(cond) or cond >= 100:
        raise ProtocolError(f"projector set is not informationally complete (condition number {cond})")
    return ps


@dataclass(frozen=True)
class TomographyConfig:
    external_times: tuple = (0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 2)
    counts_per_projection: int = 0
    rng_seed: int = 0
    mle_tolerance: float = 1e-10
    mle_max_iters: int = 5000
    erasure_visibility: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "external_times", tuple(float(t) for t in self.external_times))
        if self.counts_per_projection < 0:
            raise ValueError(f"counts_per_projection must be >= 0, got {self.counts_per_projection}")
        if not self.mle_tolerance > 0:
            raise ValueError(f"mle_tolerance must be positive, got {self.mle_tolerance}")
        if self.mle_max_iters < 1:
            raise ValueError(f"mle_max_iters must be >= 1, got {self.mle_max_iters}")
        if not 0.0 <= self.erasure_visibility <= 1.0:
            raise ValueError(f"erasure_visibility must lie in [0, 1], got {self.erasure_visibility}")
        if self.rng_seed < 0:
            raise ValueError(f"rng_seed must be non-negative, got {self.rng_seed}")


def noise_calibration(counts_per_projection=CALIBRATED_COUNTS):
    """Settings that put simulated fidelities on the scale of the reference ones.

    Shot noise alone at a few hundred counts per projection costs well under
    1% fidelity, so the shortfall is attributed to imperfect erasure: the
    visibility is chosen so the noiseless fidelity (1 + v)/2 equals the mean
    reference fidelity.
    """
    target = float(np.mean(list(REPORTED_FIDELITIES.values())))
    return {
        "counts_per_projection": int(counts_per_projection),
        "erasure_visibility": 2.0 * target - 1.0,
        "target_fidelity": target,
    }


def erased_global_state(delta):
    """Two-photon state after bilateral plate-A evolution and ideal erasure.

    PBS1 splits the clock photon into H and V paths; the balanced
    interferometer and post-selected BS exit recombine them coherently, so the
    net action is the unsplit evolution plate_a(delta) on both photons.
    """
    u = plate_a(delta)
    return np.kron(u, u) @ _SOURCE


def erased_global_density(delta, erasure_visibility=1.0):
    """Density-matrix version with partial erasure.

    ``erasure_visibility`` scales the coherence between the H and V paths of
    the clock photon (photon 2); 1 is ideal erasure, 0 a full PBS measurement.
    """
    rho = projector(_SOURCE)
    mask = np.array([[1.0, erasure_visibility], [erasure_visibility, 1.0]])
    rho = rho * np.kron(np.ones((2, 2)), mask)
    u = np.kron(plate_a(delta), plate_a(delta))
    return u @ rho @ u.conj().T


def simulate_tomography_counts(rho, ps, n, seed=0, key=()):
    """Counts for each projection.

    ``n == 0`` gives the Born probabilities themselves (as floats). Otherwise
    projection k gets an independent Poisson count of mean n * Tr(rho Pi_k),
    drawn from stream ``(seed, *key, k)``.
    """
    if n < 0:
        raise ValueError(f"counts per projection must be >= 0, got {n}")
    probs = np.clip(ps.probabilities(rho), 0.0, None)
    if n == 0:
        return CountRecord(list(ps.labels), probs)
    counts = np.array(
        [sample_poisson(n * p, make_stream(seed, *key, k)) for k, p in enumerate(probs)],
        dtype=np.int64,
    )
    return CountRecord(list(ps.labels), counts)


def linear_reconstruction(counts, ps):
    """Trace-normalized Hermitian matrix solving the linear tomography system."""
    c = np.asarray(counts.counts, dtype=float)
    if len(c) != len(ps):
        raise ValueError(f"{len(c)} counts for {len(ps)} projectors")
    try:
        r = 4.0 * np.linalg.solve(ps.measurement_matrix(), c)
    except np.linalg.LinAlgError as exc:
        raise ProtocolError("singular tomography system") from exc
    if r[0] <= 0:
        raise ProtocolError("counts carry no signal; cannot normalize the reconstruction")
    rho = np.einsum("m,mab->ab", r / r[0], PAULI_BASIS) / 4.0
    return 0.5 * (rho + rho.conj().T)


def clamp_to_physical(m):
    """Zero the negative eigenvalues and renormalize to unit trace."""
    w, v = eig_hermitian(m)
    w = np.clip(w, 0.0, None)
    if w.sum() <= 0:
        return np.eye(4, dtype=complex) / 4
    rho = (v * (w / w.sum())) @ v.conj().T
    return 0.5 * (rho + rho.conj().T)


def cholesky_factor(rho):
    """Lower-triangular T with T^dag T = rho (rho must be positive definite)."""
    j = np.eye(rho.shape[0])[::-1]
    low = np.linalg.cholesky(j @ rho @ j)
    return (j @ low @ j).conj().T


def density_from_factor(t):
    rho = t.conj().T @ t
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + rho.conj().T)


def log_likelihood(rho, counts, ps):
    """Poisson log-likelihood with the total rate profiled out (up to a constant)."""
    n = np.asarray(counts.counts, dtype=float)
    q = ps.probabilities(rho)
    pos = n > 0
    if np.any(q[pos] <= 0):
        return -np.inf
    return float(np.dot(n[pos], np.log(q[pos])) - n.sum() * np.log(q.sum()))


@dataclass
class MLEResult:
    rho: np.ndarray
    loglik_history: np.ndarray
    iterations: int
    converged: bool
    initial: np.ndarray = field(repr=False, default=None)


def mle_fit(counts, ps, cfg):
    """Maximum-likelihood density matrix with the full ascent record."""
    c = np.asarray(counts.counts, dtype=float)
    if np.any(c < 0):
        raise ValueError("counts must be non-negative")
    try:
        start = clamp_to_physical(linear_reconstruction(counts, ps))
    except ProtocolError:
        # no counts, or counts so lopsided that linear inversion has no positive trace
        start = np.eye(4, dtype=complex) / 4
    seed_rho = (1 - _INIT_MIX) * start + _INIT_MIX * np.eye(4) / 4
    t, history, iters, converged = _kernels.mle_ascent(
        cholesky_factor(seed_rho), ps.vectors, c, cfg.mle_tolerance, cfg.mle_max_iters
    )
    return MLEResult(density_from_factor(t), np.asarray(history), int(iters), bool(converged), start)


def mle_refine(counts, ps, cfg):
    """Physical (PSD, unit-trace) maximum-likelihood estimate.

    Hitting ``mle_max_iters`` is not an error: the best iterate is returned
    and an ``MLEConvergenceWarning`` is issued.
    """
    res = mle_fit(counts, ps, cfg)
    if not res.converged:
        warnings.warn(f"MLE stopped after {res.iterations} iterations without converging", MLEConvergenceWarning)
    return res.rho


@dataclass
class SuperObserverRow:
    external_time: float
    fidelity: float
    converged: bool = True


@dataclass
class SuperObserverReport:
    rows: list

    def fidelities(self):
        return np.array([r.fidelity for r in self.rows])

    @property
    def all_converged(self):
        return all(r.converged for r in self.rows)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow([repr(r.external_time), repr(r.fidelity)])
        return buf.getvalue()

    def to_records(self):
        return [{"external_time_over_omega": r.external_time, "fidelity": r.fidelity} for r in self.rows]

    def to_text_table(self):
        lines = ['"external" time   Fidelity', "-" * 27]
        for r in self.rows:
            lines.append(f"{time_label(r.external_time):<18}{r.fidelity:.3f}")
        return "\n".join(lines) + "\n"


def time_label(x):
    """Pretty label such as "π/4ω" for multiples of pi/4 (x in units of 1/omega)."""
    k = x / (np.pi / 4)
    if abs(k - round(k)) > 1e-6:
        return f"{x:.4g}/ω"
    k = int(round(k))
    if k == 0:
        return "0"
    num, den = k, 4
    while den > 1 and num % 2 == 0:
        num //= 2
        den //= 2
    head = "π" if num == 1 else f"{num}π"
    return f"{head}/ω" if den == 1 else f"{head}/{den}ω"


def run_superobserver(cfg):
    """Fidelity of the reconstructed global state to the singlet at each external time."""
    ps = build_projector_set()
    truth = SINGLET
    rows = []
    for i, t in sorted(enumerate(cfg.external_times), key=lambda it: it[1]):
        if cfg.erasure_visibility == 1.0:
            rho = erased_global_state(t)
        else:
            rho = erased_global_density(t, cfg.erasure_visibility)
        counts = simulate_tomography_counts(rho, ps, cfg.counts_per_projection, cfg.rng_seed, (STREAM_TAG, i))
        res = mle_fit(counts, ps, cfg)
        rows.append(SuperObserverRow(t, fidelity(truth, res.rho), res.converged))
    return SuperObserverReport(rows)
