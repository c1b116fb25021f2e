"""Dense complex linear algebra for one and two polarization qubits.

Basis ordering is fixed everywhere: (H, V) for one photon and
(HH, HV, VH, VV) for a pair, with the first factor being photon 1.
"""

import numpy as np

from pwclock import _kernels

H = np.array([1.0, 0.0], dtype=complex)
V = np.array([0.0, 1.0], dtype=complex)

I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10


def _check_dim(x, name):
    x = np.asarray(x, dtype=complex)
    if x.ndim == 1:
        ok = x.shape[0] in (2, 4)
    elif x.ndim == 2:
        ok = x.shape[0] == x.shape[1] and x.shape[0] in (2, 4)
    else:
        ok = False
    if not ok:
        raise ValueError(f"{name} must be a vector or square matrix of dimension 2 or 4, got shape {x.shape}")
    return x


def ket(*labels):
    """Basis ket from polarization labels, e.g. ``ket("H", "V")`` is |HV>."""
    basis = {"H": H, "V": V}
    out = np.array([1.0 + 0j])
    for label in labels:
        out = np.kron(out, basis[label])
    return out


def projector(psi):
    psi = np.asarray(psi, dtype=complex)
    return np.outer(psi, psi.conj())


def is_pure_state(psi, tol=1e-12):
    psi = np.asarray(psi)
    return psi.ndim == 1 and psi.shape[0] in (2, 4) and abs(np.vdot(psi, psi).real - 1.0) <= tol


def is_density_matrix(rho, tol=1e-12):
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 4):
        return False
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        return False
    if abs(np.trace(rho) - 1.0) > tol:
        return False
    return bool(np.linalg.eigvalsh(rho).min() >= -PSD_TOL)


def is_unitary(u, tol=1e-12):
    u = np.asarray(u)
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))) <= tol)


def tensor_product(a, b):
    """Kronecker product of two single-photon objects (vectors or matrices)."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape[0] != 2 or b.shape[0] != 2 or a.ndim != b.ndim or a.shape != b.shape:
        raise ValueError(f"tensor_product needs two operands of dimension 2 and the same kind, got {a.shape} and {b.shape}")
    return np.kron(a, b)


def partial_trace(rho, keep):
    """Reduce a two-photon density matrix onto photon ``keep`` (1 or 2)."""
    if keep not in (1, 2):
        raise ValueError(f"keep must be 1 or 2, got {keep!r}")
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"partial_trace expects a 4x4 matrix, got shape {rho.shape}")
    r = rho.reshape(2, 2, 2, 2)
    if keep == 1:
        return np.einsum("ajbj->ab", r)
    return np.einsum("jajb->ab", r)


def eig_hermitian(m):
    """Eigen-decomposition of a Hermitian matrix.

    Returns eigenvalues in descending order and orthonormal eigenvector
    columns. Each eigenvector is rephased so that its largest-magnitude
    component (the first one on ties) is real and positive.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"eig_hermitian expects a square matrix, got shape {m.shape}")
    if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
        raise ValueError("eig_hermitian: matrix is not Hermitian")
    m = 0.5 * (m + m.conj().T)
    w, v = _kernels.eigh(m)
    order = np.argsort(-w, kind="stable")
    w = np.asarray(w)[order]
    v = np.asarray(v)[:, order]
    for j in range(v.shape[1]):
        col = v[:, j]
        mags = np.abs(col)
        k = int(np.flatnonzero(mags >= mags.max() - 1e-12)[0])
        v[:, j] = col * (np.conj(col[k]) / mags[k])
    return w, v


def sqrt_psd(m):
    """Principal square root of a positive semidefinite Hermitian matrix."""
    w, v = eig_hermitian(m)
    if w.min() < -PSD_TOL:
        raise ValueError(f"sqrt_psd: matrix is not positive semidefinite (min eigenvalue {w.min():.3e})")
    root = np.sqrt(np.clip(w, 0.0, None))
    return (v * root) @ v.conj().T


def _as_density(x):
    x = np.asarray(x, dtype=complex)
    return projector(x) if x.ndim == 1 else x


def fidelity(rho_in, rho_out):
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2.

    Either argument may be a state vector. Pure inputs take the exact
    overlap route, which avoids square roots of near-zero eigenvalues.
    """
    a = _check_dim(rho_in, "rho_in")
    b = _check_dim(rho_out, "rho_out")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"fidelity: dimension mismatch {a.shape[0]} vs {b.shape[0]}")
    if a.ndim == 1 and b.ndim == 1:
        f = abs(np.vdot(a, b)) ** 2
    elif a.ndim == 1:
        f = np.vdot(a, b @ a).real
    elif b.ndim == 1:
        f = np.vdot(b, a @ b).real
    else:
        wa, va = eig_hermitian(a)
        wb, vb = eig_hermitian(b)
        if wa[0] >= 1.0 - 1e-12:
            return fidelity(va[:, 0], b)
        if wb[0] >= 1.0 - 1e-12:
            return fidelity(a, vb[:, 0])
        if wa.min() < -PSD_TOL:
            raise ValueError(f"fidelity: rho_in is not positive semidefinite (min eigenvalue {wa.min():.3e})")
        root = (va * np.sqrt(np.clip(wa, 0.0, None))) @ va.conj().T
        inner = root @ b @ root
        w, _ = eig_hermitian(0.5 * (inner + inner.conj().T))
        f = np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2
    return float(min(max(f, 0.0), 1.0))
