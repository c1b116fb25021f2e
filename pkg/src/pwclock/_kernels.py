"""Hot numeric kernels with numba and pure-numpy implementations.

Set ``PWCLOCK_DISABLE_NUMBA=1`` to force the numpy path. Both variants are
always importable so they can be cross-checked and benchmarked against each
other; ``eigh`` and ``mle_ascent`` dispatch to whichever one is active.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

_DISABLED = os.environ.get("PWCLOCK_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

USE_NUMBA = numba is not None and not _DISABLED


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)


# ---------------------------------------------------------------------------
# Hermitian eigensolver
# ---------------------------------------------------------------------------


def _jacobi_eigh(a, tol, max_sweeps):
    # Cyclic complex Jacobi. Each rotation first removes the phase of a[p, q]
    # and then applies a real Givens rotation that zeroes it.
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += abs(a[i, j]) ** 2
    scale = np.sqrt(scale)
    if scale == 0.0:
        return np.zeros(n), v
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                off += abs(a[i, j]) ** 2
        if np.sqrt(off) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                b = a[p, q]
                mag = abs(b)
                if mag <= 1e-300:
                    continue
                ph = np.conj(b) / mag
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                rpp = c + 0j
                rpq = s + 0j
                rqp = -s * ph
                rqq = c * ph
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * rpp + akq * rqp
                    a[k, q] = akp * rpq + akq * rqq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = np.conj(rpp) * apk + np.conj(rqp) * aqk
                    a[q, k] = np.conj(rpq) * apk + np.conj(rqq) * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp * rpp + vkq * rqp
                    v[k, q] = vkp * rpq + vkq * rqq
    w = np.empty(n)
    for i in range(n):
        w[i] = a[i, i].real
    return w, v


jacobi_eigh = _njit(_jacobi_eigh)


def numpy_eigh(a, tol=0.0, max_sweeps=0):
    return np.linalg.eigh(a)


def eigh(a, tol=1e-15, max_sweeps=64):
    """Unsorted eigenpairs of a Hermitian matrix via the active backend."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    if USE_NUMBA:
        return jacobi_eigh(a, tol, max_sweeps)
    return numpy_eigh(a)


# ---------------------------------------------------------------------------
# Maximum-likelihood ascent on the Cholesky factor
# ---------------------------------------------------------------------------
#
# Objective: sum_k n_k log q_k - N log sum_k q_k with q_k = ||T psi_k||^2,
# i.e. the Poisson likelihood with the total rate profiled out. It depends on
# T only up to scale. T is packed into 16 reals: the 4 diagonal entries, then
# (re, im) of each strictly-lower entry in row-major order. The search is
# L-BFGS with Armijo backtracking, so every accepted step raises the objective.

N_PARAMS = 16
LBFGS_MEMORY = 8
ARMIJO_C = 1e-4


def _unpack(x):
    t = np.zeros((4, 4), dtype=np.complex128)
    for a in range(4):
        t[a, a] = x[a]
    i = 4
    for a in range(4):
        for b in range(a):
            t[a, b] = x[i] + 1j * x[i + 1]
            i += 2
    return t


def _pack_gradient(g):
    out = np.empty(N_PARAMS)
    for a in range(4):
        out[a] = g[a, a].real
    i = 4
    for a in range(4):
        for b in range(a):
            out[i] = g[a, b].real
            out[i + 1] = g[a, b].imag
            i += 2
    return out


def pack_factor(t):
    """Real parameter vector of a lower-triangular 4x4 factor."""
    x = np.empty(N_PARAMS)
    for a in range(4):
        x[a] = t[a, a].real
    i = 4
    for a in range(4):
        for b in range(a):
            x[i] = t[a, b].real
            x[i + 1] = t[a, b].imag
            i += 2
    return x


def _objective_numba(x, psi, counts, total):
    # returns (loglik, gradient); gradient is meaningless when loglik is -inf
    t = _unpack(x)
    m = psi.shape[0]
    u = np.empty((m, 4), dtype=np.complex128)
    q = np.empty(m)
    qsum = 0.0
    for k in range(m):
        acc = 0.0
        for a in range(4):
            s = 0j
            for b in range(a + 1):
                s += t[a, b] * psi[k, b]
            u[k, a] = s
            acc += s.real * s.real + s.imag * s.imag
        q[k] = acc
        qsum += acc
    ll = 0.0
    for k in range(m):
        if counts[k] > 0.0:
            if q[k] <= 0.0:
                return -np.inf, np.zeros(N_PARAMS)
            ll += counts[k] * np.log(q[k])
    ll -= total * np.log(qsum)
    g = np.zeros((4, 4), dtype=np.complex128)
    for k in range(m):
        w = -total / qsum
        if counts[k] > 0.0:
            w += counts[k] / q[k]
        for a in range(4):
            for b in range(a + 1):
                g[a, b] += 2.0 * w * u[k, a] * np.conj(psi[k, b])
    return ll, _pack_gradient(g)


def _lbfgs_direction(grad, s_hist, y_hist, n_hist, head):
    # two-loop recursion for the ascent problem: y holds -(grad change)
    d = grad.copy()
    alpha = np.zeros(n_hist)
    idx = head
    for j in range(n_hist):
        idx = (idx - 1) % s_hist.shape[0]
        rho = 1.0 / np.dot(y_hist[idx], s_hist[idx])
        alpha[j] = rho * np.dot(s_hist[idx], d)
        d -= alpha[j] * y_hist[idx]
    if n_hist > 0:
        last = (head - 1) % s_hist.shape[0]
        d *= np.dot(s_hist[last], y_hist[last]) / np.dot(y_hist[last], y_hist[last])
    for j in range(n_hist - 1, -1, -1):
        idx = (head - 1 - j) % s_hist.shape[0]
        rho = 1.0 / np.dot(y_hist[idx], s_hist[idx])
        beta = rho * np.dot(y_hist[idx], d)
        d += (alpha[j] - beta) * s_hist[idx]
    return d


_lbfgs_direction_numba = _njit(_lbfgs_direction)


def _mle_ascent_numba(x0, psi, counts, tol, max_iters):
    total = counts.sum()
    x = x0 / np.sqrt(np.dot(x0, x0))
    history = np.empty(max_iters + 1)
    ll, g = _objective_numba(x, psi, counts, total)
    history[0] = ll
    if total <= 0.0:
        return x, history[:1], 0, True
    s_hist = np.zeros((LBFGS_MEMORY, N_PARAMS))
    y_hist = np.zeros((LBFGS_MEMORY, N_PARAMS))
    n_hist = 0
    head = 0
    converged = False
    it = 0
    while it < max_iters:
        d = _lbfgs_direction_numba(g, s_hist, y_hist, n_hist, head)
        slope = np.dot(g, d)
        if not slope > 0.0:
            n_hist = 0
            d = g / total
            slope = np.dot(g, d)
        if slope == 0.0:
            converged = True
            break
        step = 1.0
        accepted = False
        for _ in range(60):
            x_new = x + step * d
            ll_new, g_new = _objective_numba(x_new, psi, counts, total)
            if ll_new >= ll + ARMIJO_C * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if n_hist > 0:
                n_hist = 0
                continue
            converged = True
            break
        it += 1
        s = x_new - x
        y = g - g_new
        if np.dot(s, y) > 1e-300:
            s_hist[head] = s
            y_hist[head] = y
            head = (head + 1) % LBFGS_MEMORY
            n_hist = min(n_hist + 1, LBFGS_MEMORY)
        gain = ll_new - ll
        # rescaling leaves the objective unchanged and keeps x well scaled
        scale = np.sqrt(np.dot(x_new, x_new))
        x = x_new / scale
        g = g_new * scale
        s_hist *= 1.0 / scale
        y_hist *= scale
        ll = ll_new
        history[it] = ll
        if gain < tol:
            converged = True
            break
    return x, history[: it + 1], it, converged


_unpack = _njit(_unpack)
_pack_gradient = _njit(_pack_gradient)
_objective_numba = _njit(_objective_numba)
mle_ascent_numba = _njit(_mle_ascent_numba)


_TRIL_ROWS, _TRIL_COLS = np.tril_indices(4, -1)


def _unpack_numpy(x):
    t = np.diag(x[:4]).astype(np.complex128)
    t[_TRIL_ROWS, _TRIL_COLS] = x[4::2] + 1j * x[5::2]
    return t


def _objective_numpy(x, psi, counts, total):
    t = _unpack_numpy(x)
    u = psi @ t.T
    q = np.einsum("ka,ka->k", u.conj(), u).real
    qsum = q.sum()
    pos = counts > 0
    if np.any(q[pos] <= 0.0):
        return -np.inf, np.zeros(N_PARAMS)
    ll = float(np.dot(counts[pos], np.log(q[pos])) - total * np.log(qsum))
    w = np.divide(counts, q, out=np.zeros_like(q), where=pos) - total / qsum
    g = 2.0 * np.einsum("k,ka,kb->ab", w, u, psi.conj())
    out = np.empty(N_PARAMS)
    out[:4] = g.diagonal().real
    low = g[_TRIL_ROWS, _TRIL_COLS]
    out[4::2] = low.real
    out[5::2] = low.imag
    return ll, out


def mle_ascent_numpy(x0, psi, counts, tol, max_iters):
    total = counts.sum()
    x = x0 / np.sqrt(np.dot(x0, x0))
    history = np.empty(max_iters + 1)
    ll, g = _objective_numpy(x, psi, counts, total)
    history[0] = ll
    if total <= 0.0:
        return x, history[:1], 0, True
    s_hist = np.zeros((LBFGS_MEMORY, N_PARAMS))
    y_hist = np.zeros((LBFGS_MEMORY, N_PARAMS))
    n_hist = 0
    head = 0
    converged = False
    it = 0
    while it < max_iters:
        d = _lbfgs_direction(g, s_hist, y_hist, n_hist, head)
        slope = np.dot(g, d)
        if not slope > 0.0:
            n_hist = 0
            d = g / total
            slope = np.dot(g, d)
        if slope == 0.0:
            converged = True
            break
        step = 1.0
        accepted = False
        for _ in range(60):
            x_new = x + step * d
            ll_new, g_new = _objective_numpy(x_new, psi, counts, total)
            if ll_new >= ll + ARMIJO_C * step * slope:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            if n_hist > 0:
                n_hist = 0
                continue
            converged = True
            break
        it += 1
        s = x_new - x
        y = g - g_new
        if np.dot(s, y) > 1e-300:
            s_hist[head] = s
            y_hist[head] = y
            head = (head + 1) % LBFGS_MEMORY
            n_hist = min(n_hist + 1, LBFGS_MEMORY)
        gain = ll_new - ll
        # rescaling leaves the objective unchanged and keeps x well scaled
        scale = np.sqrt(np.dot(x_new, x_new))
        x = x_new / scale
        g = g_new * scale
        s_hist *= 1.0 / scale
        y_hist *= scale
        ll = ll_new
        history[it] = ll
        if gain < tol:
            converged = True
            break
    return x, history[: it + 1], it, converged


def mle_ascent(t0, psi, counts, tol, max_iters):
    """Run the likelihood ascent with the active backend.

    ``t0`` is the lower-triangular starting factor. Returns
    ``(T, loglik_history, iterations, converged)`` with T at unit norm.
    """
    x0 = pack_factor(np.asarray(t0, dtype=np.complex128))
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    counts = np.ascontiguousarray(counts, dtype=np.float64)
    if USE_NUMBA:
        x, hist, it, conv = mle_ascent_numba(x0, psi, counts, float(tol), int(max_iters))
    else:
        x, hist, it, conv = mle_ascent_numpy(x0, psi, counts, float(tol), int(max_iters))
    return _unpack_numpy(x), hist, it, conv
