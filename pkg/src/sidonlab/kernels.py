"""Hot inner loops.

The enumeration kernels have a numba version and a numpy version with
identical semantics; :func:`sidonlab._accel.use_numba` picks one at call
time.  Grid suprema are matrix products, where BLAS beats hand loops, so
they are numpy only.  The numpy versions are chunked so that memory stays
bounded.
"""
import numpy as np

from ._accel import njit, use_numba

_CHUNK = 1 << 14


# ---------------------------------------------------------------------------
# exact injective norm of a real matrix: max over eps in {+-1}^m of
#   sum_j | sum_i eps_i A[i, j] |
# ---------------------------------------------------------------------------

@njit(cache=True)
def _sign_enum_numba(A):
    m, n = A.shape
    v = np.empty(n)
    eps = np.ones(m)
    for j in range(n):
        s = 0.0
        for i in range(m):
            s += A[i, j]
        v[j] = s
    best = 0.0
    for j in range(n):
        best += abs(v[j])
    best_code = 0
    # Gray code over eps[1:], eps[0] fixed to +1 (global sign symmetry)
    total = 1 << (m - 1)
    gray_prev = 0
    for k in range(1, total):
        gray = k ^ (k >> 1)
        diff = gray ^ gray_prev
        bit = 0
        while (diff >> bit) != 1:
            bit += 1
        i = bit + 1
        eps[i] = -eps[i]
        val = 0.0
        for j in range(n):
            v[j] += 2.0 * eps[i] * A[i, j]
            val += abs(v[j])
        if val > best:
            best = val
            best_code = gray
        gray_prev = gray
    out = np.ones(m)
    for b in range(m - 1):
        if (best_code >> b) & 1:
            out[b + 1] = -1.0
    return best, out


def _sign_enum_numpy(A):
    m, n = A.shape
    total = 1 << (m - 1)
    best, best_eps = -1.0, None
    bits = np.arange(m - 1)
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK))
        signs = 1.0 - 2.0 * ((codes[:, None] >> bits[None, :]) & 1)
        eps = np.hstack([np.ones((codes.size, 1)), signs])
        vals = np.abs(eps @ A).sum(axis=1)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_eps = float(vals[k]), eps[k].copy()
    return best, best_eps


def sign_enumeration(A):
    """Exact ``max_eps sum_j |(eps @ A)_j|`` with the maximizing sign vector."""
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.shape[0] == 1:
        return float(np.abs(A).sum()), np.ones(1)
    if use_numba():
        best, eps = _sign_enum_numba(A)
        return float(best), eps
    return _sign_enum_numpy(A)


# ---------------------------------------------------------------------------
# complex phase-grid enumeration: max over z in (Q-th roots)^m, z_0 = 1, of
#   sum_j | sum_i z_i A[i, j] |
# ---------------------------------------------------------------------------

@njit(cache=True)
def _phase_enum_numba(Ar, Ai, Q):
    # odometer over z[1:], updating v = z @ A only in the digits that change
    m, n = Ar.shape
    cq = np.cos(2.0 * np.pi * np.arange(Q) / Q)
    sq = np.sin(2.0 * np.pi * np.arange(Q) / Q)
    total = Q ** (m - 1)
    vr = np.zeros(n)
    vi = np.zeros(n)
    for j in range(n):
        for i in range(m):
            vr[j] += Ar[i, j]
            vi[j] += Ai[i, j]
    idx = np.zeros(m, dtype=np.int64)
    best = -1.0
    best_code = 0
    for code in range(total):
        if code > 0:
            i = 1
            while True:
                old = idx[i]
                new = old + 1
                if new == Q:
                    new = 0
                idx[i] = new
                dr = cq[new] - cq[old]
                di = sq[new] - sq[old]
                for j in range(n):
                    vr[j] += dr * Ar[i, j] - di * Ai[i, j]
                    vi[j] += dr * Ai[i, j] + di * Ar[i, j]
                if new != 0:
                    break
                i += 1
        val = 0.0
        for j in range(n):
            val += np.sqrt(vr[j] * vr[j] + vi[j] * vi[j])
        if val > best:
            best = val
            best_code = code
    return best, best_code


def _phase_enum_numpy(A, Q):
    m, n = A.shape
    roots = np.exp(2j * np.pi * np.arange(Q) / Q)
    total = Q ** (m - 1)
    best, best_code = -1.0, 0
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK))
        z = np.ones((codes.size, m), dtype=complex)
        c = codes.copy()
        for i in range(1, m):
            z[:, i] = roots[c % Q]
            c //= Q
        vals = np.abs(z @ A).sum(axis=1)
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_code = float(vals[k]), int(codes[k])
    return best, best_code


def phase_enumeration(A, Q):
    """Max of ``sum_j |(z @ A)_j|`` over Q-gon phase vectors with ``z_0 = 1``."""
    A = np.asarray(A, dtype=complex)
    m = A.shape[0]
    if use_numba():
        best, code = _phase_enum_numba(np.ascontiguousarray(A.real), np.ascontiguousarray(A.imag), Q)
    else:
        best, code = _phase_enum_numpy(A, Q)
    z = np.ones(m, dtype=complex)
    c = int(code)
    for i in range(1, m):
        z[i] = np.exp(2j * np.pi * (c % Q) / Q)
        c //= Q
    return float(np.abs(z @ A).sum()), z


# ---------------------------------------------------------------------------
# sup over a k-fold product grid of |sum_n a_n prod_q phi^q_n(t_q)|
# ---------------------------------------------------------------------------

def _product_sup_numpy(a, factors):
    first = factors[0]
    rest = factors[1:]
    sizes = [f.shape[1] for f in rest]
    outer = int(np.prod(sizes)) if sizes else 1
    best, best_t0, best_flat = -1.0, 0, 0
    for start in range(0, outer, 1024):
        codes = np.arange(start, min(outer, start + 1024))
        coef = np.broadcast_to(a, (codes.size, a.size)).astype(complex)
        c = codes.copy()
        for f, s in zip(rest, sizes):
            coef = coef * f[:, c % s].T
            c //= s
        vals = np.abs(coef @ first)
        flat = int(np.argmax(vals))
        r, t0 = divmod(flat, first.shape[1])
        if vals[r, t0] > best:
            best, best_t0, best_flat = float(vals[r, t0]), int(t0), int(codes[r])
    return best, best_t0, best_flat


def product_grid_sup(a, factors):
    """Exact sup over the full product grid, evaluated lazily.

    Returns ``(value, argmax)`` where ``argmax`` is the tuple of per-factor
    point indices.
    """
    a = np.asarray(a, dtype=complex)
    factors = [np.asarray(f, dtype=complex) for f in factors]
    sizes = [f.shape[1] for f in factors]
    val, t0, flat = _product_sup_numpy(a, factors)
    idx = [int(t0)]
    c = int(flat)
    for s in sizes[1:]:
        idx.append(c % int(s))
        c //= int(s)
    return float(val), tuple(idx)


# ---------------------------------------------------------------------------
# batched sup-norm: for each sample row s, max_t |sum_n C[s, n] Phi[n, t]|
# ---------------------------------------------------------------------------

def row_sup(C, Phi):
    """``max_t |(C @ Phi)[s, t]|`` for every row ``s``."""
    C = np.asarray(C, dtype=complex)
    Phi = np.asarray(Phi, dtype=complex)
    out = np.empty(C.shape[0])
    for start in range(0, C.shape[0], 256):
        out[start:start + 256] = np.abs(C[start:start + 256] @ Phi).max(axis=1)
    return out
