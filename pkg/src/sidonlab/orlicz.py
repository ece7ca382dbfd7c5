"""psi_2 Orlicz norms and subGaussian constants of function systems."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .spaces import MatricialSystem


@dataclass(frozen=True)
class Psi2Result:
    norm: float
    method: str  # "orlicz-bisection" | "lp-equivalent"
    iterations: int


@dataclass(frozen=True)
class SubGaussianReport:
    constant_C: float
    constant_sigma: float
    witness: np.ndarray
    restarts: int
    sigma_witness: np.ndarray
    sigma_scale: float
    sigma_at_endpoint: bool


def _abs_and_weights(f, weights):
    f = np.abs(np.asarray(f, dtype=complex))
    w = np.asarray(weights, dtype=float)
    keep = w > 0
    return f[..., keep], w[keep]


def psi2_norm_batch(F, weights, rtol=1e-15, max_iter=200):
    """Row-wise psi_2 norms ``inf{t : sum_i w_i exp(|f_i|/t)^2 <= e}``.

    Bisection in ``log t`` on the bracket ``[max|f| * 1e-3, max|f|]``; the
    upper end is always feasible and the lower end is extended until it is
    infeasible.  Returns ``(norms, iterations)``.
    """
    A, w = _abs_and_weights(np.atleast_2d(F), weights)
    m = A.max(axis=1)
    out = np.zeros(A.shape[0])
    live = m > 0
    if not np.any(live):
        return out, 0
    A = A[live] / m[live, None]  # scale-free: the norm of A_row times m
    B = A * A

    Bm1 = B - 1.0  # max entry of each row is 0, so shifting by s is an exact logsumexp

    def excess(t):
        s = 1.0 / (t * t)
        return s + np.log(np.exp(Bm1 * s[:, None]) @ w) - 1.0

    hi = np.ones(A.shape[0])
    lo = np.full(A.shape[0], 1e-3)
    while True:
        bad = excess(lo) <= 0
        if not np.any(bad):
            break
        lo[bad] *= 1e-3
    it = 0
    while it < max_iter and np.any(hi - lo > rtol * hi):
        mid = np.sqrt(lo * hi)
        ok = excess(mid) <= 0
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
        it += 1
    out[live] = hi * m[live]
    return out, it


def psi2_norm(f, weights):
    """psi_2 norm of one function on a finite space."""
    norms, it = psi2_norm_batch(np.atleast_2d(f), weights)
    return Psi2Result(float(norms[0]), "orlicz-bisection", it)


def psi2_norm_lp(f, weights, p_max=64.0, grid=64):
    """``sup_p p^{-1/2} ||f||_p`` over a geometric grid of ``p`` in ``[2, p_max]``."""
    if p_max < 2:
        raise ValueError("p_max must be >= 2")
    a, w = _abs_and_weights(f, weights)
    if not np.any(a > 0):
        return Psi2Result(0.0, "lp-equivalent", grid)
    ps = np.geomspace(2.0, p_max, grid) if p_max > 2 else np.array([2.0])
    pos = a > 0
    la, lw = np.log(a[pos]), np.log(w[pos])
    vals = [np.exp(logsumexp(lw + p * la) / p) / np.sqrt(p) for p in ps]
    return Psi2Result(float(max(vals)), "lp-equivalent", len(ps))


def _values_of(sys):
    if isinstance(sys, MatricialSystem):
        sys = sys.flatten()
    return sys.values, sys.space.weights


def _to_complex(x):
    n = x.shape[-1] // 2
    return x[..., :n] + 1j * x[..., n:]


def _to_real(y):
    return np.concatenate([y.real, y.imag], axis=-1)


def _sphere(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def sigma_constant(values, weights, directions, scales=None):
    """``sup_{r, y} sqrt(2 ln E exp Re(r sum y_n phi_n)) / r`` over given unit ``y``.

    Returns ``(sigma, best_direction, best_scale, hit_endpoint)``.
    """
    if scales is None:
        scales = np.geomspace(1e-3, 1e3, 64)
    w = np.asarray(weights, dtype=float)
    keep = w > 0
    logw = np.log(w[keep])
    Y = np.atleast_2d(directions)
    G = (Y @ values)[:, keep].real
    best, arg = -np.inf, (0, 0)
    for j, r in enumerate(scales):
        L = logsumexp(logw[None, :] + r * G, axis=1)
        s = np.sqrt(2.0 * np.maximum(L, 0.0)) / r
        k = int(np.argmax(s))
        if s[k] > best:
            best, arg = float(s[k]), (k, j)
    endpoint = arg[1] in (0, len(scales) - 1)
    return best, Y[arg[0]], float(scales[arg[1]]), endpoint


def subgaussian_constant(sys, restarts=8, steps=60, rng=None, initial=None, h=1e-6):
    """Lower bound for the best C with ``||sum y_n phi_n||_psi2 <= C ||y||_2``.

    Multi-start projected ascent on the complex unit sphere using central
    difference gradients.  Coordinate directions are always evaluated, so
    the result dominates the psi_2 norm of every single row.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(rng)
    V, w = _values_of(sys)
    N = V.shape[0]

    def objective(X):
        # X: batch of real 2N vectors on the sphere
        return psi2_norm_batch(_to_complex(X) @ V, w)[0]

    coords = np.eye(N, dtype=complex)
    best_val = objective(_to_real(coords))
    k = int(np.argmax(best_val))
    best_y, best = coords[k], float(best_val[k])

    starts = [] if initial is None else [np.asarray(y, dtype=complex) for y in initial]
    while len(starts) < restarts:
        z = rng.standard_normal(N) + 1j * rng.standard_normal(N)
        starts.append(z)
    finals = [best_y]
    eye = np.eye(2 * N)
    for y0 in starts:
        x = _sphere(_to_real(np.asarray(y0, dtype=complex)))
        fx = float(objective(x[None, :])[0])
        eta = 0.5
        for _ in range(steps):
            probe = np.vstack([x + h * eye, x - h * eye])
            vals = objective(probe)
            grad = (vals[:2 * N] - vals[2 * N:]) / (2 * h)
            grad -= (grad @ x) * x  # tangent part
            if np.linalg.norm(grad) < 1e-12:
                break
            improved = False
            while eta > 1e-8:
                cand = _sphere(x + eta * grad)
                fc = float(objective(cand[None, :])[0])
                if fc > fx:
                    x, fx, improved = cand, fc, True
                    eta *= 1.5
                    break
                eta *= 0.5
            if not improved:
                break
        finals.append(_to_complex(x))
        if fx > best:
            best, best_y = fx, _to_complex(x)

    dirs = np.vstack(finals + [coords] + [_sphere(rng.standard_normal(N) + 1j * rng.standard_normal(N))
                                          for _ in range(restarts)])
    dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
    sigma, sy, sr, endpoint = sigma_constant(V, w, dirs)
    return SubGaussianReport(best, sigma, best_y, len(starts), sy, sr, endpoint)
