"""Concrete systems: lacunary exponentials, Walsh characters, Haar unitaries,
sign-matrix ensembles, Gaussian samples, and the polar domination operator."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.linalg import hadamard

from .chaos import gaussian_sample
from .spaces import FunctionSystem, MatricialSystem, ProbabilitySpace


class RejectionTooHigh(RuntimeError):
    """The sign-matrix sampler rejected almost every draw."""


def make_lacunary(exponents, grid_m):
    """Rows ``exp(i N(n) theta)`` on the uniform ``grid_m``-point circle grid."""
    ex = np.asarray(exponents, dtype=np.int64)
    if ex.ndim != 1 or ex.size == 0:
        raise ValueError("need a nonempty list of exponents")
    if np.any(np.diff(ex) <= 0):
        raise ValueError("exponents must be strictly increasing")
    if grid_m <= 2 * np.abs(ex).max():
        raise ValueError(f"grid of {grid_m} points aliases exponent {np.abs(ex).max()}")
    theta = 2 * np.pi * np.arange(grid_m) / grid_m
    vals = np.exp(1j * np.outer(ex, theta))
    # exact on the real axis where the phase is a multiple of pi/2
    vals = np.where(np.abs(vals.real) < 1e-15, 1j * vals.imag, vals)
    vals = np.where(np.abs(vals.imag) < 1e-15, vals.real, vals)
    return FunctionSystem(ProbabilitySpace.uniform(grid_m), vals, f"lacunary{ex.tolist()}")


def lacunary_ratio(exponents):
    ex = np.asarray(exponents, dtype=float)
    pos = ex[ex > 0]
    if pos.size < 2:
        return float("inf")
    return float((pos[1:] / pos[:-1]).min())


def make_walsh(m, subsets):
    """Walsh characters ``w_A(x) = prod_{k in A} x_k`` on ``{-1, 1}^m``.

    Indices are 1-based. Point ``s`` has ``x_k = -1`` iff bit ``k-1`` of ``s`` is set.
    """
    subsets = [tuple(sorted(set(A))) for A in subsets]
    if not subsets:
        raise ValueError("need at least one subset")
    if len(set(subsets)) != len(subsets):
        raise ValueError("subsets must be distinct")
    for A in subsets:
        if any(k < 1 or k > m for k in A):
            raise ValueError(f"index out of range 1..{m} in {A}")
    pts = np.arange(1 << m)
    x = 1 - 2 * ((pts[None, :] >> np.arange(m)[:, None]) & 1)
    rows = [np.prod(x[[k - 1 for k in A]], axis=0) if A else np.ones(1 << m) for A in subsets]
    return FunctionSystem(ProbabilitySpace.uniform(1 << m), np.array(rows, dtype=float), f"walsh{m}")


def make_rademacher(m):
    return make_walsh(m, [(k,) for k in range(1, m + 1)])


def all_walsh(m):
    subsets = [tuple(k + 1 for k in range(m) if (s >> k) & 1) for s in range(1 << m)]
    return make_walsh(m, subsets)


def make_gaussian_system(N, S, seed=None, is_complex=False):
    """Rows are i.i.d. (complex) standard normal samples on an S-point uniform space."""
    g = gaussian_sample(N, S, seed, is_complex)
    return FunctionSystem(ProbabilitySpace.uniform(S), g.values().T, "gaussian")


# ---------------------------------------------------------------------------
# Haar unitaries
# ---------------------------------------------------------------------------

def haar_unitaries(d, S, rng=None):
    """``S x d x d`` Haar unitaries: QR of Ginibre, diagonal of R made positive."""
    rng = np.random.default_rng(rng)
    Z = (rng.standard_normal((S, d, d)) + 1j * rng.standard_normal((S, d, d))) / np.sqrt(2.0)
    Q, R = np.linalg.qr(Z)
    diag = np.diagonal(R, axis1=1, axis2=2)
    ph = diag / np.abs(diag)
    return Q * ph[:, None, :]


def make_haar_unitary_system(d, S, seed=None):
    """Singleton matricial system whose value at sample ``s`` is a Haar unitary.

    Blocks follow the orthonormal-entry normalization, so ``sqrt(d) u(i, j)``
    is the orthonormal entry family and ``||u(t)||_op = 1``.
    """
    if S < 1:
        raise ValueError("S must be >= 1")
    U = haar_unitaries(d, S, seed)
    return MatricialSystem(ProbabilitySpace.uniform(S), (np.moveaxis(U, 0, 2),), f"haar-U({d})")


def character_samples(d, S, seed=None):
    """``tr(u_s)`` for Haar samples, as a one-row system."""
    if S < 1000:
        raise ValueError("need S >= 1000")
    U = haar_unitaries(d, S, seed)
    return FunctionSystem(ProbabilitySpace.uniform(S), np.trace(U, axis1=1, axis2=2), f"char-U({d})")


# ---------------------------------------------------------------------------
# sign matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SignMatrixEnsemble:
    n: int
    chi: float
    members: np.ndarray  # count x n x n
    rejection_rate: float

    def __post_init__(self):
        m = np.array(self.members, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "members", m)

    @property
    def count(self):
        return self.members.shape[0]

    def valid(self):
        ok_entries = np.all(np.abs(np.abs(self.members) * np.sqrt(self.n) - 1) < 1e-12)
        norms = np.linalg.norm(self.members, ord=2, axis=(1, 2))
        return bool(ok_entries and np.all(norms <= self.chi + 1e-12))


def _is_pow2(n):
    return n >= 1 and n & (n - 1) == 0


def all_sign_matrices(n):
    """Every ``n x n`` matrix with entries ``+-1/sqrt(n)`` (only for tiny n)."""
    if n * n > 20:
        raise ValueError("exhaustive enumeration only for n*n <= 20")
    signs = np.array(list(product((1.0, -1.0), repeat=n * n)))
    return signs.reshape(-1, n, n) / np.sqrt(n)


def make_sign_ensemble(n, chi=2.5, count=256, seed=None, max_draws=None):
    """Uniform ``+-1/sqrt(n)`` matrices conditioned on ``||a|| <= chi``."""
    if chi < 1:
        raise ValueError("chi must be >= 1")
    rng = np.random.default_rng(seed)
    members = []
    if _is_pow2(n):
        members.append(hadamard(n).astype(float) / np.sqrt(n))
    max_draws = max_draws or max(1000, 2000 * count)
    draws = accepted = 0
    while len(members) < count:
        if draws >= max_draws:
            break
        batch = min(max(2 * (count - len(members)), 64), max_draws - draws)
        A = (1.0 - 2.0 * rng.integers(0, 2, size=(batch, n, n))) / np.sqrt(n)
        ok = np.linalg.norm(A, ord=2, axis=(1, 2)) <= chi + 1e-12
        draws += batch
        accepted += int(ok.sum())
        members.extend(A[ok][: count - len(members)])
    rate = 1.0 - accepted / draws if draws else 0.0
    if rate > 0.999:
        raise RejectionTooHigh(f"rejection rate {rate:.4f} at chi={chi}; increase chi")
    if len(members) < count:
        raise RejectionTooHigh(f"only {len(members)} of {count} members within {max_draws} draws")
    return SignMatrixEnsemble(n, chi, np.array(members[:count]), rate)


# ---------------------------------------------------------------------------
# polar domination
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolarDominationOperator:
    d: int
    delta_hat: float
    samples: int
    std_error: float
    offdiag_norm: float  # ||offdiag(mean |g|)||_op

    @property
    def commutant_ok(self):
        return self.offdiag_norm <= 5.0 / np.sqrt(self.samples) * self.delta_hat


def ginibre(d, S, rng=None):
    """Complex Gaussian ``d x d`` matrices with ``E|g(i,j)|^2 = 1/d``."""
    rng = np.random.default_rng(rng)
    return (rng.standard_normal((S, d, d)) + 1j * rng.standard_normal((S, d, d))) / np.sqrt(2.0 * d)


def _polar(g):
    U, s, Vh = np.linalg.svd(g)
    return U @ Vh, s, Vh


@lru_cache(maxsize=32)
def polar_domination_operator(d, samples=10_000, seed=0):
    """Estimate ``delta_d = d^{-1} E tr|g|`` for Ginibre ``g``."""
    g = ginibre(d, samples, seed)
    _, s, Vh = _polar(g)
    per = s.sum(axis=1) / d
    absg = np.einsum("sji,sj,sjk->ik", Vh.conj(), s, Vh) / samples  # mean of V diag(s) V^*
    off = absg - np.diag(np.diag(absg))
    return PolarDominationOperator(d, float(per.mean()), samples, float(per.std(ddof=1) / np.sqrt(samples)),
                                   float(np.linalg.norm(off, 2)))


def polar_domination_apply(op, g_samples):
    """Polar unitary parts ``v_s`` of ``g_s = v_s |g_s|`` and the scalar ``delta_hat``.

    Zero singular values (a null event) are handled by the SVD form ``U V^*``.
    """
    g = np.asarray(g_samples, dtype=complex)
    if g.ndim == 2:
        g = g[None]
    if g.shape[1:] != (op.d, op.d):
        raise ValueError("sample dimension does not match the operator")
    v, _, _ = _polar(g)
    return v, op.delta_hat


def haar_moment_deviation(V):
    """Max deviation of first and second entry moments from the Haar values."""
    S, d, _ = V.shape
    E = V.reshape(S, d * d)
    first = float(np.abs(E.mean(axis=0)).max())
    second = float(np.abs(E.T @ E.conj() / S - np.eye(d * d) / d).max())
    return first, second
