"""Projective, injective and gamma_2^* norms of kernels on finite product spaces,
and the damped decomposition of the Gaussian kernel ``S = t + r``."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .chaos import basis_values, chaos_basis, t_delta_multipliers
from .spaces import ProbabilitySpace

ENUM_CAP_REAL = 22
PHASE_Q = 64
PHASE_ENUM_BUDGET = 1 << 22


@dataclass(frozen=True, eq=False)
class TensorKernel:
    """``K[i, j]`` = kernel value at ``(t_i, s_j)``.

    ``lowrank = (X, m, Y)`` optionally records ``K = X.T @ diag(m) @ Y``.
    """

    space1: ProbabilitySpace
    space2: ProbabilitySpace
    K: np.ndarray
    lowrank: tuple | None = None

    def __post_init__(self):
        K = np.array(self.K, dtype=complex)
        if K.shape != (self.space1.size, self.space2.size):
            raise ValueError("kernel shape does not match the spaces")
        K.setflags(write=False)
        object.__setattr__(self, "K", K)
        if self.lowrank is not None:
            X, m, Y = self.lowrank
            if not np.allclose(X.T @ (np.asarray(m)[:, None] * Y), K, rtol=0, atol=1e-10):
                raise ValueError("low-rank form does not reproduce the kernel")

    @classmethod
    def from_lowrank(cls, space1, space2, X, m, Y):
        X = np.asarray(X)
        Y = np.asarray(Y)
        m = np.asarray(m)
        return cls(space1, space2, X.T @ (m[:, None] * Y), (X, m, Y))

    @property
    def weighted(self):
        return self.space1.weights[:, None] * self.K * self.space2.weights[None, :]

    @property
    def is_real(self):
        return not np.any(self.K.imag)

    def pair(self, psi1, psi2):
        """``sum_ij w1_i w2_j K_ij psi1_i psi2_j``."""
        return complex(np.asarray(psi1) @ self.weighted @ np.asarray(psi2))

    def __add__(self, other):
        return TensorKernel(self.space1, self.space2, self.K + other.K)

    def __sub__(self, other):
        return TensorKernel(self.space1, self.space2, self.K - other.K)

    def __mul__(self, c):
        return TensorKernel(self.space1, self.space2, self.K * c)

    __rmul__ = __mul__

    def to_dict(self):
        return {"space1": self.space1.to_dict(), "space2": self.space2.to_dict(),
                "K": [[[float(z.real), float(z.imag)] for z in row] for row in self.K]}

    @classmethod
    def from_dict(cls, d):
        arr = np.array(d["K"], dtype=float)
        return cls(ProbabilitySpace.from_dict(d["space1"]), ProbabilitySpace.from_dict(d["space2"]),
                   arr[..., 0] + 1j * arr[..., 1])


@dataclass(frozen=True, eq=False)
class NormCertificate:
    value: float
    witness: tuple
    exact: bool
    kind: str  # "injective" | "gamma2*"
    error_factor: float = 1.0  # true value <= value * error_factor when exact

    def evaluate(self, kernel):
        """Recompute the value from the stored witness."""
        if self.kind == "injective":
            psi1, psi2 = self.witness
            return abs(kernel.pair(psi1, psi2))
        U, V = self.witness
        return _bilinear(kernel.weighted, U, V)

    def to_dict(self):
        def enc(a):
            a = np.asarray(a)
            return {"re": a.real.tolist(), "im": a.imag.tolist()}
        return {"value": self.value, "kind": self.kind, "exact": self.exact,
                "error_factor": self.error_factor, "witness": [enc(w) for w in self.witness]}


def projective_norm(k):
    """``sum_ij w1_i w2_j |K_ij|``."""
    return float(np.sum(np.abs(k.weighted)))


def _phase(z):
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    out = np.ones_like(z)
    nz = r > 0
    out[nz] = z[nz] / r[nz]
    return out


def _sign(x):
    return np.where(np.asarray(x) >= 0, 1.0, -1.0)


def _injective_alternating(A, restarts, rng, real):
    m, n = A.shape
    best, wit = -1.0, None
    starts = [np.ones(m)]
    for _ in range(restarts - 1):
        if real:
            starts.append(_sign(rng.standard_normal(m)))
        else:
            starts.append(np.exp(2j * np.pi * rng.random(m)))
    for p1 in starts:
        p1 = p1.astype(complex)
        val = -1.0
        for _ in range(500):
            p2 = _sign((p1 @ A).real) if real else np.conj(_phase(p1 @ A))
            p1 = _sign((A @ p2).real) if real else np.conj(_phase(A @ p2))
            new = abs(p1 @ (A @ p2))
            if new <= val * (1 + 1e-15):
                break
            val = new
        if val > best:
            best, wit = val, (np.asarray(p1, dtype=complex), np.asarray(p2, dtype=complex))
    return best, wit


def injective_norm(k, mode="auto", restarts=64, Q=PHASE_Q, rng=None):
    """``sup |sum w1_i w2_j K_ij psi1_i psi2_j|`` over ``||psi||_inf <= 1``.

    ``mode`` is ``"exact-enumeration"``, ``"alternating"``, ``"phase-grid"`` or
    ``"auto"``.  Enumeration runs over the smaller side; the other side is
    optimized in closed form (phase alignment).
    """
    A = k.weighted
    real = k.is_real
    if real:
        A = A.real
    if mode == "auto":
        small = min(A.shape)
        if real and small <= 16:
            mode = "exact-enumeration"
        elif not real and Q ** (small - 1) <= PHASE_ENUM_BUDGET:
            mode = "phase-grid"
        else:
            mode = "alternating"
    if mode in ("exact-enumeration", "phase-grid"):
        flip = A.shape[0] > A.shape[1]
        B = A.T if flip else A
        if mode == "exact-enumeration":
            if not real:
                raise ValueError("exact enumeration needs a real kernel; use phase-grid")
            if B.shape[0] > ENUM_CAP_REAL:
                raise ValueError(f"smaller side {B.shape[0]} exceeds the enumeration cap {ENUM_CAP_REAL}")
            val, p = kernels.sign_enumeration(B)
            q = _sign(p @ B)
            factor = 1.0
        else:
            if Q ** (B.shape[0] - 1) > PHASE_ENUM_BUDGET:
                raise ValueError("phase grid too large for enumeration")
            val, p = kernels.phase_enumeration(B, Q)
            q = np.conj(_phase(p @ B))
            factor = 1.0 / np.cos(np.pi / Q) if B.shape[0] > 1 else 1.0
        p = np.asarray(p, dtype=complex)
        q = np.asarray(q, dtype=complex)
        wit = (q, p) if flip else (p, q)
        value = abs(wit[0] @ A @ wit[1])
        return NormCertificate(float(value), wit, True, "injective", factor)
    if mode != "alternating":
        raise ValueError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(rng)
    op, _ = _operator(k)
    val, wit = _injective_alternating(op, restarts, rng, real)
    return NormCertificate(float(val), wit, False, "injective")


def _normalize_rows(Z):
    n = np.linalg.norm(Z, axis=1, keepdims=True)
    out = np.zeros_like(Z)
    nz = n[:, 0] > 0
    out[nz] = Z[nz] / n[nz]
    out[~nz, 0] = 1.0
    return out


def _bilinear(A, U, V):
    """``Re sum_ij A_ij <u_i, v_j>`` with the bilinear pairing used by the updates."""
    return float(np.real(np.sum(U * (A @ V))))


class _LowRankOp:
    """``diag(w1) X^T diag(m) Y diag(w2)`` applied without forming the matrix."""

    __array_ufunc__ = None  # let ndarray @ op dispatch to __rmatmul__

    def __init__(self, k):
        X, m, Y = k.lowrank
        self.L = (X * k.space1.weights[None, :]).T  # M1 x r
        self.m = np.asarray(m)
        self.R = Y * k.space2.weights[None, :]  # r x M2
        self.shape = (self.L.shape[0], self.R.shape[1])

    def __matmul__(self, V):
        return self.L @ (self.m[:, None] * (self.R @ V)) if V.ndim == 2 else self.L @ (self.m * (self.R @ V))

    def __rmatmul__(self, p):
        return ((p @ self.L) * self.m) @ self.R

    @property
    def T(self):
        t = object.__new__(_LowRankOp)
        t.L, t.m, t.R, t.shape = self.R.T, self.m, self.L.T, self.shape[::-1]
        return t


def _operator(k):
    """Weighted kernel as an object supporting ``@`` (low-rank when available)."""
    real = k.is_real
    if k.lowrank is not None and len(k.lowrank[1]) < min(k.K.shape):
        op = _LowRankOp(k)
        if real:
            op.L, op.R = np.real(op.L), np.real(op.R)
            op.m = np.real(op.m)
        return op, real
    A = k.weighted
    return (A.real if real else A), real


def gamma2_star_norm(k, vec_dim=None, restarts=8, rng=None, start=None, max_iter=1000, rtol=1e-10):
    """Lower estimate of ``gamma_2^*`` by alternating maximization of
    ``Re sum w1_i w2_j K_ij <u_i, v_j>`` over unit vector families.

    Each restart alternates the closed-form optima of the two sides.  One
    restart is seeded with a scalar injective witness (``start`` or a
    fresh one), so the estimate is never below that injective value.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(rng)
    A, real = _operator(k)
    M1, M2 = A.shape
    D = vec_dim if vec_dim is not None else M1 + M2
    D = max(D, 2)
    dtype = float if real else complex
    if start is None:
        start = injective_norm(k, rng=rng)
    p2 = np.asarray(start.witness[1])
    v0 = np.zeros((M2, D), dtype=complex)
    v0[:, 0] = p2
    seeds = [v0.real if real else v0]
    for _ in range(restarts - 1):
        V = rng.standard_normal((M2, D))
        if not real:
            V = V + 1j * rng.standard_normal((M2, D))
        seeds.append(_normalize_rows(V))
    best, wit = -np.inf, None
    AT = A.T
    for V in seeds:
        V = V.astype(dtype)
        val = -np.inf
        for _ in range(max_iter):
            U = _normalize_rows(np.conj(A @ V))
            V = _normalize_rows(np.conj(AT @ U))
            new = _bilinear(A, U, V)
            done = new - val <= rtol * max(1.0, abs(new))
            val = new
            if done:
                break
        if val > best:
            best, wit = val, (U, V)
    return NormCertificate(float(best), wit, False, "gamma2*")


# ---------------------------------------------------------------------------
# chaos-side maps and the decomposition S = t + r
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChaosMap:
    """Linear map from truncated chaos (``n_vars``, degree ``<= D``) to grid
    functions: basis element ``q`` goes to ``matrix[q]``."""

    space: ProbabilitySpace
    matrix: np.ndarray
    n_vars: int
    max_degree: int
    norm_bound: float = 1.0  # recorded ||u: L_1 -> L_1||

    @classmethod
    def evaluation(cls, points, n_vars, max_degree, weights=None, norm_bound=1.0):
        """``f -> (f(x_s))_s`` on a sample of Gaussian points (uniform weights
        unless given).  Composition with a rotation is evaluation at rotated points."""
        points = np.atleast_2d(points)
        S = points.shape[0]
        space = ProbabilitySpace(weights if weights is not None else np.full(S, 1.0 / S))
        return cls(space, basis_values(points, n_vars, max_degree), n_vars, max_degree, norm_bound)

    def gram_top(self, mask):
        """Largest eigenvalue of the empirical Gram of the masked basis images."""
        E = self.matrix[mask]
        G = (E * self.space.weights) @ E.T
        return float(np.linalg.eigvalsh(G)[-1]) if E.shape[0] else 0.0


@dataclass(frozen=True, eq=False)
class Decomposition:
    S: TensorKernel
    t: TensorKernel
    r: TensorKernel
    coeff_S: np.ndarray
    coeff_t: np.ndarray
    coeff_r: np.ndarray
    wedge_t: float
    vee_r: NormCertificate
    gamma2_r: NormCertificate
    gamma2_r_upper: float  # certified: max|m_r| sqrt(lambda1 lambda2)
    wedge_target: float  # (2/delta) ||u1|| ||u2||
    vee_target: float  # delta ||u1|| ||u2||
    gamma2_target: float  # ||T_delta(1-P1)||_{2->2} ||u1|| ||u2||
    delta: float

    @property
    def identity_exact(self):
        return bool(np.array_equal(self.coeff_t + self.coeff_r, self.coeff_S))


def decompose_t_r(u1, u2, delta, vec_dim=64, restarts=4, rng=None):
    """Split ``S = sum_n u1(g_n) (x) u2(g_n)`` as ``t + r`` with ``t`` the kernel
    of ``u1 T_delta u2^*`` and ``r = -u1 T_delta (1 - P_1) u2^*``.

    All three kernels are built from diagonal chaos multipliers, so
    ``t + r = S`` holds exactly at the coefficient level.
    """
    if (u1.n_vars, u1.max_degree) != (u2.n_vars, u2.max_degree):
        raise ValueError("maps act on different chaos spaces")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    _, degrees = chaos_basis(u1.n_vars, u1.max_degree)
    mult_t = t_delta_multipliers(delta, u1.max_degree)
    coeff_S = (degrees == 1).astype(float)
    coeff_t = mult_t[degrees]
    coeff_r = coeff_S - coeff_t
    X, Y = u1.matrix, u2.matrix
    S = TensorKernel.from_lowrank(u1.space, u2.space, X, coeff_S, Y)
    t = TensorKernel.from_lowrank(u1.space, u2.space, X, coeff_t, Y)
    r = TensorKernel.from_lowrank(u1.space, u2.space, X, coeff_r, Y)
    rng = np.random.default_rng(rng)
    vee = injective_norm(r, mode="alternating", restarts=max(restarts, 8), rng=rng)
    g2 = gamma2_star_norm(r, vec_dim=vec_dim, restarts=restarts, rng=rng, start=vee)
    mask = coeff_r != 0
    upper = float(np.abs(coeff_r).max() * np.sqrt(u1.gram_top(mask) * u2.gram_top(mask)))
    unorm = u1.norm_bound * u2.norm_bound
    tail = mult_t.copy()
    tail[:2] = 0
    return Decomposition(S, t, r, coeff_S, coeff_t, coeff_r, projective_norm(t), vee, g2, upper,
                         2.0 / delta * unorm, delta * unorm, float(tail.max()) * unorm, delta)


@dataclass(frozen=True)
class TraceDuality:
    lhs: float
    rhs: float
    holds: bool


def trace_duality_bound(v, gamma2_bound, psi1, psi2, a):
    """``|<v, tr(a psi1 psi2)>| <= tr|a| sup||psi1|| sup||psi2||`` for
    ``v / gamma2_bound`` (so ``gamma2_bound`` must dominate ``gamma_2^*(v)``).

    ``psi1``: ``M1 x d x d``; ``psi2``: ``M2 x d x d``.
    """
    psi1 = np.asarray(psi1, dtype=complex)
    psi2 = np.asarray(psi2, dtype=complex)
    a = np.asarray(a, dtype=complex)
    d = a.shape[0]
    if psi1.shape[1:] != (d, d) or psi2.shape[1:] != (d, d):
        raise ValueError("matrix dimensions do not match")
    if psi1.shape[0] != v.space1.size or psi2.shape[0] != v.space2.size:
        raise ValueError("psi grids do not match the kernel spaces")
    F = (a @ psi1).reshape(psi1.shape[0], d * d) @ np.swapaxes(psi2, 1, 2).reshape(psi2.shape[0], d * d).T
    scale = gamma2_bound if gamma2_bound > 0 else 1.0
    lhs = abs(np.sum(v.weighted * F)) / scale
    sup1 = np.linalg.norm(psi1, ord=2, axis=(1, 2)).max()
    sup2 = np.linalg.norm(psi2, ord=2, axis=(1, 2)).max()
    rhs = float(np.linalg.svd(a, compute_uv=False).sum() * sup1 * sup2)
    return TraceDuality(float(lhs), rhs, bool(lhs <= rhs + 1e-9))
