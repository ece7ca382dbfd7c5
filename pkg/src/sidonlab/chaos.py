"""Gaussian samples, truncated Hermite chaos and the damping operators on it.

Chaos elements are coefficient vectors in the orthonormal basis
``H_alpha(x) = prod_i He_{alpha_i}(x_i) / sqrt(alpha_i!)`` of ``L_2(gamma_n)``,
graded by total degree ``|alpha|``.  Every operator here is diagonal in
that basis, so its action is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from itertools import combinations_with_replacement

import numpy as np
from scipy.optimize import linprog

MAX_BASIS = 100_000


# ---------------------------------------------------------------------------
# Gaussian samples
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class GaussianSample:
    """``S x N`` i.i.d. standard normals; complex samples keep ``2N`` real columns."""

    samples: np.ndarray
    seed: int | None
    is_complex: bool = False

    @property
    def S(self):
        return self.samples.shape[0]

    @property
    def variables(self):
        n = self.samples.shape[1]
        return n // 2 if self.is_complex else n

    def values(self):
        """Real samples, or ``2^{-1/2}(g' + i g'')`` for complex samples."""
        if not self.is_complex:
            return self.samples
        n = self.variables
        return (self.samples[:, :n] + 1j * self.samples[:, n:]) / np.sqrt(2.0)

    def covariance_deviation(self):
        X = self.samples
        C = X.T @ X / self.S
        return float(np.abs(C - np.eye(X.shape[1])).max())

    def covariance_ok(self):
        return self.covariance_deviation() <= 5.0 / np.sqrt(self.S)


def gaussian_sample(N, S, seed=None, is_complex=False):
    rng = np.random.default_rng(seed)
    cols = 2 * N if is_complex else N
    X = rng.standard_normal((S, cols))
    X.setflags(write=False)
    return GaussianSample(X, seed, is_complex)


# ---------------------------------------------------------------------------
# Hermite basis
# ---------------------------------------------------------------------------

@lru_cache(maxsize=64)
def chaos_basis(n_vars, max_degree):
    """Multi-indices with ``|alpha| <= D`` in graded order, and their degrees."""
    count = math.comb(n_vars + max_degree, max_degree)
    if count > MAX_BASIS:
        raise ValueError(f"chaos basis would have {count} elements (cap {MAX_BASIS})")
    rows = []
    for deg in range(max_degree + 1):
        for combo in combinations_with_replacement(range(n_vars), deg):
            a = np.zeros(n_vars, dtype=np.int64)
            for i in combo:
                a[i] += 1
            rows.append(a)
    alphas = np.array(rows, dtype=np.int64).reshape(-1, n_vars)
    alphas.setflags(write=False)
    degrees = alphas.sum(axis=1)
    degrees.setflags(write=False)
    return alphas, degrees


def hermite_table(x, max_degree):
    """Normalized probabilists' Hermite values, shape ``x.shape + (D+1,)``."""
    x = np.asarray(x, dtype=float)
    H = np.empty(x.shape + (max_degree + 1,))
    H[..., 0] = 1.0
    if max_degree >= 1:
        H[..., 1] = x
    for k in range(2, max_degree + 1):
        # He_k = x He_{k-1} - (k-1) He_{k-2}, rewritten for normalized values
        H[..., k] = (x * H[..., k - 1] - np.sqrt(k - 1) * H[..., k - 2]) / np.sqrt(k)
    return H


def basis_values(points, n_vars, max_degree):
    """``B[q, s] = H_{alpha_q}(points[s])`` for points of shape ``S x n_vars``."""
    points = np.atleast_2d(points)
    alphas, _ = chaos_basis(n_vars, max_degree)
    H = hermite_table(points, max_degree)  # S x n x (D+1)
    B = np.ones((alphas.shape[0], points.shape[0]))
    for i in range(n_vars):
        B *= H[:, i, :][:, alphas[:, i]].T
    return B


# ---------------------------------------------------------------------------
# chaos elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ChaosElement:
    """Truncated chaos expansion over ``n_vars`` real standard Gaussians.

    With ``complex_pairs`` the variables are read as pairs
    ``(x'_m, x''_m) = (x_m, x_{m + n_vars/2})`` carrying
    ``g_m = 2^{-1/2}(x'_m + i x''_m)``.
    """

    n_vars: int
    max_degree: int
    coefficients: np.ndarray
    complex_pairs: bool = False

    def __post_init__(self):
        alphas, _ = chaos_basis(self.n_vars, self.max_degree)
        c = np.array(self.coefficients, dtype=complex).ravel()
        if c.size != alphas.shape[0]:
            raise ValueError(f"expected {alphas.shape[0]} coefficients, got {c.size}")
        if self.complex_pairs and self.n_vars % 2:
            raise ValueError("complex_pairs needs an even number of real variables")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def alphas(self):
        return chaos_basis(self.n_vars, self.max_degree)[0]

    @property
    def degrees(self):
        return chaos_basis(self.n_vars, self.max_degree)[1]

    @classmethod
    def zero(cls, n_vars, max_degree, complex_pairs=False):
        K = chaos_basis(n_vars, max_degree)[0].shape[0]
        return cls(n_vars, max_degree, np.zeros(K), complex_pairs)

    @classmethod
    def from_terms(cls, n_vars, max_degree, terms, complex_pairs=False):
        """Build from ``{alpha tuple: coefficient}``."""
        alphas, _ = chaos_basis(n_vars, max_degree)
        index = {tuple(a): q for q, a in enumerate(alphas)}
        c = np.zeros(alphas.shape[0], dtype=complex)
        for a, v in terms.items():
            c[index[tuple(a)]] += v
        return cls(n_vars, max_degree, c, complex_pairs)

    @classmethod
    def gaussian(cls, n, n_vars, max_degree):
        """The first-chaos element ``x_n``."""
        a = [0] * n_vars
        a[n] = 1
        return cls.from_terms(n_vars, max_degree, {tuple(a): 1.0})

    @classmethod
    def complex_gaussian(cls, m, n_pairs, max_degree):
        """``g_m = 2^{-1/2}(x'_m + i x''_m)`` over ``2 * n_pairs`` real variables."""
        a1 = [0] * (2 * n_pairs)
        a2 = [0] * (2 * n_pairs)
        a1[m] = 1
        a2[m + n_pairs] = 1
        s = 1 / np.sqrt(2.0)
        return cls.from_terms(2 * n_pairs, max_degree, {tuple(a1): s, tuple(a2): 1j * s}, True)

    def with_coefficients(self, c):
        return replace(self, coefficients=c)

    @property
    def mean(self):
        return complex(self.coefficients[0])

    def l2_norm(self):
        return float(np.linalg.norm(self.coefficients))

    def evaluate(self, points):
        return self.coefficients @ basis_values(points, self.n_vars, self.max_degree)

    def l1_norm(self, samples=20_000, seed=0, nodes=None):
        """``E|f|``: tensor Gauss-Hermite for ``n_vars <= 3``, Monte Carlo otherwise.

        ``|f|`` has kinks, so the rule converges only like ``1/nodes``; the
        default node count per axis (300, 200, 60) keeps the error near 1e-3.
        Returns ``(value, method)``.
        """
        if self.n_vars <= 3:
            nodes = nodes or {1: 300, 2: 200, 3: 60}.get(self.n_vars, 24)
            x, w = np.polynomial.hermite_e.hermegauss(nodes)
            w = w / w.sum()
            grids = np.meshgrid(*([x] * self.n_vars), indexing="ij")
            pts = np.stack([g.ravel() for g in grids], axis=1)
            wt = np.ones(1)
            for _ in range(self.n_vars):
                wt = np.outer(wt, w).ravel()
            return float(wt @ np.abs(self.evaluate(pts))), "gauss-hermite"
        pts = np.random.default_rng(seed).standard_normal((samples, self.n_vars))
        return float(np.abs(self.evaluate(pts)).mean()), "monte-carlo"

    def __add__(self, other):
        self._check(other)
        return self.with_coefficients(self.coefficients + other.coefficients)

    def __sub__(self, other):
        self._check(other)
        return self.with_coefficients(self.coefficients - other.coefficients)

    def __mul__(self, scalar):
        return self.with_coefficients(self.coefficients * scalar)

    __rmul__ = __mul__

    def _check(self, other):
        if (self.n_vars, self.max_degree, self.complex_pairs) != (other.n_vars, other.max_degree,
                                                                  other.complex_pairs):
            raise ValueError("chaos elements live in different spaces")

    def allclose(self, other, atol=0.0):
        self._check(other)
        return bool(np.allclose(self.coefficients, other.coefficients, rtol=0.0, atol=atol))


def _degree_multiply(f, multipliers):
    m = np.asarray(multipliers, dtype=complex)[f.degrees]
    return f.with_coefficients(f.coefficients * m)


def mehler_apply(f, delta):
    """The Mehler semigroup: degree-``k`` chaos multiplied by ``delta^k``."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    return _degree_multiply(f, delta ** np.arange(f.max_degree + 1))


def t_delta_multipliers(delta, max_degree):
    """Degree multipliers of ``delta^{-1}(T(delta) - P_0)``."""
    m = delta ** (np.arange(max_degree + 1) - 1.0)
    m[0] = 0.0
    return m


def _kill_antiholomorphic(f):
    """Project the first chaos onto ``span[g_m]`` (averaging over phase rotations)."""
    c = f.coefficients.copy()
    n = f.n_vars // 2
    first = np.flatnonzero(f.degrees == 1)
    var = f.alphas[first].argmax(axis=1)
    re_idx = first[np.argsort(var)][:n]
    im_idx = first[np.argsort(var)][n:]
    hol = (c[re_idx] - 1j * c[im_idx]) / np.sqrt(2.0)
    c[re_idx] = hol / np.sqrt(2.0)
    c[im_idx] = 1j * hol / np.sqrt(2.0)
    return f.with_coefficients(c)


def t_delta_apply(f, delta):
    """``T_delta = delta^{-1}(T(delta) - P_0)``; fixes every first-chaos element.

    For complex-pair elements the conjugate-linear part of the first chaos
    is removed as well, so ``g_m`` is fixed and ``conj(g_m)`` is killed.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    out = _degree_multiply(f, t_delta_multipliers(delta, f.max_degree))
    if f.complex_pairs:
        out = _kill_antiholomorphic(out)
    return out


def chaos_project(f, k):
    if not 0 <= k <= f.max_degree:
        raise ValueError(f"degree {k} outside [0, {f.max_degree}]")
    m = np.zeros(f.max_degree + 1)
    m[k] = 1.0
    return _degree_multiply(f, m)


@dataclass(frozen=True)
class TDeltaNorms:
    l1_norm_bound: float  # Monte Carlo lower estimate of ||T_delta: L1 -> L1||
    l1_analytic: float  # 2/delta
    l2_tail_norm: float  # exact ||T_delta (1 - P_1)||_{2->2}
    l1_method: str
    trials: int


def operator_norms_t_delta(n_vars, max_degree, delta, samples=4000, trials=64, seed=0):
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    m = t_delta_multipliers(delta, max_degree)
    tail = m.copy()
    tail[:2] = 0.0
    l2_tail = float(tail.max()) if max_degree >= 2 else 0.0
    rng = np.random.default_rng(seed)
    alphas, degrees = chaos_basis(n_vars, max_degree)
    best, method = 0.0, ""
    for t in range(trials):
        if t % 2:
            # truncated Mehler kernel at a random point: a smoothed point mass,
            # where the L1 operator norm is nearly attained
            y = rng.standard_normal((1, n_vars))
            c = basis_values(y, n_vars, max_degree)[:, 0] * rng.uniform(0.5, 0.95) ** degrees
        else:
            decay = rng.uniform(0.2, 2.0)
            c = rng.standard_normal(alphas.shape[0]) * decay ** (-degrees.astype(float))
        f = ChaosElement(n_vars, max_degree, c)
        g = t_delta_apply(f, delta)
        nf, method = f.l1_norm(samples=samples, seed=seed + t)
        ng, _ = g.l1_norm(samples=samples, seed=seed + t)
        if nf > 0:
            best = max(best, ng / nf)
    return TDeltaNorms(best, 2.0 / delta, l2_tail, method, trials)


# ---------------------------------------------------------------------------
# Mela measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MelaMeasure:
    grid: np.ndarray
    weights: np.ndarray
    delta: float
    total_variation: float
    n_max_odd: int

    def moment(self, n):
        return float(self.weights @ self.grid ** n)

    def check(self, tol=1e-9):
        """Independent re-verification of the moment constraints."""
        first = abs(self.moment(1) - 1.0) <= tol
        odd = all(abs(self.moment(n)) <= self.delta + tol for n in range(3, self.n_max_odd + 1, 2))
        return first and odd

    def to_dict(self):
        return {"delta": self.delta, "grid": self.grid.tolist(), "weights": self.weights.tolist(),
                "tv": self.total_variation, "n_max_odd": self.n_max_odd}

    @classmethod
    def from_dict(cls, d):
        g = np.array(d["grid"])
        w = np.array(d["weights"])
        return cls(g, w, d["delta"], d["tv"], d["n_max_odd"])


class LPFailure(RuntimeError):
    pass


def mela_lp(delta, grid_size=256, n_max_odd=21):
    """Least total variation signed measure on a grid of ``[0, 1]`` with first
    moment 1 and odd moments ``3..n_max_odd`` bounded by ``delta``."""
    if grid_size < 16:
        raise ValueError("grid_size must be >= 16")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if n_max_odd % 2 == 0:
        raise ValueError("n_max_odd must be odd")
    s = np.linspace(0.0, 1.0, grid_size)
    odd = np.arange(3, n_max_odd + 1, 2)
    P = s[None, :] ** odd[:, None]
    A_ub = np.vstack([np.hstack([P, -P]), np.hstack([-P, P])]) if odd.size else None
    b_ub = np.full(2 * odd.size, delta) if odd.size else None
    A_eq = np.hstack([s, -s])[None, :]
    res = linprog(np.ones(2 * grid_size), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=(0, None), method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise LPFailure(f"Mela LP failed: {res.message}")
    sigma = res.x[:grid_size] - res.x[grid_size:]
    sigma[np.abs(sigma) < 1e-14] = 0.0
    sigma = sigma / (sigma @ s)  # exact first moment
    mu = MelaMeasure(s, sigma, float(delta), float(np.abs(sigma).sum()), int(n_max_odd))
    if not mu.check():
        raise LPFailure("solution violates the moment constraints")
    return mu


def mela_multipliers(mu, max_degree):
    """``lambda_k = int (s^k - (-s)^k)/2 dsigma``: zero for even ``k``."""
    lam = np.zeros(max_degree + 1)
    for k in range(1, max_degree + 1, 2):
        lam[k] = mu.moment(k)
    return lam


def mela_damping_apply(f, mu):
    lam = mela_multipliers(mu, f.max_degree)
    if f.max_degree >= 1 and abs(lam[1] - 1.0) > 1e-9:
        raise ValueError("measure does not have unit first moment")
    return _degree_multiply(f, lam)


def mela_sweep(deltas, grid_size=256, n_max_odd=21):
    """Total variations over ``deltas`` and the least-squares slope against ``|ln delta|``."""
    deltas = np.asarray(deltas, dtype=float)
    tv = np.array([mela_lp(d, grid_size, n_max_odd).total_variation for d in deltas])
    x = np.abs(np.log(deltas))
    slope = float(np.polyfit(x, tv, 1)[0]) if deltas.size > 1 else float("nan")
    return tv, slope


# ---------------------------------------------------------------------------
# Gaussian comparison observations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    real_mean: float
    real_se: float
    complex_mean: float
    complex_se: float
    sandwich_holds: bool
    contraction_lhs: float | None = None
    contraction_rhs: float | None = None
    contraction_diff_se: float | None = None
    contraction_holds: bool | None = None


def _mean_se(v):
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size))


def gaussian_comparison_check(x, samples=4000, seed=0, a=None):
    """Monte Carlo check of the real/complex Gaussian sandwich and of the
    contraction inequality for ``||a|| <= 1``.

    ``x`` is an ``N x J`` array: ``x[n]`` is a vector in ``l_inf^J``.
    """
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    x = np.atleast_2d(np.asarray(x, dtype=complex))
    N = x.shape[0]
    rng = np.random.default_rng(seed)
    g1 = rng.standard_normal((samples, N))
    g2 = rng.standard_normal((samples, N))
    gc = (g1 + 1j * g2) / np.sqrt(2.0)
    real = np.abs(g1 @ x).max(axis=1)
    cplx = np.abs(gc @ x).max(axis=1)
    rm, rs = _mean_se(real)
    cm, cs = _mean_se(cplx)
    r2 = np.sqrt(2.0)
    lo_ok = cm - rm / r2 >= -3 * np.hypot(cs, rs / r2)
    hi_ok = r2 * rm - cm >= -3 * np.hypot(cs, r2 * rs)
    rep = dict(real_mean=rm, real_se=rs, complex_mean=cm, complex_se=cs, sandwich_holds=bool(lo_ok and hi_ok))
    if a is not None:
        a = np.asarray(a, dtype=complex)
        if np.linalg.norm(a, 2) > 1 + 1e-12:
            raise ValueError("a must be a contraction")
        lhs = np.abs(gc @ (a.T @ x)).max(axis=1)
        diff = lhs - cplx
        dm, ds = _mean_se(diff)
        rep.update(contraction_lhs=float(lhs.mean()), contraction_rhs=cm, contraction_diff_se=ds,
                   contraction_holds=bool(dm <= 3 * ds + 1e-12))
    return ComparisonReport(**rep)
