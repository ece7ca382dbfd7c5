"""Sidon-type constants: plain and k-fold (dual interpolation LP), randomly
Sidon (Monte Carlo), and the comparison inequalities around them."""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import highspy
import numpy as np

from . import kernels
from .generators import haar_unitaries
from .spaces import LazyProduct, MatricialSystem

Q_INNER = 64
Q_OUTER = 16
TARGET_CAP = 1 << 16
LP_GRID_CAP = 1 << 14  # product grids up to this size are materialized
_TOL = 1e-9


class NotSidonAtGrid(RuntimeError):
    """The interpolation problem is unbounded: the system does not separate targets on this grid."""


def lab_threads():
    try:
        return max(1, int(os.environ.get("LAB_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class SidonEstimate:
    lower: float
    witness: np.ndarray
    upper: float | None
    upper_certified: bool
    method: str  # dual-lp-enumeration | dual-lp-sampled | witness-search
    grid_note: str
    error_factor: float = 1.0  # outer target-grid correction already applied to ``upper``
    dual_target: np.ndarray | None = None
    dual_measure: dict | None = None  # {"points": [...], "mass": complex array}
    targets_evaluated: int = 0
    lp_solves: int = 0
    unstable: bool = False
    grid_unstable: bool | None = None
    k: int = 1
    coefficients: str = "complex"

    @property
    def upper_dual_tv(self):
        return None if self.dual_measure is None else float(np.abs(self.dual_measure["mass"]).sum())

    def to_dict(self):
        enc = lambda z: None if z is None else [[float(c.real), float(c.imag)] for c in np.asarray(z)]
        d = {k: v for k, v in self.__dict__.items() if k not in ("witness", "dual_target", "dual_measure")}
        d["witness"] = enc(self.witness)
        d["dual_target"] = enc(self.dual_target)
        if self.dual_measure is not None:
            d["dual_measure"] = {"points": [list(map(int, p)) for p in self.dual_measure["points"]],
                                 "mass": enc(self.dual_measure["mass"])}
        return d


# ---------------------------------------------------------------------------
# grid access: materialized values or lazy k-fold product
# ---------------------------------------------------------------------------

class _Grid:
    def __init__(self, sys):
        if isinstance(sys, LazyProduct):
            self.lazy = sys
            self.P = None
            self.N = sys.N
            self.real = all(f.is_real for f in sys.factors)
            self.size = sys.grid_size
        else:
            self.lazy = None
            self.P = sys.values
            self.N = sys.N
            self.real = sys.is_real
            self.size = sys.M

    def sup(self, a):
        """``(max_t |f_a(t)|, argmax point tuple)``."""
        if self.lazy is not None:
            return self.lazy.sup(a)
        f = np.abs(a @ self.P)
        i = int(np.argmax(f))
        return float(f[i]), (i,)

    def column(self, point):
        if self.lazy is not None:
            c = np.ones(self.N, dtype=complex)
            for f, i in zip(self.lazy.factors, point):
                c = c * f.values[:, i]
            return c
        return self.P[:, point[0]]


def ratio(sys, a):
    """Exact ``sum |a_n| / sup_grid |sum a_n phi_n|`` (``sys`` scalar or lazy)."""
    a = np.asarray(a, dtype=complex)
    s, _ = _Grid(sys).sup(a)
    return float(np.abs(a).sum() / s) if s > 0 else float("inf")


# ---------------------------------------------------------------------------
# cutting-plane interpolation LP
# ---------------------------------------------------------------------------

class _CutLP:
    """``max Re sum a_n xi_n`` s.t. ``Re(f_a(t) e^{-i theta_k}) <= 1``.

    Rows are generated lazily; every polygon face is valid for every target,
    so the working set is shared across targets and the relaxation value is
    always an upper bound of the full LP.
    """

    def __init__(self, grid, complex_coeffs, q_in=Q_INNER, box=1e6):
        self.g = grid
        self.cplx = complex_coeffs
        self.q = 2 if (grid.real and not complex_coeffs) else q_in
        self.theta = 2 * np.pi * np.arange(self.q) / self.q
        self.nv = 2 * grid.N if complex_coeffs else grid.N
        self.box = box
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("primal_feasibility_tolerance", 1e-10)
        h.setOptionValue("dual_feasibility_tolerance", 1e-10)
        h.addVars(self.nv, np.full(self.nv, -box), np.full(self.nv, box))
        h.changeObjectiveSense(highspy.ObjSense.kMaximize)
        self.h = h
        self.rows = []  # (point, face)
        self.seen = set()
        self.solves = 0

    def _row_coeffs(self, cols, ks):
        z = cols * np.exp(-1j * self.theta[ks])[None, :]
        A = np.vstack([z.real, -z.imag]) if self.cplx else z.real
        return A.T

    def add(self, points, cols, ks):
        keep = [(p, k) for p, k in zip(points, ks) if (p, int(k)) not in self.seen]
        if not keep:
            return 0
        idx = [i for i, (p, k) in enumerate(zip(points, ks)) if (p, int(k)) not in self.seen]
        A = self._row_coeffs(cols[:, idx], np.asarray(ks)[idx])
        m = A.shape[0]
        inf = highspy.kHighsInf
        starts = (np.arange(m) * self.nv).astype(np.int32)
        index = np.tile(np.arange(self.nv), m).astype(np.int32)
        self.h.addRows(m, np.full(m, -inf), np.ones(m), m * self.nv, starts, index, A.ravel())
        for p, k in keep:
            self.seen.add((p, int(k)))
            self.rows.append((p, int(k)))
        return m

    def seed_rows(self, rng):
        faces = np.arange(0, self.q, max(1, self.q // 4)) if self.q > 2 else np.array([0, 1])
        if self.g.lazy is None:
            pts = [(i,) for i in range(self.g.size)]
        else:
            n = min(self.g.size, 512)
            pts = {tuple(int(rng.integers(f.M)) for f in self.g.lazy.factors) for _ in range(n)}
            pts = sorted(pts)
        cols = np.column_stack([self.g.column(p) for p in pts])
        P = [p for p in pts for _ in faces]
        C = np.repeat(cols, faces.size, axis=1)
        self.add(P, C, np.tile(faces, len(pts)))

    def _nearest_face(self, f):
        if self.q == 2:
            return np.where(f.real >= 0, 0, 1)
        return np.round(np.angle(f) / (2 * np.pi / self.q)).astype(int) % self.q

    def _violations(self, a):
        if self.g.lazy is None:
            f = a @ self.g.P
            ks = self._nearest_face(f)
            val = (f * np.exp(-1j * self.theta[ks])).real
            bad = np.nonzero(val > 1 + _TOL)[0]
            return [(int(i),) for i in bad], self.g.P[:, bad], ks[bad]
        s, pt = self.g.sup(a)
        col = self.g.column(pt)
        f = complex(a @ col)
        k = int(self._nearest_face(np.array([f]))[0])
        if (f * np.exp(-1j * self.theta[k])).real <= 1 + _TOL:
            return [], None, None
        ks = [k, (k + 1) % self.q, (k - 1) % self.q] if self.q > 2 else [k]
        return [pt] * len(ks), np.column_stack([col] * len(ks)), np.array(ks)

    def _a(self, x):
        x = np.asarray(x)
        return x[: self.g.N] + 1j * x[self.g.N:] if self.cplx else x.astype(complex)

    def solve(self, xi, max_rounds=500):
        xi = np.asarray(xi, dtype=complex)
        c = np.concatenate([xi.real, -xi.imag]) if self.cplx else xi.real
        self.h.changeColsCost(self.nv, np.arange(self.nv, dtype=np.int32), c)
        for _ in range(max_rounds):
            self.h.run()
            self.solves += 1
            st = self.h.getModelStatus()
            if st != highspy.HighsModelStatus.kOptimal:
                raise NotSidonAtGrid(f"interpolation LP status {st}")
            x = np.array(self.h.getSolution().col_value)
            a = self._a(x)
            pts, cols, ks = self._violations(a)
            if not pts:
                break
            self.add(pts, cols, ks)
        if np.abs(x).max() >= self.box * (1 - 1e-9):
            raise NotSidonAtGrid("coefficients hit the box bound: target not interpolable")
        return float(self.h.getInfo().objective_function_value), a

    def dual_measure(self, xi):
        """Point masses ``mu_t = sum_k y_{t,k} e^{-i theta_k}`` from the row duals."""
        y = np.abs(np.array(self.h.getSolution().row_dual))
        mass = {}
        for (p, k), v in zip(self.rows, y):
            if v > 1e-13:
                mass[p] = mass.get(p, 0) + v * np.exp(-1j * self.theta[k])
        pts = sorted(mass)
        mu = np.array([mass[p] for p in pts], dtype=complex)
        return {"points": pts, "mass": mu}

    def interpolation_residual(self, measure, xi):
        if not measure["points"]:
            return float("inf")
        cols = np.column_stack([self.g.column(p) for p in measure["points"]])
        got = cols @ measure["mass"]
        if not self.cplx:
            return float(np.abs(got.real - np.asarray(xi).real).max())
        return float(np.abs(got - xi).max())


def _phase(z):
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    return np.where(r > 0, z / np.where(r > 0, r, 1), 1.0)


class _Search:
    """Shared state for target sweeps: best LP value and best exact witness."""

    def __init__(self, lp):
        self.lp = lp
        self.best_L, self.best_xi, self.best_L_a = -np.inf, None, None
        self.best_ratio, self.best_a = 0.0, None
        self.count = 0

    def eval_target(self, xi):
        L, a = self.lp.solve(xi)
        self.count += 1
        if L > self.best_L:
            self.best_L, self.best_xi, self.best_L_a = L, np.asarray(xi, dtype=complex), a
        self.offer(a)
        return L, a

    def offer(self, a):
        s, _ = self.lp.g.sup(a)
        if s > 0:
            r = float(np.abs(a).sum() / s)
            if r > self.best_ratio:
                self.best_ratio, self.best_a = r, np.asarray(a, dtype=complex) / s

    def ascent(self, xi, steps=30):
        """``xi <- phase(conj a)`` until the LP value stops increasing."""
        L_prev = -np.inf
        for _ in range(steps):
            L, a = self.eval_target(xi)
            if L <= L_prev * (1 + 1e-10):
                break
            L_prev = L
            new = np.conj(_phase(a)) if self.lp.cplx else np.where(a.real >= 0, 1.0, -1.0)
            if not self.lp.cplx:
                new = new.astype(complex)
            new = new * np.conj(new[0]) if self.lp.cplx else new * new[0]
            if np.allclose(new, xi):
                break
            xi = new
        return L_prev


def _sweep_chunk(args):
    sys, cplx, q_out, first_codes = args
    lp = _CutLP(_Grid(sys), cplx)
    lp.seed_rows(np.random.default_rng(0))
    srch = _Search(lp)
    for xi in _targets(sys.N, cplx, q_out, first_codes):
        srch.eval_target(xi)
    return srch.best_L, srch.best_xi, srch.best_ratio, srch.best_a, srch.count, lp.solves


def _targets(N, cplx, q_out, first_codes=None):
    """Target grid with ``xi_1 = 1``: Q-gon phases or signs, lexicographic order."""
    if cplx:
        roots = np.exp(2j * np.pi * np.arange(q_out) / q_out)
        alphabet = range(q_out)
    else:
        roots = np.array([1.0, -1.0], dtype=complex)
        alphabet = range(2)
    if N == 1:
        yield np.ones(1, dtype=complex)
        return
    heads = first_codes if first_codes is not None else alphabet
    for h in heads:
        for code in itertools.product(alphabet, repeat=N - 2):
            yield np.concatenate([[1.0], [roots[h]], roots[list(code)]]).astype(complex)


def _unimodular_candidates(srch, N, cplx, q_out, P):
    """Ratios of the unimodular witnesses ``a = conj(xi)`` over the target grid (vectorized)."""
    batch = []
    for xi in _targets(N, cplx, q_out):
        batch.append(np.conj(xi))
        if len(batch) == 4096:
            _offer_batch(srch, np.array(batch), P)
            batch = []
    if batch:
        _offer_batch(srch, np.array(batch), P)


def _offer_batch(srch, A, P):
    sups = kernels.row_sup(A, P)
    r = np.abs(A).sum(axis=1) / sups
    i = int(np.argmax(r))
    if r[i] > srch.best_ratio:
        srch.best_ratio, srch.best_a = float(r[i]), A[i] / sups[i]


def sidon_constant(sys, mode="exact", coefficients="complex", q_out=Q_OUTER, n_targets=4096,
                   target_cap=TARGET_CAP, rng=None, workers=None, refine=None):
    """Lower and upper estimates of the Sidon constant of ``sys`` on its grid.

    ``exact``: the target grid (Q-gon phases with ``xi_1 = 1``, or signs for
    ``coefficients="real"``) is enumerated; the upper bound is the largest
    interpolation LP value divided by ``cos(pi/q_out)`` (phase grids, N >= 2).
    ``sampled``: random targets plus ascent; the upper bound is heuristic.
    ``refine``: optional callable returning the same system on a twice finer grid.
    """
    if coefficients not in ("complex", "real"):
        raise ValueError("coefficients must be 'complex' or 'real'")
    if mode not in ("exact", "sampled"):
        raise ValueError("mode must be 'exact' or 'sampled'")
    cplx = coefficients == "complex"
    rng = np.random.default_rng(rng)
    grid = _Grid(sys)
    N = grid.N
    lp = _CutLP(grid, cplx)
    lp.seed_rows(rng)
    srch = _Search(lp)
    if mode == "exact":
        if not cplx and N > 12:
            raise ValueError("exact mode with sign targets needs N <= 12")
        n_tg = (q_out if cplx else 2) ** (N - 1)
        if n_tg > target_cap:
            raise ValueError(f"{n_tg} targets exceed the cap {target_cap}; use mode='sampled'")
        workers = workers or lab_threads()
        if workers > 1 and N >= 3 and grid.lazy is None:
            alphabet = list(range(q_out if cplx else 2))
            chunks = [alphabet[i::workers] for i in range(workers)]
            with ProcessPoolExecutor(workers) as ex:
                res = list(ex.map(_sweep_chunk, [(sys, cplx, q_out, ch) for ch in chunks if ch]))
            for L, xi, r, a, c, s in res:
                srch.count += c
                lp.solves += s
                if L > srch.best_L:
                    srch.best_L, srch.best_xi = L, xi
                if r > srch.best_ratio:
                    srch.best_ratio, srch.best_a = r, a
        else:
            for xi in _targets(N, cplx, q_out):
                srch.eval_target(xi)
        if grid.lazy is None:
            _unimodular_candidates(srch, N, cplx, q_out, grid.P)
        L_top = srch.best_L
        srch.ascent(srch.best_xi)  # only sharpens the witness
        factor = 1.0 / np.cos(np.pi / q_out) if (cplx and N > 1) else 1.0
        upper, certified, method = L_top * factor, True, "dual-lp-enumeration"
        upper = max(upper, srch.best_L * factor)
    else:
        for _ in range(n_targets):
            if cplx:
                xi = np.exp(2j * np.pi * rng.random(N))
                xi[0] = 1
            else:
                xi = np.concatenate([[1.0], rng.choice([-1.0, 1.0], N - 1)]).astype(complex)
            srch.eval_target(xi)
        srch.ascent(srch.best_xi)
        factor = 1.0
        upper, certified, method = srch.best_L, False, "dual-lp-sampled"
    # final LP at the best target for the dual certificate
    lp.solve(srch.best_xi)
    measure = lp.dual_measure(srch.best_xi)
    note = f"{grid.size}-point grid" + (" (lazy product)" if grid.lazy is not None else "")
    est = SidonEstimate(srch.best_ratio, srch.best_a, float(upper), certified, method, note, factor,
                        srch.best_xi, measure, srch.count, lp.solves, coefficients=coefficients)
    if refine is not None:
        est.grid_unstable = grid_stability(est, refine())
    return est


def grid_stability(est, finer_sys, rel=0.01):
    """True when the witness ratio moves by more than ``rel`` on the finer grid."""
    r_fine = ratio(finer_sys, est.witness)
    return bool(abs(r_fine - est.lower) > rel * est.lower)


def tensor_sidon_constant(sys, k, mode="sampled", budget=20_000, n_targets=256, coefficients="complex",
                          rng=None, cap=LP_GRID_CAP, **kw):
    """Sidon estimates for the k-fold product system.

    Small product grids are materialized; larger ones are handled lazily with
    exact product-grid suprema as the cutting-plane oracle, and the upper
    bound is then marked heuristic.  ``budget`` caps the number of LP solves.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return sidon_constant(sys, mode=mode, coefficients=coefficients, n_targets=n_targets, rng=rng, **kw)
    lazy = LazyProduct.power(sys, k)
    if lazy.grid_size <= cap:
        est = sidon_constant(lazy.materialize(), mode=mode, coefficients=coefficients,
                             n_targets=n_targets, rng=rng, **kw)
        est.k = k
        return est
    cplx = coefficients == "complex"
    rng = np.random.default_rng(rng)
    lp = _CutLP(_Grid(lazy), cplx)
    lp.seed_rows(rng)
    srch = _Search(lp)
    unstable = False
    for _ in range(n_targets):
        if lp.solves >= budget:
            unstable = True
            break
        xi = np.exp(2j * np.pi * rng.random(sys.N)) if cplx else rng.choice([-1.0, 1.0], sys.N).astype(complex)
        xi = xi * np.conj(xi[0])
        srch.eval_target(xi)
    if srch.best_xi is None:
        raise RuntimeError("budget too small for a single target")
    before = srch.best_L
    srch.ascent(srch.best_xi)
    if lp.solves >= budget and srch.best_L > before * (1 + 1e-6):
        unstable = True
    measure = lp.dual_measure(srch.best_xi) if not unstable else None
    return SidonEstimate(srch.best_ratio, srch.best_a, srch.best_L, False, "dual-lp-sampled",
                         f"{lazy.grid_size}-point lazy product grid", 1.0, srch.best_xi, measure,
                         srch.count, lp.solves, unstable=unstable, k=k, coefficients=coefficients)


def derived_witness_check(sys, a, k):
    """Exact transfer inequality from the ``k`` to the ``k+1`` fold system.

    For each point ``s`` of the last factor, ``b(s) = a * phi(s)`` is a
    ``k``-fold coefficient vector; integrating ``sum |b_n(s)| <= r_k(s) sup|...|``
    over ``s`` gives ``delta sum|a| <= max_s r_k(s) * sup_{k+1}|...|`` with
    ``delta = min_n ||phi_n||_1``.  Returns ``(lhs, rhs, holds)``.
    """
    a = np.asarray(a, dtype=complex)
    base = LazyProduct.power(sys, k)
    full = LazyProduct.power(sys, k + 1)
    sup_full, _ = full.sup(a)
    delta = float(sys.l1_norms().min())
    rk = 0.0
    integral = 0.0
    for s in range(sys.M):
        b = a * sys.values[:, s]
        if not np.any(b):
            continue
        sb, _ = base.sup(b)
        rk = max(rk, np.abs(b).sum() / sb)
        integral += sys.space.weights[s] * np.abs(b).sum()
    lhs = delta * np.abs(a).sum()
    return float(lhs), float(rk * sup_full), bool(lhs <= integral * (1 + 1e-12) and integral <= rk * sup_full * (1 + 1e-12))


# ---------------------------------------------------------------------------
# matricial trace identities
# ---------------------------------------------------------------------------

def polar_maximizer(a):
    """Unitary ``u`` with ``tr(u a) = tr|a|`` (from the SVD ``a = U S V^*``)."""
    U, s, Vh = np.linalg.svd(a)
    u = Vh.conj().T @ U.conj().T
    return u, float(s.sum())


def two_unitary_sup(a, unitaries):
    """``max |tr(u_i u_j a)|`` over all ordered pairs of the given unitaries."""
    a = np.asarray(a, dtype=complex)
    U = np.asarray(unitaries)
    best = 0.0
    UA = np.einsum("sij,jk->sik", U, a)  # u_j a
    for i in range(U.shape[0]):
        # tr(u_i (u_j a)) = sum_{p,q} u_i[p,q] (u_j a)[q,p]
        vals = np.abs(np.einsum("pq,sqp->s", U[i], UA))
        best = max(best, float(vals.max()))
    return best


# ---------------------------------------------------------------------------
# randomized sup-norms
# ---------------------------------------------------------------------------

RANDOMIZERS = ("gaussian-complex", "gaussian-real", "sign", "haar-unitary")


@dataclass(frozen=True)
class RandomizedNorm:
    mean: float
    std_error: float
    per_sample: np.ndarray = field(repr=False)


@dataclass
class RandomSidonEstimate:
    value: float
    mc_samples: int
    std_error: float
    randomizer: str
    witness: object = None
    rs3_ratio: float | None = None
    search_value: float | None = None  # in-sample ratio on the optimization draws


def draw_randomizers(kind, S, dims, rng=None):
    """Scalar draws ``S x N`` when ``dims`` is an int; else a list of ``S x d x d`` draws."""
    if kind not in RANDOMIZERS:
        raise ValueError(f"unknown randomizer {kind!r}")
    rng = np.random.default_rng(rng)
    if isinstance(dims, (int, np.integer)):
        shape = (S, int(dims))
        if kind == "gaussian-complex":
            return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
        if kind == "gaussian-real":
            return rng.standard_normal(shape).astype(complex)
        if kind == "sign":
            return (1.0 - 2.0 * rng.integers(0, 2, shape)).astype(complex)
        return np.exp(2j * np.pi * rng.random(shape))
    out = []
    for d in dims:
        if kind == "haar-unitary":
            out.append(haar_unitaries(d, S, rng))
        elif kind == "gaussian-complex":
            out.append((rng.standard_normal((S, d, d)) + 1j * rng.standard_normal((S, d, d))) / np.sqrt(2.0 * d))
        elif kind == "gaussian-real":
            out.append(rng.standard_normal((S, d, d)).astype(complex) / np.sqrt(d))
        else:
            out.append((1.0 - 2.0 * rng.integers(0, 2, (S, d, d))).astype(complex) / np.sqrt(d))
    return out


def _mean_se(v):
    v = np.asarray(v, dtype=float)
    return float(v.mean()), float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0


def _matricial_coefficients(sys, xs, draws):
    """Rows ``C_s`` such that ``C_s @ Phi = sum_k d_k tr(x_k g_k psi_k(t))``."""
    parts = []
    for k, (x, g) in enumerate(zip(xs, draws)):
        d = sys.dims[k]
        xg = np.einsum("ij,sjk->sik", np.asarray(x, dtype=complex), g)
        parts.append(d * np.swapaxes(xg, 1, 2).reshape(g.shape[0], d * d))
    return np.hstack(parts)


def _phi(sys):
    if isinstance(sys, MatricialSystem):
        return np.vstack([b.reshape(-1, sys.M) for b in sys.blocks])
    return sys.values


def randomized_supnorm(sys, coeffs, randomizer="gaussian-complex", samples=2000, seed=0, draws=None):
    """Monte Carlo ``E sup_t |sum_n g_n a_n phi_n(t)|``; matricial systems use
    ``E sup_t |sum_k d_k tr(x_k g_k psi_k(t))|``.  Pass ``draws`` to share
    random numbers between estimators."""
    if samples < 100 and draws is None:
        raise ValueError("need at least 100 samples")
    if isinstance(sys, MatricialSystem):
        if draws is None:
            draws = draw_randomizers(randomizer, samples, sys.dims, seed)
        C = _matricial_coefficients(sys, coeffs, draws)
    else:
        a = np.asarray(coeffs, dtype=complex)
        if draws is None:
            draws = draw_randomizers(randomizer, samples, sys.N, seed)
        C = draws * a[None, :]
    if not np.any(C):
        return RandomizedNorm(0.0, 0.0, np.zeros(C.shape[0]))
    v = kernels.row_sup(C, _phi(sys))
    m, se = _mean_se(v)
    return RandomizedNorm(m, se, v)


def _argmax_values(C, Phi):
    F = C @ Phi
    idx = np.argmax(np.abs(F), axis=1)
    f = F[np.arange(F.shape[0]), idx]
    return np.abs(f), f, idx


def _simplex_min(G, Phi, weights, iters=300, rng=None, start=None):
    """Minimize ``D(c) = mean_s sup_t |sum_n G_sn c_n Phi_n(t)|`` over
    ``c >= 0, sum weights*c = 1`` by exponentiated subgradient descent."""
    N = G.shape[1]
    c = np.full(N, 1.0) if start is None else np.asarray(start, dtype=float).copy()
    c = c / (weights @ c)
    best, best_c = np.inf, c.copy()
    eta = 0.5
    for it in range(iters):
        vals, f, idx = _argmax_values(G * c[None, :], Phi)
        D = vals.mean()
        if D < best:
            best, best_c = D, c.copy()
        ph = np.conj(_phase(f))
        grad = np.real(ph[:, None] * G * Phi[:, idx].T).mean(axis=0)
        gscaled = grad / weights
        step = eta / np.sqrt(it + 1) / max(np.abs(gscaled).max(), 1e-12)
        c = c * np.exp(-step * gscaled)
        c = c / (weights @ c)
    return best, best_c


def randomly_sidon_constant(sys, samples=2000, restarts=4, randomizer="gaussian-complex", seed=0,
                            rs3_trials=16, iters=300):
    """Lower-bound search for the randomly Sidon constant.

    Scalar systems: coefficient moduli are optimized on the simplex (the
    denominator is convex there; phases are irrelevant for rotation-invariant
    randomizers).  The reported value is re-estimated on fresh draws.
    Matricial systems: ``x_k = U_k diag(s_k)``, alternating moduli and polar
    retraction steps on the unitaries.
    """
    rng = np.random.default_rng(seed)
    if isinstance(sys, MatricialSystem):
        return _matricial_random_sidon(sys, samples, restarts, randomizer, rng, iters)
    G = draw_randomizers(randomizer, samples, sys.N, rng)
    Phi = sys.values
    if not np.any(Phi):
        return RandomSidonEstimate(0.0, samples, 0.0, randomizer, np.zeros(sys.N))
    w = np.ones(sys.N)
    best, best_c = np.inf, None
    for r in range(restarts):
        start = None if r == 0 else rng.random(sys.N) + 0.05
        D, c = _simplex_min(G, Phi, w, iters=iters, start=start)
        if D < best:
            best, best_c = D, c
    fresh = randomized_supnorm(sys, best_c, randomizer, samples, seed=rng.integers(2**63))
    val = float(best_c.sum() / fresh.mean)
    se = val * fresh.std_error / fresh.mean
    rs3 = rs3_ratio(sys, best_c, samples, rng, trials=rs3_trials, randomizer=randomizer)
    return RandomSidonEstimate(val, samples, se, randomizer, best_c.astype(complex), rs3, float(1.0 / best))


def rs3_ratio(sys, diag, samples=2000, rng=None, trials=16, randomizer="gaussian-complex"):
    """``max |tr A| / E||sum_n g_n sum_k A_nk psi_k||_inf`` over ``A = diag(c) + noise``."""
    rng = np.random.default_rng(rng)
    G = draw_randomizers(randomizer, samples, sys.N, rng)
    N = sys.N
    best = 0.0
    for t in range(trials + 1):
        A = np.diag(np.asarray(diag, dtype=complex))
        if t:
            A = A + 0.1 * np.abs(diag).mean() * (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)))
        den = kernels.row_sup(G @ A, sys.values).mean()
        if den > 0:
            best = max(best, abs(np.trace(A)) / den)
    return float(best)


def _polar_unitary(z):
    U, _, Vh = np.linalg.svd(z)
    return U @ Vh


def _matricial_random_sidon(sys, samples, restarts, randomizer, rng, iters, central=False):
    dims = sys.dims
    draws = draw_randomizers(randomizer, samples, dims, rng)
    Phi = _phi(sys)
    if not np.any(Phi):
        return RandomSidonEstimate(0.0, samples, 0.0, randomizer, [np.zeros((d, d)) for d in dims])
    # moduli weights: sum_k d_k sum_i s_ki = 1
    slots = [(k, i) for k, d in enumerate(dims) for i in range(d)]
    weights = np.array([dims[k] for k, _ in slots], dtype=float)

    def build(Us, s):
        xs, pos = [], 0
        for k, d in enumerate(dims):
            xs.append(Us[k] @ np.diag(s[pos:pos + d]))
            pos += d
        return xs

    def slot_matrix(Us):
        # column j of the result is the coefficient row obtained with x = U e_i e_i^T for slot j
        cols = []
        for k, d in enumerate(dims):
            for i in range(d):
                x = [np.zeros((dd, dd), dtype=complex) for dd in dims]
                x[k][:, i] = Us[k][:, i]
                cols.append(_matricial_coefficients(sys, x, draws))
        return np.stack(cols, axis=1)  # S x slots x F

    best, best_x = np.inf, None
    for r in range(restarts):
        if central:
            Us = [np.eye(d, dtype=complex) for d in dims]
        else:
            Us = [np.eye(d, dtype=complex) if r == 0 else haar_unitaries(d, 1, rng)[0] for d in dims]
        s = np.ones(len(slots))
        for _ in range(1 if central else 4):
            B = slot_matrix(Us)  # S x slots x F
            if central:
                # x_k = c_k I: tie the slots of each block together
                Bc = []
                pos = 0
                for k, d in enumerate(dims):
                    Bc.append(B[:, pos:pos + d].sum(axis=1))
                    pos += d
                Bk = np.stack(Bc, axis=1)
                wk = np.array([d * d for d in dims], dtype=float)
                D, c = _simplex_min_blocks(Bk, Phi, wk, iters)
                s = np.concatenate([np.full(d, c[k]) for k, d in enumerate(dims)])
            else:
                D, s = _simplex_min_blocks(B, Phi, weights, iters, start=s)
                Us = _unitary_step(sys, Us, s, draws, Phi, build)
        xs = build(Us, s)
        C = _matricial_coefficients(sys, xs, draws)
        D = kernels.row_sup(C, Phi).mean()
        if D < best:
            best, best_x = D, xs
    fresh_draws = draw_randomizers(randomizer, samples, dims, rng)
    fresh = randomized_supnorm(sys, best_x, draws=fresh_draws)
    num = sum(d * np.linalg.svd(x, compute_uv=False).sum() for d, x in zip(dims, best_x))
    val = float(num / fresh.mean)
    return RandomSidonEstimate(val, samples, val * fresh.std_error / fresh.mean, randomizer, best_x,
                               None, float(num / best))


def _simplex_min_blocks(B, Phi, weights, iters, start=None):
    """Same as ``_simplex_min`` for coefficient rows ``sum_j c_j B[:, j, :]``."""
    n = B.shape[1]
    c = np.ones(n) if start is None else np.asarray(start, dtype=float).copy()
    c = np.maximum(c, 1e-12)
    c = c / (weights @ c)
    best, best_c = np.inf, c.copy()
    eta = 0.5
    for it in range(iters):
        C = np.einsum("sjf,j->sf", B, c)
        vals, f, idx = _argmax_values(C, Phi)
        D = vals.mean()
        if D < best:
            best, best_c = D, c.copy()
        ph = np.conj(_phase(f))
        col = Phi[:, idx].T  # S x F
        grad = np.real(ph[:, None] * np.einsum("sjf,sf->sj", B, col)).mean(axis=0)
        gscaled = grad / weights
        step = eta / np.sqrt(it + 1) / max(np.abs(gscaled).max(), 1e-12)
        c = c * np.exp(-step * gscaled)
        c = c / (weights @ c)
    return best, best_c


def _unitary_step(sys, Us, s, draws, Phi, build, steps=20, eta=0.2):
    """Subgradient steps on the unitary factors with polar retraction."""
    best_Us = [U.copy() for U in Us]
    best = kernels.row_sup(_matricial_coefficients(sys, build(Us, s), draws), Phi).mean()
    for _ in range(steps):
        xs = build(Us, s)
        C = _matricial_coefficients(sys, xs, draws)
        vals, f, idx = _argmax_values(C, Phi)
        ph = np.conj(_phase(f))
        new = []
        pos = 0
        for k, (d, g) in enumerate(zip(sys.dims, draws)):
            psi = np.moveaxis(sys.blocks[k], 2, 0)[idx]  # S x d x d
            # d/dx Re(ph * d tr(x g psi)) = Re(ph * d (g psi)^T)
            M = d * np.einsum("s,sij->ij", ph, np.einsum("sab,sbc->sac", g, psi)).T / len(ph)
            gradU = np.conj(M) @ np.diag(s[pos:pos + d])  # real-part gradient in the conj convention
            new.append(_polar_unitary(Us[k] - eta * gradU))
            pos += d
        Us = new
        D = kernels.row_sup(_matricial_coefficients(sys, build(Us, s), draws), Phi).mean()
        if D < best:
            best, best_Us = D, [U.copy() for U in Us]
    return best_Us


def randomly_central_sidon_constant(sys, samples=2000, restarts=1, randomizer="gaussian-complex", seed=0,
                                    iters=300):
    """Randomly Sidon search restricted to ``x_k = c_k I``."""
    rng = np.random.default_rng(seed)
    if not isinstance(sys, MatricialSystem):
        sys = MatricialSystem(sys.space, tuple(sys.values[n][None, None, :] for n in range(sys.N)), sys.label)
    return _matricial_random_sidon(sys, samples, restarts, randomizer, rng, iters, central=True)


# ---------------------------------------------------------------------------
# comparison inequalities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PairedCheck:
    lhs: float
    rhs: float
    diff_se: float
    holds: bool


def _paired(lhs_samples, rhs_samples, sigmas=3.0):
    d = np.asarray(lhs_samples) - np.asarray(rhs_samples)
    m, se = _mean_se(d)
    return PairedCheck(float(np.mean(lhs_samples)), float(np.mean(rhs_samples)), se,
                       bool(m <= sigmas * se + 1e-12))


def contraction_check(sys, coeffs, left, right, randomizer="gaussian-complex", samples=2000, seed=0):
    """``E sup|sum d_k tr(a_k g_k b_k x_k psi_k)| <= sup||a|| sup||b|| E sup|sum d_k tr(g_k x_k psi_k)|``.

    Scalar systems take scalar multipliers ``left``/``right``.  Common random
    numbers: the same draws feed both sides.
    """
    rng = np.random.default_rng(seed)
    if isinstance(sys, MatricialSystem):
        draws = draw_randomizers(randomizer, samples, sys.dims, rng)
        moved = [np.einsum("ij,sjk,kl->sil", a, g, b) for a, g, b in zip(left, draws, right)]
        # tr(x (a g b) psi) matches tr(a g b x psi) after cycling x to the front
        xs = list(coeffs)
        lhs = randomized_supnorm(sys, xs, draws=moved).per_sample
        rhs = randomized_supnorm(sys, xs, draws=draws).per_sample
        c = max(np.linalg.norm(a, 2) for a in left) * max(np.linalg.norm(b, 2) for b in right)
    else:
        draws = draw_randomizers(randomizer, samples, sys.N, rng)
        m = np.asarray(left, dtype=complex) * np.asarray(right, dtype=complex)
        lhs = randomized_supnorm(sys, np.asarray(coeffs) * m, draws=draws).per_sample
        rhs = randomized_supnorm(sys, coeffs, draws=draws).per_sample
        c = float(np.abs(left).max() * np.abs(right).max())
    return _paired(lhs, c * rhs)


def rotation_check(sys, coeffs, W, samples=2000, seed=0):
    """Rotational invariance: ``E sup|sum (W g)_n a_n phi_n|`` vs ``E sup|sum g_n a_n phi_n|``
    (independent draws); returns ``(mean_rotated, mean_plain, combined_se, within_3se)``."""
    rng = np.random.default_rng(seed)
    g1 = draw_randomizers("gaussian-complex", samples, sys.N, rng)
    g2 = draw_randomizers("gaussian-complex", samples, sys.N, rng)
    r1 = randomized_supnorm(sys, coeffs, draws=g1 @ np.asarray(W).T)
    r0 = randomized_supnorm(sys, coeffs, draws=g2)
    se = float(np.hypot(r1.std_error, r0.std_error))
    return r1.mean, r0.mean, se, bool(abs(r1.mean - r0.mean) <= 3 * se)


@dataclass(frozen=True)
class DominationReport:
    ratios: np.ndarray
    max_ratio: float
    lhs: np.ndarray
    rhs: np.ndarray
    rhs_se: np.ndarray
    hypothesis_ok: bool  # mean-zero rows


def domination_check(sys, J=8, families=50, samples=2000, seed=0, mean_tol=1e-8):
    """Both sides of ``int ||sum phi_n(t) x_n||_inf dm`` vs ``E||sum g_n x_n||_inf``
    over random coefficient families ``x_n in C^J``."""
    rng = np.random.default_rng(seed)
    N = sys.N
    G = draw_randomizers("gaussian-complex", samples, N, rng)
    lhs, rhs, se = [], [], []
    for _ in range(families):
        X = (rng.standard_normal((N, J)) + 1j * rng.standard_normal((N, J))) / np.sqrt(2)
        F = np.abs(sys.values.T @ X).max(axis=1)  # per grid point
        lhs.append(float(sys.space.weights @ F))
        v = np.abs(G @ X).max(axis=1)
        m, s = _mean_se(v)
        rhs.append(m)
        se.append(s)
    lhs, rhs, se = map(np.array, (lhs, rhs, se))
    ok = bool(np.abs(sys.means()).max() <= mean_tol)
    r = lhs / rhs
    return DominationReport(r, float(r.max()), lhs, rhs, se, ok)


def talagrand_check(sys, C_hat, K_reg=4.0, J=8, families=20, samples=2000, seed=0):
    """``int ||sum phi_n x_n||_inf <= K_reg * C_hat * E||sum g_n x_n||_inf`` per family,
    judged at 3 standard errors of the Gaussian side."""
    rep = domination_check(sys, J, families, samples, seed)
    slack = K_reg * C_hat * (rep.rhs + 3 * rep.rhs_se) - rep.lhs
    return rep, bool(np.all(slack >= -1e-12))


def chevet_bound_check(systems, coeffs, samples=1000, seed=0, randomizer="gaussian-real"):
    """``E||sum_j g_j x^1_j (x) ... (x) x^k_j|| <= sqrt(k) sum_m (sup_j prod_{q != m} ||x^q_j||) E||sum_j g_j x^m_j||``
    with ``x^q_j = a^q_j phi^q_j`` in ``l_inf`` of the q-th grid; paired over shared draws."""
    k = len(systems)
    if k < 2:
        raise ValueError("need k >= 2 factors")
    N = systems[0].N
    X = [np.asarray(a, dtype=complex)[:, None] * s.values for a, s in zip(coeffs, systems)]
    G = draw_randomizers(randomizer, samples, N, seed)
    norms = np.array([np.abs(x).max(axis=1) for x in X])  # k x N
    lhs = np.empty(samples)
    for s in range(samples):
        lhs[s], _ = kernels.product_grid_sup(G[s], X)
    rhs = np.zeros(samples)
    for m in range(k):
        others = np.prod(np.delete(norms, m, axis=0), axis=0).max()
        rhs += others * kernels.row_sup(G, X[m])
    rhs *= np.sqrt(k)
    return _paired(lhs, rhs)
