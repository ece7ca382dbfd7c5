"""Experiment presets, configuration and report emission."""
from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .chaos import gaussian_comparison_check, mela_sweep, mela_lp
from .generators import (
    all_sign_matrices, character_samples, ginibre, haar_moment_deviation, haar_unitaries,
    make_gaussian_system, make_haar_unitary_system, make_lacunary, make_rademacher, make_sign_ensemble,
    polar_domination_apply, polar_domination_operator)
from .orlicz import psi2_norm, subgaussian_constant
from .sidon import (
    chevet_bound_check, contraction_check, derived_witness_check, draw_randomizers, polar_maximizer,
    randomized_supnorm, randomly_sidon_constant, sidon_constant, talagrand_check, tensor_sidon_constant,
    two_unitary_sup)
from .spaces import FunctionSystem
from .tensornorms import ChaosMap, decompose_t_r, trace_duality_bound

TALAGRAND_K = 4.0
MELA_LOG_CONSTANT = 3.0
PSI2_STD_NORMAL = math.sqrt(2.0 / (1.0 - math.exp(-2.0)))


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    name: str
    seed: int = 0
    grid_m: int | None = None
    samples: int | None = None
    restarts: int | None = None
    delta: float | None = None
    chi: float | None = None
    dims: int | None = None
    N: int | None = None
    out_path: str | None = None

    def resolved(self):
        if self.name not in PRESETS:
            raise ConfigError(f"unknown preset {self.name!r}; choose from {sorted(PRESETS)}")
        base = dict(PRESETS[self.name][1])
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name in ("name", "seed", "out_path") or v is None:
                continue
            base[f.name] = v
        for k, v in base.items():
            if isinstance(v, (int, float)) and not isinstance(v, bool) and not v > 0:
                raise ConfigError(f"parameter {k} must be positive, got {v}")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")
        if "delta" in base and not base["delta"] < 1:
            raise ConfigError("delta must lie in (0, 1)")
        return base


@dataclass
class Check:
    name: str
    lhs: float
    rhs: float
    tolerance: float
    passed: bool
    note: str = ""


@dataclass
class Report:
    config: dict
    checks: list = field(default_factory=list)
    values: dict = field(default_factory=dict)
    witnesses: dict = field(default_factory=dict)
    timing: float = 0.0
    versions: dict = field(default_factory=dict)

    def check(self, name, lhs, rhs, tolerance=0.0, note="", relation="<="):
        """Record ``lhs <= rhs + tolerance`` (or ``>=``, ``==``, ``in`` for a (lo, hi) rhs)."""
        if relation == "<=":
            ok = lhs <= rhs + tolerance
        elif relation == ">=":
            ok = lhs >= rhs - tolerance
        elif relation == "==":
            ok = abs(lhs - rhs) <= tolerance
        else:
            raise ValueError(relation)
        self.checks.append(Check(name, float(lhs), float(rhs), float(tolerance), bool(ok), note))
        return ok

    def flag(self, name, ok, note=""):
        self.checks.append(Check(name, float(bool(ok)), 1.0, 0.0, bool(ok), note))
        return ok

    @property
    def all_passed(self):
        return all(c.passed for c in self.checks)

    def to_dict(self, include_timing=False):
        d = {"config": self.config, "checks": [asdict(c) for c in self.checks], "values": self.values,
             "witnesses": self.witnesses, "versions": self.versions}
        if include_timing:
            d["timing"] = self.timing
        return _jsonable(d)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, complex):
        return [_jsonable(x.real), _jsonable(x.imag)]
    return x


def _cvec(z):
    return [[float(c.real), float(c.imag)] for c in np.asarray(z, dtype=complex).ravel()]


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------

def _subg_tensor2(p, seed, rep):
    m = p["N"]
    sys = make_rademacher(m)
    sg = subgaussian_constant(sys, restarts=p["restarts"], steps=30, rng=seed)
    rep.values["subgaussian_C"] = sg.constant_C
    rep.values["subgaussian_sigma"] = sg.constant_sigma
    rows = max(psi2_norm(r, sys.space.weights).norm for r in sys.values)
    rep.check("C dominates single rows", sg.constant_C, rows, 1e-12, relation=">=")
    s1 = sidon_constant(sys, mode="sampled", n_targets=64, rng=seed)
    rep.check("k=1 lower <= upper", s1.lower, s1.upper, 1e-9)
    s2 = tensor_sidon_constant(sys, 2, mode="sampled", n_targets=32, rng=seed)
    s2b = tensor_sidon_constant(sys, 2, mode="sampled", n_targets=32, rng=seed + 1)
    rep.values.update(k1_lower=s1.lower, k1_upper=s1.upper, k2_lower=s2.lower, k2_upper=s2.upper,
                      k2_lower_reseeded=s2b.lower)
    rep.check("k=2 lower <= upper", s2.lower, s2.upper, 1e-9)
    rep.check("k=2 lower stable under reseeding", abs(s2.lower - s2b.lower) / s2.lower, 0.10)
    lhs, rhs, ok = derived_witness_check(sys, s1.witness, 1)
    rep.check("derived witness k=1 -> k=2", lhs, rhs, 1e-9)
    rs = randomly_sidon_constant(sys, samples=p["samples"], restarts=2, seed=seed)
    factor = 2.0 / math.sqrt(math.pi)
    rep.values["randomly_sidon"] = rs.value
    rep.check("randomly Sidon <= Sidon * 2/sqrt(pi)", rs.value, s1.upper * factor, 3 * rs.std_error)
    rep.witnesses["k2"] = _cvec(s2.witness)


def _decomp(p, seed, rep):
    rng = np.random.default_rng(seed)
    nv, D, S, delta = p["dims"], p["degree"], p["samples"], p["delta"]
    x1 = rng.standard_normal((S, nv))
    x2 = rng.standard_normal((S, nv))
    u1 = ChaosMap.evaluation(x1, nv, D)
    u2 = ChaosMap.evaluation(x2, nv, D)
    dec = decompose_t_r(u1, u2, delta, vec_dim=p["vec_dim"], rng=seed)
    tol = p["mc_tol"]
    rep.flag("t + r = S in chaos coefficients", dec.identity_exact)
    rep.check("wedge(t) <= (2/delta)(1+tol)", dec.wedge_t, dec.wedge_target * (1 + tol))
    rep.check("vee(r) <= delta(1+tol)", dec.vee_r.value, dec.vee_target * (1 + tol))
    rep.check("vee(r) <= gamma2*(r) estimate", dec.vee_r.value, dec.gamma2_r.value, 1e-12)
    rep.check("gamma2*(r) estimate <= certified bound", dec.gamma2_r.value, dec.gamma2_r_upper, 1e-9)
    rot = ChaosMap.evaluation(x1 @ np.eye(nv).T, nv, D)
    rep.flag("identity rotation reproduces the decomposition", np.array_equal(rot.matrix, u1.matrix))
    d = 4
    worst = -np.inf
    for s in range(5):
        r2 = np.random.default_rng(seed * 100 + s)
        psi1 = haar_unitaries(d, S, r2)
        psi2 = haar_unitaries(d, S, r2) * r2.uniform(0.2, 1.0, (S, 1, 1))
        a = r2.standard_normal((d, d)) + 1j * r2.standard_normal((d, d))
        td = trace_duality_bound(dec.r, dec.gamma2_r_upper, psi1, psi2, a)
        worst = max(worst, td.lhs - td.rhs)
    rep.check("trace duality with certified gamma2* bound", worst, 0.0, 1e-9)
    mu = mela_lp(delta)
    rep.values.update(wedge_t=dec.wedge_t, w0=dec.wedge_target, vee_r=dec.vee_r.value,
                      gamma2_r=dec.gamma2_r.value, gamma2_r_certified=dec.gamma2_r_upper,
                      gamma2_target=dec.gamma2_target, mela_tv=mu.total_variation)


def _mela_sweep(p, seed, rep):
    deltas = 2.0 ** -np.arange(1, p["levels"] + 1)
    tv, slope = mela_sweep(deltas)
    for d in deltas:
        mu = mela_lp(d)
        odd = max(abs(mu.moment(n)) for n in range(3, mu.n_max_odd + 1, 2))
        rep.check(f"odd moments <= delta at {d:g}", odd, d, 1e-9)
        rep.check(f"first moment = 1 at {d:g}", mu.moment(1), 1.0, 1e-9, relation="==")
        rep.check(f"TV <= {MELA_LOG_CONSTANT}|ln delta| at {d:g}", mu.total_variation,
                  MELA_LOG_CONSTANT * abs(math.log(d)), 0.0)
    rep.flag("TV nondecreasing as delta shrinks", bool(np.all(np.diff(tv) >= -1e-9)))
    rep.check("log-slope positive", slope, 0.0, 0.0, relation=">=")
    rep.values.update(deltas=deltas, tv=tv, slope=slope)


def generator_systems(seed, N=6):
    """Scalar systems used by the inequality suite."""
    return {
        "rademacher": make_rademacher(N),
        "lacunary": make_lacunary([2 ** k for k in range(N)], 4 * 2 ** N),
        "gaussian": make_gaussian_system(N, 512, seed=seed, is_complex=True),
    }


def _talagrand(p, seed, rep):
    for name, sys in generator_systems(seed, p["N"]).items():
        sg = subgaussian_constant(sys, restarts=p["restarts"], steps=20, rng=seed)
        drep, ok = talagrand_check(sys, sg.constant_C, TALAGRAND_K, J=p["dims"], families=p["families"],
                                   samples=p["samples"], seed=seed)
        worst = float(np.max(drep.lhs - TALAGRAND_K * sg.constant_C * drep.rhs))
        rep.check(f"talagrand {name}", worst, 0.0, float(3 * TALAGRAND_K * sg.constant_C * drep.rhs_se.max()),
                  note=f"C_hat={sg.constant_C:.4f}")
        rep.values[f"{name}_C_hat"] = sg.constant_C
        rep.values[f"{name}_domination_ratio"] = drep.max_ratio


def _rs_equiv(p, seed, rep):
    sys = make_rademacher(p["N"])
    rs = randomly_sidon_constant(sys, samples=p["samples"], restarts=2, seed=seed)
    s1 = sidon_constant(sys, mode="exact", rng=seed)
    s2 = tensor_sidon_constant(sys, 2, mode="sampled", n_targets=32, rng=seed)
    s4 = tensor_sidon_constant(sys, 4, mode="sampled", n_targets=16, rng=seed)
    factor = 2.0 / math.sqrt(math.pi)
    rep.check("randomly Sidon <= Sidon upper * 2/sqrt(pi)", rs.value, s1.upper * factor, 3 * rs.std_error)
    for k, s in ((2, s2), (4, s4)):
        rep.check(f"tensor{k} lower <= upper", s.lower, s.upper, 1e-9)
    lhs, rhs, _ = derived_witness_check(sys, s2.witness, 2)
    rep.check("derived witness k=2 -> k=3", lhs, rhs, 1e-9)
    rep.values.update(randomly_sidon=rs.value, randomly_sidon_se=rs.std_error, rs3=rs.rs3_ratio,
                      sidon=[s1.lower, s1.upper], tensor2=[s2.lower, s2.upper], tensor4=[s4.lower, s4.upper])


def _chevet(p, seed, rep):
    rng = np.random.default_rng(seed)
    lac = make_lacunary([2 ** k for k in range(p["N"])], 4 * 2 ** p["N"])
    one = FunctionSystem(lac.space, np.ones((p["N"], lac.M)))
    cases = {
        "k=2 lacunary": ([lac, lac], [rng.standard_normal(p["N"]) for _ in range(2)]),
        "k=2 constant factor": ([lac, one], [rng.standard_normal(p["N"]), np.ones(p["N"])]),
        "k=3 rademacher": ([make_rademacher(3)] * 3, [rng.standard_normal(3) for _ in range(3)]),
    }
    for name, (systems, coeffs) in cases.items():
        c = chevet_bound_check(systems, coeffs, samples=p["samples"], seed=seed)
        rep.check(f"chevet {name}", c.lhs - c.rhs, 0.0, 3 * c.diff_se)
        rep.values[name] = [c.lhs, c.rhs]


def _matricial_60(p, seed, rep):
    rng = np.random.default_rng(seed)
    d = p["dims"]
    U = haar_unitaries(d, p["samples"], rng)
    worst_polar, worst_pair, alpha = 0.0, -np.inf, np.inf
    for _ in range(p["trials"]):
        a = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        u, tn = polar_maximizer(a)
        worst_polar = max(worst_polar, abs(np.trace(u @ a) - tn) / max(1.0, tn))
        s = two_unitary_sup(a, U)
        worst_pair = max(worst_pair, s - tn)
        alpha = min(alpha, s / tn)
    rep.check("polar witness attains tr|a|", worst_polar, 0.0, 1e-9)
    rep.check("two-unitary sup <= tr|a|", worst_pair, 0.0, 1e-9)
    rep.values["alpha_hat"] = alpha


def _refine_pair(x, a1, a2, chi):
    """Alternating sign-matrix ascent of ``|tr(a1 a2 x)|`` inside ``{||a|| <= chi}``."""
    n = x.shape[0]
    val = abs(np.trace(a1 @ a2 @ x))
    for _ in range(50):
        improved = False
        for side in (0, 1):
            # tr(a1 a2 x) = sum(a1 * (a2 x)^T) = sum(a2 * (x a1)^T)
            W = (a2 @ x).T if side == 0 else (x @ a1).T
            ph = np.exp(-1j * np.angle(np.sum(W * (a1 if side == 0 else a2))))
            cand = np.where((ph * W).real >= 0, 1.0, -1.0) / np.sqrt(n)
            if np.linalg.norm(cand, 2) > chi + 1e-12:
                continue
            trial = (cand, a2) if side == 0 else (a1, cand)
            v = abs(np.trace(trial[0] @ trial[1] @ x))
            if v > val * (1 + 1e-12):
                a1, a2, val, improved = trial[0], trial[1], v, True
        if not improved:
            return val
    return val


def _sign_constant(xs, members, refine_chi=None, starts=8):
    """``max_x tr|x| / max_{a',a''} |tr(x a' a'')|`` over the ensemble.

    With ``refine_chi`` the pair supremum of the currently worst ``x`` is
    improved by alternating ascent from its ``starts`` best ensemble pairs,
    repeating until the worst ``x`` is one already refined.
    """
    n = members.shape[1]
    Mflat = members.reshape(members.shape[0], n * n)
    ratios, tops = [], []
    for x in xs:
        B = np.einsum("kij,jl->kil", members, x)
        T = np.abs(Mflat @ np.swapaxes(B, 1, 2).reshape(B.shape[0], n * n).T)
        ratios.append(np.linalg.svd(x, compute_uv=False).sum() / T.max())
        if refine_chi is not None:
            flat = np.argsort(T, axis=None)[::-1][:starts]
            tops.append(np.column_stack(np.unravel_index(flat, T.shape)))
    ratios = np.array(ratios)
    if refine_chi is None:
        return float(ratios.max()), ratios
    done = np.zeros(len(xs), dtype=bool)
    while True:
        k = int(np.argmax(ratios))
        if done[k]:
            return float(ratios[k]), ratios
        x = xs[k]
        val = max(_refine_pair(x, members[i], members[j], refine_chi) for i, j in tops[k])
        ratios[k] = min(ratios[k], np.linalg.svd(x, compute_uv=False).sum() / val)
        done[k] = True


def brute_force_sign_constant(xs, n):
    """Pure-python reference: loops over every pair of sign matrices."""
    import itertools
    s = 1.0 / math.sqrt(n)
    mats = [[[s * e[i * n + j] for j in range(n)] for i in range(n)]
            for e in itertools.product((1, -1), repeat=n * n)]

    def mul(A, B):
        return [[sum(A[i][k] * B[k][j] for k in range(n)) for j in range(n)] for i in range(n)]

    best = 0.0
    for x in xs:
        xl = x.tolist()
        top = 0.0
        for a1 in mats:
            for a2 in mats:
                P = mul(mul(a1, a2), xl)
                top = max(top, abs(sum(P[i][i] for i in range(n))))
        best = max(best, float(np.linalg.svd(x, compute_uv=False).sum()) / top)
    return best


def _random_x(rng, n, count):
    return [rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) for _ in range(count)]


def _signmatrix(p, seed, rep):
    rng = np.random.default_rng(seed)
    xs2 = _random_x(rng, 2, p["x_count"])
    members = all_sign_matrices(2)
    ens = make_sign_ensemble(2, math.sqrt(2), 16, seed)
    rep.check("n=2 rejection rate", ens.rejection_rate, 0.0, 0.0, relation="==")
    C2, _ = _sign_constant(xs2, members)
    oracle = brute_force_sign_constant(xs2[: p["oracle_x"]], 2)
    C2_sub, _ = _sign_constant(xs2[: p["oracle_x"]], members)
    rep.check("n=2 exhaustive matches brute force", C2_sub, oracle, 1e-12, relation="==")
    rep.values["C_hat_n2"] = C2
    for n in p["ns"]:
        xs = _random_x(rng, n, p["x_count"])
        e1 = make_sign_ensemble(n, p["chi"], p["ensemble"], seed)
        e2 = make_sign_ensemble(n, p["chi"], 2 * p["ensemble"], seed)
        c1, _ = _sign_constant(xs, e1.members, p["chi"])
        c2, _ = _sign_constant(xs, e2.members, p["chi"])
        rep.flag(f"n={n} members valid", e1.valid() and e2.valid())
        rep.check(f"n={n} drift when doubling", abs(c1 - c2) / c1, 0.10)
        rep.values[f"C_hat_n{n}"] = [c1, c2]
        rep.values[f"rejection_n{n}"] = e2.rejection_rate


def _character(p, seed, rep):
    d, S = p["dims"], p["samples"]
    chi = character_samples(d, S, seed)
    v = chi.values[0]
    m2 = np.abs(v) ** 2
    rep.check("E|chi|^2 = 1", m2.mean(), 1.0, 3 * m2.std(ddof=1) / math.sqrt(S), relation="==")
    C = psi2_norm(v, chi.space.weights).norm
    rep.values["psi2_chi"] = C
    eps = 1.0
    thr = d * (1 - eps ** 2 / 2)
    freq = float(np.mean(v.real > thr))
    bound = math.e * math.exp(-(d ** 2) * (1 - eps ** 2 / 2) ** 2 / C ** 2)
    rep.check("tail frequency <= e exp(-d^2(1-eps^2/2)^2/C^2)", freq, bound, 3 * math.sqrt(max(freq, 1 / S) / S))
    tight = math.e * math.exp(-(d ** 2 / 2) / C ** 2)
    rep.check("tail frequency <= e exp(-(d^2/2)/C^2)", freq, tight, 3 * math.sqrt(max(freq, 1 / S) / S))
    one = character_samples(1, 1000, seed)
    rep.check("d=1 psi2 norm", psi2_norm(one.values[0], one.space.weights).norm, 1.0, 1e-10, relation="==")
    # covering side versus the Gaussian sup over a sampled grid of t
    grid = haar_unitaries(d, p["grid"], seed + 1)
    g = ginibre(d, p["mc"], seed + 2)
    sup = np.abs(d * np.einsum("sij,tji->st", g, grid)).max(axis=1)
    tr = np.trace(grid, axis1=1, axis2=2).real
    lhs = 0.0
    for e in np.linspace(0.2, 1.4, 13):
        f = float(np.mean(tr > d * (1 - e ** 2 / 2)))
        if f * p["grid"] >= 10 and f < 1:
            lhs = max(lhs, e * d * math.sqrt(math.log(1 / f)))
    rep.values.update(sudakov_lhs=lhs, gaussian_sup=float(sup.mean()), c_prime_hat=lhs / float(sup.mean()))
    rep.check("Sudakov ratio finite", lhs / float(sup.mean()), float("inf"), note="logged")


def _sub2(p, seed, rep):
    rng = np.random.default_rng(seed)
    K = p["K"]
    k = np.arange(2, K + 2)
    scale = 1.0 / np.sqrt(np.log(k))
    vals = np.array([np.max(np.abs(rng.standard_normal(K)) * scale) for _ in range(p["reps"])])
    est = float(vals.mean())
    lo, hi = 0.2 * PSI2_STD_NORMAL, 5.0 * PSI2_STD_NORMAL
    rep.check("sub2 lower band", est, lo, 0.0, relation=">=")
    rep.check("sub2 upper band", est, hi, 0.0)
    z = make_gaussian_system(1, 20000, seed + 1)
    rep.values.update(estimate=est, std_error=float(vals.std(ddof=1) / math.sqrt(len(vals))),
                      psi2_closed_form=PSI2_STD_NORMAL,
                      psi2_engine_on_sample=psi2_norm(z.values[0], z.space.weights).norm)


def _contraction(p, seed, rep):
    rng = np.random.default_rng(seed)
    S = p["samples"]
    for name, sys in generator_systems(seed, p["N"]).items():
        a = rng.standard_normal(sys.N) + 1j * rng.standard_normal(sys.N)
        left = rng.uniform(-1, 1, sys.N)
        right = np.exp(2j * np.pi * rng.random(sys.N))
        c = contraction_check(sys, a, left, right, samples=S, seed=seed)
        rep.check(f"contraction {name}", c.lhs - c.rhs, 0.0, 3 * c.diff_se)
        x = a[:, None] * sys.values
        W = rng.standard_normal((sys.N, sys.N)) + 1j * rng.standard_normal((sys.N, sys.N))
        W *= 0.9 / np.linalg.norm(W, 2)
        g = gaussian_comparison_check(x, samples=max(S, 1000), seed=seed, a=W)
        rep.flag(f"real/complex sandwich {name}", g.sandwich_holds)
        rep.flag(f"rotation contraction {name}", g.contraction_holds)
    h = make_haar_unitary_system(3, 128, seed)
    xs = [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))]
    A = [rng.standard_normal((3, 3))]
    B = [rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))]
    for kind in ("haar-unitary", "gaussian-complex"):
        c = contraction_check(h, xs, A, B, randomizer=kind, samples=min(S, 1000), seed=seed)
        rep.check(f"matricial contraction {kind}", c.lhs - c.rhs, 0.0, 3 * c.diff_se)


def _domination_haar(p, seed, rep):
    S = p["samples"]
    for d in (4, p["dims"]):
        op = polar_domination_operator(d, S, seed)
        V, dh = polar_domination_apply(op, ginibre(d, S, seed + 7))
        first, second = haar_moment_deviation(V)
        rep.check(f"Haar first moment d={d}", first, 5 / math.sqrt(S))
        rep.check(f"Haar second moment d={d}", second, 5 / math.sqrt(S))
        rep.flag(f"commutant check d={d}", op.commutant_ok)
        again = polar_domination_operator(d, S, seed + 1000)
        se = math.hypot(op.std_error, again.std_error)
        rep.check(f"delta_hat d={d} reproducible", abs(op.delta_hat - again.delta_hat), 3 * se)
        rep.values[f"delta_hat_{d}"] = op.delta_hat
    rep.values["quarter_circle_limit"] = 8 / (3 * math.pi)
    lac = make_lacunary([2 ** k for k in range(6)], 256)
    a = np.ones(6)
    rng = np.random.default_rng(seed)
    g = draw_randomizers("gaussian-real", S // 4, 6, rng)
    e = draw_randomizers("sign", S // 4, 6, rng)
    rg = randomized_supnorm(lac, a, draws=g)
    re_ = randomized_supnorm(lac, a, draws=e)
    r = re_.mean / rg.mean
    se = r * math.hypot(re_.std_error / re_.mean, rg.std_error / rg.mean)
    rep.check("sign/gaussian ratio <= sqrt(pi/2)", r, math.sqrt(math.pi / 2), 3 * se)
    rep.check("sign/gaussian ratio >= 1/2", r, 0.5, 3 * se, relation=">=")
    rep.values["sign_gaussian_ratio"] = r


PRESETS = {
    "subg-tensor2": (_subg_tensor2, {"N": 6, "restarts": 4, "samples": 2000}),
    "decomp": (_decomp, {"dims": 4, "degree": 5, "samples": 1000, "delta": 0.3, "vec_dim": 64, "mc_tol": 0.05}),
    "mela-sweep": (_mela_sweep, {"levels": 8}),
    "talagrand": (_talagrand, {"N": 6, "restarts": 2, "dims": 8, "families": 10, "samples": 1000}),
    "rs-equiv": (_rs_equiv, {"N": 3, "samples": 2000}),
    "chevet": (_chevet, {"N": 6, "samples": 500}),
    "matricial-60": (_matricial_60, {"dims": 8, "samples": 64, "trials": 100}),
    "signmatrix": (_signmatrix, {"ns": (8, 16), "chi": 2.5, "ensemble": 128, "x_count": 1000, "oracle_x": 20}),
    "character": (_character, {"dims": 8, "samples": 100_000, "grid": 2000, "mc": 200}),
    "sub2": (_sub2, {"K": 1 << 14, "reps": 200}),
    "contraction": (_contraction, {"N": 6, "samples": 2000}),
    "domination-haar": (_domination_haar, {"dims": 8, "samples": 10_000}),
}


def run_preset(cfg):
    params = cfg.resolved()
    rep = Report(config={"name": cfg.name, "seed": cfg.seed, **params},
                 versions={"sidonlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__})
    t0 = time.perf_counter()
    PRESETS[cfg.name][0](params, cfg.seed, rep)
    rep.timing = time.perf_counter() - t0
    return rep


CSV_HEADER = ["name", "lhs", "rhs", "tolerance", "pass", "note"]


def emit_report(rep, path, fmt="json", include_timing=False):
    """Deterministic serialization; wall-clock timing only on request."""
    path = Path(path)
    if fmt == "json":
        text = json.dumps(rep.to_dict(include_timing), sort_keys=True, indent=2) + "\n"
        path.write_text(text)
    elif fmt == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for c in rep.checks:
                w.writerow([c.name, repr(c.lhs), repr(c.rhs), repr(c.tolerance), int(c.passed), c.note])
    else:
        raise ConfigError(f"unknown format {fmt!r}")
    return path


def load_report(path):
    d = json.loads(Path(path).read_text())
    checks = [Check(**c) for c in d.get("checks", [])]
    return Report(d.get("config", {}), checks, d.get("values", {}), d.get("witnesses", {}),
                  d.get("timing", 0.0), d.get("versions", {}))
