import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sidonlab.chaos import (
    ChaosElement, basis_values, chaos_basis, chaos_project, gaussian_comparison_check, gaussian_sample,
    mehler_apply, mela_damping_apply, mela_lp, mela_multipliers, mela_sweep, operator_norms_t_delta,
    t_delta_apply, MelaMeasure)


def deg_term(n_vars, D, alpha, c=1.0):
    return ChaosElement.from_terms(n_vars, D, {tuple(alpha): c})


def test_gaussian_sample_covariance_and_complex_convention():
    g = gaussian_sample(3, 20000, seed=1)
    assert g.covariance_ok()
    gc = gaussian_sample(2, 20000, seed=1, is_complex=True)
    v = gc.values()
    assert v.shape == (20000, 2)
    assert np.mean(np.abs(v) ** 2) == pytest.approx(1.0, abs=0.05)


def test_basis_orthonormal_under_quadrature():
    x, w = np.polynomial.hermite_e.hermegauss(30)
    w = w / w.sum()
    pts = np.stack(np.meshgrid(x, x, indexing="ij"), -1).reshape(-1, 2)
    ww = np.outer(w, w).ravel()
    E = basis_values(pts, 2, 4)
    G = (E * ww) @ E.T
    assert np.allclose(G, np.eye(E.shape[0]), atol=1e-10)


def test_parseval_and_mean():
    rng = np.random.default_rng(0)
    K = chaos_basis(2, 3)[0].shape[0]
    f = ChaosElement(2, 3, rng.standard_normal(K))
    x, w = np.polynomial.hermite_e.hermegauss(20)
    w = w / w.sum()
    pts = np.stack(np.meshgrid(x, x, indexing="ij"), -1).reshape(-1, 2)
    vals = f.evaluate(pts)
    ww = np.outer(w, w).ravel()
    assert math.sqrt(ww @ np.abs(vals) ** 2) == pytest.approx(f.l2_norm(), abs=1e-10)
    assert ww @ vals == pytest.approx(f.mean, abs=1e-10)


def test_mehler_examples():
    g1 = ChaosElement.gaussian(0, 2, 4)
    assert mehler_apply(g1, 0.37).allclose(g1 * 0.37, atol=1e-15)
    h3 = deg_term(2, 4, (2, 1))
    assert mehler_apply(h3, 0.5).coefficients[np.flatnonzero(h3.coefficients)[0]] == pytest.approx(0.125)
    c = deg_term(2, 4, (0, 0), 5.0)
    assert mehler_apply(c, 0.2).allclose(c)
    with pytest.raises(ValueError):
        mehler_apply(g1, 0.0)


@given(st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_mehler_semigroup_law(a, b):
    rng = np.random.default_rng(int(a * 1e6))
    K = chaos_basis(3, 4)[0].shape[0]
    f = ChaosElement(3, 4, rng.standard_normal(K) + 1j * rng.standard_normal(K))
    lhs = mehler_apply(mehler_apply(f, a), b).coefficients
    rhs = mehler_apply(f, a * b).coefficients
    assert np.allclose(lhs, rhs, rtol=1e-13, atol=1e-15)


def test_t_delta_examples():
    g = ChaosElement.gaussian(1, 3, 5)
    assert np.array_equal(t_delta_apply(g, 0.3).coefficients, g.coefficients)
    h2 = deg_term(3, 5, (1, 1, 0), 2.0)
    out = t_delta_apply(h2, 0.3)
    via_mehler = mehler_apply(h2, 0.3) * (1 / 0.3)
    assert out.allclose(via_mehler, atol=1e-14)
    assert out.coefficients[np.flatnonzero(h2.coefficients)[0]] == pytest.approx(0.6)
    assert np.all(t_delta_apply(deg_term(3, 5, (0, 0, 0), 4.0), 0.3).coefficients == 0)
    for bad in (0.0, 1.0):
        with pytest.raises(ValueError):
            t_delta_apply(g, bad)


def test_t_delta_complex_keeps_g_kills_conjugate():
    g = ChaosElement.complex_gaussian(0, 2, 3)
    assert t_delta_apply(g, 0.4).allclose(g, atol=1e-15)
    conj = g.with_coefficients(np.conj(g.coefficients))
    assert np.abs(t_delta_apply(conj, 0.4).coefficients).max() < 1e-15


def test_projections():
    g2 = ChaosElement.gaussian(1, 2, 3)
    assert chaos_project(g2, 1).allclose(g2)
    h = deg_term(2, 3, (2, 0))
    assert np.all(chaos_project(h, 1).coefficients == 0)
    c = deg_term(2, 3, (0, 0), 5.0)
    assert chaos_project(c, 0).mean == 5.0


def test_operator_norms():
    r = operator_norms_t_delta(2, 5, 0.3, samples=2000, trials=8)
    assert r.l2_tail_norm == 0.3
    assert r.l1_norm_bound <= 2 / 0.3
    assert operator_norms_t_delta(2, 4, 0.999, samples=1000, trials=2).l2_tail_norm == pytest.approx(0.999)


@pytest.mark.parametrize("D", [2, 3, 6])
def test_tail_norm_equals_delta_for_all_degrees(D):
    for delta in (0.1, 0.5, 0.9):
        assert operator_norms_t_delta(1, D, delta, samples=1000, trials=1).l2_tail_norm == delta


def test_mela_point_mass_at_delta_one():
    mu = mela_lp(1.0)
    assert mu.total_variation == pytest.approx(1.0, abs=1e-9)
    assert mu.weights[-1] == pytest.approx(1.0, abs=1e-9)


def test_mela_constraints_reverified_independently():
    for d in (0.5, 0.1, 2 ** -8):
        mu = mela_lp(d)
        s, w = mu.grid, mu.weights
        assert abs(np.sum(w * s) - 1) <= 1e-9
        for n in range(3, 22, 2):
            assert abs(np.sum(w * s ** n)) <= d + 1e-9
        assert mu.total_variation == pytest.approx(np.abs(w).sum())


def test_mela_monotone_and_slope():
    assert mela_lp(0.5).total_variation <= mela_lp(0.25).total_variation + 1e-12
    tv, slope = mela_sweep(2.0 ** -np.arange(1, 9))
    assert slope > 0
    assert np.all(np.diff(tv) >= -1e-9)


def test_mela_round_trip():
    mu = mela_lp(0.2)
    back = MelaMeasure.from_dict(mu.to_dict())
    assert np.array_equal(back.weights, mu.weights) and back.delta == mu.delta


def test_mela_damping():
    mu = mela_lp(0.1)
    g = ChaosElement.gaussian(0, 2, 5)
    assert mela_damping_apply(g, mu).allclose(g, atol=1e-9)
    assert np.all(mela_damping_apply(deg_term(2, 5, (1, 1)), mu).coefficients == 0)
    lam = mela_multipliers(mu, 5)
    assert abs(lam[3]) <= 0.1 + 1e-9 and abs(lam[5]) <= 0.1 + 1e-9


def test_l1_norm_methods():
    g = ChaosElement.gaussian(0, 2, 3)
    val, method = g.l1_norm()
    assert method == "gauss-hermite"
    assert val == pytest.approx(math.sqrt(2 / math.pi), abs=2e-3)
    for n_vars in (1, 3):
        v, _ = ChaosElement.gaussian(0, n_vars, 1).l1_norm()
        assert math.isfinite(v) and v == pytest.approx(math.sqrt(2 / math.pi), abs=6e-3)
    assert ChaosElement.gaussian(0, 5, 1).l1_norm(samples=20000)[1] == "monte-carlo"


def test_comparison_unit_vector_and_rotation():
    r = gaussian_comparison_check(np.array([[1.0]]), samples=40000, seed=0)
    assert r.complex_mean == pytest.approx(math.sqrt(math.pi) / 2, abs=3 * r.complex_se)
    x = np.random.default_rng(1).standard_normal((4, 6))
    eye = gaussian_comparison_check(x, samples=2000, seed=2, a=np.eye(4))
    assert eye.contraction_lhs == pytest.approx(eye.contraction_rhs, abs=1e-12)
    q, _ = np.linalg.qr(np.random.default_rng(3).standard_normal((4, 4)) + 0j)
    rot = gaussian_comparison_check(x, samples=4000, seed=2, a=q)
    assert abs(rot.contraction_lhs - rot.contraction_rhs) <= 4 * (rot.complex_se * math.sqrt(2)) + 1e-12
    assert rot.sandwich_holds
    with pytest.raises(ValueError):
        gaussian_comparison_check(x, samples=10)
