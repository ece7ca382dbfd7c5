import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import brentq

from sidonlab.generators import make_rademacher, make_walsh
from sidonlab.orlicz import psi2_norm, psi2_norm_batch, psi2_norm_lp, subgaussian_constant
from sidonlab.spaces import FunctionSystem, ProbabilitySpace

TWO_POINT = 2 / math.sqrt(math.log(2 * math.e - 1))


def uniform(M):
    return np.full(M, 1.0 / M)


def test_constant():
    assert psi2_norm(np.full(5, 3.0), uniform(5)).norm == pytest.approx(3.0, abs=1e-10)


def test_zero():
    assert psi2_norm(np.zeros(4), uniform(4)).norm == 0.0


def test_two_point_closed_form():
    r = psi2_norm(np.array([2.0, 0.0]), uniform(2))
    assert r.norm == pytest.approx(TWO_POINT, abs=1e-9)
    # independent root find of the defining equation
    root = brentq(lambda t: 0.5 * math.exp((2 / t) ** 2) + 0.5 - math.e, 0.5, 10, xtol=1e-14)
    assert r.norm == pytest.approx(root, abs=1e-9)
    assert TWO_POINT == pytest.approx(1.6385, abs=1e-4)


def test_complex_values_use_modulus():
    z = np.exp(1j * np.linspace(0, 6, 9)) * 2
    assert psi2_norm(z, uniform(9)).norm == pytest.approx(psi2_norm(np.full(9, 2.0), uniform(9)).norm, abs=1e-10)


def test_batch_matches_single():
    rng = np.random.default_rng(0)
    F = rng.standard_normal((6, 50))
    w = uniform(50)
    batch, _ = psi2_norm_batch(F, w)
    assert np.allclose(batch, [psi2_norm(f, w).norm for f in F], atol=1e-12)


def test_norm_axioms_on_random_pairs():
    rng = np.random.default_rng(1)
    for _ in range(100):
        M = int(rng.integers(2, 40))
        w = rng.dirichlet(np.ones(M))
        f = rng.standard_normal(M) * rng.uniform(0.1, 3)
        g = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        c = complex(rng.standard_normal(), rng.standard_normal())
        nf, ng = psi2_norm(f, w).norm, psi2_norm(g, w).norm
        assert psi2_norm(f + g, w).norm <= nf + ng + 1e-10
        assert psi2_norm(c * f, w).norm == pytest.approx(abs(c) * nf, abs=1e-10)
        assert nf > 0


def test_lp_form_constant():
    assert psi2_norm_lp(np.ones(3), uniform(3)).norm == pytest.approx(2 ** -0.5, abs=1e-12)
    assert psi2_norm_lp(np.zeros(3), uniform(3)).norm == 0.0


def test_lp_form_equivalent_on_gaussian_sample():
    # for N(0,1) the sup over p >= 2 sits at p = 2, so the exact ratio is
    # (1/sqrt 2) / sqrt(2/(1 - e^-2)) = 0.4628
    z = np.random.default_rng(2).standard_normal(100_000)
    w = uniform(z.size)
    ratio = psi2_norm_lp(z, w).norm / psi2_norm(z, w).norm
    exact = math.sqrt(1 - math.exp(-2)) / 2
    assert ratio == pytest.approx(exact, rel=0.05)
    assert 0.25 <= ratio <= 2.0


def test_subgaussian_constant_of_constant_system():
    one = FunctionSystem(ProbabilitySpace.uniform(3), np.ones(3))
    assert subgaussian_constant(one, restarts=2, rng=0).constant_C == pytest.approx(1.0, abs=1e-9)


def test_subgaussian_two_rademacher():
    sys = make_walsh(2, [(1,), (2,)])
    target = math.sqrt(2 / math.log(2 * math.e - 1))
    combo = (sys.values[0] + sys.values[1]) / math.sqrt(2)
    assert psi2_norm(combo, sys.space.weights).norm == pytest.approx(target, abs=1e-9)
    rep = subgaussian_constant(sys, restarts=4, rng=0)
    assert rep.constant_C >= target - 1e-9
    # dense direction grid oracle for N = 2 (real directions)
    th = np.linspace(0, np.pi, 2001)
    grid = max(psi2_norm(np.cos(t) * sys.values[0] + np.sin(t) * sys.values[1], sys.space.weights).norm
               for t in th)
    assert rep.constant_C >= grid - 1e-6


def test_subgaussian_homogeneity():
    sys = make_rademacher(3)
    lam = 2.5
    a = subgaussian_constant(sys, restarts=3, rng=4).constant_C
    b = subgaussian_constant(sys.scaled(lam), restarts=3, rng=4).constant_C
    assert b == pytest.approx(lam * a, rel=1e-6)


def test_zero_restarts_rejected():
    with pytest.raises(ValueError):
        subgaussian_constant(make_rademacher(2), restarts=0)


@given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=30),
       st.floats(0.01, 100))
def test_homogeneity_property(vals, lam):
    f = np.array(vals)
    w = uniform(f.size)
    assert psi2_norm(lam * f, w).norm == pytest.approx(lam * psi2_norm(f, w).norm, rel=1e-9, abs=1e-300)


@given(st.lists(st.floats(-20, 20, allow_nan=False), min_size=1, max_size=30))
def test_sup_norm_sandwich(vals):
    # ||f||_inf / sqrt(1 + ln(1/w_min)) <= ||f||_psi2 <= ||f||_inf
    f = np.array(vals)
    w = uniform(f.size)
    n = psi2_norm(f, w).norm
    sup = np.abs(f).max()
    assert n <= sup + 1e-12
    assert n >= sup / math.sqrt(1 + math.log(f.size)) - 1e-12
