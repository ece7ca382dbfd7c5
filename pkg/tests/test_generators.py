import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sidonlab.generators import (
    RejectionTooHigh, all_sign_matrices, all_walsh, character_samples, ginibre, haar_moment_deviation,
    haar_unitaries, lacunary_ratio, make_haar_unitary_system, make_lacunary, make_rademacher, make_sign_ensemble,
    make_walsh, polar_domination_apply, polar_domination_operator)
from sidonlab.orlicz import psi2_norm
from sidonlab.spaces import biorthogonality_gram


def test_lacunary():
    assert np.all(make_lacunary([0], 8).values == 1)
    g = biorthogonality_gram(make_lacunary([1, 2, 4, 8], 64), make_lacunary([1, 2, 4, 8], 64))
    assert g.deviation < 1e-14
    with pytest.raises(ValueError):
        make_lacunary([1, 8], 16)
    with pytest.raises(ValueError):
        make_lacunary([2, 1], 16)
    assert lacunary_ratio([1, 2, 4, 8]) == 2.0


def test_walsh():
    r = make_rademacher(3)
    assert r.N == 3 and np.all(np.abs(r.values) == 1)
    assert biorthogonality_gram(all_walsh(4), all_walsh(4)).deviation == 0
    assert np.array_equal(make_walsh(3, [(1, 2)]).values[0], r.values[0] * r.values[1])
    with pytest.raises(ValueError):
        make_walsh(2, [(3,)])


def test_haar_d1_uniform_phases():
    h = make_haar_unitary_system(1, 20000, seed=0)
    v = h.blocks[0][0, 0]
    assert np.allclose(np.abs(v), 1)
    assert np.mean(np.abs(v) ** 2) == pytest.approx(1.0)
    assert abs(np.mean(v)) < 5 / math.sqrt(20000)


def test_haar_entry_gram():
    S = 10_000
    h = make_haar_unitary_system(4, S, seed=1)
    G = biorthogonality_gram(h, h).gram
    assert np.abs(G - np.eye(16)).max() <= 5 / math.sqrt(S)
    ops = np.linalg.norm(h.matrices(0), 2, axis=(1, 2))
    assert np.allclose(ops, 1, atol=1e-12)


def test_haar_unitarity():
    U = haar_unitaries(5, 50, 0)
    assert np.allclose(np.einsum("sji,sjk->sik", U.conj(), U), np.eye(5), atol=1e-12)


def test_sign_ensembles():
    e = make_sign_ensemble(2, math.sqrt(2), 16, seed=0)
    assert e.rejection_rate == 0 and e.valid()
    assert all_sign_matrices(2).shape == (16, 2, 2)
    e8 = make_sign_ensemble(8, 2.5, 8, seed=0)
    assert np.linalg.norm(e8.members[0], 2) == pytest.approx(1.0)
    assert np.allclose(e8.members[0] @ e8.members[0].T, np.eye(8))
    for seed in range(3):
        assert make_sign_ensemble(16, 2.5, 64, seed=seed).rejection_rate < 0.5
    with pytest.raises(RejectionTooHigh):
        make_sign_ensemble(16, 1.0, 4, seed=0, max_draws=2000)


def test_polar_domination():
    op1 = polar_domination_operator(1, 20000, 0)
    assert abs(op1.delta_hat - math.sqrt(math.pi) / 2) <= 3 * op1.std_error + 1e-3
    g = ginibre(1, 5, 1)
    v, _ = polar_domination_apply(op1, g)
    assert np.allclose(v[:, 0, 0], g[:, 0, 0] / np.abs(g[:, 0, 0]))
    U = haar_unitaries(3, 4, 2)
    v, _ = polar_domination_apply(polar_domination_operator(3, 1000, 0), U)
    assert np.allclose(v, U, atol=1e-12)
    op8 = polar_domination_operator(8, 10_000, 0)
    assert op8.commutant_ok
    assert abs(op8.delta_hat - 8 / (3 * math.pi)) < 0.01
    with pytest.raises(ValueError):
        polar_domination_apply(op8, ginibre(3, 2, 0))


def test_polar_parts_are_haar():
    S = 10_000
    op = polar_domination_operator(4, S, 0)
    V, _ = polar_domination_apply(op, ginibre(4, S, 3))
    first, second = haar_moment_deviation(V)
    assert first <= 5 / math.sqrt(S) and second <= 5 / math.sqrt(S)


def test_polar_singular_sample():
    op = polar_domination_operator(2, 1000, 0)
    v, _ = polar_domination_apply(op, np.array([[1.0, 0], [0, 0]]))
    assert np.allclose(v[0].conj().T @ v[0], np.eye(2))


def test_characters():
    one = character_samples(1, 1000, 0)
    assert np.allclose(np.abs(one.values), 1)
    assert psi2_norm(one.values[0], one.space.weights).norm == pytest.approx(1.0, abs=1e-10)
    chi = character_samples(8, 100_000, 0).values[0]
    m2 = np.abs(chi) ** 2
    assert abs(m2.mean() - 1) <= 3 * m2.std() / math.sqrt(m2.size)
    with pytest.raises(ValueError):
        character_samples(2, 10)


@given(st.integers(1, 6), st.integers(0, 1000))
def test_haar_samples_unitary_property(d, seed):
    U = haar_unitaries(d, 3, seed)
    assert np.allclose(U @ np.swapaxes(U.conj(), 1, 2), np.eye(d), atol=1e-12)
