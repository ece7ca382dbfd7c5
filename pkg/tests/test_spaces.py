import numpy as np
import pytest
from hypothesis import given, strategies as st

from sidonlab.generators import all_walsh, make_lacunary, make_rademacher
from sidonlab.spaces import (
    FunctionSystem, IncompatibleSystems, LazyProduct, MatricialSystem, ProbabilitySpace, ProductTooLarge,
    biorthogonality_gram, dump_system, inner_product, load_system, tensor_product_system)


def test_inner_product_constant_is_one():
    one = FunctionSystem(ProbabilitySpace.uniform(7), np.ones(7))
    assert inner_product(one, one) == pytest.approx(1.0, abs=1e-15)


def test_distinct_walsh_characters_orthogonal():
    w = all_walsh(3)
    assert inner_product((w, 1), (w, 6)) == 0


def test_discrete_fourier_orthogonality():
    lac = make_lacunary([1, 2], 256)
    assert abs(inner_product((lac, 0), (lac, 1))) < 1e-12


def test_mismatched_spaces_rejected():
    a = FunctionSystem(ProbabilitySpace.uniform(4), np.ones(4))
    b = FunctionSystem(ProbabilitySpace.uniform(5), np.ones(5))
    with pytest.raises(IncompatibleSystems):
        inner_product(a, b)


def test_gram_identity_for_orthonormal():
    rep = biorthogonality_gram(all_walsh(4), all_walsh(4))
    assert rep.deviation < 1e-14 and not rep.singular


def test_gram_duplicated_row_is_singular():
    sys = FunctionSystem(ProbabilitySpace.uniform(3), np.ones((2, 3)))
    rep = biorthogonality_gram(sys, sys)
    assert rep.deviation == pytest.approx(1.0) and rep.singular


def test_gram_perturbed_bound_dominates_inverse():
    rng = np.random.default_rng(3)
    base = make_rademacher(5)
    noisy = FunctionSystem(base.space, base.values + 0.05 * rng.standard_normal(base.values.shape))
    rep = biorthogonality_gram(noisy, noisy)
    direct = np.linalg.norm(np.linalg.inv(rep.gram), 2)
    assert rep.deviation < 1
    assert rep.inverse_norm == pytest.approx(direct, rel=1e-10)
    assert rep.inverse_norm_bound >= direct - 1e-12


def test_tensor_of_constants():
    one = FunctionSystem(ProbabilitySpace.uniform(3), np.ones(3))
    t = tensor_product_system(one, one)
    assert t.M == 9 and np.all(t.values == 1)


def test_tensor_of_characters_is_character_on_torus():
    e = make_lacunary([1], 8)
    t = tensor_product_system(e, e)
    th = 2 * np.pi * np.arange(8) / 8
    expected = np.exp(1j * (th[:, None] + th[None, :])).ravel()
    assert np.allclose(t.values[0], expected, atol=1e-15)


def test_tensor_index_arithmetic():
    rng = np.random.default_rng(0)
    s1 = FunctionSystem(ProbabilitySpace.uniform(4), rng.choice([-1.0, 1.0], (3, 4)))
    s2 = FunctionSystem(ProbabilitySpace.uniform(4), rng.choice([-1.0, 1.0], (3, 4)))
    t = tensor_product_system(s1, s2)
    for n in range(3):
        for i in range(4):
            for j in range(4):
                assert t.values[n, i * 4 + j] == s1.values[n, i] * s2.values[n, j]


def test_tensor_cap():
    s = make_rademacher(3)
    with pytest.raises(ProductTooLarge):
        tensor_product_system(s, s, cap=10)


def test_lazy_product_matches_materialized():
    s = make_rademacher(3)
    lazy = LazyProduct((s, s, s))
    full = lazy.materialize()
    a = np.array([1.0, 1j, -0.5])
    val, idx = lazy.sup(a)
    assert val == pytest.approx(np.abs(a @ full.values).max(), abs=1e-12)
    assert abs(lazy.value_at(a, idx)) == pytest.approx(val, abs=1e-12)
    i, j, k = idx
    assert lazy.value_at(a, idx) == pytest.approx((a @ full.values)[(i * 8 + j) * 8 + k], abs=1e-12)


def test_serialization_round_trip(tmp_path):
    s = make_lacunary([1, 3], 16)
    dump_system(s, tmp_path / "s.json")
    back = load_system(tmp_path / "s.json")
    assert np.array_equal(back.values, s.values) and back.space == s.space
    U = np.stack([np.eye(2)] * 3, axis=2).astype(complex)
    m = MatricialSystem(ProbabilitySpace.uniform(3), (U,))
    dump_system(m, tmp_path / "m.json")
    assert np.array_equal(load_system(tmp_path / "m.json").blocks[0], U)


def test_weights_must_be_probability():
    with pytest.raises(ValueError):
        ProbabilitySpace(np.array([0.5, 0.6]))


@given(st.lists(st.floats(0.01, 10), min_size=1, max_size=12))
def test_inner_product_is_hermitian_and_positive(ws):
    w = np.array(ws) / sum(ws)
    rng = np.random.default_rng(len(ws))
    sp = ProbabilitySpace(w)
    v = rng.standard_normal((2, w.size)) + 1j * rng.standard_normal((2, w.size))
    sys = FunctionSystem(sp, v)
    ab = inner_product((sys, 0), (sys, 1))
    ba = inner_product((sys, 1), (sys, 0))
    assert ab == pytest.approx(np.conj(ba), abs=1e-12)
    assert inner_product((sys, 0), (sys, 0)).real >= 0
