"""Problem data model: sparse symmetric matrices, operators, JSON i/o."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from adalsdp.core import (ConstraintSense, GeneralSdp, LinearConstraint,
                          Sense, SparseSymMat, apply_A, apply_At,
                          check_symmetric, fro_norm, gram, inner,
                          instance_from_dict, instance_to_dict, read_instance,
                          triu_index_of, with_added_inequalities,
                          write_instance)
from conftest import random_instance


def _rand_sym(rng, n):
    a = rng.normal(size=(n, n))
    return 0.5 * (a + a.T)


# --------------------------------------------------------------------------
# SparseSymMat

def test_triu_index_matches_numpy_order():
    for n in (1, 2, 5, 9):
        iu, ju = np.triu_indices(n)
        got = triu_index_of(n, iu, ju)
        assert np.array_equal(got, np.arange(iu.size))


def test_from_triplets_canonicalizes_lower_entries():
    m = SparseSymMat.from_triplets(3, [(2, 0, 1.5), (1, 1, -2.0)])
    d = m.dense()
    assert d[0, 2] == d[2, 0] == 1.5
    assert d[1, 1] == -2.0
    assert np.all(m.i <= m.j)


def test_sparse_sym_validation_errors():
    with pytest.raises(ValueError, match="duplicate"):
        SparseSymMat.from_triplets(3, [(0, 1, 1.0), (1, 0, 2.0)])
    with pytest.raises(ValueError, match="out of range"):
        SparseSymMat(2, [0], [2], [1.0])
    with pytest.raises(ValueError, match="upper triangle"):
        SparseSymMat(3, [2], [1], [1.0])
    with pytest.raises(ValueError, match="finite"):
        SparseSymMat(2, [0], [1], [np.inf])
    with pytest.raises(ValueError, match="equal length"):
        SparseSymMat(2, [0, 1], [1], [1.0])


def test_dense_round_trip_and_norm():
    rng = np.random.default_rng(3)
    for n in (1, 2, 6):
        x = _rand_sym(rng, n)
        m = SparseSymMat.from_dense(x)
        assert np.allclose(m.dense(), x)
        assert m.norm() == pytest.approx(np.linalg.norm(x, "fro"), rel=1e-12)


def test_inner_product_counts_off_diagonal_twice():
    # <A, X> = trace(A X) for the symmetric extension of the triplets
    a = SparseSymMat.from_triplets(3, [(0, 1, 2.0), (2, 2, 1.0)])
    x = np.arange(9, dtype=float).reshape(3, 3)
    x = 0.5 * (x + x.T)
    assert a.inner(x) == pytest.approx(np.sum(a.dense() * x), rel=1e-14)
    with pytest.raises(ValueError, match="dimension mismatch"):
        a.inner(np.eye(4))


def test_inner_and_fro_norm_dispatch_on_dense():
    rng = np.random.default_rng(5)
    a, x = _rand_sym(rng, 4), _rand_sym(rng, 4)
    assert inner(a, x) == pytest.approx(np.sum(a * x), rel=1e-14)
    assert fro_norm(a) == pytest.approx(np.linalg.norm(a, "fro"), rel=1e-14)


def test_check_symmetric_rejects_bad_input():
    with pytest.raises(ValueError, match="square"):
        check_symmetric(np.zeros((2, 3)))
    bad = np.array([[0.0, 1.0], [0.5, 0.0]])
    with pytest.raises(ValueError, match="not symmetric"):
        check_symmetric(bad)


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=1, max_value=8), st.integers(min_value=0, max_value=2**31))
def test_triplet_dense_round_trip_property(n, seed):
    rng = np.random.default_rng(seed)
    x = _rand_sym(rng, n)
    assert np.allclose(SparseSymMat.from_dense(x).dense(), x, atol=1e-14)


# --------------------------------------------------------------------------
# GeneralSdp construction

def test_max_sense_negates_objective_and_reported_value_round_trips():
    obj = SparseSymMat.from_triplets(2, [(0, 0, 3.0), (0, 1, 1.0)])
    sdp = GeneralSdp.make(2, obj, [], sense=Sense.MAX, offset=0.5)
    assert np.allclose(sdp.c.dense(), -obj.dense())
    x = np.array([[1.0, 0.2], [0.2, 2.0]])
    internal = float(np.sum(sdp.c.dense() * x))
    # user value = <objective, X> + offset
    assert sdp.reported_value(internal) == pytest.approx(
        np.sum(obj.dense() * x) + 0.5, rel=1e-12)


def test_min_sense_keeps_objective():
    obj = SparseSymMat.from_triplets(2, [(0, 0, 3.0)])
    sdp = GeneralSdp.make(2, obj, [], sense=Sense.MIN, offset=-1.0)
    assert np.allclose(sdp.c.dense(), obj.dense())
    assert sdp.reported_value(4.0) == pytest.approx(3.0)


def test_constraint_ordering_invariant_enforced():
    eq = LinearConstraint(SparseSymMat.from_triplets(2, [(0, 0, 1.0)]),
                          1.0, ConstraintSense.EQ)
    le = LinearConstraint(SparseSymMat.from_triplets(2, [(1, 1, 1.0)]),
                          1.0, ConstraintSense.LE)
    with pytest.raises(ValueError, match="inequalities first"):
        GeneralSdp.make(2, SparseSymMat.from_triplets(2, []), [eq, le])
    sdp = GeneralSdp.make(2, SparseSymMat.from_triplets(2, []), [le, eq])
    assert (sdp.l, sdp.m) == (1, 2)
    assert np.allclose(sdp.b, [1.0, 1.0])


def test_nonneg_mask_canonicalized():
    obj = SparseSymMat.from_triplets(3, [])
    sdp = GeneralSdp.make(3, obj, [], nonneg_mask=[(2, 1), (1, 2), (0, 0)])
    assert sdp.nonneg_mask == ((0, 0), (1, 2))
    with pytest.raises(ValueError, match="out of range"):
        GeneralSdp.make(3, obj, [], nonneg_mask=[(0, 3)])


def test_constraint_rhs_must_be_finite():
    with pytest.raises(ValueError, match="finite"):
        LinearConstraint(SparseSymMat.from_triplets(1, [(0, 0, 1.0)]),
                         np.nan, ConstraintSense.EQ)


def test_dimension_mismatch_rejected():
    obj = SparseSymMat.from_triplets(3, [])
    con = LinearConstraint(SparseSymMat.from_triplets(2, [(0, 0, 1.0)]),
                           1.0, ConstraintSense.EQ)
    with pytest.raises(ValueError, match="dimension"):
        GeneralSdp.make(3, obj, [con])


# --------------------------------------------------------------------------
# operators

def test_apply_A_matches_per_constraint_inner_products():
    rng = np.random.default_rng(11)
    sdp = random_instance(rng, n=5, m=7, l=3)
    x = _rand_sym(rng, 5)
    expected = np.array([con.matrix.inner(x) for con in sdp.constraints])
    assert np.allclose(apply_A(sdp, x), expected, atol=1e-12)


def test_apply_At_matches_weighted_sum():
    rng = np.random.default_rng(12)
    sdp = random_instance(rng, n=4, m=6, l=2)
    y = rng.normal(size=6)
    expected = sum(coef * con.matrix.dense()
                   for coef, con in zip(y, sdp.constraints))
    assert np.allclose(apply_At(sdp, y), expected, atol=1e-12)


def test_adjoint_identity():
    rng = np.random.default_rng(13)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, 9))
        sdp = random_instance(rng, n=n, m=m, l=int(rng.integers(0, m + 1)))
        x = _rand_sym(rng, n)
        y = rng.normal(size=m)
        lhs = float(np.dot(apply_A(sdp, x), y))
        rhs = float(np.sum(apply_At(sdp, y) * x))
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)


def test_gram_matches_pairwise_inner_products():
    rng = np.random.default_rng(14)
    sdp = random_instance(rng, n=4, m=5, l=2)
    g = gram(sdp).toarray()
    mats = [con.matrix.dense() for con in sdp.constraints]
    expected = np.array([[np.sum(a * b) for b in mats] for a in mats])
    assert np.allclose(g, expected, atol=1e-12)


def test_operator_shape_validation():
    rng = np.random.default_rng(15)
    sdp = random_instance(rng, n=3, m=2, l=1)
    with pytest.raises(ValueError):
        apply_A(sdp, np.eye(4))
    with pytest.raises(ValueError, match="multipliers"):
        apply_At(sdp, np.zeros(5))


# --------------------------------------------------------------------------
# cut insertion

def test_with_added_inequalities_preserves_ordering():
    rng = np.random.default_rng(16)
    sdp = random_instance(rng, n=4, m=5, l=2)
    cut = LinearConstraint(SparseSymMat.from_triplets(4, [(0, 1, 0.5)]),
                           0.0, ConstraintSense.LE)
    bigger = with_added_inequalities(sdp, [cut])
    assert bigger.l == 3 and bigger.m == 6
    senses = [c.sense for c in bigger.constraints]
    assert senses == [ConstraintSense.LE] * 3 + [ConstraintSense.EQ] * 3
    # original inequalities keep their lead positions, cut sits after them
    assert bigger.constraints[0] is sdp.constraints[0]
    assert bigger.constraints[2] is cut
    with pytest.raises(ValueError, match="LE"):
        with_added_inequalities(sdp, [LinearConstraint(
            cut.matrix, 0.0, ConstraintSense.EQ)])


# --------------------------------------------------------------------------
# JSON round trip

def _assert_same_instance(a: GeneralSdp, b: GeneralSdp):
    assert a.n == b.n
    assert a.user_sense == b.user_sense
    assert a.objective_offset == b.objective_offset
    assert np.allclose(a.c.dense(), b.c.dense(), atol=0)
    assert a.m == b.m and a.l == b.l
    for ca, cb in zip(a.constraints, b.constraints):
        assert ca.sense == cb.sense and ca.rhs == cb.rhs
        assert np.allclose(ca.matrix.dense(), cb.matrix.dense(), atol=0)
    assert a.nonneg_mask == b.nonneg_mask


def test_json_dict_round_trip_max_sense_and_mask():
    rng = np.random.default_rng(17)
    base = random_instance(rng, n=4, m=5, l=2)
    sdp = GeneralSdp.make(4, SparseSymMat.from_dense(_rand_sym(rng, 4)),
                          base.constraints, sense=Sense.MAX, offset=2.5,
                          nonneg_mask=[(0, 1), (2, 2)])
    d = instance_to_dict(sdp)
    # indices are 1-based on disk
    assert all(i >= 1 and j >= 1 for i, j, _ in d["objective"]["triplets"])
    assert d["sense"] == "max"
    back = instance_from_dict(json.loads(json.dumps(d)))
    _assert_same_instance(sdp, back)


def test_instance_file_round_trip(tmp_path):
    rng = np.random.default_rng(18)
    sdp = random_instance(rng, n=3, m=4, l=2)
    path = tmp_path / "inst.json"
    write_instance(sdp, str(path))
    back = read_instance(str(path))
    _assert_same_instance(sdp, back)


def test_instance_from_dict_defaults():
    d = {"n": 1, "objective": {"triplets": [[1, 1, 2.0]]},
         "constraints": [{"triplets": [[1, 1, 1.0]], "rhs": 1.0, "sense": "EQ"}]}
    sdp = instance_from_dict(d)
    assert sdp.user_sense == Sense.MIN
    assert sdp.objective_offset == 0.0
    assert sdp.nonneg_mask is None
