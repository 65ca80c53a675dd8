"""Tests for the random instance generator with planted optima."""

import dataclasses
import hashlib
import json

import numpy as np
import pytest

import adalsdp.randgen as randgen_mod
from adalsdp.core import ConstraintSense, Sense, apply_A
from adalsdp.randgen import (
    GenSpec,
    RandomInstance,
    RankDeficient,
    generate,
    sidecar_dict,
    witness_hashes,
    write_sidecar,
)
from adalsdp.solver import FactorizationFailed, SolverConfig, residuals, solve


# --------------------------------------------------------------------------
# GenSpec validation

@pytest.mark.parametrize("kwargs, match", [
    (dict(n=1, m=1, p=0.5), "n must be"),
    (dict(n=3, m=0, p=0.5), "m must be"),
    (dict(n=3, m=7, p=0.5), "m must be"),      # nut(3) = 6
    (dict(n=3, m=2, p=-0.1), "p must lie"),
    (dict(n=3, m=2, p=1.5), "p must lie"),
    (dict(n=3, m=2, p=0.5, density=0), "density must be"),
    (dict(n=3, m=2, p=0.5, density=7), "density must be"),
])
def test_genspec_rejects_bad_parameters(kwargs, match):
    with pytest.raises(ValueError, match=match):
        GenSpec(**kwargs)


def test_genspec_l_property():
    assert GenSpec(n=5, m=10, p=0.5).l == 5
    assert GenSpec(n=5, m=10, p=0.0).l == 0
    assert GenSpec(n=5, m=10, p=1.0).l == 10
    assert GenSpec(n=5, m=3, p=0.5).l == round(1.5)


def test_genspec_is_frozen():
    spec = GenSpec(n=4, m=3, p=0.5)
    with pytest.raises(dataclasses.FrozenInstanceError):
        spec.n = 6


# --------------------------------------------------------------------------
# determinism

def test_generate_is_deterministic():
    spec = GenSpec(n=8, m=12, p=0.5, seed=7)
    a = generate(spec)
    b = generate(spec)
    assert witness_hashes(a.witness) == witness_hashes(b.witness)
    assert a.known_optimum == b.known_optimum
    assert np.array_equal(a.sdp.b, b.sdp.b)
    assert np.array_equal(a.sdp.c.v, b.sdp.c.v)
    assert np.array_equal(a.sdp.c.i, b.sdp.c.i)


def test_generate_different_seeds_differ():
    base = GenSpec(n=8, m=12, p=0.5, seed=7)
    other = GenSpec(n=8, m=12, p=0.5, seed=8)
    assert witness_hashes(generate(base).witness) != \
        witness_hashes(generate(other).witness)


# --------------------------------------------------------------------------
# structure and planted optimality

@pytest.mark.parametrize("spec", [
    GenSpec(n=6, m=8, p=0.5, seed=1),
    GenSpec(n=9, m=15, p=0.25, density=3, seed=2),
    GenSpec(n=10, m=20, p=1.0, seed=3),
    GenSpec(n=7, m=10, p=0.0, seed=4),
])
def test_generated_instance_structure(spec):
    inst = generate(spec)
    sdp = inst.sdp
    assert sdp.n == spec.n and sdp.m == spec.m and sdp.l == spec.l
    assert sdp.user_sense == Sense.MIN
    senses = [con.sense for con in sdp.constraints]
    assert senses[:spec.l] == [ConstraintSense.LE] * spec.l
    assert senses[spec.l:] == [ConstraintSense.EQ] * (spec.m - spec.l)
    for con in sdp.constraints:
        assert con.matrix.nnz == spec.density
    assert np.all(np.isfinite(sdp.b))


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_witness_satisfies_optimality_conditions(seed):
    spec = GenSpec(n=10, m=18, p=0.5, seed=seed)
    inst = generate(spec)
    sdp, X, y, Z = inst.sdp, inst.witness.X, inst.witness.y, inst.witness.Z
    l = sdp.l

    # conic feasibility and complementarity of the planted pair
    assert np.linalg.eigvalsh(X).min() >= -1e-10
    assert np.linalg.eigvalsh(Z).min() >= -1e-10
    assert abs(np.sum(Z * X)) <= 1e-10
    assert int(np.sum(np.linalg.eigvalsh(X) > 1e-8)) == spec.n // 2

    # inequality multipliers obey the sign convention, slacks complement them
    s = sdp.b[:l] - apply_A(sdp, X)[:l]
    p = -y[:l]
    assert np.all(s >= -1e-12)
    assert np.all(p >= -1e-12)
    assert np.all(np.abs(s * p) <= 1e-12)

    # stationarity and feasibility through the solver's own residuals
    r_P, r_D = residuals(sdp, X, s, y, Z, p)
    assert r_P <= 1e-10 and r_D <= 1e-10

    # value agreement: <C, X*> = b^T y* pins the optimum
    assert inst.known_optimum == pytest.approx(float(np.sum(sdp.c.dense() * X)),
                                               abs=1e-10)
    assert inst.known_optimum == pytest.approx(float(sdp.b @ y), abs=1e-9)


def test_generate_solve_recovers_known_optimum():
    spec = GenSpec(n=10, m=20, p=0.5, density=4, seed=42)
    inst = generate(spec)
    res = solve(inst.sdp, SolverConfig(eps=1e-6))
    assert res.converged
    err = abs(res.primal_objective - inst.known_optimum)
    assert err <= 1e-3 * (1.0 + abs(inst.known_optimum))


def test_random_instance_tuple_unpacking():
    sdp, known, witness = generate(GenSpec(n=4, m=3, p=0.5, seed=0))
    assert sdp.n == 4
    assert isinstance(known, float)
    assert witness.X.shape == (4, 4)


# --------------------------------------------------------------------------
# sidecar files

def test_sidecar_round_trip(tmp_path):
    spec = GenSpec(n=6, m=9, p=0.5, density=3, seed=11)
    inst = generate(spec)
    path = tmp_path / "inst.known.json"
    write_sidecar(str(path), spec, inst)
    data = json.loads(path.read_text())
    assert data == sidecar_dict(spec, inst)
    assert data["generator"] == {"n": 6, "m": 9, "p": 0.5, "density": 3,
                                 "seed": 11}
    assert data["known_optimum"] == pytest.approx(inst.known_optimum)
    # hashes are recomputable from the witness arrays
    expect = hashlib.sha256(
        np.ascontiguousarray(inst.witness.X, dtype=float).tobytes()).hexdigest()
    assert data["witness_sha256"]["X"] == expect
    assert set(data["witness_sha256"]) == {"X", "y", "Z"}


# --------------------------------------------------------------------------
# rank-failure handling

def test_generate_zero_retries_raises():
    with pytest.raises(RankDeficient, match="0 attempts"):
        generate(GenSpec(n=4, m=3, p=0.5), max_retries=0)


def test_generate_raises_after_persistent_rank_failure(monkeypatch):
    def always_fails(sdp):
        raise FactorizationFailed("dependent rows")

    monkeypatch.setattr(randgen_mod, "factorize_gram", always_fails)
    with pytest.raises(RankDeficient, match="3 attempts"):
        generate(GenSpec(n=5, m=6, p=0.5, seed=2), max_retries=3)


def test_generate_retries_past_transient_failure(monkeypatch):
    real = randgen_mod.factorize_gram
    calls = []

    def flaky(sdp):
        calls.append(1)
        if len(calls) == 1:
            raise FactorizationFailed("dependent rows")
        return real(sdp)

    monkeypatch.setattr(randgen_mod, "factorize_gram", flaky)
    inst = generate(GenSpec(n=5, m=6, p=0.5, seed=2), max_retries=5)
    assert isinstance(inst, RandomInstance)
    assert len(calls) == 2
