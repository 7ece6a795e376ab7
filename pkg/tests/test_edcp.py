import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dihedral_bridge.core_math import GaussianParam, discrete_gaussian_pmf
from dihedral_bridge.edcp import (
    EdcpInstance,
    EdcpParams,
    LweInstance,
    LweParams,
    edcp_distance,
    edcp_state,
    gen_decisional_null,
    gen_edcp,
    gen_lwe,
    lwe_residual,
    null_j_pmf,
    uniform_lwe_public,
    verify_edcp_state,
)
from dihedral_bridge.errors import ParameterError
from dihedral_bridge.statevector import SparseState, WeightFn
from dihedral_bridge.stats import tv_distance


def test_lwe_params_validation():
    with pytest.raises(ParameterError):
        LweParams(1, 1, 0.1, 3)
    with pytest.raises(ParameterError):
        LweParams(3, 16, 0.1, 2)
    with pytest.raises(ParameterError):
        LweParams(1, 16, 1.5, 3)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_lwe_residual_is_error(seed):
    inst = gen_lwe(LweParams(2, 97, 3.0 / 97, 6), np.random.default_rng(seed))
    assert np.array_equal(lwe_residual(inst.A, inst.b, inst.s0, 97), inst.e0)


def test_noiseless_lwe():
    inst = gen_lwe(LweParams(1, 16, 0.0, 4), np.random.default_rng(0))
    assert not inst.e0.any()
    assert np.array_equal(inst.b, np.mod(inst.A @ inst.s0, 16))


def test_lwe_error_histogram():
    params = LweParams(1, 1024, 4.0 / 1024, 100_000, kappa=16)
    inst = gen_lwe(params, np.random.default_rng(1))
    support, pmf = discrete_gaussian_pmf(GaussianParam(4.0, 16))
    emp = np.bincount(inst.e0 - support[0], minlength=len(support)) / len(inst.e0)
    assert tv_distance(emp, pmf) <= 0.01


def test_lwe_json_round_trip():
    inst = gen_lwe(LweParams(2, 31, 2.0 / 31, 5), np.random.default_rng(2))
    back = LweInstance.from_json(inst.to_json())
    assert back.params == inst.params
    for f in ("A", "b", "s0", "e0"):
        assert np.array_equal(getattr(back, f), getattr(inst, f))


def test_uniform_public_shape():
    pub = uniform_lwe_public(LweParams(2, 31, 0.1, 5), np.random.default_rng(0))
    assert pub.A.shape == (5, 2) and pub.b.shape == (5,)


def test_dcp_special_case():
    st_ = edcp_state(5, 3, WeightFn.indicator01(), 11)
    assert sorted(map(tuple, st_.labels.tolist())) == [(0, 3), (1, 8)]
    assert np.allclose(np.abs(st_.amps), 1 / math.sqrt(2))


def test_gaussian_edcp_amplitudes():
    dist = WeightFn.gaussian(2.0, 4)
    st_ = edcp_state([1, 2], [0, 5], dist, 17)
    js = np.arange(-4, 5)
    w = np.exp(-math.pi * js**2 / 4.0)
    w /= np.linalg.norm(w)
    for j, a in zip(js, w):
        assert st_.amplitude((j, j % 17, (5 + 2 * j) % 17)) == pytest.approx(a)


def test_verify_accepts_ideal_and_rejects_others():
    dist = WeightFn.gaussian(2.0, 4)
    st_ = edcp_state(3, 7, dist, 32)
    assert verify_edcp_state(st_, 3, 7, dist)
    assert not verify_edcp_state(st_, 4, 7, dist)
    assert not verify_edcp_state(st_, 3, 8, dist)
    assert not verify_edcp_state(st_, 3, 7, WeightFn.gaussian(2.5, 4))
    rotated = SparseState(st_.layout, st_.labels, st_.amps * 1j)
    assert verify_edcp_state(rotated, 3, 7, dist)
    bumped = st_.amps.copy()
    bumped[np.argmax(np.abs(bumped))] *= 1.0 + 1e-6
    assert edcp_distance(SparseState.build(st_.layout, st_.labels, bumped), 3, 7, dist) > 1e-9


def test_gen_edcp_checks_cutoff():
    with pytest.raises(ParameterError):
        gen_edcp(EdcpParams(1, 16, WeightFn.gaussian(4.0, 4), 1), np.random.default_rng(0))


def test_gen_edcp_states_verify():
    params = EdcpParams(2, 64, WeightFn.gaussian(3.0, 4), 3)
    inst = gen_edcp(params, np.random.default_rng(4))
    assert len(inst.states) == 3
    for x, st_ in zip(inst.offsets, inst.states):
        assert verify_edcp_state(st_, inst.s, x, params.dist)


def test_edcp_instance_round_trip():
    params = EdcpParams(1, 40, WeightFn.uniform(5), 2)
    inst = gen_edcp(params, np.random.default_rng(5))
    back = EdcpInstance.from_dict(inst.to_dict())
    assert EdcpParams.from_json(params.to_json()) == params
    assert np.array_equal(back.s, inst.s)
    for a, b in zip(back.states, inst.states):
        assert np.array_equal(a.labels, b.labels) and np.allclose(a.amps, b.amps)


def test_decisional_null():
    params = EdcpParams(1, 64, WeightFn.gaussian(2.0, 4), 4000)
    states = gen_decisional_null(params, np.random.default_rng(6))
    assert all(s.size == 1 for s in states)
    js, pmf = null_j_pmf(params.dist)
    emp = np.array([sum(int(s.labels[0, 0]) == j for s in states) for j in js]) / len(states)
    assert tv_distance(emp, pmf) <= 0.05
    w = np.exp(-2 * math.pi * js**2 / 4.0)
    assert np.allclose(pmf, w / w.sum())


def test_edcp_params_validation():
    with pytest.raises(ParameterError):
        EdcpParams(1, 1, WeightFn.uniform(2))
    with pytest.raises(ParameterError):
        EdcpParams(1, 8, WeightFn.uniform(2), 0)
