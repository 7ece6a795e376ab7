import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dihedral_bridge.errors import ConsistencyError, ParameterError, PreconditionError, TailEvent
from dihedral_bridge.statevector import (
    IntRegister,
    ModRegister,
    RegisterLayout,
    SparseState,
    WeightFn,
    apply_classical,
    l2_distance,
    lift_int_to_mod,
    marginal,
    measure,
    measure_derived,
    phase_distance,
    prepare_basis,
    prepare_weighted,
    project,
    qft_mod,
    rejection_resample,
    relabel,
)
from dihedral_bridge.stats import chi2_pvalue


def mod_layout(N, arity=1):
    return RegisterLayout((ModRegister(N, arity),))


def pair_layout(bound, N):
    return RegisterLayout((IntRegister(bound), ModRegister(N)))


def random_state(rng, N, size):
    xs = rng.choice(N, size=size, replace=False)
    amps = rng.normal(size=size) + 1j * rng.normal(size=size)
    return SparseState.build(mod_layout(N), xs[:, None], amps)


def dense(state, N):
    v = np.zeros(N, dtype=complex)
    v[state.labels[:, 0]] = state.amps
    return v


def test_build_normalizes_and_sorts():
    st_ = SparseState.build(mod_layout(8), [[5], [1]], [3, 4])
    assert st_.labels[:, 0].tolist() == [1, 5]
    assert np.allclose(st_.amps, [0.8, 0.6])
    assert st_.norm() == pytest.approx(1.0)


def test_duplicates_rejected_or_merged():
    with pytest.raises(ConsistencyError):
        SparseState.build(mod_layout(8), [[1], [1]], [1, 1])
    merged = SparseState.build(mod_layout(8), [[1], [1], [2]], [1, 1, 0], merge=True)
    assert merged.size == 1


def test_labels_checked_against_layout():
    with pytest.raises(ParameterError):
        SparseState.build(mod_layout(4), [[4]], [1])
    with pytest.raises(ParameterError):
        SparseState.build(pair_layout(2, 4), [[3, 0]], [1])
    with pytest.raises(PreconditionError):
        SparseState.build(mod_layout(4), [[1]], [0])


def test_measure_basis_state():
    st_ = prepare_basis(pair_layout(3, 8), (2, 5))
    out = measure(st_, 1, np.random.default_rng(0))
    assert out.value == 5 and out.probability == 1.0


def test_measure_born_rule_probability():
    st_ = SparseState.build(mod_layout(2), [[0], [1]], [0.6, 0.8])
    seen = {}
    rng = np.random.default_rng(0)
    for _ in range(50):
        out = measure(st_, 0, rng)
        seen[out.value] = out.probability
    assert seen[1] == pytest.approx(16 / 25)
    assert seen[0] == pytest.approx(9 / 25)


def test_measure_collapses():
    st_ = SparseState.build(pair_layout(1, 4), [[0, 1], [1, 1], [1, 2]], [1, 1, 1])
    out = measure(st_, 1, np.random.default_rng(4))
    assert set(out.collapsed.labels[:, 1].tolist()) == {out.value}
    assert out.collapsed.norm() == pytest.approx(1.0)


def test_measure_frequencies_match_marginal():
    rng = np.random.default_rng(1)
    st_ = random_state(rng, 16, 10)
    vals, probs = marginal(st_, 0)
    shots = np.array([measure(st_, 0, rng).value for _ in range(20000)])
    counts = np.array([(shots == v).sum() for v in vals[:, 0]])
    assert chi2_pvalue(counts, probs) > 0.001


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(0, 2**32 - 1))
def test_qft_unitary_and_involution(N, seed):
    rng = np.random.default_rng(seed)
    st_ = random_state(rng, N, rng.integers(1, N + 1))
    fwd = qft_mod(st_, 0)
    assert fwd.norm() == pytest.approx(1.0, abs=1e-12)
    back = qft_mod(fwd, 0, inverse=True)
    assert l2_distance(st_, back) <= 1e-12


def test_qft_matches_explicit_matrix():
    N = 9
    rng = np.random.default_rng(2)
    st_ = random_state(rng, N, N)
    F = np.exp(2j * np.pi * np.outer(np.arange(N), np.arange(N)) / N) / math.sqrt(N)
    assert np.allclose(dense(qft_mod(st_, 0), N), F @ dense(st_, N), atol=1e-13)


def test_qft_of_basis_is_uniform():
    out = qft_mod(prepare_basis(mod_layout(8), 3), 0)
    assert out.size == 8
    assert np.allclose(np.abs(out.amps), 1 / math.sqrt(8))


def test_qft_acts_per_coordinate():
    layout = mod_layout(5, 2)
    st_ = prepare_basis(layout, (1, 0))
    out = qft_mod(st_, 0)
    # second coordinate 0 transforms to the uniform superposition, first picks up phases
    a = out.amplitude((2, 3))
    assert a == pytest.approx(np.exp(2j * np.pi * 2 / 5) / 5)


def test_qft_needs_modular_register():
    with pytest.raises(ParameterError):
        qft_mod(prepare_basis(pair_layout(2, 4), (0, 0)), 0)


def test_lift_int_to_mod():
    st_ = prepare_weighted(pair_layout(2, 5), WeightFn.uniform(1))
    w = SparseState.build(pair_layout(2, 5), [[j, 0] for j in range(-2, 3)], np.ones(5))
    out = lift_int_to_mod(w, 5)
    assert sorted(out.labels[:, 0].tolist()) == [0, 1, 2, 3, 4]
    assert out.norm() == pytest.approx(1.0)
    assert st_.size == 1
    wide = SparseState.build(pair_layout(3, 5), [[j, 0] for j in (-3, 0, 3)], np.ones(3))
    with pytest.raises(TailEvent):
        lift_int_to_mod(wide, 5)


def test_apply_classical_and_uncompute():
    layout = pair_layout(3, 7)
    st_ = prepare_weighted(layout, WeightFn.uniform(4))
    f = lambda j: 3 * j + 1  # noqa: E731
    out = apply_classical(st_, f, [0], 1)
    assert sorted(map(tuple, out.labels.tolist())) == [(j, (3 * j + 1) % 7) for j in range(4)]
    back = apply_classical(out, f, [0], 1, uncompute=True)
    assert l2_distance(back, st_) == 0.0
    with pytest.raises(PreconditionError):
        apply_classical(out, f, [0], 1)
    with pytest.raises(ConsistencyError):
        apply_classical(out, lambda j: j, [0], 1, uncompute=True)


def test_relabel_must_be_injective():
    st_ = SparseState.build(pair_layout(2, 4), [[-1, 0], [1, 0]], [1, 1])
    with pytest.raises(ConsistencyError):
        relabel(st_, lambda lab: np.abs(lab))


def test_project_and_derived_measurement():
    st_ = prepare_weighted(pair_layout(3, 4), WeightFn.uniform(4))
    p, sub = project(st_, st_.labels[:, 0] >= 2)
    assert p == pytest.approx(0.5) and sub.size == 2
    assert project(st_, np.zeros(4, bool)) == (0.0, None)
    out = measure_derived(st_, lambda lab: lab[:, 0] % 2, np.random.default_rng(0))
    assert out.probability == pytest.approx(0.5)
    assert set((out.collapsed.labels[:, 0] % 2).tolist()) == {out.value}


def test_rejection_identity_accepts():
    st_ = prepare_weighted(pair_layout(16, 4), WeightFn.gaussian(2.0))
    vals, probs = marginal(st_, 0)
    pi = dict(zip(vals[:, 0].tolist(), np.sqrt(probs)))
    ok, out, p_acc = rejection_resample(st_, lambda ks: np.array([pi[int(k)] for k in ks]),
                                        np.random.default_rng(0))
    assert ok and p_acc == pytest.approx(1.0)
    assert l2_distance(out, st_) <= 1e-12


def test_rejection_half_support():
    st_ = prepare_weighted(pair_layout(4, 4), WeightFn.uniform(4))
    target = lambda ks: np.where(np.asarray(ks) < 2, 0.5, 0.0)  # noqa: E731
    rng = np.random.default_rng(3)
    results = [rejection_resample(st_, target, rng) for _ in range(4000)]
    assert results[0][2] == pytest.approx(0.5)
    rate = np.mean([r[0] for r in results])
    assert abs(rate - 0.5) <= 3 * math.sqrt(0.25 / 4000)
    out = next(r[1] for r in results if r[0])
    assert sorted(out.labels[:, 0].tolist()) == [0, 1]
    assert np.allclose(np.abs(out.amps), 1 / math.sqrt(2))


def test_rejection_checks_precondition():
    st_ = prepare_weighted(pair_layout(4, 4), WeightFn.uniform(4))
    with pytest.raises(PreconditionError):
        rejection_resample(st_, lambda ks: np.full(len(ks), 0.9), np.random.default_rng(0))


@given(st.floats(0, 2 * math.pi))
def test_phase_distance_ignores_global_phase(theta):
    rng = np.random.default_rng(9)
    st_ = random_state(rng, 12, 6)
    rot = st_.amps * np.exp(1j * theta)
    assert phase_distance(st_.labels, st_.amps, st_.labels, rot) <= 1e-12


def test_phase_distance_disjoint_supports():
    la = np.array([[0]])
    lb = np.array([[1]])
    assert phase_distance(la, np.array([1.0]), lb, np.array([1.0])) == pytest.approx(math.sqrt(2))


def test_weight_fn_round_trip():
    for w in (WeightFn.gaussian(2.5, 9), WeightFn.uniform(5), WeightFn.indicator01()):
        assert WeightFn.from_dict(w.to_dict()) == w
    assert WeightFn.indicator01().support().tolist() == [0, 1]
    with pytest.raises(ParameterError):
        WeightFn("triangle")


def test_dump_text_is_deterministic():
    a = SparseState.build(mod_layout(4), [[3], [1]], [1, 1j])
    b = SparseState.build(mod_layout(4), [[1], [3]], [1j, 1])
    assert a.dump_text() == b.dump_text()
    assert a.dump_text().splitlines()[0].startswith("1 :")
