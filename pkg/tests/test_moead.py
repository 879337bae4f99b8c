import math

import numpy as np
import pytest

from madac import indicators
from madac.moead import (
    ConfigurationError,
    DecompositionState,
    GenerationConfig,
    adapt_weights,
    build_neighborhoods,
    de_offspring,
    export_population_csv,
    generate_weights,
    initialize_state,
    polynomial_mutation,
    sbx_offspring,
    step_generation,
    tch,
    update_elite,
    weight_adaptation_allowed,
)
from madac.problems import make_instance, parse_instance
from madac.rng import RngStream
from oracles import neighborhoods_oracle


@pytest.mark.parametrize("m,H", [(3, 19), (5, 6), (7, 4)])
def test_weights_210(m, H):
    W = generate_weights(m, 210)
    assert W.shape == (210, m) and math.comb(H + m - 1, m - 1) == 210
    assert np.all(W >= 0)
    np.testing.assert_allclose(W.sum(axis=1), 1.0, atol=1e-12)
    assert len(np.unique(W, axis=0)) == 210


def test_weights_invalid_names_nearest():
    with pytest.raises(ConfigurationError, match="nearest valid size is 210"):
        generate_weights(3, 209)


def test_neighborhoods():
    rng = np.random.default_rng(0)
    W = rng.dirichlet(np.ones(3), 10)
    nb = build_neighborhoods(W, 3)
    assert nb.tolist() == neighborhoods_oracle(W.tolist(), 3)
    full = build_neighborhoods(W, 10)
    assert all(sorted(row) == list(range(10)) for row in full.tolist())
    W210 = generate_weights(3, 210)
    nb = build_neighborhoods(W210, 20)
    assert all(i in nb[i] for i in range(210))
    W36 = generate_weights(3, 36)
    assert build_neighborhoods(W36, 15).tolist() == neighborhoods_oracle(W36.tolist(), 15)


def test_tch_examples():
    assert tch([0.5, 0.9], [1, 0], [0, 0]) == 0.5
    assert tch([0.3, 0.4], [0.5, 0.5], [0.3, 0.4]) == 0.0
    assert tch([0.6, 0.5], [0.3, 0.7], [0.1, 0.2]) == pytest.approx(0.21)


def test_de_examples():
    lo, hi = np.zeros(1), np.ones(1)
    x = np.array([0.3, 0.6])
    parents = [np.array([0.9, 0.1]), np.array([0.2, 0.7])]
    assert np.array_equal(de_offspring("OP1", x, parents, 0.0, 0.5, 0, 1), x)
    assert de_offspring("OP1", [0.5], [[0.8], [0.2]], 0.5, 0.5, lo, hi)[0] == pytest.approx(0.8)
    r = [np.array([0.1]), np.array([0.7]), np.array([0.4])]
    assert de_offspring("OP4", [0.5], r, 0.5, 0.0, lo, hi) == pytest.approx(0.5 + 0.5 * 0.3)
    assert de_offspring("OP2", [0.9], [[1.0], [0.0], [1.0], [0.0]], 0.7, 0.5, lo, hi)[0] == 1.0
    with pytest.raises(ValueError):
        de_offspring("OP3", [0.5], r, 0.5, 0.5, lo, hi)


def test_de_op3_formula():
    lo, hi = np.full(2, -10.0), np.full(2, 10.0)
    x = np.array([1.0, 2.0])
    r = [np.array(v) for v in ([0.0, 1.0], [2.0, 2.0], [1.0, 0.0], [3.0, 1.0], [1.0, 1.0])]
    expected = x + 0.5 * (x - r[0]) + 0.6 * (r[1] - r[2]) + 0.6 * (r[3] - r[4])
    np.testing.assert_allclose(de_offspring("OP3", x, r, 0.6, 0.5, lo, hi), expected)


def test_sbx_properties():
    rng = np.random.default_rng(1)
    lo, hi = np.zeros(3), np.ones(3)
    p = np.array([0.2, 0.5, 0.7])
    assert np.array_equal(sbx_offspring(p, p, 20, rng, lo, hi), p)
    p1, p2 = np.array([0.3, 0.4, 0.5]), np.array([0.6, 0.5, 0.55])
    kids = np.array([sbx_offspring(p1, p2, 20, rng, lo, hi) for _ in range(10_000)])
    sd = kids.std(axis=0) / np.sqrt(len(kids))
    assert np.all(np.abs(kids.mean(axis=0) - (p1 + p2) / 2) < 3 * sd + 1e-12)
    tight = np.array([sbx_offspring(p1, p2, 1e6, rng, lo, hi) for _ in range(20)])
    near = np.minimum(np.abs(tight - p1), np.abs(tight - p2))
    assert near.max() < 1e-4


def test_pm_properties():
    rng = np.random.default_rng(2)
    lo, hi = np.zeros(4), np.ones(4)
    x = np.array([0.0, 0.3, 0.6, 1.0])
    assert np.array_equal(polynomial_mutation(x, 0.0, 20, lo, hi, rng), x)
    np.testing.assert_allclose(polynomial_mutation(x, 1.0, 1e6, lo, hi, rng), x, atol=1e-6)
    for _ in range(200):
        y = polynomial_mutation(x, 1.0, 20, lo, hi, rng)
        assert np.all(y >= lo) and np.all(y <= hi)


def _toy_state(seed=0, N=36, m=3):
    return initialize_state(make_instance("DTLZ2", m), N, RngStream(seed), neighborhood_size=15)


def test_generation_invariants():
    state = _toy_state()
    # DTLZ2 objectives are non-negative, so a zero ideal point never moves.
    state.ideal = np.zeros(3)
    before = state.tch_values()
    stats = step_generation(state, GenerationConfig(15, "OP2", 0.5))
    assert stats.evaluations == state.N and stats.replacements >= 0
    assert np.array_equal(state.ideal, np.zeros(3))
    assert np.all(state.tch_values() <= before)
    assert len(state.X) == len(state.weights) == state.N
    assert not indicators.domination_matrix(state.elite_F).any()


def test_ideal_point_monotone():
    state = _toy_state(2)
    previous = state.ideal.copy()
    for _ in range(4):
        step_generation(state, GenerationConfig(20, "SBX", 0.5))
        assert np.all(state.ideal <= previous)
        assert np.all(state.ideal <= state.F.min(axis=0))
        previous = state.ideal.copy()


def test_dominated_offspring_changes_nothing():
    state = _toy_state(3)
    X0, F0, z0 = state.X.copy(), state.F.copy(), state.ideal.copy()
    stats = step_generation(state, GenerationConfig(15, "SBX", 0.5), evaluate=lambda x: np.full(3, 50.0))
    assert stats.replacements == 0
    assert np.array_equal(state.X, X0) and np.array_equal(state.F, F0)
    assert np.array_equal(state.ideal, z0)


def test_hand_traced_replacement():
    state = _toy_state(3)
    state.ideal = np.zeros(3)
    first = np.array([0.3, 0.3, 0.3])
    calls = []

    def evaluate(x):
        calls.append(x)
        return first.copy() if len(calls) == 1 else np.full(3, 50.0)

    nb0 = state.neighborhoods[0].copy()
    g_old = np.max(state.weights[nb0] * state.F[nb0], axis=1)
    g_new = np.max(state.weights[nb0] * first, axis=1)
    expected = set(nb0[g_new < g_old].tolist())
    F0 = state.F.copy()
    stats = step_generation(state, GenerationConfig(15, "SBX", 0.5), evaluate=evaluate)
    changed = set(np.flatnonzero(np.any(state.F != F0, axis=1)).tolist())
    assert changed == expected and stats.replacements == len(expected)
    assert all(np.array_equal(state.X[j], calls[0]) for j in expected)


def test_ties_do_not_replace():
    state = _toy_state(4)
    state.ideal = np.zeros(3)
    v = np.array([0.4, 0.5, 0.6])
    state.F[:] = v
    X0 = state.X.copy()
    stats = step_generation(state, GenerationConfig(15, "OP1", 0.5), evaluate=lambda x: v.copy())
    assert stats.replacements == 0
    assert np.array_equal(state.X, X0)


def test_determinism():
    a, b = _toy_state(9), _toy_state(9)
    cfg = GenerationConfig(20, "OP3", 0.6)
    for _ in range(3):
        step_generation(a, cfg)
        step_generation(b, cfg)
    assert a.X.tobytes() == b.X.tobytes() and a.F.tobytes() == b.F.tobytes()


def test_elite_examples():
    inst = make_instance("DTLZ2", 3)
    state = _toy_state(5)
    state.elite_X = np.zeros((2, inst.D))
    state.elite_F = np.array([[0.2, 0.5, 0.9], [0.6, 0.3, 0.8]])
    update_elite(state, np.ones(inst.D), [0.3, 0.6, 1.0])
    assert len(state.elite_F) == 2
    update_elite(state, np.ones(inst.D), [0.1, 0.4, 0.8])
    assert [0.2, 0.5, 0.9] not in state.elite_F.tolist()
    assert [0.1, 0.4, 0.8] in state.elite_F.tolist()


def test_elite_overflow_drops_duplicate():
    inst = make_instance("DTLZ2", 3)
    state = _toy_state(6)
    state.elite_capacity = 5
    W = generate_weights(3, 6)[:5]
    F = W / np.linalg.norm(W, axis=1, keepdims=True)
    state.elite_X = np.arange(5 * inst.D, dtype=float).reshape(5, inst.D)
    state.elite_F = F
    update_elite(state, np.full(inst.D, -1.0), F[2])
    assert len(state.elite_F) == 5
    assert len(np.unique(state.elite_F, axis=0)) == 5


def test_adapt_weights_keeps_size():
    inst = parse_instance("DTLZ2_3")
    state = initialize_state(inst, 210, RngStream(7))
    for _ in range(5):
        step_generation(state, GenerationConfig(20, "OP2", 0.5))
    added = adapt_weights(state)
    assert added == 10
    assert len(state.X) == len(state.F) == len(state.weights) == 210
    np.testing.assert_allclose(state.weights.sum(axis=1), 1.0, atol=1e-12)
    assert len(state.elite_F) <= math.ceil(1.5 * 210)
    assert state.neighborhoods.shape == (210, 20)


def test_adapt_weights_degenerate_path():
    state = _toy_state(8, N=210)
    state.elite_X = state.elite_X[:3]
    state.elite_F = state.elite_F[:3]
    assert adapt_weights(state) == 3
    assert len(state.X) == 210


def test_frequency_guard():
    assert not weight_adaptation_allowed(5, 300, 0)
    assert weight_adaptation_allowed(15, 300, 0)
    assert not weight_adaptation_allowed(280, 300, 200)
    assert weight_adaptation_allowed(10, 100, 0)
    assert not weight_adaptation_allowed(19, 100, 10)


def test_config_domains():
    with pytest.raises(ConfigurationError):
        GenerationConfig(10, "OP1", 0.5)
    with pytest.raises(ConfigurationError):
        GenerationConfig(20, "OP5", 0.5)
    with pytest.raises(ConfigurationError):
        GenerationConfig(20, "OP1", 0.55)


def test_export_csv(tmp_path):
    state = _toy_state(1)
    path = tmp_path / "pop.csv"
    export_population_csv(state, path)
    lines = path.read_text().splitlines()
    assert len(lines) == state.N + 1
    assert lines[0].split(",")[-1] == "f3"
    assert isinstance(state, DecompositionState)
