import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from madac import indicators
from madac.problems import (
    FAMILIES,
    BoundsViolation,
    evaluate,
    instance_bounds,
    make_instance,
    optimal_solution,
    parse_instance,
    sample_reference_front,
)
from oracles import wfg4_oracle


def test_dtlz2_distance_variables_at_half_give_unit_norm():
    inst = make_instance("DTLZ2", 3)
    rng = np.random.default_rng(0)
    for _ in range(10):
        x = np.concatenate([rng.random(2), np.full(inst.D - 2, 0.5)])
        assert np.linalg.norm(evaluate(inst, x)) == pytest.approx(1.0, abs=1e-12)


def test_dtlz2_corner():
    inst = make_instance("DTLZ2", 3)
    x = np.concatenate([[0.0, 0.0], np.full(inst.D - 2, 0.5)])
    np.testing.assert_allclose(evaluate(inst, x), [1.0, 0.0, 0.0], atol=1e-15)


def test_wfg4_matches_independent_transcription():
    inst = make_instance("WFG4", 3)
    rng = np.random.default_rng(1)
    for _ in range(20):
        z = rng.random(inst.D) * inst.upper
        expected = wfg4_oracle(list(z), 3, inst.k)
        np.testing.assert_allclose(evaluate(inst, z), expected, rtol=1e-12, atol=1e-12)


def test_wfg4_envelope():
    inst = make_instance("WFG4", 3)
    rng = np.random.default_rng(2)
    for _ in range(50):
        f = evaluate(inst, rng.random(inst.D) * inst.upper)
        assert np.all(f >= 0.0)
        assert np.all(f <= 2.0 * np.arange(1, 4) + 1.0 + 1e-12)


def test_out_of_bounds_raises():
    inst = make_instance("DTLZ2", 3)
    x = np.full(inst.D, 0.5)
    x[0] = 1.5
    with pytest.raises(BoundsViolation):
        evaluate(inst, x)
    with pytest.raises(ValueError):
        evaluate(inst, np.full(inst.D - 1, 0.5))


@pytest.mark.parametrize("family", FAMILIES)
@pytest.mark.parametrize("m", [3, 5, 7])
def test_every_instance_evaluates_finite_and_pure(family, m):
    inst = make_instance(family, m)
    x = np.random.default_rng(m).random(inst.D) * inst.upper
    f1 = evaluate(inst, x)
    assert f1.shape == (m,) and np.all(np.isfinite(f1))
    assert evaluate(inst, x.copy()).tobytes() == f1.tobytes()


def test_variable_counts():
    assert make_instance("DTLZ4", 5).D == 14
    assert make_instance("WFG6", 7).D == 12 + 20


def test_bounds_examples():
    ideal, nadir = instance_bounds(make_instance("DTLZ2", 3))
    np.testing.assert_array_equal(ideal, [0, 0, 0])
    np.testing.assert_array_equal(nadir, [1, 1, 1])
    ideal, nadir = instance_bounds(make_instance("WFG4", 3))
    np.testing.assert_array_equal(nadir, [2, 4, 6])
    ideal, nadir = instance_bounds(make_instance("DTLZ4", 5))
    np.testing.assert_array_equal(ideal, np.zeros(5))
    np.testing.assert_array_equal(nadir, np.ones(5))


def test_parse_instance():
    inst = parse_instance("WFG9_7")
    assert (inst.family, inst.m, inst.name) == ("WFG9", 7, "WFG9_7")
    for bad in ("WFG3_3", "DTLZ2_4", "DTLZ2"):
        with pytest.raises(ValueError):
            parse_instance(bad)


def test_reference_front_dtlz2():
    front = sample_reference_front(make_instance("DTLZ2", 3), 990)
    assert len(front) == 990
    np.testing.assert_allclose(np.linalg.norm(front, axis=1), 1.0, atol=1e-12)
    assert indicators.igd(front, front) == 0.0


def test_reference_front_wfg_equation():
    front = sample_reference_front(make_instance("WFG4", 3))
    lhs = np.sum((front / (2.0 * np.arange(1, 4))) ** 2, axis=1)
    np.testing.assert_allclose(lhs, 1.0, atol=1e-9)


@pytest.mark.parametrize("name", ["DTLZ2_3", "WFG6_5", "DTLZ4_7"])
def test_reference_front_nondominated_and_sized(name):
    inst = parse_instance(name)
    front = sample_reference_front(inst)
    assert len(front) >= (990 if inst.m == 3 else 2000)
    assert indicators.nd_ratio(front) == 1.0
    assert np.array_equal(front, sample_reference_front(inst))


@pytest.mark.parametrize("name", ["DTLZ2_3", "DTLZ4_5", "WFG4_3", "WFG5_3", "WFG6_5", "WFG7_7"])
def test_optimal_solutions_lie_on_front(name):
    inst = parse_instance(name)
    rng = np.random.default_rng(3)
    scale = 1.0 if inst.family.startswith("DTLZ") else 2.0 * np.arange(1, inst.m + 1)
    for _ in range(10):
        f = evaluate(inst, optimal_solution(inst, rng.random(inst.k)))
        assert np.sum((f / scale) ** 2) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=12, max_size=12))
def test_dtlz2_objectives_outside_unit_sphere(xs):
    f = evaluate(make_instance("DTLZ2", 3), np.array(xs))
    assert np.linalg.norm(f) >= 1.0 - 1e-12
