import numpy as np
import pytest

from madac.nn import (
    CHECKPOINT_MAGIC,
    Mlp,
    OptimizerState,
    adam_step,
    finite_diff_check,
    load_checkpoint,
    save_checkpoint,
)


def test_param_count_and_zero_forward():
    net = Mlp((4, 8, 3))
    assert net.n_params == 4 * 8 + 8 + 8 * 3 + 3
    assert np.all(net.forward(np.ones(4)) == 0.0)


def test_identity_layer():
    net = Mlp((3, 3))
    net.weights[0][...] = np.eye(3)
    x = np.array([0.5, -2.0, 3.0])
    assert np.array_equal(net.forward(x), x)


def test_forward_matches_transcription():
    rng = np.random.default_rng(0)
    net = Mlp.initialized((4, 8, 3), rng)
    x = rng.normal(size=4)
    flat = net.params
    W1 = flat[:32].reshape(4, 8)
    b1 = flat[32:40]
    W2 = flat[40:64].reshape(8, 3)
    b2 = flat[64:67]
    hidden = [max(0.0, sum(x[i] * W1[i, j] for i in range(4)) + b1[j]) for j in range(8)]
    out = [sum(hidden[j] * W2[j, k] for j in range(8)) + b2[k] for k in range(3)]
    np.testing.assert_allclose(net.forward(x), out, rtol=1e-13)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        Mlp((4, 3)).forward(np.ones(5))
    with pytest.raises(ValueError):
        Mlp((4, 3)).backward(np.ones(4), np.ones(2))


def test_backward_examples():
    rng = np.random.default_rng(1)
    net = Mlp.initialized((3, 5, 2), rng)
    x = rng.normal(size=3)
    assert np.all(net.backward(x, np.zeros(2)) == 0.0)
    lin = Mlp.initialized((3, 2), rng)
    g = np.array([0.7, -1.2])
    grad = lin.backward(x, g)
    np.testing.assert_allclose(grad[:6].reshape(3, 2), np.outer(x, g))
    np.testing.assert_allclose(grad[6:], g)


def test_batch_backward_sums():
    rng = np.random.default_rng(2)
    net = Mlp.initialized((3, 6, 2), rng)
    X, G = rng.normal(size=(4, 3)), rng.normal(size=(4, 2))
    total = sum(net.backward(X[i], G[i]) for i in range(4))
    np.testing.assert_allclose(net.backward(X, G), total, rtol=1e-12, atol=1e-14)


def test_finite_differences():
    rng = np.random.default_rng(3)
    assert finite_diff_check(Mlp.initialized((3, 2), rng), rng.normal(size=(4, 3))) < 1e-8
    for widths in [(4, 16, 3), (5, 8, 8, 2), (22, 64, 64, 4)]:
        net = Mlp.initialized(widths, rng)
        x = rng.normal(size=(3, widths[0]))
        assert finite_diff_check(net, x, output_gradient=rng.normal(size=widths[-1])) < 1e-4


def test_finite_difference_drops_kink_inputs():
    net = Mlp((1, 1, 1))
    net.weights[0][...] = 1.0
    net.weights[1][...] = 1.0
    with pytest.raises(ValueError):
        finite_diff_check(net, np.zeros((1, 1)))
    assert finite_diff_check(net, np.array([[0.0], [1.0]])) < 1e-8


def test_adam():
    params = np.array([1.0, -2.0])
    opt = OptimizerState(2, lr=0.1)
    adam_step(params, np.zeros(2), opt)
    assert np.array_equal(params, [1.0, -2.0])
    opt = OptimizerState(2, lr=0.1)
    adam_step(params, np.array([3.0, -0.01]), opt)
    np.testing.assert_allclose(params, [0.9, -1.9], rtol=1e-6)
    with pytest.raises(FloatingPointError):
        adam_step(params, np.array([np.nan, 0.0]), opt)


def test_adam_quadratic_decreases():
    x = np.array([3.0])
    opt = OptimizerState(1, lr=0.05)
    losses = []
    for _ in range(100):
        losses.append(float(x[0] ** 2))
        adam_step(x, 2 * x, opt)
    assert all(b < a for a, b in zip(losses[5:], losses[6:]) if a > 1e-3)
    assert losses[-1] < losses[0] * 0.01


def test_checkpoint_roundtrip(tmp_path):
    net = Mlp.initialized((5, 7, 3), np.random.default_rng(4))
    path = tmp_path / "net.bin"
    save_checkpoint(path, net, seed=9, step=12)
    raw = path.read_bytes()
    assert raw.startswith(CHECKPOINT_MAGIC)
    loaded, header = load_checkpoint(path)
    assert loaded.widths == (5, 7, 3) and header["seed"] == 9 and header["step"] == 12
    assert loaded.params.tobytes() == net.params.tobytes()
    assert raw.endswith(net.params.astype("<f8").tobytes())
    bad = tmp_path / "bad.bin"
    bad.write_bytes(b"nope" + raw)
    with pytest.raises(ValueError):
        load_checkpoint(bad)


def test_pickle_keeps_parameter_views():
    import pickle

    net = pickle.loads(pickle.dumps(Mlp.initialized((3, 4, 2), np.random.default_rng(5))))
    x = np.ones(3)
    before = net.forward(x)
    net.params[...] += 1.0
    assert not np.allclose(net.forward(x), before)
