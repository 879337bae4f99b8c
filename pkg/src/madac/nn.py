"""Small fully connected networks with hand-written backprop and Adam.

Parameters live in one flat float64 array; per-layer weight matrices
``(fan_in, fan_out)`` and bias vectors are views into it. Hidden layers use
the rectifier, the output layer is linear.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .rng import as_stream

CHECKPOINT_MAGIC = b"MADACNN1"


class Mlp:
    def __init__(self, widths, params: np.ndarray | None = None):
        widths = tuple(int(w) for w in widths)
        if len(widths) < 2 or min(widths) < 1:
            raise ValueError(f"need at least input and output widths, got {widths}")
        self.widths = widths
        self.shapes = list(zip(widths[:-1], widths[1:]))
        n = sum(a * b + b for a, b in self.shapes)
        if params is None:
            params = np.zeros(n)
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (n,):
            raise ValueError(f"expected {n} parameters, got shape {params.shape}")
        self.params = params.copy()
        self._bind()

    def _bind(self) -> None:
        self.weights, self.biases = [], []
        offset = 0
        for a, b in self.shapes:
            self.weights.append(self.params[offset : offset + a * b].reshape(a, b))
            offset += a * b
            self.biases.append(self.params[offset : offset + b])
            offset += b

    def __getstate__(self) -> dict:
        return {"widths": self.widths, "params": self.params}

    def __setstate__(self, state: dict) -> None:
        # Views do not survive pickling; rebuild them over the flat array.
        self.widths = state["widths"]
        self.shapes = list(zip(self.widths[:-1], self.widths[1:]))
        self.params = state["params"]
        self._bind()

    @classmethod
    def initialized(cls, widths, rng=None) -> Mlp:
        """Uniform init in +-1/sqrt(fan_in) for weights and biases."""
        gen = as_stream(rng).generator if not isinstance(rng, np.random.Generator) else rng
        net = cls(widths)
        for W, b in zip(net.weights, net.biases):
            bound = 1.0 / np.sqrt(W.shape[0])
            W[...] = gen.uniform(-bound, bound, W.shape)
            b[...] = gen.uniform(-bound, bound, b.shape)
        return net

    @property
    def n_params(self) -> int:
        return len(self.params)

    def copy(self) -> Mlp:
        return Mlp(self.widths, self.params)

    def load_params(self, params: np.ndarray) -> None:
        self.params[...] = params

    def _check_input(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.widths[0]:
            raise ValueError(f"input width {x.shape[-1]} does not match network input {self.widths[0]}")
        return x

    def forward(self, x) -> np.ndarray:
        h = self._check_input(x)
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ W + b
            if i < last:
                h = np.maximum(h, 0.0)
        return h

    def forward_cached(self, x):
        """Forward pass that also returns the pre-activations per layer."""
        h = self._check_input(x)
        inputs, pre = [], []
        last = len(self.weights) - 1
        for i, (W, b) in enumerate(zip(self.weights, self.biases)):
            inputs.append(h)
            z = h @ W + b
            pre.append(z)
            h = np.maximum(z, 0.0) if i < last else z
        return h, (inputs, pre)

    def backward(self, x, output_gradient, cache=None) -> np.ndarray:
        """Gradient of ``sum(output * output_gradient)`` w.r.t. the flat parameters.

        Batched inputs accumulate (sum) their contributions.
        """
        x = self._check_input(x)
        g = np.asarray(output_gradient, dtype=np.float64)
        if g.shape[-1] != self.widths[-1]:
            raise ValueError("output gradient width does not match network output")
        if cache is None:
            _, cache = self.forward_cached(x)
        inputs, pre = cache
        single = g.ndim == 1
        if single:
            g = g[None, :]
            inputs = [h[None, :] for h in inputs]
            pre = [z[None, :] for z in pre]
        grad = np.empty_like(self.params)
        offsets = []
        offset = 0
        for a, b in self.shapes:
            offsets.append(offset)
            offset += a * b + b
        for i in range(len(self.shapes) - 1, -1, -1):
            a, b = self.shapes[i]
            o = offsets[i]
            grad[o : o + a * b] = (inputs[i].T @ g).ravel()
            grad[o + a * b : o + a * b + b] = g.sum(axis=0)
            if i > 0:
                g = (g @ self.weights[i].T) * (pre[i - 1] > 0.0)
        return grad


@dataclass
class OptimizerState:
    n_params: int
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: np.ndarray = field(default=None, repr=False)
    v: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.m is None:
            self.m = np.zeros(self.n_params)
        if self.v is None:
            self.v = np.zeros(self.n_params)


def adam_step(params: np.ndarray, grads: np.ndarray, opt: OptimizerState) -> None:
    """In-place bias-corrected Adam update of ``params``."""
    if len(params) != len(grads) or len(params) != len(opt.m):
        raise ValueError("parameter, gradient and optimizer lengths differ")
    if not np.all(np.isfinite(grads)):
        bad = np.flatnonzero(~np.isfinite(grads))
        raise FloatingPointError(
            f"non-finite gradient in {len(bad)} entries (first at index {bad[0]}) at optimizer step {opt.step}"
        )
    opt.step += 1
    opt.m = opt.beta1 * opt.m + (1.0 - opt.beta1) * grads
    opt.v = opt.beta2 * opt.v + (1.0 - opt.beta2) * grads * grads
    m_hat = opt.m / (1.0 - opt.beta1**opt.step)
    v_hat = opt.v / (1.0 - opt.beta2**opt.step)
    params -= opt.lr * m_hat / (np.sqrt(v_hat) + opt.eps)


def finite_diff_check(net: Mlp, x, h: float = 1e-5, output_gradient=None, kink_tol: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference gradients.

    Inputs whose hidden pre-activations lie within ``kink_tol`` of zero are
    dropped, since the rectifier is not differentiable there.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    _, (_, pre) = net.forward_cached(x)
    smooth = np.ones(len(x), dtype=bool)
    for z in pre[:-1]:
        smooth &= np.all(np.abs(z) > kink_tol, axis=1)
    x = x[smooth]
    if len(x) == 0:
        raise ValueError("every input sits on a rectifier kink")
    if output_gradient is None:
        output_gradient = np.ones((len(x), net.widths[-1]))
    else:
        output_gradient = np.broadcast_to(output_gradient, (len(x), net.widths[-1]))

    analytic = net.backward(x, output_gradient)
    probe = net.copy()
    numeric = np.empty_like(analytic)
    for k in range(net.n_params):
        base = probe.params[k]
        probe.params[k] = base + h
        up = np.sum(probe.forward(x) * output_gradient)
        probe.params[k] = base - h
        down = np.sum(probe.forward(x) * output_gradient)
        probe.params[k] = base
        numeric[k] = (up - down) / (2.0 * h)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    return float(np.max(np.abs(analytic - numeric) / denom))


# --------------------------------------------------------------------------
# Checkpoints: magic, little-endian u64 header length, JSON header, then the
# flat parameters as little-endian float64.


def save_checkpoint(path: str | Path, net: Mlp, seed: int | None = None, step: int = 0) -> None:
    header = json.dumps({"shapes": [list(s) for s in net.shapes], "seed": seed, "step": int(step)}).encode()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        fh.write(net.params.astype("<f8").tobytes())


def load_checkpoint(path: str | Path) -> tuple[Mlp, dict]:
    with open(path, "rb") as fh:
        if fh.read(len(CHECKPOINT_MAGIC)) != CHECKPOINT_MAGIC:
            raise ValueError(f"{path} is not a network checkpoint")
        (size,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(size).decode())
        params = np.frombuffer(fh.read(), dtype="<f8").astype(np.float64)
    shapes = header["shapes"]
    widths = [shapes[0][0]] + [s[1] for s in shapes]
    return Mlp(widths, params), header
