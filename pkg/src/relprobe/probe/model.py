"""Fully connected binary probe: architecture sizing, forward/backward pass.

The network is hidden ReLU layers with inverted dropout between them and a
2-unit softmax output trained with cross-entropy. All math runs through
the kernel backend (compiled when available).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class ProbeError(RuntimeError):
    """Fatal training inconsistency (OOV node, non-finite loss)."""


_BASE_HIDDEN = {"NN2": (750, 400), "NN3": (750, 500, 250)}
_BASE_WIDTH = 600


@dataclass(frozen=True)
class ProbeArchitecture:
    kind: str
    hidden_sizes: tuple
    input_width: int

    @classmethod
    def for_width(cls, kind: str, input_width: int) -> "ProbeArchitecture":
        """Scale the reference hidden sizes proportionally to the input width.

        Reference sizes hold at width 600 (two concatenated 300-d vectors);
        other widths scale linearly, rounded to the nearest 10. Unary probes
        pass width d instead of 2d and so get half-size hidden layers.
        """
        if kind not in _BASE_HIDDEN:
            raise ValueError(f"unknown architecture kind {kind!r}")
        if input_width < 1:
            raise ValueError("input width must be positive")
        sizes = tuple(
            max(10, int(round(b * input_width / _BASE_WIDTH / 10.0)) * 10)
            for b in _BASE_HIDDEN[kind]
        )
        return cls(kind, sizes, input_width)


class MLPProbe:
    """From-scratch MLP with manual backprop.

    Weights start uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], biases at
    zero. Dropout and its uniforms are supplied per call so that training
    owns all randomness.
    """

    def __init__(self, arch: ProbeArchitecture, rng: np.random.Generator):
        self.arch = arch
        dims = [arch.input_width, *arch.hidden_sizes, 2]
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(dims[:-1], dims[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(np.zeros(fan_out))

    def parameters(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.append(w)
            out.append(b)
        return out

    def logits(self, x: np.ndarray) -> np.ndarray:
        """Inference pass: no dropout."""
        a = x
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            a = a @ w + b
            if i < len(self.weights) - 1:
                kernels.relu_(a)
        return a

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.logits(x), axis=1)

    def loss_and_grads(self, x, y, dropout=0.0, rng=None):
        """Cross-entropy loss and gradients for every weight and bias.

        Dropout (when nonzero) is applied after each hidden activation,
        never on input or output.
        """
        n_hidden = len(self.weights) - 1
        acts = [x]       # post-dropout layer inputs
        raw_acts = []    # post-relu, pre-dropout (for the relu gradient)
        masks = []
        a = x
        for i in range(n_hidden):
            a = a @ self.weights[i] + self.biases[i]
            kernels.relu_(a)
            raw_acts.append(a)
            if dropout > 0.0:
                u = rng.random(a.shape)
                a = a.copy()
                kernels.dropout_(a, u, dropout)
                masks.append(u)
            else:
                masks.append(None)
            acts.append(a)
        logits = a @ self.weights[-1] + self.biases[-1]
        loss, dlogits = kernels.softmax_xent(logits, y)

        grads_w = [None] * len(self.weights)
        grads_b = [None] * len(self.weights)
        delta = dlogits
        for i in range(len(self.weights) - 1, -1, -1):
            grads_w[i] = acts[i].T @ delta
            grads_b[i] = delta.sum(axis=0)
            if i == 0:
                break
            delta = np.ascontiguousarray(delta @ self.weights[i].T)
            if masks[i - 1] is not None:
                kernels.dropout_(delta, masks[i - 1], dropout)
            kernels.relu_grad_(delta, raw_acts[i - 1])
        grads = []
        for gw, gb in zip(grads_w, grads_b):
            grads.append(gw)
            grads.append(gb)
        return loss, grads

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.parameters()])

    def set_flat(self, vec: np.ndarray) -> None:
        offset = 0
        for p in self.parameters():
            p[...] = vec[offset:offset + p.size].reshape(p.shape)
            offset += p.size


def gradient_check(probe_seed: int = 0, step: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference gradients.

    Runs on a tiny probe (input 8, hidden (6, 4), output 2) with one random
    batch and dropout disabled.
    """
    rng = np.random.default_rng(probe_seed)
    arch = ProbeArchitecture("tiny", (6, 4), 8)
    model = MLPProbe(arch, rng)
    x = rng.normal(size=(16, 8))
    y = rng.integers(0, 2, size=16)

    _, grads = model.loss_and_grads(x, y)
    analytic = np.concatenate([g.ravel() for g in grads])

    theta = model.get_flat()
    numeric = np.empty_like(theta)
    for i in range(theta.size):
        t = theta.copy()
        t[i] = theta[i] + step
        model.set_flat(t)
        hi, _ = model.loss_and_grads(x, y)
        t[i] = theta[i] - step
        model.set_flat(t)
        lo, _ = model.loss_and_grads(x, y)
        numeric[i] = (hi - lo) / (2.0 * step)
    model.set_flat(theta)

    denom = np.maximum(np.abs(analytic) + np.abs(numeric), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))
