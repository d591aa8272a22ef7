"""Pure-numpy implementations of the training hot kernels.

Fallback backend; the compiled Cython module `_ckernels` provides the same
functions with fused loops. All arrays are float64 and C-contiguous.
"""

from __future__ import annotations

import numpy as np


def relu_(x):
    """In-place rectifier."""
    np.maximum(x, 0.0, out=x)


def relu_grad_(grad, act):
    """Zero the gradient wherever the (pre-dropout) activation was clipped."""
    grad[act <= 0.0] = 0.0


def dropout_(x, u, p):
    """In-place inverted dropout driven by uniforms u; same op for fwd and bwd."""
    x *= (u >= p) / (1.0 - p)


def softmax_xent(logits, labels):
    """Mean cross-entropy over the batch and the gradient w.r.t. the logits."""
    m = logits.max(axis=1, keepdims=True)
    e = np.exp(logits - m)
    z = e.sum(axis=1, keepdims=True)
    probs = e / z
    n = logits.shape[0]
    loss = float(-np.log(probs[np.arange(n), labels] + 1e-300).sum() / n)
    grad = probs
    grad[np.arange(n), labels] -= 1.0
    grad /= n
    return loss, grad


def adam_(param, grad, m, v, lr, beta1, beta2, eps, bc1, bc2):
    """Fused Adam update on flat views; bc1/bc2 are the bias corrections 1-beta^t."""
    m *= beta1
    m += (1.0 - beta1) * grad
    v *= beta2
    v += (1.0 - beta2) * grad * grad
    param -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
