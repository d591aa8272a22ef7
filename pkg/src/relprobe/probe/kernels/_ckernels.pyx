# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled training hot kernels: fused elementwise ops for the probe loop.

Mirrors `_pykernels` exactly (same signatures, same per-element operation
order) so the two backends agree to floating-point roundoff.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt

cnp.import_array()


def relu_(double[:, ::1] x):
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(x.shape[0]):
            for j in range(x.shape[1]):
                if x[i, j] < 0.0:
                    x[i, j] = 0.0


def relu_grad_(double[:, ::1] grad, double[:, ::1] act):
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(grad.shape[0]):
            for j in range(grad.shape[1]):
                if act[i, j] <= 0.0:
                    grad[i, j] = 0.0


def dropout_(double[:, ::1] x, double[:, ::1] u, double p):
    cdef Py_ssize_t i, j
    cdef double scale = 1.0 / (1.0 - p)
    with nogil:
        for i in range(x.shape[0]):
            for j in range(x.shape[1]):
                if u[i, j] >= p:
                    x[i, j] *= scale
                else:
                    x[i, j] = 0.0


def softmax_xent(double[:, ::1] logits, long[::1] labels):
    cdef Py_ssize_t n = logits.shape[0]
    cdef Py_ssize_t k = logits.shape[1]
    cdef Py_ssize_t i, j
    cdef double m, z, loss = 0.0
    grad_arr = np.empty((n, k), dtype=np.float64)
    cdef double[:, ::1] grad = grad_arr
    with nogil:
        for i in range(n):
            m = logits[i, 0]
            for j in range(1, k):
                if logits[i, j] > m:
                    m = logits[i, j]
            z = 0.0
            for j in range(k):
                grad[i, j] = exp(logits[i, j] - m)
                z += grad[i, j]
            for j in range(k):
                grad[i, j] /= z
            loss -= log(grad[i, labels[i]] + 1e-300)
            grad[i, labels[i]] -= 1.0
            for j in range(k):
                grad[i, j] /= n
    return loss / n, grad_arr


def adam_(double[::1] param, double[::1] grad, double[::1] m, double[::1] v,
          double lr, double beta1, double beta2, double eps,
          double bc1, double bc2):
    cdef Py_ssize_t i
    with nogil:
        for i in range(param.shape[0]):
            m[i] = beta1 * m[i] + (1.0 - beta1) * grad[i]
            v[i] = beta2 * v[i] + (1.0 - beta2) * grad[i] * grad[i]
            param[i] -= lr * (m[i] / bc1) / (sqrt(v[i] / bc2) + eps)
