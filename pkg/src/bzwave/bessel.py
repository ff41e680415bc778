"""
Bessel functions J0 and J1 of real argument.

Power series for r < 8, Miller backward recurrence for 8 <= r < 25 and the
Hankel asymptotic expansion for r >= 25. Absolute accuracy is about 1e-14
on (0, 50].
"""

import math

import numpy as np


def _series(r, order):
    q = -0.25 * r * r
    term = np.ones_like(r) if order == 0 else 0.5 * r
    total = term.copy()
    for k in range(1, 60):
        term = term * q / (k * (k + order))
        total = total + term
        if np.all(np.abs(term) < 1e-18 * np.maximum(np.abs(total), 1e-300)):
            break
    return total


def _miller(r):
    """Backward recurrence normalized by J0 + 2 sum J_2k = 1. Returns (J0, J1)."""
    j0 = np.empty_like(r)
    j1 = np.empty_like(r)
    for i, x in enumerate(r):
        n = 2 * (int(x + 25 + 2 * math.sqrt(x)) // 2)
        jp, jc = 0.0, 1e-300
        norm = 0.0
        a0 = a1 = 0.0
        for k in range(n, 0, -1):
            jm = 2 * k / x * jc - jp
            jp, jc = jc, jm
            if abs(jc) > 1e250:
                jp *= 1e-250
                jc *= 1e-250
                norm *= 1e-250
            if (k - 1) % 2 == 0 and k - 1 > 0:
                norm += 2 * jc
            if k - 1 == 1:
                a1 = jc
        a0 = jc
        norm += a0
        j0[i] = a0 / norm
        j1[i] = a1 / norm
    return j0, j1


def _hankel(r, nu):
    mu = 4.0 * nu * nu
    p = np.ones_like(r)
    q = np.zeros_like(r)
    term = np.ones_like(r)
    for k in range(1, 200):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * r)
        if k % 2 == 1:
            q = q + (-1) ** ((k - 1) // 2) * term
        else:
            p = p + (-1) ** (k // 2) * term
        if np.all(np.abs(term) < 1e-17):
            break
    chi = r - (0.5 * nu + 0.25) * np.pi
    return np.sqrt(2.0 / (np.pi * r)) * (p * np.cos(chi) - q * np.sin(chi))


def _both(r):
    r = np.abs(np.asarray(r, dtype=float))
    flat = np.atleast_1d(r).ravel()
    j0 = np.empty_like(flat)
    j1 = np.empty_like(flat)
    small = flat < 8
    mid = (flat >= 8) & (flat < 25)
    large = flat >= 25
    if small.any():
        j0[small] = _series(flat[small], 0)
        j1[small] = _series(flat[small], 1)
    if mid.any():
        j0[mid], j1[mid] = _miller(flat[mid])
    if large.any():
        j0[large] = _hankel(flat[large], 0)
        j1[large] = _hankel(flat[large], 1)
    return j0.reshape(r.shape), j1.reshape(r.shape)


def j0(r):
    out = _both(r)[0]
    return float(out) if out.ndim == 0 else out


def j1(r):
    """J1 is odd; the sign of r is restored."""
    out = _both(r)[1] * np.sign(np.asarray(r, dtype=float) + 0.0)
    return float(out) if np.ndim(out) == 0 else out
