"""Orthogonal polynomials by three-term recurrence."""

from __future__ import annotations

import math

import numpy as np


def genlaguerre(n: int, alpha: float, x):
    """Generalised Laguerre polynomial L_n^alpha(x).

    (k+1) L_{k+1} = (2k + 1 + alpha - x) L_k - (k + alpha) L_{k-1}
    """
    x = np.asarray(x, dtype=float)
    if n < 0:
        raise ValueError("degree must be non-negative")
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 1.0 + alpha - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur


def genlaguerre_deriv(n: int, alpha: float, x):
    """d/dx L_n^alpha(x) = -L_{n-1}^{alpha+1}(x)."""
    if n == 0:
        return np.zeros_like(np.asarray(x, dtype=float))
    return -genlaguerre(n - 1, alpha + 1, x)


def assoc_legendre(l: int, m: int, x):
    """Associated Legendre function P_l^m(x), Condon-Shortley phase, m >= 0.

    Upward recurrence in degree from the closed-form diagonal P_m^m.
    """
    if m < 0 or l < m:
        raise ValueError(f"need 0 <= m <= l, got l={l}, m={m}")
    x = np.asarray(x, dtype=float)
    somx2 = np.sqrt(np.clip((1.0 - x) * (1.0 + x), 0.0, None))
    pmm = np.ones_like(x)
    fact = 1.0
    for _ in range(m):
        pmm = -pmm * fact * somx2
        fact += 2.0
    if l == m:
        return pmm
    pmmp1 = x * (2 * m + 1) * pmm
    if l == m + 1:
        return pmmp1
    for ll in range(m + 2, l + 1):
        pmm, pmmp1 = pmmp1, ((2 * ll - 1) * x * pmmp1 - (ll + m - 1) * pmm) / (ll - m)
    return pmmp1


def spherical_harmonic(l: int, m: int, theta, phi):
    """Orthonormal Y_l^m(theta, phi) built on :func:`assoc_legendre`."""
    am = abs(m)
    norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.factorial(l - am) / math.factorial(l + am))
    p = assoc_legendre(l, am, np.cos(theta))
    y = norm * p * np.exp(1j * am * np.asarray(phi, dtype=float))
    if m < 0:
        y = (-1) ** am * np.conj(y)
    return y
