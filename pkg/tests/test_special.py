import math

import numpy as np
import pytest
from scipy import special as sps

from compact_hydrogen import special


@pytest.mark.parametrize("n", [0, 1, 2, 5, 12])
@pytest.mark.parametrize("alpha", [0.0, 1.0, 3.0, 7.5])
def test_laguerre_against_scipy(n, alpha):
    x = np.linspace(0, 30, 61)
    np.testing.assert_allclose(special.genlaguerre(n, alpha, x), sps.eval_genlaguerre(n, alpha, x), rtol=1e-11, atol=1e-11)


def test_laguerre_derivative():
    x, h = np.linspace(0.5, 10, 20), 1e-6
    for n, alpha in [(1, 1.0), (4, 3.0), (7, 5.0)]:
        fd = (special.genlaguerre(n, alpha, x + h) - special.genlaguerre(n, alpha, x - h)) / (2 * h)
        np.testing.assert_allclose(special.genlaguerre_deriv(n, alpha, x), fd, rtol=1e-6, atol=1e-6)
    assert np.all(special.genlaguerre_deriv(0, 1.0, x) == 0)


@pytest.mark.parametrize("l", range(7))
def test_legendre_against_scipy(l):
    x = np.linspace(-1, 1, 41)
    for m in range(l + 1):
        # scipy's lpmv includes the Condon-Shortley phase as well
        np.testing.assert_allclose(special.assoc_legendre(l, m, x), sps.lpmv(m, l, x), rtol=1e-12, atol=1e-12)


def test_legendre_rejects_bad_orders():
    with pytest.raises(ValueError):
        special.assoc_legendre(2, 3, 0.1)


def test_spherical_harmonics_orthonormal():
    # Gauss-Legendre in cos(theta) times a uniform rule in phi is exact here
    xg, wg = np.polynomial.legendre.leggauss(24)
    phi = 2 * math.pi * np.arange(32) / 32
    T, P = np.meshgrid(np.arccos(xg), phi, indexing="ij")
    W = np.outer(wg, np.full(32, 2 * math.pi / 32))
    modes = [(l, m) for l in range(4) for m in range(-l, l + 1)]
    Y = [special.spherical_harmonic(l, m, T, P) for l, m in modes]
    G = np.array([[np.sum(W * np.conj(a) * b) for b in Y] for a in Y])
    np.testing.assert_allclose(G, np.eye(len(modes)), atol=1e-12)


def test_y00_and_y10():
    assert special.spherical_harmonic(0, 0, 0.3, 1.0) == pytest.approx(1 / math.sqrt(4 * math.pi))
    assert special.spherical_harmonic(1, 0, 0.0, 0.0) == pytest.approx(math.sqrt(3 / (4 * math.pi)))
