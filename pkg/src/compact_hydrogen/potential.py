"""Coulomb potential of a point charge on R^3 x S^1.

Internal units: hbar^2/(2m) = 1 and the Bohr radius a0 = 1, so energies are
measured in hbar^2/(2 m a0^2) and the coupling of the compactified problem is
Z = 4R.

Coordinates on the configuration space are the 3D radial distance ``r`` and
the compact coordinate ``x4`` in [-pi R, pi R].  Every routine here is a pure
function of its arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

__all__ = [
    "BOHR_RADIUS_M",
    "CRITICAL_RADIUS",
    "DomainError",
    "PotentialSpec",
    "SingularPointError",
    "SpacePoint",
    "axial_antiderivative",
    "axial_integral",
    "axial_integral_exact",
    "bohr_to_meters",
    "charge_to_Z",
    "closed_form",
    "compact_potential",
    "critical_radius_physical",
    "far_field_sup",
    "image_sum",
    "meters_to_bohr",
    "reduce_x4",
    "remainder_W",
]

#: CODATA 2018 Bohr radius in meters.
BOHR_RADIUS_M = 5.29177210903e-11

#: Critical compactification radius in units of a0.
CRITICAL_RADIUS = 0.25

# below r/R = _R_SERIES the prefactor (1 - exp(-2t))/t is replaced by its Taylor series
_R_SERIES = 1e-4
_EPS = np.finfo(float).eps


class SingularPointError(ValueError):
    """Raised when the potential is requested at the charge itself."""


class DomainError(ValueError):
    """Raised when x4 lies outside [-pi R, pi R]."""


@dataclass(frozen=True)
class PotentialSpec:
    """Physical configuration: radius ``R``, coupling ``Z`` and image-sum order."""

    R: float
    Z: float
    n_images: int = 100

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError(f"compactification radius must be positive, got {self.R}")
        if int(self.n_images) != self.n_images or self.n_images < 1:
            raise ValueError(f"n_images must be a positive integer, got {self.n_images}")

    @classmethod
    def physical(cls, R: float, n_images: int = 100) -> "PotentialSpec":
        """Configuration with the coupling fixed by the charge relation, Z = 4R."""
        return cls(R=R, Z=charge_to_Z(R), n_images=n_images)


@dataclass(frozen=True)
class SpacePoint:
    r: float
    x4: float

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"radial distance must be non-negative, got {self.r}")


def reduce_x4(x4, R):
    """Map ``x4`` onto the fundamental interval [-pi R, pi R)."""
    period = 2.0 * np.pi * R
    return np.mod(np.asarray(x4, dtype=float) + np.pi * R, period) - np.pi * R


def _check_point(p: SpacePoint, R: float, allow_origin: bool = False):
    if abs(p.x4) > np.pi * R * (1.0 + 1e-12):
        raise DomainError(f"|x4| = {abs(p.x4)} exceeds pi R = {np.pi * R}; reduce x4 first")
    if not allow_origin and p.r == 0.0 and p.x4 == 0.0:
        raise SingularPointError("the potential is singular at (r, x4) = (0, 0)")


def compact_potential(r, x4, R):
    """Vectorised closed form of the compactified potential.

    Uses ``sinh t / (cosh t - cos a) = (1 - e^{-2t}) / ((1 - e^{-t})^2 + 4 e^{-t} sin^2(a/2))``
    with t = r/R and a = x4/R, which neither overflows for large ``r`` nor
    cancels near the charge.
    """
    r = np.asarray(r, dtype=float)
    x4 = np.asarray(x4, dtype=float)
    t = r / R
    em = np.exp(-t)
    den = np.expm1(-t) ** 2 + 4.0 * em * np.sin(0.5 * x4 / R) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        # (1 - e^{-2t}) / t, continued to t = 0
        pref = np.where(
            t < _R_SERIES,
            2.0 - 2.0 * t + (4.0 / 3.0) * t**2 - (2.0 / 3.0) * t**3,
            -np.expm1(-2.0 * t) / t,
        )
        return -pref / (2.0 * R * R * den)


def closed_form(p: SpacePoint, spec: PotentialSpec) -> float:
    """Closed-form value of the compactified potential at ``p``."""
    _check_point(p, spec.R)
    return float(compact_potential(p.r, p.x4, spec.R))


def _image_terms(r, x4, R, n):
    return 1.0 / (r * r + (x4 - 2.0 * np.pi * R * n) ** 2)


def _midpoint_tail(r, x4, R, N):
    """Integral of the image terms over |s| >= N + 1/2, both sides."""
    total = 0.0
    for u0 in (2.0 * np.pi * R * (N + 0.5) - x4, 2.0 * np.pi * R * (N + 0.5) + x4):
        if r < 1e-8 * u0:
            total += 1.0 / u0
        else:
            total += math.atan(r / u0) / r
    return total / (2.0 * np.pi * R)


def image_sum(p: SpacePoint, spec: PotentialSpec, corrected: bool = True, n_images: int | None = None):
    """Method-of-images sum truncated at ``|n| <= N``, N = ``spec.n_images`` by default.

    Returns ``(value, tail_bound)`` with ``|exact - value| <= tail_bound``.

    With ``corrected=False`` the value is the bare partial sum and the bound is
    the comparison series ``sum_{|n|>N} 1/(2 pi R |n| - pi R)^2``.  With
    ``corrected=True`` the omitted terms are replaced by their integral over
    ``|s| > N + 1/2`` (midpoint rule), and the bound is the midpoint-rule
    remainder, O(N^-3) instead of O(N^-1); it is infinite for N = 0.  Both
    bounds include an allowance for floating-point summation.
    """
    _check_point(p, spec.R)
    R = spec.R
    N = int(spec.n_images if n_images is None else n_images)
    if N < 0:
        raise ValueError(f"truncation order must be non-negative, got {N}")
    n = np.arange(-N, N + 1, dtype=float)
    terms = _image_terms(p.r, p.x4, R, n)
    partial = float(np.sum(terms))
    if corrected:
        tail = _midpoint_tail(p.r, p.x4, R, N)
        # |f''| <= 6 (2 pi R)^2 / u^4 with |u| >= 2 pi R (n - 1) on cell n > N
        trunc = math.inf if N == 0 else float(special.polygamma(3, N)) / 6.0 / (2.0 * (2.0 * np.pi * R) ** 2)
    else:
        tail = 0.0
        trunc = float(special.polygamma(1, N + 0.5)) / (2.0 * np.pi**2 * R**2)
    value = partial + tail
    rounding = (math.log2(terms.size) + 8.0) * _EPS * abs(value)
    return -value, trunc + rounding


def remainder_W(p: SpacePoint, spec: PotentialSpec) -> float:
    """The potential minus its bare 4D singularity, ``V_c + 1/(r^2 + x4^2)``.

    Summed directly over the images n != 0, so it is finite and accurate at the
    charge itself.
    """
    _check_point(p, spec.R, allow_origin=True)
    R, N = spec.R, int(spec.n_images)
    n = np.concatenate([np.arange(-N, 0), np.arange(1, N + 1)]).astype(float)
    partial = float(np.sum(_image_terms(p.r, p.x4, R, n)))
    return -(partial + _midpoint_tail(p.r, p.x4, R, N))


def axial_integral(r, spec: PotentialSpec, epsrel: float = 1e-13):
    """Integral of the potential over the compact direction at fixed ``r``.

    Adaptive Gauss-Kronrod quadrature over [0, pi R] (the integrand is even in
    x4).  Accepts a scalar or an array of radii; returns ``(value, error)``.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("axial integral requires r > 0")
    R = spec.R
    scalar = r.ndim == 0
    rv = np.atleast_1d(r)

    def f(x4):
        return compact_potential(rv, x4, R)

    # the peak at x4 = 0 has width ~ r; give the integrator that scale
    pts = sorted({min(float(s), 0.5 * np.pi * R) for s in (rv.min(), 10 * rv.min(), rv.max())})
    edges = [0.0, *[s for s in pts if 0 < s < np.pi * R], np.pi * R]
    val = np.zeros_like(rv)
    err = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad_vec(f, a, b, epsabs=0.0, epsrel=epsrel, norm="max", limit=2000)
        val += v
        err += e
    val, err = 2.0 * val, 2.0 * err
    if scalar:
        return float(val[0]), float(err)
    return val, err


def axial_antiderivative(r, x4, R):
    """Antiderivative in x4 of the potential, continuous on [-pi R, pi R].

    ``-(1/r) arctan(coth(r/2R) tan(x4/2R))``, normalised to vanish at x4 = 0.
    """
    r = np.asarray(r, dtype=float)
    c = 1.0 / np.tanh(0.5 * r / R)
    half = 0.5 * np.asarray(x4, dtype=float) / R
    # tan is unbounded at the end points; arctan of +-inf is +-pi/2
    with np.errstate(over="ignore"):
        ang = np.where(
            np.abs(half) >= 0.5 * np.pi,
            np.sign(half) * 0.5 * np.pi,
            np.arctan(c * np.tan(half)),
        )
    return -ang / r


def axial_integral_exact(r, spec: PotentialSpec):
    """Axial integral from the antiderivative (independent of quadrature)."""
    R = spec.R
    return axial_antiderivative(r, np.pi * R, R) - axial_antiderivative(r, -np.pi * R, R)


def far_field_sup(r0, R):
    """``sup |V_c|`` over all points with 3D radius at least ``r0``.

    The modulus is largest at x4 = 0 and decreases in r, so the supremum is
    ``coth(r0/2R) / (2 R r0)``.
    """
    r0 = np.asarray(r0, dtype=float)
    return 1.0 / (np.tanh(0.5 * r0 / R) * 2.0 * R * r0)


def charge_to_Z(R: float) -> float:
    """Coupling for radius ``R`` (in a0) from e4 = 2 R e3: Z = 4R."""
    if not R > 0:
        raise ValueError(f"radius must be positive, got {R}")
    return 4.0 * R


def critical_radius_physical() -> float:
    """Critical radius a0/4 in meters."""
    return bohr_to_meters(CRITICAL_RADIUS)


def meters_to_bohr(length_m):
    return np.asarray(length_m, dtype=float) / BOHR_RADIUS_M if np.ndim(length_m) else length_m / BOHR_RADIUS_M


def bohr_to_meters(length_a0):
    return np.asarray(length_a0, dtype=float) * BOHR_RADIUS_M if np.ndim(length_a0) else length_a0 * BOHR_RADIUS_M
