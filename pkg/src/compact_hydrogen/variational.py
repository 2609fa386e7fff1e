"""Trial functions and quadratic-form evaluation.

Forms are evaluated for trial functions with a radial profile ``f`` in
dimension ``d``::

    ||psi||^2 = A * int f^2 rho^(d-1) drho
    h0[psi]   = A * int (f'^2 + l(l+d-2) f^2 / rho^2) rho^(d-1) drho

with ``A`` the angular weight.  On R^3 x S^1 the trial functions used here do
not depend on x4 and carry a constant factor ``c`` in the compact direction, so
every integral picks up ``2 pi R c^2`` except the potential term, which is
integrated over x4 explicitly.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

from .potential import PotentialSpec, axial_integral, compact_potential, far_field_sup
from .special import genlaguerre, genlaguerre_deriv, spherical_harmonic

__all__ = [
    "DivergentIntegralError",
    "HydrogenQuantumNumbers",
    "OptimizingSequenceSpec",
    "QuadratureError",
    "RadialProfile",
    "RayleighReport",
    "TrialFunction",
    "cutoff",
    "cutoff_deriv",
    "gaussian_trial",
    "ground_state_bound",
    "hardy_quotient",
    "hydrogen_eigenfunction",
    "instability_rayleigh",
    "lift_to_omega",
    "optimizing_sequence",
    "overlap",
    "power_integral",
    "radial_integral",
    "rayleigh",
    "sequence_diagnostics",
    "shell_trial",
    "sphere_area",
    "weyl_residual",
    "weyl_residual_bound",
    "weyl_seed_norms",
    "weyl_trial",
]

_EPSREL = 1e-12


class DivergentIntegralError(ArithmeticError):
    """A form integral does not converge at the origin."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested accuracy."""

    def __init__(self, message, error_bound):
        super().__init__(f"{message} (achieved error bound {error_bound:.3e})")
        self.error_bound = error_bound


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d."""
    return 2.0 * math.pi ** (d / 2) / gamma_fn(d / 2)


# ---------------------------------------------------------------------------
# quadrature


def _origin_exponent(g, scale):
    """Power p in g(rho) ~ rho^p as rho -> 0, estimated from two tiny radii."""
    r1, r2 = 1e-14 * scale, 1e-12 * scale
    g1, g2 = abs(float(g(r1))), abs(float(g(r2)))
    if g1 == 0.0 or g2 == 0.0:
        return math.inf
    return math.log(g2 / g1) / math.log(r2 / r1)


def radial_integral(g: Callable, a: float, b: float, breakpoints=(), epsrel=_EPSREL):
    """Adaptive Gauss-Kronrod integral of ``g`` over [a, b], ``b`` may be inf.

    When ``a == 0`` the first panel is mapped by rho = e^u so that integrable
    power singularities rho^p (p > -1) turn into exponentials in u; the lower
    end of the u-range is placed where the integrand has decayed by e^-45, but
    not below rho = 1e-300.

    Returns ``(value, error_estimate)``.
    """
    cuts = [c for c in sorted(breakpoints) if a < c < b]
    edges = [a, *cuts, b]
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if lo == 0.0:
            top = hi if math.isfinite(hi) else 1.0
            p = _origin_exponent(g, top)
            if p <= -1.0 + 1e-9:
                raise DivergentIntegralError(f"integrand behaves like rho^{p:.4f} at the origin")
            depth = 45.0 / (p + 1.0) if math.isfinite(p) else 45.0
            u_lo = max(math.log(top) - max(depth, 45.0), math.log(1e-300))
            v, e = _quad(lambda u: g(math.exp(u)) * math.exp(u), u_lo, math.log(top), epsrel)
            total += v
            err += e
            if not math.isfinite(hi):
                v, e = _quad(g, top, math.inf, epsrel)
                total += v
                err += e
        else:
            v, e = _quad(g, lo, hi, epsrel)
            total += v
            err += e
    return total, err


def power_integral(coeff: float, q: float, a: float, epsrel=_EPSREL):
    """int_0^a coeff * rho^q drho (q > -1) by quadrature in u = log rho.

    The integrand coeff * e^{(q+1) u} is evaluated directly in u, so exponents
    q close to -1, whose mass sits at radii far below the double-precision
    range, are handled.
    """
    if q <= -1.0:
        raise DivergentIntegralError(f"rho^{q} is not integrable at the origin")
    s = q + 1.0
    return _quad(lambda u: coeff * math.exp(s * u), -math.inf, math.log(a), epsrel)


def _quad(g, lo, hi, epsrel):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        v, e = integrate.quad(g, lo, hi, epsabs=0.0, epsrel=epsrel, limit=1000)
    if caught and not abs(e) <= 1e-6 * max(abs(v), 1e-300):
        raise QuadratureError("radial quadrature did not converge", e)
    return v, e


# ---------------------------------------------------------------------------
# trial functions


@dataclass(frozen=True)
class RadialProfile:
    """Radial factor of a separable trial function.

    ``power_core = (a, p)`` declares that f is exactly proportional to rho^p on
    (0, a]; form integrals over that core are then done in u = log rho without
    evaluating f at radii that underflow.  ``x4_factor`` is the constant value of the function's dependence on the
    compact coordinate when it lives on R^3 x S^1 (``period_R`` set).
    """

    f: Callable
    df: Callable | None
    dim: int
    l: int = 0
    angular_weight: float = 1.0
    breakpoints: tuple = ()
    period_R: float | None = None
    x4_factor: float = 1.0
    power_core: tuple[float, float] | None = None

    def core_coeff(self) -> float:
        """Coefficient c with f = c rho^p on (0, a] for ``power_core = (a, p)``."""
        a, p = self.power_core
        return float(self.f(a)) / a**p


@dataclass(frozen=True)
class TrialFunction:
    """An evaluable wavefunction.

    ``evaluate`` and ``gradient`` act on Cartesian points of shape (..., D)
    where D is 4 on R^4 and on R^3 x S^1 and 3 on R^3.  ``support`` is the
    radial interval outside of which the function vanishes.
    """

    kind: str
    params: Mapping
    support: tuple[float, float]
    analytic_gradient: bool
    evaluate: Callable = field(repr=False)
    gradient: Callable | None = field(default=None, repr=False)
    radial: RadialProfile | None = field(default=None, repr=False)

    def __call__(self, x):
        return self.evaluate(np.asarray(x, dtype=float))

    @property
    def norm_sq(self) -> float:
        return _norm_sq(self.radial)[0]


def _radial_trial(kind, params, support, prof: RadialProfile, angular=None):
    """Build Cartesian evaluators from a radial profile."""
    d = prof.dim
    spatial = 3 if prof.period_R is not None else d

    def evaluate(x):
        xs = x[..., :spatial]
        rho = np.sqrt(np.sum(xs * xs, axis=-1))
        val = prof.f(rho) * prof.x4_factor
        if angular is not None:
            val = val * angular(xs)
        elif prof.angular_weight == 1.0:
            val = val / math.sqrt(sphere_area(spatial))
        return val

    gradient = None
    if prof.df is not None and prof.l == 0:

        def gradient(x):
            xs = x[..., :spatial]
            rho = np.sqrt(np.sum(xs * xs, axis=-1))
            scale = prof.df(rho) * prof.x4_factor / rho
            if prof.angular_weight == 1.0:
                scale = scale / math.sqrt(sphere_area(spatial))
            g = np.zeros(x.shape, dtype=float)
            g[..., :spatial] = xs * scale[..., None]
            return g

    return TrialFunction(
        kind=kind,
        params=dict(params),
        support=support,
        analytic_gradient=gradient is not None,
        evaluate=evaluate,
        gradient=gradient,
        radial=prof,
    )


def gaussian_trial(dim: int = 4, width: float = 1.0) -> TrialFunction:
    """psi(x) = exp(-|x|^2 / (2 width^2)) on R^dim, unnormalised."""
    w2 = width * width

    def f(rho):
        return np.exp(-0.5 * np.square(rho) / w2)

    def df(rho):
        return -rho / w2 * f(rho)

    prof = RadialProfile(f=f, df=df, dim=dim, angular_weight=sphere_area(dim), breakpoints=(width,))
    return _radial_trial(f"radial-{dim}d", {"width": width}, (0.0, math.inf), prof)


@dataclass(frozen=True)
class OptimizingSequenceSpec:
    """Index ``n`` and cutoff scale ``delta`` of the Hardy optimizing sequence."""

    n: int
    delta: float = 0.4

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"sequence index must be >= 1, got {self.n}")
        if not 0.0 < self.delta < 0.5:
            raise ValueError(f"cutoff scale must lie in (0, 1/2), got {self.delta}")


def cutoff(t, delta):
    """Plateau cutoff: 1 on |t| <= delta, 0 on |t| >= 3 delta/2.

    On the bridge, exp(1 - 1/(1 - s^2)) with s = (2|t| - 2 delta)/delta; the
    join at |t| = delta is C^1.
    """
    a = np.abs(np.asarray(t, dtype=float))
    s = (2.0 * a - 2.0 * delta) / delta
    bridge = (a > delta) & (s < 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        val = np.exp(1.0 - 1.0 / (1.0 - s * s))
    return np.where(a <= delta, 1.0, np.where(bridge, val, 0.0))


def cutoff_deriv(t, delta):
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    s = (2.0 * a - 2.0 * delta) / delta
    bridge = (a > delta) & (s < 1.0)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        one = 1.0 - s * s
        val = np.exp(1.0 - 1.0 / one) * (-2.0 * s / one**2) * (2.0 / delta) * np.sign(t)
    return np.where(bridge, val, 0.0)


def optimizing_sequence(spec: OptimizingSequenceSpec) -> TrialFunction:
    """psi_n(x) = |x|^(-1 + 1/n) eta(|x|) on R^4."""
    n, delta = spec.n, spec.delta
    p = -1.0 + 1.0 / n

    def f(rho):
        rho = np.asarray(rho, dtype=float)
        return rho**p * cutoff(rho, delta)

    def df(rho):
        rho = np.asarray(rho, dtype=float)
        return p * rho ** (p - 1.0) * cutoff(rho, delta) + rho**p * cutoff_deriv(rho, delta)

    prof = RadialProfile(
        f=f, df=df, dim=4, angular_weight=sphere_area(4), breakpoints=(delta,), power_core=(delta, p)
    )
    return _radial_trial("radial-4d", {"n": n, "delta": delta}, (0.0, 1.5 * delta), prof)


@dataclass(frozen=True)
class HydrogenQuantumNumbers:
    N: int
    l: int = 0
    m: int = 0

    def __post_init__(self):
        if self.N < 1 or not 0 <= self.l < self.N or abs(self.m) > self.l:
            raise ValueError(f"invalid hydrogen quantum numbers (N={self.N}, l={self.l}, m={self.m})")


def _hydrogen_radial(N, l):
    k = N - l - 1
    alpha = 2 * l + 1
    norm = math.sqrt((2.0 / N) ** 3 * math.factorial(k) / (2.0 * N * math.factorial(N + l)))

    def f(r):
        x = 2.0 * np.asarray(r, dtype=float) / N
        return norm * np.exp(-0.5 * x) * x**l * genlaguerre(k, alpha, x)

    def df(r):
        x = 2.0 * np.asarray(r, dtype=float) / N
        L = genlaguerre(k, alpha, x)
        dL = genlaguerre_deriv(k, alpha, x)
        xl1 = x ** (l - 1) if l > 0 else np.zeros_like(x)
        dx = (l * xl1 * L - 0.5 * x**l * L + x**l * dL) * np.exp(-0.5 * x)
        return norm * dx * 2.0 / N

    return f, df


def hydrogen_eigenfunction(q: HydrogenQuantumNumbers) -> TrialFunction:
    """Normalised 3D hydrogen eigenfunction (a0 = 1), eigenvalue -1/N^2 of -Delta - 2/r."""
    f, df = _hydrogen_radial(q.N, q.l)

    def angular(xs):
        rho = np.sqrt(np.sum(xs * xs, axis=-1))
        with np.errstate(invalid="ignore", divide="ignore"):
            cos_t = np.where(rho > 0, xs[..., 2] / np.where(rho > 0, rho, 1.0), 1.0)
        theta = np.arccos(np.clip(cos_t, -1.0, 1.0))
        phi = np.arctan2(xs[..., 1], xs[..., 0])
        y = spherical_harmonic(q.l, q.m, theta, phi)
        return y.real if q.m == 0 else y

    prof = RadialProfile(f=f, df=df, dim=3, l=q.l, angular_weight=1.0, breakpoints=(float(q.N),))
    return _radial_trial(
        "hydrogen-3d", {"N": q.N, "l": q.l, "m": q.m}, (0.0, math.inf), prof, angular=angular
    )


def lift_to_omega(psi: TrialFunction, R: float) -> TrialFunction:
    """(2 pi R)^(-1/2) psi, extended constantly along the compact direction."""
    prof = psi.radial
    if prof is None or prof.dim != 3:
        raise ValueError("only 3D radial trial functions can be lifted")
    if prof.period_R is not None:
        raise ValueError("trial function already lives on R^3 x S^1")
    lifted = replace(prof, period_R=R, x4_factor=prof.x4_factor / math.sqrt(2.0 * math.pi * R))
    inner = psi.evaluate

    def evaluate(x):
        return inner(x[..., :3]) / math.sqrt(2.0 * math.pi * R)

    gradient = None
    if psi.gradient is not None:
        g3 = psi.gradient

        def gradient(x):
            out = np.zeros(x.shape, dtype=np.result_type(float, g3(x[..., :3]).dtype))
            out[..., :3] = g3(x[..., :3]) / math.sqrt(2.0 * math.pi * R)
            return out

    return TrialFunction(
        kind=psi.kind,
        params={**psi.params, "R": R},
        support=psi.support,
        analytic_gradient=psi.analytic_gradient,
        evaluate=evaluate,
        gradient=gradient,
        radial=lifted,
    )


def _bump(s):
    """exp(-1/(1 - s^2)) on |s| < 1 and its first two s-derivatives."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        one = np.where(inside, 1.0 - s * s, 1.0)
        b = np.where(inside, np.exp(-1.0 / one), 0.0)
        g1 = -2.0 * s / one**2
        g2 = -2.0 / one**2 - 8.0 * s * s / one**3
    return b, np.where(inside, b * g1, 0.0), np.where(inside, b * (g1 * g1 + g2), 0.0)


_SHELL_CACHE: dict = {}


def _shell_norm():
    if "c" not in _SHELL_CACHE:
        v, _ = integrate.quad(lambda r: _bump(2 * r - 3)[0] ** 2 * r * r, 1.0, 2.0, epsabs=0, epsrel=1e-13)
        _SHELL_CACHE["c"] = 1.0 / math.sqrt(v)
    return _SHELL_CACHE["c"]


def shell_trial(rho: float, R: float) -> TrialFunction:
    """Normalised x4-independent shell function supported in rho < r < 2 rho.

    The unit profile is c * exp(-1/(1 - (2r - 3)^2)) on 1 < r < 2, rescaled by
    rho^(-3/2) f(r/rho) and divided by sqrt(2 pi R) along the circle.
    """
    if not rho > 0:
        raise ValueError("shell scale must be positive")
    c = _shell_norm()
    scale = rho**-1.5

    def f(r):
        return scale * c * _bump(2.0 * np.asarray(r, dtype=float) / rho - 3.0)[0]

    def df(r):
        return scale * c * _bump(2.0 * np.asarray(r, dtype=float) / rho - 3.0)[1] * 2.0 / rho

    prof = RadialProfile(
        f=f, df=df, dim=3, breakpoints=(rho, 1.5 * rho, 2 * rho), period_R=R,
        x4_factor=1.0 / math.sqrt(2.0 * math.pi * R),
    )
    return _radial_trial("shell", {"rho": rho, "R": R}, (rho, 2.0 * rho), prof)


# ---------------------------------------------------------------------------
# forms


@dataclass(frozen=True)
class RayleighReport:
    kinetic: float
    potential: float
    total: float
    norm_sq: float
    quotient: float
    quadrature_error: float
    Z: float

    @classmethod
    def assemble(cls, kinetic, potential, norm_sq, Z, quadrature_error):
        if not norm_sq > 0:
            raise ValueError("trial function has zero norm")
        total = kinetic + Z * potential
        return cls(kinetic, potential, total, norm_sq, total / norm_sq, quadrature_error, Z)


def _compact_weight(prof: RadialProfile) -> float:
    if prof.period_R is None:
        return 1.0
    return 2.0 * math.pi * prof.period_R * prof.x4_factor**2


def _integrate_profile(prof: RadialProfile, g, core_power=None):
    """int_0^inf g; ``core_power = (K, q)`` gives g = K rho^q on the power core."""
    if prof.power_core is None or core_power is None:
        return radial_integral(g, 0.0, math.inf, prof.breakpoints)
    a = prof.power_core[0]
    v1, e1 = power_integral(core_power[0], core_power[1], a)
    v2, e2 = radial_integral(g, a, math.inf, prof.breakpoints)
    return v1 + v2, e1 + e2


def _core(prof: RadialProfile, coeff_sq_factor, extra_power):
    if prof.power_core is None:
        return None
    c = prof.core_coeff()
    p = prof.power_core[1]
    return coeff_sq_factor(p) * c * c, 2 * p + extra_power


def _norm_sq(prof: RadialProfile):
    d = prof.dim
    core = _core(prof, lambda p: 1.0, d - 1)
    v, e = _integrate_profile(prof, lambda r: prof.f(r) ** 2 * r ** (d - 1), core)
    w = prof.angular_weight * _compact_weight(prof)
    return w * v, w * e


def _kinetic(prof: RadialProfile):
    if prof.df is None:
        raise ValueError("kinetic form needs the profile derivative")
    d, l = prof.dim, prof.l
    cent = l * (l + d - 2)

    def g(r):
        val = prof.df(r) ** 2 * r ** (d - 1)
        if cent:
            val = val + cent * prof.f(r) ** 2 * r ** (d - 3)
        return val

    core = _core(prof, lambda p: p * p + cent, d - 3)
    v, e = _integrate_profile(prof, g, core)
    w = prof.angular_weight * _compact_weight(prof)
    return w * v, w * e


def _singular(prof: RadialProfile):
    """int |psi|^2 / |x|^2 over R^d."""
    d = prof.dim
    core = _core(prof, lambda p: 1.0, d - 3)
    v, e = _integrate_profile(prof, lambda r: prof.f(r) ** 2 * r ** (d - 3), core)
    w = prof.angular_weight * _compact_weight(prof)
    return w * v, w * e


def _trapezoid_axial(r: float, R: float) -> float:
    """Integral of the potential over x4 by the periodic trapezoid rule.

    The integrand is analytic in a strip of half-width r/R (in x4/R), so
    M = 40 R / r nodes give an error ~ exp(-40).
    """
    m = int(min(max(64, 2 ** math.ceil(math.log2(40.0 * R / r))), 2**16))
    x4 = -math.pi * R + 2.0 * math.pi * R * np.arange(m) / m
    return float(np.sum(compact_potential(r, x4, R))) * 2.0 * math.pi * R / m


def _omega_potential(prof: RadialProfile, R: float):
    """int_Omega V_c |psi|^2 by a product rule: adaptive in r, trapezoid in x4."""
    c2 = prof.x4_factor**2 * prof.angular_weight

    def g(r):
        if r <= 0.0:
            return 0.0
        return float(prof.f(r)) ** 2 * r * r * _trapezoid_axial(r, R)

    # the 1/r behaviour of the x4 integral is mild; no log map is needed
    edges = [0.0, *[b for b in prof.breakpoints if b > 0], math.inf]
    total, err = 0.0, 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = integrate.quad(g, lo, hi, epsabs=0.0, epsrel=1e-11, limit=500)
        total += v
        err += e
    return c2 * total, c2 * err


def rayleigh(psi: TrialFunction, spec: PotentialSpec, domain: str = "omega") -> RayleighReport:
    """Quadratic forms h0, v and h = h0 + Z v of ``psi``.

    ``domain`` is ``"R4"`` (potential -1/|x|^2), ``"omega"`` (R^3 x S^1 with
    the compactified potential, integrated over x4 numerically) or ``"R3"``
    (the x4-average -1/(2 R r) of the compactified potential).
    """
    prof = psi.radial
    if prof is None:
        raise ValueError(f"trial function of kind {psi.kind!r} has no radial form")
    norm, e_norm = _norm_sq(prof)
    kin, e_kin = _kinetic(prof)
    if domain == "R4":
        if prof.dim != 4:
            raise ValueError("R4 forms need a 4D radial profile")
        sing, e_pot = _singular(prof)
        pot = -sing
    elif domain == "R3":
        if prof.dim != 3 or prof.period_R is not None:
            raise ValueError("R3 forms need a 3D profile on R^3")
        v, e_pot = _integrate_profile(prof, lambda r: prof.f(r) ** 2 * r, _core(prof, lambda p: 1.0, 1))
        pot = -prof.angular_weight * v / (2.0 * spec.R)
        e_pot = prof.angular_weight * e_pot / (2.0 * spec.R)
    elif domain == "omega":
        if prof.period_R is None:
            raise ValueError("trial function is not defined on R^3 x S^1; use lift_to_omega")
        if not math.isclose(prof.period_R, spec.R, rel_tol=1e-12):
            raise ValueError(f"trial function lives on a circle of radius {prof.period_R}, not {spec.R}")
        pot, e_pot = _omega_potential(prof, spec.R)
    else:
        raise ValueError(f"unknown domain {domain!r}")
    err = e_kin + abs(spec.Z) * e_pot + e_norm
    return RayleighReport.assemble(kin, pot, norm, spec.Z, err)


def overlap(a: TrialFunction, b: TrialFunction) -> float:
    """Inner product of two x4-independent, angularly identical radial trial functions."""
    pa, pb = a.radial, b.radial
    if pa is None or pb is None:
        raise ValueError("overlap needs radial trial functions")
    if (pa.dim, pa.l, pa.angular_weight, pa.period_R) != (pb.dim, pb.l, pb.angular_weight, pb.period_R):
        raise ValueError("trial functions live on different spaces or angular sectors")
    d = pa.dim
    lo = max(a.support[0], b.support[0])
    hi = min(a.support[1], b.support[1])
    if lo >= hi:
        return 0.0
    cuts = tuple(sorted({*pa.breakpoints, *pb.breakpoints}))
    v, _ = radial_integral(lambda r: pa.f(r) * pb.f(r) * r ** (d - 1), lo, hi, cuts)
    compact = 1.0 if pa.period_R is None else 2.0 * math.pi * pa.period_R * pa.x4_factor * pb.x4_factor
    return pa.angular_weight * compact * v


def hardy_quotient(psi: TrialFunction, d: int = 4) -> float:
    """int |grad psi|^2 / ((d-2)^2/4 int |psi|^2/|x|^2); at least 1 for d >= 3."""
    if d < 3:
        raise ValueError("the Hardy inequality needs d >= 3")
    prof = psi.radial
    if prof is None or prof.dim != d or prof.period_R is not None:
        raise ValueError(f"need a radial trial function on R^{d}")
    kin, _ = _kinetic(prof)
    sing, _ = _singular(prof)
    return kin / (0.25 * (d - 2) ** 2 * sing)


def sequence_diagnostics(spec: OptimizingSequenceSpec) -> dict:
    """Computed stand-ins for the constants of the instability argument.

    ``norm_sq`` (between C1 and C2), ``gap`` = h0 - int|psi|^2/|x|^2 (bounded
    by C3) and ``singular_per_n`` (at least C4).
    """
    prof = optimizing_sequence(spec).radial
    norm, _ = _norm_sq(prof)
    kin, _ = _kinetic(prof)
    sing, _ = _singular(prof)
    return {
        "norm_sq": norm,
        "kinetic": kin,
        "singular": sing,
        "gap": kin - sing,
        "singular_per_n": sing / spec.n,
    }


def instability_rayleigh(Z: float, spec: OptimizingSequenceSpec) -> RayleighReport:
    """Rayleigh quotient of psi_n for -Delta - Z/|x|^2 on R^4."""
    return rayleigh(optimizing_sequence(spec), PotentialSpec(R=1.0, Z=Z), domain="R4")


def ground_state_bound(R: float, n_nodes: int = 48) -> RayleighReport:
    """Forms of (2 pi R)^(-1/2) phi_100 on R^3 x S^1 with Z = 4R.

    The potential term is reduced with the axial integral,
    v = (1/(2 pi R)) int |phi_100|^2 (int V dx4) d^3x, evaluated by composite
    Gauss-Legendre quadrature in log r; the error estimate compares two rules.
    """
    spec = PotentialSpec.physical(R)
    psi = lift_to_omega(hydrogen_eigenfunction(HydrogenQuantumNumbers(1, 0, 0)), R)
    prof = psi.radial
    kin, e_kin = _kinetic(prof)
    norm, e_norm = _norm_sq(prof)

    def outer(panels):
        edges = np.linspace(math.log(1e-9), math.log(60.0), panels + 1)
        xg, wg = np.polynomial.legendre.leggauss(16)
        mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
        half = 0.5 * np.diff(edges)[:, None]
        u = (mid + half * xg).ravel()
        w = (half * wg).ravel()
        r = np.exp(u)
        axial, e_ax = axial_integral(r, spec)
        integrand = prof.f(r) ** 2 * r**3 * axial
        # quad_vec reports an absolute error in the max norm; make it relative
        rel = e_ax / float(np.max(np.abs(axial)))
        value = float(np.sum(w * integrand)) * prof.x4_factor**2
        return value, rel * float(np.sum(w * np.abs(integrand))) * prof.x4_factor**2

    pot, e_ax = outer(n_nodes)
    pot_coarse, _ = outer(n_nodes // 2)
    err = e_kin + e_norm + spec.Z * (abs(pot - pot_coarse) + e_ax)
    return RayleighReport.assemble(kin, pot, norm, spec.Z, err)


# ---------------------------------------------------------------------------
# Weyl sequences

_GAUSS_NODES = 96


def _seed_axis():
    """Gauss-Legendre nodes on the seed interval (1, 2) with bump values."""
    xg, wg = np.polynomial.legendre.leggauss(_GAUSS_NODES)
    y = 1.5 + 0.5 * xg
    b, db, d2b = _bump(2.0 * y - 3.0)
    return y, 0.5 * wg, b, 2.0 * db, 4.0 * d2b


def weyl_seed_norms() -> dict:
    """Norms of the product-bump seed phi(y) = c b(y1) b(y2) b(y3), ||phi|| = 1.

    Separable, so only one-dimensional integrals are needed:
    ||grad phi||^2 = 3 c^2 B1 B0^2 and ||Lap phi||^2 = c^2 (3 B2 B0^2 + 6 B1^2 B0)
    with B0 = int b^2, B1 = int b'^2, B2 = int b''^2.
    """
    quad = lambda g: integrate.quad(g, 1.0, 2.0, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    B0 = quad(lambda y: _bump(2 * y - 3)[0] ** 2)
    B1 = quad(lambda y: (2 * _bump(2 * y - 3)[1]) ** 2)
    B2 = quad(lambda y: (4 * _bump(2 * y - 3)[2]) ** 2)
    c2 = 1.0 / B0**3
    return {
        "c": math.sqrt(c2),
        "grad": math.sqrt(3.0 * c2 * B1 * B0**2),
        "laplacian": math.sqrt(c2 * (3.0 * B2 * B0**2 + 6.0 * B1**2 * B0)),
    }


def weyl_trial(k: float, n: int, R: float) -> TrialFunction:
    """psi_n = (2 pi R)^(-1/2) phi_n(x) exp(i (k,k,k).x) on R^3 x S^1.

    phi_n(x) = n^(-3/2) phi(x/n - n) is supported in the cube [n^2+n, n^2+2n]^3.
    """
    c = weyl_seed_norms()["c"]
    K = np.array([k, k, k], dtype=float)
    lift = 1.0 / math.sqrt(2.0 * math.pi * R)

    def parts(x):
        y = x[..., :3] / n - n
        b, db, _ = _bump(2.0 * y - 3.0)
        return b, 2.0 * db

    def evaluate(x):
        b, _ = parts(x)
        phase = np.exp(1j * (x[..., :3] @ K))
        return lift * c * n**-1.5 * np.prod(b, axis=-1) * phase

    def gradient(x):
        b, db = parts(x)
        phi = np.prod(b, axis=-1)
        g = np.zeros(x.shape, dtype=complex)
        for i in range(3):
            others = np.prod(np.delete(b, i, axis=-1), axis=-1)
            g[..., i] = db[..., i] * others / n + 1j * K[i] * phi
        phase = np.exp(1j * (x[..., :3] @ K))
        return lift * c * n**-1.5 * g * phase[..., None]

    lo = math.sqrt(3.0) * (n * n + n)
    return TrialFunction(
        kind="weyl",
        params={"k": k, "n": n, "R": R},
        support=(lo, math.sqrt(3.0) * (n * n + 2 * n)),
        analytic_gradient=True,
        evaluate=evaluate,
        gradient=gradient,
    )


def weyl_residual(k: float, n: int, R: float, Z: float | None = None, n_x4: int = 16) -> float:
    """||(-Delta + Z V_c - 3 k^2) psi_n|| for the Weyl function of :func:`weyl_trial`.

    With psi = phi e^{iK.x} the residual density is
    (-Lap phi + Z V phi)^2 + 4 (K . grad phi)^2.  In the seed coordinates
    y = x/n - n this becomes (-Lap_y phi / n^2 + Z V phi)^2 + 4 (K . grad_y phi)^2 / n^2,
    averaged over x4 (trapezoid) and integrated over the unit cube by tensor
    Gauss-Legendre quadrature.
    """
    if n < 1 or k < 0:
        raise ValueError("need n >= 1 and k >= 0")
    Z = 4.0 * R if Z is None else Z
    c = weyl_seed_norms()["c"]
    y, w, b, db, d2b = _seed_axis()
    B = lambda a, i: a.reshape([-1 if j == i else 1 for j in range(3)])
    phi = c * B(b, 0) * B(b, 1) * B(b, 2)
    lap = c * (B(d2b, 0) * B(b, 1) * B(b, 2) + B(b, 0) * B(d2b, 1) * B(b, 2) + B(b, 0) * B(b, 1) * B(d2b, 2))
    kgrad = c * k * (B(db, 0) * B(b, 1) * B(b, 2) + B(b, 0) * B(db, 1) * B(b, 2) + B(b, 0) * B(b, 1) * B(db, 2))
    weight = B(w, 0) * B(w, 1) * B(w, 2)
    density = 4.0 * kgrad**2 / n**2
    if Z != 0.0:
        x = n * (np.stack(np.meshgrid(y, y, y, indexing="ij"), axis=-1) + n)
        r = np.sqrt(np.sum(x * x, axis=-1))
        x4 = -math.pi * R + 2.0 * math.pi * R * np.arange(n_x4) / n_x4
        sq = np.zeros_like(r)
        for t in x4:
            sq += (-lap / n**2 + Z * compact_potential(r, t, R) * phi) ** 2
        density = density + sq / n_x4
    else:
        density = density + (lap / n**2) ** 2
    return math.sqrt(float(np.sum(weight * density)))


def weyl_residual_bound(k: float, n: int, R: float, Z: float | None = None) -> float:
    """sqrt(||Lap phi_n||^2 + 12 k^2 ||grad phi_n||^2) + |Z| sup_{Omega_n} |V_c|."""
    Z = 4.0 * R if Z is None else Z
    s = weyl_seed_norms()
    kin = math.sqrt((s["laplacian"] / n**2) ** 2 + 12.0 * k * k * (s["grad"] / n) ** 2)
    return kin + abs(Z) * float(far_field_sup(math.sqrt(3.0) * n, R))
