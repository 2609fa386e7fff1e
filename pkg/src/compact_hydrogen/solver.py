"""Finite-difference Schrodinger operators and their lowest eigenvalues.

Two discretisations are provided:

* the reduced radial operator -d^2/drho^2 - gamma/rho^2 of the problem in R^4,
* the (r, x4) operator -d_r^2 - d_x4^2 + l(l+1)/r^2 + Z V_c(r, x4) obtained on
  R^3 x S^1 after the substitution psi = (u(r, x4)/r) Y_lm.

Both use a vertex-centred finite-volume scheme on nonuniform grids.  With
nodal weights ``w`` (half the sum of the adjacent spacings) and the stiffness
matrix ``K`` of the Dirichlet form, the generalised problem
``K u + diag(w pot) u = lam diag(w) u`` is symmetrised into
``A = W^-1/2 (K + W pot) W^-1/2``.  Dirichlet conditions hold at ``r_min`` and
``r_max``; the compact direction is periodic.

Eigenvalues are obtained with dense LAPACK for small matrices and with
shift-invert Lanczos otherwise.  The shift is placed below the spectrum by
bisection on the matrix inertia, counted from a sparse symmetric LDL^T
factorisation (Sylvester's law).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import linalg
from scipy.sparse import linalg as sla

from .potential import PotentialSpec, compact_potential

__all__ = [
    "GridSpec",
    "NonConvergenceError",
    "OperatorAssembly",
    "RadialOperatorSpec",
    "SpectralResult",
    "assemble_compactified",
    "assemble_radial_4d",
    "count_bound_states",
    "grid_rayleigh",
    "inertia",
    "instability_refinement",
    "lowest_eigenvalues",
    "refinement_ladder",
    "trial_on_grid",
]

#: default threshold below which an eigenvalue counts as a bound state
TOL_NEG = 1e-6
#: residual certificate, relative to the matrix norm
RESIDUAL_TOL = 1e-8
# problems up to this size are diagonalised densely
_DENSE_MAX = 1500


class NonConvergenceError(RuntimeError):
    """Eigenpairs failed the residual certificate; ``residuals`` holds the best ones."""

    def __init__(self, msg: str, eigenvalues=None, residuals=None):
        super().__init__(msg)
        self.eigenvalues = eigenvalues
        self.residuals = residuals


@dataclass(frozen=True)
class RadialOperatorSpec:
    """Radial problem in R^4 for the coupling ``Z`` and angular momentum ``l``.

    After rho^(-3/2) R~(rho) the operator reads -d^2/drho^2 - gamma/rho^2 with
    gamma = Z - 3/4 - l(l+2).
    """

    Z: float
    l: int = 0
    gamma: float = field(init=False)

    def __post_init__(self):
        if self.l < 0 or int(self.l) != self.l:
            raise ValueError(f"l must be a non-negative integer, got {self.l}")
        object.__setattr__(self, "gamma", self.Z - 0.75 - self.l * (self.l + 2))


@dataclass(frozen=True)
class GridSpec:
    """Tensor grid on [r_min, r_max] x [-pi R, pi R).

    The radial nodes are r_j = r_min (r_max/r_min)^((j/(n_r+1))^stretch) for
    j = 0..n_r+1; the two end nodes carry the Dirichlet condition, so there are
    ``n_r`` unknowns per x4 line.  With ``x4_ratio`` unset the x4 grid is
    uniform with ``n_x4`` points.  Otherwise it is graded geometrically toward
    x4 = 0 with ratio ``x4_ratio``, coarsest spacing 2 pi R / n_x4 and finest
    spacing about ``r_min``, so the near-field peak of width ~r is resolved.
    """

    r_min: float = 1e-3
    r_max: float = 40.0
    n_r: int = 600
    n_x4: int = 32
    stretch: float = 1.0
    x4_ratio: float | None = None

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise ValueError("need 0 < r_min < r_max")
        if self.n_r < 16:
            raise ValueError("n_r must be at least 16")
        if self.n_x4 < 8 or self.n_x4 % 2:
            raise ValueError("n_x4 must be even and at least 8")
        if not self.stretch > 0:
            raise ValueError("stretch must be positive")
        if self.x4_ratio is not None and not self.x4_ratio > 1:
            raise ValueError("x4_ratio must exceed 1")

    @classmethod
    def per_decade(cls, r_min: float, r_max: float, points_per_decade: float, **kw) -> "GridSpec":
        """Geometric radial grid anchored at ``r_max`` with a fixed node density.

        Nodes are r_max 10^(-j/points_per_decade); ``r_min`` is moved to the
        nearest such node.  Grids built this way are nested, which makes
        ladders in r_min and r_max directly comparable.
        """
        m = max(int(round(points_per_decade * math.log10(r_max / r_min))), 17)
        r_lo = r_max * 10.0 ** (-m / points_per_decade)
        return cls(r_min=r_lo, r_max=r_max, n_r=m - 1, **kw)

    def r_nodes(self) -> np.ndarray:
        """All radial nodes including the two Dirichlet ends."""
        s = np.arange(self.n_r + 2) / (self.n_r + 1)
        if self.stretch == 1.0:
            # exact geometric grid, computed from the outer end so nested ladders share nodes
            return self.r_max * (self.r_min / self.r_max) ** (1.0 - s)
        return self.r_min * (self.r_max / self.r_min) ** (s**self.stretch)

    def x4_nodes(self, R: float) -> np.ndarray:
        """Periodic x4 nodes in [-pi R, pi R), containing 0 and -pi R."""
        if self.x4_ratio is None:
            return -math.pi * R + 2.0 * math.pi * R * np.arange(self.n_x4) / self.n_x4
        h_max = 2.0 * math.pi * R / self.n_x4
        q = self.x4_ratio
        pos = []
        x = math.pi * R
        while True:
            x -= min(h_max, x * (1.0 - 1.0 / q))
            if x < self.r_min:
                break
            pos.append(x)
        pos = np.array(pos[::-1])
        return np.concatenate([[-math.pi * R], -pos[::-1], [0.0], pos])

    def with_r_min(self, r_min: float) -> "GridSpec":
        return GridSpec(r_min, self.r_max, self.n_r, self.n_x4, self.stretch, self.x4_ratio)


@dataclass(frozen=True)
class OperatorAssembly:
    """Symmetric discretisation together with the data needed to interpret it.

    ``weights`` are the quadrature weights of the unknowns (flattened r-major);
    a grid function ``u`` corresponds to the matrix vector ``sqrt(weights) u``.
    """

    matrix: sp.csc_matrix
    grid: GridSpec
    bc: str
    potential_ref: PotentialSpec | RadialOperatorSpec
    r: np.ndarray
    x4: np.ndarray | None
    weights: np.ndarray
    l: int = 0

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def norm(self) -> float:
        """Infinity norm, an upper bound for the spectral norm of a symmetric matrix."""
        return float(abs(self.matrix).sum(axis=1).max())


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray
    n_negative: int
    ground: float
    residuals: np.ndarray
    vectors: np.ndarray | None = None


def _dirichlet_1d(nodes: np.ndarray):
    """Stiffness diagonals and weights for -u'' on interior nodes of ``nodes``."""
    h = np.diff(nodes)
    w = 0.5 * (h[:-1] + h[1:])
    main = 1.0 / h[:-1] + 1.0 / h[1:]
    off = -1.0 / h[1:-1]
    return main, off, w


def _periodic_1d(x: np.ndarray, period: float):
    """Stiffness matrix and weights for -u'' on a periodic nonuniform grid."""
    n = len(x)
    h = np.diff(np.append(x, x[0] + period))
    hm = np.roll(h, 1)
    idx = np.arange(n)
    rows = np.concatenate([idx, idx, idx])
    cols = np.concatenate([idx, (idx + 1) % n, (idx - 1) % n])
    vals = np.concatenate([1.0 / h + 1.0 / hm, -1.0 / h, -1.0 / hm])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n)), 0.5 * (h + hm)


def _symmetrise(K, w, pot):
    s = sp.diags(1.0 / np.sqrt(w))
    A = (s @ (K + sp.diags(w * pot)) @ s).tocsc()
    # the scaling is exact in exact arithmetic; remove the rounding asymmetry
    A = ((A + A.T) * 0.5).tocsc()
    A.sort_indices()
    return A


def assemble_radial_4d(spec: RadialOperatorSpec, grid: GridSpec) -> OperatorAssembly:
    """Tridiagonal matrix of -d^2/drho^2 - gamma/rho^2, Dirichlet at both ends."""
    nodes = grid.r_nodes()
    main, off, w = _dirichlet_1d(nodes)
    r = nodes[1:-1]
    K = sp.diags([off, main, off], [-1, 0, 1])
    A = _symmetrise(K, w, -spec.gamma / r**2)
    return OperatorAssembly(A, grid, "dirichlet", spec, r, None, w, spec.l)


def assemble_compactified(spec: PotentialSpec, l: int, grid: GridSpec) -> OperatorAssembly:
    """Matrix of -d_r^2 - d_x4^2 + l(l+1)/r^2 + Z V_c on the (r, x4) grid.

    Dirichlet in r, periodic in x4; the potential is sampled at the nodes with
    the closed form.  Unknowns are ordered r-major.
    """
    if l < 0:
        raise ValueError("l must be non-negative")
    R = spec.R
    nodes = grid.r_nodes()
    main, off, wr = _dirichlet_1d(nodes)
    r = nodes[1:-1]
    x = grid.x4_nodes(R)
    Kx, wx = _periodic_1d(x, 2.0 * math.pi * R)
    Kr = sp.diags([off, main, off], [-1, 0, 1])
    K = sp.kron(Kr, sp.diags(wx)) + sp.kron(sp.diags(wr), Kx)
    rr, xx = np.meshgrid(r, x, indexing="ij")
    pot = l * (l + 1) / rr**2
    if spec.Z != 0.0:
        pot = pot + spec.Z * compact_potential(rr, xx, R)
    w = np.kron(wr, wx)
    A = _symmetrise(K, w, pot.ravel())
    return OperatorAssembly(A, grid, "dirichlet-r/periodic-x4", spec, r, x, w, l)


# ---------------------------------------------------------------------------
# eigenvalues


def inertia(A, sigma: float) -> int:
    """Number of eigenvalues of the symmetric matrix ``A`` below ``sigma``.

    Counted from the signs of D in a symmetric LDL^T factorisation of
    A - sigma I (SuperLU with symmetric ordering and no pivoting).
    """
    M = A.matrix if isinstance(A, OperatorAssembly) else A
    n = M.shape[0]
    S = (M - sigma * sp.identity(n, format="csc")).tocsc()
    lu = sla.splu(S, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0, options={"SymmetricMode": True})
    if not np.array_equal(lu.perm_r, lu.perm_c):
        raise NonConvergenceError("factorisation pivoted off the diagonal; inertia unavailable")
    d = lu.U.diagonal()
    if np.any(d == 0.0):
        # sigma is an eigenvalue to working precision; nudge it
        return inertia(M, sigma - 1e-12 * max(1.0, abs(sigma)))
    return int(np.count_nonzero(d < 0.0))


def _gershgorin_low(M) -> float:
    d = M.diagonal()
    radius = np.asarray(abs(M).sum(axis=1)).ravel() - np.abs(d)
    return float(np.min(d - radius))


def _bracket_lowest(M, rel: float = 0.02) -> float:
    """A shift strictly below the lowest eigenvalue and within ``rel`` of it."""
    lo = _gershgorin_low(M) - 1.0
    hi = 0.0
    while inertia(M, hi) < 1:
        hi = 2.0 * hi + 1.0
    for _ in range(200):
        if lo < 0 and hi < 0 and lo / hi > 1.05:
            mid = -math.sqrt(lo * hi)  # geometric steps cover many decades quickly
        else:
            mid = 0.5 * (lo + hi)
        if inertia(M, mid) >= 1:
            hi = mid
        else:
            lo = mid
        if hi - lo < rel * abs(hi) + 1e-10:
            break
    return lo


def _residuals(M, vals, vecs):
    return np.linalg.norm(M @ vecs - vecs * vals, axis=0)


def lowest_eigenvalues(A: OperatorAssembly, k: int = 1, tol_neg: float = TOL_NEG,
                       keep_vectors: bool = False) -> SpectralResult:
    """The ``k`` smallest eigenpairs with residual certificates.

    Raises :class:`NonConvergenceError` if a residual exceeds
    ``RESIDUAL_TOL * ||A||``.  ``n_negative`` counts all eigenvalues below
    ``-tol_neg``, not only the returned ones.
    """
    M = A.matrix
    n = M.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}]")
    if n <= _DENSE_MAX:
        if A.x4 is None:
            vals, vecs = linalg.eigh_tridiagonal(M.diagonal(), M.diagonal(1), select="a")
        else:
            vals, vecs = linalg.eigh(M.toarray())
        n_neg = int(np.count_nonzero(vals < -tol_neg))
        vals, vecs = vals[:k], vecs[:, :k]
    else:
        sigma = _bracket_lowest(M)
        vals, vecs = sla.eigsh(M, k=k, sigma=sigma, which="LM", v0=np.ones(n), tol=0.0)
        order = np.argsort(vals)
        vals, vecs = vals[order], vecs[:, order]
        n_neg = inertia(M, -tol_neg)
    res = _residuals(M, vals, vecs)
    limit = RESIDUAL_TOL * A.norm
    if np.any(res > limit):
        raise NonConvergenceError(
            f"residual {res.max():.3e} exceeds {limit:.3e}", eigenvalues=vals, residuals=res
        )
    return SpectralResult(vals, n_neg, float(vals[0]), res, vecs if keep_vectors else None)


def count_bound_states(spec: PotentialSpec, l_max: int, grid: GridSpec, tol_neg: float = TOL_NEG) -> int:
    """Eigenvalues below ``-tol_neg`` summed over l = 0..l_max with weight 2l + 1."""
    if spec.Z == 0.0:
        return 0
    total = 0
    for l in range(l_max + 1):
        total += (2 * l + 1) * inertia(assemble_compactified(spec, l, grid), -tol_neg)
    return total


def refinement_ladder(r_min: float, levels: int, factor: float = 10.0) -> list[float]:
    """r_min, r_min/factor, ... with ``levels`` entries."""
    return [r_min / factor**j for j in range(levels)]


def instability_refinement(spec: PotentialSpec, r_mins, grid: GridSpec, l: int = 0) -> list[float]:
    """Ground energy for each inner cutoff in ``r_mins`` (decreasing).

    ``grid`` fixes r_max, the node density and the x4 grid; with a grid from
    :meth:`GridSpec.per_decade` each level only adds nodes near the origin.
    """
    if grid.stretch != 1.0:
        raise ValueError("refinement ladders need a geometric radial grid")
    dens = (grid.n_r + 1) / math.log10(grid.r_max / grid.r_min)
    out = []
    for r_min in r_mins:
        g = GridSpec.per_decade(r_min, grid.r_max, dens, n_x4=grid.n_x4, x4_ratio=grid.x4_ratio)
        out.append(lowest_eigenvalues(assemble_compactified(spec, l, g)).ground)
    return out


# ---------------------------------------------------------------------------
# trial functions on the grid


def trial_on_grid(u, A: OperatorAssembly) -> np.ndarray:
    """Matrix vector of the grid function ``u(r, x4)`` (reduced, u = r psi).

    ``u`` is a callable of ``(r, x4)`` arrays, or of ``r`` alone for the 1D
    operator.  The vector is scaled by sqrt(weights) to match the symmetrised
    matrix.
    """
    if A.x4 is None:
        vals = np.asarray(u(A.r), dtype=float)
    else:
        rr, xx = np.meshgrid(A.r, A.x4, indexing="ij")
        vals = np.broadcast_to(np.asarray(u(rr, xx), dtype=float), rr.shape).ravel()
    return np.sqrt(A.weights) * vals


def grid_rayleigh(A: OperatorAssembly, v: np.ndarray) -> float:
    """Discrete Rayleigh quotient v.Av / v.v."""
    return float(v @ (A.matrix @ v) / (v @ v))
