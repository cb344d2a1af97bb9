"""Green's functions of the Laplacian on a box with Dirichlet, Neumann or
periodic boundary conditions, built as image sums over the free kernel.

Convention: G^X(x, y) = G_0(x, y) - c_y(x), so the corrector is minus the sum
over all non-identity images. The diagonal c_x(x) is therefore finite in every
dimension.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.spatial import cKDTree

from .greens import DomainError, SpectralParam, _as_kappa, decay_bound, g0

# image sums needing more periods than this are reported as non-convergent
MAX_PERIODS = 40


class ConvergenceError(RuntimeError):
    """Image sum cannot reach the requested tolerance at this kappa."""


class BC(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"
    PERIODIC = "periodic"
    FREE = "free"


@dataclass(eq=False)
class DomainSpec:
    """A box [origin, origin + sides] with interaction points and a boundary condition.

    ``bc = FREE`` is the truncated-potential whole-space operator: the points
    still live in the box but the Laplacian is the one on R^d.
    """

    dimension: int
    side: float
    bc: BC
    lattice: np.ndarray
    origin: np.ndarray = None
    sides: np.ndarray = None
    min_margin: float = 0.5

    def __post_init__(self):
        d = self.dimension
        if d not in (1, 2, 3):
            raise DomainError(f"dimension must be 1, 2 or 3, got {d}")
        self.bc = BC(self.bc)
        self.origin = np.zeros(d) if self.origin is None else np.asarray(self.origin, float).reshape(d)
        self.sides = (np.full(d, float(self.side)) if self.sides is None
                      else np.asarray(self.sides, float).reshape(d))
        if np.any(self.sides <= 0):
            raise DomainError("box sides must be positive")
        pts = np.asarray(self.lattice, dtype=float).reshape(-1, d)
        self.lattice = pts
        if pts.size:
            rel = pts - self.origin
            margin = np.minimum(rel, self.sides - rel).min()
            if margin < self.min_margin - 1e-12:
                raise DomainError(f"lattice point within {margin:g} of the boundary "
                                  f"(need >= {self.min_margin})")
            if len(np.unique(np.round(pts, 12), axis=0)) != len(pts):
                raise DomainError("lattice points must be distinct")

    @classmethod
    def cube(cls, dimension: int, L: float, bc="dirichlet", lattice="offset", origin=None):
        """Cube of side L with unit-spaced interaction points.

        ``lattice="offset"`` puts points at k + 1/2 (L^d points, margin 1/2);
        ``"integer"`` uses Z^d strictly inside the cube (margin 1).
        """
        o = np.zeros(dimension) if origin is None else np.asarray(origin, float)
        if isinstance(lattice, str):
            lattice = lattice_points(dimension, L, lattice) + o
        return cls(dimension, float(L), BC(bc), lattice, origin=o)

    @property
    def n_sites(self) -> int:
        return len(self.lattice)

    @property
    def volume(self) -> float:
        return float(np.prod(self.sides))

    def contains(self, x) -> bool:
        rel = np.asarray(x, float) - self.origin
        return bool(np.all(rel > 0) and np.all(rel < self.sides))

    def restrict(self, lo, hi, bc=None) -> "DomainSpec":
        """Sub-box [lo, hi] (absolute coordinates) keeping the lattice points inside."""
        lo = np.asarray(lo, float)
        hi = np.asarray(hi, float)
        pts = self.lattice
        inside = np.all((pts > lo) & (pts < hi), axis=1)
        sides = hi - lo
        return DomainSpec(self.dimension, float(sides[0]), self.bc if bc is None else BC(bc),
                          pts[inside], origin=lo, sides=sides, min_margin=self.min_margin)


def lattice_points(d: int, L: float, kind: str = "offset") -> np.ndarray:
    if kind == "offset":
        n = int(round(L))
        if abs(n - L) > 1e-12:
            raise DomainError("offset lattice needs an integer side")
        axis = np.arange(n) + 0.5
    elif kind == "integer":
        axis = np.arange(1, int(math.ceil(L)))
        axis = axis[axis < L].astype(float)
    else:
        raise DomainError(f"unknown lattice kind {kind!r}")
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


# ----------------------------------------------------------------------------
# Image expansions
# ----------------------------------------------------------------------------

@dataclass
class ImageExpansion:
    images: np.ndarray      # (n, d) image positions of y
    signs: np.ndarray       # (n,)
    identity: np.ndarray    # (n,) bool, True for y itself
    truncation_radius: float
    tail_bound: float


def _axis_choices(bc: BC):
    # (sign of the coordinate, image sign) per reflection class
    if bc is BC.PERIODIC:
        return [(1, 1)]
    if bc is BC.DIRICHLET:
        return [(1, 1), (-1, -1)]
    return [(1, 1), (-1, 1)]


def _period(bc: BC, length: float) -> float:
    return length if bc is BC.PERIODIC else 2.0 * length


def tail_estimate(spec: DomainSpec, R: float, kp) -> float:
    """Bound on the total magnitude of all images farther than R."""
    if spec.bc is BC.FREE:
        return 0.0
    k = _as_kappa(kp)
    k_re, k_abs = k.real, abs(k)
    step = 2.0 * float(spec.sides.min())
    total = 0.0
    for n in range(100000):
        outer = R + (n + 1) * step
        count = np.prod(2.0 * outer / spec.sides + 2.0)
        term = count * float(decay_bound(spec.dimension, R + n * step, k_re, k_abs))
        total += term
        if term < 1e-6 * total or term < 1e-300:
            break
    return total


def truncation_radius(spec: DomainSpec, kp, tol: float) -> tuple[float, float]:
    """Smallest radius (up to bisection) whose tail estimate is below tol."""
    if spec.bc is BC.FREE:
        return math.inf, 0.0
    k = _as_kappa(kp)
    if k.real <= 0:
        raise ConvergenceError("image sums need Re kappa > 0")
    lmax = float(spec.sides.max())
    cap = MAX_PERIODS * lmax
    hi = max(lmax, 1.0)
    while tail_estimate(spec, hi, k) > tol:
        if hi >= cap:
            # smallest real kappa for which the capped radius would suffice
            k_need = k.real
            while tail_estimate(spec, cap, k_need) > tol:
                k_need *= 1.25
            raise ConvergenceError(
                f"image sum for kappa={k:.4g}, L={lmax:g} does not reach tol={tol:g} within "
                f"{MAX_PERIODS} periods; need Re(kappa)*L >~ {k_need * lmax:.3g} "
                f"(have {k.real * lmax:.3g})")
        hi = min(2.0 * hi, cap)
    lo = 0.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if tail_estimate(spec, mid, k) > tol:
            lo = mid
        else:
            hi = mid
    return hi, tail_estimate(spec, hi, k)


def _axis_images(u: float, length: float, bc: BC, x: float, R: float):
    """1-D images (coordinate, sign, is_identity) of local coordinate u within R of x."""
    per = _period(bc, length)
    m_lo = int(math.floor((x - R - length) / per)) - 1
    m_hi = int(math.ceil((x + R + length) / per)) + 1
    out = []
    for m in range(m_lo, m_hi + 1):
        for cs, sg in _axis_choices(bc):
            pos = m * per + cs * u
            if abs(pos - x) <= R:
                out.append((pos, sg, m == 0 and cs == 1))
    return out


def image_expansion(spec: DomainSpec, x, y, kp, tol: float = 1e-12) -> ImageExpansion:
    x = np.asarray(x, float) - spec.origin
    y = np.asarray(y, float) - spec.origin
    d = spec.dimension
    if spec.bc is BC.FREE:
        return ImageExpansion(y[None, :] + spec.origin, np.ones(1), np.ones(1, bool), math.inf, 0.0)
    R, tail = truncation_radius(spec, kp, tol)
    per_axis = [_axis_images(y[a], spec.sides[a], spec.bc, x[a], R) for a in range(d)]
    pos, sgn, ident = [], [], []
    for combo in itertools.product(*per_axis):
        p = np.array([c[0] for c in combo])
        if np.linalg.norm(p - x) > R:
            continue
        pos.append(p)
        sgn.append(np.prod([c[1] for c in combo]))
        ident.append(all(c[2] for c in combo))
    pos = np.array(pos).reshape(-1, d) + spec.origin
    return ImageExpansion(pos, np.array(sgn, float), np.array(ident, bool), R, tail)


def _check_inside(spec: DomainSpec, *pts):
    for p in pts:
        if not spec.contains(p):
            raise DomainError(f"point {p} is outside the box")


def domain_green(spec: DomainSpec, x, y, kp, tol: float = 1e-12) -> complex:
    """G^X(x, y; z) as a truncated image sum (or G_0 for the free case)."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if spec.bc is not BC.FREE:
        _check_inside(spec, x, y)
    k = _as_kappa(kp)
    r0 = float(np.linalg.norm(x - y))
    if spec.dimension > 1 and r0 == 0.0:
        raise DomainError("G^X is singular at x = y for d = 2, 3")
    exp = image_expansion(spec, x, y, k, tol)
    r = np.linalg.norm(exp.images - x, axis=1)
    return complex(np.sum(exp.signs * g0(spec.dimension, r, k)))


def corrector(spec: DomainSpec, x, y, kp, tol: float = 1e-12) -> complex:
    """c_y(x) = G_0(x, y) - G^X(x, y): minus the sum over non-identity images."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if spec.bc is BC.FREE:
        return 0j
    _check_inside(spec, x, y)
    k = _as_kappa(kp)
    exp = image_expansion(spec, x, y, k, tol)
    keep = ~exp.identity
    r = np.linalg.norm(exp.images[keep] - x, axis=1)
    return complex(-np.sum(exp.signs[keep] * g0(spec.dimension, r, k)))


# ----------------------------------------------------------------------------
# Exact 1-D forms
# ----------------------------------------------------------------------------

def _om(t):
    # 1 - exp(-t), accurate for small t
    return -np.expm1(-t)


def green_1d(bc: BC, L: float, x, y, k):
    """Closed-form 1-D box Green's function, coordinates relative to the left end."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    k = k.real if isinstance(k, complex) and k.imag == 0 else k
    lo = np.minimum(x, y)
    hi = np.maximum(x, y)
    if bc is BC.FREE:
        return np.exp(-k * (hi - lo)) / (2.0 * k)
    if bc is BC.DIRICHLET:
        # sinh(k lo) sinh(k (L - hi)) / (k sinh(k L))
        return (np.exp(-k * (hi - lo)) * _om(2 * k * lo) * _om(2 * k * (L - hi))
                / (2.0 * k * _om(2 * k * L)))
    if bc is BC.NEUMANN:
        return (np.exp(-k * (hi - lo)) * (2.0 - _om(2 * k * lo)) * (2.0 - _om(2 * k * (L - hi)))
                / (2.0 * k * _om(2 * k * L)))
    if bc is BC.PERIODIC:
        r = np.mod(hi - lo, L)
        return (np.exp(-k * r) + np.exp(-k * (L - r))) / (2.0 * k * _om(k * L))
    raise DomainError(f"unknown boundary condition {bc}")


# ----------------------------------------------------------------------------
# Lattice-wide tables
# ----------------------------------------------------------------------------

@dataclass(eq=False)
class GreenOperator:
    """Green's-function matrices on the lattice of a domain, reused across energies.

    ``matrix(k)`` returns the N x N matrix with G^X(x_i, x_j) off the diagonal
    and -c_{x_j}(x_j) on it. For boxes in d >= 2 the image geometry is
    tabulated once (for the smallest kappa seen) and each energy only
    re-evaluates the kernel on the stored distances.
    """

    spec: DomainSpec
    tol: float = 1e-12
    _table: tuple = field(default=None, repr=False)
    _table_kappa: float = field(default=math.inf, repr=False)

    @cached_property
    def _pair_dist(self):
        pts = self.spec.lattice
        return np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)

    def _build_table(self, k: complex):
        spec = self.spec
        R, _ = truncation_radius(spec, k, self.tol)
        pts = spec.lattice - spec.origin
        n = len(pts)
        tree = cKDTree(pts)
        rows, cols, dists, signs = [], [], [], []
        per_axis = []
        for a in range(spec.dimension):
            per = _period(spec.bc, spec.sides[a])
            m_max = int(math.ceil((R + spec.sides[a]) / per)) + 1
            per_axis.append([(m, cs, sg) for m in range(-m_max, m_max + 1)
                             for cs, sg in _axis_choices(spec.bc)])
        for combo in itertools.product(*per_axis):
            ident = all(m == 0 and cs == 1 for m, cs, _ in combo)
            shift = np.array([m * _period(spec.bc, spec.sides[a]) for a, (m, _, _) in enumerate(combo)])
            flip = np.array([cs for _, cs, _ in combo], float)
            img = pts * flip + shift
            # cheap reject: bounding-box gap larger than R
            gap = np.maximum(0.0, np.maximum(img.min(0) - pts.max(0), pts.min(0) - img.max(0)))
            if np.linalg.norm(gap) > R:
                continue
            sgn = float(np.prod([sg for _, _, sg in combo]))
            sdm = tree.sparse_distance_matrix(cKDTree(img), R, output_type="ndarray")
            i, j, v = sdm["i"], sdm["j"], sdm["v"]
            if ident:
                off = i != j
                i, j, v = i[off], j[off], v[off]
            else:
                # reflected images can coincide with x only on the boundary
                v = np.maximum(v, 1e-300)
            rows.append(i)
            cols.append(j)
            dists.append(v)
            signs.append(np.full(v.shape, sgn))
        flat = np.concatenate(rows) * n + np.concatenate(cols)
        self._table = (flat, np.concatenate(dists), np.concatenate(signs))
        self._table_kappa = k.real

    def matrix(self, kp) -> np.ndarray:
        spec = self.spec
        k = _as_kappa(kp)
        d = spec.dimension
        n = spec.n_sites
        real = k.imag == 0.0
        kk = k.real if real else k
        if n == 0:
            return np.zeros((0, 0))
        if d == 1 and spec.bc is not BC.FREE:
            x = (spec.lattice[:, 0] - spec.origin[0])
            L = float(spec.sides[0])
            G = green_1d(spec.bc, L, x[:, None], x[None, :], kk)
            G = np.array(G, dtype=float if real else complex)
            G[np.diag_indices(n)] -= 1.0 / (2.0 * kk)
            return G
        if spec.bc is BC.FREE:
            r = self._pair_dist
            G = np.zeros((n, n), dtype=float if real else complex)
            off = ~np.eye(n, dtype=bool)
            G[off] = g0(d, r[off], kk)
            return G
        if self._table is None or k.real < self._table_kappa:
            self._build_table(k)
        flat, dist, sgn = self._table
        vals = sgn * g0(d, dist, kk)
        if real:
            G = np.bincount(flat, weights=vals, minlength=n * n)
        else:
            G = (np.bincount(flat, weights=vals.real, minlength=n * n)
                 + 1j * np.bincount(flat, weights=vals.imag, minlength=n * n))
        G = G.reshape(n, n)
        return 0.5 * (G + G.T)

    def column(self, x, kp) -> np.ndarray:
        """G^X(x, x_j) for all lattice points x_j."""
        spec = self.spec
        k = _as_kappa(kp)
        kk = k.real if k.imag == 0 else k
        x = np.asarray(x, float)
        if spec.dimension == 1 and spec.bc is not BC.FREE:
            xs = spec.lattice[:, 0] - spec.origin[0]
            return np.asarray(green_1d(spec.bc, float(spec.sides[0]), x[0] - spec.origin[0], xs, kk))
        return np.array([domain_green(spec, x, p, k, self.tol) for p in spec.lattice])
