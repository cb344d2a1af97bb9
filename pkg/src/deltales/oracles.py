"""Independent reference solvers.

None of these touch the characteristic-matrix code: the shooting solver
integrates -u'' = E u across delta jumps, the grid oracle diagonalizes a finite
difference Laplacian, and the closed forms solve the one- and two-center
characteristic equations as scalar equations.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigvalsh_tridiagonal
from scipy.optimize import brentq

from .spectra import Spectrum


# ----------------------------------------------------------------------------
# Shooting / transfer matrices
# ----------------------------------------------------------------------------

@dataclass
class ShootingProblem:
    length: float
    positions: np.ndarray
    strengths: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, float)
        w = np.asarray(self.strengths, float)
        order = np.argsort(pos)
        self.positions, self.strengths = pos[order], w[order]
        if pos.size and (self.positions[0] <= 0 or self.positions[-1] >= self.length):
            raise ValueError("delta positions must lie strictly inside (0, L)")


def _shoot(problem: ShootingProblem, E: float):
    """Integrate from u(0)=0, u'(0)=1 to L.

    Returns (u(L) / scale, number of zeros of u in (0, L)). The scale is a
    positive running normalization so nothing overflows.
    """
    k = math.sqrt(-E)
    u, du = 0.0, 1.0
    x = 0.0
    zeros = 0
    pts = list(problem.positions) + [problem.length]
    ws = list(problem.strengths) + [0.0]
    for p, w in zip(pts, ws):
        h = p - x
        if h > 0:
            # zero of u0 cosh(k t) + (du0/k) sinh(k t) inside (0, h]
            if du != 0.0:
                q = -u * k / du
                if 0.0 < q < 1.0:
                    t = math.atanh(q) / k
                    if t < h:
                        zeros += 1
            ch = math.cosh(k * h)
            sh = math.sinh(k * h)
            u, du = u * ch + du * sh / k, u * k * sh + du * ch
        du = du + w * u
        x = p
        norm = math.hypot(u, du / k)
        u /= norm
        du /= norm
    # a zero exactly at L is the eigenvalue itself, not a node below it
    return u, zeros


def shoot_count(problem: ShootingProblem, E: float) -> int:
    """Sturm oscillation: number of eigenvalues below E = interior nodes at E."""
    u, zeros = _shoot(problem, E)
    return zeros


def shoot_spectrum(problem: ShootingProblem, window, tol: float = 1e-13) -> Spectrum:
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi < 0:
        raise ValueError("window must lie in (-inf, 0)")
    roots = []

    def mismatch(E):
        return _shoot(problem, E)[0]

    stack = [(lo, hi, shoot_count(problem, lo), shoot_count(problem, hi))]
    while stack:
        a, b, na, nb = stack.pop()
        if nb == na:
            continue
        if nb - na == 1:
            fa, fb = mismatch(a), mismatch(b)
            if fa * fb < 0:
                roots.append(brentq(mismatch, a, b, xtol=tol, rtol=1e-15, maxiter=300))
                continue
        if b - a < tol:
            roots.extend([0.5 * (a + b)] * (nb - na))
            continue
        m = 0.5 * (a + b)
        nm = shoot_count(problem, m)
        stack.append((m, b, nm, nb))
        stack.append((a, m, na, nm))
    ev = np.sort(np.asarray(roots, float))
    return Spectrum(ev, np.ones(ev.size, int), (lo, hi), np.full(ev.size, np.nan))


# ----------------------------------------------------------------------------
# Finite differences
# ----------------------------------------------------------------------------

class GridConvergenceError(RuntimeError):
    pass


def _grid_eigs(problem: ShootingProblem, h: float, window):
    n_cells = int(round(problem.length / h))
    h = problem.length / n_cells
    nodes = np.arange(1, n_cells) * h
    diag = np.full(nodes.size, 2.0 / h**2)
    idx = np.rint(problem.positions / h).astype(int) - 1
    if np.any(np.abs(nodes[idx] - problem.positions) > 1e-9 * max(1.0, problem.length)):
        raise ValueError("mesh must put a node on every delta position")
    np.add.at(diag, idx, problem.strengths / h)
    off = np.full(nodes.size - 1, -1.0 / h**2)
    return eigvalsh_tridiagonal(diag, off, select="v", select_range=window)


def grid_oracle_1d(problem: ShootingProblem, h: float, window, rtol: float = 1e-3):
    """Finite-difference eigenvalues with a Richardson estimate over h and h/2.

    Returns (Spectrum of extrapolated values, error bars).
    """
    lo, hi = window
    # pad the window so roots near the ends are not lost between meshes
    pad = 0.05 * (hi - lo) + 1e-3
    coarse = _grid_eigs(problem, h, (lo - pad, min(hi + pad, -1e-14)))
    fine = _grid_eigs(problem, h / 2.0, (lo - pad, min(hi + pad, -1e-14)))
    if coarse.size != fine.size:
        raise GridConvergenceError("eigenvalue count changed under refinement")
    extrap = fine + (fine - coarse) / 3.0
    err = np.abs(fine - coarse) / 3.0
    if np.any(err > rtol * np.maximum(np.abs(extrap), 1.0)):
        raise GridConvergenceError("refinement disagrees beyond tolerance; decrease h")
    keep = (extrap >= lo) & (extrap <= hi)
    return Spectrum(extrap[keep], np.ones(int(keep.sum()), int), (lo, hi), err[keep]), err[keep]


# ----------------------------------------------------------------------------
# One and two centers in free space
# ----------------------------------------------------------------------------

def single_center_energy(d: int, omega: float) -> float:
    if omega >= 0:
        raise ValueError("bound states need omega < 0")
    if d == 1:
        return -omega * omega / 4.0
    if d == 2:
        return -math.exp(4.0 * math.pi / omega)
    if d == 3:
        return -(4.0 * math.pi / omega) ** 2
    raise ValueError("d must be 1, 2 or 3")


def _sigma(d, omega, k):
    # single-site diagonal written independently of the matrix code
    if d == 1:
        return -1.0 / omega - 1.0 / (2.0 * k)
    if d == 2:
        return -1.0 / omega + math.log(k) / (2.0 * math.pi)
    return 1.0 / omega + k / (4.0 * math.pi)


def _pair(d, r, k):
    if d == 1:
        return math.exp(-k * r) / (2.0 * k)
    if d == 2:
        from scipy.special import k0
        return float(k0(k * r)) / (2.0 * math.pi)
    return math.exp(-k * r) / (4.0 * math.pi * r)


def closed_form_centers(d: int, omegas, r: float | None = None, k_range=(1e-9, 1e4)) -> dict:
    """Free-space bound states of one or two (equal) centers.

    Two centers: roots of sigma(k) = +g(r; k) (symmetric) and sigma(k) = -g(r; k)
    (antisymmetric). Branches without a root are listed under "missing".
    """
    omegas = list(np.atleast_1d(omegas).astype(float))
    if len(omegas) == 1:
        return {"energies": [single_center_energy(d, omegas[0])], "missing": []}
    if len(omegas) != 2 or omegas[0] != omegas[1]:
        raise ValueError("two-center closed forms need two equal couplings")
    w = omegas[0]
    out, missing = [], []
    for name, s in (("symmetric", 1.0), ("antisymmetric", -1.0)):
        def f(k):
            return _sigma(d, w, k) - s * _pair(d, r, k)

        ks = np.logspace(math.log10(k_range[0]), math.log10(k_range[1]), 4000)
        vals = np.array([f(k) for k in ks])
        flips = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
        if flips.size == 0:
            missing.append(name)
            continue
        i = flips[-1]
        k = brentq(f, ks[i], ks[i + 1], xtol=1e-15, rtol=1e-15)
        if k < 1e3 * k_range[0]:
            # a root pinned at the threshold is the kappa -> 0 artifact, not a bound state
            missing.append(name)
            continue
        out.append(-k * k)
    return {"energies": sorted(out), "missing": missing}


def two_center_kappa_1d(omega: float, r: float, branch: int = 1) -> float | None:
    """Root of kappa = (|omega|/2)(1 + branch * exp(-kappa r)) by fixed-point/bisection."""
    a = abs(omega) / 2.0

    def f(k):
        return k - a * (1.0 + branch * math.exp(-k * r))

    hi = 2.0 * a + 1.0
    lo = 1e-12
    if f(lo) * f(hi) > 0:
        return None
    k = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15)
    return k if k > 1e-9 else None


def delta_resolvent_1d(omega: float, a: float, x: float, y: float, z: complex) -> complex:
    """Resolvent kernel of -u'' + omega delta(. - a) u on the whole line.

    Textbook rank-one form g(x-y) - omega g(x-a) g(a-y) / (1 + omega g(0)),
    g(t) = exp(-k|t|)/(2k), k = sqrt(-z) with Re k > 0.
    """
    k = cmath.sqrt(-complex(z))
    if k.real <= 0:
        k = -k

    def g(t):
        return cmath.exp(-k * abs(t)) / (2.0 * k)

    return g(x - y) - omega * g(x - a) * g(a - y) / (1.0 + omega * g(0.0))


# ----------------------------------------------------------------------------
# Rank one perturbations
# ----------------------------------------------------------------------------

@dataclass
class RankOnePair:
    A: np.ndarray
    phi: np.ndarray
    interval: tuple

    def __post_init__(self):
        self.A = np.asarray(self.A, float)
        self.phi = np.asarray(self.phi, float)
        if abs(np.linalg.norm(self.phi) - 1.0) > 1e-14:
            raise ValueError("phi must be a unit vector")
        if not np.allclose(self.A, self.A.T):
            raise ValueError("A must be symmetric")

    @property
    def B(self) -> np.ndarray:
        return np.outer(self.phi, self.phi)


def is_cyclic(A: np.ndarray, phi: np.ndarray, tol: float = 1e-9) -> bool:
    """phi is A-cyclic iff it has weight on every eigenvector of a simple spectrum."""
    w, V = np.linalg.eigh(A)
    if np.any(np.diff(w) < tol * max(1.0, np.abs(w).max())):
        return False
    return bool(np.all(np.abs(V.T @ phi) > tol))


def herglotz(A: np.ndarray, phi: np.ndarray, x) -> np.ndarray:
    """F_A(x) = <phi, (A - x)^-1 phi> via the spectral decomposition."""
    w, V = np.linalg.eigh(A)
    c = (V.T @ phi) ** 2
    x = np.atleast_1d(np.asarray(x, float))
    return (c[None, :] / (w[None, :] - x[:, None])).sum(axis=1)


def rank_one_verify(pair: RankOnePair, n_grid: int = 200) -> dict:
    A, phi = pair.A, pair.phi
    a, b = pair.interval
    AB = A + pair.B
    ea = np.linalg.eigvalsh(A)
    eb = np.linalg.eigvalsh(AB)
    na = int(np.sum((ea >= a) & (ea <= b)))
    nb = int(np.sum((eb >= a) & (eb <= b)))
    violations = []
    if abs(na - nb) > 1:
        violations.append("count jump > 1")
    if na >= 1 and not (na - 1 <= nb):
        violations.append("lower bound Tr E_A(I) - 1 <= Tr E_A+B(I) fails")
    # F_{A+B} = F_A / (1 + F_A) away from both spectra
    lo = min(ea.min(), eb.min()) - 1.0
    hi = max(ea.max(), eb.max()) + 1.0
    grid = np.linspace(lo, hi, n_grid)
    poles = np.concatenate([ea, eb])
    dist = np.abs(grid[:, None] - poles[None, :]).min(axis=1)
    grid = grid[dist > 1e-3 * (hi - lo)]
    fa = herglotz(A, phi, grid)
    fab = herglotz(AB, phi, grid)
    formula = fa / (1.0 + fa)
    scale = np.maximum(1.0, np.abs(fab))
    err = float(np.max(np.abs(fab - formula) / scale)) if grid.size else 0.0
    # interlacing: one eigenvalue of A+B between consecutive eigenvalues of A inside I
    inside_a = ea[(ea >= a) & (ea <= b)]
    inside_b = eb[(eb >= a) & (eb <= b)]
    for x0, x1 in zip(inside_a[:-1], inside_a[1:]):
        if int(np.sum((inside_b > x0) & (inside_b < x1))) != 1:
            violations.append(f"interlacing fails on ({x0:.6g}, {x1:.6g})")
    return {"count_A": na, "count_AB": nb, "formula_error": err, "violations": violations}


def random_rank_one_pair(rng: np.random.Generator, n: int) -> RankOnePair:
    M = rng.normal(size=(n, n))
    A = 0.5 * (M + M.T)
    phi = rng.normal(size=n)
    phi /= np.linalg.norm(phi)
    w = np.linalg.eigvalsh(A)
    a, b = np.sort(rng.uniform(w.min() - 1.0, w.max() + 1.0, size=2))
    return RankOnePair(A, phi, (a, b))
