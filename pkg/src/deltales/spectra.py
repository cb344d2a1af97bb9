"""Negative eigenvalues of the point-interaction Hamiltonian from K(E).

E < 0 is an eigenvalue iff det K(E) = 0. The eigenvalue branches of Gamma(E)
decrease monotonically in E, so the number of eigenvalues below E equals the
number of negative eigenvalues of Gamma(E) (up to a constant fixed at
E -> -inf). Counting by inertia makes bisection globally convergent; isolated
roots are then polished with Brent's method on the scaled determinant.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, linear_sum_assignment

from .chain import CHAIN_BCS, ChainGeometry
from .domain import BC, DomainSpec, GreenOperator
from .greens import kappa
from .kmatrix import ORIENTATION, _omega_values, gamma_matrix, inertia

log = logging.getLogger(__name__)

SINGULAR_PIVOT = 1e-13


class OrientationError(RuntimeError):
    """The counting function decreased somewhere: branch monotonicity is broken."""


@dataclass
class Count:
    count: int
    logabsdet: float
    sign: float
    min_pivot: float

    @property
    def singular(self) -> bool:
        return self.min_pivot < SINGULAR_PIVOT


class DenseCounter:
    """Eigenvalue counting through the LDL^T inertia of the dense Gamma(E)."""

    method = "dense"

    def __init__(self, domain: DomainSpec, omega, tol: float = 1e-12, green: GreenOperator | None = None):
        self.domain = domain
        self.omega = _omega_values(omega)
        self.green = green or GreenOperator(domain, tol)
        # neg(Gamma) at E -> -inf: only positive couplings in d=1 stay negative
        self.offset = int(np.sum(self.omega > 0)) if domain.dimension == 1 else 0

    def gamma(self, E: float) -> np.ndarray:
        return gamma_matrix(self.green, self.omega, kappa(E).kappa.real)

    def evaluate(self, E: float) -> Count:
        if self.omega.size == 0:
            return Count(0, 0.0, 1.0, 1.0)
        inr = inertia(self.gamma(E))
        return Count(inr.neg - self.offset, inr.logabsdet, inr.sign, inr.min_pivot)


class ChainCounter:
    """O(N) counting for d=1 (Dirichlet, Neumann, whole line)."""

    method = "chain"

    def __init__(self, domain: DomainSpec, omega, geometry: ChainGeometry | None = None):
        self.domain = domain
        self.geometry = geometry or ChainGeometry(domain)
        self.omega = _omega_values(omega)
        self.omega_sorted = np.ascontiguousarray(self.omega[self.geometry.order])

    def evaluate(self, E: float) -> Count:
        if self.omega.size == 0:
            return Count(0, 0.0, 1.0, 1.0)
        neg, logdet, sign, pmin = self.geometry.sweep(self.omega_sorted, math.sqrt(-E))
        return Count(int(neg), float(logdet), float(sign), float(pmin))


def make_counter(domain: DomainSpec, omega, method: str = "auto", tol: float = 1e-12,
                 green: GreenOperator | None = None, geometry: ChainGeometry | None = None):
    if method == "auto":
        method = "chain" if domain.dimension == 1 and domain.bc in CHAIN_BCS else "dense"
    if method == "chain":
        return ChainCounter(domain, omega, geometry)
    if method == "dense":
        return DenseCounter(domain, omega, tol, green)
    raise ValueError(f"unknown counting method {method!r}")


def _probe(counter, E: float, tol: float, jitters: list | None = None) -> Count:
    c = counter.evaluate(E)
    if not c.singular:
        return c
    for shift in (-10.0 * tol, 10.0 * tol, -100.0 * tol, 100.0 * tol):
        c2 = counter.evaluate(E + shift)
        if not c2.singular:
            log.info("K(E) singular at E=%.15g; probed E%+.1e instead", E, shift)
            if jitters is not None:
                jitters.append((E, shift))
            return c2
    return c


def count_below(domain: DomainSpec, omega, E: float, tol: float = 1e-12, method: str = "auto",
                counter=None) -> int:
    """Number of eigenvalues of H_omega in (-inf, E)."""
    if not E < 0:
        raise ValueError("count_below is defined for E < 0 only")
    counter = counter or make_counter(domain, omega, method, tol)
    return _probe(counter, E, tol).count


@dataclass
class Spectrum:
    eigenvalues: np.ndarray
    multiplicities: np.ndarray
    window: tuple
    residuals: np.ndarray
    unresolved: np.ndarray = field(default_factory=lambda: np.zeros(0, bool))
    evaluations: int = 0
    jitters: list = field(default_factory=list)

    @property
    def total(self) -> int:
        return int(np.sum(self.multiplicities))

    def expanded(self) -> np.ndarray:
        return np.repeat(self.eigenvalues, self.multiplicities)

    def __len__(self):
        return len(self.eigenvalues)


def _residual(domain, omega, E, green=None):
    K = ORIENTATION[domain.dimension] * gamma_matrix(green or GreenOperator(domain), omega, math.sqrt(-E))
    s = np.linalg.svd(K, compute_uv=False)
    return float(s[-1])


def solve_spectrum(domain: DomainSpec, omega, window, tol: float = 1e-12, method: str = "auto",
                   counter=None, residuals: bool | None = None) -> Spectrum:
    """All eigenvalues in window = [E_lo, E_hi] subset of (-inf, 0).

    Bisection on the counting function isolates every root; isolated roots are
    polished with Brent's method on sign(det) * exp(log|det| - ref). Brackets
    that shrink below ``tol`` while holding several roots are returned as a
    single flagged entry with the combined multiplicity.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi < -tol:
        raise ValueError(f"window {window} must satisfy E_lo < E_hi < 0")
    counter = counter or make_counter(domain, omega, method, tol)
    w = _omega_values(omega)
    jitters: list = []
    n_eval = 0

    def probe(E):
        nonlocal n_eval
        n_eval += 1
        return _probe(counter, E, tol, jitters)

    c_lo, c_hi = probe(lo), probe(hi)
    roots, mults, flags = [], [], []
    stack = [(lo, hi, c_lo, c_hi)]
    while stack:
        a, b, ca, cb = stack.pop()
        gap = cb.count - ca.count
        if gap < 0:
            raise OrientationError(f"count decreased on [{a:.15g}, {b:.15g}]: {ca.count} -> {cb.count}")
        if gap == 0:
            continue
        if gap == 1 and ca.sign != cb.sign:
            ref = max(ca.logabsdet, cb.logabsdet)

            def f(E):
                nonlocal n_eval
                n_eval += 1
                c = counter.evaluate(E)
                return c.sign * math.exp(max(min(c.logabsdet - ref, 700.0), -745.0))

            fa = ca.sign * math.exp(max(min(ca.logabsdet - ref, 700.0), -745.0))
            fb = cb.sign * math.exp(max(min(cb.logabsdet - ref, 700.0), -745.0))
            if fa == 0.0 or fb == 0.0:
                root = a if fa == 0.0 else b
            else:
                root = brentq(f, a, b, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
            roots.append(root)
            mults.append(1)
            flags.append(False)
            continue
        if b - a <= tol:
            roots.append(0.5 * (a + b))
            mults.append(gap)
            flags.append(True)
            log.warning("unresolved cluster of %d eigenvalues near %.15g", gap, 0.5 * (a + b))
            continue
        mid = 0.5 * (a + b)
        cm = probe(mid)
        if not (ca.count <= cm.count <= cb.count):
            raise OrientationError(f"non-monotone count at {mid:.15g}: {ca.count}, {cm.count}, {cb.count}")
        stack.append((mid, b, cm, cb))
        stack.append((a, mid, ca, cm))
    order = np.argsort(roots)
    ev = np.asarray(roots, float)[order]
    mu = np.asarray(mults, int)[order]
    if residuals is None:
        residuals = domain.n_sites <= 200
    if residuals and ev.size:
        green = getattr(counter, "green", None)
        res = np.array([_residual(domain, w, E, green) for E in ev])
    else:
        res = np.full(ev.size, np.nan)
    return Spectrum(ev, mu, (lo, hi), res, np.asarray(flags, bool)[order], n_eval, jitters)


def branch_monotonicity_check(domain: DomainSpec, omega, E_grid, direction: str | None = None,
                              tol: float = 1e-12) -> dict:
    """Track the eigenvalue branches of K(E) over a grid and measure monotonicity violations.

    ``direction`` defaults to the orientation of K: decreasing for d=1, 3 and
    increasing for d=2.
    """
    E_grid = np.asarray(E_grid, float)
    if np.any(np.diff(E_grid) <= 0) or np.any(E_grid >= 0):
        raise ValueError("E_grid must be increasing and negative")
    d = domain.dimension
    if direction is None:
        direction = "decreasing" if ORIENTATION[d] > 0 else "increasing"
    green = GreenOperator(domain, tol)
    w = _omega_values(omega)
    vals = [np.linalg.eigvalsh(ORIENTATION[d] * gamma_matrix(green, w, math.sqrt(-E))) for E in E_grid]
    branches = np.empty((len(E_grid), len(vals[0])))
    branches[0] = vals[0]
    for i in range(1, len(E_grid)):
        cost = np.abs(branches[i - 1][:, None] - vals[i][None, :])
        r, c = linear_sum_assignment(cost)
        branches[i, r] = vals[i][c]
    steps = np.diff(branches, axis=0)
    bad = steps if direction == "decreasing" else -steps
    worst = float(max(bad.max(initial=0.0), 0.0))
    return {"direction": direction, "n_branches": branches.shape[1], "max_violation": worst,
            "monotone": worst == 0.0, "branches": branches}
