"""O(N) inertia of the characteristic matrix for points on a line.

In d=1 the Green's matrix G = [G^X(x_i, x_j)] of a Dirichlet, Neumann or
whole-line problem is the inverse of a tridiagonal matrix T(kappa) (the
jump-condition matrix of the piecewise-exponential solutions). With
D = diag(-1/omega), Gamma = D - G and Haynsworth inertia additivity on
[[T, I], [I, D]] gives

    neg(Gamma) = #(omega_j > 0) + neg(T + diag(omega)),

so the eigenvalue count below E is exactly neg(T(kappa(E)) + diag(omega)),
computed here by a tridiagonal LDL^T sweep.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .domain import BC, DomainSpec

_EDGE = {BC.DIRICHLET: 0, BC.NEUMANN: 1, BC.FREE: 2}

CHAIN_BCS = tuple(_EDGE)


@njit(cache=True)
def _edge_term(kind, x):
    # kappa * (edge term) is the boundary contribution to T_ii
    if kind == 0:
        return 1.0 / math.tanh(x)
    if kind == 1:
        return math.tanh(x)
    return 1.0


@njit(cache=True)
def _coth(x):
    if x > 20.0:
        return 1.0
    return 1.0 / math.tanh(x)


@njit(cache=True)
def _csch(x):
    if x > 700.0:
        return 0.0
    e = math.exp(-x)
    return 2.0 * e / (1.0 - e * e)


@njit(cache=True)
def _sweep(gaps, left_kind, left_gap, right_kind, right_gap, omega, k):
    """Returns (neg, logabsdet, sign, min |pivot| / max |pivot|)."""
    n = omega.size
    neg = 0
    logdet = 0.0
    sign = 1.0
    pmin = np.inf
    pmax = 0.0
    prev = 1.0
    b_prev = 0.0
    for i in range(n):
        if i == 0:
            a = k * _edge_term(left_kind, k * left_gap)
        else:
            a = k * _coth(k * gaps[i - 1])
        if i == n - 1:
            a += k * _edge_term(right_kind, k * right_gap)
        else:
            a += k * _coth(k * gaps[i])
        a += omega[i]
        if i > 0:
            a -= b_prev * b_prev / prev
        if a == 0.0:
            a = -1e-300
        if a < 0.0:
            neg += 1
            sign = -sign
        aa = abs(a)
        logdet += math.log(aa)
        if aa < pmin:
            pmin = aa
        if aa > pmax:
            pmax = aa
        prev = a
        if i < n - 1:
            b_prev = -k * _csch(k * gaps[i])
    return neg, logdet, sign, pmin / pmax


@njit(cache=True)
def _batch_counts(gaps, left_kind, left_gap, right_kind, right_gap, omegas, ks):
    r_count = omegas.shape[0]
    out = np.empty((r_count, ks.size), dtype=np.int64)
    for r in range(r_count):
        for e in range(ks.size):
            out[r, e] = _sweep(gaps, left_kind, left_gap, right_kind, right_gap, omegas[r], ks[e])[0]
    return out


class ChainGeometry:
    """Sorted point positions and edge data for a 1-D domain."""

    def __init__(self, spec: DomainSpec):
        if spec.dimension != 1 or spec.bc not in CHAIN_BCS:
            raise ValueError("chain inertia needs d=1 with Dirichlet, Neumann or free bc")
        x = spec.lattice[:, 0]
        self.order = np.argsort(x, kind="stable")
        xs = x[self.order]
        self.gaps = np.diff(xs).astype(float)
        lo = spec.origin[0]
        hi = lo + spec.sides[0]
        self.left_kind = _EDGE[spec.bc]
        self.right_kind = _EDGE[spec.bc]
        self.left_gap = float(xs[0] - lo) if xs.size else 1.0
        self.right_gap = float(hi - xs[-1]) if xs.size else 1.0
        self.n = xs.size

    def sweep(self, omega_sorted: np.ndarray, k: float):
        return _sweep(self.gaps, self.left_kind, self.left_gap, self.right_kind,
                      self.right_gap, omega_sorted, float(k))

    def counts(self, omegas: np.ndarray, energies) -> np.ndarray:
        """Eigenvalue counts below each energy for each row of couplings (unsorted order)."""
        omegas = np.atleast_2d(np.asarray(omegas, float))[:, self.order]
        ks = np.sqrt(-np.asarray(energies, float).reshape(-1))
        if self.n == 0:
            return np.zeros((omegas.shape[0], ks.size), dtype=np.int64)
        return _batch_counts(self.gaps, self.left_kind, self.left_gap, self.right_kind,
                             self.right_gap, np.ascontiguousarray(omegas), ks)
