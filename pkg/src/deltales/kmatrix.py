"""Characteristic matrix K(z, omega) of the point-interaction Hamiltonian.

Internally everything is built from

    Gamma(z) = diag(1/alpha_j - eps_d(z)) - Ghat(z),

where Ghat holds G^X(x_j, x_k) off the diagonal and -c_{x_j}(x_j) on it, and
eps_d is the finite part of G_0 at the origin. Gamma is decreasing in real z
for every d, so its inertia counts eigenvalues. The public matrix is
K = orientation(d) * Gamma, which reproduces the per-dimension diagonals

    d=1: -1/omega - 1/(2 kappa),  d=2: 1/omega - ln(kappa)/(2 pi),
    d=3: 1/omega + kappa/(4 pi)

(plus the corrector for boxes). In d=2 this makes K increasing in energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .disorder import CouplingField
from .domain import BC, DomainSpec, GreenOperator
from .greens import SpectralParam, effective_energy, kappa, regularized_onsite

ORIENTATION = {1: 1.0, 2: -1.0, 3: 1.0}

DEFAULT_COND_CAP = 1e-12


class SingularMatrixError(np.linalg.LinAlgError):
    def __init__(self, msg, smallest_singular_value=None):
        super().__init__(msg)
        self.smallest_singular_value = smallest_singular_value


def _omega_values(omega) -> np.ndarray:
    if isinstance(omega, CouplingField):
        return omega.values
    return np.asarray(omega, dtype=float).reshape(-1)


def effective_coupling(d: int, omega) -> np.ndarray:
    """alpha_{d,j}: -omega in d=1, omega in d=2 and d=3."""
    w = _omega_values(omega)
    return -w if d == 1 else w.copy()


def gamma_inverse_coupling(d: int, omega) -> np.ndarray:
    """Diagonal coupling term of Gamma (the decreasing-orientation matrix)."""
    w = _omega_values(omega)
    if np.any(w == 0):
        raise ValueError("zero couplings are not interactions; drop those sites")
    return 1.0 / w if d == 3 else -1.0 / w


def gamma_matrix(green: GreenOperator, omega, kp) -> np.ndarray:
    d = green.spec.dimension
    k = kp.kappa if isinstance(kp, SpectralParam) else complex(kp)
    Gm = green.matrix(k)
    eps = regularized_onsite(d, k)
    diag = gamma_inverse_coupling(d, omega) - eps
    out = -Gm
    out[np.diag_indices_from(out)] += diag
    return out


@dataclass
class CharacteristicMatrix:
    entries: np.ndarray
    z: complex
    domain: DomainSpec
    variant: str
    split: dict | None = None

    @property
    def orientation(self) -> float:
        return ORIENTATION[self.domain.dimension]

    @property
    def gamma(self) -> np.ndarray:
        return self.orientation * self.entries

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def assemble(domain: DomainSpec, omega, z, tol: float = 1e-12, split: bool = False,
             green: GreenOperator | None = None) -> CharacteristicMatrix:
    """K(z, omega) on the lattice of ``domain``.

    ``split=True`` also records t (corrector on the diagonal, -G^X off it),
    v = diag(1/alpha) and the scalar shift so that K = sign * t + v - shift * I.
    """
    kp = z if isinstance(z, SpectralParam) else kappa(z)
    w = _omega_values(omega)
    if len(w) != domain.n_sites:
        raise ValueError(f"{len(w)} couplings for {domain.n_sites} lattice points")
    green = green or GreenOperator(domain, tol)
    d = domain.dimension
    sgn = ORIENTATION[d]
    K = sgn * gamma_matrix(green, w, kp)
    variant = "whole-space" if domain.bc is BC.FREE else "box"
    parts = None
    if split:
        t = -green.matrix(kp.kappa)
        v = np.diag(1.0 / effective_coupling(d, w))
        e_d = effective_energy(d, kp)
        # d=1 subtracts -e_1 (= G_0(0)); d=2 has the overall sign flipped
        shift = -e_d if d == 1 else e_d
        if kp.is_real:
            shift = shift.real
        parts = {"t": t, "v": v, "shift": shift, "sign": sgn}
    return CharacteristicMatrix(K, kp.z, domain, variant, parts)


# ----------------------------------------------------------------------------
# Solves
# ----------------------------------------------------------------------------

def _check_condition(K: np.ndarray, cond_cap: float):
    s = np.linalg.svd(K, compute_uv=False)
    if s.size and (s[-1] == 0.0 or s[-1] < cond_cap * s[0]):
        raise SingularMatrixError(
            f"K is numerically singular: smallest singular value {s[-1]:.3e} "
            f"(norm {s[0]:.3e}); z is (close to) an eigenvalue", s[-1])


def k_inverse(K: CharacteristicMatrix | np.ndarray, cond_cap: float = DEFAULT_COND_CAP) -> np.ndarray:
    """Full inverse through a symmetric (indefinite) factorization."""
    A = K.entries if isinstance(K, CharacteristicMatrix) else np.asarray(K)
    n = A.shape[0]
    if n == 0:
        return A.copy()
    _check_condition(A, cond_cap)
    if np.iscomplexobj(A):
        lu, ipiv, info = lapack.zsytrf(A, lower=1)
        inv, info2 = lapack.zsytrs(lu, ipiv, np.eye(n, dtype=complex), lower=1)
    else:
        lu, ipiv, info = lapack.dsytrf(A, lower=1)
        inv, info2 = lapack.dsytrs(lu, ipiv, np.eye(n), lower=1)
    if info != 0 or info2 != 0:
        raise SingularMatrixError(f"symmetric factorization failed (info={info}, {info2})")
    return 0.5 * (inv + inv.T)


def k_inverse_entry(K: CharacteristicMatrix | np.ndarray, i: int, j: int,
                    cond_cap: float = DEFAULT_COND_CAP):
    A = K.entries if isinstance(K, CharacteristicMatrix) else np.asarray(K)
    n = A.shape[0]
    _check_condition(A, cond_cap)
    e = np.zeros(n, dtype=A.dtype)
    e[j] = 1.0
    if np.iscomplexobj(A):
        lu, ipiv, _ = lapack.zsytrf(A, lower=1)
        col, _ = lapack.zsytrs(lu, ipiv, e, lower=1)
    else:
        lu, ipiv, _ = lapack.dsytrf(A, lower=1)
        col, _ = lapack.dsytrs(lu, ipiv, e, lower=1)
    return col[i]


def resolvent_kernel(domain: DomainSpec, omega, x, y, z, tol: float = 1e-12,
                     cond_cap: float = DEFAULT_COND_CAP):
    """Krein formula: G_omega(x, y) = G^X(x, y) + sum_jk G^X(x, x_j) [Gamma^-1]_jk G^X(x_k, y)."""
    from .domain import domain_green

    kp = z if isinstance(z, SpectralParam) else kappa(z)
    base = domain_green(domain, x, y, kp, tol)
    if domain.n_sites == 0:
        return base
    green = GreenOperator(domain, tol)
    K = assemble(domain, omega, kp, tol, green=green)
    inv = K.orientation * k_inverse(K, cond_cap)
    gx = green.column(x, kp)
    gy = green.column(y, kp)
    val = base + gx @ inv @ gy
    return val.real if kp.is_real else complex(val)


# ----------------------------------------------------------------------------
# Inertia
# ----------------------------------------------------------------------------

@dataclass
class Inertia:
    neg: int
    zero: int
    pos: int
    logabsdet: float
    sign: float
    min_pivot: float   # smallest |pivot| relative to the largest


def inertia(A: np.ndarray, zero_tol: float = 0.0) -> Inertia:
    """Inertia, log|det| and det sign of a real symmetric matrix via Bunch-Kaufman LDL^T."""
    n = A.shape[0]
    if n == 0:
        return Inertia(0, 0, 0, 0.0, 1.0, 1.0)
    _, D, _ = sla.ldl(A, lower=True, check_finite=False)
    diag = np.diag(D).copy()
    sub = np.diag(D, -1)
    two = np.flatnonzero(sub != 0.0)
    single = np.ones(n, dtype=bool)
    single[two] = False
    single[two + 1] = False
    piv = diag[single]
    neg = int(np.sum(piv < 0))
    pos = int(np.sum(piv > 0))
    zero = int(np.sum(piv == 0))
    logdet = float(np.sum(np.log(np.abs(piv[piv != 0])))) if piv.size else 0.0
    sign = float(np.prod(np.sign(piv))) if piv.size else 1.0
    mags = list(np.abs(piv))
    if two.size:
        a, c, b = diag[two], diag[two + 1], sub[two]
        det2 = a * c - b * b
        # det2 < 0: one eigenvalue of each sign; det2 > 0: both share the sign of a
        neg += int(np.sum(det2 < 0)) + 2 * int(np.sum((det2 > 0) & (a < 0)))
        pos += int(np.sum(det2 < 0)) + 2 * int(np.sum((det2 > 0) & (a > 0)))
        zero += int(np.sum(det2 == 0))
        logdet += float(np.sum(np.log(np.abs(det2[det2 != 0]))))
        sign *= float(np.prod(np.sign(det2)))
        half = 0.5 * (a + c)
        rad = np.sqrt(0.25 * (a - c) ** 2 + b * b)
        mags.extend(np.minimum(np.abs(half - rad), np.abs(half + rad)))
        mags.extend(np.maximum(np.abs(half - rad), np.abs(half + rad)))
    mags = np.asarray(mags)
    scale = mags.max() if mags.size else 1.0
    rel = float(mags.min() / scale) if scale > 0 else 0.0
    if zero_tol > 0:
        small = mags < zero_tol * scale
        zero = max(zero, int(np.sum(small)))
    return Inertia(neg, zero, pos, logdet, sign, rel)
