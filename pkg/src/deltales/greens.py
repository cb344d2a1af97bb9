"""Free-space Green's functions of -Delta on R^d (d = 1, 2, 3) at negative energy.

Everything is written in terms of kappa = sqrt(-z) with Re kappa > 0, so each
kernel decays like exp(-kappa r) for z off the positive real axis.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

EULER_GAMMA = 0.57721566490153286060651209008240243

# series / quadrature crossover for K0
_K0_SERIES_MAX = 2.0


class DomainError(ValueError):
    """Argument outside the domain where a kernel is defined."""


@dataclass(frozen=True)
class SpectralParam:
    """Energy z together with kappa = sqrt(-z), Re kappa > 0."""

    z: complex
    kappa: complex

    @property
    def is_real(self) -> bool:
        return self.kappa.imag == 0.0


def kappa(z) -> SpectralParam:
    """Map an energy off [0, inf) to its decay constant.

    >>> kappa(-4.0).kappa
    (2+0j)
    """
    z = complex(z)
    if z.imag == 0.0 and z.real >= 0.0:
        raise DomainError(f"z={z} lies on the cut [0, inf)")
    if z.imag == 0.0:
        return SpectralParam(z, complex(math.sqrt(-z.real), 0.0))
    k = cmath.sqrt(-z)
    return SpectralParam(z, k)


def _as_kappa(k) -> complex:
    if isinstance(k, SpectralParam):
        return k.kappa
    return complex(k)


def _maybe_real(k: complex):
    return k.real if k.imag == 0.0 else k


# ----------------------------------------------------------------------------
# Modified Bessel function K0
# ----------------------------------------------------------------------------

def _k0_series(x):
    # K0 = -(ln(x/2) + gamma) I0(x) + sum_k (x^2/4)^k / (k!)^2 H_k
    q = x * x / 4.0
    term = np.ones_like(x)
    i0 = np.ones_like(x)
    tail = np.zeros_like(x)
    harmonic = 0.0
    for k in range(1, 40):
        term = term * q / (k * k)
        harmonic += 1.0 / k
        i0 = i0 + term
        tail = tail + term * harmonic
    return -(np.log(x / 2.0) + EULER_GAMMA) * i0 + tail


def _k0_quadrature(x):
    # K0(x) = int_0^inf exp(-x cosh t) dt; trapezoid converges geometrically
    # with rate set by the half-width of the analyticity strip
    arg = np.abs(np.angle(x))
    strip = max(np.pi / 2.0 - float(np.max(arg)), 0.05) if np.size(x) else np.pi / 2
    # the integrand is a Gaussian of width ~ 1/sqrt(|x|) near t = 0
    h = min(0.2, strip * 2.0 * np.pi / 45.0, 0.6 / math.sqrt(float(np.max(np.abs(x)))))
    xr = np.real(x)
    t_max = float(np.arccosh(1.0 + 45.0 / max(float(np.min(xr)), 1e-300)))
    t = np.arange(0.0, t_max + h, h)
    w = np.full(t.shape, h)
    w[0] = h / 2.0
    xs = np.asarray(x)[..., None]
    vals = np.exp(-xs * (np.cosh(t) - 1.0)) @ w
    return np.exp(-np.asarray(x)) * vals


def k0(x):
    """Vectorized K0 for real x > 0 or complex x with Re x > 0 (no checks)."""
    x = np.asarray(x)
    is_complex = np.iscomplexobj(x)
    out = np.zeros(x.shape, dtype=complex if is_complex else float)
    mag = np.abs(x)
    small = mag <= _K0_SERIES_MAX
    if np.any(small):
        out[small] = _k0_series(x[small])
    # beyond Re x ~ 745 the value underflows to zero
    live = ~small & (np.real(x) < 745.0)
    if np.any(live):
        # group by magnitude so the quadrature step fits each group
        groups = np.floor(np.log2(mag[live])).astype(int)
        idx = np.flatnonzero(live)
        for g in np.unique(groups):
            sel = idx[groups == g]
            for start in range(0, sel.size, 8192):
                chunk = sel[start:start + 8192]
                out.flat[chunk] = _k0_quadrature(x.flat[chunk])
    return out


def bessel_k0(x: float) -> float:
    """Modified Bessel function of the second kind, order zero, for x > 0."""
    x = float(x)
    if not x > 0.0:
        raise DomainError(f"bessel_k0 needs x > 0, got {x}")
    return float(k0(np.array([x]))[0])


# ----------------------------------------------------------------------------
# Kernels
# ----------------------------------------------------------------------------

def g0(d: int, r, k):
    """Array version of the free kernel; r may be an array, k a scalar kappa."""
    r = np.asarray(r, dtype=float)
    k = _maybe_real(complex(k))
    if d == 1:
        return np.exp(-k * r) / (2.0 * k)
    if d == 2:
        return k0(k * r) / (2.0 * np.pi)
    if d == 3:
        return np.exp(-k * r) / (4.0 * np.pi * r)
    raise DomainError(f"dimension must be 1, 2 or 3, got {d}")


def free_green(d: int, r: float, kp) -> complex:
    """G_0 at distance r for the spectral parameter kp (SpectralParam or kappa)."""
    if d not in (1, 2, 3):
        raise DomainError(f"dimension must be 1, 2 or 3, got {d}")
    r = float(r)
    if r < 0.0 or (d > 1 and r == 0.0):
        raise DomainError(f"free_green(d={d}) undefined at r={r}")
    val = g0(d, np.array([r]), _as_kappa(kp))[0]
    return complex(val)


def effective_energy(d: int, kp) -> complex:
    """Effective energy e_d entering the diagonal of the characteristic matrix.

    d=3: -kappa/(4 pi); d=1: -1/(2 kappa); d=2: ln(kappa)/(2 pi).
    """
    k = _as_kappa(kp)
    if d == 1:
        return -1.0 / (2.0 * k)
    if d == 2:
        return cmath.log(k) / (2.0 * math.pi)
    if d == 3:
        return -k / (4.0 * math.pi)
    raise DomainError(f"dimension must be 1, 2 or 3, got {d}")


def regularized_onsite(d: int, k):
    """Finite part of G_0(x, x): the subtracted diagonal scalar.

    d=1: G_0(0) = 1/(2 kappa); d=3: lim (G_0(r) - 1/(4 pi r)) = -kappa/(4 pi);
    d=2: -ln(kappa)/(2 pi), the constant (ln 2 - gamma)/(2 pi) is absorbed
    into the coupling.
    """
    k = _maybe_real(complex(k))
    if d == 1:
        return 1.0 / (2.0 * k)
    if d == 2:
        return -np.log(k) / (2.0 * np.pi)
    if d == 3:
        return -k / (4.0 * np.pi)
    raise DomainError(f"dimension must be 1, 2 or 3, got {d}")


def decay_bound(d: int, r, k_re: float, k_abs: float):
    """Upper bound on |G_0(r)| used for truncating image sums."""
    r = np.asarray(r, dtype=float)
    if d == 1:
        return np.exp(-k_re * r) / (2.0 * k_abs)
    if d == 2:
        # |K0(w)| <= sqrt(pi / (2 Re w)) exp(-Re w) * 1.25 for Re w >~ 1;
        # the max() keeps the bound sane near the origin.
        x = np.maximum(k_re * r, 1e-300)
        return 1.25 * np.sqrt(np.pi / (2.0 * x)) * np.exp(-x) / (2.0 * np.pi) + np.where(
            x < 1.0, (np.abs(np.log(x)) + 1.0) / (2.0 * np.pi), 0.0
        )
    return np.exp(-k_re * r) / (4.0 * np.pi * np.maximum(r, 1e-300))
