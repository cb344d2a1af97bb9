import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from deltales.greens import (EULER_GAMMA, DomainError, bessel_k0, effective_energy, free_green,
                             k0, kappa)

neg_energy = st.floats(min_value=-400.0, max_value=-1e-4)
off_axis = st.tuples(st.floats(-50, 50), st.floats(0.01, 50)).map(lambda t: complex(t[0], t[1]))


# ---------------------------------------------------------------- kappa

def test_kappa_negative_real():
    assert kappa(-1.0).kappa == 1.0
    assert kappa(-4.0).kappa == 2.0


def test_kappa_complex_matches_mpmath():
    k = kappa(-2 + 0.5j).kappa
    ref = complex(mpmath.sqrt(mpmath.mpc(2, -0.5)))
    assert abs(k - ref) < 1e-15
    assert k == pytest.approx(1.4250 - 0.1754j, abs=1e-4)


@pytest.mark.parametrize("z", [0.0, 1.0, 3.5, complex(2.0, 0.0)])
def test_kappa_rejects_cut(z):
    with pytest.raises(DomainError):
        kappa(z)


@given(off_axis)
def test_kappa_square_and_sign(z):
    k = kappa(z).kappa
    assert k.real > 0
    assert abs(k * k + z) <= 1e-14 * max(1.0, abs(z))


@given(neg_energy)
def test_kappa_real_branch_exact(E):
    k = kappa(E)
    assert k.is_real and k.kappa.real == math.sqrt(-E)


def test_kappa_continuity_on_arcs():
    # arcs around the origin that avoid the cut [0, inf)
    for rad in (0.1, 1.0, 30.0):
        th = np.linspace(1e-3, 2 * np.pi - 1e-3, 4001)
        ks = np.array([kappa(rad * cmath.exp(1j * t)).kappa for t in th])
        assert np.max(np.abs(np.diff(ks))) < 5e-3 * math.sqrt(rad)


# ---------------------------------------------------------------- free kernel

def test_free_green_examples():
    assert free_green(3, 1.0, kappa(-1)) == pytest.approx(math.exp(-1) / (4 * math.pi), rel=1e-14)
    # e^-1 / (4 pi) = 0.02927492
    assert free_green(3, 1.0, kappa(-1)).real == pytest.approx(0.029275, abs=1e-6)
    assert free_green(1, 0.0, kappa(-1)) == 0.5
    assert free_green(2, 1.0, kappa(-1)).real == pytest.approx(0.4210244 / (2 * math.pi), rel=1e-7)
    # K0(1) / (2 pi) = 0.0670081
    assert free_green(2, 1.0, kappa(-1)).real == pytest.approx(0.067008, abs=1e-6)


@pytest.mark.parametrize("d", [2, 3])
def test_free_green_singular_origin(d):
    with pytest.raises(DomainError):
        free_green(d, 0.0, kappa(-1))


def test_free_green_rejects_bad_dimension():
    with pytest.raises(DomainError):
        free_green(4, 1.0, kappa(-1))


@pytest.mark.parametrize("d", [1, 2, 3])
@given(E=neg_energy)
def test_free_green_decreasing(d, E):
    kp = kappa(E)
    r = np.arange(0.5, 10.01, 0.5)
    vals = np.array([free_green(d, x, kp) for x in r])
    assert np.all(vals.imag == 0)
    pos = vals.real[vals.real > 0]
    # positive until underflow, strictly decreasing where representable
    assert np.all(vals.real >= 0)
    assert np.all(np.diff(pos) < 0)


def test_free_green_d2_small_argument():
    k, r = 1e-4, 1.0
    approx = (-math.log(k * r) + math.log(2) - EULER_GAMMA) / (2 * math.pi)
    assert free_green(2, r, k).real == pytest.approx(approx, abs=1e-6)


@pytest.mark.parametrize("d", [1, 2, 3])
@given(z=off_axis, r=st.floats(0.1, 8.0))
def test_conjugate_symmetry(d, z, r):
    a = free_green(d, r, kappa(z))
    b = free_green(d, r, kappa(z.conjugate()))
    assert abs(b - a.conjugate()) <= 1e-12 * max(abs(a), 1e-300)
    e = effective_energy(d, kappa(z))
    f = effective_energy(d, kappa(z.conjugate()))
    assert abs(f - e.conjugate()) <= 1e-14 * max(abs(e), 1.0)


def test_free_green_complex_matches_mpmath():
    z = -2 + 0.5j
    k = kappa(z).kappa
    for r in (0.3, 1.0, 4.0):
        ref2 = complex(mpmath.besselk(0, mpmath.mpc(k) * r)) / (2 * math.pi)
        assert abs(free_green(2, r, kappa(z)) - ref2) < 1e-12 * abs(ref2)
        ref3 = complex(mpmath.exp(-mpmath.mpc(k) * r) / (4 * mpmath.pi * r))
        assert abs(free_green(3, r, kappa(z)) - ref3) < 1e-13 * abs(ref3)


# ---------------------------------------------------------------- K0

def test_bessel_k0_examples():
    assert bessel_k0(1.0) == pytest.approx(0.421024438, abs=1e-9)
    assert bessel_k0(0.1) == pytest.approx(2.427069, abs=1e-6)
    assert bessel_k0(10.0) == pytest.approx(1.778006e-5, rel=1e-6)


@pytest.mark.parametrize("x", [0.0, -1.0])
def test_bessel_k0_domain(x):
    with pytest.raises(DomainError):
        bessel_k0(x)


def test_bessel_k0_relative_error_against_mpmath():
    xs = np.geomspace(1e-6, 50.0, 400)
    ours = k0(xs)
    ref = np.array([float(mpmath.besselk(0, x)) for x in xs])
    assert np.max(np.abs(ours / ref - 1)) <= 1e-12


def test_bessel_k0_against_scipy_dense_grid():
    xs = np.linspace(1e-3, 50.0, 20001)
    assert np.max(np.abs(k0(xs) / special.k0(xs) - 1)) <= 2e-12


def test_bessel_k0_underflow():
    assert bessel_k0(800.0) == 0.0
    assert 0.0 <= bessel_k0(700.0) < 1e-300


def test_k0_complex_argument():
    w = np.array([0.5 + 0.5j, 3.0 - 1.0j, 20.0 + 7.0j])
    ref = np.array([complex(mpmath.besselk(0, complex(v))) for v in w])
    assert np.max(np.abs(k0(w) - ref) / np.abs(ref)) < 1e-12


# ---------------------------------------------------------------- effective energies

def test_effective_energy_examples():
    assert effective_energy(3, kappa(-1)).real == pytest.approx(-1 / (4 * math.pi), rel=1e-15)
    assert effective_energy(1, kappa(-1)) == -0.5
    assert effective_energy(2, kappa(-1)) == 0.0
    with pytest.raises(DomainError):
        effective_energy(5, kappa(-1))
