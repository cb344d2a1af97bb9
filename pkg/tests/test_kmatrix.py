import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltales.domain import BC, DomainSpec
from deltales.greens import effective_energy, kappa
from deltales.kmatrix import (SingularMatrixError, assemble, inertia, k_inverse, k_inverse_entry,
                              resolvent_kernel)
from deltales.oracles import delta_resolvent_1d


def free_points(d, pts, L=None):
    pts = np.atleast_2d(np.asarray(pts, float))
    L = L if L is not None else float(pts.max() + 1.0)
    return DomainSpec(d, L, BC.FREE, pts)


# ---------------------------------------------------------------- assemble

def test_assemble_d3_single_center_singular():
    K = assemble(free_points(3, [[1.0, 1.0, 1.0]]), [-1.0], -16 * math.pi**2)
    assert K.entries.shape == (1, 1)
    assert abs(K.entries[0, 0]) < 1e-15


def test_assemble_d1_single_center_zero():
    K = assemble(free_points(1, [[1.0]]), [-2.0], -1.0)
    assert K.entries[0, 0] == 0.0


def test_assemble_d1_pair():
    K = assemble(free_points(1, [[1.0], [2.0]]), [-2.0, -2.0], -1.0)
    assert np.allclose(np.diag(K.entries), 0.0, atol=1e-15)
    assert K.entries[0, 1] == pytest.approx(-math.exp(-1) / 2, rel=1e-14)
    assert K.entries[0, 1] == pytest.approx(-0.18394, abs=1e-5)


@pytest.mark.parametrize("d,w", [(1, -2.0), (2, -1.5), (3, -1.0)])
def test_assemble_diagonal_convention(d, w):
    z = -2.3
    k = math.sqrt(-z)
    K = assemble(free_points(d, [np.full(d, 1.0)]), [w], z).entries[0, 0]
    expected = {1: -1 / w - 1 / (2 * k), 2: 1 / w - math.log(k) / (2 * math.pi), 3: 1 / w + k / (4 * math.pi)}
    assert K == pytest.approx(expected[d], rel=1e-14)


def test_length_mismatch():
    with pytest.raises(ValueError):
        assemble(free_points(1, [[1.0], [2.0]]), [-1.0], -1.0)


@pytest.mark.parametrize("d,bc", [(1, "dirichlet"), (1, "free"), (2, "dirichlet"), (2, "free"), (3, "dirichlet"),
                                  (3, "free")])
@pytest.mark.parametrize("z", [-2.0, -1.0 + 0.4j])
def test_split_identity(d, bc, z):
    dom = DomainSpec.cube(d, 3, bc)
    w = -np.linspace(1.0, 3.0, dom.n_sites)
    K = assemble(dom, w, z, split=True)
    p = K.split
    rebuilt = p["sign"] * p["t"] + p["v"] - p["shift"] * np.eye(K.n)
    assert np.max(np.abs(rebuilt - K.entries)) <= 1e-14 * max(1.0, np.abs(K.entries).max())
    # the shift is e_d up to the per-dimension orientation
    e = effective_energy(d, kappa(z))
    assert abs(abs(p["shift"]) - abs(e)) < 1e-15 * max(1, abs(e))


@pytest.mark.parametrize("d", [1, 2, 3])
def test_hermitian_at_real_energy(d):
    dom = DomainSpec.cube(d, 3, "dirichlet")
    w = -np.linspace(1.0, 3.0, dom.n_sites)
    K = assemble(dom, w, -1.7).entries
    assert K.dtype == float
    assert np.array_equal(K, K.T)
    assert np.all(np.isreal(np.linalg.eigvals(K)))


def test_complex_symmetric():
    dom = DomainSpec.cube(2, 3, "dirichlet")
    K = assemble(dom, -2.0 * np.ones(9), -1.0 + 0.5j).entries
    assert np.iscomplexobj(K)
    assert np.array_equal(K, K.T)


# ---------------------------------------------------------------- inverses

def test_k_inverse_entry_scalar():
    K = assemble(free_points(3, [[1.0, 1.0, 1.0]]), [-1.0], -1.0)
    assert k_inverse_entry(K, 0, 0) == pytest.approx(1 / (-1 + 1 / (4 * math.pi)), rel=1e-14)
    assert k_inverse_entry(K, 0, 0) == pytest.approx(-1.08646, abs=1e-5)


def test_k_inverse_diagonal():
    c = np.array([2.0, -4.0, 0.5])
    inv = k_inverse(np.diag(c))
    assert np.allclose(inv, np.diag(1 / c), rtol=1e-15)


def test_k_inverse_pair():
    K = assemble(free_points(1, [[1.0], [2.0]]), [-2.0, -2.0], -1.0)
    inv = k_inverse(K)
    off = 1 / K.entries[0, 1]
    assert inv[0, 1] == pytest.approx(off, rel=1e-13)
    # -2 e = -5.43656
    assert inv[0, 1] == pytest.approx(-5.4366, abs=1e-4)
    assert abs(inv[0, 0]) < 1e-14


def test_singular_raises_with_report():
    K = assemble(free_points(1, [[1.0]]), [-2.0], -1.0)
    with pytest.raises(SingularMatrixError) as exc:
        k_inverse_entry(K, 0, 0)
    assert exc.value.smallest_singular_value == 0.0


@given(seed=st.integers(0, 10**6), complex_z=st.booleans())
def test_entry_matches_full_inverse(seed, complex_z):
    rng = np.random.default_rng(seed)
    dom = DomainSpec.cube(2, 3, "dirichlet")
    w = rng.uniform(-3, -1, dom.n_sites)
    z = -rng.uniform(0.5, 5) + (1j * rng.uniform(0.1, 2) if complex_z else 0)
    K = assemble(dom, w, z)
    full = np.linalg.inv(K.entries)
    i, j = rng.integers(dom.n_sites, size=2)
    assert abs(k_inverse_entry(K, i, j) - full[i, j]) <= 1e-10 * np.abs(full).max()
    assert np.max(np.abs(k_inverse(K) - full)) <= 1e-10 * np.abs(full).max()


def test_k_inverse_decay_on_chain():
    dom = DomainSpec.cube(1, 20, "dirichlet")
    rng = np.random.default_rng(3)
    for E in (-1.0, -4.0):
        w = rng.uniform(-3, -1, 20)
        inv = k_inverse(assemble(dom, w, E))
        row = np.abs(inv[0])
        slope = np.polyfit(np.arange(20), np.log(row), 1)[0]
        assert slope < 0


# ---------------------------------------------------------------- resolvent

def test_resolvent_empty_field():
    dom = DomainSpec(1, 4.0, BC.DIRICHLET, np.zeros((0, 1)))
    from deltales.domain import domain_green
    assert resolvent_kernel(dom, [], [1.0], [2.5], -1.0) == domain_green(dom, [1.0], [2.5], kappa(-1.0))


def test_resolvent_example():
    dom = DomainSpec(1, 40.0, BC.FREE, np.array([[0.0]]), origin=np.array([-20.0]))
    val = resolvent_kernel(dom, [-2.0], [1.0], [-1.0], -4.0)
    assert val == pytest.approx(math.exp(-4) / 4 + (math.exp(-2) / 4) ** 2 * 4, rel=1e-13)
    assert val == pytest.approx(0.009158, abs=1e-6)


@given(w=st.floats(-5, -0.2), a=st.floats(-3, 3), x=st.floats(-6, 6), y=st.floats(-6, 6),
       re=st.floats(-9, -0.1), im=st.floats(-3, 3))
def test_krein_matches_rank_one_resolvent(w, a, x, y, re, im):
    if min(abs(x - a), abs(y - a)) < 1e-6:
        return
    dom = DomainSpec(1, 20.0, BC.FREE, np.array([[a]]), origin=np.array([-10.0]))
    z = complex(re, im)
    try:
        val = resolvent_kernel(dom, [w], [x], [y], z)
    except SingularMatrixError:
        return
    ref = delta_resolvent_1d(w, a, x, y, z)
    assert abs(val - ref) <= 1e-10 * max(1.0, abs(ref))


@settings(max_examples=10)
@given(seed=st.integers(0, 10**6))
def test_resolvent_symmetric(seed):
    rng = np.random.default_rng(seed)
    dom = DomainSpec.cube(2, 3, "dirichlet")
    w = rng.uniform(-3, -1, 9)
    x = rng.uniform(0.1, 2.9, 2) + 0.013
    y = rng.uniform(0.1, 2.9, 2) + 0.007
    z = -rng.uniform(0.5, 4)
    a = resolvent_kernel(dom, w, x, y, z)
    b = resolvent_kernel(dom, w, y, x, z)
    assert abs(a - b) <= 1e-10 * max(abs(a), 1e-12)


# ---------------------------------------------------------------- inertia

@given(seed=st.integers(0, 10**6), n=st.integers(1, 30))
def test_inertia_matches_eigvalsh(seed, n):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n))
    A = M + M.T
    ev = np.linalg.eigvalsh(A)
    inr = inertia(A)
    assert inr.neg == int(np.sum(ev < 0)) and inr.pos == int(np.sum(ev > 0))
    sign, logdet = np.linalg.slogdet(A)
    assert inr.sign == sign
    assert inr.logabsdet == pytest.approx(logdet, rel=1e-10, abs=1e-10)
