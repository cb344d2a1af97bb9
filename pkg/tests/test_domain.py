import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from deltales.domain import (BC, ConvergenceError, DomainSpec, GreenOperator, corrector, domain_green,
                             green_1d, image_expansion, lattice_points)
from deltales.greens import DomainError, free_green, kappa


def _sinh_dirichlet(L, x, y, k):
    lo, hi = min(x, y), max(x, y)
    return math.sinh(k * lo) * math.sinh(k * (L - hi)) / (k * math.sinh(k * L))


def _cosh_neumann(L, x, y, k):
    lo, hi = min(x, y), max(x, y)
    return math.cosh(k * lo) * math.cosh(k * (L - hi)) / (k * math.sinh(k * L))


def box(d, L, bc):
    return DomainSpec.cube(d, L, bc)


# ---------------------------------------------------------------- spec

def test_lattice_offset_and_integer():
    pts = lattice_points(2, 3, "offset")
    assert pts.shape == (9, 2) and pts.min() == 0.5 and pts.max() == 2.5
    assert DomainSpec.cube(3, 12, lattice="integer").n_sites == 11 ** 3


def test_domain_rejects_close_points():
    with pytest.raises(DomainError):
        DomainSpec(1, 2.0, BC.DIRICHLET, np.array([[0.2]]))
    with pytest.raises(DomainError):
        DomainSpec(1, 4.0, BC.DIRICHLET, np.array([[1.0], [1.0]]))
    with pytest.raises(DomainError):
        DomainSpec(4, 2.0, BC.DIRICHLET, np.zeros((0, 4)))


def test_outside_point_rejected():
    spec = box(1, 2, "dirichlet")
    with pytest.raises(DomainError):
        domain_green(spec, [3.0], [1.0], kappa(-1))


# ---------------------------------------------------------------- examples

def test_dirichlet_example():
    spec = box(1, 2, "dirichlet")
    val = domain_green(spec, [1.0], [1.0], kappa(-1))
    assert val.real == pytest.approx(math.sinh(1) ** 2 / math.sinh(2), rel=1e-12)
    assert val.real == pytest.approx(0.380797, abs=1e-6)
    assert corrector(spec, [1.0], [1.0], kappa(-1)).real == pytest.approx(0.119203, abs=1e-6)


def test_periodic_example():
    spec = box(1, 2, "periodic")
    for x in (0.3, 1.0, 1.7):
        val = domain_green(spec, [x], [x], kappa(-1))
        assert val.real == pytest.approx(0.5 + math.exp(-2) / (1 - math.exp(-2)), rel=1e-12)
        assert corrector(spec, [x], [x], kappa(-1)).real == pytest.approx(-0.156518, abs=1e-6)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_free_space_is_free_kernel(d):
    spec = box(d, 3, "free")
    x = np.full(d, 0.7)
    y = np.full(d, 1.9)
    r = np.linalg.norm(x - y)
    assert domain_green(spec, x, y, kappa(-2)) == pytest.approx(free_green(d, r, kappa(-2)), rel=1e-15)
    assert corrector(spec, x, y, kappa(-2)) == 0
    assert len(image_expansion(spec, x, y, kappa(-2)).images) == 1


def test_image_signs():
    spec = box(1, 2, "dirichlet")
    exp = image_expansion(spec, [0.5], [1.2], kappa(-1), 1e-12)
    assert set(exp.signs) == {-1.0, 1.0}
    assert exp.tail_bound <= 1e-12
    neu = image_expansion(box(1, 2, "neumann"), [0.5], [1.2], kappa(-1), 1e-12)
    assert np.all(neu.signs == 1.0)


def test_convergence_error_reports_kappa():
    spec = box(3, 4, "dirichlet")
    with pytest.raises(ConvergenceError, match="kappa"):
        domain_green(spec, [1.0, 1.0, 1.0], [2.0, 2.0, 2.0], kappa(-1e-8))


# ---------------------------------------------------------------- properties

@pytest.mark.parametrize("d", [1, 2, 3])
def test_dirichlet_vanishes_on_faces(d):
    rng = np.random.default_rng(d)
    L = 3.0
    spec = box(d, L, "dirichlet")
    kp = kappa(-2.0)
    for _ in range(10):
        y = rng.uniform(0.6, L - 0.6, d)
        x = rng.uniform(0.2, L - 0.2, d)
        axis = rng.integers(d)
        x[axis] = 1e-8 if rng.random() < 0.5 else L - 1e-8
        g = domain_green(spec, x, y, kp)
        g0 = free_green(d, np.linalg.norm(x - y), kp)
        assert abs(g) <= 1e-6 * abs(g0)


@pytest.mark.parametrize("d", [1, 2, 3])
@given(data=st.data())
def test_dirichlet_domination_and_symmetry(d, data):
    L = 3.0
    spec = box(d, L, "dirichlet")
    pt = st.lists(st.floats(0.05, L - 0.05), min_size=d, max_size=d)
    x = np.array(data.draw(pt))
    y = np.array(data.draw(pt))
    r = np.linalg.norm(x - y)
    if r < 1e-3:
        return
    E = data.draw(st.floats(-30.0, -0.5))
    kp = kappa(E)
    gxy = domain_green(spec, x, y, kp).real
    gyx = domain_green(spec, y, x, kp).real
    g0 = free_green(d, r, kp).real
    assert 0 < gxy < g0
    # truncation tolerance is absolute, so symmetry is too
    assert abs(gxy - gyx) <= 1e-12


@pytest.mark.parametrize("bc", ["dirichlet", "neumann", "periodic"])
@given(x=st.floats(0.01, 3.99), y=st.floats(0.01, 3.99), E=st.floats(-25.0, -0.05))
def test_1d_image_sum_matches_closed_form(bc, x, y, E):
    spec = box(1, 4, bc)
    k = math.sqrt(-E)
    img = domain_green(spec, [x], [y], kappa(E), 1e-13).real
    if bc == "dirichlet":
        ref = _sinh_dirichlet(4.0, x, y, k)
    elif bc == "neumann":
        ref = _cosh_neumann(4.0, x, y, k)
    else:
        ref = float(green_1d(BC.PERIODIC, 4.0, x, y, k))
    assert img == pytest.approx(ref, rel=1e-10, abs=1e-13)


@pytest.mark.parametrize("d,bc", [(1, "dirichlet"), (2, "dirichlet"), (3, "dirichlet"), (2, "periodic"),
                                  (3, "neumann")])
def test_truncation_robustness(d, bc):
    spec = box(d, 3, bc)
    x = np.full(d, 0.8)
    y = np.full(d, 2.1)
    tol = 1e-10
    a = domain_green(spec, x, y, kappa(-1.5), tol)
    b = domain_green(spec, x, y, kappa(-1.5), tol / 1e4)
    assert abs(a - b) < tol


@pytest.mark.parametrize("d,bc", [(2, "dirichlet"), (3, "dirichlet"), (2, "periodic"), (2, "neumann")])
def test_green_operator_matches_pointwise(d, bc):
    spec = box(d, 3, bc)
    op = GreenOperator(spec, 1e-12)
    for E in (-3.0, -1.0):
        G = op.matrix(kappa(E).kappa)
        pts = spec.lattice
        for i, j in [(0, 1), (2, 5), (3, 3), (8, 0)]:
            if i == j:
                ref = -corrector(spec, pts[i], pts[i], kappa(E))
            else:
                ref = domain_green(spec, pts[i], pts[j], kappa(E))
            assert G[i, j] == pytest.approx(ref.real, rel=1e-10, abs=1e-13)
        assert np.allclose(G, G.T, rtol=0, atol=1e-14)


def test_green_operator_1d_diagonal():
    spec = box(1, 6, "dirichlet")
    G = GreenOperator(spec).matrix(1.0)
    x = spec.lattice[:, 0]
    for i in range(6):
        assert G[i, i] == pytest.approx(-corrector(spec, [x[i]], [x[i]], 1.0).real, rel=1e-12)
