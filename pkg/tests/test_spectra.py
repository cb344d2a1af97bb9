import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from deltales.domain import BC, DomainSpec
from deltales.oracles import ShootingProblem, shoot_spectrum, two_center_kappa_1d
from deltales.spectra import (OrientationError, branch_monotonicity_check, count_below, make_counter,
                              solve_spectrum)


def one_site(d, L, bc="free"):
    return DomainSpec(d, L, BC(bc), np.full((1, d), L / 2.0))


# ---------------------------------------------------------------- counting

def test_count_single_center_d1():
    dom = one_site(1, 40)
    assert count_below(dom, [-2.0], -2.0) == 0
    assert count_below(dom, [-2.0], -0.5) == 1


def test_count_empty_lattice():
    dom = DomainSpec(2, 3.0, BC.DIRICHLET, np.zeros((0, 2)))
    for E in (-100.0, -1.0, -1e-6):
        assert count_below(dom, [], E) == 0


@pytest.mark.parametrize("bc", ["free", "dirichlet"])
def test_count_single_center_d3(bc):
    dom = one_site(3, 4, bc)
    assert count_below(dom, [-1.0], -200.0) == 0
    assert count_below(dom, [-1.0], -100.0) == 1


def test_count_rejects_nonnegative():
    with pytest.raises(ValueError):
        count_below(one_site(1, 4), [-2.0], 0.0)


def test_positive_coupling_offset_d1():
    # a repulsive site has no bound state; the offset keeps the count at zero
    dom = DomainSpec(1, 10.0, BC.DIRICHLET, np.array([[3.0], [6.0]]))
    for method in ("dense", "chain"):
        assert count_below(dom, [2.0, -2.0], -0.01, method=method) == 1
        assert count_below(dom, [2.0, 1.0], -0.01, method=method) == 0


# ---------------------------------------------------------------- solve

def test_solve_two_center():
    dom = DomainSpec(1, 40.0, BC.FREE, np.array([[19.5], [20.5]]))
    sp = solve_spectrum(dom, [-2.0, -2.0], (-3.0, -0.01))
    k = two_center_kappa_1d(-2.0, 1.0, +1)
    assert len(sp) == 1 and sp.total == 1
    assert sp.eigenvalues[0] == pytest.approx(-k * k, rel=1e-10)
    assert sp.eigenvalues[0] == pytest.approx(-1.6345, abs=1e-4)
    assert two_center_kappa_1d(-2.0, 1.0, -1) is None


def test_solve_centered_dirichlet():
    dom = one_site(1, 20, "dirichlet")
    sp = solve_spectrum(dom, [-2.0], (-3.0, -0.01))
    assert sp.eigenvalues[0] == pytest.approx(-1.0, abs=1e-3)
    assert sp.eigenvalues[0] == pytest.approx(-1.0, abs=1e-8)
    assert sp.residuals[0] <= 1e-10


def test_solve_empty():
    dom = DomainSpec(1, 5.0, BC.DIRICHLET, np.zeros((0, 1)))
    sp = solve_spectrum(dom, [], (-5.0, -0.1))
    assert len(sp) == 0 and sp.total == 0


def test_solve_rejects_bad_window():
    with pytest.raises(ValueError):
        solve_spectrum(one_site(1, 4), [-2.0], (-1.0, 0.5))


@pytest.mark.parametrize("d,bc", [(2, "dirichlet"), (2, "free"), (3, "dirichlet")])
def test_single_center_anchor_in_box(d, bc):
    from deltales.oracles import single_center_energy

    # d=2 needs a strong coupling for the box to resolve the level
    w = {2: -10.0, 3: -1.0}[d]
    E = single_center_energy(d, w)
    dom = one_site(d, {2: 30, 3: 4}[d], bc)
    sp = solve_spectrum(dom, [w], (2 * E, 0.5 * E))
    assert len(sp) == 1
    assert sp.eigenvalues[0] == pytest.approx(E, rel=1e-6)


def test_jitter_reported_at_exact_eigenvalue():
    dom = one_site(1, 40)
    counter = make_counter(dom, [-2.0], "dense")
    sp = solve_spectrum(dom, [-2.0], (-1.0, -0.5), counter=counter)
    # E=-1 is exactly the bound state: the low end is probed off the root
    assert sp.jitters and sp.jitters[0][0] == -1.0
    assert count_below(dom, [-2.0], -1.0) in (0, 1)


# ---------------------------------------------------------------- properties

realization = st.tuples(st.integers(0, 10**6), st.integers(2, 20))


@settings(max_examples=40)
@given(realization)
def test_counting_consistency(args):
    seed, n = args
    rng = np.random.default_rng(seed)
    dom = DomainSpec.cube(1, n, "dirichlet")
    w = rng.uniform(-3, -1, n)
    lo, hi = np.sort(rng.uniform(-3, -0.01, 2))
    sp = solve_spectrum(dom, w, (lo, hi))
    assert sp.total == count_below(dom, w, hi) - count_below(dom, w, lo)
    assert np.all((sp.eigenvalues >= lo) & (sp.eigenvalues <= hi))


@settings(max_examples=25)
@given(seed=st.integers(0, 10**6), d=st.sampled_from([1, 2, 3]))
def test_count_monotone(seed, d):
    rng = np.random.default_rng(seed)
    dom = DomainSpec.cube(d, {1: 12, 2: 3, 3: 3}[d], "dirichlet", lattice="offset" if d < 3 else "integer")
    w = rng.uniform(-3, -1, dom.n_sites)
    # boxes in d >= 2 need kappa * L of order one for the image sums
    lo, hi = {1: (-3.0, -0.05), 2: (-3.0, -1.0), 3: (-170.0, -10.0)}[d]
    Es = np.sort(rng.uniform(lo, hi, 15))
    counter = make_counter(dom, w)
    c = [count_below(dom, w, E, counter=counter) for E in Es]
    assert np.all(np.diff(c) >= 0)


@settings(max_examples=30)
@given(seed=st.integers(0, 10**6), bc=st.sampled_from(["dirichlet", "neumann", "free"]))
def test_chain_matches_dense(seed, bc):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 25))
    dom = DomainSpec.cube(1, n, bc)
    w = rng.uniform(-3, -1, n)
    a = solve_spectrum(dom, w, (-3.0, -0.02), method="chain")
    b = solve_spectrum(dom, w, (-3.0, -0.02), method="dense")
    assert len(a) == len(b)
    assert np.allclose(a.eigenvalues, b.eigenvalues, rtol=1e-10, atol=0)


@settings(max_examples=20)
@given(seed=st.integers(0, 10**6))
def test_oracle_equivalence_small(seed):
    rng = np.random.default_rng(seed)
    dom = DomainSpec.cube(1, 20, "dirichlet")
    w = rng.uniform(-3, -1, 20)
    ours = solve_spectrum(dom, w, (-3.0, -1e-6))
    ref = shoot_spectrum(ShootingProblem(20.0, dom.lattice[:, 0], w), (-3.0, -1e-6))
    assert len(ours) == len(ref)
    assert np.max(np.abs(ours.eigenvalues / ref.eigenvalues - 1), initial=0) <= 1e-8


# ---------------------------------------------------------------- branches

def test_branch_monotonicity_d3_random():
    rng = np.random.default_rng(11)
    dom = DomainSpec.cube(3, 3, "dirichlet", lattice="integer")
    assert dom.n_sites == 8
    rep = branch_monotonicity_check(dom, rng.uniform(-3, -1, 8), np.linspace(-50, -1, 50))
    assert rep["direction"] == "decreasing" and rep["monotone"]


def test_branch_single_site_d1_closed_form():
    dom = one_site(1, 40)
    Es = np.linspace(-5, -0.1, 30)
    rep = branch_monotonicity_check(dom, [-2.0], Es)
    ref = 0.5 - 1 / (2 * np.sqrt(-Es))
    assert np.allclose(rep["branches"][:, 0], ref, rtol=0, atol=1e-14)
    assert np.all(np.diff(ref) < 0) and rep["monotone"]


def test_branch_single_site_d2_closed_form():
    dom = one_site(2, 6)
    Es = np.linspace(-5, -0.1, 30)
    rep = branch_monotonicity_check(dom, [-1.5], Es)
    ref = 1 / -1.5 - np.log(np.sqrt(-Es)) / (2 * math.pi)
    assert rep["direction"] == "increasing"
    assert np.allclose(rep["branches"][:, 0], ref, rtol=0, atol=1e-14)
    assert np.all(np.diff(ref) > 0) and rep["monotone"]


def test_branch_wrong_direction_detected():
    dom = one_site(1, 40)
    rep = branch_monotonicity_check(dom, [-2.0], np.linspace(-5, -0.1, 10), direction="increasing")
    assert not rep["monotone"] and rep["max_violation"] > 0


def test_orientation_error_on_broken_counter():
    class Flipped:
        def __init__(self, inner):
            self.inner = inner

        def evaluate(self, E):
            c = self.inner.evaluate(E)
            c.count = 5 - c.count
            return c

    dom = DomainSpec.cube(1, 6, "dirichlet")
    w = -2.0 * np.ones(6)
    with pytest.raises(OrientationError):
        solve_spectrum(dom, w, (-3.0, -0.01), counter=Flipped(make_counter(dom, w)))
