"""Point processes and Monte Carlo estimators over coupling ensembles.

Rescaled points are x = |Lambda| (E - E0). The full-box process is xi; the
subcube process zeta solves each block of a tiling with Dirichlet walls and
rescales with the volume of the full box. Every estimator returns a mean with
its Monte Carlo standard error; scaling fits use a bootstrap over realizations.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps

from .chain import CHAIN_BCS, ChainGeometry
from .disorder import DistributionSpec, sample_batch, uniform_stream
from .domain import BC, DomainSpec, GreenOperator
from .greens import DomainError, kappa
from .kmatrix import ORIENTATION, SingularMatrixError, assemble, gamma_matrix, inertia, k_inverse
from .spectra import Spectrum, make_counter, solve_spectrum

log = logging.getLogger(__name__)


class InsufficientDataError(ValueError):
    pass


class TilingError(ValueError):
    pass


class PairingError(ValueError):
    pass


@dataclass
class Estimate:
    mean: float
    stderr: float
    n: int

    def to_dict(self):
        return {"mean": self.mean, "stderr": self.stderr, "n": self.n}


def mean_se(x) -> Estimate:
    x = np.asarray(x, float)
    if x.size == 0:
        raise InsufficientDataError("no samples")
    se = float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else math.nan
    return Estimate(float(x.mean()), se, int(x.size))


# ----------------------------------------------------------------------------
# Ensembles
# ----------------------------------------------------------------------------

@dataclass
class Ensemble:
    """Realizations ``start .. start + realizations - 1`` of iid couplings on one domain."""

    domain: DomainSpec
    dist: DistributionSpec
    seed: int
    realizations: int
    start: int = 0
    method: str = "auto"
    tol: float = 1e-12
    _green: GreenOperator | None = field(default=None, repr=False)

    @property
    def indices(self) -> range:
        return range(self.start, self.start + self.realizations)

    @property
    def green(self) -> GreenOperator:
        # geometry only, shared by every realization
        if self._green is None:
            self._green = GreenOperator(self.domain, self.tol)
        return self._green

    def couplings(self, r: int) -> np.ndarray:
        return sample_batch(self.dist, self.domain.n_sites, self.seed, [r])[0]

    def coupling_matrix(self) -> np.ndarray:
        return sample_batch(self.dist, self.domain.n_sites, self.seed, self.indices)

    def uses_chain(self) -> bool:
        if self.method == "chain":
            return True
        return self.method == "auto" and self.domain.dimension == 1 and self.domain.bc in CHAIN_BCS

    def counts_below(self, energies, omegas: np.ndarray | None = None) -> np.ndarray:
        """(R, nE) eigenvalue counts below each energy."""
        energies = np.asarray(energies, float).reshape(-1)
        if np.any(energies >= 0):
            raise ValueError("energies must be negative")
        W = self.coupling_matrix() if omegas is None else np.atleast_2d(omegas)
        return counts_below_batch(self.domain, W, energies, self.uses_chain(), self.green)

    def solve(self, r: int, window, omega: np.ndarray | None = None) -> Spectrum:
        w = self.couplings(r) if omega is None else omega
        green = None if self.uses_chain() else self.green
        counter = make_counter(self.domain, w, "chain" if self.uses_chain() else "dense",
                               self.tol, green=green)
        return solve_spectrum(self.domain, w, window, self.tol, counter=counter, residuals=False)


def counts_below_batch(domain: DomainSpec, omegas: np.ndarray, energies, chain: bool,
                       green: GreenOperator | None = None) -> np.ndarray:
    energies = np.asarray(energies, float).reshape(-1)
    omegas = np.atleast_2d(np.asarray(omegas, float))
    if domain.n_sites == 0:
        return np.zeros((omegas.shape[0], energies.size), dtype=np.int64)
    if chain:
        return ChainGeometry(domain).counts(omegas, energies)
    green = green or GreenOperator(domain)
    d = domain.dimension
    out = np.empty((omegas.shape[0], energies.size), dtype=np.int64)
    offsets = np.sum(omegas > 0, axis=1) if d == 1 else np.zeros(omegas.shape[0], int)
    for e, E in enumerate(energies):
        k = kappa(E).kappa.real
        base = gamma_matrix(green, np.full(domain.n_sites, -1.0), k)
        base_diag = np.diag(base).copy()
        # gamma_matrix diagonal = coupling term - eps; swap the coupling term per realization
        flat = base_diag - (1.0 if d != 3 else -1.0)
        for r in range(omegas.shape[0]):
            w = omegas[r]
            A = base.copy()
            A[np.diag_indices_from(A)] = flat + (1.0 / w if d == 3 else -1.0 / w)
            out[r, e] = inertia(A).neg - offsets[r]
    return out


# ----------------------------------------------------------------------------
# Point samples
# ----------------------------------------------------------------------------

@dataclass
class PointSample:
    realization_id: int
    points: np.ndarray
    halfwidth: float
    E0: float
    volume: float

    def __post_init__(self):
        self.points = np.sort(np.asarray(self.points, float))
        if self.points.size and np.max(np.abs(self.points)) > self.halfwidth * (1 + 1e-12):
            raise ValueError("rescaled points must lie in [-w, w]")

    def __len__(self):
        return int(self.points.size)

    def physical(self) -> np.ndarray:
        return self.E0 + self.points / self.volume

    def count(self, lo: float, hi: float) -> int:
        return int(np.sum((self.points >= lo) & (self.points < hi)))


def les_window(E0: float, volume: float, w: float) -> tuple[float, float]:
    lo, hi = E0 - w / volume, E0 + w / volume
    if hi >= 0:
        raise ValueError("the physical LES window must lie below 0")
    return lo, hi


def build_les(spectrum: Spectrum, E0: float, volume: float, w: float,
              realization_id: int = 0) -> PointSample:
    lo, hi = les_window(E0, volume, w)
    slo, shi = spectrum.window
    scale = max(abs(lo), abs(hi))
    if abs(slo - lo) > 1e-12 * scale or abs(shi - hi) > 1e-12 * scale:
        raise ValueError(f"spectrum window {spectrum.window} does not match [{lo}, {hi}]")
    x = volume * (spectrum.expanded() - E0)
    return PointSample(realization_id, np.clip(x, -w, w), w, E0, volume)


def _balanced_edges(length: float, m: int) -> np.ndarray:
    n = int(round(length))
    if abs(n - length) > 1e-12:
        raise TilingError("subcube tiling needs integer box sides")
    sizes = np.full(m, n // m)
    sizes[: n % m] += 1
    return np.concatenate([[0], np.cumsum(sizes)]).astype(float)


@dataclass
class SubcubeArray:
    """Tiling of a cube by m^d blocks of (nearly) equal integer sides.

    The nominal block side is ell = L / m with m = round(L^(1 - alpha)), so
    ell ~ L^alpha; sides differ by at most one when m does not divide L.
    """

    domain: DomainSpec
    alpha: float
    m: int
    blocks: list
    sites: list

    @property
    def ell(self) -> float:
        return float(self.domain.sides[0]) / self.m

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @classmethod
    def from_domain(cls, domain: DomainSpec, alpha: float, m: int | None = None) -> "SubcubeArray":
        if not 0.0 < alpha <= 1.0:
            raise ValueError("alpha must lie in (0, 1]")
        L = float(domain.sides[0])
        if np.any(domain.sides != L):
            raise TilingError("subcube arrays are defined on cubes")
        if m is None:
            m = max(1, int(round(L ** (1.0 - alpha))))
        edges = _balanced_edges(L, m) + 0.0
        d = domain.dimension
        blocks, sites = [], []
        pts = domain.lattice - domain.origin
        owner = np.full(len(pts), -1)
        for idx in np.ndindex(*([m] * d)):
            lo = np.array([edges[i] for i in idx])
            hi = np.array([edges[i + 1] for i in idx])
            inside = np.all((pts > lo) & (pts < hi), axis=1)
            if np.any(owner[inside] >= 0):
                raise TilingError("blocks overlap")
            owner[inside] = len(blocks)
            try:
                blk = DomainSpec(d, float(hi[0] - lo[0]), BC.DIRICHLET, domain.lattice[inside],
                                 origin=domain.origin + lo, sides=hi - lo, min_margin=domain.min_margin)
            except DomainError as exc:
                raise TilingError(f"block {idx}: {exc}") from exc
            blocks.append(blk)
            sites.append(np.flatnonzero(inside))
        if np.any(owner < 0):
            raise TilingError("lattice points fall on block boundaries")
        return cls(domain, alpha, m, blocks, sites)


def build_zeta(domain: DomainSpec, omega, array: SubcubeArray, E0: float, w: float,
               tol: float = 1e-12, realization_id: int = 0) -> PointSample:
    if array.domain is not domain:
        raise TilingError("array was built for another domain")
    omega = np.asarray(getattr(omega, "values", omega), float)
    vol = domain.volume
    window = les_window(E0, vol, w)
    pts = []
    for blk, idx in zip(array.blocks, array.sites):
        if idx.size == 0:
            continue
        spec = solve_spectrum(blk, omega[idx], window, tol, residuals=False)
        pts.append(vol * (spec.expanded() - E0))
    x = np.concatenate(pts) if pts else np.zeros(0)
    return PointSample(realization_id, np.clip(x, -w, w), w, E0, vol)


def block_counts(array: SubcubeArray, omegas: np.ndarray, interval) -> np.ndarray:
    """(R, n_blocks) eigenvalue counts of each Dirichlet block in [a, b)."""
    a, b = interval
    omegas = np.atleast_2d(omegas)
    out = np.zeros((omegas.shape[0], array.n_blocks), dtype=np.int64)
    geoms = {}
    for p, (blk, idx) in enumerate(zip(array.blocks, array.sites)):
        if idx.size == 0:
            continue
        chain = blk.dimension == 1
        if chain:
            rel = np.round(blk.lattice[:, 0] - blk.origin[0], 9)
            key = (float(blk.sides[0]), tuple(rel))
            geom = geoms.setdefault(key, ChainGeometry(blk))
            # geometry is translation invariant; reuse it across equal blocks
            c = geom.counts(omegas[:, idx], [a, b])
        else:
            c = counts_below_batch(blk, omegas[:, idx], [a, b], False)
        out[:, p] = c[:, 1] - c[:, 0]
    return out


# ----------------------------------------------------------------------------
# DOS, Wegner, Minami
# ----------------------------------------------------------------------------

def estimate_dos(ensemble: Ensemble, E0: float, delta: float, counts=None) -> Estimate:
    """n(E0) ~ E[#eigenvalues in E0 +- delta/2] / (|Lambda| delta)."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    a, b = E0 - delta / 2.0, E0 + delta / 2.0
    if b >= 0:
        raise ValueError("DOS window must lie below 0")
    if ensemble.realizations < 1:
        raise InsufficientDataError("empty ensemble")
    if counts is None:
        c = ensemble.counts_below([a, b])
        counts = c[:, 1] - c[:, 0]
    est = mean_se(counts)
    norm = ensemble.domain.volume * delta
    se = est.stderr / norm if est.n > 1 else 0.0
    return Estimate(est.mean / norm, se, est.n)


def auto_dos_scan(ensemble: Ensemble, window, n_bins: int = 40) -> dict:
    """Coarse DOS histogram over ``window``; proposes E0 at the maximum."""
    lo, hi = window
    edges = np.linspace(lo, hi, n_bins + 1)
    c = ensemble.counts_below(edges)
    per_bin = np.diff(c, axis=1)
    width = edges[1] - edges[0]
    norm = ensemble.domain.volume * width
    nhat = per_bin.mean(axis=0) / norm
    se = per_bin.std(axis=0, ddof=1) / math.sqrt(per_bin.shape[0]) / norm if per_bin.shape[0] > 1 \
        else np.zeros(n_bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    i = int(np.argmax(nhat))
    return {"E0": float(centers[i]), "nhat": nhat, "stderr": se, "centers": centers,
            "edges": edges, "nhat_E0": float(nhat[i])}


def _bootstrap_slopes(rows: np.ndarray, logx: np.ndarray, stat, n_boot: int, seed: int):
    rng = np.random.Generator(np.random.PCG64(seed))
    R = rows.shape[0]
    out = []
    for _ in range(n_boot):
        sel = rng.integers(0, R, R)
        y = stat(rows[sel])
        if np.all(y > 0):
            out.append(np.polyfit(logx, np.log(y), 1)[0])
    return np.asarray(out)


def _scan(counts: np.ndarray, etas, stat, n_boot: int, seed: int) -> dict:
    etas = np.asarray(etas, float)
    y = stat(counts)
    logx = np.log(etas)
    if etas.size < 2 or np.any(y <= 0):
        slope, se = math.nan, math.nan
    else:
        slope = float(np.polyfit(logx, np.log(y), 1)[0])
        boots = _bootstrap_slopes(counts, logx, stat, n_boot, seed)
        se = float(boots.std(ddof=1)) if boots.size > 1 else math.nan
    return {"slope": slope, "slope_stderr": se}


def wegner_scan(ensemble: Ensemble, E0: float, etas, counts=None, n_boot: int = 200,
                boot_seed: int = 0) -> dict:
    """Per eta: E[X(I_eta)], P[X >= 1] with I_eta = [E0 - eta, E0 + eta]; log-log slope of E[X]."""
    etas = np.sort(np.asarray(etas, float))
    if E0 + etas.max() >= 0:
        raise ValueError("all intervals must lie below 0")
    if counts is None:
        energies = np.concatenate([E0 - etas, E0 + etas])
        c = ensemble.counts_below(energies)
        counts = c[:, etas.size:] - c[:, :etas.size]
    X = np.asarray(counts, float)
    rows = []
    for j, eta in enumerate(etas):
        ex = mean_se(X[:, j])
        p1 = mean_se((X[:, j] >= 1).astype(float))
        rows.append({"eta": float(eta), "mean_X": ex.mean, "mean_X_se": ex.stderr,
                     "p_ge1": p1.mean, "p_ge1_se": p1.stderr})
    fit = _scan(X, etas, lambda A: A.mean(axis=0), n_boot, boot_seed)
    return {"rows": rows, **fit, "counts": X}


def minami_scan(ensemble: Ensemble, E0: float, etas, counts=None, n_boot: int = 200,
                boot_seed: int = 0) -> dict:
    """Per eta: E[X(X-1)]; log-log slope (expected 2) and the ratio to (|Lambda| eta)^2."""
    etas = np.sort(np.asarray(etas, float))
    if counts is None:
        energies = np.concatenate([E0 - etas, E0 + etas])
        c = ensemble.counts_below(energies)
        counts = c[:, etas.size:] - c[:, :etas.size]
    X = np.asarray(counts, float)
    P = X * (X - 1.0)
    vol = ensemble.domain.volume
    rows = []
    for j, eta in enumerate(etas):
        e = mean_se(P[:, j])
        rows.append({"eta": float(eta), "mean_XX1": e.mean, "mean_XX1_se": e.stderr,
                     "ratio": e.mean / (vol * eta) ** 2})
    fit = _scan(P, etas, lambda A: A.mean(axis=0), n_boot, boot_seed)
    return {"rows": rows, **fit, "counts": X}


def double_point_rate(array: SubcubeArray, omegas: np.ndarray, E0: float, w: float) -> dict:
    """Sum over blocks of P[eta^{l,p}(I) >= 2] and max_p P[eta^{l,p}(I) >= 1], I = E0 +- w/|Lambda_L|."""
    interval = les_window(E0, array.domain.volume, w)
    bc = block_counts(array, omegas, interval)
    doubles = mean_se((bc >= 2).sum(axis=1))
    p1 = (bc >= 1).mean(axis=0)
    return {"rate": doubles.mean, "stderr": doubles.stderr, "n": doubles.n,
            "max_p_ge1": float(p1.max()), "mean_zeta": mean_se(bc.sum(axis=1)).to_dict()}


# ----------------------------------------------------------------------------
# Laplace functionals
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class TestFunction:
    """f(x) = sum_i a_i tau_i / ((x - sigma_i)^2 + tau_i^2) with a_i, tau_i > 0."""

    terms: tuple

    __test__ = False  # not a pytest class

    def __post_init__(self):
        terms = tuple(tuple(float(v) for v in t) for t in self.terms)
        if not terms:
            raise ValueError("a test function needs at least one term")
        for a, sigma, tau in terms:
            if not (a > 0 and tau > 0):
                raise ValueError("test function terms need a > 0 and tau > 0")
        object.__setattr__(self, "terms", terms)

    def __call__(self, x):
        x = np.asarray(x, float)
        out = np.zeros_like(x)
        for a, sigma, tau in self.terms:
            out = out + a * tau / ((x - sigma) ** 2 + tau * tau)
        return out

    def to_list(self):
        return [list(t) for t in self.terms]


def laplace_values(samples, f: TestFunction) -> np.ndarray:
    return np.array([math.exp(-float(np.sum(f(s.points)))) for s in samples])


def laplace_functional(samples, f: TestFunction) -> Estimate:
    if len(samples) == 0:
        raise InsufficientDataError("no samples")
    v = laplace_values(samples, f)
    if v.size == 1:
        return Estimate(float(v[0]), 0.0, 1)
    return mean_se(v)


def poisson_laplace(rate: float, f: TestFunction, w: float) -> float:
    """exp(-rate * int_{-w}^{w} (1 - e^{-f})) for a Poisson process on [-w, w]."""
    from scipy.integrate import quad

    pts = sorted({min(max(s, -w), w) for _, s, _ in f.terms})
    val, _ = quad(lambda x: 1.0 - math.exp(-float(f(x))), -w, w, points=pts, limit=400)
    return math.exp(-rate * val)


def xi_zeta_gap(xi_samples, zeta_samples, fs) -> list[dict]:
    """Paired estimates of E e^{-xi[f]} - E e^{-zeta[f]} (common random numbers)."""
    ids_x = [s.realization_id for s in xi_samples]
    ids_z = [s.realization_id for s in zeta_samples]
    if ids_x != ids_z:
        raise PairingError("xi and zeta samples must come from the same realizations in the same order")
    out = []
    for f in fs:
        if not isinstance(f, TestFunction):
            f = TestFunction(tuple(f))
        d = laplace_values(xi_samples, f) - laplace_values(zeta_samples, f)
        est = mean_se(d) if d.size > 1 else Estimate(float(d[0]), 0.0, 1)
        out.append({"terms": f.to_list(), "diff": est.mean, "gap": abs(est.mean),
                    "stderr": est.stderr, "n": est.n})
    return out


# ----------------------------------------------------------------------------
# Fractional moments
# ----------------------------------------------------------------------------

def distance_bins(domain: DomainSpec):
    pts = domain.lattice
    dist = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    bins, inv = np.unique(np.round(dist, 9), return_inverse=True)
    return bins, inv.reshape(dist.shape)


def frac_moment_rows(ensemble: Ensemble, z, s: float):
    """Per realization: mean of |[K^-1]_ij|^s in each distance bin, and max |K^-1|.

    Returns (bins, rows, scales, skipped); singular realizations are skipped.
    """
    if not 0 < s < 1:
        raise ValueError("s must lie in (0, 1)")
    zc = complex(z)
    if zc.real >= 0:
        raise ValueError("need Re z < 0")
    dom = ensemble.domain
    bins, inv = distance_bins(dom)
    per_bin = np.bincount(inv.ravel(), minlength=bins.size)
    rows, scales, skipped = [], [], 0
    green = ensemble.green
    for r in ensemble.indices:
        K = assemble(dom, ensemble.couplings(r), zc if zc.imag else zc.real, ensemble.tol, green=green)
        try:
            a = np.abs(k_inverse(K))
        except SingularMatrixError:
            skipped += 1
            continue
        scales.append(float(a.max()))
        rows.append(np.bincount(inv.ravel(), weights=(a ** s).ravel(), minlength=bins.size) / per_bin)
    return bins, np.asarray(rows).reshape(len(rows), bins.size), np.asarray(scales), skipped


def fit_frac_moment(bins, rows, scales, s: float, floor_rel: float = 1e-12, n_boot: int = 200,
                    boot_seed: int = 0, max_distance: float | None = None) -> dict:
    """Log-linear fit of the binned moments: slope -gamma, bootstrap 95% CI over realizations.

    Bins whose moment falls below (floor_rel * typical max entry)^s are
    dropped; entries that small sit at the roundoff floor of the solve.
    """
    M = np.asarray(rows)
    if M.shape[0] == 0:
        raise InsufficientDataError("every realization was singular")
    mean = M.mean(axis=0)
    se = M.std(axis=0, ddof=1) / math.sqrt(M.shape[0]) if M.shape[0] > 1 else np.zeros_like(mean)
    floor = (floor_rel * float(np.median(scales))) ** s
    use = mean > floor
    if max_distance is not None:
        use &= bins <= max_distance
    if use.sum() < 2:
        raise InsufficientDataError("fewer than two distance bins above the roundoff floor")
    slope = float(np.polyfit(bins[use], np.log(mean[use]), 1)[0])
    rng = np.random.Generator(np.random.PCG64(boot_seed))
    boots = []
    for _ in range(n_boot):
        mb = M[rng.integers(0, M.shape[0], M.shape[0])].mean(axis=0)
        ok = use & (mb > 0)
        if ok.sum() >= 2:
            boots.append(-np.polyfit(bins[ok], np.log(mb[ok]), 1)[0])
    boots = np.asarray(boots)
    ci = ((float(np.percentile(boots, 2.5)), float(np.percentile(boots, 97.5))) if boots.size
          else (math.nan, math.nan))
    return {"gamma": -slope, "ci95": ci, "distances": bins, "mean": mean, "stderr": se,
            "used": use, "n": int(M.shape[0]), "s": s}


def frac_moment_decay(ensemble: Ensemble, z, s: float, **fit_kw) -> dict:
    """E|[K^-1]_ij|^s binned by |x_i - x_j| with the fitted decay rate gamma."""
    bins, rows, scales, skipped = frac_moment_rows(ensemble, z, s)
    if rows.shape[0] == 0:
        raise InsufficientDataError("every realization was singular")
    out = fit_frac_moment(bins, rows, scales, s, **fit_kw)
    zc = complex(z)
    out.update(skipped=skipped, z=[zc.real, zc.imag])
    return out


# ----------------------------------------------------------------------------
# Poisson goodness of fit
# ----------------------------------------------------------------------------

def ks_exponential(gaps, rate: float) -> float:
    gaps = np.asarray(gaps, float)
    if gaps.size == 0:
        raise InsufficientDataError("no gaps")
    return float(sps.kstest(gaps, "expon", args=(0.0, 1.0 / rate)).statistic)


def concatenated_gaps(samples) -> np.ndarray:
    """Gaps of the samples laid end to end, window after window.

    For a Poisson process the windows glue into one Poisson process on a long
    line, so every gap (including those across window seams) is Exp(rate).
    """
    xs = []
    offset = 0.0
    for s in samples:
        xs.append(s.points + s.halfwidth + offset)
        offset += 2.0 * s.halfwidth
    x = np.concatenate(xs) if xs else np.zeros(0)
    return np.diff(x)


def count_tv(counts, mean: float) -> float:
    counts = np.asarray(counts, int)
    if counts.size == 0:
        raise InsufficientDataError("no counts")
    K = int(counts.max())
    emp = np.bincount(counts, minlength=K + 1) / counts.size
    pmf = sps.poisson.pmf(np.arange(K + 1), mean) if mean > 0 else np.eye(1, K + 1)[0]
    tail = max(0.0, 1.0 - float(pmf.sum()))
    return 0.5 * (float(np.abs(emp - pmf).sum()) + tail)


def poisson_tests(samples, intensity: float, min_samples: int = 10, split: float = 0.0) -> dict:
    """KS of gaps vs Exp(intensity), TV of window counts vs Poisson, and the
    correlation of counts left and right of ``split``."""
    if intensity <= 0:
        raise ValueError("intensity must be positive")
    if len(samples) < min_samples:
        raise InsufficientDataError(f"{len(samples)} samples < floor {min_samples}")
    w = samples[0].halfwidth
    gaps = concatenated_gaps(samples)
    ks = ks_exponential(gaps, intensity) if gaps.size else math.nan
    counts = np.array([len(s) for s in samples])
    tv = count_tv(counts, intensity * 2.0 * w)
    left = np.array([s.count(-w, split) for s in samples], float)
    right = np.array([s.count(split, w + 1e-300) for s in samples], float)
    if left.std() == 0 or right.std() == 0:
        corr = math.nan
    else:
        corr = float(np.corrcoef(left, right)[0, 1])
    return {"ks": ks, "tv": tv, "corr": corr, "n_gaps": int(gaps.size), "n_samples": len(samples),
            "mean_count": float(counts.mean()), "gaps": gaps, "counts": counts}


def synthetic_poisson_samples(rate: float, w: float, n: int, seed: int = 0) -> list:
    """Poisson(rate) samples on [-w, w], generated from the counter-based streams."""
    out = []
    for r in range(n):
        u = uniform_stream(seed, r, 1, stream=3)
        k = int(sps.poisson.ppf(u[0], rate * 2 * w))
        x = -w + 2 * w * uniform_stream(seed, r, k, stream=4)
        out.append(PointSample(r, x, w, 0.0, 1.0))
    return out
