"""Coupling fields omega_j with iid law supported on [-b, -a], 0 < a < b.

Draws are pure functions of (master_seed, realization, site): every value comes
from a Philox counter whose key is the seed and whose counter words hold the
realization (and, for resampling, the site and trial) indices. Nothing is
carried between calls, so realizations can be generated in any order.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

MASK64 = (1 << 64) - 1

# Philox key stream tags
_FIELD_STREAM = 0
_RESAMPLE_STREAM = 1
_AUX_STREAM = 2


@dataclass(frozen=True)
class DistributionSpec:
    """Single-site law. ``a`` and ``b`` are the positive support bounds: omega in [-b, -a]."""

    kind: str = "uniform"
    a: float = 1.0
    b: float = 3.0
    mean: float | None = None       # truncated gaussian
    sd: float | None = None
    breaks: tuple = ()              # piecewise: increasing points spanning [-b, -a]
    heights: tuple = ()             # piecewise: density on each piece

    def __post_init__(self):
        if self.kind not in ("uniform", "truncated_gaussian", "piecewise"):
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        if not (0.0 < self.a <= self.b < np.inf):
            raise ValueError(f"support needs 0 < a <= b < inf, got a={self.a}, b={self.b}")
        if self.a == self.b and self.kind != "uniform":
            raise ValueError("a point mass is only available as a degenerate uniform")
        if self.kind == "truncated_gaussian" and (self.sd is None or self.sd <= 0):
            raise ValueError("truncated_gaussian needs sd > 0")
        if self.kind == "piecewise":
            br = np.asarray(self.breaks, float)
            h = np.asarray(self.heights, float)
            if br.size != h.size + 1 or np.any(np.diff(br) <= 0):
                raise ValueError("piecewise needs increasing breaks and len(heights) = len(breaks) - 1")
            if abs(br[0] + self.b) > 1e-12 or abs(br[-1] + self.a) > 1e-12:
                raise ValueError("piecewise breaks must span [-b, -a]")
            if np.any(h < 0):
                raise ValueError("density must be nonnegative")
            mass = float(np.sum(h * np.diff(br)))
            if abs(mass - 1.0) > 1e-12:
                raise ValueError(f"piecewise density integrates to {mass!r}, not 1")

    @property
    def support(self) -> tuple[float, float]:
        return (-self.b, -self.a)

    @property
    def max_density(self) -> float:
        if self.kind == "uniform":
            return np.inf if self.a == self.b else 1.0 / (self.b - self.a)
        if self.kind == "piecewise":
            return float(np.max(self.heights))
        return float(np.max(self.pdf(np.linspace(-self.b, -self.a, 2001))))

    def _tn(self):
        mu = -(self.a + self.b) / 2.0 if self.mean is None else self.mean
        lo, hi = (-self.b - mu) / self.sd, (-self.a - mu) / self.sd
        return stats.truncnorm(lo, hi, loc=mu, scale=self.sd)

    def ppf(self, u):
        """Inverse CDF, maps uniforms in [0, 1) to couplings."""
        u = np.asarray(u, float)
        lo, hi = self.support
        if self.kind == "uniform":
            return lo + (hi - lo) * u
        if self.kind == "truncated_gaussian":
            return np.clip(self._tn().ppf(u), lo, hi)
        br = np.asarray(self.breaks, float)
        cdf = np.concatenate([[0.0], np.cumsum(np.asarray(self.heights) * np.diff(br))])
        cdf /= cdf[-1]
        return np.interp(u, cdf, br)

    def pdf(self, x):
        x = np.asarray(x, float)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        if self.kind == "uniform":
            return np.where(inside, 1.0 / (hi - lo), 0.0)
        if self.kind == "truncated_gaussian":
            return self._tn().pdf(x)
        br = np.asarray(self.breaks, float)
        idx = np.clip(np.searchsorted(br, x, side="right") - 1, 0, len(self.heights) - 1)
        return np.where(inside, np.asarray(self.heights)[idx], 0.0)

    def cdf(self, x):
        x = np.asarray(x, float)
        lo, hi = self.support
        if self.kind == "uniform":
            return np.clip((x - lo) / (hi - lo), 0.0, 1.0)
        if self.kind == "truncated_gaussian":
            return self._tn().cdf(x)
        br = np.asarray(self.breaks, float)
        cdf = np.concatenate([[0.0], np.cumsum(np.asarray(self.heights) * np.diff(br))])
        return np.interp(x, br, cdf / cdf[-1])

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "a": self.a, "b": self.b}
        if self.kind == "truncated_gaussian":
            out.update(mean=self.mean, sd=self.sd)
        if self.kind == "piecewise":
            out.update(breaks=list(self.breaks), heights=list(self.heights))
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "DistributionSpec":
        d = dict(d)
        for key in ("breaks", "heights"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)


@dataclass(frozen=True)
class StreamKey:
    master_seed: int
    realization_index: int = 0
    site_index: int = 0


def uniform_stream(seed: int, realization: int, n: int, stream: int = _FIELD_STREAM,
                   word1: int = 0, word3: int = 0) -> np.ndarray:
    """n uniforms; draw k is a pure function of (seed, stream, realization, word1, word3, k)."""
    key = (int(seed) & MASK64) | (int(stream) << 64)
    counter = ((int(word3) & MASK64) << 192) | ((int(realization) & MASK64) << 128) | (
        (int(word1) & MASK64) << 64)
    gen = np.random.Generator(np.random.Philox(key=key, counter=counter))
    return gen.random(n)


@dataclass
class CouplingField:
    values: np.ndarray
    dist: DistributionSpec
    key: StreamKey
    resampled: tuple = field(default=())

    def __len__(self):
        return len(self.values)

    def restrict(self, mask) -> "CouplingField":
        return replace(self, values=self.values[mask])


def sample_couplings(dist: DistributionSpec, lattice, key: StreamKey | int) -> CouplingField:
    """One coupling per lattice point; identical inputs give identical fields."""
    if isinstance(key, int):
        key = StreamKey(key)
    n = len(lattice) if not isinstance(lattice, int) else lattice
    u = uniform_stream(key.master_seed, key.realization_index, n)
    return CouplingField(np.asarray(dist.ppf(u), float), dist, key)


def sample_batch(dist: DistributionSpec, n_sites: int, seed: int, realizations) -> np.ndarray:
    """Rows of coupling fields for the given realization indices."""
    realizations = list(realizations)
    out = np.empty((len(realizations), n_sites))
    for row, r in enumerate(realizations):
        out[row] = dist.ppf(uniform_stream(seed, r, n_sites))
    return out


def resample_one(field_: CouplingField, site: int, key: StreamKey | None = None,
                 dist: DistributionSpec | None = None, trial: int = 0) -> CouplingField:
    """Copy of the field with only ``site`` redrawn (optionally from another law)."""
    n = len(field_.values)
    if not 0 <= site < n:
        raise IndexError(f"site {site} out of range for {n} sites")
    key = field_.key if key is None else key
    dist = field_.dist if dist is None else dist
    u = uniform_stream(key.master_seed, key.realization_index, 1, stream=_RESAMPLE_STREAM,
                       word1=site, word3=trial)
    values = field_.values.copy()
    values[site] = float(dist.ppf(u)[0])
    return replace(field_, values=values, resampled=field_.resampled + (site,))


def aux_uniforms(seed: int, realization: int, n: int, tag: int = 0) -> np.ndarray:
    """Extra randomness (test matrices, jitter) kept off the coupling streams."""
    return uniform_stream(seed, realization, n, stream=_AUX_STREAM, word1=tag)


def philox_generator(seed: int, stream: int, index: int) -> np.random.Generator:
    """Independent generator for auxiliary trial ``index`` (e.g. random test matrices)."""
    key = (int(seed) & MASK64) | (int(stream) << 64)
    counter = (int(index) & MASK64) << 128
    return np.random.Generator(np.random.Philox(key=key, counter=counter))
