"""Experiment configs and runners.

Each experiment maps chunks of realization indices to per-realization records
(appended to a JSONL checkpoint as they finish), then reduces the records in
realization order. Rerunning with the same config resumes from the
checkpoint; the reduction never depends on how chunks were scheduled.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import multiprocessing as mp
import os
import subprocess
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np
from scipy import stats as sps

from .disorder import DistributionSpec, philox_generator, sample_batch
from .domain import BC, DomainSpec
from .oracles import ShootingProblem, random_rank_one_pair, rank_one_verify, shoot_spectrum
from .spectra import make_counter, solve_spectrum
from .stats import (Ensemble, PointSample, SubcubeArray, TestFunction, auto_dos_scan, block_counts,
                    build_les, build_zeta, concatenated_gaps, counts_below_batch, estimate_dos,
                    fit_frac_moment, frac_moment_rows, les_window, minami_scan, poisson_tests,
                    wegner_scan, xi_zeta_gap)

log = logging.getLogger(__name__)

EXPERIMENTS = ("spectrum", "les", "zeta", "dos", "wegner", "minami", "fracmom", "uana-gap",
               "rankone", "oracle-compare")

REQUIRED = {
    "spectrum": ("dimension", "L", "bc", "window", "realizations"),
    "les": ("dimension", "L", "bc", "E0", "w", "realizations"),
    "zeta": ("dimension", "L", "E0", "w", "alpha", "realizations"),
    "dos": ("dimension", "L", "bc", "E0", "delta", "realizations"),
    "wegner": ("dimension", "L", "bc", "E0", "etas", "realizations"),
    "minami": ("dimension", "L", "bc", "E0", "etas", "realizations"),
    "fracmom": ("dimension", "L", "bc", "energies", "s", "realizations"),
    "uana-gap": ("dimension", "Ls", "E0", "w", "alpha", "realizations"),
    "rankone": ("trials",),
    "oracle-compare": ("L", "window", "realizations"),
}

DEFAULT_TEST_FUNCTIONS = (
    ((1.0, 0.0, 1.0),),
    ((0.5, -2.0, 0.5), (0.5, 2.0, 0.5)),
    ((2.0, 1.0, 2.0),),
)


class ConfigError(ValueError):
    pass


@dataclass
class Tolerances:
    root_tol: float = 1e-12
    image_tol: float = 1e-12
    cond_cap: float = 1e-12


@dataclass
class ExperimentConfig:
    experiment: str
    dimension: int | None = None
    L: float | None = None
    Ls: list | None = None
    bc: str | None = None
    lattice: str = "offset"
    E0: float | str | None = None
    dos_window: list | None = None
    dos_bins: int = 40
    dos_realizations: int | None = None
    window: list | None = None
    w: float | None = None
    alpha: float | None = None
    s: float | None = None
    delta: float | None = None
    etas: list | None = None
    energies: list | None = None
    test_functions: list | None = None
    distribution: dict = field(default_factory=lambda: {"kind": "uniform", "a": 1.0, "b": 3.0})
    realizations: int | None = None
    double_point_realizations: int | None = None
    trials: int | None = None
    rank_one_size: int = 6
    model_trials: int | None = None
    compute_gap: bool = True
    master_seed: int = 0
    tolerances: Tolerances = field(default_factory=Tolerances)
    output_dir: str = "out"
    chunk_size: int = 50
    workers: int = 1

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a mapping")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
        if "experiment" not in raw:
            raise ConfigError("missing required field: experiment")
        data = dict(raw)
        if "tolerances" in data:
            try:
                data["tolerances"] = Tolerances(**(data["tolerances"] or {}))
            except TypeError as exc:
                raise ConfigError(f"bad tolerances: {exc}") from exc
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        for name in REQUIRED[self.experiment]:
            if getattr(self, name) is None:
                raise ConfigError(f"missing required field for {self.experiment}: {name}")
        if self.dimension is not None and self.dimension not in (1, 2, 3):
            raise ConfigError("dimension must be 1, 2 or 3")
        if self.bc is not None:
            try:
                BC(self.bc)
            except ValueError as exc:
                raise ConfigError(f"bad bc {self.bc!r}") from exc
        if isinstance(self.E0, str):
            if self.E0 != "auto-dos-scan":
                raise ConfigError("E0 must be a number or 'auto-dos-scan'")
            if self.dos_window is None:
                raise ConfigError("missing required field for E0=auto-dos-scan: dos_window")
        elif self.E0 is not None and not self.E0 < 0:
            raise ConfigError("E0 must be negative")
        for name in ("window", "dos_window"):
            win = getattr(self, name)
            if win is not None and not (len(win) == 2 and win[0] < win[1] < 0):
                raise ConfigError(f"{name} must be [E_lo, E_hi] with E_lo < E_hi < 0")
        for name in ("realizations", "trials", "double_point_realizations", "model_trials"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or v < 1):
                raise ConfigError(f"{name} must be a positive integer")
        if self.w is not None and self.w <= 0:
            raise ConfigError("w must be positive")
        if self.alpha is not None and not 0 < self.alpha <= 1:
            raise ConfigError("alpha must lie in (0, 1]")
        if self.s is not None and not 0 < self.s < 1:
            raise ConfigError("s must lie in (0, 1)")
        if self.energies is not None and any(e >= 0 for e in self.energies):
            raise ConfigError("energies must be negative")
        if self.etas is not None and any(e <= 0 for e in self.etas):
            raise ConfigError("etas must be positive")
        if isinstance(self.E0, (int, float)):
            if self.etas is not None and self.E0 + max(self.etas) >= 0:
                raise ConfigError("E0 + eta must stay below 0")
            if self.delta is not None and self.E0 + self.delta / 2 >= 0:
                raise ConfigError("DOS window must stay below 0")
        try:
            self.dist()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad distribution: {exc}") from exc

    def dist(self) -> DistributionSpec:
        return DistributionSpec.from_dict(self.distribution)

    def domain(self, L=None) -> DomainSpec:
        return DomainSpec.cube(self.dimension, self.L if L is None else L, self.bc or "dirichlet",
                               lattice=self.lattice)

    def config_hash(self) -> str:
        d = self.to_dict()
        for k in ("output_dir", "workers", "chunk_size"):
            d.pop(k, None)
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix in (".yaml", ".yml"):
            import yaml

            raw = yaml.safe_load(text)
        else:
            raw = json.loads(text)
    except Exception as exc:  # parse errors of either format
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return ExperimentConfig.from_dict(raw)


# ----------------------------------------------------------------------------
# Checkpointed map over realization chunks
# ----------------------------------------------------------------------------

_WORKER: dict = {}


def _init_worker(cfg_dict, context):
    _WORKER["cfg"] = ExperimentConfig.from_dict(_strip(cfg_dict))
    _WORKER["ctx"] = context


def _strip(cfg_dict):
    d = dict(cfg_dict)
    d["tolerances"] = dict(d["tolerances"])
    return d


def _run_chunk(args):
    task, indices = args
    return TASKS[task](_WORKER["cfg"], _WORKER["ctx"], indices)


class Checkpoint:
    def __init__(self, path: Path, cfg_hash: str, stage: str):
        self.path = path
        self.stage = stage
        self.records: dict[int, dict] = {}
        header = {"config_hash": cfg_hash}
        if path.exists():
            text = path.read_text()
            lines = text.splitlines()
            try:
                ok = bool(lines) and json.loads(lines[0]) == header
            except json.JSONDecodeError:
                ok = False
            if ok:
                good = 1
                for line in lines[1:]:
                    try:
                        rec = json.loads(line)
                    except json.JSONDecodeError:
                        break  # a torn last line from an interrupted write
                    good += 1
                    if rec.get("stage") == stage:
                        self.records[rec["r"]] = rec
                if good < len(lines) or not text.endswith("\n"):
                    path.write_text("\n".join(lines[:good]) + "\n")
            else:
                path.unlink()
        if not path.exists():
            path.write_text(json.dumps(header) + "\n")

    def add(self, recs):
        with self.path.open("a") as fh:
            for rec in recs:
                rec["stage"] = self.stage
                fh.write(json.dumps(rec) + "\n")
                self.records[rec["r"]] = rec


def run_chunks(cfg: ExperimentConfig, task: str, indices, context: dict, ckpt_path: Path,
               stage: str | None = None) -> list[dict]:
    """Apply TASKS[task] to all indices, resuming from the checkpoint; records in index order."""
    stage = stage or task
    ckpt = Checkpoint(ckpt_path, cfg.config_hash(), stage)
    todo = [r for r in indices if r not in ckpt.records]
    chunks = [todo[i:i + cfg.chunk_size] for i in range(0, len(todo), cfg.chunk_size)]
    if chunks:
        if cfg.workers > 1:
            with mp.get_context("fork").Pool(cfg.workers, _init_worker,
                                             (cfg.to_dict(), context)) as pool:
                for recs in pool.imap(_run_chunk, [(task, c) for c in chunks]):
                    ckpt.add(recs)
        else:
            _init_worker(cfg.to_dict(), context)
            for c in chunks:
                ckpt.add(_run_chunk((task, c)))
    return [ckpt.records[r] for r in indices]


# ----------------------------------------------------------------------------
# Per-chunk tasks
# ----------------------------------------------------------------------------

def _ensemble(cfg: ExperimentConfig, indices, L=None, bc=None) -> Ensemble:
    dom = cfg.domain(L) if bc is None else DomainSpec.cube(cfg.dimension, L or cfg.L, bc, cfg.lattice)
    return Ensemble(dom, cfg.dist(), cfg.master_seed, len(indices), start=indices[0],
                    tol=cfg.tolerances.root_tol)


def _shared_ensemble(cfg, ctx, key, L=None, bc=None):
    # one Ensemble (and image table) per worker and domain
    cache = _WORKER.setdefault("ensembles", {})
    key = (cfg.config_hash(), key)
    if key not in cache:
        cache[key] = _ensemble(cfg, [0], L, bc)
    return cache[key]


def _spec_record(r, spec):
    return {"r": r, "E": spec.eigenvalues.tolist(), "mult": spec.multiplicities.tolist(),
            "unresolved": int(spec.unresolved.sum()), "jitters": len(spec.jitters)}


def task_spectrum(cfg, ctx, indices):
    ens = _shared_ensemble(cfg, ctx, "main")
    return [_spec_record(r, ens.solve(r, tuple(cfg.window))) for r in indices]


def task_les(cfg, ctx, indices):
    ens = _shared_ensemble(cfg, ctx, "main")
    E0 = ctx["E0"]
    win = les_window(E0, ens.domain.volume, cfg.w)
    out = []
    for r in indices:
        spec = ens.solve(r, win)
        rec = _spec_record(r, spec)
        rec["x"] = build_les(spec, E0, ens.domain.volume, cfg.w, r).points.tolist()
        out.append(rec)
    return out


def task_zeta(cfg, ctx, indices):
    ens = _shared_ensemble(cfg, ctx, "main", bc="dirichlet")
    arr = _array("main", ens.domain, cfg.alpha)
    E0 = ctx["E0"]
    out = []
    for r in indices:
        w = ens.couplings(r)
        z = build_zeta(ens.domain, w, arr, E0, cfg.w, cfg.tolerances.root_tol, r)
        spec = ens.solve(r, les_window(E0, ens.domain.volume, cfg.w), omega=w)
        xi = build_les(spec, E0, ens.domain.volume, cfg.w, r)
        out.append({"r": r, "x": z.points.tolist(), "xi": xi.points.tolist(),
                    "E": spec.eigenvalues.tolist(), "mult": spec.multiplicities.tolist()})
    return out


def _interval_counts(ens: Ensemble, energies, indices):
    # a resumed run may hand out non-contiguous indices, so sample them explicitly
    W = sample_batch(ens.dist, ens.domain.n_sites, ens.seed, indices)
    return counts_below_batch(ens.domain, W, energies, ens.uses_chain(), ens.green)


def _array(key, domain, alpha):
    cache = _WORKER.setdefault("arrays", {})
    key = (key, float(domain.sides[0]), alpha)
    if key not in cache:
        cache[key] = SubcubeArray.from_domain(domain, alpha)
    return cache[key]


def task_counts(cfg, ctx, indices):
    ens = _shared_ensemble(cfg, ctx, "main")
    c = _interval_counts(ens, ctx["energies"], indices)
    return [{"r": r, "c": row.tolist()} for r, row in zip(indices, c)]


def task_fracmom(cfg, ctx, indices):
    ens = _shared_ensemble(cfg, ctx, "main")
    out = []
    for r in indices:
        sub = Ensemble(ens.domain, ens.dist, ens.seed, 1, start=r, tol=ens.tol, _green=ens.green)
        rec = {"r": r}
        for E in cfg.energies:
            bins, rows, scales, skipped = frac_moment_rows(sub, E, cfg.s)
            rec[str(E)] = None if skipped else {"m": rows[0].tolist(), "scale": float(scales[0])}
        out.append(rec)
    return out


def task_uana(cfg, ctx, indices):
    L = ctx["L"]
    ens = _shared_ensemble(cfg, ctx, ("L", L), L=L, bc="dirichlet")
    arr = _array(L, ens.domain, cfg.alpha)
    E0 = ctx["E0"]
    win = les_window(E0, ens.domain.volume, cfg.w)
    out = []
    for r in indices:
        w = ens.couplings(r)
        spec = ens.solve(r, win, omega=w)
        xi = build_les(spec, E0, ens.domain.volume, cfg.w, r)
        z = build_zeta(ens.domain, w, arr, E0, cfg.w, cfg.tolerances.root_tol, r)
        out.append({"r": r, "xi": xi.points.tolist(), "zeta": z.points.tolist()})
    return out


def task_blocks(cfg, ctx, indices):
    L = ctx["L"]
    ens = _shared_ensemble(cfg, ctx, ("L", L), L=L, bc="dirichlet")
    arr = _array(L, ens.domain, cfg.alpha)
    W = sample_batch(ens.dist, ens.domain.n_sites, ens.seed, indices)
    bc = block_counts(arr, W, les_window(ctx["E0"], ens.domain.volume, cfg.w))
    return [{"r": r, "b": row.tolist()} for r, row in zip(indices, bc)]


def task_oracle(cfg, ctx, indices):
    dom = DomainSpec.cube(1, cfg.L, "dirichlet", lattice=cfg.lattice)
    dist = cfg.dist()
    out = []
    for r in indices:
        ens = Ensemble(dom, dist, cfg.master_seed, 1, start=r)
        w = ens.couplings(r)
        win = tuple(cfg.window)
        spec = solve_spectrum(dom, w, win, cfg.tolerances.root_tol, method="dense", residuals=False)
        ref = shoot_spectrum(ShootingProblem(float(cfg.L), dom.lattice[:, 0], w), win)
        same = len(spec.expanded()) == len(ref.eigenvalues)
        err = (float(np.max(np.abs(spec.expanded() - ref.eigenvalues) / np.abs(ref.eigenvalues)))
               if same and len(ref.eigenvalues) else (0.0 if same else math.inf))
        out.append({**_spec_record(r, spec), "E_ref": ref.eigenvalues.tolist(), "count_match": same,
                    "max_rel_err": err})
    return out


def task_rankone(cfg, ctx, indices):
    out = []
    for t in indices:
        rng = philox_generator(cfg.master_seed, 5, t)
        pair = random_rank_one_pair(rng, cfg.rank_one_size)
        rep = rank_one_verify(pair)
        out.append({"r": t, "violations": rep["violations"], "formula_error": rep["formula_error"],
                    "delta_count": rep["count_AB"] - rep["count_A"]})
    return out


MODEL_SETUPS = {
    # (dimension, side, bc, lattice, energy range for the random interval)
    1: (1, 6, "dirichlet", "offset", (-2.5, -0.1)),
    2: (2, 3, "free", "offset", (-2.0, -0.05)),
    3: (3, 3, "dirichlet", "integer", (-170.0, -15.0)),
}


_MODEL_CACHE: dict = {}


def _model_setup(d: int):
    if d not in _MODEL_CACHE:
        from .domain import GreenOperator

        dim, side, bc, lattice, erange = MODEL_SETUPS[d]
        dom = DomainSpec.cube(dim, side, bc, lattice=lattice)
        _MODEL_CACHE[d] = (dom, GreenOperator(dom), erange)
    return _MODEL_CACHE[d]


def model_interlacing_trials(d: int, trials, seed: int, dist: DistributionSpec) -> np.ndarray:
    """Resample one coupling and compare interval counts; returns |N_omega(I) - N_tau(I)| per trial."""
    from .disorder import StreamKey, resample_one, sample_couplings

    dom, green, (elo, ehi) = _model_setup(d)
    chain = d == 1
    jumps = []
    for t in trials:
        key = StreamKey(seed, t)
        f = sample_couplings(dist, dom.lattice, key)
        rng = philox_generator(seed, 6 + d, t)
        site = int(rng.integers(dom.n_sites))
        g = resample_one(f, site, key)
        if d == 2:
            # couplings put d=2 levels on a log scale
            a, b = np.sort(-np.exp(rng.uniform(np.log(-ehi), np.log(-elo), 2)))
        else:
            a, b = np.sort(rng.uniform(elo, ehi, 2))
        c = counts_below_batch(dom, np.vstack([f.values, g.values]), [a, b], chain, green)
        jumps.append(abs(int(c[0, 1] - c[0, 0]) - int(c[1, 1] - c[1, 0])))
    return np.asarray(jumps, int)


def task_model(cfg, ctx, indices):
    jumps = model_interlacing_trials(ctx["d"], indices, cfg.master_seed, cfg.dist())
    return [{"r": t, "jump": int(j)} for t, j in zip(indices, jumps)]


TASKS = {
    "spectrum": task_spectrum, "les": task_les, "zeta": task_zeta, "counts": task_counts,
    "fracmom": task_fracmom, "uana": task_uana, "blocks": task_blocks, "oracle": task_oracle,
    "rankone": task_rankone, "model": task_model,
}


# ----------------------------------------------------------------------------
# Output helpers
# ----------------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x))


def write_eigenvalues(path: Path, records):
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["realization_id", "eigenvalue", "multiplicity"])
        for rec in records:
            for E, m in zip(rec["E"], rec["mult"]):
                wr.writerow([rec["r"], _fmt(E), int(m)])


def write_rescaled(path: Path, records, key="x"):
    with path.open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["realization_id", "x"])
        for rec in records:
            for x in rec[key]:
                wr.writerow([rec["r"], _fmt(x)])


def write_dat(path: Path, cols, header: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.column_stack([np.asarray(c, float) for c in cols])
    np.savetxt(path, arr, header=header, fmt="%.12g")


def git_describe() -> str:
    here = Path(__file__).resolve().parent
    try:
        res = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=here,
                             capture_output=True, text=True, timeout=10)
        return res.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.floating, float)):
        v = float(x)
        return v if math.isfinite(v) else str(v)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _samples(records, key, w, E0, volume):
    return [PointSample(rec["r"], np.asarray(rec[key], float), w, E0, volume) for rec in records]


def _resolve_E0(cfg: ExperimentConfig, ens: Ensemble, summary: dict) -> float:
    if not isinstance(cfg.E0, str):
        return float(cfg.E0)
    R = cfg.dos_realizations or min(cfg.realizations or 200, 200)
    scan_ens = Ensemble(ens.domain, ens.dist, cfg.master_seed + 7919, R, tol=ens.tol, _green=ens._green)
    scan = auto_dos_scan(scan_ens, tuple(cfg.dos_window), cfg.dos_bins)
    summary["dos_scan"] = {"E0": scan["E0"], "nhat_E0": scan["nhat_E0"], "realizations": R,
                           "seed": cfg.master_seed + 7919, "window": list(cfg.dos_window),
                           "bins": cfg.dos_bins}
    summary["plot"]["dos_scan"] = (scan["centers"], scan["nhat"], scan["stderr"])
    return scan["E0"]


def _poisson_plots(plot, gaps, counts, lam, w):
    if gaps.size:
        hist, edges = np.histogram(gaps, bins=40, range=(0.0, max(float(gaps.max()), 1e-12)), density=True)
        centers = 0.5 * (edges[:-1] + edges[1:])
        plot["spacing_hist"] = (centers, hist, lam * np.exp(-lam * centers))
    k = np.arange(int(counts.max()) + 1 if counts.size else 1)
    emp = np.bincount(counts, minlength=k.size) / max(counts.size, 1)
    plot["count_hist"] = (k, emp, sps.poisson.pmf(k, lam * 2 * w))


# ----------------------------------------------------------------------------
# Experiment drivers
# ----------------------------------------------------------------------------

def _reduce_spectrum(cfg, recs, summary):
    summary["n_eigenvalues"] = int(sum(sum(r["mult"]) for r in recs))
    summary["unresolved_clusters"] = int(sum(r["unresolved"] for r in recs))
    summary["jittered_probes"] = int(sum(r["jitters"] for r in recs))


def run_experiment(cfg: ExperimentConfig) -> dict:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = out / "checkpoint.jsonl"
    t0 = time.time()
    summary: dict = {"experiment": cfg.experiment, "config": cfg.to_dict(), "seed": cfg.master_seed,
                     "git_describe": git_describe(), "plot": {}}
    R = cfg.realizations
    idx = list(range(R)) if R else []
    exp = cfg.experiment

    if exp == "spectrum":
        recs = run_chunks(cfg, "spectrum", idx, {}, ckpt)
        write_eigenvalues(out / "eigenvalues.csv", recs)
        _reduce_spectrum(cfg, recs, summary)

    elif exp == "oracle-compare":
        recs = run_chunks(cfg, "oracle", idx, {}, ckpt)
        write_eigenvalues(out / "eigenvalues.csv", recs)
        summary["count_mismatches"] = int(sum(not r["count_match"] for r in recs))
        summary["max_rel_err"] = max((r["max_rel_err"] for r in recs), default=0.0)

    elif exp in ("les", "zeta"):
        ens = _ensemble(cfg, [0], bc=None if exp == "les" else "dirichlet")
        E0 = _resolve_E0(cfg, ens, summary)
        summary["E0"] = E0
        recs = run_chunks(cfg, exp, idx, {"E0": E0}, ckpt)
        write_eigenvalues(out / "eigenvalues.csv", recs)
        write_rescaled(out / "rescaled.csv", recs)
        vol = ens.domain.volume
        samples = _samples(recs, "x", cfg.w, E0, vol)
        counts = np.array([len(s) for s in samples])
        # intensity = finite-volume DOS at E0 on the LES window itself
        dos = estimate_dos(ens, E0, 2 * cfg.w / vol, counts=counts if exp == "les" else
                           np.array([len(rec["xi"]) for rec in recs]))
        summary["nhat_E0"] = dos.to_dict()
        lam = dos.mean
        if lam > 0:
            rep = poisson_tests(samples, lam, min_samples=min(10, len(samples)))
            summary["poisson"] = {k: rep[k] for k in ("ks", "tv", "corr", "n_gaps", "n_samples", "mean_count")}
            _poisson_plots(summary["plot"], rep["gaps"], rep["counts"], lam, cfg.w)
        if exp == "zeta":
            arr = SubcubeArray.from_domain(ens.domain, cfg.alpha)
            zc = counts.astype(float)
            xc = np.array([len(rec["xi"]) for rec in recs], float)
            expect = lam * 2 * cfg.w
            se_z = zc.std(ddof=1) / math.sqrt(zc.size) if zc.size > 1 else math.nan
            se_x = xc.std(ddof=1) / math.sqrt(xc.size) if xc.size > 1 else math.nan
            summary["intensity"] = {"mean_zeta": float(zc.mean()), "mean_zeta_se": float(se_z),
                                    "expected": expect, "expected_se": float(se_x),
                                    "z_score": float((zc.mean() - expect) / math.hypot(se_z, se_x))
                                    if se_z > 0 else math.nan,
                                    "ell": arr.ell, "m": arr.m, "alpha": cfg.alpha}

    elif exp in ("dos", "wegner", "minami"):
        ens = _ensemble(cfg, [0])
        E0 = _resolve_E0(cfg, ens, summary)
        summary["E0"] = E0
        if exp == "dos":
            energies = [E0 - cfg.delta / 2, E0 + cfg.delta / 2]
            recs = run_chunks(cfg, "counts", idx, {"energies": energies}, ckpt)
            c = np.array([r["c"] for r in recs])
            summary["dos"] = estimate_dos(ens, E0, cfg.delta, counts=c[:, 1] - c[:, 0]).to_dict()
        else:
            etas = np.sort(np.asarray(cfg.etas, float))
            energies = np.concatenate([E0 - etas, E0 + etas]).tolist()
            recs = run_chunks(cfg, "counts", idx, {"energies": energies}, ckpt)
            c = np.array([r["c"] for r in recs])
            X = c[:, etas.size:] - c[:, :etas.size]
            fn = wegner_scan if exp == "wegner" else minami_scan
            res = fn(ens, E0, etas, counts=X, boot_seed=cfg.master_seed)
            res.pop("counts")
            summary[exp] = res
            key = "mean_X" if exp == "wegner" else "mean_XX1"
            summary["plot"][f"{exp}_loglog"] = (etas, [row[key] for row in res["rows"]],
                                                [row[key + "_se"] for row in res["rows"]])

    elif exp == "fracmom":
        ens = _ensemble(cfg, [0])
        recs = run_chunks(cfg, "fracmom", idx, {}, ckpt)
        from .stats import distance_bins

        bins, _ = distance_bins(ens.domain)
        res = {}
        for E in cfg.energies:
            good = [r[str(E)] for r in recs if r[str(E)] is not None]
            rows = np.array([g["m"] for g in good])
            scales = np.array([g["scale"] for g in good])
            fit = fit_frac_moment(bins, rows, scales, cfg.s, boot_seed=cfg.master_seed)
            fit["skipped"] = len(recs) - len(good)
            res[str(E)] = {k: fit[k] for k in ("gamma", "ci95", "n", "skipped")}
            res[str(E)]["gamma_over_sqrtE"] = fit["gamma"] / math.sqrt(abs(E))
            summary["plot"][f"fracmom_E{E:g}"] = (bins, np.log(np.maximum(fit["mean"], 1e-300)),
                                                  fit["stderr"] / np.maximum(fit["mean"], 1e-300),
                                                  fit["used"].astype(float))
        g = [res[str(E)]["gamma"] for E in cfg.energies]
        order = np.argsort(np.abs(cfg.energies))
        summary["fracmom"] = res
        summary["gamma_increasing"] = bool(np.all(np.diff(np.asarray(g)[order]) > 0))
        ratios = [res[str(E)]["gamma_over_sqrtE"] for E in cfg.energies]
        summary["sqrtE_ratio_spread"] = float(max(ratios) / min(ratios)) if min(ratios) > 0 else math.inf

    elif exp == "uana-gap":
        fs = [TestFunction(tuple(tuple(t) for t in f)) for f in (cfg.test_functions or DEFAULT_TEST_FUNCTIONS)]
        table = []
        # one reference energy for every L, scanned on the smallest box
        E0 = _resolve_E0(cfg, _ensemble(cfg, [0], L=min(cfg.Ls), bc="dirichlet"), summary)
        summary["E0"] = E0
        for L in cfg.Ls:
            ens = _ensemble(cfg, [0], L=L, bc="dirichlet")
            arr = SubcubeArray.from_domain(ens.domain, cfg.alpha)
            gaps = []
            if cfg.compute_gap:
                recs = run_chunks(cfg, "uana", idx, {"L": L, "E0": E0}, ckpt, stage=f"uana-{L}")
                vol = ens.domain.volume
                xi = _samples(recs, "xi", cfg.w, E0, vol)
                ze = _samples(recs, "zeta", cfg.w, E0, vol)
                gaps = xi_zeta_gap(xi, ze, fs)
            Rd = cfg.double_point_realizations or R
            brec = run_chunks(cfg, "blocks", list(range(Rd)), {"L": L, "E0": E0}, ckpt, stage=f"blocks-{L}")
            B = np.array([r["b"] for r in brec])
            doubles = (B >= 2).sum(axis=1)
            table.append({"L": L, "E0": E0, "ell": arr.ell, "m": arr.m, "n_blocks": arr.n_blocks,
                          "gaps": gaps,
                          "double_rate": float(doubles.mean()),
                          "double_rate_se": float(doubles.std(ddof=1) / math.sqrt(doubles.size)),
                          "max_p_ge1": float((B >= 1).mean(axis=0).max()),
                          "mean_zeta_count": float(B.sum(axis=1).mean()),
                          "double_realizations": int(Rd)})
        summary["uana"] = table
        Ls = np.array([row["L"] for row in table], float)
        rates = np.array([row["double_rate"] for row in table])
        if len(Ls) >= 2 and np.all(rates > 0):
            slope = float(np.polyfit(np.log(Ls), np.log(rates), 1)[0])
            summary["double_slope"] = slope
            summary["double_slope_expected"] = -(1 - cfg.alpha) * cfg.dimension
        summary["double_monotone"] = bool(np.all(np.diff(rates) < 0))
        if cfg.compute_gap:
            summary["gap_monotone"] = [bool(np.all(np.diff([row["gaps"][i]["gap"] for row in table]) < 0))
                                       for i in range(len(fs))]
        summary["plot"]["double_rate"] = (Ls, rates, [row["double_rate_se"] for row in table])

    elif exp == "rankone":
        T = cfg.trials
        recs = run_chunks(cfg, "rankone", list(range(T)), {}, ckpt)
        summary["rankone"] = {"trials": T, "violations": int(sum(len(r["violations"]) for r in recs)),
                              "max_formula_error": float(max(r["formula_error"] for r in recs)),
                              "max_abs_delta_count": int(max(abs(r["delta_count"]) for r in recs))}
        if cfg.model_trials:
            model = {}
            for d in (1, 2, 3):
                mrec = run_chunks(cfg, "model", list(range(cfg.model_trials)), {"d": d}, ckpt,
                                  stage=f"model-{d}")
                jumps = np.array([r["jump"] for r in mrec])
                model[str(d)] = {"trials": int(jumps.size), "violations": int(np.sum(jumps > 1)),
                                 "max_jump": int(jumps.max())}
            summary["model_interlacing"] = model
        summary["violations"] = summary["rankone"]["violations"] + sum(
            m["violations"] for m in summary.get("model_interlacing", {}).values())

    plot = summary.pop("plot")
    for name, cols in plot.items():
        write_dat(out / "plotdata" / f"{name}.dat", cols, name)
    summary["wall_time_s"] = time.time() - t0
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")
    return summary
