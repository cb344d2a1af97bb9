"""Regenerate tests/fixtures: a small spectrum config and its shooting-oracle eigenvalues."""
import csv
import json
from pathlib import Path

from deltales.stats import Ensemble
from deltales.experiments import ExperimentConfig
from deltales.oracles import ShootingProblem, shoot_spectrum

HERE = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

CONFIG = {
    "experiment": "spectrum",
    "dimension": 1,
    "L": 12,
    "bc": "dirichlet",
    "window": [-8.0, -1.0e-4],
    "realizations": 6,
    "master_seed": 4242,
    "distribution": {"kind": "uniform", "a": 1.0, "b": 3.0},
    "chunk_size": 2,
}


def main():
    HERE.mkdir(parents=True, exist_ok=True)
    (HERE / "spectrum_d1.json").write_text(json.dumps(CONFIG, indent=2) + "\n")
    cfg = ExperimentConfig.from_dict(CONFIG)
    dom = cfg.domain()
    ens = Ensemble(dom, cfg.dist(), cfg.master_seed, cfg.realizations)
    with (HERE / "spectrum_d1_shooting.csv").open("w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["realization_id", "eigenvalue"])
        for r in range(cfg.realizations):
            w = ens.couplings(r)
            ref = shoot_spectrum(ShootingProblem(float(cfg.L), dom.lattice[:, 0], w), tuple(cfg.window))
            for E in ref.eigenvalues:
                wr.writerow([r, repr(float(E))])


if __name__ == "__main__":
    main()
