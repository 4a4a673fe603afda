"""Defect Heisenberg chain: per-size dimension, pooled fit and entropy rate.

Runs the sweep over N_E and writes the full report plus one atom CSV per
size to results/heisenberg/.
"""
import argparse
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

from gqstate.spin_chain import save_atoms_csv, thermodynamic_sweep


@dataclass
class Config:
    n_min: int = 10
    n_max: int = 16
    b_field: tuple = (0.0, 0.0, 0.5)
    env_basis: str = "z"
    scales: list = field(default_factory=lambda: [2**k for k in range(1, 13)])
    out_dir: str = "results/heisenberg"


def main(cfg: Config):
    rep = thermodynamic_sweep(range(cfg.n_min, cfg.n_max + 1), b_field=cfg.b_field,
                              scales=cfg.scales, env_basis=cfg.env_basis)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for r in rep.sizes:
        if r.mixture is not None:
            save_atoms_csv(r.mixture, out / f"atoms_N{r.n_env}.csv")
        d = r.fit.dimension if r.fit is not None else float("nan")
        print(f"N_E={r.n_env:2d}  E0={r.energy:.8f}  atoms={r.n_atoms:6d}  "
              f"H0={r.h0_nats:.4f}  D={d:.4f}")
    pooled = rep.pooled.dimension if rep.pooled is not None else float("nan")
    print(f"mean D = {rep.mean_dimension:.4f}   pooled D = {pooled:.4f}   "
          f"h = {rep.entropy_rate:.4f} +- {rep.entropy_rate_stderr:.4f} nats")
    doc = rep.as_dict()
    doc["config"] = asdict(cfg)
    (out / "sweep.json").write_text(json.dumps(doc, indent=1))


if __name__ == "__main__":
    logging.basicConfig(level=logging.WARNING)
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-min", type=int, default=Config.n_min)
    ap.add_argument("--n-max", type=int, default=Config.n_max)
    ap.add_argument("--field", type=lambda s: tuple(float(x) for x in s.split(",")),
                    default=Config.b_field, help="bx,by,bz")
    ap.add_argument("--env-basis", choices=("z", "x", "y"), default=Config.env_basis)
    ap.add_argument("--out-dir", default=Config.out_dir)
    a = ap.parse_args()
    main(Config(a.n_min, a.n_max, a.field, a.env_basis, out_dir=a.out_dir))
