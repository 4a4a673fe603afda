"""Dimension of standard-map orbits across kick strengths and initial conditions.

A chaotic orbit should fill the square (D near 2) and an orbit on an
invariant circle should give D near 1.
"""
import argparse
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

from gqstate.dynamics import StandardMapParams, iterate
from gqstate.estimator import auto_fit_window, fit_dimension, scaling_curve
from gqstate.state_space import BlochPoint


@dataclass
class Config:
    kicks: list = field(default_factory=lambda: [0.5, 1.0, 2.0, 4.0])
    ics: list = field(default_factory=lambda: [(0.1, 0.4 * math.pi), (0.2, math.pi)])
    steps: int = 10**6
    scales: list = field(default_factory=lambda: [2**k for k in range(4, 11)])
    out: str = "results/standard_map.json"


def main(cfg: Config):
    rows = []
    for K in cfg.kicks:
        for ic in cfg.ics:
            sample = iterate(StandardMapParams(K), BlochPoint(*ic), cfg.steps, burn_in=0)
            curve = scaling_curve(sample, cfg.scales)
            fit = fit_dimension(curve.with_window(auto_fit_window(curve)))
            rows.append({"K": K, "ic": list(ic), **fit.as_dict()})
            print(f"K={K:<4} ic=({ic[0]:.3f}, {ic[1]:.3f})  D={fit.dimension:.3f} +- {fit.dim_stderr:.3f}")
    Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
    Path(cfg.out).write_text(json.dumps({"config": asdict(cfg), "fits": rows}, indent=1))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=lambda s: int(float(s)), default=Config.steps)
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    main(Config(steps=a.steps, out=a.out))
