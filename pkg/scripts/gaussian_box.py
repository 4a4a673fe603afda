"""Finite-scale bias of the fitted H2 for the truncated-Gaussian state.

The coarse-grained entropy of a smooth density approaches 2 ln L + H2 from
below with an O(1/L^2) correction. This script shows how the fitted
slope and intercept drift as the scale window moves to finer partitions,
next to the closed form and the Monte-Carlo (AEP) estimate.
"""
import argparse
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from gqstate.estimator import aep_entropy_estimate, fit_dimension, scaling_curve
from gqstate.gaussian_box import BoxGaussianParams, closed_form_h2, gaussian_density


@dataclass
class Config:
    mu_p: float = 0.5
    sigma_p: float = 0.15
    mu_phi: float = 3.141592653589793
    sigma_phi: float = 1.0
    windows: list = field(default_factory=lambda: [(2, 8), (4, 10), (6, 12)])
    aep_samples: int = 10**5
    seed: int = 0
    out: str = "results/gaussian_box.json"


def main(cfg: Config):
    params = BoxGaussianParams(cfg.mu_p, cfg.sigma_p, cfg.mu_phi, cfg.sigma_phi)
    state = gaussian_density(params)
    h2 = closed_form_h2(params)
    aep, aep_se = aep_entropy_estimate(state, cfg.aep_samples, cfg.seed)
    print(f"closed form H2 = {h2:.6f}   AEP = {aep:.5f} +- {aep_se:.5f}")
    rows = []
    for a, b in cfg.windows:
        curve = scaling_curve(state, [2**k for k in range(a, b + 1)])
        fit = fit_dimension(curve)
        z_slope = (fit.dimension - 2) / fit.dim_stderr
        z_icpt = (fit.dimensional_entropy - h2) / fit.ent_stderr
        rows.append({"log2_L": [a, b], "z_slope": z_slope, "z_intercept": z_icpt, **fit.as_dict()})
        print(f"L=2^{a}..2^{b}: D={fit.dimension:.6f} ({z_slope:+.2f} se)  "
              f"H2={fit.dimensional_entropy:.6f} ({z_icpt:+.2f} se)")
    Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
    Path(cfg.out).write_text(json.dumps(
        {"config": asdict(cfg), "closed_form": h2, "aep": [aep, aep_se], "fits": rows}, indent=1))


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sigma-p", type=float, default=Config.sigma_p)
    ap.add_argument("--sigma-phi", type=float, default=Config.sigma_phi)
    ap.add_argument("--out", default=Config.out)
    a = ap.parse_args()
    main(Config(sigma_p=a.sigma_p, sigma_phi=a.sigma_phi, out=a.out))
