"""Information dimension and dimensional entropy from coarse-grained entropies.

H(Z^eps) is computed on a ladder of partitions eps = 1/L; the slope of
H against -ln eps estimates the information dimension and the intercept at
-ln eps = 0 the dimensional entropy. All entropies are in nats.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import InsufficientDataError, InvalidInputError, SingularDensityError
from .gqs import CoarseHistogram, DensityGQS, EmpiricalSample, coarse_grain
from .state_space import BlochPoint, Partition, fs_segment_lengths

__all__ = [
    "CoarseHistogram",
    "ScalingCurve",
    "DimensionFit",
    "DEFAULT_SCALES",
    "shannon_entropy",
    "scaling_curve",
    "fit_dimension",
    "auto_fit_window",
    "saturation_index",
    "aggregate_fit",
    "aep_entropy_estimate",
    "curve_entropy_h1",
]

DEFAULT_SCALES = tuple(2**k for k in range(1, 13))
SATURATION_TOL = 1e-6
UNDERSAMPLE_FRAC = 0.1
CEILING_FRAC = 0.95


def shannon_entropy(hist: CoarseHistogram) -> float:
    """-sum p ln p over the histogram, with 0 ln 0 = 0."""
    p = hist.probs[hist.probs > 0]
    # fixed-order compensated sum keeps the result bitwise reproducible
    return max(0.0, -math.fsum(p * np.log(p)))


@dataclass(frozen=True, eq=False)
class ScalingCurve:
    """Points (-ln eps, H(Z^eps)) with an optional fit window.

    ``window`` is a half-open index range (start, stop). ``occupied`` holds
    the number of non-empty cells per scale and ``sample_size`` the number
    of points behind an empirical curve; both feed the undersampling guard.
    ``max_dim`` is the real dimension 2(D-1) of the state space.
    """

    neg_log_eps: np.ndarray
    entropy: np.ndarray
    window: Optional[tuple] = None
    occupied: Optional[np.ndarray] = None
    sample_size: Optional[int] = None
    max_dim: float = 2.0

    def __post_init__(self):
        x = np.asarray(self.neg_log_eps, dtype=float)
        h = np.asarray(self.entropy, dtype=float)
        if x.shape != h.shape or x.ndim != 1:
            raise InvalidInputError("scaling curve needs matching 1-D arrays")
        if np.any(np.diff(x) <= 0):
            raise InvalidInputError("-ln eps must be strictly increasing")
        if np.any(h < -1e-12):
            raise InvalidInputError("negative entropy in scaling curve")
        object.__setattr__(self, "neg_log_eps", x)
        object.__setattr__(self, "entropy", h)
        if self.occupied is not None:
            object.__setattr__(self, "occupied", np.asarray(self.occupied, dtype=np.int64))
        if self.window is not None:
            object.__setattr__(self, "window", _check_window(self.window, len(x)))

    def __len__(self):
        return len(self.entropy)

    @property
    def cells_per_axis(self) -> np.ndarray:
        return np.rint(np.exp(self.neg_log_eps)).astype(np.int64)

    def with_window(self, window) -> "ScalingCurve":
        return replace(self, window=window)

    def in_window(self) -> np.ndarray:
        start, stop = self.window if self.window is not None else (0, len(self))
        mask = np.zeros(len(self), dtype=bool)
        mask[start:stop] = True
        return mask


def _check_window(window, n):
    start, stop = (int(w) for w in window)
    if not 0 <= start < stop <= n:
        raise InvalidInputError(f"window {window} invalid for a curve of {n} points")
    return start, stop


@dataclass(frozen=True)
class DimensionFit:
    dimension: float
    dim_stderr: float
    dimensional_entropy: float
    ent_stderr: float
    window: tuple = (0, 0)
    n_points: int = 0
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "dimension": self.dimension,
            "dim_stderr": self.dim_stderr,
            "dimensional_entropy": self.dimensional_entropy,
            "ent_stderr": self.ent_stderr,
            "window": list(self.window),
            "n_points": self.n_points,
        }
        out.update(self.extra)
        return out


def scaling_curve(state, L_values: Sequence[int] = DEFAULT_SCALES, **coarse_kw) -> ScalingCurve:
    """Coarse-grained entropy at each L, one point per scale at -ln eps = ln L.

    Keyword arguments go to :func:`gqs.coarse_grain`.
    """
    L_values = [int(L) for L in L_values]
    if not L_values or any(b <= a for a, b in zip(L_values, L_values[1:])):
        raise InvalidInputError("L_values must be nonempty and strictly increasing")
    ent, occ = [], []
    for L in L_values:
        hist = coarse_grain(state, Partition(state.dim, L), **coarse_kw)
        ent.append(shannon_entropy(hist))
        occ.append(hist.occupied)
    if isinstance(state, EmpiricalSample):
        n = len(state)
    elif isinstance(state, DensityGQS) and coarse_kw.get("method") == "sample":
        n = int(coarse_kw.get("n_samples", 10**6))
    else:
        n = None
    return ScalingCurve(
        np.log(np.asarray(L_values, dtype=float)),
        np.asarray(ent),
        occupied=np.asarray(occ),
        sample_size=n,
        max_dim=2.0 * (state.dim - 1),
    )


def _ols(x, y):
    n = len(x)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    s2 = float(np.sum(resid**2)) / (n - 2)
    return slope, math.sqrt(s2 / sxx), intercept, math.sqrt(s2 * (1.0 / n + xm**2 / sxx))


def fit_dimension(curve: ScalingCurve, window=None) -> DimensionFit:
    """OLS of H on -ln eps over the window: slope = dimension, intercept = entropy."""
    window = _check_window(window, len(curve)) if window is not None else (
        curve.window if curve.window is not None else (0, len(curve)))
    start, stop = window
    if stop - start < 3:
        raise InsufficientDataError(f"fit window {window} has fewer than 3 points")
    x = curve.neg_log_eps[start:stop]
    y = curve.entropy[start:stop]
    slope, se_slope, icpt, se_icpt = _ols(x, y)
    return DimensionFit(slope, se_slope, icpt, se_icpt, window=window, n_points=stop - start)


def saturation_index(curve: ScalingCurve, tol: float = SATURATION_TOL) -> Optional[int]:
    """First index after which every entropy increment is below ``tol``.

    None when the curve is still growing at its finest scale.
    """
    inc = np.diff(curve.entropy)
    if len(inc) == 0 or inc[-1] >= tol:
        return None
    growing = np.nonzero(inc >= tol)[0]
    return 0 if len(growing) == 0 else int(growing[-1]) + 1


def auto_fit_window(curve: ScalingCurve, sample_size: Optional[int] = None, *,
                    saturation_tol: float = SATURATION_TOL,
                    undersample_frac: float = UNDERSAMPLE_FRAC,
                    ceiling_frac: float = CEILING_FRAC,
                    min_points: int = 3) -> tuple:
    """Heuristic fit window, returned as a half-open index range.

    Trailing scales are cut where the sample is too thin (more than
    ``undersample_frac * N`` occupied cells) and after the entropy stops
    growing (a finite set of atoms fully resolved). A curve that is flat
    from the start is kept whole. Leading scales whose entropy sits within
    ``1 - ceiling_frac`` of the cell-count ceiling 2(D-1) ln L are dropped,
    but only if the curve later leaves that ceiling.
    """
    n = len(curve)
    if n == 0:
        raise InsufficientDataError("empty scaling curve")
    if sample_size is None:
        sample_size = curve.sample_size
    stop = n
    if sample_size is not None and curve.occupied is not None:
        thin = np.nonzero(curve.occupied > undersample_frac * sample_size)[0]
        if len(thin):
            stop = int(thin[0])
    sub = replace(curve, neg_log_eps=curve.neg_log_eps[:stop], entropy=curve.entropy[:stop],
                  occupied=None, window=None) if stop > 0 else None
    if sub is None:
        raise InsufficientDataError("every scale is undersampled; set the window manually")
    sat = saturation_index(sub, saturation_tol)
    if sat == 0:
        start = 0
    else:
        if sat is not None:
            stop = sat + 1
        ceiling = curve.max_dim * curve.neg_log_eps[:stop]
        near = (ceiling > 0) & (curve.entropy[:stop] >= ceiling_frac * ceiling)
        start = 0
        if not np.all(near):
            start = int(np.argmin(near))
    if stop - start < min_points:
        raise InsufficientDataError(
            f"automatic window ({start}, {stop}) has fewer than {min_points} points; "
            "set the window manually"
        )
    return start, stop


def aggregate_fit(curves: Sequence[ScalingCurve]) -> DimensionFit:
    """Pooled slope after removing each curve's own intercept.

    Each curve is fitted over its window, its intercept subtracted, and all
    windowed points regressed together through the origin. The reported
    entropy is the mean of the removed intercepts.
    """
    if len(curves) < 2:
        raise InsufficientDataError("aggregate fit needs at least two curves")
    xs, ys, icpts = [], [], []
    for c in curves:
        fit = fit_dimension(c)
        start, stop = fit.window
        xs.append(c.neg_log_eps[start:stop])
        ys.append(c.entropy[start:stop] - fit.dimensional_entropy)
        icpts.append(fit.dimensional_entropy)
    x = np.concatenate(xs)
    y = np.concatenate(ys)
    sxx = float(np.sum(x * x))
    slope = float(np.sum(x * y) / sxx)
    resid = y - slope * x
    se = math.sqrt(float(np.sum(resid**2)) / (len(x) - 1) / sxx)
    icpts = np.asarray(icpts)
    return DimensionFit(slope, se, float(icpts.mean()),
                        float(icpts.std(ddof=1) / math.sqrt(len(icpts))),
                        window=(0, len(x)), n_points=len(x),
                        extra={"n_curves": len(curves)})


def _evaluate_density(state: DensityGQS, sample: EmpiricalSample):
    if state.dim == 2:
        return np.asarray(state.density(sample.p, sample.phi), dtype=float)
    return np.asarray(state.density(sample.probs, sample.phases), dtype=float)


def aep_entropy_estimate(state: DensityGQS, n_samples: int, seed=None) -> tuple:
    """Monte-Carlo mean of -ln q(z) over i.i.d. draws, with stderr sigma/sqrt(n).

    The stderr is NaN for a single draw.
    """
    if n_samples < 1:
        raise InvalidInputError("n_samples must be positive")
    sample = state.sample(n_samples, seed)
    q = _evaluate_density(state, sample)
    if np.any(q <= 0):
        raise SingularDensityError("density vanishes at a drawn sample point")
    vals = -np.log(q)
    mean = float(np.mean(vals))
    if n_samples == 1:
        return mean, float("nan")
    return mean, float(np.std(vals, ddof=1) / math.sqrt(n_samples))


def _bloch_arrays(samples):
    if isinstance(samples, EmpiricalSample):
        return samples.p, samples.phi
    if len(samples) and isinstance(samples[0], BlochPoint):
        return np.array([s.p for s in samples]), np.array([s.phi for s in samples])
    arr = np.asarray(samples, dtype=float)
    return arr[:, 0], arr[:, 1]


def curve_entropy_h1(samples, n_bins: int, *, closed: bool = False,
                     order: str = "angular") -> float:
    """Entropy of a sample supported on a curve, relative to FS arclength.

    The samples, sorted by phase (``order="angular"``) or taken as given,
    trace a polyline. It is cut into ``n_bins`` arcs of equal FS length l;
    with n_i of N points on arc i the result is -sum (n_i/N) ln(n_i/(N l)).
    A uniform sample on a curve of FS length L gives ln L.
    """
    p, phi = _bloch_arrays(samples)
    n = len(p)
    if n_bins < 1 or n < max(2, n_bins):
        raise InsufficientDataError(f"{n} samples cannot fill {n_bins} bins")
    if order == "angular":
        idx = np.argsort(phi, kind="stable")
        p, phi = p[idx], phi[idx]
    elif order != "given":
        raise InvalidInputError(f"unknown ordering {order!r}")
    seg = fs_segment_lengths(p, phi, closed=closed)
    pos = np.concatenate([[0.0], np.cumsum(seg[: n - 1])])
    total = float(np.sum(seg))
    if total <= 0:
        raise InsufficientDataError("samples span a curve of zero length")
    arc = total / n_bins
    counts = np.bincount(np.minimum((pos / arc).astype(np.int64), n_bins - 1), minlength=n_bins)
    P = counts[counts > 0] / n
    return float(-math.fsum(P * np.log(P / arc)))


# --- serialization --------------------------------------------------------

def save_curve_csv(curve: ScalingCurve, path) -> None:
    mask = curve.in_window()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["neg_log_eps", "entropy_nats", "in_window"])
        for x, h, m in zip(curve.neg_log_eps, curve.entropy, mask):
            w.writerow([repr(float(x)), repr(float(h)), int(m)])


def load_curve_csv(path) -> ScalingCurve:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    x = np.array([float(r["neg_log_eps"]) for r in rows])
    h = np.array([float(r["entropy_nats"]) for r in rows])
    inw = np.array([int(r.get("in_window", 1)) for r in rows], dtype=bool)
    window = None
    if inw.any():
        idx = np.nonzero(inw)[0]
        window = (int(idx[0]), int(idx[-1]) + 1)
    return ScalingCurve(x, h, window=window)


def fit_report(curve: ScalingCurve, fit: DimensionFit, settings: Optional[dict] = None) -> dict:
    """JSON-ready fit report with the curve and the settings that produced it."""
    return {
        "schema_version": "1",
        "slope": fit.dimension,
        "slope_stderr": fit.dim_stderr,
        "intercept": fit.dimensional_entropy,
        "intercept_stderr": fit.ent_stderr,
        "window": list(fit.window),
        "curve": {
            "neg_log_eps": curve.neg_log_eps.tolist(),
            "entropy_nats": curve.entropy.tolist(),
            "occupied": None if curve.occupied is None else curve.occupied.tolist(),
        },
        "settings": dict(settings or {}),
    }
