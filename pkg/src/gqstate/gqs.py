"""Geometric quantum states and their coarse-graining.

Three representations share one interface:

* DiracMixture   - finitely many weighted pure states
* DensityGQS     - a density q against the normalized FS measure
* EmpiricalSample - equally weighted sample points (i.i.d. or a trajectory)

Points are held as arrays (``probs`` of shape (N, D), ``phases`` of shape
(N, D-1)) rather than lists of ProjectivePoint; the latter are available
through the ``atoms``/``points`` accessors.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidInputError, InvalidStateError, UnsupportedIntegrationError
from .state_space import (
    TWO_PI,
    Partition,
    ProjectivePoint,
    amplitudes_from_coords,
    cell_indices,
    coords_from_amplitudes,
    decode_codes,
    flat_codes,
    wrap_phase,
)

WEIGHT_FLOOR = 1e-15
DEFAULT_SUBGRID = 4


def _as_coords(probs, phases):
    probs = np.atleast_2d(np.asarray(probs, dtype=float))
    phases = np.asarray(phases, dtype=float)
    phases = phases.reshape(len(probs), probs.shape[1] - 1)
    return probs, wrap_phase(phases)


@dataclass(frozen=True, eq=False)
class DiracMixture:
    """sum_a w_a delta(Z - z_a)."""

    weights: np.ndarray
    probs: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        probs, phases = _as_coords(self.probs, self.phases)
        if len(w) != len(probs):
            raise InvalidStateError("weights and points differ in length")
        if np.any(w < 0):
            raise InvalidStateError("negative atom weight")
        keep = w >= WEIGHT_FLOOR
        w, probs, phases = w[keep], probs[keep], phases[keep]
        if len(w) == 0:
            raise InvalidStateError("mixture has no atoms")
        if abs(math.fsum(w) - 1.0) > 1e-10:
            raise InvalidStateError(f"atom weights sum to {math.fsum(w)!r}")
        for name, val in (("weights", w), ("probs", probs), ("phases", phases)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @classmethod
    def from_atoms(cls, atoms) -> "DiracMixture":
        """Build from ``[(weight, ProjectivePoint), ...]``."""
        atoms = list(atoms)
        if not atoms:
            raise InvalidStateError("mixture has no atoms")
        w = [a[0] for a in atoms]
        probs = [a[1].probs for a in atoms]
        phases = [a[1].phases for a in atoms]
        return cls(np.array(w), np.array(probs), np.array(phases))

    @classmethod
    def from_kets(cls, weights, kets) -> "DiracMixture":
        probs, phases = coords_from_amplitudes(np.asarray(kets))
        return cls(np.asarray(weights, dtype=float), probs, phases)

    @property
    def dim(self) -> int:
        return self.probs.shape[1]

    def __len__(self):
        return len(self.weights)

    @property
    def atoms(self) -> list:
        return [
            (float(w), ProjectivePoint(tuple(p), tuple(f)))
            for w, p, f in zip(self.weights, self.probs, self.phases)
        ]

    def kets(self) -> np.ndarray:
        return amplitudes_from_coords(self.probs, self.phases)


@dataclass(frozen=True, eq=False)
class EmpiricalSample:
    """Equally weighted points, e.g. a trajectory of a map."""

    probs: np.ndarray
    phases: np.ndarray

    def __post_init__(self):
        probs, phases = _as_coords(self.probs, self.phases)
        if len(probs) < 1:
            raise InvalidStateError("empty sample")
        if np.any(np.abs(probs.sum(axis=1) - 1.0) > 1e-12):
            raise InvalidStateError("sample point probabilities do not sum to 1")
        for name, val in (("probs", probs), ("phases", phases)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)

    @classmethod
    def from_points(cls, points) -> "EmpiricalSample":
        points = list(points)
        return cls(np.array([x.probs for x in points]), np.array([x.phases for x in points]))

    @classmethod
    def from_bloch(cls, p, phi) -> "EmpiricalSample":
        """Qubit sample from arrays of p (weight on |1>) and phi."""
        p = np.asarray(p, dtype=float)
        return cls(np.column_stack([1.0 - p, p]), np.asarray(phi, dtype=float)[:, None])

    @property
    def dim(self) -> int:
        return self.probs.shape[1]

    def __len__(self):
        return len(self.probs)

    @property
    def p(self) -> np.ndarray:
        return self.probs[:, 1]

    @property
    def phi(self) -> np.ndarray:
        return self.phases[:, 0]

    @property
    def points(self) -> list:
        return [ProjectivePoint(tuple(p), tuple(f)) for p, f in zip(self.probs, self.phases)]


# name -> factory(**params) -> DensityGQS, for the "density-ref" JSON schema
DENSITY_FAMILIES: dict = {}


def register_density_family(name):
    def deco(factory):
        DENSITY_FAMILIES[name] = factory
        return factory

    return deco


@dataclass(frozen=True, eq=False)
class DensityGQS:
    """Density q against the normalized FS measure.

    For D=2, ``density(p, phi)`` takes broadcastable arrays. ``marginals``,
    when q(p, phi) = f(p) g(phi), lets quadrature run per axis.
    ``sampler(rng, n)`` returns (probs, phases) arrays of n exact draws.
    ``family``/``params`` name a registered constructor so the state can be
    written to JSON by reference.
    """

    density: Callable
    dim: int = 2
    sampler: Optional[Callable] = None
    marginals: Optional[tuple] = None
    family: Optional[str] = None
    params: dict = field(default_factory=dict)

    def __call__(self, p, phi):
        return self.density(p, phi)

    def sample(self, n: int, rng) -> EmpiricalSample:
        if self.sampler is None:
            raise UnsupportedIntegrationError("density has no sampler")
        probs, phases = self.sampler(np.random.default_rng(rng), int(n))
        return EmpiricalSample(probs, phases)


@register_density_family("uniform")
def uniform_density() -> DensityGQS:
    """The FS-uniform qubit state, q = 1."""

    def q(p, phi):
        return np.ones(np.broadcast(p, phi).shape)

    def sampler(rng, n):
        p = rng.random(n)
        return np.column_stack([1.0 - p, p]), TWO_PI * rng.random((n, 1))

    one = lambda x: np.ones_like(np.asarray(x, dtype=float))  # noqa: E731
    return DensityGQS(q, 2, sampler, marginals=(one, one), family="uniform")


class CoarseHistogram:
    """Cell probabilities p_{j,k} of a state on a partition.

    Cells are stored as flat mixed-radix codes (``codes=None`` means the
    dense row-major list of every cell), falling back to explicit
    multi-index rows when the code space would overflow.
    """

    def __init__(self, partition: Partition, probs, codes=None, cells=None):
        self.partition = partition
        self.probs = np.asarray(probs, dtype=float)
        self._codes = codes
        self._cells = cells
        if np.any(self.probs < 0):
            raise InvalidStateError("negative cell probability")
        total = math.fsum(self.probs)
        if abs(total - 1.0) > 1e-9:
            raise InvalidStateError(f"histogram sums to {total!r}")

    @property
    def cells(self) -> np.ndarray:
        if self._cells is None:
            L = self.partition.cells_per_axis
            codes = self._codes if self._codes is not None else np.arange(len(self.probs))
            self._cells = decode_codes(codes, L, self.partition.n_axes)
        return self._cells

    @property
    def entries(self) -> dict:
        return {tuple(int(i) for i in c): float(p) for c, p in zip(self.cells, self.probs) if p > 0}

    @property
    def occupied(self) -> int:
        return int(np.count_nonzero(self.probs))

    def __len__(self):
        return len(self.probs)


def _histogram_from_points(probs, phases, weights, partition: Partition) -> CoarseHistogram:
    L = partition.cells_per_axis
    idx = cell_indices(probs, phases, L)
    codes = flat_codes(idx, L)
    if codes is not None:
        uniq, inv = np.unique(codes, return_inverse=True)
        cells = None
    else:
        cells, inv = np.unique(idx, axis=0, return_inverse=True)
        uniq = None
    inv = inv.ravel()
    if weights is None:
        mass = np.bincount(inv).astype(float) / len(inv)
    else:
        mass = np.bincount(inv, weights=weights)
    return CoarseHistogram(partition, mass, codes=uniq, cells=cells)


def _midpoints(L, s):
    return (np.arange(L * s) + 0.5) / (L * s)


def _quadrature_histogram(state: DensityGQS, partition: Partition, subgrid: int,
                          chunk_points: int = 1 << 22) -> CoarseHistogram:
    L, s = partition.cells_per_axis, int(subgrid)
    u = _midpoints(L, s)
    if state.marginals is not None:
        f, g = state.marginals
        a = np.asarray(f(u), dtype=float).reshape(L, s).mean(axis=1)
        b = np.asarray(g(TWO_PI * u), dtype=float).reshape(L, s).mean(axis=1)
        grid = np.outer(a, b)
    else:
        grid = np.empty((L, L))
        phi = TWO_PI * u
        rows = max(1, chunk_points // (L * s * s))
        for start in range(0, L, rows):
            stop = min(L, start + rows)
            pp = u[start * s : stop * s]
            q = np.asarray(state.density(pp[:, None], phi[None, :]), dtype=float)
            grid[start:stop] = q.reshape(stop - start, s, L, s).mean(axis=(1, 3))
    if np.any(grid < 0) or not np.all(np.isfinite(grid)):
        raise InvalidStateError("density is negative or non-finite on the quadrature grid")
    total = grid.sum()
    if total <= 0:
        raise InvalidStateError("density integrates to zero")
    # midpoint masses are renormalized so the histogram is a distribution
    return CoarseHistogram(partition, (grid / total).ravel())


def coarse_grain(state, partition: Partition, *, method: str = "auto",
                 subgrid: int = DEFAULT_SUBGRID, n_samples: int = 10**6,
                 seed=None) -> CoarseHistogram:
    """Probability mu(Q(j,k)) of every partition cell.

    Dirac mixtures sum atom weights per cell and samples count points.
    Densities use a midpoint rule on a ``subgrid`` x ``subgrid`` lattice per
    cell (``method="quadrature"``, D=2 only) or Monte-Carlo over
    ``n_samples`` sampler draws (``method="sample"``).
    """
    if state.dim != partition.dim:
        raise InvalidInputError(f"state has D={state.dim}, partition has D={partition.dim}")
    if isinstance(state, DiracMixture):
        return _histogram_from_points(state.probs, state.phases, state.weights, partition)
    if isinstance(state, EmpiricalSample):
        return _histogram_from_points(state.probs, state.phases, None, partition)
    if isinstance(state, DensityGQS):
        if method == "auto":
            method = "quadrature" if state.dim == 2 else "sample"
        if method == "quadrature":
            if state.dim != 2:
                raise UnsupportedIntegrationError("quadrature coarse-graining is implemented for D=2 only")
            return _quadrature_histogram(state, partition, subgrid)
        if method == "sample":
            if state.sampler is None:
                raise UnsupportedIntegrationError(
                    f"density on D={state.dim} has no sampler; cannot coarse-grain"
                )
            sample = state.sample(n_samples, seed)
            return _histogram_from_points(sample.probs, sample.phases, None, partition)
        raise InvalidInputError(f"unknown coarse-graining method {method!r}")
    raise InvalidInputError(f"cannot coarse-grain object of type {type(state).__name__}")


def reduced_density_matrix(state: DiracMixture) -> np.ndarray:
    """rho = sum_a w_a |chi_a><chi_a|."""
    kets = state.kets()
    rho = (kets.T * state.weights) @ kets.conj()
    return 0.5 * (rho + rho.conj().T)


def von_neumann_entropy(rho, tol: float = 1e-8) -> float:
    """-tr(rho ln rho) in nats."""
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise InvalidStateError("density matrix must be square")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise InvalidStateError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise InvalidStateError(f"density matrix has trace {np.trace(rho).real!r}")
    lam = np.linalg.eigvalsh(rho)
    if lam.min() < -tol:
        raise InvalidStateError(f"density matrix has eigenvalue {lam.min()!r} < 0")
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


# --- serialization --------------------------------------------------------

def state_to_dict(state) -> dict:
    if isinstance(state, DiracMixture):
        return {
            "type": "dirac",
            "dim": state.dim,
            "atoms": [
                {"weight": float(w), "probs": p.tolist(), "phases": f.tolist()}
                for w, p, f in zip(state.weights, state.probs, state.phases)
            ],
        }
    if isinstance(state, EmpiricalSample):
        return {
            "type": "empirical",
            "dim": state.dim,
            "probs": state.probs.tolist(),
            "phases": state.phases.tolist(),
        }
    if isinstance(state, DensityGQS):
        if state.family is None:
            raise InvalidInputError("only registered density families can be serialized")
        return {"type": "density-ref", "dim": state.dim, "family": state.family,
                "params": dict(state.params)}
    raise InvalidInputError(f"cannot serialize {type(state).__name__}")


def state_from_dict(doc: dict):
    kind = doc.get("type")
    if kind == "dirac":
        atoms = doc["atoms"]
        return DiracMixture(
            np.array([a["weight"] for a in atoms], dtype=float),
            np.array([a["probs"] for a in atoms], dtype=float),
            np.array([a["phases"] for a in atoms], dtype=float),
        )
    if kind == "empirical":
        return EmpiricalSample(np.array(doc["probs"], dtype=float), np.array(doc["phases"], dtype=float))
    if kind == "density-ref":
        family = doc["family"]
        if family not in DENSITY_FAMILIES:
            # families register on import of their module
            from . import gaussian_box  # noqa: F401
        try:
            factory = DENSITY_FAMILIES[family]
        except KeyError:
            raise InvalidInputError(f"unknown density family {family!r}") from None
        return factory(**doc.get("params", {}))
    raise InvalidInputError(f"unknown state type {kind!r}")


def save_state_json(state, path) -> None:
    with open(path, "w") as fh:
        json.dump(state_to_dict(state), fh, indent=1)


def load_state_json(path):
    with open(path) as fh:
        return state_from_dict(json.load(fh))


def save_sample_csv(sample: EmpiricalSample, path) -> None:
    if sample.dim != 2:
        raise InvalidInputError("CSV sample files hold qubit (D=2) states only")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "phi"])
        for p, phi in zip(sample.p, sample.phi):
            w.writerow([repr(float(p)), repr(float(phi))])


def load_sample_csv(path) -> EmpiricalSample:
    """Read a qubit sample from a CSV with columns p, phi (extra columns ignored)."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "p" not in rows[0] or "phi" not in rows[0]:
        raise InvalidInputError(f"{path}: expected CSV columns p,phi")
    p = np.array([float(r["p"]) for r in rows])
    phi = np.array([float(r["phi"]) for r in rows])
    return EmpiricalSample.from_bloch(p, phi)
