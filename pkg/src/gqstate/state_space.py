"""Coordinates, Fubini-Study measure and the uniform partition of CP^{D-1}.

A pure state of a D-level system is stored in "probabilities + phases"
coordinates, Z_a = sqrt(p_a) exp(i phi_a), with the phase of component 0
removed. For a qubit this is the Bloch square (p, phi) in [0,1] x [0,2pi),
where p is the weight on |1>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, InvalidStateError

TWO_PI = 2.0 * np.pi
# amplitudes below this weight carry no usable phase
POLE_TOL = 1e-12
_SUM_TOL = 1e-12


def wrap_phase(phi):
    """Reduce angles to [0, 2pi). Works on scalars and arrays."""
    out = np.mod(phi, TWO_PI)
    # np.mod(-1e-18, 2pi) rounds to exactly 2pi
    out = np.where(out >= TWO_PI, 0.0, out)
    if np.ndim(out) == 0:
        return float(out)
    return out


def coords_from_amplitudes(z):
    """Map an (N, D) array of amplitudes to (probs (N, D), phases (N, D-1)).

    Rows are normalized first. The reference phase is that of component 0,
    or of the first component with weight above POLE_TOL when component 0
    vanishes; phases of vanishing components are set to 0.
    """
    z = np.atleast_2d(np.asarray(z, dtype=complex))
    norms = np.linalg.norm(z, axis=1)
    if np.any(norms == 0.0):
        raise InvalidStateError("zero-norm amplitude vector")
    z = z / norms[:, None]
    probs = np.abs(z) ** 2
    alive = probs >= POLE_TOL
    ref = np.argmax(alive, axis=1)
    ref_phase = np.angle(z[np.arange(len(z)), ref])
    phases = wrap_phase(np.angle(z[:, 1:]) - ref_phase[:, None])
    phases = np.where(alive[:, 1:], phases, 0.0)
    phases = np.atleast_2d(phases)
    # components equal to the reference carry phase 0 exactly
    rows = np.nonzero(ref > 0)[0]
    phases[rows, ref[rows] - 1] = 0.0
    return probs, phases


def amplitudes_from_coords(probs, phases):
    """Inverse of coords_from_amplitudes (up to global phase)."""
    probs = np.atleast_2d(np.asarray(probs, dtype=float))
    phases = np.atleast_2d(np.asarray(phases, dtype=float))
    full = np.concatenate([np.zeros((len(probs), 1)), phases], axis=1)
    return np.sqrt(np.clip(probs, 0.0, 1.0)) * np.exp(1j * full)


@dataclass(frozen=True)
class ProjectivePoint:
    """A point of CP^{D-1}: D probabilities and D-1 relative phases."""

    probs: tuple
    phases: tuple

    def __post_init__(self):
        probs = tuple(float(x) for x in self.probs)
        phases = tuple(wrap_phase(float(x)) for x in self.phases)
        if len(probs) < 2 or len(phases) != len(probs) - 1:
            raise InvalidStateError(
                f"need D >= 2 probabilities and D-1 phases, got {len(probs)} and {len(phases)}"
            )
        if any(p < -_SUM_TOL or p > 1 + _SUM_TOL for p in probs):
            raise InvalidStateError(f"probabilities outside [0,1]: {probs}")
        if abs(math.fsum(probs) - 1.0) > _SUM_TOL:
            raise InvalidStateError(f"probabilities sum to {math.fsum(probs)!r}, not 1")
        object.__setattr__(self, "probs", tuple(min(max(p, 0.0), 1.0) for p in probs))
        object.__setattr__(self, "phases", phases)

    @property
    def dim(self) -> int:
        return len(self.probs)

    @classmethod
    def from_amplitudes(cls, z) -> "ProjectivePoint":
        probs, phases = coords_from_amplitudes(np.asarray(z)[None, :])
        probs = probs[0] / probs[0].sum()
        return cls(tuple(probs), tuple(phases[0]))

    def amplitudes(self) -> np.ndarray:
        """A unit-norm representative ket with real nonnegative component 0."""
        return amplitudes_from_coords([self.probs], [self.phases])[0]


@dataclass(frozen=True)
class BlochPoint:
    """Qubit state sqrt(1-p)|0> + sqrt(p) e^{i phi}|1>."""

    p: float
    phi: float

    def __post_init__(self):
        p = float(self.p)
        if not -_SUM_TOL <= p <= 1 + _SUM_TOL:
            raise InvalidStateError(f"p={p} outside [0,1]")
        object.__setattr__(self, "p", min(max(p, 0.0), 1.0))
        object.__setattr__(self, "phi", wrap_phase(float(self.phi)))

    def ket(self) -> np.ndarray:
        return np.array([math.sqrt(1.0 - self.p), math.sqrt(self.p) * np.exp(1j * self.phi)])

    def to_projective(self) -> ProjectivePoint:
        return ProjectivePoint((1.0 - self.p, self.p), (self.phi,))

    @classmethod
    def from_projective(cls, point: ProjectivePoint) -> "BlochPoint":
        if point.dim != 2:
            raise InvalidInputError(f"BlochPoint needs D=2, got D={point.dim}")
        return cls(point.probs[1], point.phases[0])

    @classmethod
    def from_ket(cls, ket) -> "BlochPoint":
        return cls.from_projective(ProjectivePoint.from_amplitudes(ket))


@dataclass(frozen=True)
class Partition:
    """Uniform simplex x torus partition with L cells per axis (eps = 1/L)."""

    dim: int
    cells_per_axis: int

    def __post_init__(self):
        if int(self.dim) < 2:
            raise InvalidInputError(f"dimension D must be >= 2, got {self.dim}")
        if int(self.cells_per_axis) < 1:
            raise InvalidInputError(f"L must be >= 1, got {self.cells_per_axis}")
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "cells_per_axis", int(self.cells_per_axis))

    @property
    def epsilon(self) -> float:
        return 1.0 / self.cells_per_axis

    @property
    def n_axes(self) -> int:
        return 2 * (self.dim - 1)

    @property
    def n_cells(self) -> int:
        return self.cells_per_axis ** self.n_axes


def total_fs_volume(dim: int) -> float:
    """Total Fubini-Study volume pi^{D-1}/(D-1)! of CP^{D-1}."""
    if dim < 2:
        raise InvalidInputError(f"dimension D must be >= 2, got {dim}")
    return math.pi ** (dim - 1) / math.factorial(dim - 1)


def fs_cell_measure(partition: Partition) -> float:
    """Normalized FS measure of a partition cell.

    Exact for D=2 (1/L^2). For D>2 this is the measure of a cell lying
    wholly inside the simplex, (D-1)!/L^{2(D-1)}; cells clipped by the
    simplex boundary are smaller.
    """
    d = partition.dim - 1
    return math.factorial(d) / float(partition.cells_per_axis) ** (2 * d)


def _bin(x, scale, L):
    idx = np.floor(np.asarray(x, dtype=float) * scale).astype(np.int64)
    return np.clip(idx, 0, L - 1)


def cell_indices(probs, phases, L: int) -> np.ndarray:
    """Vectorized binning: (N, D) probs and (N, D-1) phases -> (N, 2(D-1)) ints.

    Columns are (j_1..j_{D-1}, k_1..k_{D-1}); bins are half-open with the
    upper edge clamped into the last bin.
    """
    probs = np.atleast_2d(np.asarray(probs, dtype=float))
    phases = wrap_phase(np.atleast_2d(np.asarray(phases, dtype=float)))
    j = _bin(probs[:, 1:], L, L)
    k = _bin(phases, L / TWO_PI, L)
    return np.concatenate([j, k], axis=1)


def flat_codes(indices: np.ndarray, L: int):
    """Mixed-radix encoding of cell multi-indices, or None if it would overflow int64."""
    n_axes = indices.shape[1]
    if n_axes * math.log2(max(L, 2)) >= 62:
        return None
    codes = np.zeros(len(indices), dtype=np.int64)
    for col in range(n_axes):
        codes = codes * L + indices[:, col]
    return codes


def decode_codes(codes: np.ndarray, L: int, n_axes: int) -> np.ndarray:
    out = np.empty((len(codes), n_axes), dtype=np.int64)
    rest = np.asarray(codes, dtype=np.int64).copy()
    for col in range(n_axes - 1, -1, -1):
        out[:, col] = rest % L
        rest //= L
    return out


def cell_index(point: ProjectivePoint, partition: Partition) -> tuple:
    """Cell multi-index (j_1..j_{D-1}, k_1..k_{D-1}) containing ``point``."""
    if point.dim != partition.dim:
        raise InvalidInputError(f"point has D={point.dim}, partition has D={partition.dim}")
    idx = cell_indices([point.probs], [point.phases], partition.cells_per_axis)[0]
    return tuple(int(i) for i in idx)


def fs_metric(p):
    """Diagonal qubit FS metric components (g_pp, g_phiphi) at weight p."""
    p = np.asarray(p, dtype=float)
    return 1.0 / (4.0 * p * (1.0 - p)), p * (1.0 - p)


def _wrapped_delta(dphi):
    return np.mod(dphi + np.pi, TWO_PI) - np.pi


def fs_segment_lengths(p, phi, closed: bool = False, pole_tol: float = 1e-9) -> np.ndarray:
    """FS lengths of the polyline segments through (p_i, phi_i).

    Each segment uses the metric at its midpoint. Phase increments take the
    shortest way around the circle. Segments touching a pole, or whose p
    step is large next to the distance to the nearest pole (where the p-form
    of the metric varies too fast across the segment), switch to the polar
    angle theta, p = sin^2(theta/2), in which the metric is regular.
    """
    p = np.asarray(p, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if closed:
        p = np.append(p, p[:1])
        phi = np.append(phi, phi[:1])
    dp = np.diff(p)
    dphi = _wrapped_delta(np.diff(phi))
    pm = 0.5 * (p[1:] + p[:-1])
    near_pole = (np.minimum(p[1:], p[:-1]) < pole_tol) | (np.maximum(p[1:], p[:-1]) > 1 - pole_tol)
    near_pole |= np.abs(dp) > 0.1 * np.minimum(pm, 1.0 - pm)
    with np.errstate(divide="ignore", invalid="ignore"):
        g_pp, g_ff = fs_metric(pm)
        ds = np.sqrt(dp**2 * g_pp + dphi**2 * g_ff)
    if np.any(near_pole):
        theta = 2.0 * np.arcsin(np.sqrt(np.clip(p, 0.0, 1.0)))
        dth = np.diff(theta)
        thm = 0.5 * (theta[1:] + theta[:-1])
        ds_theta = 0.5 * np.sqrt(dth**2 + np.sin(thm) ** 2 * dphi**2)
        ds = np.where(near_pole, ds_theta, ds)
    # zero-length segments at the poles give 0 * inf
    return np.where(np.isfinite(ds), ds, 0.0)


def _as_p_phi(samples):
    if len(samples) and isinstance(samples[0], BlochPoint):
        return np.array([s.p for s in samples]), np.array([s.phi for s in samples])
    arr = np.asarray(samples, dtype=float)
    return arr[:, 0], arr[:, 1]


def fs_curve_length(samples: Sequence, closed: bool = False) -> float:
    """Fubini-Study arclength of an ordered list of qubit states.

    ``samples`` is a sequence of BlochPoint or an (N, 2) array of (p, phi).
    """
    if len(samples) < 2:
        raise InvalidInputError("a curve needs at least two points")
    p, phi = _as_p_phi(samples)
    return float(math.fsum(fs_segment_lengths(p, phi, closed=closed)))
