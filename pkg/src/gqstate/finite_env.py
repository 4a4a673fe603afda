"""Geometric quantum state of a system entangled with a finite environment.

Writing |psi> = sum_{i,a} psi[i, a] |s_i>|e_a> = sum_a sqrt(p_a) |chi_a>|e_a>
assigns the system the Dirac mixture {(p_a, chi_a)}: p_a is the probability
of environment outcome a and chi_a the normalized column a of psi.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, InvalidStateError
from .gqs import WEIGHT_FLOOR, DiracMixture
from .state_space import coords_from_amplitudes


@dataclass(frozen=True, eq=False)
class BipartitePureState:
    """Amplitude matrix psi[i, a]: system index i (rows), environment index a (columns)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.amplitudes, dtype=complex)
        if psi.ndim != 2:
            raise InvalidInputError("amplitudes must be a d_S x d_E matrix")
        norm2 = float(np.sum(np.abs(psi) ** 2))
        if norm2 == 0.0:
            raise InvalidInputError("zero-norm state")
        if abs(norm2 - 1.0) > 1e-10:
            raise InvalidStateError(f"state has squared norm {norm2!r}, not 1")
        psi.setflags(write=False)
        object.__setattr__(self, "amplitudes", psi)

    @classmethod
    def normalized(cls, amplitudes) -> "BipartitePureState":
        psi = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(psi)
        if norm == 0.0:
            raise InvalidInputError("zero-norm state")
        return cls(psi / norm)

    @property
    def d_s(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def d_e(self) -> int:
        return self.amplitudes.shape[1]

    def system_density_matrix(self) -> np.ndarray:
        """Partial trace over the environment, psi psi^dagger."""
        return self.amplitudes @ self.amplitudes.conj().T


def random_bipartite_state(d_s: int, d_e: int, rng) -> BipartitePureState:
    """Haar-random pure state on C^{d_s} x C^{d_e}."""
    rng = np.random.default_rng(rng)
    z = rng.normal(size=(d_s, d_e)) + 1j * rng.normal(size=(d_s, d_e))
    return BipartitePureState.normalized(z)


def induced_gqs(state: BipartitePureState) -> DiracMixture:
    """Environment-induced Dirac mixture on the system's CP^{d_S - 1}."""
    psi = state.amplitudes
    weights = np.sum(np.abs(psi) ** 2, axis=0)
    keep = weights >= WEIGHT_FLOOR
    if not np.any(keep):
        raise InvalidInputError("zero-norm state")
    weights = weights[keep]
    cols = psi[:, keep].T
    probs, phases = coords_from_amplitudes(cols)
    return DiracMixture(weights / math.fsum(weights), probs, phases)


def dimensional_entropy_h0(mixture: DiracMixture) -> float:
    """Shannon entropy of the atom weights, in nats."""
    w = mixture.weights
    return float(-math.fsum(w * np.log(w)))


def rotate_environment(state: BipartitePureState, unitary) -> BipartitePureState:
    """Express the state in a new environment basis: psi -> psi U^T."""
    u = np.asarray(unitary, dtype=complex)
    return BipartitePureState(state.amplitudes @ u.T)


def rotate_system(state: BipartitePureState, unitary) -> BipartitePureState:
    u = np.asarray(unitary, dtype=complex)
    return BipartitePureState(u @ state.amplitudes)


def schmidt_basis_state(state: BipartitePureState) -> BipartitePureState:
    """The same state written in the environment basis that diagonalizes rho_E."""
    _, _, vh = np.linalg.svd(state.amplitudes)
    # columns of psi @ vh^dagger are orthogonal: the Schmidt form
    return BipartitePureState(state.amplitudes @ vh.conj().T)


def load_bipartite_state(path) -> BipartitePureState:
    """Read amplitudes from JSON or CSV.

    JSON: {"d_s": .., "d_e": .., "amplitudes": [[re, im], ...]} in row-major
    order (or a nested list of rows of [re, im] pairs).
    CSV: one row per system index, each cell "re,im" or "re" in two
    interleaved columns re_0,im_0,re_1,im_1,...
    """
    path = str(path)
    if path.endswith(".json"):
        with open(path) as fh:
            doc = json.load(fh)
        amps = np.asarray(doc["amplitudes"], dtype=float)
        z = amps[..., 0] + 1j * amps[..., 1]
        if z.ndim == 1:
            z = z.reshape(int(doc["d_s"]), int(doc["d_e"]))
        return BipartitePureState.normalized(z) if doc.get("normalize") else BipartitePureState(z)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    try:
        [float(x) for x in rows[0]]
    except ValueError:
        rows = rows[1:]  # header
    vals = np.array([[float(x) for x in r] for r in rows])
    if vals.shape[1] % 2:
        raise InvalidInputError(f"{path}: expected interleaved re,im columns")
    return BipartitePureState(vals[:, 0::2] + 1j * vals[:, 1::2])


def save_bipartite_state(state: BipartitePureState, path) -> None:
    psi = state.amplitudes
    doc = {
        "d_s": state.d_s,
        "d_e": state.d_e,
        "amplitudes": [[float(z.real), float(z.imag)] for z in psi.ravel()],
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
