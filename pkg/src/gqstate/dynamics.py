"""Chaotic maps acting on the qubit Bloch square.

Both maps move a pure state (p, phi) to another pure state; any such step
is realized by a 2x2 unitary, see :func:`unitary_lift`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import InvalidInputError
from .gqs import EmpiricalSample
from .state_space import TWO_PI, BlochPoint

DEFAULT_BURN_IN = 1000


@dataclass(frozen=True)
class BakerParams:
    """Extended Baker's Map: contractions lambda_a <= lambda_b <= 1/2, split phase beta."""

    lambda_a: float = 0.2
    lambda_b: float = 0.2
    beta: float = 4 * math.pi / 10

    def __post_init__(self):
        if not 0 < self.lambda_a <= self.lambda_b <= 0.5:
            raise InvalidInputError(
                f"need 0 < lambda_a <= lambda_b <= 1/2, got {self.lambda_a}, {self.lambda_b}"
            )
        if not 0 < self.beta <= math.pi:
            raise InvalidInputError(f"need 0 < beta <= pi, got {self.beta}")

    @property
    def alpha(self) -> float:
        return self.beta / TWO_PI


@dataclass(frozen=True)
class StandardMapParams:
    K: float = 2.0

    def __post_init__(self):
        if self.K < 0:
            raise InvalidInputError(f"K must be nonnegative, got {self.K}")


def _baker(p, phi, la, lb, beta):
    if phi <= beta:
        p, phi = la * p, TWO_PI * phi / beta
    else:
        p, phi = 0.5 + lb * p, TWO_PI * (phi - beta) / (TWO_PI - beta)
    if phi >= TWO_PI:
        phi -= TWO_PI
    return p, phi


def _standard(p, phi, K):
    p = (p + K / TWO_PI * math.sin(phi)) % 1.0
    phi = (phi + TWO_PI * p) % TWO_PI
    return p, phi


def baker_step(point: BlochPoint, params: BakerParams) -> BlochPoint:
    return BlochPoint(*_baker(point.p, point.phi, params.lambda_a, params.lambda_b, params.beta))


def standard_map_step(point: BlochPoint, params: StandardMapParams) -> BlochPoint:
    """Chirikov update: p first, then phi with the new p."""
    return BlochPoint(*_standard(point.p, point.phi, params.K))


Params = Union[BakerParams, StandardMapParams]


def _kernel(params: Params) -> Callable:
    if isinstance(params, BakerParams):
        la, lb, beta = params.lambda_a, params.lambda_b, params.beta
        return lambda p, f: _baker(p, f, la, lb, beta)
    if isinstance(params, StandardMapParams):
        K = params.K
        return lambda p, f: _standard(p, f, K)
    raise InvalidInputError(f"unknown map parameters {params!r}")


def trajectory(params: Params, initial: BlochPoint, n_steps: int,
               burn_in: int = DEFAULT_BURN_IN) -> tuple:
    """Arrays (p, phi) of the n_steps iterates following ``burn_in`` discarded ones."""
    if n_steps < 1:
        raise InvalidInputError("n_steps must be >= 1")
    step = _kernel(params)
    p, f = initial.p, initial.phi
    for _ in range(burn_in):
        p, f = step(p, f)
    P = np.empty(n_steps)
    F = np.empty(n_steps)
    for i in range(n_steps):
        p, f = step(p, f)
        P[i] = p
        F[i] = f
    return P, F


def iterate(params: Params, initial: BlochPoint, n_steps: int,
            burn_in: int = DEFAULT_BURN_IN) -> EmpiricalSample:
    """Trajectory sample of a map, as an EmpiricalSample."""
    P, F = trajectory(params, initial, n_steps, burn_in)
    return EmpiricalSample.from_bloch(P, F)


def grid_evolution(params: Params, n_grid: int, steps) -> dict:
    """Evolve the n_grid x n_grid lattice of initial states (j/n, 2 pi k/n).

    Returns {step: (p, phi)} for each requested step count, arrays indexed
    [j, k].
    """
    steps = sorted(set(int(s) for s in steps))
    j, k = np.meshgrid(np.arange(n_grid), np.arange(n_grid), indexing="ij")
    p = (j / n_grid).astype(float)
    f = (TWO_PI * k / n_grid).astype(float)
    out = {}
    done = 0
    for target in steps:
        for _ in range(target - done):
            p, f = _vector_step(params, p, f)
        done = target
        out[target] = (p.copy(), f.copy())
    return out


def _vector_step(params: Params, p, f):
    if isinstance(params, StandardMapParams):
        p = np.mod(p + params.K / TWO_PI * np.sin(f), 1.0)
        f = np.mod(f + TWO_PI * p, TWO_PI)
        return p, f
    first = f <= params.beta
    p_new = np.where(first, params.lambda_a * p, 0.5 + params.lambda_b * p)
    f_new = np.where(first, TWO_PI * f / params.beta,
                     TWO_PI * (f - params.beta) / (TWO_PI - params.beta))
    return p_new, np.where(f_new >= TWO_PI, f_new - TWO_PI, f_new)


def baker_information_dimension(params: BakerParams) -> float:
    """Analytic information dimension of the Baker's-map attractor."""
    a = params.alpha
    if a <= 0.0 or a >= 1.0:
        return 1.0
    num = -a * math.log(a) - (1 - a) * math.log(1 - a)
    den = abs(a * math.log(params.lambda_a) + (1 - a) * math.log(params.lambda_b))
    return 1.0 + num / den


def _perp(point: BlochPoint) -> np.ndarray:
    # |psi(1-p, phi+pi)>, orthogonal to |psi(p, phi)>
    return np.array([math.sqrt(point.p), math.sqrt(1 - point.p) * np.exp(1j * (point.phi + math.pi))])


def unitary_lift(source: BlochPoint, target: BlochPoint) -> np.ndarray:
    """U = |psi'><psi| + |psi'_perp><psi_perp| carrying source to target."""
    a, b = source.ket(), target.ket()
    a_perp, b_perp = _perp(source), _perp(target)
    return np.outer(b, a.conj()) + np.outer(b_perp, a_perp.conj())
