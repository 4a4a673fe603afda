"""Qubit coupled to a defect Heisenberg chain: ground state and induced GQS.

    H = B.tau + sum_{k=1}^{N_E-1} (sigma_k.sigma_{k+1} + B.sigma_k) + tau.sigma_1

on qubits ordered (system, env_1, ..., env_{N_E}); the last environment
spin carries no field. Qubit 0 is the most significant bit of a basis
index, so a state vector reshapes to a (2, 2^{N_E}) system x environment
matrix. Bit value 0 is spin up (sigma_z = +1).
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .errors import ConvergenceError, GQStateError, InvalidInputError
from .estimator import (
    DEFAULT_SCALES,
    DimensionFit,
    ScalingCurve,
    aggregate_fit,
    auto_fit_window,
    fit_dimension,
    scaling_curve,
)
from .finite_env import BipartitePureState, dimensional_entropy_h0, induced_gqs
from .gqs import DiracMixture, reduced_density_matrix, von_neumann_entropy

log = logging.getLogger(__name__)

_PAULI = "XYZ"
# single-qubit changes of environment measurement basis (rows = new basis bras)
ENV_BASES = {
    "z": np.eye(2, dtype=complex),
    "x": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
    "y": np.array([[1, -1j], [1, 1j]], dtype=complex) / math.sqrt(2),
}


@dataclass(frozen=True)
class SpinChainSpec:
    n_env: int
    b_field: tuple = (0.0, 0.0, 0.5)
    coupling: float = 1.0

    def __post_init__(self):
        if int(self.n_env) < 2:
            raise InvalidInputError(f"environment needs at least 2 spins, got {self.n_env}")
        b = tuple(float(x) for x in self.b_field)
        if len(b) != 3:
            raise InvalidInputError("b_field must be a 3-vector")
        object.__setattr__(self, "n_env", int(self.n_env))
        object.__setattr__(self, "b_field", b)

    @property
    def n_qubits(self) -> int:
        return self.n_env + 1

    @property
    def dim(self) -> int:
        return 2**self.n_qubits


@dataclass(frozen=True, eq=False)
class SparseHamiltonian:
    matrix: sp.csr_matrix
    spec: SpinChainSpec

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.matrix.data)

    def __matmul__(self, v):
        return self.matrix @ v


def pauli_terms(spec: SpinChainSpec) -> list:
    """The Hamiltonian as [(coefficient, {qubit: 'X'|'Y'|'Z'}), ...]."""
    J, B = spec.coupling, spec.b_field
    terms = []
    for a, s in enumerate(_PAULI):
        if B[a]:
            terms.append((B[a], {0: s}))
            terms.extend((B[a], {k: s}) for k in range(1, spec.n_env))
        if J:
            terms.append((J, {0: s, 1: s}))
            terms.extend((J, {k: s, k + 1: s}) for k in range(1, spec.n_env))
    return terms


def _assemble(terms, n_qubits) -> sp.csr_matrix:
    dim = 2**n_qubits
    idx = np.arange(dim, dtype=np.int64)
    by_flip = {}
    for coef, ops in terms:
        flip = 0
        amp = np.full(dim, complex(coef))
        for q, s in ops.items():
            pos = n_qubits - 1 - q
            sign = 1 - 2 * ((idx >> pos) & 1)
            if s in "XY":
                flip |= 1 << pos
            if s == "Y":
                amp *= 1j * sign
            elif s == "Z":
                amp *= sign
        if flip in by_flip:
            by_flip[flip] += amp
        else:
            by_flip[flip] = amp
    rows, cols, vals = [], [], []
    for flip, amp in sorted(by_flip.items()):
        nz = amp != 0
        rows.append(idx[nz] ^ flip)
        cols.append(idx[nz])
        vals.append(amp[nz])
    data = np.concatenate(vals)
    if np.all(data.imag == 0):
        data = data.real
    m = sp.coo_matrix((data, (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim))
    m = m.tocsr()
    m.eliminate_zeros()
    return m


def build_hamiltonian(spec: SpinChainSpec) -> SparseHamiltonian:
    return SparseHamiltonian(_assemble(pauli_terms(spec), spec.n_qubits), spec)


def total_sz(n_qubits: int) -> sp.csr_matrix:
    """Sum of sigma_z over all qubits, as a diagonal matrix."""
    idx = np.arange(2**n_qubits, dtype=np.int64)
    ones = np.array([bin(i).count("1") for i in range(256)])
    pop = np.zeros_like(idx)
    rest = idx.copy()
    while np.any(rest):
        pop += ones[rest & 255]
        rest >>= 8
    return sp.diags((n_qubits - 2 * pop).astype(float), format="csr")


@dataclass(frozen=True, eq=False)
class GroundState:
    energy: float
    vector: np.ndarray
    residual: float
    matvecs: int
    degenerate: bool = False
    gap: float = float("nan")


def _lanczos_cycle(apply, v, m, dtype):
    """One Lanczos run with full reorthogonalization, started from unit vector v."""
    n = v.shape[0]
    V = np.empty((m, n), dtype=dtype)
    alpha = np.empty(m)
    beta = np.empty(m)
    V[0] = v
    k = m
    for j in range(m):
        w = apply(V[j])
        alpha[j] = np.vdot(V[j], w).real
        w = w - alpha[j] * V[j]
        if j:
            w -= beta[j - 1] * V[j - 1]
        for _ in range(2):
            w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
        beta[j] = np.linalg.norm(w)
        if j == m - 1:
            break
        if beta[j] < 1e-13 * max(1.0, abs(alpha[j])):
            k = j + 1  # invariant subspace: T is exact
            break
        V[j + 1] = w / beta[j]
    if k == 1:
        return alpha[:1], np.ones((1, 1)), V[:1], k
    theta, S = eigh_tridiagonal(alpha[:k], beta[: k - 1])
    return theta, S, V[:k], k


def lanczos_lowest(apply, dim, *, dtype=float, tol=1e-10, max_iter=20000,
                   krylov_dim=80, seed=0, v0=None):
    """Lowest eigenpair of a Hermitian operator given by ``apply(v)``.

    Explicitly restarted Lanczos: each cycle builds a fully reorthogonalized
    Krylov basis of at most ``krylov_dim`` vectors and restarts from the
    lowest Ritz vector until ||A x - theta x|| <= tol. Returns
    (theta, x, residual, matvecs, theta_next) where theta_next is the second
    Ritz value of the final cycle (NaN if unavailable).
    """
    rng = np.random.default_rng(seed)
    if v0 is None:
        v = rng.standard_normal(dim)
        if np.issubdtype(dtype, np.complexfloating):
            v = v + 1j * rng.standard_normal(dim)
    else:
        v = np.asarray(v0, dtype=dtype)
    v = v.astype(dtype) / np.linalg.norm(v)
    used = 0
    best = math.inf
    while used < max_iter:
        m = max(1, min(krylov_dim, dim, max_iter - used))
        theta, S, V, k = _lanczos_cycle(apply, v, m, dtype)
        used += k
        x = S[:, 0] @ V
        x /= np.linalg.norm(x)
        r = apply(x) - theta[0] * x
        used += 1
        res = float(np.linalg.norm(r))
        best = min(best, res)
        nxt = float(theta[1]) if len(theta) > 1 else math.nan
        if res <= tol:
            return float(theta[0]), x, res, used, nxt
        v = x
    raise ConvergenceError(f"Lanczos did not reach residual {tol:g} in {max_iter} matvecs "
                           f"(best {best:.3e})", residual=best)


def ground_state(h: SparseHamiltonian, tol: float = 1e-10, max_iter: int = 20000, *,
                 krylov_dim: int = 80, seed: int = 0, check_degeneracy: bool = True,
                 degeneracy_tol: float = 1e-8) -> GroundState:
    """Lowest eigenpair of ``h`` by restarted Lanczos.

    With ``check_degeneracy`` a second run, deflated against the ground
    state, finds the next level. If the two are within ``degeneracy_tol``
    the vector with larger weight on the all-up basis state (index 0) is
    returned and ``degenerate`` is set.
    """
    A = h.matrix
    dtype = float if h.is_real else complex
    energy, x, res, used, _ = lanczos_lowest(A.__matmul__, h.dim, dtype=dtype, tol=tol,
                                             max_iter=max_iter, krylov_dim=krylov_dim, seed=seed)
    gap, degenerate = math.nan, False
    if check_degeneracy and h.dim > 1:
        def deflated(v):
            v = v - x * np.vdot(x, v)
            w = A @ v
            return w - x * np.vdot(x, w)

        rng = np.random.default_rng(seed + 1)
        start = rng.standard_normal(h.dim).astype(dtype)
        start -= x * np.vdot(x, start)
        try:
            e1, x1, res1, used1, _ = lanczos_lowest(deflated, h.dim, dtype=dtype, tol=max(tol, 1e-8),
                                                    max_iter=max_iter, krylov_dim=krylov_dim,
                                                    v0=start)
            used += used1
            gap = e1 - energy
            if gap < degeneracy_tol:
                degenerate = True
                log.warning("ground state of %s is degenerate (gap %.2e)", h.spec, gap)
                if abs(x1[0]) > abs(x[0]):
                    x, energy, res = x1, e1, float(np.linalg.norm(A @ x1 - e1 * x1))
        except ConvergenceError:
            log.warning("could not resolve the first excited level; degeneracy unchecked")
    # fix the global phase: largest component real and positive
    k = int(np.argmax(np.abs(x)))
    x = x * (abs(x[k]) / x[k])
    if not np.iscomplexobj(A.data):
        x = x.real
    return GroundState(energy, x, res, used, degenerate, gap)


def dense_ground_energy(h: SparseHamiltonian) -> float:
    return float(np.linalg.eigvalsh(h.matrix.toarray())[0])


def rotate_env_basis(psi: np.ndarray, n_env: int, basis: str) -> np.ndarray:
    """Rewrite a (2, 2^n_env) amplitude matrix in a product basis of the environment."""
    try:
        U = ENV_BASES[basis]
    except KeyError:
        raise InvalidInputError(f"unknown environment basis {basis!r}") from None
    if basis == "z":
        return psi
    t = np.asarray(psi, dtype=complex).reshape((2,) + (2,) * n_env)
    for k in range(1, n_env + 1):
        t = np.moveaxis(np.tensordot(U, t, axes=([1], [k])), 0, k)
    return t.reshape(2, -1)


def chain_gqs(ground, spec: SpinChainSpec, env_basis: str = "z") -> DiracMixture:
    """System GQS induced by the environment's product basis (z by default)."""
    vec = np.asarray(ground.vector if isinstance(ground, GroundState) else ground)
    psi = vec.reshape(2, 2**spec.n_env)
    psi = rotate_env_basis(psi, spec.n_env, env_basis)
    return induced_gqs(BipartitePureState.normalized(psi))


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("GQSTATE_THREADS", "1")))
    except ValueError:
        return 1


@dataclass
class SizeResult:
    n_env: int
    energy: float = math.nan
    residual: float = math.nan
    degenerate: bool = False
    n_atoms: int = 0
    h0_nats: float = math.nan
    svn_nats: float = math.nan
    curve: ScalingCurve = None
    fit: DimensionFit = None
    mixture: DiracMixture = None
    error: str = None

    def as_dict(self) -> dict:
        return {
            "n_env": self.n_env,
            "energy": self.energy,
            "residual": self.residual,
            "degenerate": self.degenerate,
            "n_atoms": self.n_atoms,
            "h0_nats": self.h0_nats,
            "svn_nats": self.svn_nats,
            "dim_fit": None if self.fit is None else self.fit.as_dict(),
            "window": None if self.fit is None else list(self.fit.window),
            "curve": None if self.curve is None else {
                "neg_log_eps": self.curve.neg_log_eps.tolist(),
                "entropy_nats": self.curve.entropy.tolist(),
            },
            "error": self.error,
        }


@dataclass
class SweepReport:
    sizes: list
    settings: dict
    mean_dimension: float = math.nan
    std_dimension: float = math.nan
    pooled: DimensionFit = None
    entropy_rate: float = math.nan
    entropy_rate_stderr: float = math.nan
    entropy_rate_intercept: float = math.nan
    errors: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "schema_version": "1",
            "settings": self.settings,
            "sizes": [s.as_dict() for s in self.sizes],
            "per_size_dimension": {"mean": self.mean_dimension, "std": self.std_dimension},
            "pooled_fit": None if self.pooled is None else self.pooled.as_dict(),
            "entropy_rate": {
                "h_nats": self.entropy_rate,
                "stderr": self.entropy_rate_stderr,
                "intercept": self.entropy_rate_intercept,
            },
            "errors": self.errors,
        }


def _run_size(n_env, b_field, coupling, scales, window, env_basis, tol, seed) -> SizeResult:
    out = SizeResult(n_env)
    try:
        spec = SpinChainSpec(n_env, b_field, coupling)
        gs = ground_state(build_hamiltonian(spec), tol=tol, seed=seed)
        out.energy, out.residual, out.degenerate = gs.energy, gs.residual, gs.degenerate
        mix = chain_gqs(gs, spec, env_basis)
        out.mixture = mix
        out.n_atoms = len(mix)
        out.h0_nats = dimensional_entropy_h0(mix)
        out.svn_nats = von_neumann_entropy(reduced_density_matrix(mix))
        curve = scaling_curve(mix, scales)
        win = auto_fit_window(curve) if window == "auto" else tuple(window)
        out.curve = curve.with_window(win)
        out.fit = fit_dimension(out.curve)
    except GQStateError as exc:
        out.error = f"{type(exc).__name__}: {exc}"
        log.warning("N_E=%d: %s", n_env, out.error)
    return out


def thermodynamic_sweep(n_env_range, *, b_field=(0.0, 0.0, 0.5), coupling: float = 1.0,
                        scales=DEFAULT_SCALES, window="auto", env_basis: str = "z",
                        tol: float = 1e-10, seed: int = 0, workers: int = None) -> SweepReport:
    """Ground state, GQS, dimension fit and H_0 for every environment size.

    Per-size slopes are averaged; the curves are also pooled through
    :func:`aggregate_fit`; the entropy rate is the OLS slope of H_0 against
    N_E. A failing size is recorded and skipped.
    """
    sizes = sorted(set(int(n) for n in n_env_range))
    if not sizes:
        raise InvalidInputError("empty environment-size range")
    settings = {
        "n_env": sizes, "b_field": list(map(float, b_field)), "coupling": coupling,
        "scales": [int(s) for s in scales], "window": window if window == "auto" else list(window),
        "env_basis": env_basis, "tol": tol, "seed": seed,
    }
    args = (b_field, coupling, scales, window, env_basis, tol, seed)
    with ThreadPoolExecutor(max_workers=workers or _workers()) as pool:
        results = list(pool.map(lambda n: _run_size(n, *args), sizes))
    report = SweepReport(results, settings)
    report.errors = [f"N_E={r.n_env}: {r.error}" for r in results if r.error]
    fitted = [r for r in results if r.fit is not None]
    if fitted:
        dims = np.array([r.fit.dimension for r in fitted])
        report.mean_dimension = float(dims.mean())
        report.std_dimension = float(dims.std(ddof=1)) if len(dims) > 1 else math.nan
    if len(fitted) >= 2:
        try:
            report.pooled = aggregate_fit([r.curve for r in fitted])
        except GQStateError as exc:
            report.errors.append(f"pooled fit: {exc}")
    solved = [r for r in results if not math.isnan(r.h0_nats)]
    if len(solved) >= 2:
        x = np.array([r.n_env for r in solved], dtype=float)
        y = np.array([r.h0_nats for r in solved])
        A = np.column_stack([x, np.ones_like(x)])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        report.entropy_rate, report.entropy_rate_intercept = float(coef[0]), float(coef[1])
        if len(x) > 2:
            resid = y - A @ coef
            s2 = float(resid @ resid) / (len(x) - 2)
            report.entropy_rate_stderr = math.sqrt(s2 / float(np.sum((x - x.mean()) ** 2)))
    return report


def save_atoms_csv(mixture: DiracMixture, path) -> None:
    if mixture.dim != 2:
        raise InvalidInputError("atom CSV holds qubit mixtures only")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["weight", "p", "phi"])
        for wt, p, f in zip(mixture.weights, mixture.probs[:, 1], mixture.phases[:, 0]):
            w.writerow([repr(float(wt)), repr(float(p)), repr(float(f))])


def save_sweep_json(report: SweepReport, path) -> None:
    with open(path, "w") as fh:
        json.dump(report.as_dict(), fh, indent=1)
