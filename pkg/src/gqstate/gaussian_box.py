"""Truncated-Gaussian geometric quantum state of an electron spin in a 2D box.

The box coordinates map linearly onto the Bloch square, x -> p and
y -> phi, so a Gaussian wavepacket |f(x, y)|^2 becomes the product density

    q(p, phi) = 2 pi * g_p(p) / N_p * g_phi(phi) / N_phi

on [0,1] x [0,2pi) with respect to d nu_FS = dp dphi / 2 pi, where g are
unnormalized Gaussians and N their integrals over the window.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import integrate, special, stats

from .errors import InvalidInputError
from .gqs import DensityGQS, register_density_family
from .state_space import TWO_PI

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class BoxGaussianParams:
    mu_p: float = 0.5
    sigma_p: float = 0.15
    mu_phi: float = math.pi
    sigma_phi: float = 1.0

    def __post_init__(self):
        if not (self.sigma_p > 0 and self.sigma_phi > 0):
            raise InvalidInputError("Gaussian widths must be positive")

    @property
    def p_window(self) -> tuple:
        """Standardized truncation bounds (a, b) along p."""
        return (-self.mu_p / self.sigma_p, (1.0 - self.mu_p) / self.sigma_p)

    @property
    def phi_window(self) -> tuple:
        return (-self.mu_phi / self.sigma_phi, (TWO_PI - self.mu_phi) / self.sigma_phi)


def params_from_box(mu_x, sigma_x, x0, x1, mu_y, sigma_y, y0, y1) -> BoxGaussianParams:
    """Rescale box-frame Gaussian parameters to Bloch-square units."""
    if not (x1 > x0 and y1 > y0):
        raise InvalidInputError(f"degenerate box [{x0},{x1}] x [{y0},{y1}]")
    if not (sigma_x > 0 and sigma_y > 0):
        raise InvalidInputError("Gaussian widths must be positive")
    wx, wy = x1 - x0, y1 - y0
    return BoxGaussianParams(
        mu_p=(mu_x - x0) / wx,
        sigma_p=sigma_x / wx,
        mu_phi=TWO_PI * (mu_y - y0) / wy,
        sigma_phi=TWO_PI * sigma_y / wy,
    )


def _mass(a, b):
    # Phi(b) - Phi(a), computed on the side of the tail that keeps precision
    if a > 0:
        return 0.5 * (special.erfc(a / _SQRT2) - special.erfc(b / _SQRT2))
    if b < 0:
        return 0.5 * (special.erfc(-b / _SQRT2) - special.erfc(-a / _SQRT2))
    return 0.5 * (special.erf(b / _SQRT2) - special.erf(a / _SQRT2))


def _normalizer(sigma, a, b):
    """Integral of exp(-z^2/2) over the window, in the original units."""
    return sigma * math.sqrt(TWO_PI) * _mass(a, b)


def _second_moment(a, b):
    """E[z^2] for a standard normal truncated to [a, b]."""
    pdf = stats.norm.pdf
    return 1.0 - (b * pdf(b) - a * pdf(a)) / _mass(a, b)


def normalizers(params: BoxGaussianParams) -> tuple:
    """(N_p, N_phi)."""
    return (_normalizer(params.sigma_p, *params.p_window),
            _normalizer(params.sigma_phi, *params.phi_window))


def _marginals(params: BoxGaussianParams):
    n_p, n_phi = normalizers(params)

    def f_p(p):
        p = np.asarray(p, dtype=float)
        return np.exp(-0.5 * ((p - params.mu_p) / params.sigma_p) ** 2) / n_p

    def f_phi(phi):
        phi = np.asarray(phi, dtype=float)
        return TWO_PI * np.exp(-0.5 * ((phi - params.mu_phi) / params.sigma_phi) ** 2) / n_phi

    return f_p, f_phi


def gaussian_density(params: BoxGaussianParams) -> DensityGQS:
    """The truncated-Gaussian GQS with an exact per-axis truncated-normal sampler."""
    f_p, f_phi = _marginals(params)
    tn_p = stats.truncnorm(*params.p_window, loc=params.mu_p, scale=params.sigma_p)
    tn_phi = stats.truncnorm(*params.phi_window, loc=params.mu_phi, scale=params.sigma_phi)

    def q(p, phi):
        return f_p(p) * f_phi(phi)

    def sampler(rng, n):
        p = tn_p.rvs(size=n, random_state=rng)
        phi = tn_phi.rvs(size=n, random_state=rng)
        phi = np.where(phi >= TWO_PI, 0.0, phi)
        return np.column_stack([1.0 - p, p]), phi[:, None]

    return DensityGQS(q, 2, sampler, marginals=(f_p, f_phi),
                      family="gaussian_box", params=asdict(params))


register_density_family("gaussian_box")(lambda **kw: gaussian_density(BoxGaussianParams(**kw)))


def closed_form_h2(params: BoxGaussianParams) -> float:
    """-integral q ln q d nu_FS, with the truncated second moments kept exact.

    Reduces to ln N_p + ln N_phi + ln(e / 2 pi) when truncation is negligible.
    """
    n_p, n_phi = normalizers(params)
    m_p = _second_moment(*params.p_window)
    m_phi = _second_moment(*params.phi_window)
    return math.log(n_p) + math.log(n_phi) + 0.5 * m_p + 0.5 * m_phi - math.log(TWO_PI)


def untruncated_h2(params: BoxGaussianParams) -> float:
    """ln N_p + ln N_phi + ln(e / 2 pi), ignoring truncation of the second moments."""
    n_p, n_phi = normalizers(params)
    return math.log(n_p) + math.log(n_phi) + 1.0 - math.log(TWO_PI)


def _axis_expect(fn, f, lo, hi, center, width):
    # split at the peak so quad sees a narrow Gaussian
    pts = [x for x in (center - 3 * width, center, center + 3 * width) if lo < x < hi]
    val, _ = integrate.quad(lambda x: fn(x) * f(x), lo, hi, points=pts or None,
                            epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def density_matrix(params: BoxGaussianParams) -> np.ndarray:
    """rho = integral q |p,phi><p,phi| d nu_FS, by 1-D quadrature per axis."""
    f_p, f_phi = _marginals(params)
    g = lambda phi: f_phi(phi) / TWO_PI  # noqa: E731  (density of phi alone)
    e_p = _axis_expect(lambda x: x, f_p, 0.0, 1.0, params.mu_p, params.sigma_p)
    e_root = _axis_expect(lambda x: math.sqrt(max(x * (1 - x), 0.0)), f_p, 0.0, 1.0,
                          params.mu_p, params.sigma_p)
    e_cos = _axis_expect(math.cos, g, 0.0, TWO_PI, params.mu_phi, params.sigma_phi)
    e_sin = _axis_expect(math.sin, g, 0.0, TWO_PI, params.mu_phi, params.sigma_phi)
    off = e_root * complex(e_cos, e_sin)  # <1|rho|0>
    return np.array([[1.0 - e_p, off.conjugate()], [off, e_p]])


def expectation(observable, params: BoxGaussianParams) -> float:
    """<O> = integral q(p,phi) <p,phi|O|p,phi> d nu_FS for a Hermitian 2x2 O."""
    o = np.asarray(observable, dtype=complex)
    if o.shape != (2, 2):
        raise InvalidInputError("observable must be 2x2")
    if np.max(np.abs(o - o.conj().T)) > 1e-12:
        raise InvalidInputError("observable is not Hermitian")
    return float(np.trace(o @ density_matrix(params)).real)


def density_grid(params: BoxGaussianParams, n_p: int = 64, n_phi: int = 64) -> tuple:
    """Density sampled at cell midpoints, for plotting: (p, phi, q) 1-D arrays."""
    p = (np.arange(n_p) + 0.5) / n_p
    phi = TWO_PI * (np.arange(n_phi) + 0.5) / n_phi
    pp, ff = np.meshgrid(p, phi, indexing="ij")
    q = gaussian_density(params)(pp, ff)
    return pp.ravel(), ff.ravel(), q.ravel()
