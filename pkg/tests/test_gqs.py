import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gqstate.errors import InvalidStateError, UnsupportedIntegrationError
from gqstate.estimator import shannon_entropy
from gqstate.gqs import (
    DensityGQS,
    DiracMixture,
    EmpiricalSample,
    coarse_grain,
    load_sample_csv,
    load_state_json,
    reduced_density_matrix,
    save_sample_csv,
    save_state_json,
    uniform_density,
    von_neumann_entropy,
)
from gqstate.gaussian_box import BoxGaussianParams, gaussian_density
from gqstate.state_space import BlochPoint, Partition


def test_single_atom_lands_in_one_cell():
    mix = DiracMixture.from_atoms([(1.0, BlochPoint(0.5, math.pi).to_projective())])
    hist = coarse_grain(mix, Partition(2, 10))
    assert hist.entries == {(5, 5): 1.0}


def test_uniform_density_fills_every_cell_equally():
    hist = coarse_grain(uniform_density(), Partition(2, 4))
    assert len(hist.entries) == 16
    assert np.allclose(list(hist.entries.values()), 1 / 16, atol=1e-15)


def test_empirical_counts():
    sample = EmpiricalSample.from_bloch([0.05, 0.06, 0.07, 0.95], [0.1, 0.1, 0.1, 3.0])
    hist = coarse_grain(sample, Partition(2, 10))
    assert sorted(hist.entries.values()) == [0.25, 0.75]


def test_density_without_sampler_in_higher_dim():
    state = DensityGQS(lambda probs, phases: np.ones(len(probs)), dim=3)
    with pytest.raises(UnsupportedIntegrationError):
        coarse_grain(state, Partition(3, 4))


def test_sampled_coarse_graining_matches_quadrature():
    state = gaussian_density(BoxGaussianParams())
    part = Partition(2, 8)
    h_quad = shannon_entropy(coarse_grain(state, part))
    h_mc = shannon_entropy(coarse_grain(state, part, method="sample", n_samples=200_000, seed=3))
    assert abs(h_quad - h_mc) < 0.01


def test_tiny_weights_are_dropped():
    mix = DiracMixture([1.0, 1e-17], [[1, 0], [0, 1]], [[0], [0]])
    assert len(mix) == 1


def test_weights_must_sum_to_one():
    with pytest.raises(InvalidStateError):
        DiracMixture([0.5, 0.4], [[1, 0], [0, 1]], [[0], [0]])


@pytest.mark.parametrize(
    "weights, kets, expected",
    [
        ([1.0], [[1, 0]], np.diag([1.0, 0.0])),
        ([0.5, 0.5], [[1, 0], [0, 1]], np.diag([0.5, 0.5])),
        ([0.5, 0.5], np.array([[1, 1], [1, -1]]) / math.sqrt(2), np.diag([0.5, 0.5])),
    ],
)
def test_reduced_density_matrix_examples(weights, kets, expected):
    rho = reduced_density_matrix(DiracMixture.from_kets(weights, kets))
    assert np.allclose(rho, expected, atol=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_reduced_density_matrix_ignores_order_and_gauge(seed):
    rng = np.random.default_rng(seed)
    kets = rng.normal(size=(5, 3)) + 1j * rng.normal(size=(5, 3))
    w = rng.random(5)
    w /= w.sum()
    rho = reduced_density_matrix(DiracMixture.from_kets(w, kets))
    perm = rng.permutation(5)
    gauge = np.exp(1j * rng.uniform(0, 2 * np.pi, 5))[:, None]
    rho2 = reduced_density_matrix(DiracMixture.from_kets(w[perm], (kets * gauge)[perm]))
    assert np.allclose(rho, rho2, atol=1e-12)
    assert abs(np.trace(rho).real - 1) < 1e-10
    assert np.linalg.eigvalsh(rho).min() > -1e-12


@pytest.mark.parametrize(
    "rho, expected",
    [(np.diag([1.0, 0.0]), 0.0), (np.diag([0.5, 0.5]), math.log(2)), (np.diag([0.9, 0.1]), 0.3251)],
)
def test_von_neumann_examples(rho, expected):
    assert von_neumann_entropy(rho) == pytest.approx(expected, abs=1e-4)


def test_von_neumann_rejects_negative_spectrum():
    with pytest.raises(InvalidStateError):
        von_neumann_entropy(np.diag([1.2, -0.2]))


@given(st.integers(0, 2**32 - 1), st.integers(1, 6))
def test_dirac_entropy_saturates(seed, m):
    rng = np.random.default_rng(seed)
    w = rng.random(m) + 0.05
    w /= w.sum()
    # atoms on distinct cells of the L=64 grid
    cells = rng.choice(64 * 64, size=m, replace=False)
    p = (cells // 64 + 0.5) / 64
    phi = 2 * np.pi * (cells % 64 + 0.5) / 64
    mix = DiracMixture(w, np.column_stack([1 - p, p]), phi[:, None])
    target = -math.fsum(w * np.log(w))
    for L in (64, 128, 1024):
        assert shannon_entropy(coarse_grain(mix, Partition(2, L))) == pytest.approx(target, abs=1e-12)


@given(st.integers(0, 2**32 - 1))
def test_histograms_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    sample = uniform_density().sample(500, rng)
    for L in (1, 3, 17):
        assert abs(coarse_grain(sample, Partition(2, L)).probs.sum() - 1) < 1e-9


def test_json_round_trips(tmp_path):
    mix = DiracMixture.from_kets([0.3, 0.7], [[1, 1j], [0.2, 1]])
    save_state_json(mix, tmp_path / "mix.json")
    back = load_state_json(tmp_path / "mix.json")
    assert np.array_equal(back.weights, mix.weights)
    assert np.array_equal(back.phases, mix.phases)

    sample = EmpiricalSample.from_bloch([0.1, 0.2], [0.3, 0.4])
    save_state_json(sample, tmp_path / "s.json")
    assert np.array_equal(load_state_json(tmp_path / "s.json").p, sample.p)

    dens = gaussian_density(BoxGaussianParams(0.4, 0.2, 2.0, 0.7))
    save_state_json(dens, tmp_path / "d.json")
    back = load_state_json(tmp_path / "d.json")
    assert back(0.3, 1.0) == dens(0.3, 1.0)


def test_csv_round_trip_is_exact(tmp_path, rng):
    sample = uniform_density().sample(100, rng)
    save_sample_csv(sample, tmp_path / "s.csv")
    back = load_sample_csv(tmp_path / "s.csv")
    assert np.array_equal(back.p, sample.p)
    assert np.array_equal(back.phi, sample.phi)
