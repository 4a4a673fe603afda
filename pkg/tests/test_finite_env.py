import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import unitary_group

from gqstate.errors import InvalidInputError
from gqstate.estimator import fit_dimension, scaling_curve
from gqstate.finite_env import (
    BipartitePureState,
    dimensional_entropy_h0,
    induced_gqs,
    load_bipartite_state,
    random_bipartite_state,
    rotate_environment,
    rotate_system,
    save_bipartite_state,
    schmidt_basis_state,
)
from gqstate.gqs import reduced_density_matrix, von_neumann_entropy

seeds = st.integers(0, 2**32 - 1)


def test_bell_state():
    mix = induced_gqs(BipartitePureState(np.eye(2) / math.sqrt(2)))
    assert np.allclose(mix.weights, [0.5, 0.5])
    assert np.allclose(mix.probs, [[1, 0], [0, 1]])
    assert dimensional_entropy_h0(mix) == pytest.approx(math.log(2))


def test_product_state_gives_one_atom():
    plus = np.array([1, 1]) / math.sqrt(2)
    mix = induced_gqs(BipartitePureState(np.outer(plus, [1, 0, 0])))
    assert len(mix) == 1
    assert np.allclose(mix.probs[0], [0.5, 0.5])
    assert mix.phases[0, 0] == pytest.approx(0.0)
    assert dimensional_entropy_h0(mix) == 0.0


def test_random_two_by_four():
    state = random_bipartite_state(2, 4, 11)
    mix = induced_gqs(state)
    assert len(mix) == 4
    assert np.allclose(reduced_density_matrix(mix), state.system_density_matrix(), atol=1e-10)
    col = np.sum(np.abs(state.amplitudes) ** 2, axis=0)
    assert dimensional_entropy_h0(mix) == pytest.approx(-np.sum(col * np.log(col)), abs=1e-14)
    s = von_neumann_entropy(state.system_density_matrix())
    assert s - 1e-9 <= dimensional_entropy_h0(mix) <= math.log(4) + 1e-9


def test_zero_state_rejected():
    with pytest.raises(InvalidInputError):
        BipartitePureState(np.zeros((2, 2)))


@given(seeds, st.integers(2, 3), st.integers(2, 8))
def test_partial_trace_consistency(seed, d_s, d_e):
    state = random_bipartite_state(d_s, d_e, seed)
    rho = reduced_density_matrix(induced_gqs(state))
    assert np.max(np.abs(rho - state.system_density_matrix())) < 1e-10


@given(seeds, st.integers(2, 8))
def test_h0_bounds(seed, d_e):
    state = random_bipartite_state(2, d_e, seed)
    h0 = dimensional_entropy_h0(induced_gqs(state))
    s = von_neumann_entropy(state.system_density_matrix())
    assert s - 1e-9 <= h0 <= math.log(d_e) + 1e-9


@given(seeds, st.integers(2, 8))
def test_system_unitary_keeps_weights(seed, d_e):
    state = random_bipartite_state(2, d_e, seed)
    u = unitary_group.rvs(2, random_state=seed)
    a, b = induced_gqs(state), induced_gqs(rotate_system(state, u))
    assert abs(dimensional_entropy_h0(a) - dimensional_entropy_h0(b)) < 1e-12
    assert np.allclose(reduced_density_matrix(b), u @ reduced_density_matrix(a) @ u.conj().T, atol=1e-12)


@given(seeds, st.integers(2, 6))
def test_schmidt_basis_minimizes_h0(seed, d_e):
    state = random_bipartite_state(2, d_e, seed)
    s = von_neumann_entropy(state.system_density_matrix())
    h_schmidt = dimensional_entropy_h0(induced_gqs(schmidt_basis_state(state)))
    assert h_schmidt == pytest.approx(s, abs=1e-9)
    rotated = rotate_environment(state, unitary_group.rvs(d_e, random_state=seed))
    assert dimensional_entropy_h0(induced_gqs(rotated)) >= h_schmidt - 1e-9


@given(seeds, st.integers(2, 8))
def test_finite_environment_has_dimension_zero(seed, d_e):
    mix = induced_gqs(random_bipartite_state(2, d_e, seed))
    curve = scaling_curve(mix, [2**k for k in range(1, 21)])
    # past saturation the curve is flat at H0
    tail = fit_dimension(curve, window=(len(curve) - 5, len(curve)))
    assert abs(tail.dimension) < 1e-6
    assert tail.dimensional_entropy == pytest.approx(dimensional_entropy_h0(mix), abs=1e-9)


def test_file_round_trips(tmp_path):
    state = random_bipartite_state(2, 3, 4)
    save_bipartite_state(state, tmp_path / "s.json")
    assert np.array_equal(load_bipartite_state(tmp_path / "s.json").amplitudes, state.amplitudes)
    psi = state.amplitudes
    rows = [",".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) for row in psi]
    (tmp_path / "s.csv").write_text("re0,im0,re1,im1,re2,im2\n" + "\n".join(rows) + "\n")
    assert np.array_equal(load_bipartite_state(tmp_path / "s.csv").amplitudes, psi)
