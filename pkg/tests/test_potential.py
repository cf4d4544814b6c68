"""
Potentials G and L: formula paths, gradients against finite differences, convexity and residual fields.
"""

import numpy as np
import pandas as pd
import pytest

import potential
from ball_geometry import geodesic as real_geodesic
from ball_geometry import sample_ball_points
from bergman_geometry import from_real, sample_complex_ball_points, to_real
from bergman_geometry import geodesic as complex_geodesic
from exceptions import DimensionMismatchError, ValidationError
from potential import (
    WeightedMeasure,
    finite_difference_gradient,
    grad_conformal,
    grad_holomorphic,
    potential_conformal,
    potential_conformal_log_cosh,
    potential_grid,
    potential_holomorphic,
    potential_holomorphic_log_cosh,
    potential_value,
    residual_conformal,
    residual_holomorphic,
)
from solver import three_point_reference

CASES = 100


def _random_measure(rng, model, dim, max_norm=0.7):
    size = int(rng.integers(1, 6))
    weights = rng.uniform(0.2, 2.0, size)
    if model == "poincare":
        return WeightedMeasure(sample_ball_points(rng, size, dim, max_norm), weights)
    return WeightedMeasure(sample_complex_ball_points(rng, size, dim, max_norm), weights, "bergman")


def _random_point(rng, model, dim, max_norm=0.7):
    if model == "poincare":
        return sample_ball_points(rng, 1, dim, max_norm)[0]
    return sample_complex_ball_points(rng, 1, dim, max_norm)[0]


# --- WeightedMeasure ---

def test_measure_validation():
    with pytest.raises(ValidationError):
        WeightedMeasure(np.zeros((0, 2)))
    with pytest.raises(ValidationError):
        WeightedMeasure([[0.0], [0.5]])
    with pytest.raises(ValidationError):
        WeightedMeasure([[0.0, 1.0]])
    with pytest.raises(ValidationError):
        WeightedMeasure([[0.0, 0.5]], [0.0])
    with pytest.raises(ValidationError):
        WeightedMeasure([[0.0, 0.5]], [np.inf])
    with pytest.raises(DimensionMismatchError):
        WeightedMeasure([[0.0, 0.5]], [1.0, 2.0])
    with pytest.raises(ValidationError):
        WeightedMeasure([[0.0, 0.5]], model="klein")


def test_measure_properties():
    mu = WeightedMeasure.counting([[0.5j, 0.1], [0.0, 0.2j]], "bergman")
    assert mu.size == 2
    assert mu.dim == 2
    assert mu.real_dim == 4
    assert mu.total_mass == 2.0
    assert np.iscomplexobj(mu.points)


def test_model_mismatch_is_rejected():
    real = WeightedMeasure.counting([[0.1, 0.2]])
    with pytest.raises(DimensionMismatchError):
        potential_holomorphic(np.array([0.1j]), real)
    with pytest.raises(DimensionMismatchError):
        potential_conformal([0.1, 0.2, 0.3], real)


# --- Closed values ---

def test_potential_vanishes_at_a_single_atom(rng):
    y = sample_ball_points(rng, 1, 3)
    assert potential_conformal(y[0], WeightedMeasure.counting(y)) == pytest.approx(0.0, abs=1e-14)
    w = sample_complex_ball_points(rng, 1, 2)
    assert potential_holomorphic(w[0], WeightedMeasure.counting(w, "bergman")) == pytest.approx(0.0, abs=1e-14)


def test_symmetric_pair_at_origin():
    r = 0.6
    mu = WeightedMeasure.counting([[r, 0.0, 0.0], [-r, 0.0, 0.0]])
    assert potential_conformal(np.zeros(3), mu) == pytest.approx(-2.0 * np.log(1.0 - r * r), rel=1e-14)
    assert np.allclose(grad_conformal(np.zeros(3), mu), 0.0, atol=1e-15)
    assert np.allclose(residual_conformal(np.zeros(3), mu), 0.0, atol=1e-15)
    complex_mu = WeightedMeasure.counting([[0.3j, 0.2], [-0.3j, -0.2]], "bergman")
    assert np.allclose(grad_holomorphic(np.zeros(2), complex_mu), 0.0, atol=1e-15)
    assert np.allclose(residual_holomorphic(np.zeros(2), complex_mu), 0.0, atol=1e-15)


def test_residual_vanishes_at_a_single_atom(rng):
    y = sample_ball_points(rng, 1, 4)
    assert np.allclose(residual_conformal(y[0], WeightedMeasure.counting(y)), 0.0, atol=1e-15)
    w = sample_complex_ball_points(rng, 1, 2)
    assert np.allclose(residual_holomorphic(w[0], WeightedMeasure.counting(w, "bergman")), 0.0, atol=1e-15)


def test_three_point_stationary_point(three_points):
    a = three_point_reference()
    planar = WeightedMeasure.counting(np.column_stack([three_points.real, three_points.imag]))
    complex_mu = WeightedMeasure.counting(three_points[:, None], "bergman")
    assert np.linalg.norm(residual_conformal([a.real, a.imag], planar)) <= 1e-5
    assert np.linalg.norm(residual_holomorphic([a], complex_mu)) <= 1e-5
    assert np.linalg.norm(grad_holomorphic([a], complex_mu)) <= 1e-5
    assert np.linalg.norm(grad_conformal([a.real, a.imag], planar)) <= 1e-5


def test_two_point_gradient_vanishes_at_the_closed_form():
    from solver import two_point_closed_form

    z1, z2 = 0.3 + 0.1j, -0.2 + 0.5j
    z_hat = two_point_closed_form(z1, z2)
    mu = WeightedMeasure.counting([[z1.real, z1.imag], [z2.real, z2.imag]])
    assert np.linalg.norm(grad_conformal([z_hat.real, z_hat.imag], mu)) <= 1e-9


# --- Two formula paths ---

@pytest.mark.parametrize("dim", [2, 3, 4])
def test_conformal_log_cosh_form(rng, dim):
    for _ in range(CASES):
        mu, x = _random_measure(rng, "poincare", dim), _random_point(rng, "poincare", dim)
        assert potential_conformal(x, mu) == pytest.approx(potential_conformal_log_cosh(x, mu), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("m", [1, 2])
def test_holomorphic_log_cosh_form(rng, m):
    for _ in range(CASES):
        mu, z = _random_measure(rng, "bergman", m), _random_point(rng, "bergman", m)
        assert potential_holomorphic(z, mu) == pytest.approx(potential_holomorphic_log_cosh(z, mu), rel=1e-10, abs=1e-12)


def test_planar_potentials_coincide(rng):
    for _ in range(CASES):
        mu = _random_measure(rng, "poincare", 2)
        x = _random_point(rng, "poincare", 2)
        complex_mu = WeightedMeasure(from_real(mu.points), mu.weights, "bergman")
        assert potential_conformal(x, mu) == pytest.approx(potential_holomorphic(from_real(x), complex_mu), rel=1e-12, abs=1e-13)
        assert np.allclose(grad_conformal(x, mu), grad_holomorphic(from_real(x), complex_mu), rtol=1e-12, atol=1e-13)


# --- Gradients ---

def _relative_error(analytic, numeric):
    return np.linalg.norm(analytic - numeric) / max(np.linalg.norm(analytic), 1.0)


@pytest.mark.parametrize("dim", [2, 3, 4])
def test_conformal_gradient_matches_finite_differences(rng, dim):
    for _ in range(CASES):
        mu, x = _random_measure(rng, "poincare", dim), _random_point(rng, "poincare", dim)
        numeric = finite_difference_gradient(lambda v: potential_conformal(v, mu), x)
        assert _relative_error(grad_conformal(x, mu), numeric) <= 1e-6


@pytest.mark.parametrize("m", [1, 2])
def test_holomorphic_gradient_matches_finite_differences(rng, m):
    for _ in range(CASES):
        mu, z = _random_measure(rng, "bergman", m), _random_point(rng, "bergman", m)
        numeric = finite_difference_gradient(lambda v: potential_holomorphic(from_real(v), mu), to_real(z))
        assert _relative_error(grad_holomorphic(z, mu), numeric) <= 1e-6


def test_gradient_and_residual_have_matching_zeros(rng):
    # G(h_c(u)) is the potential of the moved atoms, whose gradient at u = 0 is -2 * residual
    for _ in range(CASES):
        mu, c = _random_measure(rng, "poincare", 3), _random_point(rng, "poincare", 3)
        scale = 2.0 / (1.0 - c @ c)
        assert np.linalg.norm(grad_conformal(c, mu)) == pytest.approx(scale * np.linalg.norm(residual_conformal(c, mu)), rel=1e-9)
        disk_mu, z = _random_measure(rng, "bergman", 1), _random_point(rng, "bergman", 1)
        scale = 2.0 / (1.0 - abs(z[0]) ** 2)
        assert np.linalg.norm(grad_holomorphic(z, disk_mu)) == pytest.approx(scale * np.linalg.norm(residual_holomorphic(z, disk_mu)), rel=1e-9)
        ball_mu, z = _random_measure(rng, "bergman", 2), _random_point(rng, "bergman", 2)
        bound = 2.0 / (1.0 - np.vdot(z, z).real) * np.linalg.norm(residual_holomorphic(z, ball_mu))
        assert np.linalg.norm(grad_holomorphic(z, ball_mu)) <= bound * (1.0 + 1e-9)


def test_potential_value_bundles_value_and_gradient(rng):
    mu, x = _random_measure(rng, "poincare", 3), _random_point(rng, "poincare", 3)
    value = potential_value(x, mu)
    assert value.value == potential_conformal(x, mu)
    assert np.array_equal(value.gradient, grad_conformal(x, mu))
    complex_mu, z = _random_measure(rng, "bergman", 2), _random_point(rng, "bergman", 2)
    assert potential_value(z, complex_mu).gradient.shape == (4,)


# --- Convexity and growth ---

def test_potentials_are_midpoint_convex_along_geodesics(rng):
    for _ in range(1000):
        mu = _random_measure(rng, "poincare", 3, 0.9)
        a, b = sample_ball_points(rng, 2, 3, 0.9)
        ends = potential_conformal(np.array([a, b]), mu)
        middle = potential_conformal(real_geodesic(a, b, 0.5), mu)
        assert middle <= 0.5 * ends.sum() + 1e-9 * (1.0 + abs(ends).max())

        complex_mu = _random_measure(rng, "bergman", 2, 0.9)
        p, q = sample_complex_ball_points(rng, 2, 2, 0.9)
        ends = potential_holomorphic(np.array([p, q]), complex_mu)
        middle = potential_holomorphic(complex_geodesic(p, q, 0.5), complex_mu)
        assert middle <= 0.5 * ends.sum() + 1e-9 * (1.0 + abs(ends).max())


def test_potential_grows_toward_the_boundary():
    mu = WeightedMeasure.counting([[0.3, 0.1], [-0.3, -0.1], [0.0, 0.4], [0.0, -0.4]])
    radii = np.linspace(0.0, 0.999, 200)
    for angle in np.linspace(0.0, 2.0 * np.pi, 12, endpoint=False):
        ray = radii[:, None] * [np.cos(angle), np.sin(angle)]
        assert np.all(np.diff(potential_conformal(ray, mu)) > 0.0)


# --- Batches and blocks ---

def test_batched_evaluation_matches_pointwise(rng):
    mu = _random_measure(rng, "bergman", 2)
    z = sample_complex_ball_points(rng, 7, 2)
    batch = potential_holomorphic(z, mu)
    assert batch.shape == (7,)
    assert np.allclose(batch, [potential_holomorphic(p, mu) for p in z], rtol=1e-14)
    assert grad_holomorphic(z, mu).shape == (7, 4)
    assert residual_holomorphic(z, mu).shape == (7, 2)


def test_block_size_does_not_change_sums(rng, monkeypatch):
    mu = WeightedMeasure(sample_ball_points(rng, 1000, 3), rng.uniform(0.5, 1.5, 1000))
    x = sample_ball_points(rng, 5, 3)
    whole = residual_conformal(x, mu)
    monkeypatch.setattr(potential, "BLOCK_ELEMENTS", 64)
    assert np.allclose(residual_conformal(x, mu), whole, rtol=1e-12, atol=1e-12)


def test_single_point_returns_float(rng):
    mu = _random_measure(rng, "poincare", 2)
    assert isinstance(potential_conformal([0.1, 0.2], mu), float)


# --- Grid ---

def test_grid_single_atom_center_cell():
    grid = potential_grid(WeightedMeasure.counting([[0.0, 0.0]]), (-0.5, 0.5, -0.5, 0.5), 3)
    assert isinstance(grid, pd.DataFrame)
    assert list(grid.columns) == ["x", "y", "potential"]
    assert len(grid) == 9
    center = grid[(grid.x == 0.0) & (grid.y == 0.0)]
    assert center.potential.iloc[0] == pytest.approx(0.0, abs=1e-15)


def test_grid_drops_points_outside_the_disk():
    grid = potential_grid(WeightedMeasure.counting([[0.1, 0.0]]), resolution=41)
    assert np.all(np.hypot(grid.x, grid.y) < 1.0 - 1e-6)
    assert np.all(np.isfinite(grid.potential))


def test_grid_minimum_is_near_the_barycenter(three_points):
    a = three_point_reference()
    mu = WeightedMeasure.counting(three_points[:, None], "bergman")
    grid = potential_grid(mu, resolution=101)
    best = grid.loc[grid.potential.idxmin()]
    cell = 2.0 / 100
    assert abs(best.x - a.real) <= cell
    assert abs(best.y - a.imag) <= cell


def test_grid_needs_a_planar_model():
    with pytest.raises(ValidationError):
        potential_grid(WeightedMeasure.counting([[0.1, 0.0, 0.0]]))
    with pytest.raises(ValidationError):
        potential_grid(WeightedMeasure.counting([[0.1j, 0.0]], "bergman"))
