"""
Complex ball primitives: projections, p_a, d_B, automorphisms and the coincidence with the disk.
"""

import numpy as np
import pytest

from ball_geometry import mobius_map, poincare_distance, sample_ball_points
from bergman_geometry import (
    ComplexAutomorphism,
    ComplexPoint,
    apply_automorphism,
    apply_inverse_automorphism,
    bergman_automorphism,
    bergman_distance,
    bergman_jacobian,
    disk_automorphism,
    from_real,
    geodesic,
    inner,
    project_parallel,
    random_automorphism,
    sample_complex_ball_points,
    to_real,
)
from exceptions import DimensionMismatchError, ValidationError

SAMPLES = 10_000


def _pairs(rng, m, count=SAMPLES, max_norm=0.9):
    return sample_complex_ball_points(rng, count, m, max_norm), sample_complex_ball_points(rng, count, m, max_norm)


def _norm_sq(z):
    return np.real(inner(z, z))


def test_complex_point_validation():
    ComplexPoint([0.5j, 0.5])
    with pytest.raises(ValidationError):
        ComplexPoint([0.8j, 0.6])
    with pytest.raises(ValidationError):
        ComplexPoint([])


def test_complex_automorphism_validates_unitary_part():
    ComplexAutomorphism([0.1j], [[1j]])
    with pytest.raises(ValidationError):
        ComplexAutomorphism([0.1j], [[2.0]])
    with pytest.raises(DimensionMismatchError):
        ComplexAutomorphism([0.1j, 0.2], np.eye(3))


def test_inner_product_is_linear_in_the_first_slot():
    z, w = np.array([1j, 2.0]), np.array([1.0, 1j])
    assert inner(z, w) == pytest.approx(1j - 2j)
    assert inner(2j * z, w) == pytest.approx(2j * inner(z, w))
    assert inner(z, 2j * w) == pytest.approx(-2j * inner(z, w))


# --- Projections ---

def test_project_parallel_basics(rng):
    a = sample_complex_ball_points(rng, 100, 3)
    assert np.allclose(project_parallel(a, a), a, atol=1e-15)
    assert np.allclose(project_parallel(np.zeros(3), a), 0.0)
    orthogonal = np.array([1.0, 1j, 0.0])
    assert np.allclose(project_parallel(np.array([1j, 1.0, 0.5]), orthogonal), 0.0, atol=1e-15)


def test_project_parallel_is_idempotent(rng):
    a, z = _pairs(rng, 3, count=1000)
    once = project_parallel(a, z)
    assert np.allclose(project_parallel(a, once), once, atol=1e-14)


# --- p_a ---

def test_automorphism_exchanges_a_and_origin(rng):
    a = sample_complex_ball_points(rng, 100, 2)
    assert np.allclose(bergman_automorphism(a, np.zeros(2)), a, atol=1e-15)
    assert np.allclose(bergman_automorphism(a, a), 0.0, atol=1e-15)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_automorphism_is_an_involution(rng, m):
    a, z = _pairs(rng, m)
    assert np.max(np.abs(bergman_automorphism(a, bergman_automorphism(a, z)) - z)) <= 1e-10


@pytest.mark.parametrize("m", [1, 2, 3])
def test_one_minus_norm_identity(rng, m):
    a, z = _pairs(rng, m)
    w = bergman_automorphism(a, z)
    rhs = (1.0 - _norm_sq(z)) * (1.0 - _norm_sq(a)) / np.abs(1.0 - inner(a, z)) ** 2
    assert np.allclose(1.0 - _norm_sq(w), rhs, rtol=1e-10, atol=0)


def test_disk_case_is_the_disk_map(rng):
    a, z = _pairs(rng, 1, count=200)
    expected = (a - z) / (1.0 - np.conj(a) * z)
    assert np.allclose(bergman_automorphism(a, z), expected, atol=1e-14)


# --- d_B ---

def test_distance_basics(rng):
    z, w = _pairs(rng, 2, count=500)
    assert np.allclose(bergman_distance(z, z), 0.0, atol=1e-8)
    assert np.allclose(bergman_distance(z, w), bergman_distance(w, z), rtol=1e-10)
    r = np.sqrt(_norm_sq(z))
    assert np.allclose(bergman_distance(np.zeros(2), z), 0.5 * np.log((1.0 + r) / (1.0 - r)), rtol=1e-12)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("m", [1, 2])
def test_random_automorphisms_are_isometries(rng, seed, m):
    q = random_automorphism(seed, m)
    z, w = _pairs(rng, m, count=2000)
    mapped = bergman_distance(apply_automorphism(q, z), apply_automorphism(q, w))
    assert np.allclose(mapped, bergman_distance(z, w), rtol=1e-10, atol=1e-12)


def test_disk_distance_equals_the_planar_poincare_distance(rng):
    x, y = sample_ball_points(rng, SAMPLES, 2, 0.9), sample_ball_points(rng, SAMPLES, 2, 0.9)
    complex_distance = bergman_distance(from_real(x), from_real(y))
    assert np.allclose(complex_distance, poincare_distance(x, y), rtol=1e-12, atol=1e-12)


def test_disk_automorphism_agrees_with_the_real_involution(rng):
    x = sample_ball_points(rng, 200, 2)
    g = disk_automorphism(0.3 - 0.4j)
    assert np.allclose(to_real(apply_automorphism(g, from_real(x))), mobius_map([0.3, -0.4], x), atol=1e-14)
    rotated = disk_automorphism(0.0, np.pi / 2)
    assert np.allclose(apply_automorphism(rotated, np.array([0.5 + 0j])), [-0.5j])


# --- Automorphisms ---

def test_apply_automorphism_conventions(rng):
    c = np.array([0.2j, -0.3])
    assert np.allclose(apply_automorphism(ComplexAutomorphism(c), c), 0.0, atol=1e-15)
    unitary = random_automorphism(4, 2).unitary_part
    z = sample_complex_ball_points(rng, 50, 2)
    assert np.allclose(apply_automorphism(ComplexAutomorphism(np.zeros(2), unitary), z), -z @ unitary.T, atol=1e-15)


def test_inverse_automorphism(rng):
    q = random_automorphism(9, 3)
    z = sample_complex_ball_points(rng, 500, 3)
    assert np.allclose(apply_inverse_automorphism(q, apply_automorphism(q, z)), z, atol=1e-10)


def test_random_automorphism_is_deterministic():
    first, second = random_automorphism(5, 3), random_automorphism(5, 3)
    assert np.array_equal(first.center, second.center)
    assert np.array_equal(first.unitary_part, second.unitary_part)
    assert np.linalg.norm(first.center) <= 0.9
    assert np.max(np.abs(first.unitary_part.conj().T @ first.unitary_part - np.eye(3))) <= 1e-12
    with pytest.raises(ValidationError):
        random_automorphism(0, 0)


# --- Jacobian ---

def test_jacobian_closed_values(rng):
    a = sample_complex_ball_points(rng, 100, 2)
    assert np.allclose(bergman_jacobian(np.zeros(2), a), 1.0)
    assert np.allclose(bergman_jacobian(a, np.zeros(2)), (1.0 - _norm_sq(a)) ** 3, rtol=1e-12)


@pytest.mark.parametrize("m", [1, 2, 3])
def test_jacobian_two_expressions_agree(rng, m):
    a, z = _pairs(rng, m)
    w = bergman_automorphism(a, z)
    expected = ((1.0 - _norm_sq(w)) / (1.0 - _norm_sq(z))) ** (m + 1)
    assert np.allclose(bergman_jacobian(a, z), expected, rtol=1e-10)


def test_jacobian_matches_the_real_differential(rng):
    a, z = sample_complex_ball_points(rng, 2, 2)
    step = 1e-6
    x = to_real(z)

    def real_map(v):
        return to_real(bergman_automorphism(a, from_real(v)))

    columns = [(real_map(x + step * e) - real_map(x - step * e)) / (2.0 * step) for e in np.eye(4)]
    determinant = abs(np.linalg.det(np.column_stack(columns)))
    assert determinant == pytest.approx(bergman_jacobian(a, z), rel=1e-6)


# --- Real coordinates and geodesics ---

def test_real_coordinates_interleave():
    z = np.array([1 + 2j, 3 - 4j])
    assert np.array_equal(to_real(z), [1.0, 2.0, 3.0, -4.0])
    assert np.array_equal(from_real(to_real(z)), z)
    with pytest.raises(DimensionMismatchError):
        from_real([1.0, 2.0, 3.0])


def test_geodesic_endpoints_and_arc_length(rng):
    a, b = sample_complex_ball_points(rng, 2, 2)
    t = np.linspace(0.0, 1.0, 11)
    path = geodesic(a, b, t)
    assert np.allclose(path[0], a, atol=1e-14)
    assert np.allclose(path[-1], b, atol=1e-12)
    assert np.allclose(bergman_distance(path, a), t * bergman_distance(b, a), atol=1e-10)


def test_distance_is_convex_along_geodesics(rng):
    t = np.arange(1, 10) / 10.0
    for _ in range(200):
        p, a, b = sample_complex_ball_points(rng, 3, 2)
        along = bergman_distance(geodesic(a, b, t), p)
        chord = (1.0 - t) * bergman_distance(a, p) + t * bergman_distance(b, p)
        assert np.all(along <= chord + 1e-9)
