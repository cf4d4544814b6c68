"""Poincaré ball primitives: rho, the involutions h_a, the distance d_h and Möbius maps A ∘ h_c.

All functions take points as arrays of shape (..., n) and broadcast over the
leading axes. Interior preconditions are checked by the point types
(`RealPoint`, `RealMobius`), not on every call.
"""

from dataclasses import dataclass

import numpy as np

from exceptions import DimensionMismatchError, ValidationError

# Config
INTERIOR_MARGIN = 1e-12
ORTHOGONALITY_TOL = 1e-12
RANDOM_CENTER_RADIUS = 0.9


def _vectors(*arrays, dtype=float):
    arrays = [np.asarray(a, dtype=dtype) for a in arrays]
    dims = {a.shape[-1] if a.ndim else None for a in arrays}
    if None in dims or len(dims) != 1:
        shapes = ", ".join(str(a.shape) for a in arrays)
        raise DimensionMismatchError(f"points must share the same dimension, got shapes {shapes}")
    return arrays


def check_interior(x, margin=INTERIOR_MARGIN, field=None):
    norms = np.linalg.norm(np.asarray(x), axis=-1)
    # written as a negation so that NaN coordinates are rejected too
    if not np.all(norms <= 1.0 - margin):
        worst = np.nanmax(norms) if np.any(np.isfinite(norms)) else float("nan")
        raise ValidationError(
            f"points must lie strictly inside the unit ball (|x| <= 1 - {margin:g}), got |x| = {worst:.17g}",
            field,
        )


@dataclass(frozen=True, eq=False)
class RealPoint:
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=float)
        if coords.ndim != 1 or coords.size < 2:
            raise ValidationError(f"a real ball point needs n >= 2 coordinates, got shape {coords.shape}")
        check_interior(coords)
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self):
        return self.coords.size

    def __array__(self, dtype=None, copy=None):
        return np.array(self.coords, dtype=dtype)


@dataclass(frozen=True, eq=False)
class RealMobius:
    center: np.ndarray
    orthogonal_part: np.ndarray = None

    def __post_init__(self):
        center = RealPoint(self.center).coords
        n = center.size
        if self.orthogonal_part is None:
            matrix = np.eye(n)
        else:
            matrix = np.array(self.orthogonal_part, dtype=float)
        if matrix.shape != (n, n):
            raise DimensionMismatchError(f"orthogonal part must be {n}x{n}, got shape {matrix.shape}")
        defect = np.max(np.abs(matrix.T @ matrix - np.eye(n)))
        if defect > ORTHOGONALITY_TOL:
            raise ValidationError(f"orthogonal part is not orthogonal (defect {defect:.3e})")
        if abs(abs(np.linalg.det(matrix)) - 1.0) > ORTHOGONALITY_TOL:
            raise ValidationError("orthogonal part must have determinant +1 or -1")
        matrix.flags.writeable = False
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "orthogonal_part", matrix)

    @property
    def dim(self):
        return self.center.size

    @classmethod
    def identity(cls, n):
        return cls(np.zeros(n))


def rho(x, a):
    """rho(x, a) = |x - a|^2 + (1 - |a|^2)(1 - |x|^2)."""
    x, a = _vectors(x, a)
    diff = x - a
    return np.sum(diff * diff, axis=-1) + (1.0 - np.sum(a * a, axis=-1)) * (1.0 - np.sum(x * x, axis=-1))


def mobius_map(a, x):
    """The involution h_a exchanging a and 0.

    h_a(x) = (a |x - a|^2 + (1 - |a|^2)(a - x)) / rho(x, a)
    """
    a, x = _vectors(a, x)
    diff = x - a
    numerator = a * np.sum(diff * diff, axis=-1)[..., None] + (1.0 - np.sum(a * a, axis=-1))[..., None] * (a - x)
    return numerator / rho(x, a)[..., None]


def poincare_distance(x, y):
    """d_h(x, y) = 1/2 log((1 + R) / (1 - R)) with R = |x - y| / sqrt(rho(x, y))."""
    x, y = _vectors(x, y)
    ratio = np.linalg.norm(x - y, axis=-1) / np.sqrt(rho(x, y))
    return np.arctanh(np.minimum(ratio, 1.0))


def apply_mobius(g, x):
    _, x = _vectors(g.center, x)
    return mobius_map(g.center, x) @ g.orthogonal_part.T


def apply_inverse_mobius(g, y):
    # (A ∘ h_c)^-1 = h_c ∘ A^T since h_c is an involution
    _, y = _vectors(g.center, y)
    return mobius_map(g.center, y @ g.orthogonal_part)


def hyperbolic_jacobian(a, x):
    """Jacobian of y = h_a(x): ((1 - |a|^2) / rho(a, x))^n = ((1 - |y|^2) / (1 - |x|^2))^n."""
    a, x = _vectors(a, x)
    n = x.shape[-1]
    return ((1.0 - np.sum(a * a, axis=-1)) / rho(a, x)) ** n


def random_mobius(seed, n):
    if n < 2:
        raise ValidationError(f"real balls need n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    direction = rng.standard_normal(n)
    direction /= np.linalg.norm(direction)
    center = RANDOM_CENTER_RADIUS * rng.random() * direction
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    return RealMobius(center, q)


def geodesic(a, b, t):
    """Points gamma(t) on the geodesic from a to b, parametrized proportionally to arc length.

    h_a moves a to 0, where geodesics through the origin are diameters; the
    radial point at hyperbolic distance t * d_h(a, b) is mapped back by h_a.
    """
    a, b = _vectors(a, b)
    t = np.asarray(t, dtype=float)
    local = mobius_map(a, b)
    radius = np.linalg.norm(local)
    if radius == 0.0:
        return np.broadcast_to(a, t.shape + a.shape).copy()
    scale = np.tanh(t * np.arctanh(radius)) / radius
    return mobius_map(a, scale[..., None] * local)


def sample_ball_points(rng, count, dim, max_norm=RANDOM_CENTER_RADIUS):
    directions = rng.standard_normal((count, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    radii = max_norm * rng.random(count) ** (1.0 / dim)
    return directions * radii[:, None]
