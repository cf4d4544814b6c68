"""Potentials G (Poincaré ball) and L (Bergman ball) of a weighted point measure.

G(x) = -sum_i w_i log[(1 - |x|^2)(1 - |y_i|^2) / rho(x, y_i)]
L(z) = -sum_i w_i log[(1 - |z|^2)(1 - |w_i|^2) / |1 - <z, w_i>|^2]

Both are sums of log cosh^2 of the hyperbolic distance to the atoms, so they
are geodesically convex with a unique minimum: the barycenter, where the
residual field sum_i w_i h_c(y_i) (resp. p_c) vanishes.

Every function accepts one evaluation point of shape (d,) or a batch of shape
(..., d). Atom sums run over fixed-size blocks in a fixed order, so a result
only depends on its inputs.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd

from ball_geometry import check_interior, mobius_map, poincare_distance, rho
from bergman_geometry import bergman_automorphism, bergman_distance, from_real, inner, to_real
from exceptions import DimensionMismatchError, ValidationError

# Config
MODELS = ("poincare", "bergman")
BLOCK_ELEMENTS = 1 << 20
FD_STEP = 1e-6
GRID_MARGIN = 1e-6


@dataclass(frozen=True, eq=False)
class WeightedMeasure:
    """Finite measure sum_i w_i delta_{y_i} on one ball model.

    Points are stored as an (k, d) array, float for "poincare" and complex for
    "bergman". Counting measures have unit weights.
    """

    points: np.ndarray
    weights: np.ndarray = None
    model: str = "poincare"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}, expected one of {MODELS}", "model")
        points = np.array(self.points, dtype=float if self.model == "poincare" else complex)
        if points.ndim != 2 or points.shape[0] == 0:
            raise ValidationError(f"expected a nonempty (k, d) array of points, got shape {points.shape}", "points")
        if self.model == "poincare" and points.shape[1] < 2:
            raise ValidationError(f"real balls need n >= 2, got {points.shape[1]}", "points")
        check_interior(points, field="points")

        if self.weights is None:
            weights = np.ones(points.shape[0])
        else:
            weights = np.array(self.weights, dtype=float)
        if weights.shape != (points.shape[0],):
            raise DimensionMismatchError(f"{points.shape[0]} points but weights of shape {weights.shape}", "weights")
        if not (np.all(np.isfinite(weights)) and np.all(weights > 0.0) and np.isfinite(weights.sum())):
            raise ValidationError("weights must be positive and finite", "weights")

        points.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def counting(cls, points, model="poincare"):
        return cls(points, None, model)

    @property
    def size(self):
        return self.points.shape[0]

    @property
    def dim(self):
        return self.points.shape[1]

    @property
    def real_dim(self):
        return self.dim if self.model == "poincare" else 2 * self.dim

    @property
    def total_mass(self):
        return float(self.weights.sum())

    def map_points(self, transform):
        return WeightedMeasure(transform(self.points), self.weights, self.model)


@dataclass(frozen=True)
class PotentialValue:
    value: float
    gradient: np.ndarray


def _require(mu, model):
    if mu.model != model:
        raise DimensionMismatchError(f"expected a {model} measure, got a {mu.model} measure", "model")


def _evaluation_points(x, mu):
    x = np.asarray(x, dtype=float if mu.model == "poincare" else complex)
    if x.ndim == 0 or x.shape[-1] != mu.dim:
        raise DimensionMismatchError(f"evaluation point of shape {x.shape} against a measure in dimension {mu.dim}")
    return x


def _atom_sum(term, x, mu):
    evaluations = int(np.prod(x.shape[:-1], dtype=int))
    step = max(1, BLOCK_ELEMENTS // max(1, evaluations))
    total = 0.0
    for start in range(0, mu.size, step):
        values = term(x[..., None, :], mu.points[start : start + step])
        weights = mu.weights[start : start + step]
        if values.ndim == x.ndim:
            total = total + values @ weights
        else:
            total = total + np.einsum("...kd,k->...d", values, weights)
    return total


def _scalar(value, x):
    return float(value) if x.ndim == 1 else value


def _conformal_term(x, y):
    return np.log(rho(x, y)) - np.log1p(-np.sum(x * x, axis=-1)) - np.log1p(-np.sum(y * y, axis=-1))


def _holomorphic_term(z, w):
    return (
        2.0 * np.log(np.abs(1.0 - inner(z, w)))
        - np.log1p(-np.real(inner(z, z)))
        - np.log1p(-np.real(inner(w, w)))
    )


def potential_conformal(x, mu):
    _require(mu, "poincare")
    x = _evaluation_points(x, mu)
    return _scalar(_atom_sum(_conformal_term, x, mu), x)


def potential_holomorphic(z, mu):
    _require(mu, "bergman")
    z = _evaluation_points(z, mu)
    return _scalar(_atom_sum(_holomorphic_term, z, mu), z)


def potential_conformal_log_cosh(x, mu):
    """G through sum_i w_i log cosh^2 d_h(x, y_i)."""
    _require(mu, "poincare")
    x = _evaluation_points(x, mu)
    term = lambda x, y: np.log1p(np.sinh(poincare_distance(x, y)) ** 2)
    return _scalar(_atom_sum(term, x, mu), x)


def potential_holomorphic_log_cosh(z, mu):
    """L through sum_i w_i log cosh^2 d_B(z, w_i)."""
    _require(mu, "bergman")
    z = _evaluation_points(z, mu)
    term = lambda z, w: np.log1p(np.sinh(bergman_distance(z, w)) ** 2)
    return _scalar(_atom_sum(term, z, mu), z)


def grad_conformal(x, mu):
    """grad G(x) = sum_i w_i [2x / (1 - |x|^2) + (2x |y_i|^2 - 2 y_i) / rho(x, y_i)]."""
    _require(mu, "poincare")
    x = _evaluation_points(x, mu)

    def term(x, y):
        own = 2.0 * x / (1.0 - np.sum(x * x, axis=-1))[..., None]
        pull = (2.0 * x * np.sum(y * y, axis=-1)[..., None] - 2.0 * y) / rho(x, y)[..., None]
        return own + pull

    return _atom_sum(term, x, mu)


def grad_holomorphic(z, mu):
    """Real gradient of L, interleaved (d/dx1, d/dy1, ...).

    In complex form (d/dx + i d/dy per coordinate) it reads
    sum_i w_i [2z / (1 - |z|^2) - 2 w_i / (1 - <w_i, z>)].
    """
    _require(mu, "bergman")
    z = _evaluation_points(z, mu)

    def term(z, w):
        own = 2.0 * z / (1.0 - np.real(inner(z, z)))[..., None]
        pull = 2.0 * w / (1.0 - inner(w, z))[..., None]
        return own - pull

    return to_real(_atom_sum(term, z, mu))


def residual_conformal(c, mu):
    _require(mu, "poincare")
    c = _evaluation_points(c, mu)
    return _atom_sum(mobius_map, c, mu)


def residual_holomorphic(c, mu):
    _require(mu, "bergman")
    c = _evaluation_points(c, mu)
    return _atom_sum(bergman_automorphism, c, mu)


def potential_value(x, mu):
    if mu.model == "poincare":
        return PotentialValue(potential_conformal(x, mu), grad_conformal(x, mu))
    return PotentialValue(potential_holomorphic(x, mu), grad_holomorphic(x, mu))


def potential_grid(mu, bounds=(-1.0, 1.0, -1.0, 1.0), resolution=101):
    """Potential on a planar grid as a DataFrame with columns x, y, potential.

    Only grid points with |x| < 1 - GRID_MARGIN are kept. Planar models are
    the real disk (n = 2) and the complex disk (m = 1).
    """
    if mu.real_dim != 2:
        raise ValidationError(f"potential grids need a planar model, got {mu.model} in dimension {mu.dim}", "dim")
    if resolution < 2:
        raise ValidationError(f"resolution must be at least 2, got {resolution}", "resolution")
    xmin, xmax, ymin, ymax = (float(b) for b in bounds)
    if not (xmin < xmax and ymin < ymax):
        raise ValidationError(f"empty grid bounds {bounds}", "bounds")

    xs, ys = np.meshgrid(np.linspace(xmin, xmax, resolution), np.linspace(ymin, ymax, resolution))
    xs, ys = xs.ravel(), ys.ravel()
    inside = np.hypot(xs, ys) < 1.0 - GRID_MARGIN
    xs, ys = xs[inside], ys[inside]
    planar = np.column_stack([xs, ys])

    if mu.model == "poincare":
        values = potential_conformal(planar, mu)
    else:
        values = potential_holomorphic(from_real(planar), mu)
    return pd.DataFrame({"x": xs, "y": ys, "potential": values})


def finite_difference_gradient(f, x, step=FD_STEP):
    x = np.asarray(x, dtype=float)
    gradient = np.empty_like(x)
    for i in range(x.size):
        offset = np.zeros_like(x)
        offset[i] = step
        gradient[i] = (f(x + offset) - f(x - offset)) / (2.0 * step)
    return gradient
