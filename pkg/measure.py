"""Regions strictly inside the ball, and their conversion into weighted point measures.

Regions live in real coordinates: R^n for the Poincaré model and R^2m (the
interleaved identification of C^m) for the Bergman model. Sampling draws
scrambled Sobol points in the region's bounding box, keeps the points inside
the region and weights them by density * box volume / count.
"""

import logging
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy import integrate, special
from scipy.stats import norm, qmc

from ball_geometry import RealMobius, apply_inverse_mobius, apply_mobius
from bergman_geometry import ComplexAutomorphism, apply_automorphism, apply_inverse_automorphism, from_real, to_real
from exceptions import DegenerateRegionError, DimensionMismatchError, ValidationError
from potential import MODELS, WeightedMeasure

logger = logging.getLogger(__name__)

# Config
REGION_MARGIN = 1e-9
BOX_PADDING = 1e-3
SUB_BATCHES = 16
MIN_ACCEPTANCE = 1e-4
BOUNDARY_POINTS = 4096
SYMMETRY_TOL = 1e-12


class DensityKind(str, Enum):
    LEBESGUE = "lebesgue"
    HYPERBOLIC = "hyperbolic"

    def density(self, x, model="poincare"):
        """Density of the measure at real coordinates x of shape (..., D).

        Hyperbolic: (1 - |x|^2)^(-n) on R^n and (1 - |z|^2)^(-(m+1)) on C^m.
        """
        x = np.asarray(x, dtype=float)
        if self is DensityKind.LEBESGUE:
            return np.ones(x.shape[:-1])
        exponent = x.shape[-1] if model == "poincare" else x.shape[-1] // 2 + 1
        return (1.0 - np.sum(x * x, axis=-1)) ** (-exponent)


def _real_dim(model, dim):
    return dim if model == "poincare" else 2 * dim


def _model_dim(model, real_dim):
    if model == "bergman":
        if real_dim % 2:
            raise DimensionMismatchError(f"bergman regions need an even number of real coordinates, got {real_dim}")
        return real_dim // 2
    if real_dim < 2:
        raise ValidationError(f"real balls need n >= 2, got {real_dim}")
    return real_dim


def _real_vector(values, model):
    values = np.asarray(values)
    if np.iscomplexobj(values):
        if model != "bergman":
            raise ValidationError("complex coordinates are only valid in the bergman model")
        values = to_real(values)
    values = np.array(values, dtype=float)
    if values.ndim != 1:
        raise ValidationError(f"expected a coordinate vector, got shape {values.shape}", "center")
    return values


def unit_directions(dim, count=BOUNDARY_POINTS):
    if dim == 2:
        angles = np.linspace(0.0, 2.0 * np.pi, count, endpoint=False)
        return np.column_stack([np.cos(angles), np.sin(angles)])
    u = qmc.Sobol(d=dim, scramble=True, seed=0).random(count)
    gaussian = norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    return gaussian / np.linalg.norm(gaussian, axis=1, keepdims=True)


class RegionSpec(ABC):
    """A measurable region whose closure lies in the ball of radius 1 - REGION_MARGIN."""

    model = "poincare"

    @property
    @abstractmethod
    def real_dim(self):
        pass

    @property
    def dim(self):
        return _model_dim(self.model, self.real_dim)

    @abstractmethod
    def contains_real(self, x):
        """Membership of real coordinates x of shape (k, D)."""

    @abstractmethod
    def bounding_box(self):
        """Axis-aligned (lo, hi) box containing the region."""

    @abstractmethod
    def boundary_sample(self):
        """Points covering the region boundary, shape (s, D)."""

    @abstractmethod
    def max_norm(self):
        """An upper bound (or dense probe) of sup |x| over the region."""

    def _check_interior(self):
        bound = self.max_norm()
        if not bound <= 1.0 - REGION_MARGIN:
            raise ValidationError(
                f"region reaches |x| = {bound:.12g}, beyond the ball of radius 1 - {REGION_MARGIN:g}", "region"
            )


@dataclass(frozen=True, eq=False)
class Ellipsoid(RegionSpec):
    """{x : (x - c)^T Q (x - c) < 1} with Q symmetric positive definite."""

    center: np.ndarray
    shape: np.ndarray
    model: str = "poincare"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}", "model")
        center = _real_vector(self.center, self.model)
        matrix = np.array(self.shape, dtype=float)
        d = center.size
        if matrix.shape != (d, d):
            raise DimensionMismatchError(f"shape matrix must be {d}x{d}, got {matrix.shape}", "shape")
        if np.max(np.abs(matrix - matrix.T)) > SYMMETRY_TOL * max(1.0, np.max(np.abs(matrix))):
            raise ValidationError("shape matrix must be symmetric", "shape")
        if np.min(np.linalg.eigvalsh(matrix)) <= 0.0:
            raise ValidationError("shape matrix must be positive definite", "shape")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", matrix)
        _model_dim(self.model, d)
        self._check_interior()

    @property
    def real_dim(self):
        return self.center.size

    @property
    def covariance(self):
        return np.linalg.inv(self.shape)

    def contains_real(self, x):
        diff = np.asarray(x, dtype=float) - self.center
        return np.einsum("...i,ij,...j->...", diff, self.shape, diff) < 1.0

    def bounding_box(self):
        half = np.sqrt(np.diag(self.covariance))
        return self.center - half, self.center + half

    def boundary_sample(self):
        factor = np.linalg.cholesky(self.covariance)
        return self.center + unit_directions(self.real_dim) @ factor.T

    def max_norm(self):
        return float(np.linalg.norm(self.center) + np.sqrt(np.max(np.linalg.eigvalsh(self.covariance))))


@dataclass(frozen=True, eq=False)
class Ball(RegionSpec):
    center: np.ndarray
    radius: float
    model: str = "poincare"

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValidationError(f"unknown model {self.model!r}", "model")
        center = _real_vector(self.center, self.model)
        radius = float(self.radius)
        if not radius > 0.0:
            raise ValidationError(f"radius must be positive, got {radius}", "radius")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radius", radius)
        _model_dim(self.model, center.size)
        self._check_interior()

    @property
    def real_dim(self):
        return self.center.size

    def contains_real(self, x):
        return np.linalg.norm(np.asarray(x, dtype=float) - self.center, axis=-1) < self.radius

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def boundary_sample(self):
        return self.center + self.radius * unit_directions(self.real_dim)

    def max_norm(self):
        return float(np.linalg.norm(self.center) + self.radius)


@dataclass(frozen=True, eq=False)
class MobiusImage(RegionSpec):
    """The image g(inner) of a region under a ball automorphism g."""

    inner: RegionSpec
    transform: object

    def __post_init__(self):
        expected = RealMobius if self.inner.model == "poincare" else ComplexAutomorphism
        if not isinstance(self.transform, expected):
            raise DimensionMismatchError(
                f"a {self.inner.model} region needs a {expected.__name__}, got {type(self.transform).__name__}", "map"
            )
        if self.transform.dim != self.inner.dim:
            raise DimensionMismatchError(
                f"map of dimension {self.transform.dim} on a region of dimension {self.inner.dim}", "map"
            )
        self._check_interior()

    @property
    def model(self):
        return self.inner.model

    @property
    def real_dim(self):
        return self.inner.real_dim

    def forward(self, x):
        if self.model == "poincare":
            return apply_mobius(self.transform, x)
        return to_real(apply_automorphism(self.transform, from_real(x)))

    def backward(self, y):
        if self.model == "poincare":
            return apply_inverse_mobius(self.transform, y)
        return to_real(apply_inverse_automorphism(self.transform, from_real(y)))

    def contains_real(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        result = np.zeros(x.shape[0], dtype=bool)
        inside = np.linalg.norm(x, axis=-1) < 1.0
        if np.any(inside):
            result[inside] = self.inner.contains_real(self.backward(x[inside]))
        return result

    def boundary_sample(self):
        return self.forward(self.inner.boundary_sample())

    def bounding_box(self):
        boundary = self.boundary_sample()
        lo = np.clip(boundary.min(axis=0) - BOX_PADDING, -1.0, 1.0)
        hi = np.clip(boundary.max(axis=0) + BOX_PADDING, -1.0, 1.0)
        return lo, hi

    def max_norm(self):
        return float(np.max(np.linalg.norm(self.boundary_sample(), axis=-1)))


@dataclass(frozen=True, eq=False)
class Intersection(RegionSpec):
    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ValidationError("an intersection needs at least one part", "parts")
        if len({(p.model, p.real_dim) for p in parts}) != 1:
            raise DimensionMismatchError("intersection parts must share model and dimension", "parts")
        object.__setattr__(self, "parts", parts)

    @property
    def model(self):
        return self.parts[0].model

    @property
    def real_dim(self):
        return self.parts[0].real_dim

    def contains_real(self, x):
        result = self.parts[0].contains_real(x)
        for part in self.parts[1:]:
            result = result & part.contains_real(x)
        return result

    def bounding_box(self):
        boxes = [part.bounding_box() for part in self.parts]
        lo = np.max([box[0] for box in boxes], axis=0)
        hi = np.min([box[1] for box in boxes], axis=0)
        return lo, hi

    def boundary_sample(self):
        return np.concatenate([part.boundary_sample() for part in self.parts])

    def max_norm(self):
        return min(part.max_norm() for part in self.parts)


def ellipsoid(center, shape, model="poincare"):
    return Ellipsoid(center, shape, model)


def ball(center, radius, model="poincare"):
    return Ball(center, radius, model)


def mobius_image(inner, transform):
    return MobiusImage(inner, transform)


def intersection(*parts):
    return Intersection(parts)


def pushforward(region, transform):
    return MobiusImage(region, transform)


def _model_coords(x, model, dim):
    if model == "bergman":
        return to_real(np.asarray(x, dtype=complex))
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != dim:
        raise DimensionMismatchError(f"point of dimension {x.shape[-1]} against a region of dimension {dim}")
    return x


def contains(region, x):
    x = _model_coords(x, region.model, region.real_dim)
    if x.shape[-1] != region.real_dim:
        raise DimensionMismatchError(f"point of real dimension {x.shape[-1]} against a region of dimension {region.real_dim}")
    batch = np.atleast_2d(x)
    result = (np.linalg.norm(batch, axis=-1) < 1.0) & region.contains_real(batch)
    return bool(result[0]) if x.ndim == 1 else result


@dataclass(frozen=True, eq=False)
class SampleBatch:
    atoms: WeightedMeasure
    total_mass_estimate: float
    standard_error: float
    seed: int
    count: int
    batch_index: np.ndarray
    batch_sizes: np.ndarray
    density: DensityKind

    @property
    def accepted(self):
        return self.atoms.size

    def batch_sums(self, values):
        values = np.asarray(values)
        weighted = values * self.atoms.weights.reshape((-1,) + (1,) * (values.ndim - 1))
        sums = np.zeros((self.batch_sizes.size,) + values.shape[1:], dtype=weighted.dtype)
        np.add.at(sums, self.batch_index, weighted)
        scale = np.where(self.batch_sizes > 0, self.count / np.maximum(self.batch_sizes, 1), 0.0)
        return sums * scale.reshape((-1,) + (1,) * (values.ndim - 1))

    def sub_batch(self, index):
        mask = self.batch_index == index
        if not np.any(mask):
            return None
        scale = self.count / self.batch_sizes[index]
        return WeightedMeasure(self.atoms.points[mask], self.atoms.weights[mask] * scale, self.atoms.model)


def _batch_sizes(count):
    base, extra = divmod(count, SUB_BATCHES)
    return np.array([base + (i < extra) for i in range(SUB_BATCHES)], dtype=int)


def _standard_error(estimates, sizes):
    estimates = estimates[sizes > 0]
    if estimates.shape[0] < 2:
        return np.full(estimates.shape[1:], np.nan) if estimates.ndim > 1 else float("nan")
    return np.std(estimates, axis=0, ddof=1) / np.sqrt(estimates.shape[0])


def sample_region(region, density, count, seed):
    """Scrambled-Sobol rejection sample of the region as a weighted measure.

    The count is split into SUB_BATCHES independently scrambled sequences
    spawned from `seed`; the standard error is the spread of the sub-batch
    mass estimates.
    """
    density = DensityKind(density)
    count = int(count)
    if count < 1:
        raise ValidationError(f"sample count must be at least 1, got {count}", "samples")

    lo, hi = region.bounding_box()
    if np.any(hi <= lo):
        raise DegenerateRegionError(f"region has an empty bounding box [{lo}, {hi}]")
    volume = float(np.prod(hi - lo))
    sizes = _batch_sizes(count)
    children = np.random.SeedSequence(seed).spawn(SUB_BATCHES)

    points, weights, labels = [], [], []
    for index, (size, child) in enumerate(zip(sizes, children)):
        if size == 0:
            continue
        sampler = qmc.Sobol(d=region.real_dim, scramble=True, seed=np.random.default_rng(child))
        with warnings.catch_warnings():
            # sub-batch sizes need not be powers of two
            warnings.simplefilter("ignore", UserWarning)
            u = sampler.random(size)
        x = qmc.scale(u, lo, hi)
        keep = (np.linalg.norm(x, axis=-1) < 1.0) & region.contains_real(x)
        x = x[keep]
        points.append(x)
        weights.append(density.density(x, region.model) * volume / count)
        labels.append(np.full(x.shape[0], index, dtype=int))
        logger.debug("sub-batch %d: %d of %d points accepted", index, x.shape[0], size)

    points = np.concatenate(points)
    accepted = points.shape[0]
    if accepted == 0 or accepted / count < MIN_ACCEPTANCE:
        raise DegenerateRegionError(
            f"only {accepted} of {count} samples fell inside the region (acceptance below {MIN_ACCEPTANCE:g})"
        )

    model_points = points if region.model == "poincare" else from_real(points)
    atoms = WeightedMeasure(model_points, np.concatenate(weights), region.model)
    batch = SampleBatch(
        atoms=atoms,
        total_mass_estimate=atoms.total_mass,
        standard_error=float("nan"),
        seed=seed,
        count=count,
        batch_index=np.concatenate(labels),
        batch_sizes=sizes,
        density=density,
    )
    standard_error = float(_standard_error(batch.batch_sums(np.ones(accepted)), sizes))
    logger.info(
        "sampled %s region: %d/%d accepted, %s mass %.6g +/- %.2g",
        region.model, accepted, count, density.value, atoms.total_mass, standard_error,
    )
    return replace(batch, standard_error=standard_error)


@dataclass(frozen=True)
class IntegralEstimate:
    value: object
    standard_error: object
    count: int
    seed: int


def integrate_region(region, density, integrand, count, seed):
    batch = sample_region(region, density, count, seed)
    values = np.asarray(integrand(batch.atoms.points))
    if values.shape[0] != batch.accepted:
        raise DimensionMismatchError(f"integrand returned {values.shape[0]} rows for {batch.accepted} points")
    weights = batch.atoms.weights.reshape((-1,) + (1,) * (values.ndim - 1))
    value = np.sum(values * weights, axis=0)
    standard_error = _standard_error(batch.batch_sums(values), batch.batch_sizes)
    return IntegralEstimate(value, standard_error, count, seed)


def ball_mass(radius, dim, density, model="poincare"):
    density = DensityKind(density)
    radius = float(radius)
    if not 0.0 < radius < 1.0:
        raise ValidationError(f"radius must lie in (0, 1), got {radius}", "radius")
    d = _real_dim(model, dim)
    sphere_area = 2.0 * np.pi ** (d / 2) / special.gamma(d / 2)

    def profile(r):
        return r ** (d - 1) * density.density(np.array([r] + [0.0] * (d - 1)), model)

    value, _ = integrate.quad(profile, 0.0, radius, epsabs=1e-13, epsrel=1e-12)
    return float(sphere_area * value)
