"""Barycenters: the unique zero of the residual field, i.e. the minimum of the potential.

Point sets are solved by a damped fixed-point iteration c <- h_c(tau * b). Here
b is the Newton step L^-1 r for the residual r = sum_i w_i h_c(y_i) and the
linearization L of b -> sum_i w_i h_b(h_c(y_i)) at 0 (or the plain step
r / sum(w)). A step is accepted when it decreases |r|. If the damping collapses
or the iteration cap is hit, Armijo gradient descent on the convex potential
takes over and hands the last digits to damped Newton steps. Both models run
through the same loop in real coordinates.
"""

import logging
from dataclasses import asdict, dataclass, field, replace
from decimal import Decimal, localcontext

import numpy as np
from scipy import linalg

from ball_geometry import INTERIOR_MARGIN, RealMobius, apply_mobius, mobius_map
from bergman_geometry import (
    ComplexAutomorphism,
    apply_automorphism,
    bergman_automorphism,
    from_real,
    to_real,
)
from exceptions import ConvergenceError, DegenerateInputError, DimensionMismatchError, ValidationError
from measure import SUB_BATCHES, DensityKind, RegionSpec, pushforward, sample_region
from potential import (
    WeightedMeasure,
    grad_conformal,
    grad_holomorphic,
    potential_conformal,
    potential_holomorphic,
    residual_conformal,
    residual_holomorphic,
)

logger = logging.getLogger(__name__)

# Config
DESCENT_MIN_STEP = 1e-20
ARMIJO_RESOLUTION = 1e-13
REFERENCE_DIGITS = 50
SYMMETRIC_PAIR_TOL = 1e-12
STANDARD_ERROR_FLOOR = 1e-9


@dataclass(frozen=True)
class SolverConfig:
    residual_tol: float = 1e-10
    max_iters: int = 500
    initial_damping: float = 1.0
    damping_backoff: float = 0.5
    fallback_max_iters: int = 2000
    armijo_c: float = 1e-4
    min_damping: float = 1e-6
    preconditioned: bool = True
    seed: int = 0
    samples: int = 1 << 18

    def __post_init__(self):
        if not self.residual_tol > 0.0:
            raise ValidationError(f"must be positive, got {self.residual_tol}", "residual_tol")
        for name in ("max_iters", "fallback_max_iters", "samples"):
            if int(getattr(self, name)) < 1:
                raise ValidationError(f"must be at least 1, got {getattr(self, name)}", name)
        if not 0.0 < self.initial_damping <= 1.0:
            raise ValidationError(f"must lie in (0, 1], got {self.initial_damping}", "initial_damping")
        if not 0.0 < self.damping_backoff < 1.0:
            raise ValidationError(f"must lie in (0, 1), got {self.damping_backoff}", "damping_backoff")
        if not 0.0 < self.armijo_c < 1.0:
            raise ValidationError(f"must lie in (0, 1), got {self.armijo_c}", "armijo_c")
        if not 0.0 < self.min_damping < self.initial_damping:
            raise ValidationError(f"must lie in (0, initial_damping), got {self.min_damping}", "min_damping")

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TraceEntry:
    iteration: int
    residual_norm: float
    damping: float
    method: str = "fixed_point"


@dataclass(frozen=True, eq=False)
class BarycenterResult:
    point: np.ndarray
    model: str
    residual_norm: float
    potential: float
    iterations: int
    method_trace: tuple
    converged: bool
    total_mass: float
    standard_error: np.ndarray = None
    mass_estimate: float = None
    mass_standard_error: float = None
    accepted: int = None

    @property
    def real_point(self):
        return self.point if self.model == "poincare" else to_real(self.point)

    def as_map(self):
        if self.model == "poincare":
            return RealMobius(self.point)
        return ComplexAutomorphism(self.point)


class _ModelOps:
    def __init__(self, mu):
        self.mu = mu

    def to_model(self, c):
        return c

    def to_ambient(self, c):
        return np.asarray(c, dtype=float)


class _ConformalOps(_ModelOps):
    def residual(self, c):
        return residual_conformal(c, self.mu)

    def potential(self, c):
        return potential_conformal(c, self.mu)

    def gradient(self, c):
        return grad_conformal(c, self.mu)

    def move(self, c, v):
        return mobius_map(c, v)

    def linearization(self, c):
        atoms = mobius_map(c, self.mu.points)
        weights = self.mu.weights
        spread = np.sum(weights * (1.0 + np.sum(atoms * atoms, axis=1)))
        return spread * np.eye(atoms.shape[1]) - 2.0 * (atoms * weights[:, None]).T @ atoms


class _HolomorphicOps(_ModelOps):
    def to_model(self, c):
        return from_real(c)

    def to_ambient(self, c):
        return to_real(np.asarray(c, dtype=complex))

    def residual(self, c):
        return to_real(residual_holomorphic(from_real(c), self.mu))

    def potential(self, c):
        return potential_holomorphic(from_real(c), self.mu)

    def gradient(self, c):
        return grad_holomorphic(from_real(c), self.mu)

    def move(self, c, v):
        return to_real(bergman_automorphism(from_real(c), from_real(v)))

    def linearization(self, c):
        # b -> b sum(w) - sum_i w_i y_i <y_i, b> is only real-linear; apply it to a real basis
        atoms = bergman_automorphism(from_real(c), self.mu.points)
        weights = self.mu.weights
        basis = from_real(np.eye(2 * atoms.shape[1]))
        pairing = atoms @ basis.conj().T
        images = weights.sum() * basis - np.einsum("i,ik,ij->jk", weights, atoms, pairing)
        return to_real(images).T


def _ops(mu):
    return _ConformalOps(mu) if mu.model == "poincare" else _HolomorphicOps(mu)


def _inside(c):
    return np.linalg.norm(c) <= 1.0 - INTERIOR_MARGIN


def _result(ops, c, residual_norm, iterations, trace, converged):
    return BarycenterResult(
        point=ops.to_model(c),
        model=ops.mu.model,
        residual_norm=float(residual_norm),
        potential=float(ops.potential(c)),
        iterations=iterations,
        method_trace=tuple(trace),
        converged=bool(converged),
        total_mass=ops.mu.total_mass,
    )


def _starting_point(ops, initial):
    mu = ops.mu
    if initial is None:
        mean = mu.weights @ mu.points / mu.total_mass
        return ops.to_ambient(mean)
    c = ops.to_ambient(initial)
    if c.shape != (mu.real_dim,):
        raise DimensionMismatchError(f"initial point of shape {c.shape} for a measure in dimension {mu.dim}", "initial")
    if not _inside(c):
        raise ValidationError("initial point must lie inside the unit ball", "initial")
    return c


def _damped_step(ops, cfg, c, step, norm):
    # first tau in initial_damping * backoff^k that stays inside and decreases |r|
    tau = cfg.initial_damping
    while tau >= cfg.min_damping:
        trial = tau * step
        if _inside(trial):
            candidate = ops.move(c, trial)
            if _inside(candidate):
                candidate_r = ops.residual(candidate)
                candidate_norm = np.linalg.norm(candidate_r)
                if candidate_norm < norm:
                    return candidate, candidate_r, candidate_norm, tau
        tau *= cfg.damping_backoff
    return None


def _newton_step(ops, c, r):
    return linalg.solve(ops.linearization(c), r)


def _fixed_point(ops, cfg, c, tolerance, trace):
    total = ops.mu.total_mass
    r = ops.residual(c)
    norm = np.linalg.norm(r)
    iterations = 0
    while norm > tolerance and iterations < cfg.max_iters:
        step = _newton_step(ops, c, r) if cfg.preconditioned else r / total
        accepted = _damped_step(ops, cfg, c, step, norm)
        if accepted is None:
            logger.debug("damping fell below %g at iteration %d", cfg.min_damping, iterations)
            return c, norm, iterations, False
        c, r, norm, tau = accepted
        iterations += 1
        trace.append(TraceEntry(iterations, float(norm), tau))
        logger.debug("iteration %d: |residual| = %.3e, damping %g", iterations, norm, tau)
    return c, norm, iterations, norm <= tolerance


def _descent(ops, cfg, c, tolerance, trace, iterations):
    """Armijo backtracking descent on the potential along the negative gradient.

    The Armijo test compares potential values, so once the decrease it asks for
    is near the float spacing of the potential the remaining work is done by
    damped Newton steps on the residual.
    """
    step_size = 1.0 / ops.mu.total_mass
    r = ops.residual(c)
    norm = np.linalg.norm(r)
    newton = False
    for _ in range(cfg.fallback_max_iters):
        if not newton:
            value = ops.potential(c)
            gradient = ops.gradient(c)
            slope = gradient @ gradient
            if cfg.armijo_c * step_size * slope <= ARMIJO_RESOLUTION * max(abs(value), 1.0):
                newton = True
            else:
                t = step_size
                while t >= DESCENT_MIN_STEP:
                    candidate = c - t * gradient
                    if _inside(candidate) and ops.potential(candidate) <= value - cfg.armijo_c * t * slope:
                        break
                    t *= cfg.damping_backoff
                else:
                    newton = True
            if newton:
                logger.info("descent resolved down to |residual| = %.3e, finishing with Newton steps", norm)
                continue
            c = candidate
            r = ops.residual(c)
            norm = np.linalg.norm(r)
            step_size = 2.0 * t
            method = "descent"
        else:
            accepted = _damped_step(ops, cfg, c, _newton_step(ops, c, r), norm)
            if accepted is None:
                return c, norm, iterations, False
            c, r, norm, t = accepted
            method = "newton"
        iterations += 1
        trace.append(TraceEntry(iterations, float(norm), t, method))
        logger.debug("%s %d: |residual| = %.3e, step %g", method, iterations, norm, t)
        if norm <= tolerance:
            return c, norm, iterations, True
    return c, norm, iterations, False


def _barycenter(mu, cfg=None, initial=None):
    cfg = cfg or SolverConfig()
    ops = _ops(mu)
    tolerance = cfg.residual_tol * mu.total_mass

    if mu.size == 1:
        c = ops.to_ambient(mu.points[0])
        return _result(ops, c, 0.0, 0, [TraceEntry(0, 0.0, 0.0, "single_atom")], True)

    c = _starting_point(ops, initial)
    trace = [TraceEntry(0, float(np.linalg.norm(ops.residual(c))), cfg.initial_damping, "start")]
    c, norm, iterations, converged = _fixed_point(ops, cfg, c, tolerance, trace)
    if not converged:
        logger.info("fixed-point iteration stalled at |residual| = %.3e, switching to gradient descent", norm)
        c, norm, iterations, converged = _descent(ops, cfg, c, tolerance, trace, iterations)

    result = _result(ops, c, norm, iterations, trace, converged)
    if not converged:
        raise ConvergenceError(
            f"no convergence after {iterations} iterations: |residual| = {norm:.3e} > {tolerance:.3e}",
            trace=trace,
            result=result,
        )
    logger.info("%s barycenter after %d iterations, |residual| = %.3e", mu.model, iterations, norm)
    return result


def barycenter_conformal(mu, cfg=None, initial=None):
    if mu.model != "poincare":
        raise DimensionMismatchError(f"expected a poincare measure, got {mu.model}", "model")
    return _barycenter(mu, cfg, initial)


def barycenter_holomorphic(mu, cfg=None, initial=None):
    if mu.model != "bergman":
        raise DimensionMismatchError(f"expected a bergman measure, got {mu.model}", "model")
    return _barycenter(mu, cfg, initial)


def barycenter(mu, cfg=None, initial=None):
    return _barycenter(mu, cfg, initial)


def barycenter_region(region, density=DensityKind.HYPERBOLIC, cfg=None, count=None, seed=None):
    """Barycenter of a region under a density, with a batch-means standard error.

    The full sample is solved once; each of the sub-batches is solved again,
    starting from the full solution, and the spread of those barycenters gives
    the per-coordinate standard error.
    """
    cfg = cfg or SolverConfig()
    count = cfg.samples if count is None else count
    seed = cfg.seed if seed is None else seed
    batch = sample_region(region, density, count, seed)
    result = _barycenter(batch.atoms, cfg)

    estimates = []
    for index in range(SUB_BATCHES):
        sub = batch.sub_batch(index)
        if sub is None:
            continue
        estimates.append(_barycenter(sub, cfg, initial=result.point).real_point)
        logger.debug("sub-batch %d barycenter %s", index, estimates[-1])
    if len(estimates) >= 2:
        standard_error = np.std(estimates, axis=0, ddof=1) / np.sqrt(len(estimates))
    else:
        standard_error = np.full(result.real_point.shape, np.nan)

    return replace(
        result,
        standard_error=standard_error,
        mass_estimate=batch.total_mass_estimate,
        mass_standard_error=batch.standard_error,
        accepted=batch.accepted,
    )


def _complex_scalar(z, name):
    z = complex(np.asarray(z).item())
    if not abs(z) <= 1.0 - INTERIOR_MARGIN:
        raise ValidationError(f"point must lie inside the unit disk, got |z| = {abs(z):.17g}", name)
    return z


def _two_point_parts(z1, z2):
    a, b = 1.0 - abs(z1) ** 2, 1.0 - abs(z2) ** 2
    head = 1.0 - abs(z1 * z2) ** 2
    root = np.sqrt(a * b) * abs(1.0 - z1 * z2.conjugate())
    denominator = a * z2.conjugate() + b * z1.conjugate()
    return head, root, denominator


def two_point_closed_form(z1, z2):
    """Barycenter of two unit masses in the disk: the midpoint of the geodesic z1 z2.

    z_hat = (1 - |z1 z2|^2 - sqrt((1 - |z1|^2)(1 - |z2|^2)) |1 - z1 conj(z2)|)
            / ((1 - |z1|^2) conj(z2) + (1 - |z2|^2) conj(z1))

    A symmetric pair z2 = -z1 makes both parts vanish; its barycenter is 0 and
    is rejected here rather than returned from a 0/0.
    """
    z1, z2 = _complex_scalar(z1, "z1"), _complex_scalar(z2, "z2")
    if z1 == z2:
        return z1
    if abs(z1 + z2) <= SYMMETRIC_PAIR_TOL:
        raise DegenerateInputError("symmetric pair z2 = -z1: the barycenter is 0 and the closed form degenerates")
    head, root, denominator = _two_point_parts(z1, z2)
    return (head - root) / denominator


def two_point_stationary_points(z1, z2):
    z_hat = two_point_closed_form(z1, z2)
    head, root, denominator = _two_point_parts(_complex_scalar(z1, "z1"), _complex_scalar(z2, "z2"))
    z_far = (head + root) / denominator if denominator else complex("inf")
    return 0j, z_hat, z_far


def three_point_reference():
    """Exact barycenter of unit masses at 0, 1/2 and i/2, evaluated to 50 digits.

    a = (1 + i)(4/3 + 5 sqrt(2) / (3 X^(1/6)) - X^(1/6) / (3 sqrt(2))),
    X = 38636 + 1164 sqrt(1101).
    """
    with localcontext() as ctx:
        ctx.prec = REFERENCE_DIGITS
        x = Decimal(38636) + Decimal(1164) * Decimal(1101).sqrt()
        sixth_root = (x.ln() / 6).exp()
        sqrt2 = Decimal(2).sqrt()
        part = Decimal(4) / 3 + 5 * sqrt2 / (3 * sixth_root) - sixth_root / (3 * sqrt2)
    value = float(part)
    return complex(value, value)


@dataclass(frozen=True, eq=False)
class InvarianceReport:
    model: str
    original: np.ndarray
    mapped: np.ndarray
    transported: np.ndarray
    defect: float
    threshold: float
    passed: bool
    details: dict = field(default_factory=dict)


def _apply(transform, x):
    if isinstance(transform, RealMobius):
        return apply_mobius(transform, x)
    return apply_automorphism(transform, x)


def _check_map(model, transform):
    expected = RealMobius if model == "poincare" else ComplexAutomorphism
    if not isinstance(transform, expected):
        raise DimensionMismatchError(f"a {model} problem needs a {expected.__name__}", "map")


def verify_invariance(data, transform, cfg=None, density=DensityKind.HYPERBOLIC, count=None, seed=None):
    """Compare g(barycenter(data)) with barycenter(g(data)).

    Point sets pass within 10 * residual_tol; regions within three combined
    standard errors of the two independently sampled barycenters.
    """
    cfg = cfg or SolverConfig()
    if isinstance(data, RegionSpec):
        _check_map(data.model, transform)
        first = barycenter_region(data, density, cfg, count, seed)
        second = barycenter_region(pushforward(data, transform), density, cfg, count, seed)
        transported = _apply(transform, first.point)
        # a Möbius map stretches lengths at c by (1 - |g(c)|^2) / (1 - |c|^2)
        stretch = (1.0 - np.linalg.norm(transported) ** 2) / (1.0 - np.linalg.norm(first.point) ** 2)
        combined = float(np.hypot(stretch * np.linalg.norm(first.standard_error), np.linalg.norm(second.standard_error)))
        threshold = max(3.0 * combined, STANDARD_ERROR_FLOOR)
        details = {"standard_error": combined, "mass": [first.mass_estimate, second.mass_estimate]}
    elif isinstance(data, WeightedMeasure):
        _check_map(data.model, transform)
        first = _barycenter(data, cfg)
        second = _barycenter(data.map_points(lambda p: _apply(transform, p)), cfg)
        transported = _apply(transform, first.point)
        threshold = 10.0 * cfg.residual_tol
        details = {"iterations": [first.iterations, second.iterations]}
    else:
        raise ValidationError(f"expected a WeightedMeasure or a RegionSpec, got {type(data).__name__}", "data")

    defect = float(np.linalg.norm(transported - second.point))
    passed = defect <= threshold
    logger.info("invariance defect %.3e (threshold %.3e): %s", defect, threshold, "pass" if passed else "fail")
    return InvarianceReport(data.model, first.point, second.point, transported, defect, threshold, passed, details)
