"""Command-line entry point: barycenters, invariance checks, distances and potential grids.

Jobs are JSON documents read from --input or stdin, e.g.

    echo '{"points": [[0, 0], [0.5, 0], [0, 0.5]]}' | python cli.py points --model bergman --dim 1
    python cli.py region --input ellipse.json --samples 262144 --seed 1

Exit codes: 0 success, 1 failed invariance check, 2 invalid input,
3 solver non-convergence, 4 degenerate region sampling.
"""

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from ball_geometry import RealMobius, RealPoint, apply_mobius, poincare_distance
from bergman_geometry import ComplexAutomorphism, ComplexPoint, apply_automorphism, bergman_distance, disk_automorphism
from exceptions import BarycenterError, ConvergenceError, DegenerateRegionError, ValidationError
from measure import DensityKind, ball, ellipsoid, intersection, mobius_image, sample_region
from potential import WeightedMeasure, potential_grid
from solver import SolverConfig, barycenter, barycenter_region, verify_invariance

# Config
MODEL_NAMES = {"poincare": "poincare", "poincare_n": "poincare", "bergman": "bergman", "bergman_m": "bergman"}
DEFAULTS = SolverConfig()
DEFAULT_BOUNDS = (-1.0, 1.0, -1.0, 1.0)
DEFAULT_RESOLUTION = 101
GRID_SAMPLES = 1 << 14  # every accepted atom enters every grid cell
FLOAT_FORMAT = "%.17g"

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_DEGENERATE_REGION = 4


@dataclass
class JobSpec:
    command: str
    model: str
    dim: int
    payload: dict
    config: SolverConfig
    seed: int
    samples: int
    output_format: str
    extra: dict = field(default_factory=dict)


# --- Input parsing ---

def _is_number(value):
    return isinstance(value, (int, float, str)) and not isinstance(value, bool)


def _number(value, name):
    if not _is_number(value):
        raise ValidationError(f"expected a number, got {value!r}", name)
    try:
        number = float(value)
    except ValueError:
        raise ValidationError(f"not a decimal number: {value!r}", name) from None
    if not math.isfinite(number):
        raise ValidationError(f"number must be finite, got {value!r}", name)
    return number


def _complex(value, name):
    if _is_number(value):
        return complex(_number(value, name), 0.0)
    if isinstance(value, list) and len(value) == 2:
        return complex(_number(value[0], f"{name}[0]"), _number(value[1], f"{name}[1]"))
    raise ValidationError(f"expected a complex number as [re, im], got {value!r}", name)


def _is_pair(value):
    return isinstance(value, list) and len(value) == 2 and all(_is_number(v) for v in value)


def _point(raw, model, dim, name):
    """One point: a list of reals (poincare) or of [re, im] pairs (bergman).

    In the bergman model with m = 1 a bare [re, im] pair or a single number is
    also one point.
    """
    if model == "poincare":
        if not isinstance(raw, list):
            raise ValidationError(f"expected a list of coordinates, got {raw!r}", name)
        coords = np.array([_number(v, f"{name}[{k}]") for k, v in enumerate(raw)])
    elif _is_number(raw) or (_is_pair(raw) and dim in (None, 1)):
        coords = np.array([_complex(raw, name)])
    elif isinstance(raw, list):
        coords = np.array([_complex(v, f"{name}[{k}]") for k, v in enumerate(raw)], dtype=complex)
    else:
        raise ValidationError(f"expected a point, got {raw!r}", name)
    if dim is not None and coords.size != dim:
        raise ValidationError(f"expected {dim} coordinates, got {coords.size}", name)
    return coords


def _points(raw, model, dim, name="points"):
    if not isinstance(raw, list) or not raw:
        raise ValidationError("expected a nonempty list of points", name)
    points = [_point(p, model, dim, f"{name}[{k}]") for k, p in enumerate(raw)]
    if len({p.size for p in points}) != 1:
        raise ValidationError("all points must have the same dimension", name)
    return np.array(points)


def _measure(doc, model, dim):
    points = _points(doc.get("points"), model, dim)
    weights = doc.get("weights")
    if weights is not None:
        if not isinstance(weights, list):
            raise ValidationError("expected a list of weights", "weights")
        weights = [_number(w, f"weights[{k}]") for k, w in enumerate(weights)]
    return WeightedMeasure(points, weights, model)


def _matrix(raw, size, entry, name):
    if not (isinstance(raw, list) and len(raw) == size and all(isinstance(r, list) and len(r) == size for r in raw)):
        raise ValidationError(f"expected a {size}x{size} matrix", name)
    return np.array([[entry(v, f"{name}[{i}][{j}]") for j, v in enumerate(row)] for i, row in enumerate(raw)])


def _map(raw, model, dim, name="map"):
    """{"center": point, "matrix": orthogonal/unitary matrix} or, for the disk, {"center", "theta"}."""
    if not isinstance(raw, dict) or "center" not in raw:
        raise ValidationError("expected an object with a center", name)
    center = _point(raw["center"], model, dim, f"{name}.center")
    size = center.size
    if model == "poincare":
        matrix = None if "matrix" not in raw else _matrix(raw["matrix"], size, _number, f"{name}.matrix")
        return RealMobius(center, matrix)
    if "theta" in raw:
        if size != 1:
            raise ValidationError("theta only describes disk automorphisms (m = 1)", f"{name}.theta")
        return disk_automorphism(center[0], _number(raw["theta"], f"{name}.theta"))
    matrix = None if "matrix" not in raw else _matrix(raw["matrix"], size, _complex, f"{name}.matrix")
    return ComplexAutomorphism(center, matrix)


def _real_vector(raw, name):
    if not isinstance(raw, list) or not raw:
        raise ValidationError("expected a list of real coordinates", name)
    return np.array([_number(v, f"{name}[{k}]") for k, v in enumerate(raw)])


def _region(raw, model, dim, name="region"):
    """Region variants, all in real coordinates (R^2m for the bergman model)."""
    if not isinstance(raw, dict) or "variant" not in raw:
        raise ValidationError("expected an object with a variant", name)
    variant = raw["variant"]
    if variant == "ellipsoid":
        center = _real_vector(raw.get("center"), f"{name}.center")
        shape = _matrix(raw.get("shape"), center.size, _number, f"{name}.shape")
        region = ellipsoid(center, shape, model)
    elif variant == "ball":
        center = _real_vector(raw.get("center"), f"{name}.center")
        region = ball(center, _number(raw.get("radius"), f"{name}.radius"), model)
    elif variant == "mobius_image":
        inner = _region(raw.get("inner"), model, dim, f"{name}.inner")
        region = mobius_image(inner, _map(raw.get("map"), model, inner.dim, f"{name}.map"))
    elif variant == "intersection":
        parts = raw.get("parts")
        if not isinstance(parts, list) or not parts:
            raise ValidationError("expected a nonempty list of parts", f"{name}.parts")
        region = intersection(*(_region(p, model, dim, f"{name}.parts[{k}]") for k, p in enumerate(parts)))
    else:
        raise ValidationError(f"unknown variant {variant!r}", f"{name}.variant")
    if dim is not None and region.dim != dim:
        raise ValidationError(f"region of dimension {region.dim} in a job of dimension {dim}", name)
    return region


def _density(doc):
    try:
        return DensityKind(doc.get("density", DensityKind.HYPERBOLIC.value))
    except ValueError:
        raise ValidationError(f"unknown density {doc.get('density')!r}", "density") from None


# --- Output ---

def _format_point(point, model):
    point = np.asarray(point)
    if model == "poincare":
        return [float(v) for v in point]
    return [[float(z.real), float(z.imag)] for z in point]


def _finite(value):
    if value is None:
        return None
    if isinstance(value, np.ndarray):
        return [_finite(v) for v in value.tolist()]
    value = float(value)
    return value if math.isfinite(value) else None


def _result_document(job, result):
    doc = {
        "model": result.model,
        "dim": int(np.asarray(result.point).size),
        "points": [_format_point(result.point, result.model)],
        "barycenter": _format_point(result.point, result.model),
        "residual_norm": _finite(result.residual_norm),
        "potential": _finite(result.potential),
        "iterations": result.iterations,
        "converged": result.converged,
    }
    if result.standard_error is not None:
        doc.update(
            standard_error=_finite(result.standard_error),
            mass_estimate=_finite(result.mass_estimate),
            mass_standard_error=_finite(result.mass_standard_error),
            accepted=result.accepted,
            samples=job.samples,
            seed=job.seed,
            density=job.extra.get("density"),
        )
    doc["config"] = job.config.to_dict()
    return doc


def _result_frame(doc):
    row = {"model": doc["model"], "dim": doc["dim"]}
    if doc["model"] == "poincare":
        row.update({f"x{k}": v for k, v in enumerate(doc["barycenter"])})
    else:
        for k, (re, im) in enumerate(doc["barycenter"]):
            row.update({f"re{k}": re, f"im{k}": im})
    for key in ("residual_norm", "potential", "iterations", "converged", "mass_estimate", "mass_standard_error"):
        if key in doc:
            row[key] = doc[key]
    return pd.DataFrame([row])


def _emit(job, doc=None, frame=None, destination=None):
    if job.output_format == "csv":
        frame = frame if frame is not None else pd.DataFrame([doc])
        text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    else:
        text = json.dumps(doc, indent=2) + "\n"
    if destination:
        Path(destination).write_text(text)
    else:
        sys.stdout.write(text)


# --- Commands ---

def cmd_points(job, args):
    mu = _measure(job.payload, job.model, job.dim)
    try:
        result = barycenter(mu, job.config)
    except ConvergenceError as error:
        doc = _result_document(job, error.result)
        _emit(job, doc, _result_frame(doc), args.output)
        raise
    doc = _result_document(job, result)
    _emit(job, doc, _result_frame(doc), args.output)
    return EXIT_OK


def cmd_region(job, args):
    region = _region(job.payload.get("region"), job.model, job.dim)
    density = _density(job.payload)
    job.extra["density"] = density.value
    result = barycenter_region(region, density, job.config, job.samples, job.seed)
    doc = _result_document(job, result)
    _emit(job, doc, _result_frame(doc), args.output)
    return EXIT_OK


def cmd_invariance(job, args):
    transform = _map(job.payload.get("map"), job.model, job.dim)
    if "region" in job.payload:
        data = _region(job.payload["region"], job.model, job.dim)
        density = _density(job.payload)
    else:
        data = _measure(job.payload, job.model, job.dim)
        density = DensityKind.HYPERBOLIC
    report = verify_invariance(data, transform, job.config, density, job.samples, job.seed)
    doc = {
        "model": report.model,
        "dim": int(np.asarray(report.original).size),
        "original": _format_point(report.original, report.model),
        "mapped": _format_point(report.mapped, report.model),
        "transported": _format_point(report.transported, report.model),
        "defect": report.defect,
        "threshold": report.threshold,
        "passed": report.passed,
        "config": job.config.to_dict(),
    }
    _emit(job, doc, None, args.output)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_distance(job, args):
    x = _point(job.payload.get("x"), job.model, job.dim, "x")
    y = _point(job.payload.get("y"), job.model, job.dim, "y")
    if x.size != y.size:
        raise ValidationError(f"x has {x.size} coordinates and y has {y.size}", "y")
    if job.model == "poincare":
        point_type, distance, apply = RealPoint, poincare_distance, apply_mobius
    else:
        point_type, distance, apply = ComplexPoint, bergman_distance, apply_automorphism
    point_type(x), point_type(y)
    doc = {"model": job.model, "dim": int(x.size), "distance": float(distance(x, y))}
    if "map" in job.payload:
        transform = _map(job.payload["map"], job.model, x.size)
        doc["mapped_distance"] = float(distance(apply(transform, x), apply(transform, y)))
    _emit(job, doc, None, args.output)
    return EXIT_OK


def cmd_grid(job, args):
    if "region" in job.payload:
        region = _region(job.payload["region"], job.model, job.dim)
        samples = args.samples if args.samples is not None else job.payload.get("samples", GRID_SAMPLES)
        if isinstance(samples, bool) or not isinstance(samples, int):
            raise ValidationError(f"expected an integer, got {samples!r}", "samples")
        mu = sample_region(region, _density(job.payload), samples, job.seed).atoms
    else:
        mu = _measure(job.payload, job.model, job.dim)
    bounds = job.payload.get("bounds", list(DEFAULT_BOUNDS))
    if not isinstance(bounds, list) or len(bounds) != 4:
        raise ValidationError("expected [xmin, xmax, ymin, ymax]", "bounds")
    bounds = [_number(b, f"bounds[{k}]") for k, b in enumerate(bounds)]
    resolution = job.payload.get("resolution", DEFAULT_RESOLUTION)
    if isinstance(resolution, bool) or not isinstance(resolution, int):
        raise ValidationError(f"expected an integer, got {resolution!r}", "resolution")
    grid = potential_grid(mu, bounds, resolution)
    if job.output_format == "csv":
        _emit(job, frame=grid, destination=args.output)
    else:
        doc = {"model": mu.model, "dim": mu.dim, "grid": grid.to_dict(orient="records")}
        _emit(job, doc, destination=args.output)
    return EXIT_OK


HANDLERS = {
    "points": cmd_points,
    "region": cmd_region,
    "invariance": cmd_invariance,
    "distance": cmd_distance,
    "grid": cmd_grid,
}


# --- Entry point ---

def build_parser():
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--model", choices=sorted(MODEL_NAMES), help="ball model (default: from the input, else poincare)")
    shared.add_argument("--dim", type=int, help="n for poincare, m for bergman (default: inferred)")
    shared.add_argument("--tol", type=float, default=DEFAULTS.residual_tol, help=f"residual tolerance relative to total mass (default {DEFAULTS.residual_tol:g})")
    shared.add_argument("--max-iters", type=int, default=DEFAULTS.max_iters, help=f"fixed-point iteration cap (default {DEFAULTS.max_iters})")
    shared.add_argument("--seed", type=int, help=f"sampling seed (default: from the input, else {DEFAULTS.seed})")
    shared.add_argument("--samples", type=int, help=f"sample count for regions (default: from the input, else {DEFAULTS.samples}; {GRID_SAMPLES} for grid, whose cost grows with samples x resolution^2)")
    shared.add_argument("--format", choices=("json", "csv"), help="output format (default: csv for grid, json otherwise)")
    shared.add_argument("--input", help="job document (default: stdin)")
    shared.add_argument("--output", help="output file (default: stdout)")
    shared.add_argument("--verbose", action="store_true", help="log solver progress to stderr")

    parser = argparse.ArgumentParser(
        description="Conformal and holomorphic barycenters in hyperbolic balls.",
        epilog="solver defaults: " + json.dumps(DEFAULTS.to_dict()),
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("points", "barycenter of a weighted point set"),
        ("region", "barycenter of a sampled region"),
        ("invariance", "compare g(barycenter(data)) with barycenter(g(data))"),
        ("distance", "hyperbolic distance between two points"),
        ("grid", "potential on a planar grid"),
    ):
        commands.add_parser(name, parents=[shared], help=text, description=text)
    return parser


def _read_document(args):
    if args.input:
        name, text = args.input, Path(args.input).read_text()
    else:
        name, text = "stdin", sys.stdin.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as error:
        raise ValidationError(f"invalid JSON at line {error.lineno} column {error.colno}: {error.msg}", name) from None
    if not isinstance(doc, dict):
        raise ValidationError("the job document must be a JSON object", name)
    return doc


def _job(args, doc):
    names = [MODEL_NAMES.get(n) for n in (args.model, doc.get("model")) if n is not None]
    if None in names:
        raise ValidationError(f"unknown model {doc.get('model')!r}", "model")
    if len(set(names)) > 1:
        raise ValidationError(f"--model {args.model} conflicts with the document's {doc['model']!r}", "model")
    model = names[0] if names else "poincare"

    dim = args.dim if args.dim is not None else doc.get("dim")
    if dim is not None and (isinstance(dim, bool) or not isinstance(dim, int) or dim < 1):
        raise ValidationError(f"expected a positive integer, got {dim!r}", "dim")
    if args.dim is not None and doc.get("dim") not in (None, args.dim):
        raise ValidationError(f"--dim {args.dim} conflicts with the document's {doc['dim']}", "dim")

    seed = args.seed if args.seed is not None else doc.get("seed", DEFAULTS.seed)
    samples = args.samples if args.samples is not None else doc.get("samples", DEFAULTS.samples)
    for name, value in (("seed", seed), ("samples", samples)):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ValidationError(f"expected an integer, got {value!r}", name)

    config = SolverConfig(residual_tol=args.tol, max_iters=args.max_iters, seed=seed, samples=samples)
    output_format = args.format or ("csv" if args.command == "grid" else "json")
    return JobSpec(args.command, model, dim, doc, config, seed, samples, output_format)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as error:
        return EXIT_VALIDATION if error.code else EXIT_OK
    if args.verbose:
        logging.basicConfig(level=logging.DEBUG, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        job = _job(args, _read_document(args))
        return HANDLERS[job.command](job, args)
    except ValidationError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_VALIDATION
    except ConvergenceError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except DegenerateRegionError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_DEGENERATE_REGION
    except BarycenterError as error:
        print(f"error: {error}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as error:
        print(f"error: input: {error}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
