import numpy as np
import matplotlib.pyplot as plt
from matplotlib.backends.backend_pdf import PdfPages
from pathlib import Path

from ball_geometry import sample_ball_points
from bergman_geometry import from_real
from measure import DensityKind
from potential import WeightedMeasure, potential_grid
from solver import SolverConfig, barycenter, barycenter_region
from example_summary import ellipse_region, shifted_ellipse_region

# Config
OUTPUT_PDF = Path("potential_contour_plots.pdf")
RESOLUTION = 161
SAMPLES = 1 << 16
SEED = 1
LEVELS = 30
CLIP_QUANTILE = 0.9  # potentials blow up at the circle; clip the color scale


def datasets(seed=SEED):
    rng = np.random.default_rng(seed)
    return {
        "Three points 0, 1/2, i/2": WeightedMeasure.counting([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5]]),
        "Two points 0.3, 0.6": WeightedMeasure.counting([[0.3, 0.0], [0.6, 0.0]]),
        "Five weighted points (bergman, m = 1)": WeightedMeasure(
            from_real(sample_ball_points(rng, 5, 2, 0.8)), rng.uniform(0.5, 2.0, 5), "bergman"
        ),
    }


def _planar(points):
    points = np.asarray(points)
    if np.iscomplexobj(points):
        return np.column_stack([points[:, 0].real, points[:, 0].imag])
    return points


def _unit_circle(ax):
    angles = np.linspace(0.0, 2.0 * np.pi, 400)
    ax.plot(np.cos(angles), np.sin(angles), color='black', linewidth=0.8)
    ax.set_aspect('equal')
    ax.set_xlim(-1.05, 1.05)
    ax.set_ylim(-1.05, 1.05)
    ax.grid(True, linestyle='--', alpha=0.6)


def plot_potential(pdf, title, mu, resolution=RESOLUTION, cfg=None):
    grid = potential_grid(mu, resolution=resolution)
    result = barycenter(mu, cfg or SolverConfig())
    ceiling = grid['potential'].quantile(CLIP_QUANTILE)

    fig, ax = plt.subplots(figsize=(8, 8))
    contours = ax.tricontourf(grid['x'], grid['y'], grid['potential'].clip(upper=ceiling), levels=LEVELS, cmap='viridis')
    fig.colorbar(contours, ax=ax, shrink=0.8, label='potential')
    atoms = _planar(mu.points)
    ax.scatter(atoms[:, 0], atoms[:, 1], s=40 * mu.weights / mu.weights.max(), color='white', edgecolor='black', label='atoms', zorder=3)
    center = _planar(np.atleast_2d(result.point))[0]
    ax.scatter([center[0]], [center[1]], marker='x', s=80, color='red', label='barycenter', zorder=4)
    _unit_circle(ax)
    ax.set_title(title, fontsize=14)
    ax.legend(loc='lower left')
    fig.tight_layout()
    pdf.savefig(fig)
    plt.close(fig)
    return result


def plot_regions(pdf, samples=SAMPLES, seed=SEED, cfg=None):
    cfg = cfg or SolverConfig()
    inner, shifted = ellipse_region(), shifted_ellipse_region()
    centered = barycenter_region(inner, DensityKind.HYPERBOLIC, cfg, samples, seed)
    hyperbolic = barycenter_region(shifted, DensityKind.HYPERBOLIC, cfg, samples, seed)
    lebesgue = barycenter_region(shifted, DensityKind.LEBESGUE, cfg, samples, seed)

    fig, ax = plt.subplots(figsize=(8, 8))
    for region, label, color in ((inner, 'D', 'skyblue'), (shifted, 'D1 = h_1/2(D)', 'orange')):
        boundary = region.boundary_sample()
        ax.fill(boundary[:, 0], boundary[:, 1], alpha=0.5, color=color, label=label)
    ax.scatter([centered.point[0]], [centered.point[1]], marker='x', s=80, color='blue', label='D, hyperbolic barycenter')
    ax.scatter([hyperbolic.point[0]], [hyperbolic.point[1]], marker='x', s=80, color='red', label='D1, hyperbolic barycenter')
    ax.scatter([lebesgue.point[0]], [lebesgue.point[1]], marker='+', s=80, color='green', label='D1, Lebesgue barycenter')
    ax.axhline(0, color='black', linewidth=0.8, linestyle='-')
    ax.axvline(0, color='black', linewidth=0.8, linestyle='-')
    _unit_circle(ax)
    ax.set_title("Ellipse D and its image D1 with barycenters", fontsize=14)
    ax.legend(loc='lower left')
    fig.tight_layout()
    pdf.savefig(fig)
    plt.close(fig)
    return centered, hyperbolic, lebesgue


def main(output_pdf=OUTPUT_PDF, resolution=RESOLUTION, samples=SAMPLES, seed=SEED):
    print(f"Generating contour plots to {output_pdf}...")
    with PdfPages(output_pdf) as pdf:
        for title, mu in datasets(seed).items():
            print(f"  Plotting {title}...")
            plot_potential(pdf, title, mu, resolution)
        print("  Plotting regions D and D1...")
        plot_regions(pdf, samples, seed)
    print(f"Done. PDF saved to {Path(output_pdf).absolute()}")


if __name__ == "__main__":
    main()
