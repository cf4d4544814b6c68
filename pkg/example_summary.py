import numpy as np
import pandas as pd
from pathlib import Path
from scipy import integrate, optimize

from ball_geometry import RealMobius, apply_mobius
from measure import DensityKind, ball, ellipsoid, integrate_region, mobius_image, sample_region
from potential import WeightedMeasure
from solver import (
    SolverConfig,
    barycenter_conformal,
    barycenter_holomorphic,
    barycenter_region,
    three_point_reference,
    two_point_closed_form,
)

# Config
OUTPUT_CSV = Path("worked_examples_summary.csv")
OUTPUT_PDF = Path("worked_examples_summary.pdf")
SAMPLES = 1 << 18
INTEGRAL_SAMPLES = 1 << 20
SEED = 1
ELLIPSE_SHAPE = np.diag([4.0, 9.0])  # 4x^2 + 9y^2 < 1
SHIFT = 0.5
THREE_POINTS = [0.0, 0.5, 0.5j]
TWO_POINTS = (0.3, 0.6)
BALL_RADIUS = 0.5


def ellipse_region():
    return ellipsoid([0.0, 0.0], ELLIPSE_SHAPE)


def shifted_ellipse_region():
    """D1 = h_{1/2}(D)."""
    return mobius_image(ellipse_region(), RealMobius([SHIFT, 0.0]))


def _disk_map(a, z):
    return (a - z) / (1.0 - np.conj(a) * z)


def _ellipse_quad(f):
    """Integral of f(x, y) over the ellipse D by nested adaptive quadrature."""
    half_height = lambda x: np.sqrt(max(0.0, 1.0 - 4.0 * x * x)) / 3.0
    value, _ = integrate.dblquad(lambda y, x: f(x, y), -0.5, 0.5, lambda x: -half_height(x), half_height, epsabs=1e-10, epsrel=1e-10)
    return value


def _shift_jacobian(x, y):
    # |d/dw h_{1/2}(w)|^2, the area factor of z = h_{1/2}(w)
    return ((1.0 - SHIFT**2) / abs(1.0 - SHIFT * complex(x, y)) ** 2) ** 2


def shifted_ellipse_integral_oracle():
    """Re of the integral of h_{1/2}(z) dλ(z) over D1, pulled back to D (the imaginary part is 0)."""
    return _ellipse_quad(lambda x, y: x * _shift_jacobian(x, y))


def shifted_ellipse_area_oracle():
    return _ellipse_quad(_shift_jacobian)


def shifted_ellipse_lebesgue_barycenter_oracle():
    """Real b with the integral of Re h_b(z) dλ(z) over D1 equal to 0 (D1 is symmetric about the real axis)."""

    def condition(b):
        return _ellipse_quad(lambda x, y: _disk_map(b, _disk_map(SHIFT, complex(x, y))).real * _shift_jacobian(x, y))

    return optimize.brentq(condition, 0.0, 0.6, xtol=1e-12)


def _row(example, expected, computed, standard_error=np.nan):
    return {
        "example": example,
        "expected": float(expected),
        "computed": float(computed),
        "abs_error": abs(float(computed) - float(expected)),
        "standard_error": float(standard_error),
    }


def run_examples(samples=SAMPLES, integral_samples=INTEGRAL_SAMPLES, seed=SEED, cfg=None):
    cfg = cfg or SolverConfig()
    rows = []

    print("Solving the three-point example...")
    reference = three_point_reference()
    planar = np.array([[z.real, z.imag] for z in THREE_POINTS])
    conformal = barycenter_conformal(WeightedMeasure.counting(planar), cfg)
    holomorphic = barycenter_holomorphic(WeightedMeasure.counting(np.array(THREE_POINTS)[:, None], "bergman"), cfg)
    rows.append(_row("three points: conformal x", reference.real, conformal.point[0]))
    rows.append(_row("three points: conformal y", reference.imag, conformal.point[1]))
    rows.append(_row("three points: holomorphic Re", reference.real, holomorphic.point[0].real))
    rows.append(_row("three points: holomorphic Im", reference.imag, holomorphic.point[0].imag))
    rows.append(_row("three points: |conformal - holomorphic|", 0.0, np.hypot(*(conformal.point - [holomorphic.point[0].real, holomorphic.point[0].imag]))))

    print("Solving the two-point example...")
    z1, z2 = TWO_POINTS
    closed_form = two_point_closed_form(z1, z2)
    solved = barycenter_holomorphic(WeightedMeasure.counting(np.array([[z1], [z2]], dtype=complex), "bergman"), cfg)
    rows.append(_row("two points: closed form vs solver", closed_form.real, solved.point[0].real))

    print("Estimating region masses...")
    area = sample_region(ellipse_region(), DensityKind.LEBESGUE, samples, seed)
    rows.append(_row("area of D", np.pi / 6.0, area.total_mass_estimate, area.standard_error))
    hyperbolic_ball = sample_region(ball([0.0, 0.0], BALL_RADIUS), DensityKind.HYPERBOLIC, samples, seed)
    rows.append(_row(f"hyperbolic mass of ball(0, {BALL_RADIUS})", np.pi * BALL_RADIUS**2 / (1.0 - BALL_RADIUS**2), hyperbolic_ball.total_mass_estimate, hyperbolic_ball.standard_error))
    shifted_area = sample_region(shifted_ellipse_region(), DensityKind.LEBESGUE, samples, seed)
    rows.append(_row("area of D1", shifted_ellipse_area_oracle(), shifted_area.total_mass_estimate, shifted_area.standard_error))

    print("Integrating h_1/2 over D1...")
    shift = RealMobius([SHIFT, 0.0])
    estimate = integrate_region(shifted_ellipse_region(), DensityKind.LEBESGUE, lambda x: apply_mobius(shift, x), integral_samples, seed)
    rows.append(_row("integral of h_1/2 over D1 (x)", shifted_ellipse_integral_oracle(), estimate.value[0], estimate.standard_error[0]))
    rows.append(_row("integral of h_1/2 over D1 (y)", 0.0, estimate.value[1], estimate.standard_error[1]))

    print("Solving region barycenters...")
    centered = barycenter_region(ellipse_region(), DensityKind.HYPERBOLIC, cfg, samples, seed)
    rows.append(_row("D, hyperbolic: x", 0.0, centered.point[0], centered.standard_error[0]))
    shifted = barycenter_region(shifted_ellipse_region(), DensityKind.HYPERBOLIC, cfg, samples, seed)
    rows.append(_row("D1, hyperbolic: x", SHIFT, shifted.point[0], shifted.standard_error[0]))
    lebesgue = barycenter_region(shifted_ellipse_region(), DensityKind.LEBESGUE, cfg, samples, seed)
    rows.append(_row("D1, Lebesgue: x", shifted_ellipse_lebesgue_barycenter_oracle(), lebesgue.point[0], lebesgue.standard_error[0]))

    return pd.DataFrame(rows)


def write_pdf(summary, output_pdf):
    import matplotlib.pyplot as plt

    print(f"Generating PDF report to {output_pdf}...")
    fig, ax = plt.subplots(figsize=(14, 0.5 * len(summary) + 2))
    ax.axis('off')
    ax.axis('tight')

    display_df = summary.copy()
    for col in ["expected", "computed"]:
        display_df[col] = display_df[col].apply(lambda x: f"{x:.8f}")
    for col in ["abs_error", "standard_error"]:
        display_df[col] = display_df[col].apply(lambda x: f"{x:.2e}" if pd.notnull(x) else "-")
    display_df = display_df.rename(columns={
        "example": "Example",
        "expected": "Expected",
        "computed": "Computed",
        "abs_error": "Abs Error",
        "standard_error": "Std Error",
    })

    table = ax.table(cellText=display_df.values, colLabels=display_df.columns, cellLoc='center', loc='center')
    table.auto_set_font_size(False)
    table.set_fontsize(8)
    table.scale(1.0, 1.6)
    for (row, col), cell in table.get_celld().items():
        if row == 0:
            cell.set_text_props(weight='bold')
            cell.set_facecolor('#e6e6e6')

    plt.title("Worked Examples: Expected vs Computed", fontsize=16, pad=20)
    plt.savefig(output_pdf, bbox_inches='tight', pad_inches=0.5)
    plt.close(fig)


def main(output_csv=OUTPUT_CSV, output_pdf=OUTPUT_PDF, samples=SAMPLES, integral_samples=INTEGRAL_SAMPLES, seed=SEED):
    summary = run_examples(samples, integral_samples, seed)

    print("\n--- Worked Examples Summary ---")
    print(summary.to_string(index=False, float_format="%.8f"))

    print(f"\nSaving to {output_csv}...")
    summary.to_csv(output_csv, index=False, float_format="%.12g")
    write_pdf(summary, output_pdf)
    print(f"PDF saved to {Path(output_pdf).absolute()}")
    return summary


if __name__ == "__main__":
    main()
