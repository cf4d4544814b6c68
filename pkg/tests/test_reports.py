"""
Report scripts: quadrature oracles, the worked-examples table and the contour PDF.
"""

import numpy as np
import pandas as pd
import pytest

import example_summary
import potential_contour_plots


def test_quadrature_oracles():
    assert example_summary.shifted_ellipse_integral_oracle() == pytest.approx(0.042636, abs=1e-4)
    assert example_summary.shifted_ellipse_lebesgue_barycenter_oracle() == pytest.approx(0.3966, abs=1e-3)
    # |h_1/2'| <= 1 / 0.75 on D
    area = example_summary.shifted_ellipse_area_oracle()
    assert 0.0 < area < np.pi / 6.0 / 0.75**2


def test_worked_examples_summary(tmp_path):
    csv_path, pdf_path = tmp_path / "summary.csv", tmp_path / "summary.pdf"
    summary = example_summary.main(csv_path, pdf_path, samples=1 << 12, integral_samples=1 << 12, seed=1)
    assert csv_path.exists() and pdf_path.exists()
    assert len(summary) == 14
    assert list(summary.columns) == ["example", "expected", "computed", "abs_error", "standard_error"]

    rows = summary.set_index("example")
    three_point = rows.loc[rows.index.str.startswith("three points")]
    assert (three_point.abs_error < 1e-9).all()
    assert rows.loc["two points: closed form vs solver", "abs_error"] < 1e-9
    assert rows.loc["D1, hyperbolic: x", "abs_error"] < 0.05
    assert len(pd.read_csv(csv_path)) == 14


def test_contour_plots(tmp_path):
    pdf_path = tmp_path / "contours.pdf"
    potential_contour_plots.main(pdf_path, resolution=21, samples=1 << 12, seed=1)
    assert pdf_path.stat().st_size > 0
