import streamlit as st
import pandas as pd
import numpy as np
import altair as alt

from ball_geometry import RealMobius
from bergman_geometry import disk_automorphism
from exceptions import BarycenterError
from measure import DensityKind, ellipsoid, mobius_image, sample_region
from potential import WeightedMeasure, potential_grid
from solver import SolverConfig, barycenter, barycenter_region, verify_invariance

# Config
DEFAULT_POINTS = pd.DataFrame({'x': [0.0, 0.5, 0.0], 'y': [0.0, 0.0, 0.5], 'weight': [1.0, 1.0, 1.0]})
ELLIPSE_SHAPE = [[4.0, 0.0], [0.0, 9.0]]
GRID_RESOLUTION = 61
SCATTER_POINTS = 3000
CLIP_QUANTILE = 0.9
SAMPLE_CHOICES = [1 << 12, 1 << 14, 1 << 16, 1 << 18]

st.set_page_config(page_title="Hyperbolic Barycenters", layout="wide")


def _measure(rows, model):
    points = np.array([[x, y] for x, y, _ in rows])
    weights = [w for _, _, w in rows]
    if model == "bergman":
        points = (points[:, 0] + 1j * points[:, 1])[:, None]
    return WeightedMeasure(points, weights, model)


def _planar(point):
    point = np.asarray(point)
    if np.iscomplexobj(point):
        return float(point[0].real), float(point[0].imag)
    return float(point[0]), float(point[1])


@st.cache_data
def solve_points(rows, model):
    mu = _measure(rows, model)
    result = barycenter(mu, SolverConfig())
    grid = potential_grid(mu, resolution=GRID_RESOLUTION).round({'x': 6, 'y': 6})
    grid['potential'] = grid['potential'].clip(upper=grid['potential'].quantile(CLIP_QUANTILE))
    x, y = _planar(result.point)
    return {'x': x, 'y': y, 'residual': result.residual_norm, 'potential': result.potential, 'iterations': result.iterations}, grid


@st.cache_data
def solve_region(shift, density, samples, seed):
    region = ellipsoid([0.0, 0.0], ELLIPSE_SHAPE)
    if shift:
        region = mobius_image(region, RealMobius([shift, 0.0]))
    result = barycenter_region(region, DensityKind(density), SolverConfig(), samples, seed)
    atoms = sample_region(region, DensityKind(density), samples, seed).atoms
    rng = np.random.default_rng(seed)
    keep = rng.choice(atoms.size, size=min(SCATTER_POINTS, atoms.size), replace=False)
    scatter = pd.DataFrame({'x': atoms.points[keep, 0], 'y': atoms.points[keep, 1], 'weight': atoms.weights[keep]})
    summary = {
        'x': float(result.point[0]),
        'y': float(result.point[1]),
        'se_x': float(result.standard_error[0]),
        'se_y': float(result.standard_error[1]),
        'mass': result.mass_estimate,
        'mass_se': result.mass_standard_error,
        'accepted': result.accepted,
    }
    return summary, scatter


@st.cache_data
def check_invariance(rows, center, theta):
    mu = _measure(rows, "bergman")
    report = verify_invariance(mu, disk_automorphism(complex(*center), theta), SolverConfig())
    return pd.DataFrame({
        'Point': ['barycenter', 'barycenter of mapped set', 'mapped barycenter'],
        'Re': [_planar(p)[0] for p in (report.original, report.mapped, report.transported)],
        'Im': [_planar(p)[1] for p in (report.original, report.mapped, report.transported)],
    }), report.defect, report.threshold, report.passed


def _rows(df):
    df = df.dropna()
    return tuple((float(r.x), float(r.y), float(r.weight)) for r in df.itertuples())


def main():
    st.title("Conformal & Holomorphic Barycenters")
    st.markdown("Barycenters of point sets and regions in the hyperbolic disk, as zeros of the residual field.")

    tab1, tab2, tab3 = st.tabs(["Point sets", "Regions", "Invariance"])

    with tab1:
        st.header("Weighted point sets")
        c1, c2 = st.columns([1, 2])
        with c1:
            model = st.selectbox("Model", ["poincare", "bergman"])
            edited = st.data_editor(DEFAULT_POINTS, num_rows="dynamic", key="points")
        rows = _rows(edited)
        if not rows:
            st.warning("Add at least one point.")
            st.stop()
        try:
            summary, grid = solve_points(rows, model)
        except BarycenterError as error:
            st.error(str(error))
            st.stop()
        with c1:
            st.dataframe(pd.DataFrame([summary]).style.format({
                'x': "{:.10f}",
                'y': "{:.10f}",
                'residual': "{:.2e}",
                'potential': "{:.6f}",
            }), use_container_width=True)
        with c2:
            heatmap = alt.Chart(grid).mark_rect().encode(
                x=alt.X('x:O', axis=None),
                y=alt.Y('y:O', axis=None, sort='descending'),
                color=alt.Color('potential:Q', scale=alt.Scale(scheme='viridis'), title='Potential'),
                tooltip=['x', 'y', 'potential'],
            ).properties(height=600, width=600)
            st.altair_chart(heatmap, use_container_width=False)
            points = pd.DataFrame(rows, columns=['x', 'y', 'weight'])
            points['Label'] = 'atom'
            points = pd.concat([points, pd.DataFrame([{'x': summary['x'], 'y': summary['y'], 'weight': 1.0, 'Label': 'barycenter'}])])
            overlay = alt.Chart(points).mark_circle(size=80).encode(
                x=alt.X('x', scale=alt.Scale(domain=[-1, 1]), title='x'),
                y=alt.Y('y', scale=alt.Scale(domain=[-1, 1]), title='y'),
                color='Label',
                tooltip=['x', 'y', 'weight'],
            ).properties(height=600, width=600).interactive()
            st.altair_chart(overlay, use_container_width=False)

    with tab2:
        st.header("Ellipse 4x² + 9y² < 1 and its Möbius images")
        c1, c2, c3, c4 = st.columns(4)
        shift = c1.slider("Shift a (region h_a(D))", 0.0, 0.6, 0.5, 0.05)
        density = c2.radio("Density", [d.value for d in DensityKind], index=1)
        samples = c3.selectbox("Samples", SAMPLE_CHOICES, index=2)
        seed = c4.number_input("Seed", min_value=0, value=1, step=1)
        summary, scatter = solve_region(shift, density, samples, int(seed))
        st.dataframe(pd.DataFrame([summary]).style.format({
            'x': "{:.6f}",
            'y': "{:.6f}",
            'se_x': "{:.1e}",
            'se_y': "{:.1e}",
            'mass': "{:.6f}",
            'mass_se': "{:.1e}",
        }), use_container_width=True)
        chart = alt.Chart(scatter).mark_circle(size=8).encode(
            x=alt.X('x', scale=alt.Scale(domain=[-1, 1])),
            y=alt.Y('y', scale=alt.Scale(domain=[-1, 1])),
            color=alt.Color('weight', title='Weight'),
        ).properties(height=600)
        marker = alt.Chart(pd.DataFrame([summary])).mark_point(shape='cross', size=200, color='red').encode(x='x', y='y')
        st.altair_chart(chart + marker, use_container_width=True)

    with tab3:
        st.header("Holomorphic invariance in the disk")
        st.markdown("Compares g(barycenter(S)) with barycenter(g(S)) for the point set of the first tab.")
        c1, c2, c3 = st.columns(3)
        re = c1.slider("Re a", -0.9, 0.9, 0.3, 0.05)
        im = c2.slider("Im a", -0.9, 0.9, 0.0, 0.05)
        theta = c3.slider("Rotation θ", 0.0, float(2 * np.pi), 0.0, 0.1)
        if abs(complex(re, im)) >= 0.95:
            st.warning("Choose |a| < 0.95.")
            return
        table, defect, threshold, passed = check_invariance(_rows(edited), (re, im), theta)
        st.dataframe(table.style.format({'Re': "{:.12f}", 'Im': "{:.12f}"}), use_container_width=True)
        if passed:
            st.success(f"Defect {defect:.2e} within {threshold:.0e}")
        else:
            st.error(f"Defect {defect:.2e} exceeds {threshold:.0e}")


if __name__ == "__main__":
    main()
