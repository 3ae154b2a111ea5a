use super::closed_loop::Trajectory;
use super::compare::Comparison;
use super::metrics::ReferenceOrbit;
use super::{ExperimentError, Result};
use plotters::prelude::*;
use std::path::{Path, PathBuf};

const SIZE: (u32, u32) = (900, 420);
const PALETTE: [RGBColor; 4] = [BLUE, RED, GREEN, MAGENTA];

fn plot_err<E: std::fmt::Display>(e: E) -> ExperimentError {
    ExperimentError::Plot(e.to_string())
}

struct Series {
    label: String,
    points: Vec<(f64, f64)>,
    color: RGBColor,
    dashed: bool,
}

fn series(label: impl Into<String>, points: Vec<(f64, f64)>, color: RGBColor, dashed: bool) -> Series {
    Series {
        label: label.into(),
        points,
        color,
        dashed,
    }
}

fn bounds(all: &[Series]) -> (f64, f64, f64, f64) {
    let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for s in all {
        for &(x, y) in &s.points {
            if !y.is_finite() {
                continue;
            }
            b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
        }
    }
    if !(b.0 < b.1) {
        b.1 = b.0 + 1.0;
    }
    if !(b.2 < b.3) {
        b.2 -= 1.0;
        b.3 += 1.0;
    }
    let pad = 0.05 * (b.3 - b.2);
    (b.0, b.1, b.2 - pad, b.3 + pad)
}

fn line_chart(path: &Path, title: &str, y_label: &str, all: &[Series]) -> Result<PathBuf> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let (x0, x1, y0, y1) = bounds(all);
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 20))
        .margin(10)
        .x_label_area_size(35)
        .y_label_area_size(55)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("t [s]")
        .y_desc(y_label)
        .draw()
        .map_err(plot_err)?;
    for s in all {
        let style = ShapeStyle::from(&s.color).stroke_width(1);
        if s.dashed {
            chart
                .draw_series(DashedLineSeries::new(s.points.iter().copied(), 6, 4, style))
                .map_err(plot_err)?
                .label(s.label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], style));
        } else {
            chart
                .draw_series(LineSeries::new(s.points.iter().copied(), style))
                .map_err(plot_err)?
                .label(s.label.clone())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], style));
        }
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)?;
    Ok(path.to_path_buf())
}

fn column(traj: &Trajectory, f: impl Fn(&super::StepRecord) -> f64) -> Vec<(f64, f64)> {
    traj.records.iter().map(|r| (r.t, f(r))).collect()
}

/// States with the orbit overlay, `u`, `S` and `k_hat`.
pub fn trajectory_plots(traj: &Trajectory, orbit: Option<&ReferenceOrbit>, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for c in 0..traj.n {
        let mut all = vec![series(format!("x{}", c + 1), column(traj, |r| r.x[c]), PALETTE[0], false)];
        if let Some(o) = orbit {
            let upo = traj
                .records
                .iter()
                .filter(|r| r.t >= traj.t_on)
                .map(|r| (r.t, o.sample(r.t)[c]))
                .collect();
            all.push(series("UPO", upo, PALETTE[1], true));
        }
        let name = format!("x{}", c + 1);
        out.push(line_chart(&dir.join(format!("state_{name}.svg")), &name, &name, &all)?);
    }
    out.push(line_chart(
        &dir.join("control.svg"),
        "control input",
        "u",
        &[series("u", column(traj, |r| r.u), PALETTE[0], false)],
    )?);
    out.push(line_chart(
        &dir.join("sliding_surface.svg"),
        "sliding surface",
        "S",
        &[series("S", column(traj, |r| r.s), PALETTE[0], false)],
    )?);
    out.push(line_chart(
        &dir.join("k_hat.svg"),
        "estimated upper bound",
        "k_hat",
        &[series("k_hat", column(traj, |r| r.k_hat), PALETTE[0], false)],
    )?);
    Ok(out)
}

pub fn error_plot(cmp: &Comparison, dir: &Path) -> Result<PathBuf> {
    let mut all = Vec::new();
    for (c, e) in cmp.adaptive_error.iter().enumerate() {
        let pts = cmp.times.iter().copied().zip(e.iter().copied()).collect();
        all.push(series(format!("adaptive e{}", c + 1), pts, PALETTE[c % 2], false));
    }
    for (c, e) in cmp.linear_error.iter().enumerate() {
        let pts = cmp.times.iter().copied().zip(e.iter().copied()).collect();
        all.push(series(format!("linear e{}", c + 1), pts, PALETTE[2 + c % 2], true));
    }
    line_chart(&dir.join("tracking_error.svg"), "UPO tracking error", "x - x_upo", &all)
}
