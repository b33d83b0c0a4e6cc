//! SVG figures: grid heat-maps, per-size cut curves and collapse overlays.

use std::path::Path;
use std::str::FromStr;

use plotters::prelude::*;

use crate::analysis::{data_collapse, Curve, SearchBox};
use crate::error::{Error, Result};
use crate::harness::{curves_from_rows, parse_csv, Cut, Observable, ResultRow};

const SIZE: (u32, u32) = (720, 540);
const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(255, 127, 14),
    RGBColor(44, 160, 44),
    RGBColor(214, 39, 40),
    RGBColor(148, 103, 189),
    RGBColor(140, 86, 75),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Heatmap,
    Curves,
    Collapse,
}

impl FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "heatmap" | "heat-map" => Ok(PlotKind::Heatmap),
            "curves" | "cut" => Ok(PlotKind::Curves),
            "collapse" => Ok(PlotKind::Collapse),
            other => Err(Error::Parse(format!("unknown plot kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct PlotOptions {
    pub observable: Observable,
    pub half_cycle: bool,
    /// `(p_c, ν)` for the collapse overlay; fitted from the data when absent.
    pub collapse: Option<(f64, f64)>,
}

impl Default for PlotOptions {
    fn default() -> Self {
        Self { observable: Observable::STopo, half_cycle: false, collapse: None }
    }
}

fn plot_err<E: std::fmt::Display>(e: E) -> Error {
    Error::Plot(e.to_string())
}

/// Reads a result CSV and writes one figure.
pub fn emit_plot(csv: &Path, kind: PlotKind, opts: &PlotOptions, out: &Path) -> Result<()> {
    let rows = parse_csv(csv)?;
    match kind {
        PlotKind::Heatmap => heatmap_svg(&rows, opts.observable, opts.half_cycle, out),
        PlotKind::Curves => curves_svg(&rows, opts.observable, opts.half_cycle, out),
        PlotKind::Collapse => {
            let curves = curves_from_rows(&rows, opts.observable, opts.half_cycle);
            let (p_c, nu) = match opts.collapse {
                Some(v) => v,
                None => {
                    let r = data_collapse(&curves, &SearchBox::default())?;
                    (r.p_c, r.nu)
                }
            };
            collapse_svg(&curves, p_c, nu, &opts.observable.label(), out)
        }
    }
}

/// Blue → white → red.
fn diverging(t: f64) -> RGBColor {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64, s: f64| (a + (b - a) * s).round() as u8;
    if t < 0.5 {
        let s = t / 0.5;
        RGBColor(lerp(33.0, 247.0, s), lerp(102.0, 247.0, s), lerp(172.0, 247.0, s))
    } else {
        let s = (t - 0.5) / 0.5;
        RGBColor(lerp(247.0, 178.0, s), lerp(247.0, 24.0, s), lerp(247.0, 43.0, s))
    }
}

fn grid_step(values: &mut Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.dedup();
    values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min).min(1.0)
}

/// Heat-map over the unit square for the largest lattice in the rows, with
/// the self-duality line `p_k = 1 − p_j`.
pub fn heatmap_svg(rows: &[ResultRow], obs: Observable, half_cycle: bool, out: &Path) -> Result<()> {
    let (lx, ly) =
        rows.iter().map(|r| (r.lx, r.ly)).max_by_key(|&(a, b)| a * b).ok_or_else(|| Error::Plot("no rows".into()))?;
    let cells: Vec<(f64, f64, f64)> = rows
        .iter()
        .filter(|r| r.lx == lx && r.ly == ly && r.half_cycle == half_cycle)
        .filter_map(|r| obs.value(r).map(|(v, _)| (r.p_j, r.p_k, v)))
        .collect();
    if cells.is_empty() {
        return Err(Error::Plot(format!("no {} values for ({lx},{ly})", obs.label())));
    }
    let dj = grid_step(&mut cells.iter().map(|c| c.0).collect());
    let dk = grid_step(&mut cells.iter().map(|c| c.1).collect());
    let (dj, dk) = (if dj.is_finite() { dj } else { 1.0 }, if dk.is_finite() { dk } else { 1.0 });
    let lo = cells.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    let hi = cells.iter().map(|c| c.2).fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };

    let root = SVGBackend::new(out, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let caption = format!("{} on ({lx},{ly}), colour range [{lo:.3}, {hi:.3}]", obs.label());
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(0f64..1f64, 0f64..1f64)
        .map_err(plot_err)?;
    chart.configure_mesh().disable_mesh().x_desc("p_J").y_desc("p_K").draw().map_err(plot_err)?;
    chart
        .draw_series(cells.iter().map(|&(pj, pk, v)| {
            let x = ((pj - dj / 2.0).max(0.0), (pj + dj / 2.0).min(1.0));
            let y = ((pk - dk / 2.0).max(0.0), (pk + dk / 2.0).min(1.0));
            Rectangle::new([(x.0, y.0), (x.1, y.1)], diverging((v - lo) / span).filled())
        }))
        .map_err(plot_err)?;
    chart
        .draw_series(LineSeries::new([(0.0, 1.0), (1.0, 0.0)], BLACK.stroke_width(2)))
        .map_err(plot_err)?
        .label("p_K = 1 - p_J")
        .legend(|(x, y)| PathElement::new([(x, y), (x + 20, y)], BLACK));
    chart.configure_series_labels().background_style(WHITE).border_style(BLACK).draw().map_err(plot_err)?;
    root.present().map_err(plot_err)
}

fn bounds(curves: &[Curve], x: impl Fn(&Curve, f64) -> f64) -> ((f64, f64), (f64, f64)) {
    let mut xr = (f64::INFINITY, f64::NEG_INFINITY);
    let mut yr = (f64::INFINITY, f64::NEG_INFINITY);
    for c in curves {
        for &(p, y, e) in &c.points {
            let xv = x(c, p);
            xr = (xr.0.min(xv), xr.1.max(xv));
            yr = (yr.0.min(y - e), yr.1.max(y + e));
        }
    }
    let pad = |(a, b): (f64, f64)| {
        let d = if b > a { 0.05 * (b - a) } else { 0.5 };
        (a - d, b + d)
    };
    (pad(xr), pad(yr))
}

fn draw_curves(
    curves: &[Curve],
    x: impl Fn(&Curve, f64) -> f64 + Copy,
    caption: &str,
    x_desc: &str,
    y_desc: &str,
    out: &Path,
) -> Result<()> {
    if curves.iter().all(|c| c.points.is_empty()) {
        return Err(Error::Plot("no points to draw".into()));
    }
    let ((x0, x1), (y0, y1)) = bounds(curves, x);
    let root = SVGBackend::new(out, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption(caption, ("sans-serif", 18))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(plot_err)?;
    chart.configure_mesh().x_desc(x_desc).y_desc(y_desc).draw().map_err(plot_err)?;
    for (i, c) in curves.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(c.points.iter().map(|&(p, y, _)| (x(c, p), y)), color.stroke_width(2)))
            .map_err(plot_err)?
            .label(format!("L = {:.2}", c.l))
            .legend(move |(px, py)| PathElement::new([(px, py), (px + 20, py)], color.stroke_width(2)));
        chart
            .draw_series(
                c.points.iter().map(|&(p, y, e)| ErrorBar::new_vertical(x(c, p), y - e, y, y + e, color.filled(), 6)),
            )
            .map_err(plot_err)?;
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::UpperRight)
        .background_style(WHITE)
        .border_style(BLACK)
        .draw()
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}

/// Observable versus the scan coordinate, one errorbar curve per size.
pub fn curves_svg(rows: &[ResultRow], obs: Observable, half_cycle: bool, out: &Path) -> Result<()> {
    let curves = curves_from_rows(rows, obs, half_cycle);
    let cut = rows.first().map_or(Cut::I, |r| r.cut);
    let x_desc = match cut {
        Cut::Ii | Cut::Vi => "p_K",
        _ => "p_J",
    };
    let variant = if half_cycle { "half cycle" } else { "full cycles" };
    let caption = format!("{} along cut ({cut}), {variant}", obs.label());
    draw_curves(&curves, |_, p| p, &caption, x_desc, &obs.label(), out)
}

/// Curves against `(p − p_c)·L^{1/ν}`.
pub fn collapse_svg(curves: &[Curve], p_c: f64, nu: f64, y_desc: &str, out: &Path) -> Result<()> {
    if !(nu > 0.0) {
        return Err(Error::Plot(format!("nu must be positive, got {nu}")));
    }
    let caption = format!("collapse at p_c = {p_c:.4}, nu = {nu:.3}");
    draw_curves(curves, |c, p| (p - p_c) * c.l.powf(1.0 / nu), &caption, "(p - p_c) L^(1/nu)", y_desc, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::Model;

    fn row(cut: Cut, pj: f64, pk: f64, lx: usize, v: f64) -> ResultRow {
        ResultRow {
            model: Model::FsMoc,
            cut,
            p_j: pj,
            p_k: pk,
            p_zx: 0.5,
            lx,
            ly: 5,
            n_t: 10,
            half_cycle: false,
            n_s: 10,
            s_topo_mean: Some(v),
            s_topo_sem: Some(0.05),
            bmi_mean: Some(0.0),
            bmi_sem: Some(0.0),
            wilson_len: None,
            wilson_mean: None,
            wilson_sem: None,
        }
    }

    #[test]
    fn heatmap_has_unit_axes_and_diagonal() {
        let dir = tempfile::tempdir().unwrap();
        let mut rows = Vec::new();
        for i in 0..=4 {
            for j in 0..=4 {
                let (pj, pk) = (i as f64 / 4.0, j as f64 / 4.0);
                rows.push(row(Cut::Grid, pj, pk, 8, -(1.0 - pj) * pk));
            }
        }
        let out = dir.path().join("h.svg");
        heatmap_svg(&rows, Observable::STopo, false, &out).unwrap();
        let svg = std::fs::read_to_string(&out).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("p_K = 1 - p_J"));
        assert!(svg.contains("\n0.0\n"));
        assert!(svg.contains("\n1.0\n"));
        assert!(heatmap_svg(&rows, Observable::Wilson(None), false, &out).is_err());
    }

    #[test]
    fn curves_and_collapse_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let mut rows = Vec::new();
        for lx in [8usize, 10, 12] {
            let l = ((lx * 5) as f64).sqrt();
            for i in 0..11 {
                let p = 0.15 + 0.02 * i as f64;
                rows.push(row(Cut::I, p, 1.0, lx, -(0.5 - 0.5 * ((p - 0.25) * l).tanh())));
            }
        }
        let csv = dir.path().join("r.csv");
        crate::harness::emit_csv(&rows, &csv).unwrap();
        for (kind, name) in [(PlotKind::Curves, "c.svg"), (PlotKind::Collapse, "k.svg")] {
            let out = dir.path().join(name);
            emit_plot(&csv, kind, &PlotOptions::default(), &out).unwrap();
            let svg = std::fs::read_to_string(&out).unwrap();
            assert!(svg.contains("L = "));
        }
        let opts = PlotOptions { collapse: Some((0.25, 1.0)), ..Default::default() };
        emit_plot(&csv, PlotKind::Collapse, &opts, &dir.path().join("k2.svg")).unwrap();
        assert!("heat-map".parse::<PlotKind>().is_ok());
    }
}
