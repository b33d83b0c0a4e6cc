//! Monte-Carlo aggregation, finite-size-scaling collapse and power-law fits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::diagnostics::DiagnosticValues;
use crate::error::{Error, Result};

/// Mean and standard error of one observable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    /// `None` when fewer than two samples are available.
    pub sem: Option<f64>,
}

/// Streaming (Welford) mean and variance.
#[derive(Clone, Copy, Debug, Default)]
pub struct Accumulator {
    n: usize,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn summary(&self) -> Summary {
        let sem = (self.n >= 2).then(|| (self.m2.max(0.0) / (self.n - 1) as f64 / self.n as f64).sqrt());
        Summary { n: self.n, mean: self.mean, sem }
    }
}

pub fn summarize(values: impl IntoIterator<Item = f64>) -> Result<Summary> {
    let mut acc = Accumulator::default();
    values.into_iter().for_each(|v| acc.push(v));
    if acc.n == 0 {
        return Err(Error::Analysis("cannot summarize an empty sample".into()));
    }
    Ok(acc.summary())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n_s: usize,
    pub s_topo: Summary,
    pub bmi: Summary,
    pub wilson: Vec<(usize, Summary)>,
    pub mi_by_distance: Option<Vec<(usize, Summary)>>,
}

/// Per-diagnostic means and standard errors over trajectories.
pub fn aggregate(samples: &[DiagnosticValues]) -> Result<SampleStats> {
    let first = samples.first().ok_or_else(|| Error::Analysis("no samples to aggregate".into()))?;
    let s_topo = summarize(samples.iter().map(|s| s.s_topo as f64))?;
    let bmi = summarize(samples.iter().map(|s| s.bmi as f64))?;
    let mut wilson = Vec::with_capacity(first.wilson_abs.len());
    for (i, &(len, _)) in first.wilson_abs.iter().enumerate() {
        let vals = samples.iter().map(|s| s.wilson_abs.get(i).map_or(f64::NAN, |w| w.1 as f64));
        wilson.push((len, summarize(vals)?));
    }
    let mi_by_distance = match &first.mi_by_distance {
        None => None,
        Some(d0) => {
            let mut out = Vec::with_capacity(d0.len());
            for (i, &(d, _)) in d0.iter().enumerate() {
                let vals = samples
                    .iter()
                    .map(|s| s.mi_by_distance.as_ref().and_then(|m| m.get(i)).map_or(f64::NAN, |m| m.1 as f64));
                out.push((d, summarize(vals)?));
            }
            Some(out)
        }
    };
    Ok(SampleStats { n_s: samples.len(), s_topo, bmi, wilson, mi_by_distance })
}

/// One finite-size curve `(p, y, yerr)` at linear size `l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub l: f64,
    pub points: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBox {
    pub p_c: (f64, f64),
    pub nu: (f64, f64),
}

impl Default for SearchBox {
    fn default() -> Self {
        Self { p_c: (0.0, 1.0), nu: (0.3, 3.0) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub p_c: f64,
    pub nu: f64,
    pub objective: f64,
    pub p_c_err: Option<f64>,
    pub nu_err: Option<f64>,
    /// Near-optimal objective values spread over a wide part of the box.
    pub degenerate: bool,
    /// Optimum on the edge of the search box.
    pub at_boundary: bool,
    /// Simplex refinement met its tolerance.
    pub converged: bool,
    /// `(p_c, nu, objective)` at each accepted simplex step.
    pub trace: Vec<(f64, f64, f64)>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CollapseOptions {
    pub grid_pc_step: f64,
    pub grid_nu_step: f64,
    pub rel_tol: f64,
    pub max_iter: usize,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        Self { grid_pc_step: 0.005, grid_nu_step: 0.05, rel_tol: 1e-4, max_iter: 500, bootstrap: 200, seed: 0 }
    }
}

fn interpolate(xs: &[(f64, f64, f64)], x: f64) -> Option<(f64, f64)> {
    if xs.len() < 2 || x < xs[0].0 || x > xs[xs.len() - 1].0 {
        return None;
    }
    let i = xs.partition_point(|q| q.0 < x).clamp(1, xs.len() - 1);
    let (x0, y0, e0) = xs[i - 1];
    let (x1, y1, e1) = xs[i];
    let t = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
    Some((y0 + t * (y1 - y0), ((1.0 - t) * e0).hypot(t * e1)))
}

/// Leave-one-size-out scatter: mean over points of the squared deviation from
/// the other sizes' piecewise-linear curves, normalized by the combined error.
pub fn collapse_objective(curves: &[Curve], p_c: f64, nu: f64) -> f64 {
    if nu <= 0.0 {
        return f64::INFINITY;
    }
    let scaled: Vec<Vec<(f64, f64, f64)>> = curves
        .iter()
        .map(|c| {
            let s = c.l.powf(1.0 / nu);
            let mut v: Vec<(f64, f64, f64)> = c.points.iter().map(|&(p, y, e)| ((p - p_c) * s, y, e)).collect();
            v.sort_by(|a, b| a.0.total_cmp(&b.0));
            v
        })
        .collect();
    let errs_present = curves.iter().flat_map(|c| &c.points).any(|p| p.2 > 0.0);
    let total: usize = curves.iter().map(|c| c.points.len()).sum();
    let (mut sum, mut count) = (0.0, 0usize);
    for (i, ci) in scaled.iter().enumerate() {
        for &(x, y, e) in ci {
            for (k, ck) in scaled.iter().enumerate() {
                if k == i {
                    continue;
                }
                if let Some((yk, ek)) = interpolate(ck, x) {
                    let d = y - yk;
                    let var = if errs_present { (e * e + ek * ek).max(1e-300) } else { 1.0 };
                    sum += d * d / var;
                    count += 1;
                }
            }
        }
    }
    if count * 4 < total || count < curves.len() {
        return f64::INFINITY;
    }
    sum / count as f64
}

struct Simplex {
    best: (f64, f64, f64),
    converged: bool,
    trace: Vec<(f64, f64, f64)>,
}

/// Two-parameter Nelder–Mead with standard coefficients.
fn nelder_mead(
    f: &dyn Fn(f64, f64) -> f64,
    start: (f64, f64),
    step: (f64, f64),
    rel_tol: f64,
    max_iter: usize,
) -> Simplex {
    let eval = |p: (f64, f64)| (p.0, p.1, f(p.0, p.1));
    let mut s = [eval(start), eval((start.0 + step.0, start.1)), eval((start.0, start.1 + step.1))];
    let mut trace = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        s.sort_by(|a, b| a.2.total_cmp(&b.2));
        trace.push(s[0]);
        let spread = (s[2].2 - s[0].2).abs();
        let scale = s[0].2.abs().max(1e-12);
        let size = ((s[2].0 - s[0].0).abs() + (s[1].0 - s[0].0).abs()) / s[0].0.abs().max(1e-3)
            + ((s[2].1 - s[0].1).abs() + (s[1].1 - s[0].1).abs()) / s[0].1.abs().max(1e-3);
        if spread.is_finite() && spread <= rel_tol * scale && size <= rel_tol * 10.0 {
            converged = true;
            break;
        }
        let c = ((s[0].0 + s[1].0) / 2.0, (s[0].1 + s[1].1) / 2.0);
        let along = |t: f64| eval((c.0 + t * (s[2].0 - c.0), c.1 + t * (s[2].1 - c.1)));
        let r = along(-1.0);
        if r.2 < s[0].2 {
            let e = along(-2.0);
            s[2] = if e.2 < r.2 { e } else { r };
        } else if r.2 < s[1].2 {
            s[2] = r;
        } else {
            let k = if r.2 < s[2].2 { along(-0.5) } else { along(0.5) };
            if k.2 < s[2].2.min(r.2) {
                s[2] = k;
            } else {
                let b = s[0];
                for v in s.iter_mut().skip(1) {
                    *v = eval(((v.0 + b.0) / 2.0, (v.1 + b.1) / 2.0));
                }
            }
        }
    }
    s.sort_by(|a, b| a.2.total_cmp(&b.2));
    Simplex { best: s[0], converged, trace }
}

fn grid_axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round().max(0.0) as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

struct Fit {
    p_c: f64,
    nu: f64,
    objective: f64,
    degenerate: bool,
    at_boundary: bool,
    converged: bool,
    trace: Vec<(f64, f64, f64)>,
}

fn fit_collapse(curves: &[Curve], sbox: &SearchBox, opts: &CollapseOptions) -> Result<Fit> {
    let pcs = grid_axis(sbox.p_c.0, sbox.p_c.1, opts.grid_pc_step);
    let nus = grid_axis(sbox.nu.0, sbox.nu.1, opts.grid_nu_step);
    let mut grid = Vec::with_capacity(pcs.len() * nus.len());
    for &pc in &pcs {
        for &nu in &nus {
            grid.push((pc, nu, collapse_objective(curves, pc, nu)));
        }
    }
    let best = grid
        .iter()
        .copied()
        .filter(|g| g.2.is_finite())
        .min_by(|a, b| a.2.total_cmp(&b.2))
        .ok_or_else(|| Error::Analysis("no overlap between scaled curves anywhere in the search box".into()))?;

    // Plateau detection on the grid.
    let mut finite: Vec<f64> = grid.iter().map(|g| g.2).filter(|v| v.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    let median = finite[finite.len() / 2];
    let cut = best.2 + 0.05 * (median - best.2).max(0.0) + 1e-12;
    let near: Vec<&(f64, f64, f64)> = grid.iter().filter(|g| g.2 <= cut).collect();
    let pc_extent = near.iter().map(|g| g.0).fold(f64::NEG_INFINITY, f64::max)
        - near.iter().map(|g| g.0).fold(f64::INFINITY, f64::min);
    let nu_extent = near.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max)
        - near.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let degenerate = median - best.2 <= 1e-9 * best.2.abs().max(1.0)
        || pc_extent > 0.25 * (sbox.p_c.1 - sbox.p_c.0)
        || nu_extent > 0.5 * (sbox.nu.1 - sbox.nu.0);

    let clamp = |pc: f64, nu: f64| {
        if pc < sbox.p_c.0 || pc > sbox.p_c.1 || nu < sbox.nu.0 || nu > sbox.nu.1 {
            f64::INFINITY
        } else {
            collapse_objective(curves, pc, nu)
        }
    };
    let nm = nelder_mead(&clamp, (best.0, best.1), (opts.grid_pc_step, opts.grid_nu_step), opts.rel_tol, opts.max_iter);
    let (p_c, nu, objective) = if nm.best.2 <= best.2 { nm.best } else { best };
    let tol_pc = opts.grid_pc_step;
    let tol_nu = opts.grid_nu_step;
    let at_boundary =
        p_c - sbox.p_c.0 < tol_pc || sbox.p_c.1 - p_c < tol_pc || nu - sbox.nu.0 < tol_nu || sbox.nu.1 - nu < tol_nu;
    Ok(Fit { p_c, nu, objective, degenerate, at_boundary, converged: nm.converged, trace: nm.trace })
}

fn validate_curves(curves: &[Curve]) -> Result<()> {
    if curves.len() < 3 {
        return Err(Error::Analysis(format!("collapse needs at least 3 sizes, got {}", curves.len())));
    }
    for c in curves {
        if c.points.len() < 5 {
            return Err(Error::Analysis(format!("size {} has only {} points (need 5)", c.l, c.points.len())));
        }
        if !(c.l > 0.0) {
            return Err(Error::Analysis(format!("invalid size {}", c.l)));
        }
    }
    let ys: Vec<f64> = curves.iter().flat_map(|c| c.points.iter().map(|p| p.1)).collect();
    let (lo, hi) = ys.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &y| (a.min(y), b.max(y)));
    if !(hi - lo > 1e-12 * hi.abs().max(1.0)) {
        return Err(Error::Analysis("all curves are constant; nothing to collapse".into()));
    }
    Ok(())
}

/// Finite-size-scaling collapse in `x = (p − p_c)·L^{1/ν}`: grid search, then
/// simplex refinement, then a parametric bootstrap for error bars.
pub fn data_collapse(curves: &[Curve], sbox: &SearchBox) -> Result<CollapseResult> {
    data_collapse_with(curves, sbox, &CollapseOptions::default())
}

pub fn data_collapse_with(curves: &[Curve], sbox: &SearchBox, opts: &CollapseOptions) -> Result<CollapseResult> {
    validate_curves(curves)?;
    let fit = fit_collapse(curves, sbox, opts)?;
    let (mut p_c_err, mut nu_err) = (None, None);
    let has_err = curves.iter().flat_map(|c| &c.points).any(|p| p.2 > 0.0);
    if opts.bootstrap >= 2 && has_err {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut pcs = Vec::with_capacity(opts.bootstrap);
        let mut nus = Vec::with_capacity(opts.bootstrap);
        let local = SearchBox {
            p_c: ((fit.p_c - 0.1).max(sbox.p_c.0), (fit.p_c + 0.1).min(sbox.p_c.1)),
            nu: ((fit.nu * 0.5).max(sbox.nu.0), (fit.nu * 2.0).min(sbox.nu.1)),
        };
        let boot_opts =
            CollapseOptions { grid_pc_step: opts.grid_pc_step * 2.0, grid_nu_step: opts.grid_nu_step * 2.0, ..*opts };
        for _ in 0..opts.bootstrap {
            let resampled: Vec<Curve> = curves
                .iter()
                .map(|c| Curve {
                    l: c.l,
                    points: c
                        .points
                        .iter()
                        .map(|&(p, y, e)| {
                            let g: f64 = StandardNormal.sample(&mut rng);
                            (p, y + e * g, e)
                        })
                        .collect(),
                })
                .collect();
            if let Ok(f) = fit_collapse(&resampled, &local, &boot_opts) {
                pcs.push(f.p_c);
                nus.push(f.nu);
            }
        }
        if pcs.len() >= 2 {
            p_c_err = summarize(pcs.iter().copied()).ok().and_then(|s| s.sem.map(|e| e * (pcs.len() as f64).sqrt()));
            nu_err = summarize(nus.iter().copied()).ok().and_then(|s| s.sem.map(|e| e * (nus.len() as f64).sqrt()));
        }
    }
    Ok(CollapseResult {
        p_c: fit.p_c,
        nu: fit.nu,
        objective: fit.objective,
        p_c_err,
        nu_err,
        degenerate: fit.degenerate,
        at_boundary: fit.at_boundary,
        converged: fit.converged,
        trace: fit.trace,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub kappa: f64,
    /// Reduced weighted sum of squared residuals in log space.
    pub residual: f64,
    /// Covariance of `(ln α, κ)`.
    pub covariance: [[f64; 2]; 2],
    pub points_used: usize,
    pub points_dropped: usize,
}

impl PowerLawFit {
    pub fn kappa_err(&self) -> f64 {
        self.covariance[1][1].max(0.0).sqrt()
    }
}

/// Weighted least squares of `ln I` against `ln d`; `κ` is minus the slope.
/// Points with `I ≤ 0` are dropped and counted.
pub fn fit_power_law(points: &[(f64, f64, f64)]) -> Result<PowerLawFit> {
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0)) {
        return Err(Error::Analysis(format!("distance {} must be positive", p.0)));
    }
    let kept: Vec<(f64, f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
    let dropped = points.len() - kept.len();
    if kept.len() < 3 {
        return Err(Error::Analysis(format!("power-law fit needs 3 positive points, got {}", kept.len())));
    }
    let weighted = kept.iter().all(|p| p.2 > 0.0);
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(d, i, e) in &kept {
        let w = if weighted { (i / e).powi(2) } else { 1.0 };
        let (x, y) = (d.ln(), i.ln());
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if !(det.abs() > 1e-300) {
        return Err(Error::Analysis("distances must not all coincide".into()));
    }
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    let mut chi2 = 0.0;
    for &(d, i, e) in &kept {
        let w = if weighted { (i / e).powi(2) } else { 1.0 };
        let r = i.ln() - (intercept + slope * d.ln());
        chi2 += w * r * r;
    }
    let dof = (kept.len() - 2) as f64;
    let red = chi2 / dof;
    // (XᵀWX)⁻¹ scaled by the reduced residual.
    let c_ii = sxx / det * red;
    let c_ss = sw / det * red;
    let c_is = -sx / det * red;
    Ok(PowerLawFit {
        alpha: intercept.exp(),
        kappa: -slope,
        residual: red,
        covariance: [[c_ii, -c_is], [-c_is, c_ss]],
        points_used: kept.len(),
        points_dropped: dropped,
    })
}

/// First `p` at which the linearly interpolated curve reaches the midpoint
/// between its minimum and maximum.
pub fn half_rise_point(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Analysis("need at least two points".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lo = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Err(Error::Analysis("curve is constant".into()));
    }
    let mid = 0.5 * (lo + hi);
    let rising = pts[pts.len() - 1].1 >= pts[0].1;
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let crosses = if rising { a.1 < mid && b.1 >= mid } else { a.1 > mid && b.1 <= mid };
        if crosses {
            return Ok(a.0 + (mid - a.1) / (b.1 - a.1) * (b.0 - a.0));
        }
    }
    Err(Error::Analysis("curve never crosses its midpoint".into()))
}

/// Onset of a rising curve: the kink `p₀` of the weighted least-squares fit
/// `y = a·max(0, p − p₀)` with `a > 0`. Standard errors are floored at
/// `min_err`. `p₀` is scanned on a grid of 2000 steps over the sampled range.
pub fn rise_onset(points: &[(f64, f64, f64)], min_err: f64) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::Analysis("onset fit needs at least three points".into()));
    }
    if !(min_err > 0.0) {
        return Err(Error::Analysis("error floor must be positive".into()));
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (lo, hi) = (pts[0].0, pts[pts.len() - 1].0);
    let mut best: Option<(f64, f64)> = None;
    for i in 0..2000 {
        let p0 = lo + (hi - lo) * i as f64 / 2000.0;
        let (mut sfy, mut sff) = (0.0, 0.0);
        for &(p, y, e) in &pts {
            let (f, w) = ((p - p0).max(0.0), e.max(min_err).powi(-2));
            sfy += w * f * y;
            sff += w * f * f;
        }
        let a = sfy / sff;
        if !(a > 0.0) {
            continue;
        }
        let chi2: f64 = pts.iter().map(|&(p, y, e)| ((y - a * (p - p0).max(0.0)) / e.max(min_err)).powi(2)).sum();
        if best.map_or(true, |(c, _)| chi2 < c) {
            best = Some((chi2, p0));
        }
    }
    best.map(|b| b.1).ok_or_else(|| Error::Analysis("curve does not rise".into()))
}

/// Abscissa where two curves sampled on the same grid cross, by linear
/// interpolation of their difference. Returns the crossing nearest `hint`.
pub fn curve_crossing(a: &[(f64, f64)], b: &[(f64, f64)], hint: f64) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::Analysis("curves must share a grid of at least two points".into()));
    }
    let mut best: Option<f64> = None;
    for i in 1..a.len() {
        if (a[i].0 - b[i].0).abs() > 1e-12 || (a[i - 1].0 - b[i - 1].0).abs() > 1e-12 {
            return Err(Error::Analysis("curves must share a grid".into()));
        }
        let d0 = a[i - 1].1 - b[i - 1].1;
        let d1 = a[i].1 - b[i].1;
        if d0 == 0.0 || d0.signum() != d1.signum() {
            let x = if d1 == d0 { a[i - 1].0 } else { a[i - 1].0 + d0 / (d0 - d1) * (a[i].0 - a[i - 1].0) };
            if best.map_or(true, |bx| (x - hint).abs() < (bx - hint).abs()) {
                best = Some(x);
            }
        }
    }
    best.ok_or_else(|| Error::Analysis("curves do not cross".into()))
}
