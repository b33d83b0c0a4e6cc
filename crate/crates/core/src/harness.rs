//! Experiment orchestration: parameter cuts, sample fan-out, CSV persistence.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::{aggregate, summarize, Curve, SampleStats, Summary};
use crate::circuits::Circuit;
use crate::circuits::{run_ptfi, CircuitConfig, Model, Trajectory};
use crate::diagnostics::{bmi, mi_vs_distance, tee, wilson_abs, DiagnosticValues};
use crate::error::{Error, Result};
use crate::geometry::{GaugeGeometry, IsingGeometry};
use crate::lattice::{
    bmi_regions, build_lieb_lattice, tee_regions, wilson_line, Lattice, OperatorSupport, Region, RegionLabel,
};
use crate::mbqc::{sample_rbh_boundary, RbhLattice};
use crate::par::map_indexed;
use crate::rng::SampleRng;
use crate::tableau::{OutcomePolicy, Tableau};

const CUT_TOL: f64 = 1e-12;

/// One-parameter line (or the full mesh) through the `(p_j, p_k)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cut {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    Ii,
    #[serde(rename = "iii")]
    Iii,
    #[serde(rename = "iv")]
    Iv,
    #[serde(rename = "v")]
    V,
    #[serde(rename = "vi")]
    Vi,
    #[serde(rename = "grid")]
    Grid,
}

impl Cut {
    pub const LINES: [Cut; 6] = [Cut::I, Cut::Ii, Cut::Iii, Cut::Iv, Cut::V, Cut::Vi];

    pub fn as_str(self) -> &'static str {
        match self {
            Cut::I => "i",
            Cut::Ii => "ii",
            Cut::Iii => "iii",
            Cut::Iv => "iv",
            Cut::V => "v",
            Cut::Vi => "vi",
            Cut::Grid => "grid",
        }
    }

    /// `(p_j, p_k)` at scan value `v`. `None` for the grid, which has two axes.
    pub fn point(self, v: f64) -> Option<(f64, f64)> {
        Some(match self {
            Cut::I => (v, 1.0),
            Cut::Ii => (0.0, v),
            Cut::Iii => (v, 1.0 - v),
            Cut::Iv => (v, v + 0.5),
            Cut::V => (v, v + 0.25),
            Cut::Vi => (1.0, v),
            Cut::Grid => return None,
        })
    }

    /// The coordinate that varies along the cut.
    pub fn scan_value(self, p_j: f64, p_k: f64) -> f64 {
        match self {
            Cut::Ii | Cut::Vi => p_k,
            _ => p_j,
        }
    }

    pub fn contains(self, p_j: f64, p_k: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= CUT_TOL;
        match self {
            Cut::I => close(p_k, 1.0),
            Cut::Ii => close(p_j, 0.0),
            Cut::Iii => close(p_j + p_k, 1.0),
            Cut::Iv => close(p_k, p_j + 0.5),
            Cut::V => close(p_k, p_j + 0.25),
            Cut::Vi => close(p_j, 1.0),
            Cut::Grid => true,
        }
    }

    /// Default scan values for desk-scale runs.
    pub fn default_values(self) -> Vec<f64> {
        match self {
            Cut::I => linspace(0.15, 0.35, 11),
            Cut::Ii => linspace(0.65, 0.85, 11),
            Cut::Iii => linspace(0.0, 1.0, 21),
            Cut::Iv => linspace(0.0, 0.5, 11),
            Cut::V => linspace(0.0, 0.75, 16),
            Cut::Vi => linspace(0.3, 0.7, 21),
            Cut::Grid => linspace(0.0, 1.0, 11),
        }
    }
}

impl FromStr for Cut {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "i" | "1" => Cut::I,
            "ii" | "2" => Cut::Ii,
            "iii" | "3" => Cut::Iii,
            "iv" | "4" => Cut::Iv,
            "v" | "5" => Cut::V,
            "vi" | "6" => Cut::Vi,
            "grid" => Cut::Grid,
            other => return Err(Error::Parse(format!("unknown cut '{other}'"))),
        })
    }
}

impl fmt::Display for Cut {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// `n` evenly spaced values from `a` to `b`, rounded to 12 decimals so that
/// steps like 0.02 print cleanly.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| round12(a + (b - a) * i as f64 / (n - 1) as f64)).collect(),
    }
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// Parameter points for a cut. The grid takes the Cartesian product of `values`.
pub fn cut_points(cut: Cut, values: &[f64]) -> Vec<(f64, f64)> {
    match cut {
        Cut::Grid => values.iter().flat_map(|&pj| values.iter().map(move |&pk| (pj, pk))).collect(),
        _ => values.iter().map(|&v| cut.point(v).expect("line cut")).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub model: Model,
    pub cut: Cut,
    pub points: Vec<(f64, f64)>,
    pub sizes: Vec<(usize, usize)>,
    pub n_t: usize,
    /// Variants evaluated on each trajectory: `false` after `n_t` full cycles,
    /// `true` after one further Z-round.
    pub half_cycle: Vec<bool>,
    pub n_s: usize,
    pub p_zx: f64,
    pub master_seed: u64,
    pub outcome_policy: OutcomePolicy,
    pub wilson_lengths: Vec<usize>,
    pub mi_distances: Vec<usize>,
    pub workers: Option<usize>,
}

/// Sizes used by the desk-scale presets.
pub const DESK_SIZES: [(usize, usize); 3] = [(8, 5), (10, 6), (12, 7)];

impl ExperimentPlan {
    /// Desk preset for a cut: `n_t = 30`, `n_s = 500`; the grid uses `n_t = 10`, `n_s = 200`.
    pub fn preset(cut: Cut) -> Self {
        let grid = cut == Cut::Grid;
        Self {
            model: Model::FsMoc,
            cut,
            points: cut_points(cut, &cut.default_values()),
            sizes: DESK_SIZES.to_vec(),
            n_t: if grid { 10 } else { 30 },
            half_cycle: vec![false],
            n_s: if grid { 200 } else { 500 },
            p_zx: 0.5,
            master_seed: 0,
            outcome_policy: OutcomePolicy::Random,
            wilson_lengths: vec![4],
            mi_distances: vec![],
            workers: None,
        }
    }

    pub fn with_values(mut self, values: &[f64]) -> Self {
        self.points = cut_points(self.cut, values);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.model, Model::FsMoc | Model::ZxRandomized) {
            return Err(Error::Config(format!(
                "scans run on the gauge-Higgs lattice; model {} has its own runner",
                self.model
            )));
        }
        if self.points.is_empty() || self.sizes.is_empty() || self.half_cycle.is_empty() {
            return Err(Error::Config("plan needs points, sizes and at least one cycle variant".into()));
        }
        if self.n_s == 0 {
            return Err(Error::Config("n_s must be positive".into()));
        }
        for &(pj, pk) in &self.points {
            if !(0.0..=1.0).contains(&pj) || !(0.0..=1.0).contains(&pk) {
                return Err(Error::Config(format!("point ({pj}, {pk}) lies outside the unit square")));
            }
            if !self.cut.contains(pj, pk) {
                return Err(Error::Config(format!("point ({pj}, {pk}) is not on cut {}", self.cut)));
            }
        }
        for &(lx, ly) in &self.sizes {
            if lx < 5 || ly < 4 {
                return Err(Error::Config(format!("lattice ({lx},{ly}) is too small for the diagnostics")));
            }
        }
        self.config(0.0, 0.0, false).validate()
    }

    fn config(&self, p_j: f64, p_k: f64, half_cycle: bool) -> CircuitConfig {
        CircuitConfig {
            p_j,
            p_k,
            p_zx: self.p_zx,
            n_t: self.n_t,
            half_cycle,
            outcome_policy: self.outcome_policy,
            master_seed: self.master_seed,
            model: self.model,
        }
    }
}

/// One CSV row: a point, a size, a cycle variant and one Wilson length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub model: Model,
    pub cut: Cut,
    pub p_j: f64,
    pub p_k: f64,
    pub p_zx: f64,
    pub lx: usize,
    pub ly: usize,
    pub n_t: usize,
    pub half_cycle: bool,
    pub n_s: usize,
    pub s_topo_mean: Option<f64>,
    pub s_topo_sem: Option<f64>,
    pub bmi_mean: Option<f64>,
    pub bmi_sem: Option<f64>,
    pub wilson_len: Option<usize>,
    pub wilson_mean: Option<f64>,
    pub wilson_sem: Option<f64>,
}

pub const CSV_HEADER: &str = "model,cut,p_j,p_k,p_zx,lx,ly,n_t,half_cycle,n_s,s_topo_mean,s_topo_sem,bmi_mean,bmi_sem,wilson_len,wilson_mean,wilson_sem";

/// Regions and operators evaluated on one lattice size. Missing entries are
/// reported as empty CSV fields.
pub struct Probes {
    pub tee: Option<(Region, Region, Region)>,
    pub bmi: Option<(Region, Region)>,
    pub wilson: Vec<(usize, OperatorSupport)>,
    pub mi_distances: Vec<usize>,
}

impl Probes {
    pub fn new(lat: &Lattice, wilson_lengths: &[usize], mi_distances: &[usize]) -> Self {
        Self {
            tee: tee_regions(lat).ok(),
            bmi: bmi_regions(lat).ok(),
            wilson: wilson_lengths.iter().filter_map(|&len| wilson_line(lat, len).ok().map(|w| (len, w))).collect(),
            mi_distances: mi_distances.to_vec(),
        }
    }

    pub fn evaluate(&self, lat: &Lattice, t: &Tableau) -> Result<DiagnosticValues> {
        let s_topo = match &self.tee {
            Some((a, b, c)) => tee(t, a, b, c)?,
            None => 0,
        };
        let bmi = match &self.bmi {
            Some((a, b)) => bmi(t, a, b)?,
            None => 0,
        };
        let wilson_abs = self.wilson.iter().map(|(len, w)| (*len, wilson_abs(t, w))).collect();
        let mi_by_distance =
            if self.mi_distances.is_empty() { None } else { Some(mi_vs_distance(t, lat, &self.mi_distances)?) };
        Ok(DiagnosticValues { s_topo, bmi, wilson_abs, mi_by_distance })
    }
}

/// Runs one trajectory and evaluates the diagnostics after `n_t` full cycles
/// and, on the same continuation, after one extra Z-round. Entries follow `variants`.
pub fn evaluate_trajectory(
    lat: &Lattice,
    circuit: &Circuit,
    probes: &Probes,
    cfg: CircuitConfig,
    rng: SampleRng,
    variants: &[bool],
) -> Result<Vec<DiagnosticValues>> {
    let mut traj = Trajectory::new(circuit, cfg, rng)?;
    traj.run_full();
    let full = if variants.contains(&false) { Some(probes.evaluate(lat, traj.tableau())?) } else { None };
    let half = if variants.contains(&true) {
        traj.z_round();
        Some(probes.evaluate(lat, traj.tableau())?)
    } else {
        None
    };
    Ok(variants.iter().map(|&h| if h { half.clone() } else { full.clone() }.expect("variant evaluated")).collect())
}

struct SizeSetup {
    lat: Lattice,
    circuit: Circuit,
    probes: Probes,
}

/// Runs every (size, point, sample) task and aggregates one block of rows per
/// (size, point, variant). Failures blank the affected rows only.
pub fn run_plan(plan: &ExperimentPlan) -> Result<Vec<ResultRow>> {
    plan.validate()?;
    let setups: Vec<Result<SizeSetup>> = plan
        .sizes
        .iter()
        .map(|&(lx, ly)| {
            let lat = build_lieb_lattice(lx, ly)?;
            let circuit = Circuit::fs_moc(&lat);
            let probes = Probes::new(&lat, &plan.wilson_lengths, &plan.mi_distances);
            Ok(SizeSetup { lat, circuit, probes })
        })
        .collect();
    let (np, ns) = (plan.points.len(), plan.n_s);
    let per_size = np * ns;
    let results: Vec<Result<Vec<DiagnosticValues>>> = map_indexed(plan.sizes.len() * per_size, plan.workers, |k| {
        let (si, rest) = (k / per_size, k % per_size);
        let setup = setups[si].as_ref().map_err(|e| Error::Config(e.to_string()))?;
        let (pj, pk) = plan.points[rest / ns];
        let cfg = plan.config(pj, pk, false);
        let rng = SampleRng::new(plan.master_seed, k as u64);
        evaluate_trajectory(&setup.lat, &setup.circuit, &setup.probes, cfg, rng, &plan.half_cycle)
    });

    let mut rows = Vec::new();
    for (si, &(lx, ly)) in plan.sizes.iter().enumerate() {
        for (pi, &(pj, pk)) in plan.points.iter().enumerate() {
            let base = si * per_size + pi * ns;
            let block = &results[base..base + ns];
            for (vi, &half) in plan.half_cycle.iter().enumerate() {
                let samples: Option<Vec<DiagnosticValues>> =
                    block.iter().map(|r| r.as_ref().ok().map(|v| v[vi].clone())).collect();
                let stats = samples.and_then(|s| aggregate(&s).ok());
                let probes = setups[si].as_ref().ok().map(|s| &s.probes);
                rows.extend(rows_for(plan, (pj, pk), (lx, ly), half, probes, stats.as_ref()));
            }
        }
    }
    Ok(rows)
}

fn rows_for(
    plan: &ExperimentPlan,
    (p_j, p_k): (f64, f64),
    (lx, ly): (usize, usize),
    half_cycle: bool,
    probes: Option<&Probes>,
    stats: Option<&SampleStats>,
) -> Vec<ResultRow> {
    let have_tee = probes.is_some_and(|p| p.tee.is_some());
    let have_bmi = probes.is_some_and(|p| p.bmi.is_some());
    let s_topo = stats.filter(|_| have_tee).map(|s| s.s_topo);
    let bmi = stats.filter(|_| have_bmi).map(|s| s.bmi);
    let base = ResultRow {
        model: plan.model,
        cut: plan.cut,
        p_j,
        p_k,
        p_zx: plan.p_zx,
        lx,
        ly,
        n_t: plan.n_t,
        half_cycle,
        n_s: stats.map_or(0, |s| s.n_s),
        s_topo_mean: s_topo.map(|s| s.mean),
        s_topo_sem: s_topo.and_then(|s| s.sem),
        bmi_mean: bmi.map(|s| s.mean),
        bmi_sem: bmi.and_then(|s| s.sem),
        wilson_len: None,
        wilson_mean: None,
        wilson_sem: None,
    };
    let lengths: Vec<usize> = probes.map(|p| p.wilson.iter().map(|w| w.0).collect()).unwrap_or_default();
    if lengths.is_empty() {
        return vec![base];
    }
    lengths
        .iter()
        .enumerate()
        .map(|(i, &len)| {
            let w = stats.and_then(|s| s.wilson.get(i)).map(|w| w.1);
            ResultRow {
                wilson_len: Some(len),
                wilson_mean: w.map(|w| w.mean),
                wilson_sem: w.and_then(|w| w.sem),
                ..base.clone()
            }
        })
        .collect()
}

/// Writes rows to CSV. Empty input is rejected before the file is created.
pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::Config("no rows to write".into()));
    }
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(rows: &[ResultRow]) -> Result<String> {
    serialize_csv(rows)
}

/// Any serializable records as CSV text with a header row.
pub fn serialize_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn parse_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    check_header(r.headers()?)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn parse_csv_str(text: &str) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    check_header(r.headers()?)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

fn check_header(h: &csv::StringRecord) -> Result<()> {
    let got: Vec<&str> = h.iter().collect();
    if got.join(",") != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected CSV header '{}'", got.join(","))));
    }
    Ok(())
}

/// Observable column selected from result rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Observable {
    STopo,
    Bmi,
    /// Wilson line of the given length; `None` takes the first length present.
    Wilson(Option<usize>),
}

impl Observable {
    pub fn label(self) -> String {
        match self {
            Observable::STopo => "S_topo".into(),
            Observable::Bmi => "BMI".into(),
            Observable::Wilson(Some(l)) => format!("|<W>| (length {l})"),
            Observable::Wilson(None) => "|<W>|".into(),
        }
    }

    /// `(mean, sem)` of the observable in a row, if present.
    pub fn value(self, row: &ResultRow) -> Option<(f64, f64)> {
        let (m, s) = match self {
            Observable::STopo => (row.s_topo_mean, row.s_topo_sem),
            Observable::Bmi => (row.bmi_mean, row.bmi_sem),
            Observable::Wilson(len) => {
                if len.is_some() && row.wilson_len != len {
                    return None;
                }
                (row.wilson_mean, row.wilson_sem)
            }
        };
        m.map(|m| (m, s.unwrap_or(0.0)))
    }

    fn resolve(self, rows: &[ResultRow]) -> Self {
        match self {
            Observable::Wilson(None) => Observable::Wilson(rows.iter().find_map(|r| r.wilson_len)),
            o => o,
        }
    }
}

impl FromStr for Observable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "s_topo" | "tee" => Ok(Observable::STopo),
            "bmi" => Ok(Observable::Bmi),
            "wilson" => Ok(Observable::Wilson(None)),
            _ => match s.strip_prefix("wilson:") {
                Some(n) => n.parse().map(|n| Observable::Wilson(Some(n))).map_err(|_| Error::Parse(s.clone())),
                None => Err(Error::Parse(format!("unknown observable '{s}'"))),
            },
        }
    }
}

/// Groups rows of one cycle variant into per-size curves along the cut, with
/// linear size `L = sqrt(lx·ly)`. Points are sorted by scan value.
pub fn curves_from_rows(rows: &[ResultRow], obs: Observable, half_cycle: bool) -> Vec<Curve> {
    let obs = obs.resolve(rows);
    let mut by_size: BTreeMap<(usize, usize), Vec<(f64, f64, f64)>> = BTreeMap::new();
    let mut seen = std::collections::HashSet::new();
    for r in rows.iter().filter(|r| r.half_cycle == half_cycle) {
        let Some((y, e)) = obs.value(r) else { continue };
        // Non-Wilson observables repeat across Wilson-length rows.
        if !seen.insert((r.lx, r.ly, r.p_j.to_bits(), r.p_k.to_bits())) {
            continue;
        }
        by_size.entry((r.lx, r.ly)).or_default().push((r.cut.scan_value(r.p_j, r.p_k), y, e));
    }
    by_size
        .into_iter()
        .map(|((lx, ly), mut points)| {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            Curve { l: ((lx * ly) as f64).sqrt(), points }
        })
        .collect()
}

/// Mutual information versus boundary distance at one parameter point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MiProfile {
    pub lx: usize,
    pub ly: usize,
    pub p_j: f64,
    pub p_k: f64,
    pub n_t: usize,
    pub n_s: usize,
    pub points: Vec<(usize, Summary)>,
}

impl MiProfile {
    /// `(d, I, Ierr)` triples for a power-law fit.
    pub fn fit_points(&self) -> Vec<(f64, f64, f64)> {
        self.points.iter().map(|(d, s)| (*d as f64, s.mean, s.sem.unwrap_or(0.0))).collect()
    }
}

/// Samples boundary MI at each distance on one lattice.
pub fn mi_profile(
    lx: usize,
    ly: usize,
    cfg: CircuitConfig,
    distances: &[usize],
    n_s: usize,
    workers: Option<usize>,
) -> Result<MiProfile> {
    cfg.validate()?;
    if n_s == 0 || distances.is_empty() {
        return Err(Error::Config("need samples and distances".into()));
    }
    let lat = build_lieb_lattice(lx, ly)?;
    let circuit = Circuit::fs_moc(&lat);
    let values: Vec<Result<Vec<(usize, i64)>>> = map_indexed(n_s, workers, |s| {
        let mut traj = Trajectory::new(&circuit, cfg, SampleRng::new(cfg.master_seed, s as u64))?;
        traj.run();
        mi_vs_distance(traj.tableau(), &lat, distances)
    });
    let values: Vec<Vec<(usize, i64)>> = values.into_iter().collect::<Result<_>>()?;
    let points = distances
        .iter()
        .enumerate()
        .map(|(i, &d)| Ok((d, summarize(values.iter().map(|v| v[i].1 as f64))?)))
        .collect::<Result<_>>()?;
    Ok(MiProfile { lx, ly, p_j: cfg.p_j, p_k: cfg.p_k, n_t: cfg.n_t, n_s, points })
}

/// Single-point statistics for `simulate`.
pub fn simulate_point(
    lx: usize,
    ly: usize,
    cfg: CircuitConfig,
    n_s: usize,
    wilson_lengths: &[usize],
    workers: Option<usize>,
) -> Result<SampleStats> {
    cfg.validate()?;
    if !matches!(cfg.model, Model::FsMoc | Model::ZxRandomized) {
        return Err(Error::Config(format!("simulate runs fs_moc or zx_randomized, not {}", cfg.model)));
    }
    let lat = build_lieb_lattice(lx, ly)?;
    let circuit = Circuit::fs_moc(&lat);
    let probes = Probes::new(&lat, wilson_lengths, &[]);
    let samples: Vec<Result<DiagnosticValues>> = map_indexed(n_s, workers, |s| {
        let mut traj = Trajectory::new(&circuit, cfg, SampleRng::new(cfg.master_seed, s as u64))?;
        traj.run();
        probes.evaluate(&lat, traj.tableau())
    });
    aggregate(&samples.into_iter().collect::<Result<Vec<_>>>()?)
}

/// Antipodal mutual information on a periodic pTFI chain of `l` sites, with
/// blocks of `l/4` sites at `0` and `l/2`. With `half_cycle` the chain is read
/// after one further ZZ round.
pub fn ptfi_antipodal_mi(
    l: usize,
    p_values: &[f64],
    n_t: usize,
    half_cycle: bool,
    n_s: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<(f64, Summary)>> {
    if l < 8 || l % 4 != 0 {
        return Err(Error::Config(format!("chain length {l} must be a multiple of 4, at least 8")));
    }
    let geom = IsingGeometry::chain(l)?;
    let w = l / 4;
    let a = Region::new(RegionLabel::BmiA, 0..w);
    let b = Region::new(RegionLabel::BmiB, l / 2..l / 2 + w);
    let np = p_values.len();
    let vals: Vec<Result<i64>> = map_indexed(np * n_s, workers, |k| {
        let p = p_values[k / n_s];
        let cfg = CircuitConfig {
            p_j: p,
            p_k: 0.0,
            n_t,
            half_cycle,
            master_seed: seed,
            model: Model::Ptfi1d,
            ..Default::default()
        };
        let t = run_ptfi(&geom, &cfg, SampleRng::new(seed, k as u64))?;
        bmi(&t, &a, &b)
    });
    let vals: Vec<i64> = vals.into_iter().collect::<Result<_>>()?;
    p_values
        .iter()
        .enumerate()
        .map(|(i, &p)| Ok((p, summarize(vals[i * n_s..(i + 1) * n_s].iter().map(|&v| v as f64))?)))
        .collect()
}

/// One line of the resource-state versus circuit comparison.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RbhComparison {
    pub p_k: f64,
    pub quantity: String,
    pub rbh_mean: f64,
    pub rbh_sem: f64,
    pub gauge_mean: f64,
    pub gauge_sem: f64,
    pub z_score: f64,
}

impl RbhComparison {
    pub fn agrees(&self, sigmas: f64) -> bool {
        self.z_score.abs() <= sigmas
    }
}

/// Boundary patch entropy and Wilson-loop indicator from the layered
/// resource state and from the pure-gauge circuit, with independent seeds.
pub fn rbh_check(
    l: usize,
    m: usize,
    lz: usize,
    p_ks: &[f64],
    n_s: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<RbhComparison>> {
    let rbh = RbhLattice::new(l, m, lz)?;
    let geom = GaugeGeometry::torus(l, m)?;
    let patch = geom.torus_patch(0, 0, l / 2, m / 2)?;
    let loop_edges = geom.torus_loop(0, 0, 2, 2)?;
    let loop_op = crate::PauliString::from_supports(geom.n_edges(), &[], &loop_edges);
    let gauge_seed = seed ^ 0x5bd1_e995_0000_0001;
    let mut out = Vec::new();
    for &p_k in p_ks {
        let measure = |t: &Tableau| -> Result<(f64, f64)> {
            Ok((t.entanglement_entropy(&patch)? as f64, t.expectation_abs(&loop_op) as f64))
        };
        let rbh_vals: Vec<Result<(f64, f64)>> = map_indexed(n_s, workers, |s| {
            let mut rng = SampleRng::new(seed, s as u64);
            measure(&sample_rbh_boundary(&rbh, p_k, &mut rng)?)
        });
        let cfg = CircuitConfig {
            p_j: 0.0,
            p_k,
            n_t: lz,
            master_seed: gauge_seed,
            model: Model::PureGauge,
            ..Default::default()
        };
        let circuit = Circuit::pure_gauge(&geom);
        let gauge_vals: Vec<Result<(f64, f64)>> = map_indexed(n_s, workers, |s| {
            let mut traj = Trajectory::new(&circuit, cfg, SampleRng::new(gauge_seed, s as u64))?;
            traj.run();
            measure(traj.tableau())
        });
        let rbh_vals: Vec<(f64, f64)> = rbh_vals.into_iter().collect::<Result<_>>()?;
        let gauge_vals: Vec<(f64, f64)> = gauge_vals.into_iter().collect::<Result<_>>()?;
        for (name, pick) in [("boundary_entropy", 0usize), ("wilson_loop", 1)] {
            let get = |v: &(f64, f64)| if pick == 0 { v.0 } else { v.1 };
            let r = summarize(rbh_vals.iter().map(get))?;
            let g = summarize(gauge_vals.iter().map(get))?;
            let (rs, gs) = (r.sem.unwrap_or(0.0), g.sem.unwrap_or(0.0));
            let se = (rs * rs + gs * gs).sqrt();
            let diff = r.mean - g.mean;
            let z_score = if se > 0.0 {
                diff / se
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            out.push(RbhComparison {
                p_k,
                quantity: name.into(),
                rbh_mean: r.mean,
                rbh_sem: rs,
                gauge_mean: g.mean,
                gauge_sem: gs,
                z_score,
            });
        }
    }
    Ok(out)
}

/// Parses flat `key = value` text. Blank lines and `#` comments are skipped;
/// keys are normalized to lowercase with `-` mapped to `_`.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key=value, got '{line}'", n + 1)))?;
        let key = k.trim().trim_start_matches("--").to_ascii_lowercase().replace('-', "_");
        if key.is_empty() {
            return Err(Error::Parse(format!("line {}: empty key", n + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_plan(cut: Cut, values: &[f64]) -> ExperimentPlan {
        ExperimentPlan {
            sizes: vec![(6, 4)],
            n_t: 2,
            n_s: 4,
            half_cycle: vec![false, true],
            wilson_lengths: vec![2, 3],
            master_seed: 9,
            workers: Some(1),
            ..ExperimentPlan::preset(cut)
        }
        .with_values(values)
    }

    #[test]
    fn cuts_satisfy_constraints() {
        for cut in Cut::LINES {
            for (pj, pk) in cut_points(cut, &linspace(0.0, 0.5, 26)) {
                assert!(cut.contains(pj, pk), "{cut}: ({pj},{pk})");
            }
        }
        for (pj, pk) in cut_points(Cut::Iii, &linspace(0.0, 1.0, 101)) {
            assert!((pj + pk - 1.0).abs() <= CUT_TOL);
        }
        assert_eq!(cut_points(Cut::Grid, &[0.0, 0.5, 1.0]).len(), 9);
        assert_eq!(Cut::I.default_values().len(), 11);
        assert!((Cut::I.default_values()[1] - 0.17).abs() < 1e-15);
    }

    #[test]
    fn cut_names_round_trip() {
        for cut in Cut::LINES.into_iter().chain([Cut::Grid]) {
            assert_eq!(cut.as_str().parse::<Cut>().unwrap(), cut);
        }
        assert!("vii".parse::<Cut>().is_err());
    }

    #[test]
    fn off_cut_point_rejected() {
        let mut plan = small_plan(Cut::Iii, &[0.2]);
        plan.points.push((0.2, 0.7));
        assert!(plan.validate().is_err());
        let mut plan = small_plan(Cut::I, &[0.2]);
        plan.model = Model::PureGauge;
        assert!(plan.validate().is_err());
    }

    #[test]
    fn rows_have_schema_order_and_count() {
        let rows = run_plan(&small_plan(Cut::I, &[0.0, 0.5])).unwrap();
        // 2 points × 2 variants × 2 Wilson lengths.
        assert_eq!(rows.len(), 8);
        let text = csv_string(&rows).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        // (p_j, p_k) = (0, 1) is deconfined after a full cycle.
        assert!(rows.iter().filter(|r| r.p_j == 0.0 && !r.half_cycle).all(|r| r.s_topo_mean == Some(-1.0)));
    }

    #[test]
    fn run_plan_is_deterministic() {
        let plan = small_plan(Cut::Iii, &[0.3, 0.6]);
        let a = csv_string(&run_plan(&plan).unwrap()).unwrap();
        let b = csv_string(&run_plan(&ExperimentPlan { workers: Some(2), ..plan }).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn single_sample_has_no_sem() {
        let plan = ExperimentPlan { n_s: 1, ..small_plan(Cut::Vi, &[0.5]) };
        let rows = run_plan(&plan).unwrap();
        assert!(rows.iter().all(|r| r.n_s == 1 && r.s_topo_sem.is_none() && r.bmi_sem.is_none()));
        assert!(rows.iter().all(|r| r.s_topo_mean.is_some()));
        let text = csv_string(&rows).unwrap();
        assert_eq!(parse_csv_str(&text).unwrap(), rows);
    }

    #[test]
    fn oversized_wilson_length_is_skipped() {
        let plan = ExperimentPlan { wilson_lengths: vec![40], ..small_plan(Cut::I, &[0.1]) };
        let rows = run_plan(&plan).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows.iter().all(|r| r.wilson_len.is_none() && r.s_topo_mean.is_some()));
    }

    #[test]
    fn csv_file_round_trip_and_empty_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let rows = run_plan(&small_plan(Cut::Ii, &[0.7, 0.8])).unwrap();
        let path = dir.path().join("rows.csv");
        emit_csv(&rows, &path).unwrap();
        assert_eq!(parse_csv(&path).unwrap(), rows);
        let empty = dir.path().join("empty.csv");
        assert!(emit_csv(&[], &empty).is_err());
        assert!(!empty.exists());
        assert!(parse_csv_str("a,b\n1,2\n").is_err());
    }

    #[test]
    fn curves_group_by_size() {
        let plan = ExperimentPlan { sizes: vec![(6, 4), (7, 4)], ..small_plan(Cut::I, &[0.3, 0.0, 0.6]) };
        let rows = run_plan(&plan).unwrap();
        let curves = curves_from_rows(&rows, Observable::STopo, false);
        assert_eq!(curves.len(), 2);
        assert!((curves[0].l - 24f64.sqrt()).abs() < 1e-12);
        let xs: Vec<f64> = curves[0].points.iter().map(|p| p.0).collect();
        assert_eq!(xs, vec![0.0, 0.3, 0.6]);
        let w = curves_from_rows(&rows, Observable::Wilson(Some(3)), true);
        assert_eq!(w[1].points.len(), 3);
    }

    #[test]
    fn half_cycle_shares_trajectory_prefix() {
        let lat = build_lieb_lattice(6, 4).unwrap();
        let circuit = Circuit::fs_moc(&lat);
        let probes = Probes::new(&lat, &[2], &[]);
        let cfg = CircuitConfig::fs_moc(1.0, 0.1, 3);
        let both = evaluate_trajectory(&lat, &circuit, &probes, cfg, SampleRng::new(4, 0), &[false, true]).unwrap();
        let full = evaluate_trajectory(&lat, &circuit, &probes, cfg, SampleRng::new(4, 0), &[false]).unwrap();
        let half = evaluate_trajectory(&lat, &circuit, &probes, cfg, SampleRng::new(4, 0), &[true]).unwrap();
        assert_eq!(both[0], full[0]);
        assert_eq!(both[1], half[0]);
        // On p_j = 1 the Wilson line is a stabilizer right after the Z-round.
        assert_eq!(both[1].wilson_abs, vec![(2, 1)]);
    }

    #[test]
    fn observable_parsing() {
        assert_eq!("tee".parse::<Observable>().unwrap(), Observable::STopo);
        assert_eq!("wilson:5".parse::<Observable>().unwrap(), Observable::Wilson(Some(5)));
        assert!("wilson:x".parse::<Observable>().is_err());
    }

    #[test]
    fn config_parsing() {
        let text = "# desk run\nlx = 12\n--ly=7\nhalf-cycle = true # inline\n\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c["lx"], "12");
        assert_eq!(c["ly"], "7");
        assert_eq!(c["half_cycle"], "true");
        assert!(parse_config("lx 12").is_err());
    }

    #[test]
    fn mi_profile_at_product_point_is_zero() {
        let cfg = CircuitConfig::fs_moc(0.0, 0.0, 2);
        let prof = mi_profile(8, 5, cfg, &[1, 2, 3], 3, Some(1)).unwrap();
        assert!(prof.points.iter().all(|(_, s)| s.mean == 0.0));
        assert_eq!(prof.fit_points().len(), 3);
    }

    #[test]
    fn ptfi_mi_limits() {
        let v = ptfi_antipodal_mi(8, &[0.0, 1.0], 4, false, 3, 1, Some(1)).unwrap();
        assert_eq!(v[0].1.mean, 0.0);
        assert_eq!(v[1].1.mean, 1.0);
    }

    #[test]
    fn simulate_point_limits() {
        let s = simulate_point(8, 5, CircuitConfig::fs_moc(1.0, 1.0, 2), 3, &[4], Some(1)).unwrap();
        assert_eq!(s.bmi.mean, 1.0);
        assert_eq!(s.wilson[0].1.mean, 1.0);
    }
}
