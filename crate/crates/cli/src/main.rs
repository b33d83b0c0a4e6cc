use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgAction, Args, CommandFactory, Parser, Subcommand};
use serde::Serialize;

use fsmoc::analysis::{data_collapse_with, fit_power_law, CollapseOptions, PowerLawFit, SearchBox};
use fsmoc::circuits::{CircuitConfig, Model};
use fsmoc::harness::{
    csv_string, curves_from_rows, linspace, mi_profile, parse_config, parse_csv, rbh_check, run_plan, serialize_csv,
    simulate_point, Cut, ExperimentPlan, MiProfile, Observable, DESK_SIZES,
};
use fsmoc::percolation::{estimate_threshold_with, size_seed, surface_threshold_from_duality, SpanningCurve};
use fsmoc::plot::{emit_plot, PlotKind, PlotOptions};
use fsmoc::{Error, OutcomePolicy, Result};

/// Measurement-only circuit simulator for the Z2 gauge-Higgs model.
#[derive(Parser, Debug)]
#[command(name = "fsmoc", version)]
struct Cli {
    /// Flat key=value file; explicit flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long, global = true)]
    lx: Option<usize>,
    #[arg(long, global = true)]
    ly: Option<usize>,
    /// Number of time steps.
    #[arg(long, global = true)]
    nt: Option<usize>,
    /// Number of trajectories per point.
    #[arg(long, global = true)]
    ns: Option<usize>,
    #[arg(long, global = true)]
    pj: Option<f64>,
    #[arg(long, global = true)]
    pk: Option<f64>,
    #[arg(long, global = true)]
    pzx: Option<f64>,
    /// Evaluate after an extra Z-round (for scans: in addition to full cycles).
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    half_cycle: bool,
    /// Project every measurement onto its +1 eigenspace.
    #[arg(long, global = true, action = ArgAction::SetTrue)]
    force_plus: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output path; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// fs_moc or zx_randomized.
    #[arg(long, global = true)]
    model: Option<Model>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Statistics at one parameter point, as JSON.
    Simulate {
        /// Wilson line lengths, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "4")]
        wilson: Vec<usize>,
    },
    /// Scan a cut or the full grid, writing result CSV.
    Scan {
        #[arg(long, conflicts_with = "grid")]
        cut: Option<Cut>,
        #[arg(long, action = ArgAction::SetTrue)]
        grid: bool,
        /// Explicit scan values, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "range")]
        values: Vec<f64>,
        /// start:end:count.
        #[arg(long)]
        range: Option<String>,
        /// Lattice sizes such as 8x5,10x6.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        wilson: Vec<usize>,
    },
    /// Fit (p_c, nu) to the curves of a result CSV.
    Collapse {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "s_topo")]
        observable: Observable,
        #[arg(long, default_value_t = 0.0)]
        pc_min: f64,
        #[arg(long, default_value_t = 1.0)]
        pc_max: f64,
        #[arg(long, default_value_t = 0.3)]
        nu_min: f64,
        #[arg(long, default_value_t = 3.0)]
        nu_max: f64,
        #[arg(long, default_value_t = 200)]
        bootstrap: usize,
    },
    /// Power-law fit of boundary mutual information versus distance.
    FitKappa {
        /// Previously saved profile JSON; sampled afresh when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Distances as a comma list or a:b range.
        #[arg(long, default_value = "3:15")]
        distances: String,
    },
    /// Bond-percolation spanning curves and threshold.
    Percolation {
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "32,64")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
        /// Where to write the threshold JSON; stdout when absent.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Compare the layered resource state with the pure-gauge circuit.
    RbhCheck {
        #[arg(long, default_value_t = 6)]
        l: usize,
        #[arg(long, default_value_t = 6)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        lz: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.3,0.75,0.9")]
        pks: Vec<f64>,
    },
    /// Render an SVG from a result CSV.
    Plot {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "curves")]
        kind: PlotKind,
        #[arg(long, default_value = "s_topo")]
        observable: Observable,
        /// Collapse parameters p_c,nu; fitted when absent.
        #[arg(long, value_delimiter = ',')]
        collapse: Vec<f64>,
    },
}

#[derive(Serialize)]
struct KappaOutput {
    profile: MiProfile,
    fit: PowerLawFit,
    kappa_err: f64,
}

#[derive(Serialize)]
struct PercolationOutput {
    bond: fsmoc::percolation::ThresholdEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    surface: Option<fsmoc::percolation::ThresholdEstimate>,
}

fn main() -> ExitCode {
    match parse_args(std::env::args_os().collect()).and_then(run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

/// Parses argv, then fills flags missing from the command line with values from
/// the `--config` file when it names one.
fn parse_args(argv: Vec<std::ffi::OsString>) -> Result<Cli> {
    let cli = Cli::try_parse_from(&argv).unwrap_or_else(|e| e.exit());
    let Some(path) = &cli.config else { return Ok(cli) };
    let entries = parse_config(&fs::read_to_string(path)?)?;
    let argv = merge_config(argv, &entries)?;
    Ok(Cli::try_parse_from(argv).unwrap_or_else(|e| e.exit()))
}

fn merge_config(
    mut argv: Vec<std::ffi::OsString>,
    entries: &BTreeMap<String, String>,
) -> Result<Vec<std::ffi::OsString>> {
    let root = Cli::command();
    let given: Vec<String> = argv.iter().filter_map(|a| a.to_str()).map(str::to_string).collect();
    let sub_name = root
        .get_subcommands()
        .map(|s| s.get_name().to_string())
        .find(|n| given.iter().any(|g| g == n))
        .ok_or_else(|| Error::Config("no subcommand".into()))?;
    let sub = root.find_subcommand(&sub_name).expect("subcommand exists");
    let known: std::collections::BTreeSet<String> = root
        .get_subcommands()
        .chain([&root])
        .flat_map(|cmd| cmd.get_arguments().filter_map(|a| a.get_long()).map(|l| l.replace('-', "_")))
        .collect();
    let applies = |key: &str| -> Option<bool> {
        root.get_arguments().chain(sub.get_arguments()).find_map(|a| {
            let long = a.get_long()?;
            (long.replace('-', "_") == key).then(|| matches!(a.get_action(), ArgAction::SetTrue))
        })
    };
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        if !known.contains(key) {
            return Err(Error::Config(format!("unknown config key '{key}'")));
        }
        let Some(is_switch) = applies(key) else { continue };
        let flag = format!("--{}", key.replace('_', "-"));
        if given.iter().any(|g| g == &flag || g.starts_with(&format!("{flag}="))) {
            continue;
        }
        if is_switch {
            match value.to_ascii_lowercase().as_str() {
                "true" | "1" | "yes" => argv.push(flag.into()),
                "false" | "0" | "no" => {}
                other => return Err(Error::Config(format!("{key}: expected a boolean, got '{other}'"))),
            }
        } else {
            argv.push(format!("{flag}={value}").into());
        }
    }
    Ok(argv)
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn circuit_config(c: &Common, default_nt: usize) -> CircuitConfig {
    CircuitConfig {
        p_j: c.pj.unwrap_or(0.0),
        p_k: c.pk.unwrap_or(1.0),
        p_zx: c.pzx.unwrap_or(0.5),
        n_t: c.nt.unwrap_or(default_nt),
        half_cycle: c.half_cycle,
        outcome_policy: if c.force_plus { OutcomePolicy::ForcePlus } else { OutcomePolicy::Random },
        master_seed: c.seed.unwrap_or(0),
        model: c.model.unwrap_or(Model::FsMoc),
    }
}

fn parse_size(s: &str) -> Result<(usize, usize)> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| Error::Parse(format!("size '{s}' must look like 12x7")))?;
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("size '{s}': {e}")));
    Ok((p(a)?, p(b)?))
}

fn parse_range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        return Err(Error::Parse(format!("range '{s}' must be start:end:count")));
    };
    let f = |t: &str| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("range '{s}': {e}")));
    let n = n.trim().parse::<usize>().map_err(|e| Error::Parse(format!("range '{s}': {e}")))?;
    Ok(linspace(f(a)?, f(b)?, n))
}

fn parse_distances(s: &str) -> Result<Vec<usize>> {
    let bad = |e: std::num::ParseIntError| Error::Parse(format!("distances '{s}': {e}"));
    if let Some((a, b)) = s.split_once(':') {
        let (a, b) = (a.trim().parse().map_err(bad)?, b.trim().parse().map_err(bad)?);
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(bad)).collect()
}

fn run(cli: Cli) -> Result<()> {
    let c = &cli.common;
    let out = c.out.as_deref();
    match &cli.cmd {
        Cmd::Simulate { wilson } => {
            let cfg = circuit_config(c, 10);
            let stats =
                simulate_point(c.lx.unwrap_or(8), c.ly.unwrap_or(5), cfg, c.ns.unwrap_or(100), wilson, c.workers)?;
            write_out(out, &json(&stats)?)
        }
        Cmd::Scan { cut, grid, values, range, sizes, wilson } => {
            let cut = match (cut, grid) {
                (_, true) => Cut::Grid,
                (Some(cut), false) => *cut,
                (None, false) => return Err(Error::Config("scan needs --cut or --grid".into())),
            };
            let mut plan = ExperimentPlan::preset(cut);
            if let Some(r) = range {
                plan = plan.with_values(&parse_range(r)?);
            } else if !values.is_empty() {
                plan = plan.with_values(values);
            }
            plan.sizes = if !sizes.is_empty() {
                sizes.iter().map(|s| parse_size(s)).collect::<Result<_>>()?
            } else if let (Some(lx), Some(ly)) = (c.lx, c.ly) {
                vec![(lx, ly)]
            } else {
                DESK_SIZES.to_vec()
            };
            if let Some(nt) = c.nt {
                plan.n_t = nt;
            }
            if let Some(ns) = c.ns {
                plan.n_s = ns;
            }
            if c.half_cycle {
                plan.half_cycle = vec![false, true];
            }
            if !wilson.is_empty() {
                plan.wilson_lengths = wilson.clone();
            }
            plan.model = c.model.unwrap_or(Model::FsMoc);
            plan.p_zx = c.pzx.unwrap_or(0.5);
            plan.master_seed = c.seed.unwrap_or(0);
            plan.workers = c.workers;
            if c.force_plus {
                plan.outcome_policy = OutcomePolicy::ForcePlus;
            }
            let rows = run_plan(&plan)?;
            if rows.is_empty() {
                return Err(Error::Config("scan produced no rows".into()));
            }
            write_out(out, &csv_string(&rows)?)
        }
        Cmd::Collapse { input, observable, pc_min, pc_max, nu_min, nu_max, bootstrap } => {
            let rows = parse_csv(input)?;
            let curves = curves_from_rows(&rows, *observable, c.half_cycle);
            let sbox = SearchBox { p_c: (*pc_min, *pc_max), nu: (*nu_min, *nu_max) };
            let opts = CollapseOptions { bootstrap: *bootstrap, seed: c.seed.unwrap_or(0), ..Default::default() };
            let result = data_collapse_with(&curves, &sbox, &opts)?;
            write_out(out, &json(&result)?)
        }
        Cmd::FitKappa { input, distances } => {
            let profile: MiProfile = match input {
                Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
                None => {
                    let mut cfg = circuit_config(c, 10);
                    cfg.p_j = c.pj.unwrap_or(1.0);
                    cfg.p_k = c.pk.unwrap_or(0.5);
                    let d = parse_distances(distances)?;
                    mi_profile(c.lx.unwrap_or(20), c.ly.unwrap_or(10), cfg, &d, c.ns.unwrap_or(2000), c.workers)?
                }
            };
            let fit = fit_power_law(&profile.fit_points())?;
            if fit.points_dropped > 0 {
                eprintln!("warning: dropped {} non-positive points", fit.points_dropped);
            }
            let kappa_err = fit.kappa_err();
            write_out(out, &json(&KappaOutput { profile, fit, kappa_err })?)
        }
        Cmd::Percolation { dim, sizes, trials, json: json_path, points } => {
            let seed = c.seed.unwrap_or(0);
            let bond = estimate_threshold_with(*dim, sizes, *trials, seed, c.workers)?;
            let mut csv = String::from("l,p,spanning_probability\n");
            for &l in &bond.sizes {
                let curve = SpanningCurve::sample(*dim, l, *trials, size_seed(seed, l), c.workers)?;
                for p in linspace(0.0, 1.0, *points) {
                    csv.push_str(&format!("{l},{p},{}\n", curve.at(p)));
                }
            }
            let surface = (*dim == 3).then(|| surface_threshold_from_duality(&bond));
            write_out(out, &csv)?;
            let text = json(&PercolationOutput { bond, surface })?;
            match json_path {
                Some(p) => fs::write(p, text)?,
                None if out.is_some() => std::io::stdout().write_all(text.as_bytes())?,
                None => eprint!("{text}"),
            }
            Ok(())
        }
        Cmd::RbhCheck { l, m, lz, pks } => {
            let rows = rbh_check(*l, *m, *lz, pks, c.ns.unwrap_or(300), c.seed.unwrap_or(0), c.workers)?;
            write_out(out, &serialize_csv(&rows)?)
        }
        Cmd::Plot { input, kind, observable, collapse } => {
            if !collapse.is_empty() && collapse.len() != 2 {
                return Err(Error::Config(format!("--collapse takes p_c,nu, got {} values", collapse.len())));
            }
            let out = out.ok_or_else(|| Error::Config("plot needs --out".into()))?;
            let opts = PlotOptions {
                observable: *observable,
                half_cycle: c.half_cycle,
                collapse: (collapse.len() == 2).then(|| (collapse[0], collapse[1])),
            };
            emit_plot(input, *kind, &opts, out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<std::ffi::OsString> {
        s.split_whitespace().map(Into::into).collect()
    }

    #[test]
    fn config_fills_missing_flags_only() {
        let mut cfg = BTreeMap::new();
        cfg.insert("lx".to_string(), "12".to_string());
        cfg.insert("ly".to_string(), "7".to_string());
        cfg.insert("half_cycle".to_string(), "true".to_string());
        cfg.insert("cut".to_string(), "ii".to_string());
        let argv = merge_config(args("fsmoc simulate --lx 10"), &cfg).unwrap();
        let cli = Cli::try_parse_from(argv).unwrap();
        assert_eq!(cli.common.lx, Some(10));
        assert_eq!(cli.common.ly, Some(7));
        assert!(cli.common.half_cycle);
    }

    #[test]
    fn unknown_config_key_rejected() {
        let mut cfg = BTreeMap::new();
        cfg.insert("lz_typo".to_string(), "1".to_string());
        assert!(merge_config(args("fsmoc simulate"), &cfg).is_err());
    }

    #[test]
    fn size_and_range_parsing() {
        assert_eq!(parse_size("12x7").unwrap(), (12, 7));
        assert!(parse_size("12,7").is_err());
        assert_eq!(parse_range("0.15:0.35:11").unwrap().len(), 11);
        assert_eq!(parse_distances("3:15").unwrap().len(), 13);
        assert_eq!(parse_distances("2,4").unwrap(), vec![2, 4]);
    }
}
