//! Measurement-only circuit schedulers.
//!
//! A [`Circuit`] holds the precomputed Pauli operators of one model, split into
//! a Z-round and an X-round. Each operator carries a [`Rate`] that resolves to
//! a measurement probability from the [`CircuitConfig`]. A [`Trajectory`]
//! evolves one stabilizer state through rounds, drawing basis coins and
//! outcomes from separate streams.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{GaugeGeometry, IsingGeometry};
use crate::lattice::Lattice;
use crate::pauli::PauliString;
use crate::rng::SampleRng;
use crate::tableau::{OutcomePolicy, Tableau};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    FsMoc,
    ZxRandomized,
    PureGauge,
    Ptfi1d,
    Ptfi2d,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::FsMoc => "fs_moc",
            Model::ZxRandomized => "zx_randomized",
            Model::PureGauge => "pure_gauge",
            Model::Ptfi1d => "ptfi_1d",
            Model::Ptfi2d => "ptfi_2d",
        }
    }
}

impl std::str::FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fs_moc" => Model::FsMoc,
            "zx_randomized" => Model::ZxRandomized,
            "pure_gauge" => Model::PureGauge,
            "ptfi_1d" => Model::Ptfi1d,
            "ptfi_2d" => Model::Ptfi2d,
            _ => return Err(Error::Parse(format!("unknown model {s:?}"))),
        })
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub p_j: f64,
    pub p_k: f64,
    pub p_zx: f64,
    pub n_t: usize,
    pub half_cycle: bool,
    pub outcome_policy: OutcomePolicy,
    pub master_seed: u64,
    pub model: Model,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        Self {
            p_j: 0.0,
            p_k: 0.0,
            p_zx: 0.5,
            n_t: 10,
            half_cycle: false,
            outcome_policy: OutcomePolicy::Random,
            master_seed: 0,
            model: Model::FsMoc,
        }
    }
}

impl CircuitConfig {
    pub fn fs_moc(p_j: f64, p_k: f64, n_t: usize) -> Self {
        Self { p_j, p_k, n_t, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_j", self.p_j), ("p_k", self.p_k), ("p_zx", self.p_zx)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} = {p} is outside [0, 1]")));
            }
        }
        if self.n_t == 0 {
            return Err(Error::Config("n_t must be at least 1".into()));
        }
        Ok(())
    }
}

/// Measurement probability of an operator family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rate {
    PJ,
    PK,
    OneMinusPJ,
    OneMinusPK,
}

impl Rate {
    pub fn resolve(self, cfg: &CircuitConfig) -> f64 {
        match self {
            Rate::PJ => cfg.p_j,
            Rate::PK => cfg.p_k,
            Rate::OneMinusPJ => 1.0 - cfg.p_j,
            Rate::OneMinusPK => 1.0 - cfg.p_k,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundKind {
    Z,
    X,
}

/// One family of mutually commuting operators measured at a common rate.
#[derive(Clone, Debug)]
pub struct OpFamily {
    pub rate: Rate,
    pub ops: Vec<PauliString>,
}

#[derive(Clone, Debug)]
pub struct Circuit {
    nq: usize,
    z_round: Vec<OpFamily>,
    x_round: Vec<OpFamily>,
}

impl Circuit {
    /// Z-round `{B_p @ p_k, W_e @ p_j}`, X-round `{X_e @ 1−p_k, X_v @ 1−p_j}`.
    pub fn fs_moc(lat: &Lattice) -> Self {
        let nq = lat.nq();
        let plaq = (0..lat.plaquettes().len()).map(|p| lat.plaquette(p).to_pauli(nq)).collect();
        let coup = lat.bulk_edges().iter().map(|&e| lat.edge_coupling(e).to_pauli(nq)).collect();
        let ex = lat.edges().map(|e| lat.edge_x(e).to_pauli(nq)).collect();
        let vx = lat.vertices().map(|v| lat.vertex_x(v).to_pauli(nq)).collect();
        Self {
            nq,
            z_round: vec![OpFamily { rate: Rate::PK, ops: plaq }, OpFamily { rate: Rate::PJ, ops: coup }],
            x_round: vec![OpFamily { rate: Rate::OneMinusPK, ops: ex }, OpFamily { rate: Rate::OneMinusPJ, ops: vx }],
        }
    }

    /// Edges only: `B_p @ p_k` then `X_e @ 1−p_k`.
    pub fn pure_gauge(geom: &GaugeGeometry) -> Self {
        let nq = geom.n_edges();
        let plaq = geom.plaquettes().iter().map(|p| PauliString::from_supports(nq, &[], p)).collect();
        let ex = (0..nq).map(|e| PauliString::from_supports(nq, &[e], &[])).collect();
        Self {
            nq,
            z_round: vec![OpFamily { rate: Rate::PK, ops: plaq }],
            x_round: vec![OpFamily { rate: Rate::OneMinusPK, ops: ex }],
        }
    }

    /// `L_e = Z Z @ p_j` then `X_v @ 1−p_j`.
    pub fn ptfi(geom: &IsingGeometry) -> Self {
        let nq = geom.n_sites();
        let bonds = geom.bonds().iter().map(|&(a, b)| PauliString::from_supports(nq, &[], &[a, b])).collect();
        let vx = (0..nq).map(|v| PauliString::from_supports(nq, &[v], &[])).collect();
        Self {
            nq,
            z_round: vec![OpFamily { rate: Rate::PJ, ops: bonds }],
            x_round: vec![OpFamily { rate: Rate::OneMinusPJ, ops: vx }],
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.nq
    }

    pub fn round(&self, kind: RoundKind) -> &[OpFamily] {
        match kind {
            RoundKind::Z => &self.z_round,
            RoundKind::X => &self.x_round,
        }
    }

    pub fn round_len(&self, kind: RoundKind) -> usize {
        self.round(kind).iter().map(|f| f.ops.len()).sum()
    }
}

/// One Monte-Carlo trajectory of a circuit, starting from `|+⟩^n`.
#[derive(Clone, Debug)]
pub struct Trajectory<'c> {
    circuit: &'c Circuit,
    cfg: CircuitConfig,
    tableau: Tableau,
    rng: SampleRng,
    rounds: usize,
}

impl<'c> Trajectory<'c> {
    pub fn new(circuit: &'c Circuit, cfg: CircuitConfig, rng: SampleRng) -> Result<Self> {
        cfg.validate()?;
        Ok(Self { circuit, cfg, tableau: Tableau::new_plus(circuit.nq), rng, rounds: 0 })
    }

    pub fn for_sample(circuit: &'c Circuit, cfg: CircuitConfig, sample_index: u64) -> Result<Self> {
        Self::new(circuit, cfg, SampleRng::new(cfg.master_seed, sample_index))
    }

    pub fn tableau(&self) -> &Tableau {
        &self.tableau
    }

    pub fn into_tableau(self) -> Tableau {
        self.tableau
    }

    pub fn config(&self) -> &CircuitConfig {
        &self.cfg
    }

    /// Rounds applied so far.
    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Draws one basis coin per operator of the round, in raster order.
    pub fn draw_coins(&mut self, kind: RoundKind) -> Vec<bool> {
        let mut coins = Vec::with_capacity(self.circuit.round_len(kind));
        for fam in self.circuit.round(kind) {
            let p = fam.rate.resolve(&self.cfg);
            for _ in &fam.ops {
                coins.push(self.rng.basis.gen::<f64>() < p);
            }
        }
        coins
    }

    /// Measures the selected operators of a round in the given order
    /// (raster order when `order` is `None`).
    pub fn apply_round(&mut self, kind: RoundKind, coins: &[bool], order: Option<&[usize]>) {
        let ops: Vec<&PauliString> = self.circuit.round(kind).iter().flat_map(|f| f.ops.iter()).collect();
        assert_eq!(coins.len(), ops.len(), "one coin per operator");
        let policy = self.cfg.outcome_policy;
        let mut measure = |i: usize| {
            if coins[i] {
                self.tableau.project(ops[i], policy, &mut self.rng.outcome);
            }
        };
        match order {
            None => (0..ops.len()).for_each(&mut measure),
            Some(ord) => ord.iter().for_each(|&i| measure(i)),
        }
        self.rounds += 1;
    }

    pub fn round(&mut self, kind: RoundKind) {
        let coins = self.draw_coins(kind);
        self.apply_round(kind, &coins, None);
    }

    pub fn z_round(&mut self) {
        self.round(RoundKind::Z)
    }

    pub fn x_round(&mut self) {
        self.round(RoundKind::X)
    }

    /// One time step: a Z-round then an X-round, or for the ZX-randomized model
    /// a single round chosen by a `p_zx` coin.
    pub fn step(&mut self) {
        if self.cfg.model == Model::ZxRandomized {
            let z = self.rng.basis.gen::<f64>() < self.cfg.p_zx;
            self.round(if z { RoundKind::Z } else { RoundKind::X });
        } else {
            self.z_round();
            self.x_round();
        }
    }

    /// Runs `n_t` steps.
    pub fn run_full(&mut self) {
        for _ in 0..self.cfg.n_t {
            self.step();
        }
    }

    /// Runs `n_t` steps and, if `half_cycle` is set, one more Z-round.
    pub fn run(&mut self) {
        self.run_full();
        if self.cfg.half_cycle {
            self.z_round();
        }
    }
}

fn run_model(circuit: &Circuit, cfg: &CircuitConfig, rng: SampleRng, expected: &[Model]) -> Result<Tableau> {
    if !expected.contains(&cfg.model) {
        return Err(Error::Config(format!("model {} does not match this scheduler", cfg.model)));
    }
    let mut t = Trajectory::new(circuit, *cfg, rng)?;
    t.run();
    Ok(t.into_tableau())
}

pub fn run_fs_moc(lat: &Lattice, cfg: &CircuitConfig, rng: SampleRng) -> Result<Tableau> {
    run_model(&Circuit::fs_moc(lat), cfg, rng, &[Model::FsMoc])
}

pub fn run_zx_randomized(lat: &Lattice, cfg: &CircuitConfig, rng: SampleRng) -> Result<Tableau> {
    run_model(&Circuit::fs_moc(lat), cfg, rng, &[Model::ZxRandomized])
}

pub fn run_pure_gauge(geom: &GaugeGeometry, cfg: &CircuitConfig, rng: SampleRng) -> Result<Tableau> {
    run_model(&Circuit::pure_gauge(geom), cfg, rng, &[Model::PureGauge])
}

pub fn run_ptfi(geom: &IsingGeometry, cfg: &CircuitConfig, rng: SampleRng) -> Result<Tableau> {
    run_model(&Circuit::ptfi(geom), cfg, rng, &[Model::Ptfi1d, Model::Ptfi2d])
}
