//! Optimization drivers: GA-fusion, ST-fusion, random-fusion and expansion,
//! plus an exhaustive oracle for tiny instances.
//!
//! Fusion drivers repeat "generate proposal, fuse with current" until `T`
//! consecutive fusions fail to lower the energy by more than `1e-9`, the
//! iteration cap is reached, or the time budget runs out.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::{DiscreteEnergy, Labeling};
use crate::error::{invalid, MrfError, Result};
use crate::moves::{build_expansion, fuse, solve_move, truncate_to_submodular};
use crate::proposals::{default_k, optimize_ga_split, random_proposal, st_proposal};

/// Minimum energy decrease that counts as progress.
pub const IMPROVEMENT_TOL: f64 = 1e-9;

/// Largest search space [`brute_force_min`] will enumerate.
pub const BRUTE_FORCE_LIMIT: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    GaFusion,
    StFusion,
    RandomFusion,
    /// Expansion with QPBO on every move; unlabeled nodes keep their label.
    Expansion,
    /// Expansion with non-submodular terms truncated before each cut.
    ExpansionTruncated,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::GaFusion,
        Algorithm::StFusion,
        Algorithm::RandomFusion,
        Algorithm::Expansion,
        Algorithm::ExpansionTruncated,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::GaFusion => "ga",
            Algorithm::StFusion => "st",
            Algorithm::RandomFusion => "random",
            Algorithm::Expansion => "expansion",
            Algorithm::ExpansionTruncated => "expansion-trunc",
        }
    }

    pub fn is_fusion(self) -> bool {
        matches!(
            self,
            Algorithm::GaFusion | Algorithm::StFusion | Algorithm::RandomFusion
        )
    }
}

impl FromStr for Algorithm {
    type Err = MrfError;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| MrfError::InvalidInput(format!("unknown algorithm `{s}`")))
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialLabeling {
    Zeros,
    UnaryArgmin,
    Given(Labeling),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub time_budget: Option<Duration>,
    pub max_iterations: Option<usize>,
    /// Consecutive non-improving fusions before a fusion solver stops.
    pub convergence_window: usize,
    pub seed: u64,
    /// Inner expansion steps per GA proposal; `min(5, L)` when unset.
    pub k: Option<usize>,
    pub initial: InitialLabeling,
}

impl SolverConfig {
    /// Config with no stopping budget yet; set one of
    /// [`with_time_budget`](Self::with_time_budget) or
    /// [`with_max_iterations`](Self::with_max_iterations).
    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            time_budget: None,
            max_iterations: None,
            convergence_window: 20,
            seed: 0,
            k: None,
            initial: InitialLabeling::Zeros,
        }
    }

    pub fn with_time_budget(mut self, budget: Duration) -> Self {
        self.time_budget = Some(budget);
        self
    }

    pub fn with_max_iterations(mut self, iterations: usize) -> Self {
        self.max_iterations = Some(iterations);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_convergence_window(mut self, window: usize) -> Self {
        self.convergence_window = window;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    pub fn with_initial(mut self, initial: InitialLabeling) -> Self {
        self.initial = initial;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let has_budget = self.time_budget.is_some_and(|b| !b.is_zero());
        let has_cap = self.max_iterations.is_some_and(|m| m > 0);
        if !has_budget && !has_cap {
            return invalid("solver needs a positive time budget or iteration cap");
        }
        if self.convergence_window == 0 {
            return invalid("convergence window must be positive");
        }
        if self.k == Some(0) {
            return invalid("K must be at least 1");
        }
        Ok(())
    }

    fn initial_labeling(&self, energy: &DiscreteEnergy) -> Result<Labeling> {
        match &self.initial {
            InitialLabeling::Zeros => Ok(Labeling::zeros(energy.node_count())),
            InitialLabeling::UnaryArgmin => Ok(energy.unary_argmin()),
            InitialLabeling::Given(x) => {
                x.validate(energy.node_count(), energy.label_count())?;
                Ok(x.clone())
            }
        }
    }
}

/// One row of a solver trace. Iteration 0 is the initial labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Milliseconds since the solver started (monotonic clock).
    pub wall_ms: f64,
    pub energy: f64,
    pub proposal_energy: Option<f64>,
    pub labeling_rate: Option<f64>,
    pub rhos: Vec<f64>,
    pub alphas: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub algorithm: Algorithm,
    pub records: Vec<TraceRecord>,
    pub final_labeling: Labeling,
    pub final_energy: f64,
}

pub const TRACE_CSV_HEADER: &str = "iter,wall_ms,energy,proposal_energy,labeling_rate,rho,alpha";

impl SolverTrace {
    /// Whether the energy column never goes up.
    pub fn is_monotone(&self) -> bool {
        self.records.windows(2).all(|w| w[1].energy <= w[0].energy)
    }

    /// Number of solver iterations after the initial record.
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    /// Writes the trace as CSV. With `include_timing = false` the `wall_ms`
    /// column is left empty, which makes traces of equal runs byte-identical.
    pub fn write_csv<W: Write>(&self, mut out: W, include_timing: bool) -> io::Result<()> {
        writeln!(out, "{TRACE_CSV_HEADER}")?;
        for r in &self.records {
            let mut line = String::new();
            write!(line, "{},", r.iteration).unwrap();
            if include_timing {
                write!(line, "{:.3}", r.wall_ms).unwrap();
            }
            write!(line, ",{:.16e},", r.energy).unwrap();
            if let Some(v) = r.proposal_energy {
                write!(line, "{v:.16e}").unwrap();
            }
            line.push(',');
            if let Some(v) = r.labeling_rate {
                write!(line, "{v:.16e}").unwrap();
            }
            line.push(',');
            let rhos: Vec<String> = r.rhos.iter().map(|v| format!("{v:.16e}")).collect();
            line.push_str(&rhos.join(";"));
            line.push(',');
            let alphas: Vec<String> = r.alphas.iter().map(|v| v.to_string()).collect();
            line.push_str(&alphas.join(";"));
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn to_csv(&self, include_timing: bool) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf, include_timing)
            .expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// Proposal-generation and approximation random streams derived from one seed.
struct RunStreams {
    proposals: ChaCha8Rng,
    approximation: ChaCha8Rng,
}

impl RunStreams {
    fn new(seed: u64) -> Self {
        let mut proposals = ChaCha8Rng::seed_from_u64(seed);
        proposals.set_stream(1);
        let mut approximation = ChaCha8Rng::seed_from_u64(seed);
        approximation.set_stream(2);
        Self {
            proposals,
            approximation,
        }
    }
}

struct Budget {
    start: Instant,
    time: Option<Duration>,
    max_iterations: Option<usize>,
}

impl Budget {
    fn new(config: &SolverConfig) -> Self {
        Self {
            start: Instant::now(),
            time: config.time_budget,
            max_iterations: config.max_iterations,
        }
    }

    fn elapsed_ms(&self) -> f64 {
        self.start.elapsed().as_secs_f64() * 1e3
    }

    fn exhausted(&self, iterations_done: usize) -> bool {
        self.max_iterations.is_some_and(|m| iterations_done >= m)
            || self.time.is_some_and(|t| self.start.elapsed() >= t)
    }
}

struct Proposal {
    labeling: Labeling,
    rhos: Vec<f64>,
    alphas: Vec<usize>,
}

fn initial_record(energy: f64) -> TraceRecord {
    TraceRecord {
        iteration: 0,
        wall_ms: 0.0,
        energy,
        proposal_energy: None,
        labeling_rate: None,
        rhos: Vec::new(),
        alphas: Vec::new(),
    }
}

fn fusion_loop(
    energy: &DiscreteEnergy,
    config: &SolverConfig,
    mut propose: impl FnMut(&Labeling, &mut RunStreams) -> Proposal,
) -> Result<(Labeling, SolverTrace)> {
    config.validate()?;
    let budget = Budget::new(config);
    let mut streams = RunStreams::new(config.seed);
    let mut current = config.initial_labeling(energy)?;
    let mut current_energy = energy.energy_of(&current);
    let mut records = vec![initial_record(current_energy)];
    let mut stale = 0;
    let mut iteration = 0;

    while !budget.exhausted(iteration) && stale < config.convergence_window {
        iteration += 1;
        let proposal = propose(&current, &mut streams);
        let outcome = fuse(energy, &current, &proposal.labeling)?;
        if outcome.energy < current_energy - IMPROVEMENT_TOL {
            stale = 0;
        } else {
            stale += 1;
        }
        current = outcome.labeling;
        current_energy = outcome.energy;
        records.push(TraceRecord {
            iteration,
            wall_ms: budget.elapsed_ms(),
            energy: current_energy,
            proposal_energy: Some(outcome.proposal_energy),
            labeling_rate: Some(outcome.labeling_rate),
            rhos: proposal.rhos,
            alphas: proposal.alphas,
        });
    }

    let trace = SolverTrace {
        algorithm: config.algorithm,
        records,
        final_labeling: current.clone(),
        final_energy: current_energy,
    };
    Ok((current, trace))
}

/// Fusion with proposals from expansion moves on random graph approximations.
pub fn ga_fusion(
    energy: &DiscreteEnergy,
    config: &SolverConfig,
) -> Result<(Labeling, SolverTrace)> {
    let k = config.k.unwrap_or_else(|| default_k(energy.label_count()));
    fusion_loop(energy, config, |current, streams| {
        let p = optimize_ga_split(
            energy,
            current,
            k,
            &mut streams.proposals,
            &mut streams.approximation,
        );
        Proposal {
            labeling: p.labeling,
            rhos: p.steps.iter().map(|s| s.rho).collect(),
            alphas: p.steps.iter().map(|s| s.alpha).collect(),
        }
    })
}

/// Fusion with exact minimizers over random spanning forests as proposals.
pub fn st_fusion(
    energy: &DiscreteEnergy,
    config: &SolverConfig,
) -> Result<(Labeling, SolverTrace)> {
    fusion_loop(energy, config, |_, streams| Proposal {
        labeling: st_proposal(energy, &mut streams.proposals),
        rhos: Vec::new(),
        alphas: Vec::new(),
    })
}

/// Fusion with uniformly random labelings as proposals.
pub fn random_fusion(
    energy: &DiscreteEnergy,
    config: &SolverConfig,
) -> Result<(Labeling, SolverTrace)> {
    let (n, l) = (energy.node_count(), energy.label_count());
    fusion_loop(energy, config, |_, streams| Proposal {
        labeling: random_proposal(n, l, &mut streams.proposals),
        rhos: Vec::new(),
        alphas: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionMode {
    /// QPBO on the expansion energy, unlabeled nodes keep their label.
    Qpbo,
    /// Truncate non-submodular terms, then cut; moves that raise the true energy are rejected.
    Truncate,
}

/// Sweeps `alpha = 0..L` until a full sweep brings no decrease.
pub fn alpha_expansion(
    energy: &DiscreteEnergy,
    config: &SolverConfig,
    mode: ExpansionMode,
) -> Result<(Labeling, SolverTrace)> {
    config.validate()?;
    let budget = Budget::new(config);
    let l = energy.label_count();
    let mut current = config.initial_labeling(energy)?;
    let mut current_energy = energy.energy_of(&current);
    let mut records = vec![initial_record(current_energy)];
    let mut iteration = 0;

    'sweeps: loop {
        let mut improved = false;
        for alpha in 0..l {
            if budget.exhausted(iteration) {
                break 'sweeps;
            }
            iteration += 1;
            let mut binary = build_expansion(energy, &current, alpha)?;
            if mode == ExpansionMode::Truncate {
                binary = truncate_to_submodular(&binary);
            }
            let (candidate, labeling_rate) = solve_move(&binary);
            let candidate_energy = energy.energy_of(&candidate);
            if candidate_energy < current_energy - IMPROVEMENT_TOL {
                improved = true;
            }
            if candidate_energy <= current_energy {
                current = candidate;
                current_energy = candidate_energy;
            }
            records.push(TraceRecord {
                iteration,
                wall_ms: budget.elapsed_ms(),
                energy: current_energy,
                proposal_energy: None,
                labeling_rate: Some(labeling_rate),
                rhos: Vec::new(),
                alphas: vec![alpha],
            });
        }
        if !improved {
            break;
        }
    }

    let algorithm = match mode {
        ExpansionMode::Qpbo => Algorithm::Expansion,
        ExpansionMode::Truncate => Algorithm::ExpansionTruncated,
    };
    let trace = SolverTrace {
        algorithm,
        records,
        final_labeling: current.clone(),
        final_energy: current_energy,
    };
    Ok((current, trace))
}

/// Runs the algorithm named in the config.
pub fn solve(energy: &DiscreteEnergy, config: &SolverConfig) -> Result<(Labeling, SolverTrace)> {
    match config.algorithm {
        Algorithm::GaFusion => ga_fusion(energy, config),
        Algorithm::StFusion => st_fusion(energy, config),
        Algorithm::RandomFusion => random_fusion(energy, config),
        Algorithm::Expansion => alpha_expansion(energy, config, ExpansionMode::Qpbo),
        Algorithm::ExpansionTruncated => alpha_expansion(energy, config, ExpansionMode::Truncate),
    }
}

/// Exact minimum by enumeration. Among equal minima the lexicographically
/// smallest labeling (node 0 most significant) wins.
pub fn brute_force_min(energy: &DiscreteEnergy) -> Result<(Labeling, f64)> {
    let n = energy.node_count();
    let l = energy.label_count();
    let space = (l as f64).powi(n as i32);
    if space > BRUTE_FORCE_LIMIT {
        return Err(MrfError::TooLarge(space));
    }
    let mut x = vec![0usize; n];
    let mut best = (x.clone(), energy.energy_of(&x));
    loop {
        // Odometer increment with the last node varying fastest.
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok((Labeling::new(best.0), best.1));
            }
            pos -= 1;
            x[pos] += 1;
            if x[pos] < l {
                break;
            }
            x[pos] = 0;
        }
        let v = energy.energy_of(&x);
        if v < best.1 {
            best = (x.clone(), v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::GraphTopology;

    fn potts_grid(side: usize, l: usize, unary: Vec<f64>, lambda: f64) -> DiscreteEnergy {
        let mut edges = Vec::new();
        for r in 0..side {
            for c in 0..side {
                let p = r * side + c;
                if c + 1 < side {
                    edges.push((p, p + 1));
                }
                if r + 1 < side {
                    edges.push((p, p + side));
                }
            }
        }
        let m = edges.len();
        let table: Vec<f64> = (0..l * l)
            .map(|k| if k / l == k % l { 0.0 } else { 1.0 })
            .collect();
        let topo = GraphTopology::new(side * side, edges).unwrap();
        DiscreteEnergy::new(topo, l, unary, table.repeat(m), lambda).unwrap()
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert!("bp".parse::<Algorithm>().is_err());
    }

    #[test]
    fn config_needs_a_budget() {
        let c = SolverConfig::new(Algorithm::GaFusion);
        assert!(c.validate().is_err());
        assert!(c.clone().with_max_iterations(3).validate().is_ok());
        assert!(c
            .with_time_budget(Duration::from_millis(5))
            .validate()
            .is_ok());
    }

    #[test]
    fn brute_force_single_node() {
        let topo = GraphTopology::new(1, vec![]).unwrap();
        let e = DiscreteEnergy::new(topo, 3, vec![0.4, -1.0, 0.2], vec![], 1.0).unwrap();
        let (x, v) = brute_force_min(&e).unwrap();
        assert_eq!(x.as_slice(), &[1]);
        assert_eq!(v, -1.0);
    }

    #[test]
    fn brute_force_potts_grid_by_hand() {
        // Nodes 0,1 / 2,3. Node 0 leans to 0, the rest to 1.
        //   [0,0,1,1]: unary 0+0.6+0+0 = 0.6, cut edges (0,2),(1,3) -> 1.6
        //   [0,0,0,0]: unary 0+0.6+1+1 = 2.6
        //   [1,1,1,1]: unary 1.2,             no cut edges          -> 1.2
        //   [0,1,1,1]: unary 0,               cut edges (0,1),(0,2) -> 1.0
        let unary = vec![0.0, 1.2, 0.6, 0.0, 1.0, 0.0, 1.0, 0.0];
        let e = potts_grid(2, 2, unary, 0.5);
        let (x, v) = brute_force_min(&e).unwrap();
        assert_eq!(x.as_slice(), &[0, 1, 1, 1]);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn brute_force_ties_are_lexicographic() {
        let e = potts_grid(2, 3, vec![0.0; 12], 1.0);
        let (x, v) = brute_force_min(&e).unwrap();
        assert_eq!(x.as_slice(), &[0, 0, 0, 0]);
        assert_eq!(v, 0.0);
    }

    #[test]
    fn brute_force_size_guard() {
        let e = potts_grid(5, 3, vec![0.0; 75], 1.0);
        assert!(matches!(brute_force_min(&e), Err(MrfError::TooLarge(_))));
    }

    #[test]
    fn zero_unary_potts_expansion_reaches_zero() {
        let e = potts_grid(3, 3, vec![0.0; 27], 1.0);
        let cfg = SolverConfig::new(Algorithm::Expansion).with_max_iterations(100);
        let (x, trace) = alpha_expansion(&e, &cfg, ExpansionMode::Qpbo).unwrap();
        assert_eq!(trace.final_energy, 0.0);
        assert!(x.iter().all(|&v| v == x[0]));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let e = potts_grid(3, 3, (0..27).map(|k| (k % 4) as f64 * 0.2).collect(), 0.3);
        let cfg = SolverConfig::new(Algorithm::GaFusion)
            .with_max_iterations(4)
            .with_seed(3);
        let (_, trace) = ga_fusion(&e, &cfg).unwrap();
        let csv = trace.to_csv(false);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], TRACE_CSV_HEADER);
        assert_eq!(lines.len(), trace.records.len() + 1);
        assert!(lines[1].starts_with("0,,"));
        assert!(lines.iter().all(|l| l.split(',').count() == 7));
    }
}
