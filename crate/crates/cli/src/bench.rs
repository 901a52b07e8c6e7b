//! Runs an (instances x algorithms x seeds) matrix and summarizes it.

use std::io::Write;
use std::path::PathBuf;

use anyhow::Context;
use mrf_core::{
    relative_energy, solve, Algorithm, DiscreteEnergy, Labeling, RelativeScale, SolverConfig,
};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::format::parse_instance;
use crate::manifest::Manifest;

pub const RUNS_HEADER: &str =
    "run,instance,algo,replicate,seed,final_energy,relative_energy,iterations,wall_ms";
pub const SUMMARY_HEADER: &str = "instance,algo,runs,mean_energy,mean_relative_energy,best_energy";

#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub run: usize,
    pub instance: usize,
    pub algorithm: Algorithm,
    pub replicate: usize,
    pub seed: u64,
    pub final_energy: f64,
    /// Affine scale: 0 for the best run on the instance, 100 for the zero labeling.
    pub relative_energy: f64,
    pub iterations: usize,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub instance: usize,
    pub algorithm: Algorithm,
    pub runs: usize,
    pub mean_energy: f64,
    pub mean_relative_energy: f64,
    pub best_energy: f64,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub instances: Vec<PathBuf>,
    pub runs: Vec<RunRow>,
    pub summary: Vec<SummaryRow>,
}

/// Seed of run `index`, independent of scheduling.
pub fn run_seed(master: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(index as u64);
    rng.next_u64()
}

pub fn load_instances(paths: &[PathBuf]) -> anyhow::Result<Vec<DiscreteEnergy>> {
    paths
        .iter()
        .map(|p| {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            parse_instance(&text).with_context(|| format!("in {}", p.display()))
        })
        .collect()
}

/// Runs every cell of the manifest on at most `threads` worker threads.
pub fn run_bench(
    manifest: &Manifest,
    energies: &[DiscreteEnergy],
    threads: Option<usize>,
) -> anyhow::Result<BenchReport> {
    let mut jobs = Vec::new();
    for i in 0..energies.len() {
        for &algo in &manifest.algorithms {
            for r in 0..manifest.seeds {
                jobs.push((jobs.len(), i, algo, r));
            }
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().context("starting worker threads")?;
    let raw: Vec<mrf_core::Result<RunRow>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(run, i, algo, replicate)| {
                let seed = run_seed(manifest.master_seed, run);
                let mut cfg = SolverConfig::new(algo)
                    .with_seed(seed)
                    .with_convergence_window(manifest.convergence_window);
                cfg.time_budget = manifest.budget;
                cfg.max_iterations = manifest.max_iterations;
                let (_, trace) = solve(&energies[i], &cfg)?;
                let wall_ms = trace.records.last().map_or(0.0, |r| r.wall_ms);
                Ok(RunRow {
                    run,
                    instance: i,
                    algorithm: algo,
                    replicate,
                    seed,
                    final_energy: trace.final_energy,
                    relative_energy: f64::NAN,
                    iterations: trace.iterations(),
                    wall_ms,
                })
            })
            .collect()
    });
    let mut runs = raw.into_iter().collect::<mrf_core::Result<Vec<_>>>()?;

    for (i, e) in energies.iter().enumerate() {
        let zero = e.energy_of(&Labeling::zeros(e.node_count()));
        let best = runs
            .iter()
            .filter(|r| r.instance == i)
            .map(|r| r.final_energy)
            .fold(f64::INFINITY, f64::min);
        for r in runs.iter_mut().filter(|r| r.instance == i) {
            r.relative_energy = if r.final_energy <= best {
                0.0
            } else {
                relative_energy(r.final_energy, best, zero, RelativeScale::Affine)
                    .unwrap_or(f64::NAN)
            };
        }
    }

    let mut summary = Vec::new();
    for i in 0..energies.len() {
        for &algo in &manifest.algorithms {
            let cell: Vec<&RunRow> = runs
                .iter()
                .filter(|r| r.instance == i && r.algorithm == algo)
                .collect();
            let k = cell.len() as f64;
            summary.push(SummaryRow {
                instance: i,
                algorithm: algo,
                runs: cell.len(),
                mean_energy: cell.iter().map(|r| r.final_energy).sum::<f64>() / k,
                mean_relative_energy: cell.iter().map(|r| r.relative_energy).sum::<f64>() / k,
                best_energy: cell
                    .iter()
                    .map(|r| r.final_energy)
                    .fold(f64::INFINITY, f64::min),
            });
        }
    }
    Ok(BenchReport {
        instances: manifest.instances.clone(),
        runs,
        summary,
    })
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

impl BenchReport {
    fn name(&self, i: usize) -> String {
        self.instances[i].display().to_string().replace(',', "_")
    }

    /// Per-run CSV; `include_timing = false` leaves `wall_ms` empty.
    pub fn write_runs<W: Write>(&self, mut out: W, include_timing: bool) -> std::io::Result<()> {
        writeln!(out, "{RUNS_HEADER}")?;
        for r in &self.runs {
            let wall = if include_timing {
                format!("{:.3}", r.wall_ms)
            } else {
                String::new()
            };
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.run,
                self.name(r.instance),
                r.algorithm,
                r.replicate,
                r.seed,
                real(r.final_energy),
                real(r.relative_energy),
                r.iterations,
                wall
            )?;
        }
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "{SUMMARY_HEADER}")?;
        for s in &self.summary {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                self.name(s.instance),
                s.algorithm,
                s.runs,
                real(s.mean_energy),
                real(s.mean_relative_energy),
                real(s.best_energy)
            )?;
        }
        Ok(())
    }
}
