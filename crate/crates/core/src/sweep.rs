//! ε-sweeps: every member run, consecutive L¹ gaps, diagnostics, the
//! Tartar table and, for constant w₀, the gap to the scalar reduction.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compactness::{diagnostics, DecayRow, DiagnosticsReport, TartarRow};
use crate::error::{Error, Result};
use crate::fv::{reduction_gap, solve_scalar, FVConfig, ScalarSource};
use crate::grid::{l1_distance, Trajectory, Window};
use crate::io;
use crate::scenario::Scenario;
use crate::svg::{self, Panel, Series};
use crate::testfn::TestFunctionLibrary;
use crate::viscous::{self, ViscousConfig};
use crate::young::{empirical_measure, tartar_table, BinSpec};

/// Bins per axis for the Young-measure histograms.
pub const TARTAR_BINS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub eps_coarse: f64,
    pub eps_fine: f64,
    pub l1: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReductionRow {
    pub epsilon: f64,
    /// L¹ distance at t_end to the inviscid scalar solution.
    pub gap: f64,
}

/// A member run that did not finish.
#[derive(Debug)]
pub struct MemberFailure {
    pub epsilon: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub scenario: String,
    pub model: String,
    pub epsilons: Vec<f64>,
    pub gaps: Vec<GapRow>,
    pub reduction: Vec<ReductionRow>,
    pub tartar: Vec<TartarRow>,
    pub reports: Vec<DiagnosticsReport>,
    pub failed: Vec<String>,
}

#[derive(Debug)]
pub struct SweepResult {
    /// Finished members, in ε order.
    pub trajectories: Vec<Trajectory>,
    pub failures: Vec<MemberFailure>,
    pub summary: SweepSummary,
}

impl SweepResult {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    /// Rows of the decay table, ordered by ε then functional.
    pub fn decay_rows(&self) -> Vec<DecayRow> {
        let s = &self.summary;
        let mut rows = Vec::new();
        for r in &s.reports {
            let eps = r.epsilon;
            rows.extend(r.weak_residuals.iter().cloned());
            for d in &r.dissipation {
                rows.push(DecayRow { epsilon: eps, functional: format!("D[{}]", d.pair), value: d.d });
            }
            for w in &r.w12 {
                rows.push(DecayRow { epsilon: eps, functional: format!("w12[{}]", w.pair), value: w.value });
            }
            if let Some(t) = s.tartar.iter().find(|t| t.epsilon == eps) {
                rows.push(DecayRow { epsilon: eps, functional: "tartar_max".into(), value: t.max_abs });
                rows.push(DecayRow { epsilon: eps, functional: "tartar_mean".into(), value: t.mean_abs });
            }
            if let Some(g) = s.gaps.iter().find(|g| g.eps_fine == eps) {
                rows.push(DecayRow { epsilon: eps, functional: "l1_gap".into(), value: g.l1 });
            }
            if let Some(g) = s.reduction.iter().find(|g| g.epsilon == eps) {
                rows.push(DecayRow { epsilon: eps, functional: "reduction_gap".into(), value: g.gap });
            }
        }
        rows
    }
}

/// Runs every ε of the scenario on at most `threads` workers (0 lets rayon
/// choose). Results do not depend on the worker count.
pub fn run_sweep(scenario: &Scenario, threads: usize) -> Result<SweepResult> {
    if scenario.epsilons.len() < 2 {
        return Err(Error::Config(format!(
            "a sweep needs at least two epsilon values, got {}",
            scenario.epsilons.len()
        )));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let library = TestFunctionLibrary::standard(&scenario.grid, scenario.t_end);
    let w0 = scenario.w0_values();
    let members: Vec<(f64, Result<(Trajectory, DiagnosticsReport)>)> = pool.install(|| {
        scenario
            .epsilons
            .par_iter()
            .map(|&eps| {
                let run = || -> Result<(Trajectory, DiagnosticsReport)> {
                    let cfg = ViscousConfig::for_scenario(scenario, eps);
                    let traj = viscous::solve(&scenario.model, scenario, &cfg)?;
                    let report = diagnostics(&scenario.name, &traj, &scenario.model, &w0, None, &library)?;
                    Ok((traj, report))
                };
                (eps, run())
            })
            .collect()
    });

    let mut trajectories = Vec::new();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (epsilon, r) in members {
        match r {
            Ok((t, d)) => {
                trajectories.push(t);
                reports.push(d);
            }
            Err(error) => failures.push(MemberFailure { epsilon, error }),
        }
    }

    let dx = scenario.grid.dx();
    let gaps = trajectories
        .windows(2)
        .map(|p| GapRow {
            eps_coarse: p[0].epsilon,
            eps_fine: p[1].epsilon,
            l1: l1_distance(&p[0].last().rho, &p[1].last().rho, dx),
        })
        .collect();

    let tartar = if trajectories.is_empty() {
        Vec::new()
    } else {
        tartar_table(&trajectories, &scenario.model, TARTAR_BINS)?
    };
    for r in reports.iter_mut() {
        r.tartar = tartar.iter().filter(|t| t.epsilon == r.epsilon).cloned().collect();
    }

    let mut reduction = Vec::new();
    if let (Some(w), false) = (scenario.w_const, trajectories.is_empty()) {
        let h = scenario.model.scalar_flux(w)?;
        let cfg = FVConfig::for_scenario(scenario);
        let scalar = solve_scalar(&h, &ScalarSource::frozen(&scenario.model, w), &scenario.rho0, &scenario.grid, &cfg)?;
        for t in &trajectories {
            let g = reduction_gap(&scenario.model, w, t, &scalar)?;
            reduction.push(ReductionRow {
                epsilon: t.epsilon,
                gap: g.last().copied().unwrap_or(f64::NAN),
            });
        }
    }

    let summary = SweepSummary {
        scenario: scenario.name.clone(),
        model: scenario.model.name.clone(),
        epsilons: scenario.epsilons.clone(),
        gaps,
        reduction,
        tartar,
        reports,
        failed: failures.iter().map(|f| format!("epsilon {}: {}", f.epsilon, f.error)).collect(),
    };
    Ok(SweepResult {
        trajectories,
        failures,
        summary,
    })
}

/// Writes the bundle: decay.csv, final_NN.csv and measure_NN.csv per
/// finished member, summary.json and three SVG plots. Returns the files
/// written, sorted.
pub fn write_bundle(dir: &Path, result: &SweepResult) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let decay = dir.join("decay.csv");
    io::write_decay_csv(&decay, &result.decay_rows())?;
    written.push(decay);

    if !result.trajectories.is_empty() {
        let bins = BinSpec::covering(&result.trajectories, TARTAR_BINS, TARTAR_BINS)?;
        for (k, t) in result.trajectories.iter().enumerate() {
            let p = dir.join(format!("final_{k:02}.csv"));
            io::write_field_csv(&p, &t.grid, t.last())?;
            written.push(p);
            let m = &empirical_measure(std::slice::from_ref(t), &Window::full(t), &bins)?[0];
            let p = dir.join(format!("measure_{k:02}.csv"));
            io::write_measure_csv(&p, m)?;
            written.push(p);
        }
    }

    let summary = dir.join("summary.json");
    io::write_json(&summary, &result.summary)?;
    written.push(summary);

    for (name, svg) in plots(&result.summary) {
        let p = dir.join(name);
        fs::write(&p, svg)?;
        written.push(p);
    }
    written.sort();
    Ok(written)
}

fn plots(s: &SweepSummary) -> Vec<(&'static str, String)> {
    let mut gap = Panel::new("consecutive L1 gap at t_end", "epsilon (finer member)", "L1 gap").log_log();
    gap = gap.with(Series {
        label: "gap".into(),
        points: s.gaps.iter().map(|g| (g.eps_fine, g.l1)).collect(),
    });
    if !s.reduction.is_empty() {
        gap = gap.with(Series {
            label: "reduction gap".into(),
            points: s.reduction.iter().map(|g| (g.epsilon, g.gap)).collect(),
        });
    }
    let mut diss = Panel::new("entropy dissipation", "epsilon", "D").log_log();
    if let Some(first) = s.reports.first() {
        for (k, d) in first.dissipation.iter().enumerate() {
            diss = diss.with(Series {
                label: d.pair.clone(),
                points: s.reports.iter().map(|r| (r.epsilon, r.dissipation[k].d)).collect(),
            });
        }
    }
    let tartar = Panel::new("Tartar residual", "epsilon", "|T|")
        .log_log()
        .with(Series {
            label: "max".into(),
            points: s.tartar.iter().map(|t| (t.epsilon, t.max_abs)).collect(),
        })
        .with(Series {
            label: "mean".into(),
            points: s.tartar.iter().map(|t| (t.epsilon, t.mean_abs)).collect(),
        });
    vec![
        ("gap.svg", svg::render(&s.scenario, &[gap], 1)),
        ("dissipation.svg", svg::render(&s.scenario, &[diss], 1)),
        ("tartar.svg", svg::render(&s.scenario, &[tartar], 1)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::ScenarioConfig;

    fn small() -> Scenario {
        let json = r#"{
          "schema": 1, "name": "small",
          "model": {"name": "gc", "B": 1.0, "alpha": 0.5},
          "initial": {"rho": {"kind": "riemann", "left": 1.0, "right": 0.6, "x0": 0.5},
                      "w": {"kind": "constant", "value": 2.0}},
          "grid": {"x_left": 0.0, "x_right": 1.0, "n_cells": 64, "boundary": "outflow"},
          "t_end": 0.1, "record_every": 0.01, "epsilon": [0.02, 0.01]
        }"#;
        ScenarioConfig::from_json(json).unwrap().resolve(Path::new(".")).unwrap()
    }

    #[test]
    fn sweep_is_independent_of_worker_count() {
        let s = small();
        let a = run_sweep(&s, 1).unwrap();
        let b = run_sweep(&s, 2).unwrap();
        assert!(a.is_complete());
        assert_eq!(a.summary, b.summary);
        assert_eq!(a.summary.gaps.len(), 1);
        assert_eq!(a.summary.reduction.len(), 2);
        assert_eq!(a.summary.tartar.len(), 2);
        assert!(a.decay_rows().iter().any(|r| r.functional == "reduction_gap"));
    }

    #[test]
    fn bundle_files() {
        let s = small();
        let r = run_sweep(&s, 1).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let files = write_bundle(dir.path(), &r).unwrap();
        let names: Vec<String> = files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
        for n in ["decay.csv", "final_00.csv", "measure_01.csv", "summary.json", "tartar.svg"] {
            assert!(names.iter().any(|x| x == n), "{n} missing from {names:?}");
        }
    }

    #[test]
    fn single_epsilon_is_rejected() {
        let mut s = small();
        s.epsilons.truncate(1);
        assert!(matches!(run_sweep(&s, 1), Err(Error::Config(_))));
    }
}
