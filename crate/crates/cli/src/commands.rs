//! The five subcommands. Each writes its files into the output directory and
//! reports whether every equilibrium it emitted passed verification.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use fairgame::data_pipeline::generate;
use fairgame::eo_derivation::{feasible_region, shared_frontier, write_frontier_csv};
use fairgame::equilibrium::{solve, verify, Equilibrium, EquilibriumSet};
use fairgame::game_core::{response_curves, ResponseCurveTable};
use fairgame::scalar::linspace;
use fairgame::signal_model::{Group, RocCurve, SignalModel};
use fairgame::welfare::compare_policies;
use fairgame::Policy;
use serde::Serialize;

use crate::config::{Format, RunConfig};

pub struct Output {
    dir: PathBuf,
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        if !dir.is_dir() {
            anyhow::bail!("output directory {} does not exist", dir.display());
        }
        Ok(Self { dir: dir.to_path_buf() })
    }

    fn write(&self, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        body(&mut w).with_context(|| format!("writing {}", path.display()))?;
        w.flush().with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n")?;
            Ok(())
        })
    }
}

/// Whether every reported equilibrium verified.
pub type Verified = bool;

fn solver_grid(model: &SignalModel<f64>, cfg: &RunConfig) -> Vec<f64> {
    let g = model.grid();
    linspace(g.min, g.max, cfg.solver.grid_size)
}

#[derive(Serialize)]
struct CurvesJson<'a> {
    response: Vec<ResponseCurveTable<f64>>,
    roc: &'a [RocCurve<f64>; 2],
    frontier: &'a RocCurve<f64>,
}

/// FR/AR tables and ROC curves per group, plus the equalized-odds frontier.
/// Grid points where a group's likelihood ratio is undefined (both densities
/// vanish) are left out of its table.
pub fn curves(cfg: &RunConfig, out: &Output) -> Result<Verified> {
    let loaded = cfg.load()?;
    let (model, params) = (&loaded.model, &loaded.params);
    let grid = solver_grid(model, cfg);
    let mut desc = grid.clone();
    desc.reverse();
    let mut tables = Vec::new();
    for g in Group::ALL {
        let defined: Vec<f64> = grid.iter().copied().filter(|&t| model.likelihood_ratio(g, t).is_ok()).collect();
        tables.push(response_curves(model, params, g, &defined)?);
    }
    let roc = Group::ALL.map(|g| model.roc(g, &desc));
    let regions = roc.clone().map(|r| feasible_region(&r));
    let frontier = shared_frontier(&regions[0], &regions[1], cfg.solver.frontier_points);
    if cfg.wants(Format::Csv) {
        for (g, t) in Group::ALL.iter().zip(&tables) {
            out.write(&format!("curves_s{g}.csv"), |w| Ok(t.write_csv(w)?))?;
            out.write(&format!("roc_s{g}.csv"), |w| Ok(roc[g.index()].write_csv(w)?))?;
        }
        out.write("frontier.csv", |w| Ok(write_frontier_csv(&frontier, w)?))?;
    }
    if cfg.wants(Format::Json) {
        out.json("curves.json", &CurvesJson { response: tables, roc: &roc, frontier: &frontier })?;
    }
    Ok(true)
}

#[derive(Serialize)]
struct Checked<'a> {
    #[serde(flatten)]
    equilibrium: &'a Equilibrium<f64>,
    pass: bool,
}

#[derive(Serialize)]
struct PolicyReport<'a> {
    policy: Policy,
    equilibria: Vec<Checked<'a>>,
    diagnostics: &'a [String],
}

/// Solves each requested policy and verifies every equilibrium.
pub fn equilibria(cfg: &RunConfig, out: &Output) -> Result<Verified> {
    let loaded = cfg.load()?;
    let (model, params) = (&loaded.model, &loaded.params);
    let mut all_pass = true;
    let mut sets: Vec<(EquilibriumSet<f64>, Vec<bool>)> = Vec::new();
    for &policy in &cfg.policies {
        let set = solve(policy, model, params, &cfg.solver)?;
        let passes = set
            .equilibria
            .iter()
            .map(|e| Ok(verify(model, params, e, &cfg.solver)?.pass))
            .collect::<Result<Vec<bool>>>()?;
        all_pass &= passes.iter().all(|p| *p);
        for d in &set.diagnostics {
            log::warn!("{policy}: {d}");
        }
        sets.push((set, passes));
    }
    if cfg.wants(Format::Json) {
        for (set, passes) in &sets {
            let report = PolicyReport {
                policy: set.policy,
                equilibria: set.equilibria.iter().zip(passes).map(|(e, &pass)| Checked { equilibrium: e, pass }).collect(),
                diagnostics: &set.diagnostics,
            };
            out.json(&format!("equilibria_{}.json", set.policy), &report)?;
        }
    }
    if cfg.wants(Format::Csv) {
        out.write("equilibria.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["policy", "theta0", "theta1", "pi0", "pi1", "stability", "max_residual", "pass"])?;
            for (set, passes) in &sets {
                for (e, pass) in set.equilibria.iter().zip(passes) {
                    c.write_record([
                        e.policy.to_string(),
                        e.theta0.to_string(),
                        e.theta1.to_string(),
                        e.pi0.to_string(),
                        e.pi1.to_string(),
                        serde_json::to_value(e.stability)?.as_str().unwrap_or_default().to_string(),
                        e.max_residual().to_string(),
                        pass.to_string(),
                    ])?;
                }
            }
            c.flush()?;
            Ok(())
        })?;
    }
    Ok(all_pass)
}

/// Policy comparison table under the configured selection rule.
pub fn compare(cfg: &RunConfig, out: &Output) -> Result<Verified> {
    let loaded = cfg.load()?;
    let table = compare_policies(&loaded.model, &loaded.params, &cfg.solver, &cfg.policies, cfg.select, cfg.aw_mode())?;
    if cfg.wants(Format::Csv) {
        out.write("compare.csv", |w| Ok(table.write_csv(w)?))?;
    }
    if cfg.wants(Format::Json) {
        out.json("compare.json", &table.rows)?;
    }
    Ok(table.verify_failures == 0)
}

/// Fits the tabulated model (scoring featured data first) and writes it with
/// the scored samples.
pub fn fit(cfg: &RunConfig, out: &Output) -> Result<Verified> {
    let Some(data) = cfg.dataset()? else {
        anyhow::bail!("fit needs an input CSV or a scenario");
    };
    let (model, scored) = cfg.fit(&data)?;
    out.write("model.csv", |w| Ok(model.write_tabulated_csv(w)?))?;
    out.write("scored.csv", |w| Ok(scored.write_csv(w)?))?;
    Ok(true)
}

#[derive(Serialize)]
struct GroundTruth<'a> {
    scenario: &'a fairgame::data_pipeline::ScenarioSpec,
    params: fairgame::game_core::GameParams<f64>,
    counts: [[usize; 2]; 2],
}

/// Samples a scenario; the JSON side file records the spec and economics.
pub fn generate_samples(cfg: &RunConfig, out: &Output) -> Result<Verified> {
    let Some(spec) = &cfg.scenario else {
        anyhow::bail!("generate needs a scenario");
    };
    let g = generate(spec)?;
    out.write("samples.csv", |w| Ok(g.dataset.write_csv(w)?))?;
    if cfg.wants(Format::Json) {
        out.json("scenario.json", &GroundTruth { scenario: spec, params: g.params, counts: g.dataset.counts() })?;
    }
    Ok(true)
}
