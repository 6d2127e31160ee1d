//! Run configuration: JSON file merged with command-line flags, and model
//! construction from it.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use fairgame::data_pipeline::{generate, load_csv, nlsy_params, ridge_score, Dataset, ScenarioSpec, ScorerSpec, Schema};
use fairgame::equilibrium::SolverConfig;
use fairgame::game_core::GameParams;
use fairgame::signal_model::{fit_empirical, SignalModel};
use fairgame::{AwMode, Policy, Selection};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Partial `GameParams`; unset fields keep the source's defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamOverrides {
    pub v_q: Option<f64>,
    pub v_u: Option<f64>,
    pub omega: Option<f64>,
    pub lambda1: Option<f64>,
    pub cost_lo: Option<f64>,
    pub cost_hi: Option<f64>,
}

impl ParamOverrides {
    fn apply(&self, p: GameParams<f64>) -> Result<GameParams<f64>> {
        let p = GameParams {
            v_q: self.v_q.unwrap_or(p.v_q),
            v_u: self.v_u.unwrap_or(p.v_u),
            omega: self.omega.unwrap_or(p.omega),
            lambda1: self.lambda1.unwrap_or(p.lambda1),
            cost_lo: self.cost_lo.unwrap_or(p.cost_lo),
            cost_hi: self.cost_hi.unwrap_or(p.cost_hi),
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Synthetic scenario; mutually exclusive with `input` and `model`.
    pub scenario: Option<ScenarioSpec>,
    /// Sample CSV (scored or featured).
    pub input: Option<PathBuf>,
    /// Tabulated model CSV as written by `fit`.
    pub model: Option<PathBuf>,
    /// For scenarios: fit densities to generated samples instead of using
    /// the parametric ground truth.
    pub empirical: bool,
    pub bandwidth: Option<f64>,
    pub params: ParamOverrides,
    pub solver: SolverConfig<f64>,
    pub scorer: ScorerSpec,
    pub policies: Vec<Policy>,
    pub select: Selection,
    pub formats: Vec<Format>,
    pub aw_literal: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            input: None,
            model: None,
            empirical: false,
            bandwidth: None,
            params: ParamOverrides::default(),
            solver: SolverConfig::default(),
            scorer: ScorerSpec::default(),
            policies: vec![Policy::Lf, Policy::Cb, Policy::Dp, Policy::Eo],
            select: Selection::Best,
            formats: vec![Format::Csv, Format::Json],
            aw_literal: false,
        }
    }
}

/// Flags that override the configuration file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub policies: Option<Vec<Policy>>,
    pub select: Option<Selection>,
    pub formats: Option<Vec<Format>>,
    pub aw_literal: bool,
    pub seed: Option<u64>,
    pub scenario: Option<ScenarioSpec>,
    pub input: Option<PathBuf>,
}

/// Model and economics ready for the solvers.
pub struct Loaded {
    pub model: SignalModel<f64>,
    pub params: GameParams<f64>,
}

impl RunConfig {
    pub fn read(path: Option<&Path>, flags: Overrides) -> Result<Self> {
        let mut cfg: RunConfig = match path {
            Some(p) => {
                let text = fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        if let Some(p) = flags.policies {
            cfg.policies = p;
        }
        if let Some(s) = flags.select {
            cfg.select = s;
        }
        if let Some(f) = flags.formats {
            cfg.formats = f;
        }
        cfg.aw_literal |= flags.aw_literal;
        if flags.scenario.is_some() {
            cfg.scenario = flags.scenario;
        }
        if flags.input.is_some() {
            cfg.input = flags.input;
        }
        if let Some(seed) = flags.seed {
            cfg.solver.seed = seed;
            cfg.scorer.seed = seed;
            if let Some(s) = cfg.scenario.as_mut() {
                s.seed = seed;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if self.policies.is_empty() {
            bail!("no policies selected");
        }
        if self.formats.is_empty() {
            bail!("no output formats selected");
        }
        let sources = [self.scenario.is_some(), self.input.is_some(), self.model.is_some()];
        if sources.iter().filter(|s| **s).count() > 1 {
            bail!("give only one of scenario, input and model");
        }
        self.solver.validate()?;
        self.scorer.validate()?;
        Ok(())
    }

    pub fn aw_mode(&self) -> AwMode {
        if self.aw_literal {
            AwMode::Literal
        } else {
            AwMode::Expected
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Scenario samples or the input file; `None` when the run uses a
    /// parametric or tabulated model directly.
    pub fn dataset(&self) -> Result<Option<Dataset>> {
        if let Some(path) = &self.input {
            return Ok(Some(load_csv(path, None).with_context(|| format!("loading {}", path.display()))?));
        }
        match &self.scenario {
            Some(spec) => Ok(Some(generate(spec)?.dataset)),
            None => Ok(None),
        }
    }

    pub fn load(&self) -> Result<Loaded> {
        if let Some(path) = &self.model {
            let file = fs::File::open(path).with_context(|| format!("opening model {}", path.display()))?;
            let model = SignalModel::read_tabulated_csv(file).with_context(|| format!("reading model {}", path.display()))?;
            let params = self.params.apply(GameParams::unit())?;
            return Ok(Loaded { model, params });
        }
        if let Some(spec) = &self.scenario {
            let base = spec.game_params()?;
            if !self.empirical {
                return Ok(Loaded { model: spec.ground_truth()?, params: self.params.apply(base)? });
            }
            let data = generate(spec)?.dataset;
            let (model, _) = self.fit(&data)?;
            return Ok(Loaded { model, params: self.params.apply(base)? });
        }
        let Some(data) = self.dataset()? else {
            bail!("no data source: give a scenario, an input CSV or a model CSV");
        };
        let (model, _) = self.fit(&data)?;
        let base = nlsy_params(&model, data.lambda1()?)?;
        Ok(Loaded { model, params: self.params.apply(base)? })
    }

    /// Scores featured data with ridge, then fits kernel densities.
    pub fn fit(&self, data: &Dataset) -> Result<(SignalModel<f64>, Dataset)> {
        let scored = match data.schema() {
            Schema::Scored => data.clone(),
            Schema::Featured { .. } => {
                let fit = ridge_score(data, &self.scorer)?;
                log::info!("ridge penalty {} weights {:?}", fit.alpha, fit.weights);
                fit.scored
            }
        };
        let model = fit_empirical(&scored.scored_samples()?, self.bandwidth, None)?;
        Ok((model, scored))
    }
}
