//! Synthetic scenarios with known ground truth.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{Dataset, Payload, SampleRecord, Schema};
use crate::error::{Error, Result};
use crate::game_core::GameParams;
use crate::signal_model::{Effort, Group, SignalModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// `N(1, 1)` vs `N(0, 1)` in both groups.
    GaussianG1,
    /// Same spread, group 1 shifted by 10, tiny minority.
    Example1,
    /// Two-dimensional features; each group's signal lies on its own axis,
    /// with sd 1 for group 0 and 10 for group 1.
    Example2,
    /// Accurate signal with a small group 1.
    Patronizing,
    /// Accurate signal for group 0, noisy (sd 10) for a 2% group 1; parity
    /// raises total welfare here.
    DpWelfareGain,
    /// All cell means given explicitly.
    Custom,
}

/// Overrides of a scenario's defaults. Arrays are indexed by group.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub mean_q: Option<[f64; 2]>,
    pub mean_u: Option<[f64; 2]>,
    pub sd_q: Option<[f64; 2]>,
    pub sd_u: Option<[f64; 2]>,
    pub v_q: Option<f64>,
    pub v_u: Option<f64>,
    pub omega: Option<f64>,
    pub lambda1: Option<f64>,
    pub cost_lo: Option<f64>,
    pub cost_hi: Option<f64>,
}

fn default_n() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub kind: ScenarioKind,
    #[serde(default)]
    pub params: ScenarioParams,
    /// Samples per group.
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Per-kind defaults: `(mean_q, mean_u, sd_q, sd_u, params)`.
type Defaults = ([f64; 2], [f64; 2], [f64; 2], [f64; 2], GameParams<f64>);

impl ScenarioSpec {
    pub fn preset(kind: ScenarioKind) -> Self {
        Self { kind, params: ScenarioParams::default(), n: default_n(), seed: 0 }
    }

    fn defaults(&self) -> Result<Defaults> {
        let unit = GameParams::<f64>::unit();
        let one = [1.0, 1.0];
        Ok(match self.kind {
            ScenarioKind::GaussianG1 => ([1.0, 1.0], [0.0, 0.0], one, one, unit),
            ScenarioKind::Example1 => ([1.0, 11.0], [0.0, 10.0], one, one, GameParams { lambda1: 0.01, ..unit }),
            ScenarioKind::Example2 => ([0.5, 0.5], [-0.5, -0.5], [1.0, 10.0], [1.0, 10.0], unit),
            ScenarioKind::Patronizing => ([1.0, 1.0], [0.0, 0.0], one, one, GameParams { lambda1: 0.05, ..unit }),
            ScenarioKind::DpWelfareGain => {
                ([1.0, 1.0], [0.0, 0.0], [1.0, 10.0], [1.0, 10.0], GameParams { lambda1: 0.02, ..unit })
            }
            ScenarioKind::Custom => {
                let (Some(q), Some(u)) = (self.params.mean_q, self.params.mean_u) else {
                    return Err(Error::Config("custom scenario needs params.mean_q and params.mean_u".into()));
                };
                (q, u, one, one, unit)
            }
        })
    }

    /// Score distributions `[effort][group] = (mean, sd)`.
    fn cells(&self) -> Result<[[(f64, f64); 2]; 2]> {
        let (mq, mu, sq, su, _) = self.defaults()?;
        let p = &self.params;
        let (mq, mu) = (p.mean_q.unwrap_or(mq), p.mean_u.unwrap_or(mu));
        let (sq, su) = (p.sd_q.unwrap_or(sq), p.sd_u.unwrap_or(su));
        for sd in sq.iter().chain(&su) {
            if !(*sd > 0.0) || !sd.is_finite() {
                return Err(Error::Config(format!("standard deviations must be positive, got {sd}")));
            }
        }
        Ok([[(mq[0], sq[0]), (mq[1], sq[1])], [(mu[0], su[0]), (mu[1], su[1])]])
    }

    pub fn game_params(&self) -> Result<GameParams<f64>> {
        let (_, _, _, _, d) = self.defaults()?;
        let p = &self.params;
        GameParams::new(
            p.v_q.unwrap_or(d.v_q),
            p.v_u.unwrap_or(d.v_u),
            p.omega.unwrap_or(d.omega),
            p.lambda1.unwrap_or(d.lambda1),
            p.cost_lo.unwrap_or(d.cost_lo),
            p.cost_hi.unwrap_or(d.cost_hi),
        )
    }

    /// Parametric model of the scores. For `example2` the score is the sum of
    /// the two features, which places each group's signal on its own axis.
    pub fn ground_truth(&self) -> Result<SignalModel<f64>> {
        SignalModel::gaussian(self.cells()?)
    }
}

/// Output of [`generate`].
#[derive(Clone, Debug)]
pub struct Generated {
    pub dataset: Dataset,
    pub model: SignalModel<f64>,
    pub params: GameParams<f64>,
}

/// `n` samples per group, efforts alternating `q, u, q, ...`. All scenarios
/// give scored samples except `example2`, which gives two features.
pub fn generate(spec: &ScenarioSpec) -> Result<Generated> {
    if spec.n < 2 {
        return Err(Error::Config(format!("need at least 2 samples per group, got {}", spec.n)));
    }
    let cells = spec.cells()?;
    let model = SignalModel::gaussian(cells)?;
    let params = spec.game_params()?;
    let featured = spec.kind == ScenarioKind::Example2;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut records = Vec::with_capacity(2 * spec.n);
    for g in Group::ALL {
        for i in 0..spec.n {
            let effort = if i % 2 == 0 { Effort::Qualified } else { Effort::Unqualified };
            let (mean, sd) = cells[effort.index()][g.index()];
            let z = Normal::new(mean, sd).map_err(|e| Error::Config(e.to_string()))?.sample(&mut rng);
            let payload = if featured {
                let mut x = vec![0.0; 2];
                x[g.index()] = z;
                Payload::Features(x)
            } else {
                Payload::Score(z)
            };
            records.push(SampleRecord { group: g, effort, payload });
        }
    }
    let schema = if featured { Schema::Featured { dim: 2 } } else { Schema::Scored };
    Ok(Generated { dataset: Dataset::new(schema, records)?, model, params })
}

/// Economics calibrated to the survey wage gaps: `v_q = 6457`,
/// `v_u = omega = 6036`, cost support `[0, max omega (F_u - F_q)]` over the
/// model grid and both groups.
pub fn nlsy_params(model: &SignalModel<f64>, lambda1: f64) -> Result<GameParams<f64>> {
    let (v_q, v_u, omega) = (6457.0, 6036.0, 6036.0);
    let grid = model.grid().points();
    let max_gap = Group::ALL
        .iter()
        .flat_map(|&g| {
            grid.iter()
                .map(move |&t| model.cdf(Effort::Unqualified, g, t) - model.cdf(Effort::Qualified, g, t))
        })
        .fold(f64::NEG_INFINITY, f64::max);
    if !(max_gap > 0.0) {
        return Err(Error::Estimation("score carries no incentive: F_u <= F_q everywhere".into()));
    }
    GameParams::new(v_q, v_u, omega, lambda1, 0.0, omega * max_gap)
}
