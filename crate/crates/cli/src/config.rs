//! JSON study configurations for `simulate` and `mse-tune`.

use serde::Deserialize;
use slope2::sim::{DesignSpec, PenaltyKind, PriorKind, SimStudy, Tail, TuneGrids};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub n: usize,
    pub p: usize,
    #[serde(default = "default_tail")]
    pub tail: String,
    #[serde(default)]
    pub corr_rho: f64,
    pub eps: f64,
    pub prior: PriorCfg,
    pub sigma: f64,
    pub penalty: Option<PenaltyCfg>,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub tuning: Option<TuneCfg>,
}

fn default_tail() -> String {
    "gaussian".into()
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorCfg {
    Tied { value: f64 },
    Uniform { value: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PenaltyCfg {
    Lasso { lam: f64 },
    TwoLevel { lam1: f64, lam2: f64, s: f64 },
    Bh { gamma: f64, q: f64 },
    Uniform { gamma: f64 },
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct TuneCfg {
    pub a_ratios: Option<Vec<f64>>,
    pub s_points: Option<usize>,
    pub gamma0: Option<f64>,
    pub gamma_growth: Option<f64>,
    pub max_gamma_steps: Option<usize>,
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<StudyConfig, String> {
        serde_json::from_str(text).map_err(|e| format!("bad study config: {e}"))
    }

    pub fn tail(&self) -> Result<Tail, String> {
        match self.tail.as_str() {
            "gaussian" => Ok(Tail::Gaussian),
            "student3" => Ok(Tail::Student3),
            other => Err(format!("unknown tail '{other}' (gaussian|student3)")),
        }
    }

    pub fn design(&self) -> Result<DesignSpec, String> {
        Ok(DesignSpec {
            n: self.n,
            p: self.p,
            tail: self.tail()?,
            corr_rho: self.corr_rho,
        })
    }

    pub fn prior_kind(&self) -> PriorKind {
        match self.prior {
            PriorCfg::Tied { value } => PriorKind::Tied(value),
            PriorCfg::Uniform { value } => PriorKind::Uniform(value),
        }
    }

    pub fn penalty_kind(&self) -> Result<PenaltyKind, String> {
        match &self.penalty {
            None => Err("study config needs a \"penalty\" section".into()),
            Some(PenaltyCfg::Lasso { lam }) => Ok(PenaltyKind::Lasso(*lam)),
            Some(PenaltyCfg::TwoLevel { lam1, lam2, s }) => Ok(PenaltyKind::TwoLevel {
                lam1: *lam1,
                lam2: *lam2,
                s: *s,
            }),
            Some(PenaltyCfg::Bh { gamma, q }) => Ok(PenaltyKind::Bh {
                gamma: *gamma,
                q: *q,
            }),
            Some(PenaltyCfg::Uniform { gamma }) => Ok(PenaltyKind::Uniform { gamma: *gamma }),
        }
    }

    pub fn study(&self) -> Result<SimStudy, String> {
        let study = SimStudy {
            design: self.design()?,
            eps: self.eps,
            prior: self.prior_kind(),
            sigma: self.sigma,
            penalty: self.penalty_kind()?,
            replicates: self.replicates,
            seed: self.seed,
        };
        study.validate().map_err(|e| e.to_string())?;
        Ok(study)
    }

    pub fn tune_grids(&self) -> TuneGrids {
        let mut grids = TuneGrids::default();
        if let Some(cfg) = &self.tuning {
            if let Some(a) = &cfg.a_ratios {
                grids.a_ratios = a.clone();
            }
            if let Some(k) = cfg.s_points {
                let k = k.max(1);
                grids.s_grid = (0..k)
                    .map(|i| 0.05 + 0.9 * i as f64 / (k.max(2) - 1) as f64)
                    .collect();
            }
            if let Some(g) = cfg.gamma0 {
                grids.gamma0 = g;
            }
            if let Some(g) = cfg.gamma_growth {
                grids.gamma_growth = g;
            }
            if let Some(m) = cfg.max_gamma_steps {
                grids.max_gamma_steps = m;
            }
        }
        grids
    }
}
