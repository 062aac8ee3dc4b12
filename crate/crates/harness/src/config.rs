//! Run configuration and parameter planning.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use dynmatch_core::orientation::arboricity_cap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("general mode needs 0 < eps < 2/3, got {0}")]
    GeneralEpsilon(f64),
    #[error("small-arboricity mode needs 0 < eps < 1, got {0}")]
    ArboricityEpsilon(f64),
    #[error("lambda must lie in (0, 1), got {0}")]
    Lambda(f64),
    #[error("no beta up to {limit} makes lambda*beta a multiple of 6 (lambda = {lambda})")]
    NoConformingBeta { lambda: f64, limit: u32 },
    #[error("beta must be at least 2, got {0}")]
    Beta(u32),
    #[error("alpha cap must be at least 1")]
    AlphaCap,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    General,
    SmallArboricity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    Random,
    SlidingWindow,
    ForestUnion,
    FourBlock,
    ThreeBlock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub kind: StreamKind,
    pub n_left: u32,
    pub n_right: u32,
    pub steps: usize,
    /// Target fraction of possible edges (`random`, `forest_union`).
    pub density: f64,
    /// Live-edge window (`sliding_window`).
    pub window: usize,
    /// Piece size (`four_block`, `three_block`).
    pub block_size: u32,
    /// Number of forests (`forest_union`).
    pub forests: usize,
    /// Even `β` the `three_block` instance is built for.
    pub beta: u32,
}

impl Default for StreamSpec {
    fn default() -> Self {
        StreamSpec {
            kind: StreamKind::Random,
            n_left: 60,
            n_right: 60,
            steps: 1000,
            density: 0.5,
            window: 200,
            block_size: 10,
            forests: 1,
            beta: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub mode: Mode,
    pub eps: f64,
    pub beta: Option<u32>,
    pub lambda: Option<f64>,
    pub alpha_cap: usize,
    pub seed: u64,
    pub checkpoint_every: usize,
    pub validate_every: usize,
    /// Record wall time per update. Off makes metrics byte-reproducible.
    pub timing: bool,
    /// Run the structural audits of the EDCS along with the validators.
    pub audit: bool,
    pub stream: StreamSpec,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            mode: Mode::General,
            eps: 0.5,
            beta: None,
            lambda: None,
            alpha_cap: 1,
            seed: 0,
            checkpoint_every: 100,
            validate_every: 1,
            timing: true,
            audit: false,
            stream: StreamSpec::default(),
        }
    }
}

/// Everything the pipeline needs after rounding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedParams {
    pub mode: Mode,
    pub eps: f64,
    pub beta: u32,
    /// `λ` and the integer `λβ` (general mode).
    pub lambda: Option<f64>,
    pub slack: Option<u32>,
    pub ell: Option<u32>,
    /// `β` before rounding, from the preset or the override.
    pub beta_preset: u32,
    pub m_max: usize,
    pub alpha_cap: Option<usize>,
    pub load_cap: Option<usize>,
    pub max_path_len: usize,
    pub max_h_changes: Option<usize>,
    pub max_unit_changes: Option<usize>,
    pub max_update_changes: Option<usize>,
    /// `ε` handed to the matching layer, so that its `(1+3ε')` drift stays
    /// within `1+ε`.
    pub matching_eps: f64,
}

impl ResolvedParams {
    /// Lower bound on `μ(H)/μ(G)` at checkpoints.
    pub fn mu_h_fraction(&self) -> f64 {
        match self.mode {
            Mode::General => 2.0 / 3.0 - self.eps,
            Mode::SmallArboricity => 1.0 - self.eps,
        }
    }

    /// Upper bound on `μ(G)/|M|` at checkpoints.
    pub fn ratio_bound(&self) -> f64 {
        match self.mode {
            Mode::General => (1.5 + self.eps) * (1.0 + self.eps),
            Mode::SmallArboricity => (1.0 + self.eps) / (1.0 - self.eps),
        }
    }
}

/// Smallest `β ≥ lower` with `λβ` a multiple of 6, at least 12.
fn conforming_beta(lambda: f64, lower: u32) -> Result<(u32, u32), ConfigError> {
    const LIMIT: u32 = 1 << 24;
    let mut beta = lower.max(1);
    while beta <= LIMIT {
        let slack = lambda * beta as f64;
        let rounded = slack.round();
        if (slack - rounded).abs() < 1e-9 * beta as f64 && rounded >= 12.0 && (rounded as u32).is_multiple_of(6) && (rounded as u32) < beta {
            return Ok((beta, rounded as u32));
        }
        beta += 1;
    }
    Err(ConfigError::NoConformingBeta { lambda, limit: LIMIT })
}

/// Resolves `β`, `λ` and derived bounds. `m_max` is the peak edge count of
/// the stream and feeds the general-mode preset `⌈m^{1/4} ε^{1/2}⌉`;
/// `n_total` is the vertex count used for the arboricity load cap.
pub fn plan_parameters(cfg: &PipelineConfig, m_max: usize, n_total: usize) -> Result<ResolvedParams, ConfigError> {
    let eps = cfg.eps;
    match cfg.mode {
        Mode::General => {
            if !(eps > 0.0 && eps < 2.0 / 3.0) {
                return Err(ConfigError::GeneralEpsilon(eps));
            }
            let lambda = cfg.lambda.unwrap_or(eps / 4.0);
            if !(lambda > 0.0 && lambda < 1.0) {
                return Err(ConfigError::Lambda(lambda));
            }
            let preset = cfg.beta.unwrap_or_else(|| ((m_max as f64).powf(0.25) * eps.sqrt()).ceil() as u32);
            let floor = (12.0 / lambda - 1e-9).ceil() as u32;
            let (beta, slack) = conforming_beta(lambda, preset.max(floor))?;
            let params = dynmatch_core::GeneralParams::new(beta, slack).map_err(|e| ConfigError::Invalid(e.to_string()))?;
            Ok(ResolvedParams {
                mode: cfg.mode,
                eps,
                beta,
                lambda: Some(params.lambda()),
                slack: Some(slack),
                ell: Some(params.ell()),
                beta_preset: preset,
                m_max,
                alpha_cap: None,
                load_cap: None,
                max_path_len: params.max_path_len(),
                max_h_changes: Some(params.max_h_changes()),
                max_unit_changes: None,
                max_update_changes: None,
                matching_eps: eps / 3.0,
            })
        }
        Mode::SmallArboricity => {
            if !(eps > 0.0 && eps < 1.0) {
                return Err(ConfigError::ArboricityEpsilon(eps));
            }
            if cfg.alpha_cap == 0 {
                return Err(ConfigError::AlphaCap);
            }
            let preset = cfg.beta.unwrap_or_else(|| (8.0 / (eps * eps) - 1e-9).ceil() as u32 + 1);
            if preset < 2 {
                return Err(ConfigError::Beta(preset));
            }
            let beta = preset as usize;
            Ok(ResolvedParams {
                mode: cfg.mode,
                eps,
                beta: preset,
                lambda: None,
                slack: None,
                ell: None,
                beta_preset: preset,
                m_max,
                alpha_cap: Some(cfg.alpha_cap),
                load_cap: Some(arboricity_cap(cfg.alpha_cap, n_total)),
                max_path_len: 2 * beta + 1,
                max_h_changes: None,
                max_unit_changes: Some(4 * beta),
                max_update_changes: Some(4 * beta * beta),
                matching_eps: eps / 3.0,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn general(eps: f64) -> PipelineConfig {
        PipelineConfig { mode: Mode::General, eps, ..Default::default() }
    }

    #[test]
    fn general_presets() {
        let p = plan_parameters(&general(0.5), 4096, 120).unwrap();
        assert_eq!(p.beta_preset, 6);
        assert_eq!((p.beta, p.slack, p.lambda), (96, Some(12), Some(0.125)));
        assert_eq!(p.ell, Some(2));
        let p = plan_parameters(&general(0.25), 4096, 120).unwrap();
        assert_eq!((p.beta, p.slack), (192, Some(12)));
        assert!(plan_parameters(&general(0.7), 10, 10).is_err());
        assert!(plan_parameters(&general(2.0 / 3.0), 10, 10).is_err());
    }

    #[test]
    fn general_overrides_round_up() {
        let cfg = PipelineConfig { beta: Some(100), ..general(0.5) };
        let p = plan_parameters(&cfg, 10, 10).unwrap();
        assert_eq!((p.beta, p.slack), (144, Some(18)));
        let cfg = PipelineConfig { beta: Some(30), lambda: Some(0.5), ..general(0.5) };
        let p = plan_parameters(&cfg, 10, 10).unwrap();
        assert_eq!((p.beta, p.slack), (36, Some(18)));
        let cfg = PipelineConfig { beta: Some(97), ..general(0.5) };
        assert_eq!(plan_parameters(&cfg, 10, 10).unwrap().beta, 144);
    }

    #[test]
    fn small_arboricity_presets() {
        let cfg = PipelineConfig { mode: Mode::SmallArboricity, eps: 0.5, alpha_cap: 3, ..Default::default() };
        let p = plan_parameters(&cfg, 100, 400).unwrap();
        assert_eq!(p.beta, 33);
        assert_eq!(p.load_cap, Some(12 + 18));
        assert_eq!(p.max_path_len, 67);
        assert!(plan_parameters(&PipelineConfig { eps: 1.0, ..cfg.clone() }, 1, 1).is_err());
        assert!(plan_parameters(&PipelineConfig { alpha_cap: 0, ..cfg }, 1, 1).is_err());
    }

    #[test]
    fn bounds() {
        let p = plan_parameters(&general(0.5), 4096, 120).unwrap();
        assert!((p.ratio_bound() - 3.0).abs() < 1e-12);
        assert!((p.mu_h_fraction() - 1.0 / 6.0).abs() < 1e-12);
        assert_eq!(p.max_h_changes, Some(194));
    }
}
