use serde::{Deserialize, Serialize};

use crate::curriculum::CurriculumSchedule;
use crate::edge_gen::ScoreActivation;
use crate::error::{Error, Result};
use crate::nn::{AdamConfig, LayerKind};

/// Full method, its ablations, and the baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "GNN-CL")]
    GnnCl,
    /// Without oversampling.
    #[serde(rename = "GNN-CL_O")]
    GnnClO,
    /// Without the triplet loss.
    #[serde(rename = "GNN-CL_M")]
    GnnClM,
    /// With constant schedules.
    #[serde(rename = "GNN-CL_C")]
    GnnClC,
    #[serde(rename = "origin")]
    Origin,
    #[serde(rename = "oversampling")]
    Oversampling,
    #[serde(rename = "reweighting")]
    Reweighting,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::GnnCl,
        Variant::GnnClO,
        Variant::GnnClM,
        Variant::GnnClC,
        Variant::Origin,
        Variant::Oversampling,
        Variant::Reweighting,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::GnnCl => "GNN-CL",
            Variant::GnnClO => "GNN-CL_O",
            Variant::GnnClM => "GNN-CL_M",
            Variant::GnnClC => "GNN-CL_C",
            Variant::Origin => "origin",
            Variant::Oversampling => "oversampling",
            Variant::Reweighting => "reweighting",
        }
    }

    pub fn is_baseline(self) -> bool {
        matches!(
            self,
            Variant::Origin | Variant::Oversampling | Variant::Reweighting
        )
    }

    pub fn uses_embedding_oversampling(self) -> bool {
        matches!(self, Variant::GnnCl | Variant::GnnClM | Variant::GnnClC)
    }

    pub fn uses_edge_generator(self) -> bool {
        !self.is_baseline()
    }

    pub fn uses_triplet_loss(self) -> bool {
        matches!(self, Variant::GnnCl | Variant::GnnClO | Variant::GnnClC)
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub base_model: LayerKind,
    pub hidden_dim: usize,
    pub lambda: f64,
    pub gamma: f64,
    pub mu: f64,
    pub beta_plus: f64,
    pub beta_minus: f64,
    /// Schedule horizon `L`; `None` uses `max_epochs`.
    pub schedule_epochs: Option<usize>,
    pub k: usize,
    pub epsilon: f64,
    pub margin: f64,
    pub max_triplets_per_anchor: usize,
    pub score_activation: ScoreActivation,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub variant: Variant,
    /// Copies per minority node for the oversampling baseline; `None` equalizes class counts.
    pub n_s: Option<usize>,
    pub adam: AdamConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            base_model: LayerKind::Gcn,
            hidden_dim: 64,
            lambda: 0.002,
            gamma: 1.0,
            mu: 1.0,
            beta_plus: 0.6,
            beta_minus: 0.1,
            schedule_epochs: None,
            k: 5,
            epsilon: 0.5,
            margin: 0.5,
            max_triplets_per_anchor: 16,
            score_activation: ScoreActivation::Identity,
            max_epochs: 2000,
            patience: 100,
            seed: 0,
            variant: Variant::GnnCl,
            n_s: None,
            adam: AdamConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.hidden_dim == 0 {
            return bad("hidden_dim must be >= 1".into());
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!(
                "lambda = {} must be a finite value >= 0",
                self.lambda
            ));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return bad(format!(
                "gamma = {} must be a finite value >= 0",
                self.gamma
            ));
        }
        if self.k == 0 {
            return bad("k must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return bad(format!("epsilon = {} outside [0, 1]", self.epsilon));
        }
        if !(self.margin >= 0.0 && self.margin.is_finite()) {
            return bad(format!("margin = {} must be >= 0", self.margin));
        }
        if self.max_triplets_per_anchor == 0 {
            return bad("max_triplets_per_anchor must be >= 1".into());
        }
        if self.max_epochs == 0 {
            return bad("max_epochs must be >= 1".into());
        }
        if self.patience > self.max_epochs {
            return bad(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            ));
        }
        if let Some(l) = self.schedule_epochs {
            if l + 1 < self.max_epochs {
                return bad(format!(
                    "schedule_epochs {l} shorter than the last epoch index {}",
                    self.max_epochs - 1
                ));
            }
        }
        if self.n_s == Some(0) {
            return bad("n_s must be >= 1 when given".into());
        }
        self.schedule().map(|_| ())
    }

    pub fn schedule(&self) -> Result<CurriculumSchedule> {
        CurriculumSchedule::new(
            self.mu,
            self.beta_plus,
            self.beta_minus,
            self.schedule_epochs.unwrap_or(self.max_epochs),
        )
    }

    /// Sets `max_epochs` and scales `patience` down if it no longer fits.
    pub fn with_max_epochs(mut self, max_epochs: usize) -> Self {
        self.max_epochs = max_epochs;
        self.patience = self.patience.min(max_epochs);
        self
    }
}
