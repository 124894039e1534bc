//! Adversary models: finite gain and loss matrices, and the analytic
//! Shannon loss whose action space is every distribution on the secrets.

use serde::Serialize;

use crate::dist::{check_unique, Dist, Label};
use crate::error::{QifError, Result};
use crate::rat::Rat;
use crate::xval::XVal;

/// Whether a model measures vulnerability (gains, higher is worse for the
/// secret) or uncertainty (losses, lower is worse).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureKind {
    Vulnerability,
    Uncertainty,
}

/// `g(w, x)` for a finite action set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GainMatrix {
    actions: Vec<Label>,
    secrets: Vec<Label>,
    values: Vec<Vec<Rat>>,
}

impl GainMatrix {
    pub fn new(actions: Vec<Label>, secrets: Vec<Label>, values: Vec<Vec<Rat>>) -> Result<Self> {
        check_matrix_shape(&actions, &secrets, values.iter().map(Vec::len), values.len())?;
        Ok(GainMatrix { actions, secrets, values })
    }

    /// The identity gain `1(w, x) = [w = x]`: guess the secret in one try.
    pub fn identity(secrets: &[Label]) -> Result<Self> {
        let values = secrets
            .iter()
            .map(|w| secrets.iter().map(|x| if w == x { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        GainMatrix::new(secrets.to_vec(), secrets.to_vec(), values)
    }

    pub fn actions(&self) -> &[Label] {
        &self.actions
    }

    pub fn secrets(&self) -> &[Label] {
        &self.secrets
    }

    pub fn values(&self) -> &[Vec<Rat>] {
        &self.values
    }

    /// `Σ_x p(x) g(w, x)` for the action at index `w`.
    pub fn expected_gain(&self, w: usize, p: &Dist) -> Rat {
        self.values[w]
            .iter()
            .zip(p.masses())
            .filter(|(_, m)| !m.is_zero())
            .map(|(g, m)| g * m)
            .sum()
    }
}

/// `ℓ(w, x) ∈ [0, ∞]` for a finite action set.
#[derive(Clone, Debug, PartialEq)]
pub struct LossMatrix {
    actions: Vec<Label>,
    secrets: Vec<Label>,
    values: Vec<Vec<XVal>>,
}

impl LossMatrix {
    pub fn new(actions: Vec<Label>, secrets: Vec<Label>, values: Vec<Vec<XVal>>) -> Result<Self> {
        check_matrix_shape(&actions, &secrets, values.iter().map(Vec::len), values.len())?;
        for row in &values {
            for v in row {
                match v {
                    XVal::Exact(r) if r.is_negative() => {
                        return Err(QifError::InvalidModel(format!("negative loss {r}")))
                    }
                    XVal::Exact(_) | XVal::PosInf => {}
                    other => {
                        return Err(QifError::InvalidModel(format!(
                            "loss entries must be non-negative rationals or inf, got {other}"
                        )))
                    }
                }
            }
        }
        Ok(LossMatrix { actions, secrets, values })
    }

    pub fn actions(&self) -> &[Label] {
        &self.actions
    }

    pub fn secrets(&self) -> &[Label] {
        &self.secrets
    }

    pub fn values(&self) -> &[Vec<XVal>] {
        &self.values
    }

    /// `Σ_x p(x) ℓ(w, x)` with `0 · ∞ = 0`.
    pub fn expected_loss(&self, w: usize, p: &Dist) -> XVal {
        XVal::weighted_sum(p.masses().iter().zip(self.values[w].iter().cloned()))
            .expect("losses are never negative infinity")
    }
}

fn check_matrix_shape(
    actions: &[Label],
    secrets: &[Label],
    row_lens: impl Iterator<Item = usize>,
    n_rows: usize,
) -> Result<()> {
    if actions.is_empty() {
        return Err(QifError::InvalidModel("action set is empty".into()));
    }
    if secrets.is_empty() {
        return Err(QifError::InvalidModel("secret set is empty".into()));
    }
    check_unique(actions)?;
    check_unique(secrets)?;
    if n_rows != actions.len() {
        return Err(QifError::ShapeMismatch(format!("{} actions but {} value rows", actions.len(), n_rows)));
    }
    for len in row_lens {
        if len != secrets.len() {
            return Err(QifError::ShapeMismatch(format!(
                "value row has {len} entries, expected {}",
                secrets.len()
            )));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum AdversaryModel {
    Gain(GainMatrix),
    Loss(LossMatrix),
    /// `ℓ_H(w, x) = -log2 w(x)`, handled analytically.
    Shannon,
}

impl AdversaryModel {
    pub fn identity_gain(secrets: &[Label]) -> Result<Self> {
        GainMatrix::identity(secrets).map(AdversaryModel::Gain)
    }

    pub fn kind(&self) -> MeasureKind {
        match self {
            AdversaryModel::Gain(_) => MeasureKind::Vulnerability,
            AdversaryModel::Loss(_) | AdversaryModel::Shannon => MeasureKind::Uncertainty,
        }
    }

    /// Secret labels the model is defined over; `None` for Shannon, which
    /// applies to any secret set.
    pub fn secrets(&self) -> Option<&[Label]> {
        match self {
            AdversaryModel::Gain(g) => Some(g.secrets()),
            AdversaryModel::Loss(l) => Some(l.secrets()),
            AdversaryModel::Shannon => None,
        }
    }

    pub(crate) fn check_dist(&self, p: &Dist) -> Result<()> {
        match self.secrets() {
            Some(s) => p.expect_labels(s, "distribution vs model secrets"),
            None => Ok(()),
        }
    }

    /// Leakage from a measure taken with more information and one taken
    /// with less: `more - less` for gains, `less - more` for losses.
    pub fn leakage(&self, more_informed: &XVal, less_informed: &XVal) -> Result<XVal> {
        match self.kind() {
            MeasureKind::Vulnerability => more_informed.sub(less_informed),
            MeasureKind::Uncertainty => less_informed.sub(more_informed),
        }
    }
}
