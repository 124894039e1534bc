//! Exact finite probability distributions over labelled sets.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{QifError, Result};
use crate::rat::Rat;

/// Opaque label of a secret, observable or action.
pub type Label = String;

/// Builds an owned label list from string slices.
pub fn labels(names: &[&str]) -> Vec<Label> {
    names.iter().map(|s| s.to_string()).collect()
}

pub(crate) fn check_unique(labels: &[Label]) -> Result<()> {
    let mut seen = HashSet::with_capacity(labels.len());
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(QifError::DuplicateLabel(l.clone()));
        }
    }
    Ok(())
}

/// A probability distribution with an explicit label order.
///
/// Masses are non-negative and sum to exactly one.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(try_from = "DistRepr", into = "DistRepr")]
pub struct Dist {
    labels: Vec<Label>,
    mass: Vec<Rat>,
}

#[derive(Serialize, Deserialize)]
struct DistRepr {
    labels: Vec<Label>,
    mass: Vec<Rat>,
}

impl TryFrom<DistRepr> for Dist {
    type Error = QifError;
    fn try_from(r: DistRepr) -> Result<Self> {
        Dist::new(r.labels, r.mass)
    }
}

impl From<Dist> for DistRepr {
    fn from(d: Dist) -> Self {
        DistRepr { labels: d.labels, mass: d.mass }
    }
}

impl Dist {
    pub fn new(labels: Vec<Label>, mass: Vec<Rat>) -> Result<Self> {
        if labels.len() != mass.len() {
            return Err(QifError::ShapeMismatch(format!(
                "{} labels but {} masses",
                labels.len(),
                mass.len()
            )));
        }
        check_unique(&labels)?;
        if let Some(i) = mass.iter().position(Rat::is_negative) {
            return Err(QifError::NegativeMass { label: labels[i].clone(), mass: mass[i].clone() });
        }
        let sum: Rat = mass.iter().sum();
        if !sum.is_one() {
            return Err(QifError::NotNormalized { sum });
        }
        Ok(Dist { labels, mass })
    }

    /// Point distribution on `x` over `labels`.
    pub fn point(x: &str, labels: &[Label]) -> Result<Self> {
        check_unique(labels)?;
        let mass: Vec<Rat> = labels
            .iter()
            .map(|l| if l == x { Rat::one() } else { Rat::zero() })
            .collect();
        if !labels.iter().any(|l| l == x) {
            return Err(QifError::UnknownLabel(x.to_string()));
        }
        Ok(Dist { labels: labels.to_vec(), mass })
    }

    pub fn uniform(labels: &[Label]) -> Result<Self> {
        if labels.is_empty() {
            return Err(QifError::NotNormalized { sum: Rat::zero() });
        }
        let m = Rat::new(1, labels.len() as i64);
        Dist::new(labels.to_vec(), vec![m; labels.len()])
    }

    /// Normalises non-negative weights with a positive total.
    pub fn normalized(labels: Vec<Label>, weights: Vec<Rat>) -> Result<Self> {
        let total: Rat = weights.iter().sum();
        if !total.is_positive() {
            return Err(QifError::NotNormalized { sum: total });
        }
        let mass = weights.iter().map(|w| w / &total).collect();
        Dist::new(labels, mass)
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn masses(&self) -> &[Rat] {
        &self.mass
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn mass(&self, label: &str) -> Option<&Rat> {
        self.index_of(label).map(|i| &self.mass[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Rat)> {
        self.labels.iter().zip(self.mass.iter())
    }

    pub fn support(&self) -> Vec<Label> {
        self.iter().filter(|(_, m)| m.is_positive()).map(|(l, _)| l.clone()).collect()
    }

    pub fn support_indices(&self) -> Vec<usize> {
        (0..self.mass.len()).filter(|&i| self.mass[i].is_positive()).collect()
    }

    pub fn is_point(&self) -> bool {
        self.mass.iter().filter(|m| m.is_positive()).count() == 1
    }

    /// `supp(self) ⊆ supp(other)`, assuming both share a label order.
    pub fn support_within(&self, other: &Dist) -> bool {
        self.mass
            .iter()
            .zip(other.mass.iter())
            .all(|(a, b)| !a.is_positive() || b.is_positive())
    }

    pub fn expect_labels(&self, expected: &[Label], what: &str) -> Result<()> {
        if self.labels != expected {
            return Err(QifError::ShapeMismatch(format!(
                "{what}: distribution labels {:?} do not match {:?}",
                self.labels, expected
            )));
        }
        Ok(())
    }
}
