//! Classical measures: prior, traditional dynamic and static (expected or
//! extreme-case) vulnerability, uncertainty and leakage.

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryModel, GainMatrix};
use crate::channel::Channel;
use crate::dist::Dist;
use crate::error::{QifError, Result};
use crate::rat::Rat;
use crate::xval::XVal;

/// How posterior measures are aggregated over outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregate {
    /// Weighted by the outer distribution.
    Expected,
    /// Max over outputs for gains, min for losses.
    Extreme,
}

/// `V_g(p) = max_w Σ_x p(x) g(w, x)`.
pub fn vg(g: &GainMatrix, p: &Dist) -> Result<Rat> {
    p.expect_labels(g.secrets(), "vg")?;
    Ok((0..g.actions().len())
        .map(|w| g.expected_gain(w, p))
        .max()
        .expect("action set is non-empty"))
}

/// `H(p)` in bits, with `0 log 0 = 0`.
pub fn shannon_entropy(p: &Dist) -> f64 {
    let s: f64 = p
        .masses()
        .iter()
        .filter(|m| m.is_positive())
        .map(|m| {
            let v = m.to_f64();
            v * v.log2()
        })
        .sum();
    0.0 - s
}

/// `U_ℓ(p) = min_w Σ_x p(x) ℓ(w, x)`. For the Shannon loss the optimal
/// action is `p` itself and the value is `H(p)`.
///
/// A loss matrix whose every action has infinite expected loss yields
/// `+∞`.
pub fn ul(model: &AdversaryModel, p: &Dist) -> Result<XVal> {
    match model {
        AdversaryModel::Loss(l) => {
            p.expect_labels(l.secrets(), "ul")?;
            Ok((0..l.actions().len())
                .map(|w| l.expected_loss(w, p))
                .reduce(XVal::min)
                .expect("action set is non-empty"))
        }
        AdversaryModel::Shannon => Ok(XVal::Approx(shannon_entropy(p))),
        AdversaryModel::Gain(_) => Err(QifError::InvalidModel("uncertainty needs a loss model".into())),
    }
}

/// `V_g(p)` or `U_ℓ(p)`, depending on the model.
pub fn measure(model: &AdversaryModel, p: &Dist) -> Result<XVal> {
    match model {
        AdversaryModel::Gain(g) => vg(g, p).map(XVal::Exact),
        _ => ul(model, p),
    }
}

/// Static posterior vulnerability / uncertainty of `[prior, C]`.
pub fn static_posterior(model: &AdversaryModel, agg: Aggregate, prior: &Dist, c: &Channel) -> Result<XVal> {
    model.check_dist(prior)?;
    let hyper = c.hyper(prior)?;
    match agg {
        Aggregate::Expected => {
            let terms = hyper
                .iter()
                .map(|(_, w, post)| measure(model, post).map(|m| (w, m)))
                .collect::<Result<Vec<_>>>()?;
            XVal::weighted_sum(terms)
        }
        Aggregate::Extreme => {
            let values = hyper.iter().map(|(_, _, post)| measure(model, post)).collect::<Result<Vec<_>>>()?;
            let pick = match model.kind() {
                crate::adversary::MeasureKind::Vulnerability => XVal::max,
                crate::adversary::MeasureKind::Uncertainty => XVal::min,
            };
            Ok(values.into_iter().reduce(pick).expect("at least one feasible output"))
        }
    }
}

/// Static leakage: posterior minus prior for gains, flipped for losses.
pub fn static_leakage(model: &AdversaryModel, agg: Aggregate, prior: &Dist, c: &Channel) -> Result<XVal> {
    let post = static_posterior(model, agg, prior, c)?;
    let before = measure(model, prior)?;
    model.leakage(&post, &before)
}

/// Dynamic leakage in the traditional sense: the measure of the realised
/// posterior against the measure of the prior. May be negative.
pub fn traditional_dynamic_leakage(model: &AdversaryModel, prior: &Dist, c: &Channel, y: &str) -> Result<XVal> {
    model.check_dist(prior)?;
    let post = c.posterior(prior, y)?;
    model.leakage(&measure(model, &post)?, &measure(model, prior)?)
}
