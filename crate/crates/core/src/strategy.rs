//! Strategy-based measures.
//!
//! An adversary acting on a belief `q` picks uniformly among the actions
//! optimal for `q`; the resulting gain or loss is scored against a
//! separate baseline `p` describing what is actually known about the
//! secret. Dynamic leakage then compares acting on the posterior against
//! acting on the prior, both scored against the posterior.

use serde::Serialize;

use crate::adversary::{AdversaryModel, GainMatrix};
use crate::channel::Channel;
use crate::dist::{Dist, Label};
use crate::error::{QifError, Result};
use crate::measures::shannon_entropy;
use crate::rat::Rat;
use crate::refine::refinement_witness;
use crate::xval::XVal;

/// Upper bound on the number of strategies
/// [`enumerate_fixed_precision_strategies`] will produce.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;

/// The optimal actions for a belief.
#[derive(Clone, Debug, PartialEq)]
pub enum OptimalActions {
    /// Labels of the optimal actions of a finite model, in action order.
    Finite(Vec<Label>),
    /// The Shannon loss has exactly one optimal action: the belief itself.
    Belief(Dist),
}

impl OptimalActions {
    pub fn len(&self) -> usize {
        match self {
            OptimalActions::Finite(v) => v.len(),
            OptimalActions::Belief(_) => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A randomised choice of action.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// A distribution over the actions of a finite model.
    Mixed(Dist),
    /// The single distribution-valued action of the Shannon loss.
    Belief(Dist),
}

impl Strategy {
    pub fn dist(&self) -> &Dist {
        match self {
            Strategy::Mixed(d) | Strategy::Belief(d) => d,
        }
    }
}

fn check_same_labels(p: &Dist, q: &Dist) -> Result<()> {
    p.expect_labels(q.labels(), "baseline vs belief")
}

fn optimal_indices(model: &AdversaryModel, q: &Dist) -> Result<Vec<usize>> {
    model.check_dist(q)?;
    match model {
        AdversaryModel::Gain(g) => {
            let vals: Vec<Rat> = (0..g.actions().len()).map(|w| g.expected_gain(w, q)).collect();
            let best = vals.iter().max().expect("action set is non-empty");
            Ok((0..vals.len()).filter(|&w| &vals[w] == best).collect())
        }
        AdversaryModel::Loss(l) => {
            let vals: Vec<XVal> = (0..l.actions().len()).map(|w| l.expected_loss(w, q)).collect();
            let best = vals.iter().cloned().reduce(XVal::min).expect("action set is non-empty");
            Ok((0..vals.len()).filter(|&w| vals[w] == best).collect())
        }
        AdversaryModel::Shannon => Ok(vec![0]),
    }
}

/// `W*(q)`: the actions maximising expected gain (or minimising expected
/// loss) under `q`. Ties are exact.
pub fn optimal_actions(model: &AdversaryModel, q: &Dist) -> Result<OptimalActions> {
    let idx = optimal_indices(model, q)?;
    Ok(match model {
        AdversaryModel::Gain(g) => OptimalActions::Finite(idx.iter().map(|&w| g.actions()[w].clone()).collect()),
        AdversaryModel::Loss(l) => OptimalActions::Finite(idx.iter().map(|&w| l.actions()[w].clone()).collect()),
        AdversaryModel::Shannon => OptimalActions::Belief(q.clone()),
    })
}

/// `S^u(q)`: uniform over `W*(q)`.
pub fn uniform_strategy(model: &AdversaryModel, q: &Dist) -> Result<Strategy> {
    let idx = optimal_indices(model, q)?;
    let actions = match model {
        AdversaryModel::Gain(g) => g.actions(),
        AdversaryModel::Loss(l) => l.actions(),
        AdversaryModel::Shannon => return Ok(Strategy::Belief(q.clone())),
    };
    let share = Rat::new(1, idx.len() as i64);
    let mass = (0..actions.len())
        .map(|w| if idx.contains(&w) { share.clone() } else { Rat::zero() })
        .collect();
    Ok(Strategy::Mixed(Dist::new(actions.to_vec(), mass)?))
}

/// Strategy-based g-vulnerability: the expected gain under baseline `p`
/// of the uniform strategy for belief `q`.
pub fn st_vg(g: &GainMatrix, p: &Dist, q: &Dist) -> Result<Rat> {
    p.expect_labels(g.secrets(), "baseline vs model secrets")?;
    check_same_labels(p, q)?;
    let idx = optimal_indices(&AdversaryModel::Gain(g.clone()), q)?;
    let total: Rat = idx.iter().map(|&w| g.expected_gain(w, p)).sum();
    Ok(total / Rat::from_integer(idx.len() as i64))
}

/// Cross-entropy `Σ_x p(x) (-log2 q(x))`, infinite when `q` misses part of
/// the support of `p`.
fn cross_entropy(p: &Dist, q: &Dist) -> XVal {
    let mut acc = 0.0;
    for (pm, qm) in p.masses().iter().zip(q.masses()) {
        if !pm.is_positive() {
            continue;
        }
        if !qm.is_positive() {
            return XVal::PosInf;
        }
        acc -= pm.to_f64() * qm.to_f64().log2();
    }
    XVal::Approx(acc + 0.0)
}

/// Strategy-based ℓ-uncertainty: the expected loss under baseline `p` of
/// the uniform strategy for belief `q`. For the Shannon loss this is the
/// cross-entropy of `q` relative to `p`.
pub fn st_ul(model: &AdversaryModel, p: &Dist, q: &Dist) -> Result<XVal> {
    check_same_labels(p, q)?;
    match model {
        AdversaryModel::Loss(l) => {
            p.expect_labels(l.secrets(), "baseline vs model secrets")?;
            let idx = optimal_indices(model, q)?;
            let share = Rat::new(1, idx.len() as i64);
            XVal::weighted_sum(idx.iter().map(|&w| (&share, l.expected_loss(w, p))))
        }
        AdversaryModel::Shannon => Ok(cross_entropy(p, q)),
        AdversaryModel::Gain(_) => Err(QifError::InvalidModel("uncertainty needs a loss model".into())),
    }
}

/// [`st_vg`] or [`st_ul`], depending on the model.
pub fn st_measure(model: &AdversaryModel, p: &Dist, q: &Dist) -> Result<XVal> {
    match model {
        AdversaryModel::Gain(g) => st_vg(g, p, q).map(XVal::Exact),
        _ => st_ul(model, p, q),
    }
}

/// Outcome of a strategy-based dynamic leakage computation for one
/// observation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LeakageReport {
    pub observation: Label,
    /// The posterior: what the observation reveals, and the distribution
    /// both strategies are scored against.
    pub belief: Dist,
    /// The prior the adversary held before observing.
    pub baseline: Dist,
    /// Uniform strategy for the posterior.
    pub strategy: Strategy,
    /// Uniform strategy for the prior.
    pub baseline_strategy: Strategy,
    /// Measure of acting on the posterior.
    pub st_measure_belief: XVal,
    /// Measure of acting on the prior.
    pub st_measure_baseline: XVal,
    /// Gains: belief minus baseline measure. Losses: baseline minus belief.
    pub leakage: XVal,
}

/// Strategy-based dynamic leakage of observing `y` from `C` under `prior`.
pub fn st_dynamic_leakage(model: &AdversaryModel, prior: &Dist, c: &Channel, y: &str) -> Result<LeakageReport> {
    model.check_dist(prior)?;
    let post = c.posterior(prior, y)?;
    let on_post = st_measure(model, &post, &post)?;
    let on_prior = st_measure(model, &post, prior)?;
    let leakage = model.leakage(&on_post, &on_prior)?;
    Ok(LeakageReport {
        observation: y.to_string(),
        strategy: uniform_strategy(model, &post)?,
        baseline_strategy: uniform_strategy(model, prior)?,
        belief: post,
        baseline: prior.clone(),
        st_measure_belief: on_post,
        st_measure_baseline: on_prior,
        leakage,
    })
}

/// Multi-step leakage against an arbitrary baseline `b`: how much better
/// (gains) or worse (losses) acting on `posterior_belief` does than acting
/// on `prior`, scored against `b`. Can be negative.
pub fn multi_step_leakage(model: &AdversaryModel, b: &Dist, prior: &Dist, posterior_belief: &Dist) -> Result<XVal> {
    check_same_labels(prior, posterior_belief)?;
    let on_post = st_measure(model, b, posterior_belief)?;
    let on_prior = st_measure(model, b, prior)?;
    model.leakage(&on_post, &on_prior)
}

/// Evidence that a baseline and a belief sit on one run: the baseline is
/// `post_B(o)`, the belief is `post_D(z)`, `D = B ; R` and `R[o][z] > 0`.
#[derive(Clone, Debug)]
pub struct KnowledgeOrdering<'a> {
    pub prior: &'a Dist,
    pub baseline_channel: &'a Channel,
    pub baseline_output: &'a str,
    pub belief_channel: &'a Channel,
    pub belief_output: &'a str,
    /// The post-processing from the baseline channel to the belief channel.
    /// When absent, one is searched for.
    pub witness: Option<&'a Channel>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MultiStepReport {
    pub baseline: Dist,
    pub prior: Dist,
    pub belief: Dist,
    pub st_measure_belief: XVal,
    pub st_measure_prior: XVal,
    pub leakage: XVal,
    pub ordering_verified: bool,
}

impl KnowledgeOrdering<'_> {
    /// Checks the ordering for the given distributions. Returns false on any
    /// mismatch; errors only on malformed inputs.
    pub fn verify(&self, baseline: &Dist, belief: &Dist) -> Result<bool> {
        let b_post = match self.baseline_channel.posterior(self.prior, self.baseline_output) {
            Ok(d) => d,
            Err(QifError::ZeroProbabilityObservation(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        let d_post = match self.belief_channel.posterior(self.prior, self.belief_output) {
            Ok(d) => d,
            Err(QifError::ZeroProbabilityObservation(_)) => return Ok(false),
            Err(e) => return Err(e),
        };
        if &b_post != baseline || &d_post != belief {
            return Ok(false);
        }
        let found;
        let r = match self.witness {
            Some(r) => {
                if &self.baseline_channel.cascade(r)? != self.belief_channel {
                    return Ok(false);
                }
                r
            }
            None => match refinement_witness(self.baseline_channel, self.belief_channel)? {
                Some(r) => {
                    found = r;
                    &found
                }
                None => return Ok(false),
            },
        };
        Ok(r.get(self.baseline_output, self.belief_output).is_some_and(Rat::is_positive))
    }
}

/// [`multi_step_leakage`] plus whether the baseline and belief were shown
/// to be knowledge-ordered.
pub fn multi_step_report(
    model: &AdversaryModel,
    b: &Dist,
    prior: &Dist,
    posterior_belief: &Dist,
    ordering: Option<&KnowledgeOrdering<'_>>,
) -> Result<MultiStepReport> {
    check_same_labels(prior, posterior_belief)?;
    let on_post = st_measure(model, b, posterior_belief)?;
    let on_prior = st_measure(model, b, prior)?;
    let leakage = model.leakage(&on_post, &on_prior)?;
    let ordering_verified = match ordering {
        Some(o) => o.verify(b, posterior_belief)?,
        None => false,
    };
    Ok(MultiStepReport {
        baseline: b.clone(),
        prior: prior.clone(),
        belief: posterior_belief.clone(),
        st_measure_belief: on_post,
        st_measure_prior: on_prior,
        leakage,
        ordering_verified,
    })
}

/// `D_KL(p ‖ q)` in bits; infinite when `q` misses part of the support of
/// `p`.
pub fn kl_divergence(p: &Dist, q: &Dist) -> Result<XVal> {
    check_same_labels(p, q)?;
    let mut acc = 0.0;
    for (pm, qm) in p.masses().iter().zip(q.masses()) {
        if !pm.is_positive() {
            continue;
        }
        if !qm.is_positive() {
            return Ok(XVal::PosInf);
        }
        acc += pm.to_f64() * (pm / qm).to_f64().log2();
    }
    Ok(XVal::Approx(acc + 0.0))
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // Exact at every step: acc is C(n, i) and C(n, i) * (n - i) is divisible by i + 1.
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Every strategy supported on `W*(q)` whose masses are multiples of
/// `10^-n`.
pub fn enumerate_fixed_precision_strategies(g: &GainMatrix, q: &Dist, n: u32) -> Result<Vec<Strategy>> {
    let idx = optimal_indices(&AdversaryModel::Gain(g.clone()), q)?;
    let k = idx.len();
    let total = 10u128.checked_pow(n).ok_or(QifError::EnumerationTooLarge {
        count: u128::MAX,
        limit: ENUMERATION_LIMIT,
    })?;
    let count = binomial(total + k as u128 - 1, k as u128 - 1);
    if count > ENUMERATION_LIMIT {
        return Err(QifError::EnumerationTooLarge { count, limit: ENUMERATION_LIMIT });
    }
    let total = total as u64;
    let unit = Rat::new(1, total as i64);
    let mut out = Vec::with_capacity(count as usize);
    let mut parts = vec![0u64; k];
    compositions(total, &mut parts, 0, &mut |parts| {
        let mut mass = vec![Rat::zero(); g.actions().len()];
        for (&w, &c) in idx.iter().zip(parts.iter()) {
            mass[w] = &unit * &Rat::from_integer(c as i64);
        }
        out.push(Strategy::Mixed(Dist::new(g.actions().to_vec(), mass).expect("parts sum to one")));
    });
    Ok(out)
}

fn compositions(remaining: u64, parts: &mut [u64], at: usize, emit: &mut impl FnMut(&[u64])) {
    if at + 1 == parts.len() {
        parts[at] = remaining;
        emit(parts);
        return;
    }
    for c in (0..=remaining).rev() {
        parts[at] = c;
        compositions(remaining - c, parts, at + 1, emit);
    }
}

/// Mean over [`enumerate_fixed_precision_strategies`] of each strategy's
/// expected gain under baseline `p`.
pub fn averaged_strategy_vulnerability(g: &GainMatrix, p: &Dist, q: &Dist, n: u32) -> Result<Rat> {
    p.expect_labels(g.secrets(), "baseline vs model secrets")?;
    check_same_labels(p, q)?;
    let strategies = enumerate_fixed_precision_strategies(g, q, n)?;
    let gains: Vec<Rat> = (0..g.actions().len()).map(|w| g.expected_gain(w, p)).collect();
    let total: Rat = strategies
        .iter()
        .map(|s| {
            s.dist()
                .masses()
                .iter()
                .zip(&gains)
                .filter(|(m, _)| !m.is_zero())
                .map(|(m, v)| m * v)
                .sum::<Rat>()
        })
        .sum();
    Ok(total / Rat::from_integer(strategies.len() as i64))
}

/// `KL(p ‖ q)` recovered as strategy-based Shannon uncertainty minus
/// entropy.
pub fn kl_via_cross_entropy(p: &Dist, q: &Dist) -> Result<XVal> {
    st_ul(&AdversaryModel::Shannon, p, q)?.sub(&XVal::Approx(shannon_entropy(p)))
}
