//! Concrete runs through channel pipelines, a leakage-budget monitor, and
//! exhaustive checks that strategy-based measures average back to the
//! static ones.
//!
//! Randomness: every draw is a `u64` read as the fraction `u / 2^64` and
//! compared exactly against cumulative probabilities. Seeded runs use
//! ChaCha8 seeded from the run seed, with stream 0 for the secret and
//! stream `i` for stage `i` (1-based), so a stage's draw does not depend
//! on how many draws other stages made.

use num_bigint::BigInt;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adversary::{AdversaryModel, MeasureKind};
use crate::channel::Channel;
use crate::dist::{Dist, Label};
use crate::error::{QifError, Result};
use crate::measures::{measure, static_posterior, Aggregate};
use crate::rat::Rat;
use crate::strategy::{st_dynamic_leakage, st_measure, LeakageReport};
use crate::xval::{XVal, SHANNON_TOLERANCE};

/// A prior and a chain of channels, each consuming the previous output.
#[derive(Clone, Debug, PartialEq)]
pub struct Pipeline {
    prior: Dist,
    stages: Vec<Channel>,
    prefixes: Vec<Channel>,
}

impl Pipeline {
    pub fn new(prior: Dist, stages: Vec<Channel>) -> Result<Self> {
        let first = stages.first().ok_or_else(|| QifError::ShapeMismatch("pipeline has no stages".into()))?;
        prior.expect_labels(first.rows(), "pipeline prior vs first stage")?;
        let mut prefixes: Vec<Channel> = vec![first.clone()];
        for s in &stages[1..] {
            let next = prefixes.last().expect("non-empty").cascade(s)?;
            prefixes.push(next);
        }
        Ok(Pipeline { prior, stages, prefixes })
    }

    pub fn prior(&self) -> &Dist {
        &self.prior
    }

    pub fn stages(&self) -> &[Channel] {
        &self.stages
    }

    /// `C_1 ; … ; C_k` for `k = stage + 1`.
    pub fn prefix(&self, stage: usize) -> &Channel {
        &self.prefixes[stage]
    }

    pub fn composed(&self) -> &Channel {
        self.prefixes.last().expect("non-empty")
    }
}

/// Supplies raw 64-bit draws, one per stream request.
pub trait DrawSource {
    fn draw(&mut self, stream: u64) -> u64;
}

/// ChaCha8 draws derived from a seed.
#[derive(Clone, Copy, Debug)]
pub struct SeededDraws {
    pub seed: u64,
}

impl DrawSource for SeededDraws {
    fn draw(&mut self, stream: u64) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng.next_u64()
    }
}

/// Replays a fixed list of draws, ignoring the stream. Panics when
/// exhausted.
#[derive(Clone, Debug)]
pub struct ScriptedDraws {
    draws: std::vec::IntoIter<u64>,
}

impl ScriptedDraws {
    pub fn new(draws: Vec<u64>) -> Self {
        ScriptedDraws { draws: draws.into_iter() }
    }
}

impl DrawSource for ScriptedDraws {
    fn draw(&mut self, _stream: u64) -> u64 {
        self.draws.next().expect("scripted draws exhausted")
    }
}

fn two_pow_64() -> BigInt {
    BigInt::from(1u8) << 64
}

fn fraction(u: u64) -> Rat {
    Rat::from_big(BigInt::from(u), two_pow_64())
}

/// Index selected by draw `u`: the first `i` with `u / 2^64 < Σ_{j≤i} p_j`.
pub fn sample_index(masses: &[Rat], u: u64) -> usize {
    let f = fraction(u);
    let mut cum = Rat::zero();
    for (i, m) in masses.iter().enumerate() {
        cum += m;
        if f < cum {
            return i;
        }
    }
    unreachable!("masses sum to one and u / 2^64 < 1")
}

/// The smallest draw that selects index `i`, or `None` when `masses[i]` is
/// zero.
pub fn draw_selecting(masses: &[Rat], i: usize) -> Option<u64> {
    if masses[i].is_zero() {
        return None;
    }
    let below: Rat = masses[..i].iter().sum();
    let scaled = &below * &Rat::from_big(two_pow_64(), BigInt::from(1u8));
    let n = scaled.numer();
    let d = scaled.denom();
    let ceil: BigInt = (n + d - BigInt::from(1u8)) / d;
    u64::try_from(ceil).ok()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Continue,
    Abort,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trace {
    pub seed: Option<u64>,
    pub secret: Label,
    pub step_outputs: Vec<Label>,
    /// Empty for unmonitored runs.
    pub per_step_reports: Vec<LeakageReport>,
    pub verdicts: Vec<Verdict>,
}

impl Trace {
    pub fn aborted(&self) -> bool {
        self.verdicts.last() == Some(&Verdict::Abort)
    }

    /// One JSON object per executed step.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let mut input = self.secret.clone();
        for (i, output) in self.step_outputs.iter().enumerate() {
            let line = serde_json::json!({
                "seed": self.seed,
                "step": i + 1,
                "secret": self.secret,
                "input": input,
                "output": output,
                "report": self.per_step_reports.get(i),
                "verdict": self.verdicts.get(i),
            });
            out.push_str(&line.to_string());
            out.push('\n');
            input = output.clone();
        }
        out
    }
}

/// Runs the pipeline with the given draws. When `monitor` is set, leakage
/// of the composed prefix channel at the realised output is checked after
/// every step and the run stops at the first step exceeding the budget.
pub fn run_pipeline(
    p: &Pipeline,
    draws: &mut dyn DrawSource,
    monitor: Option<(&AdversaryModel, &XVal)>,
) -> Result<Trace> {
    let secret_idx = sample_index(p.prior.masses(), draws.draw(0));
    let secret = p.prior.labels()[secret_idx].clone();
    let mut trace =
        Trace { seed: None, secret, step_outputs: Vec::new(), per_step_reports: Vec::new(), verdicts: Vec::new() };
    let mut row = secret_idx;
    for (i, stage) in p.stages.iter().enumerate() {
        let y = sample_index(stage.row(row), draws.draw(i as u64 + 1));
        let output = stage.cols()[y].clone();
        trace.step_outputs.push(output.clone());
        row = y;
        if let Some((model, budget)) = monitor {
            let report = st_dynamic_leakage(model, &p.prior, p.prefix(i), &output)?;
            let over = report.leakage.partial_cmp(budget) == Some(std::cmp::Ordering::Greater);
            trace.per_step_reports.push(report);
            if over {
                trace.verdicts.push(Verdict::Abort);
                break;
            }
            trace.verdicts.push(Verdict::Continue);
        }
    }
    Ok(trace)
}

/// A reproducible run for `seed`.
pub fn sample_trace(p: &Pipeline, seed: u64) -> Trace {
    let mut t = run_pipeline(p, &mut SeededDraws { seed }, None).expect("unmonitored runs cannot fail");
    t.seed = Some(seed);
    t
}

/// A reproducible monitored run for `seed`.
pub fn monitor_run(p: &Pipeline, model: &AdversaryModel, budget: &XVal, seed: u64) -> Result<Trace> {
    if budget.partial_cmp(&XVal::zero()) == Some(std::cmp::Ordering::Less) {
        return Err(QifError::InvalidModel(format!("budget must be non-negative, got {budget}")));
    }
    let mut t = run_pipeline(p, &mut SeededDraws { seed }, Some((model, budget)))?;
    t.seed = Some(seed);
    Ok(t)
}

/// One averaging identity: `lhs` built from strategy-based measures,
/// `rhs` the static measure it should equal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Identity {
    pub name: &'static str,
    pub lhs: XVal,
    pub rhs: XVal,
    pub residual: XVal,
    pub holds: bool,
}

fn identity(name: &'static str, lhs: XVal, rhs: XVal) -> Identity {
    let holds = lhs.approx_eq(&rhs, SHANNON_TOLERANCE);
    let residual = if lhs == rhs { XVal::zero() } else { lhs.sub(&rhs).unwrap_or(XVal::Approx(f64::NAN)) };
    Identity { name, lhs, rhs, residual, holds }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConsistencyReport {
    pub identities: Vec<Identity>,
}

impl ConsistencyReport {
    pub fn all_hold(&self) -> bool {
        self.identities.iter().all(|i| i.holds)
    }
}

fn extreme(model: &AdversaryModel, values: Vec<XVal>) -> XVal {
    let pick = match model.kind() {
        MeasureKind::Vulnerability => XVal::max,
        MeasureKind::Uncertainty => XVal::min,
    };
    values.into_iter().reduce(pick).expect("some output is feasible")
}

fn weighted(terms: &[(Rat, XVal)]) -> Result<XVal> {
    XVal::weighted_sum(terms.iter().map(|(w, v)| (w, v.clone())))
}

/// Checks, by enumerating every output, that strategy-based measures
/// recover the static ones:
///
/// - `a`: `Σ_y δ(y) St(post_y ‖ post_y)` is the expected posterior measure;
/// - `b`: the extreme of `St(post_y ‖ post_y)` is the extreme-case one;
/// - `c`: `Σ_y δ(y) St(post_y ‖ π)` is the prior measure;
/// - `d`: `Σ_{y,z} δ_C(y) R[y][z] St(post_C(y) ‖ post_D(z))` is the expected
///   posterior measure of `D = C ; R`;
/// - `e`: the extreme over `z` of the same sum divided by `δ_D(z)` is the
///   extreme-case measure of `D`.
///
/// Without `r`, `D = C`.
pub fn verify_consistency(
    prior: &Dist,
    c: &Channel,
    r: Option<&Channel>,
    model: &AdversaryModel,
) -> Result<ConsistencyReport> {
    model.check_dist(prior)?;
    let id;
    let r = match r {
        Some(r) => r,
        None => {
            id = Channel::identity(c.cols())?;
            &id
        }
    };
    let d = c.cascade(r)?;
    let hc = c.hyper(prior)?;
    let hd = d.hyper(prior)?;

    let mut a_terms = Vec::new();
    let mut b_vals = Vec::new();
    let mut c_terms = Vec::new();
    for (_, w, post) in hc.iter() {
        let own = st_measure(model, post, post)?;
        a_terms.push((w.clone(), own.clone()));
        b_vals.push(own);
        c_terms.push((w.clone(), st_measure(model, post, prior)?));
    }

    let mut d_terms = Vec::new();
    let mut e_vals = Vec::new();
    for (z_label, wz, post_z) in hd.iter() {
        let z = d.col_index(z_label).expect("hyper labels are columns");
        let mut terms = Vec::new();
        for (y_label, wy, post_y) in hc.iter() {
            let y = c.col_index(y_label).expect("hyper labels are columns");
            let weight = wy * r.at(y, z);
            if weight.is_zero() {
                continue;
            }
            terms.push((weight, st_measure(model, post_y, post_z)?));
        }
        let sum = weighted(&terms)?;
        e_vals.push(sum.scale(&wz.recip()));
        d_terms.extend(terms);
    }

    Ok(ConsistencyReport {
        identities: vec![
            identity("a", weighted(&a_terms)?, static_posterior(model, Aggregate::Expected, prior, c)?),
            identity("b", extreme(model, b_vals), static_posterior(model, Aggregate::Extreme, prior, c)?),
            identity("c", weighted(&c_terms)?, measure(model, prior)?),
            identity("d", weighted(&d_terms)?, static_posterior(model, Aggregate::Expected, prior, &d)?),
            identity("e", extreme(model, e_vals), static_posterior(model, Aggregate::Extreme, prior, &d)?),
        ],
    })
}
