//! Worked examples as executable scenarios. Each scenario carries its
//! inputs and a list of checks, each of which recomputes one quantity and
//! compares it to the value it should have.

mod dataset;

use std::fs;
use std::path::Path;

use serde::Serialize;

pub use dataset::{
    build_data_release, deidentification, hint_frequency, histogram_hint, histogram_label, lift_dataset,
    mechanism_lift, Dataset,
};

use crate::adversary::{AdversaryModel, GainMatrix};
use crate::channel::{tuple_label, Channel};
use crate::dist::{labels, Dist, Label};
use crate::error::{QifError, Result};
use crate::measures::{shannon_entropy, static_leakage, static_posterior, traditional_dynamic_leakage, vg, Aggregate};
use crate::rat::{rat, Rat};
use crate::refine::refinement_witness;
use crate::strategy::{
    averaged_strategy_vulnerability, enumerate_fixed_precision_strategies, kl_divergence, multi_step_leakage,
    optimal_actions, st_dynamic_leakage, st_ul, st_vg, uniform_strategy,
};
use crate::xval::{XVal, SHANNON_TOLERANCE};

type Compute = fn(&Scenario) -> Result<XVal>;

/// One expected value of a scenario.
pub struct Check {
    pub name: &'static str,
    pub expected: XVal,
    /// Where the value comes from, in words.
    pub source: &'static str,
    compute: Compute,
}

pub struct Scenario {
    pub name: &'static str,
    pub description: &'static str,
    pub dists: Vec<(String, Dist)>,
    pub channels: Vec<(String, Channel)>,
    pub observations: Vec<(String, Label)>,
    pub checks: Vec<Check>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub scenario: String,
    pub check: String,
    pub expected: XVal,
    pub actual: Option<XVal>,
    pub error: Option<String>,
    pub pass: bool,
    pub source: String,
}

fn exact(r: Rat) -> XVal {
    XVal::Exact(r)
}

fn flag(b: bool) -> XVal {
    exact(if b { Rat::one() } else { Rat::zero() })
}

fn mass_at(d: &Dist, label: &str) -> Result<XVal> {
    d.mass(label).cloned().map(exact).ok_or_else(|| QifError::UnknownLabel(label.to_string()))
}

impl Scenario {
    pub fn dist(&self, name: &str) -> Result<&Dist> {
        self.dists
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, d)| d)
            .ok_or_else(|| QifError::UnknownLabel(name.to_string()))
    }

    pub fn prior(&self) -> &Dist {
        self.dist("prior").expect("every scenario has a prior")
    }

    pub fn channel(&self, name: &str) -> Result<&Channel> {
        self.channels
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c)
            .ok_or_else(|| QifError::UnknownLabel(name.to_string()))
    }

    pub fn observation(&self, name: &str) -> Result<&str> {
        self.observations
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, o)| o.as_str())
            .ok_or_else(|| QifError::UnknownLabel(name.to_string()))
    }

    fn identity_gain(&self) -> Result<AdversaryModel> {
        AdversaryModel::identity_gain(self.prior().labels())
    }

    fn posterior(&self, channel: &str, obs: &str) -> Result<Dist> {
        self.channel(channel)?.posterior(self.prior(), self.observation(obs)?)
    }

    /// Recomputes every check.
    pub fn run(&self) -> Vec<CheckOutcome> {
        self.checks
            .iter()
            .map(|c| {
                let result = (c.compute)(self);
                let (actual, error) = match result {
                    Ok(v) => (Some(v), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                let pass = actual.as_ref().is_some_and(|a| a.approx_eq(&c.expected, SHANNON_TOLERANCE));
                CheckOutcome {
                    scenario: self.name.to_string(),
                    check: c.name.to_string(),
                    expected: c.expected.clone(),
                    actual,
                    error,
                    pass,
                    source: c.source.to_string(),
                }
            })
            .collect()
    }

    /// Writes every distribution and channel as `<name>.json` in `dir`, plus
    /// `scenario.json` listing observations and expected values.
    pub fn export(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        for (name, d) in &self.dists {
            fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(d)?)?;
        }
        for (name, c) in &self.channels {
            fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(c)?)?;
        }
        let expected: Vec<serde_json::Value> = self
            .checks
            .iter()
            .map(|c| serde_json::json!({ "name": c.name, "expected": c.expected, "source": c.source }))
            .collect();
        let observations: serde_json::Map<String, serde_json::Value> =
            self.observations.iter().map(|(n, o)| (n.clone(), serde_json::Value::from(o.as_str()))).collect();
        let manifest = serde_json::json!({
            "name": self.name,
            "description": self.description,
            "dists": self.dists.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            "channels": self.channels.iter().map(|(n, _)| n).collect::<Vec<_>>(),
            "observations": observations,
            "expected": expected,
        });
        fs::write(dir.join("scenario.json"), serde_json::to_string_pretty(&manifest)?)
    }
}

fn check(name: &'static str, expected: XVal, source: &'static str, compute: Compute) -> Check {
    Check { name, expected, source, compute }
}

pub fn scenario_names() -> Vec<&'static str> {
    vec!["two-bit-secret", "query-pipeline", "data-release", "avg-st", "doctor"]
}

pub fn scenario(name: &str) -> Result<Scenario> {
    match name {
        "two-bit-secret" => Ok(two_bit_secret()),
        "query-pipeline" => Ok(query_pipeline()),
        "data-release" => data_release(),
        "avg-st" => Ok(avg_st()),
        "doctor" => Ok(doctor()),
        other => Err(QifError::UnknownScenario(other.to_string())),
    }
}

pub fn scenario_registry() -> Vec<Scenario> {
    scenario_names().into_iter().map(|n| scenario(n).expect("registry scenarios build")).collect()
}

fn two_bit_secret() -> Scenario {
    let s = labels(&["00", "10", "11"]);
    let prior = Dist::new(s.clone(), vec![rat(7, 8), rat(1, 16), rat(1, 16)]).unwrap();
    let b = Channel::deterministic(&s, |x| if x == "00" { "a".into() } else { "b".into() }).unwrap();
    Scenario {
        name: "two-bit-secret",
        description: "A skewed prior on a two-bit secret and a channel revealing whether it is 00",
        dists: vec![("prior".into(), prior)],
        channels: vec![("B".into(), b)],
        observations: vec![("y".into(), "b".into())],
        checks: vec![
            check("prior entropy", XVal::Approx(0.668_564_443_199_596_4), "two-bit secret: prior Shannon entropy", |s| {
                Ok(XVal::Approx(shannon_entropy(s.prior())))
            }),
            check(
                "traditional Shannon leakage at b",
                XVal::Approx(-0.331_435_556_800_403_6),
                "two-bit secret: traditional dynamic leakage is negative",
                |s| traditional_dynamic_leakage(&AdversaryModel::Shannon, s.prior(), s.channel("B")?, s.observation("y")?),
            ),
            check(
                "strategy uncertainty acting on the prior",
                XVal::Approx(4.0),
                "two-bit secret: cross-entropy of the prior against the posterior",
                |s| st_ul(&AdversaryModel::Shannon, &s.posterior("B", "y")?, s.prior()),
            ),
            check(
                "strategy-based Shannon leakage at b",
                XVal::Approx(3.0),
                "two-bit secret: strategy-based leakage 4 - 1",
                |s| Ok(st_dynamic_leakage(&AdversaryModel::Shannon, s.prior(), s.channel("B")?, s.observation("y")?)?.leakage),
            ),
            check("KL divergence posterior to prior", XVal::Approx(3.0), "two-bit secret: KL form of the leakage", |s| {
                kl_divergence(&s.posterior("B", "y")?, s.prior())
            }),
            check(
                "expected posterior entropy",
                XVal::Approx(0.125),
                "two-bit secret: hyper-distribution enumeration",
                |s| static_posterior(&AdversaryModel::Shannon, Aggregate::Expected, s.prior(), s.channel("B")?),
            ),
        ],
    }
}

fn yes_no() -> Vec<Label> {
    labels(&["no", "yes"])
}

fn query_pipeline() -> Scenario {
    let p = Channel::new(yes_no(), yes_no(), vec![vec![rat(2, 3), rat(1, 3)], vec![rat(1, 3), rat(2, 3)]]).unwrap();
    let s = Channel::new(yes_no(), yes_no(), vec![vec![rat(1, 1), rat(0, 1)], vec![rat(1, 2), rat(1, 2)]]).unwrap();
    let ps = p.cascade(&s).unwrap();
    Scenario {
        name: "query-pipeline",
        description: "A noisy yes/no query P followed by a sanitiser S, under a uniform prior",
        dists: vec![("prior".into(), Dist::uniform(&yes_no()).unwrap()), ("truth".into(), Dist::point("no", &yes_no()).unwrap())],
        channels: vec![("P".into(), p), ("S".into(), s), ("PS".into(), ps)],
        observations: vec![("p_out".into(), "yes".into()), ("ps_out".into(), "no".into())],
        checks: vec![
            check("P;S row no->no", exact(rat(5, 6)), "query pipeline: composed channel", |s| {
                Ok(exact(s.channel("PS")?.get("no", "no").cloned().unwrap()))
            }),
            check("P;S row yes->no", exact(rat(2, 3)), "query pipeline: composed channel", |s| {
                Ok(exact(s.channel("PS")?.get("yes", "no").cloned().unwrap()))
            }),
            check("outer of P;S at no", exact(rat(3, 4)), "query pipeline: outer distribution", |s| {
                mass_at(&s.channel("PS")?.outer(s.prior())?, "no")
            }),
            check("posterior of P at yes, mass on yes", exact(rat(2, 3)), "query pipeline: analyst posterior", |s| {
                mass_at(&s.posterior("P", "p_out")?, "yes")
            }),
            check("posterior of P;S at no, mass on no", exact(rat(5, 9)), "query pipeline: engineering posterior", |s| {
                mass_at(&s.posterior("PS", "ps_out")?, "no")
            }),
            check(
                "StVg against the truth, acting on post_P(yes)",
                exact(Rat::zero()),
                "query pipeline: guessing yes when the truth is no",
                |s| {
                    let g = GainMatrix::identity(&yes_no())?;
                    st_vg(&g, s.dist("truth")?, &s.posterior("P", "p_out")?).map(exact)
                },
            ),
            check(
                "StVg against the truth, acting on post_P;S(no)",
                exact(Rat::one()),
                "query pipeline: post-processing helps on this run",
                |s| {
                    let g = GainMatrix::identity(&yes_no())?;
                    st_vg(&g, s.dist("truth")?, &s.posterior("PS", "ps_out")?).map(exact)
                },
            ),
            check("expected posterior Bayes vulnerability of P", exact(rat(2, 3)), "query pipeline: static posterior", |s| {
                static_posterior(&s.identity_gain()?, Aggregate::Expected, s.prior(), s.channel("P")?)
            }),
            check("expected Bayes leakage of P", exact(rat(1, 6)), "query pipeline: static leakage", |s| {
                static_leakage(&s.identity_gain()?, Aggregate::Expected, s.prior(), s.channel("P")?)
            }),
            check("P;S is a post-processing of P", flag(true), "query pipeline: refinement witness", |s| {
                Ok(flag(refinement_witness(s.channel("P")?, s.channel("PS")?)?.is_some()))
            }),
        ],
    }
}

/// Alex and Bob hold three visits between them over locations A and B,
/// one person two and the other one. The four datasets with histogram
/// `{A:2,B:1}` in the order used by the worked example come first.
pub fn data_release_space() -> Vec<Dataset> {
    let head = vec![
        Dataset::new([("Alex", vec!["A", "A"]), ("Bob", vec!["B"])]),
        Dataset::new([("Alex", vec!["B"]), ("Bob", vec!["A", "A"])]),
        Dataset::new([("Alex", vec!["A", "B"]), ("Bob", vec!["A"])]),
        Dataset::new([("Alex", vec!["A"]), ("Bob", vec!["A", "B"])]),
    ];
    let pairs = [vec!["A", "A"], vec!["A", "B"], vec!["B", "B"]];
    let singles = [vec!["A"], vec!["B"]];
    let mut rest = Vec::new();
    for two in &pairs {
        for one in &singles {
            rest.push(Dataset::new([("Alex", two.clone()), ("Bob", one.clone())]));
            rest.push(Dataset::new([("Alex", one.clone()), ("Bob", two.clone())]));
        }
    }
    rest.retain(|d| !head.contains(d));
    rest.sort_by_key(Dataset::label);
    head.into_iter().chain(rest).collect()
}

fn location_flip() -> Channel {
    let ab = labels(&["A", "B"]);
    Channel::new(ab.clone(), ab, vec![vec![rat(3, 4), rat(1, 4)], vec![rat(1, 4), rat(3, 4)]]).unwrap()
}

fn data_release() -> Result<Scenario> {
    let space = data_release_space();
    let secrets: Vec<Label> = space.iter().map(Dataset::label).collect();
    let prior = Dist::uniform(&secrets)?;
    let h_hist = histogram_hint(&space)?;
    let h_alex = hint_frequency("Alex", &space)?;
    let (d, deid_out) = deidentification(&space)?;
    let m = mechanism_lift(&location_flip(), &deid_out)?;
    let id = Channel::identity(&labels(&["A", "B"]))?;
    let s = build_data_release(&space, &location_flip(), &[&h_hist, &h_alex])?;
    let p = build_data_release(&space, &id, &[&h_hist, &h_alex])?;

    let k = histogram_label(&space[0].histogram());
    let d0 = deid_out[0].label();
    let d1 = deid_out[1].label();
    Ok(Scenario {
        name: "data-release",
        description: "Location data released after de-identification and a per-location randomiser, with a \
                      histogram hint and a hint on Alex's record",
        dists: vec![("prior".into(), prior)],
        channels: vec![
            ("H_hist".into(), h_hist),
            ("H_Alex".into(), h_alex),
            ("D".into(), d),
            ("M".into(), m),
            ("S".into(), s),
            ("P".into(), p),
        ],
        observations: vec![
            ("s_obs".into(), tuple_label(&[k.as_str(), "A", d0.as_str()])),
            ("p_obs".into(), tuple_label(&[k.as_str(), "A", d1.as_str()])),
            ("d0".into(), d0.clone()),
            ("d1".into(), d1),
        ],
        checks: vec![
            check("M at d0 -> s", exact(rat(27, 64)), "data release: randomiser matrix", |s| {
                let d0 = s.observation("d0")?;
                Ok(exact(s.channel("M")?.get(d0, d0).cloned().unwrap()))
            }),
            check("M at d1 -> s", exact(rat(3, 64)), "data release: randomiser matrix", |s| {
                Ok(exact(s.channel("M")?.get(s.observation("d1")?, s.observation("d0")?).cloned().unwrap()))
            }),
            check("H_Alex at x2, A", exact(rat(1, 2)), "data release: frequency hint", |s| {
                Ok(exact(s.channel("H_Alex")?.at(2, 0).clone()))
            }),
            check("post_S mass on x0", exact(rat(6, 7)), "data release: posterior with randomiser", |s| {
                Ok(exact(s.posterior("S", "s_obs")?.masses()[0].clone()))
            }),
            check("post_S mass on x1", exact(Rat::zero()), "data release: posterior with randomiser", |s| {
                Ok(exact(s.posterior("S", "s_obs")?.masses()[1].clone()))
            }),
            check("post_S mass on x2", exact(rat(1, 21)), "data release: posterior with randomiser", |s| {
                Ok(exact(s.posterior("S", "s_obs")?.masses()[2].clone()))
            }),
            check("post_S mass on x3", exact(rat(2, 21)), "data release: posterior with randomiser", |s| {
                Ok(exact(s.posterior("S", "s_obs")?.masses()[3].clone()))
            }),
            check("post_P mass on x2", exact(rat(1, 3)), "data release: posterior without randomiser", |s| {
                Ok(exact(s.posterior("P", "p_obs")?.masses()[2].clone()))
            }),
            check("post_P mass on x3", exact(rat(2, 3)), "data release: posterior without randomiser", |s| {
                Ok(exact(s.posterior("P", "p_obs")?.masses()[3].clone()))
            }),
            check("Vg of post_P", exact(rat(2, 3)), "data release: unrandomised adversary's success", |s| {
                vg(&GainMatrix::identity(s.prior().labels())?, &s.posterior("P", "p_obs")?).map(exact)
            }),
            check("StVg(post_P, post_S)", exact(Rat::zero()), "data release: randomised adversary guesses x0", |s| {
                let g = GainMatrix::identity(s.prior().labels())?;
                st_vg(&g, &s.posterior("P", "p_obs")?, &s.posterior("S", "s_obs")?).map(exact)
            }),
            check("S is a post-processing of P", flag(true), "data release: refinement of the composed channels", |s| {
                Ok(flag(refinement_witness(s.channel("P")?, s.channel("S")?)?.is_some()))
            }),
        ],
    })
}

fn avg_st() -> Scenario {
    let s = labels(&["x0", "x1", "x2"]);
    Scenario {
        name: "avg-st",
        description: "Averaging fixed-precision strategies over a three-way tie recovers the uniform strategy",
        dists: vec![
            ("prior".into(), Dist::uniform(&s).unwrap()),
            ("baseline".into(), Dist::new(s.clone(), vec![rat(0, 1), rat(1, 2), rat(1, 2)]).unwrap()),
        ],
        channels: vec![],
        observations: vec![],
        checks: vec![
            check("optimal actions for the uniform belief", exact(rat(3, 1)), "averaging: all three guesses tie", |s| {
                Ok(exact(Rat::from_integer(optimal_actions(&s.identity_gain()?, s.prior())?.len() as i64)))
            }),
            check("strategies at one decimal place", exact(rat(66, 1)), "averaging: strategy count", |s| {
                let g = GainMatrix::identity(s.prior().labels())?;
                Ok(exact(Rat::from_integer(enumerate_fixed_precision_strategies(&g, s.prior(), 1)?.len() as i64)))
            }),
            check("average vulnerability at one decimal place", exact(rat(1, 3)), "averaging: 22/66", |s| {
                let g = GainMatrix::identity(s.prior().labels())?;
                averaged_strategy_vulnerability(&g, s.dist("baseline")?, s.prior(), 1).map(exact)
            }),
            check("uniform strategy vulnerability", exact(rat(1, 3)), "averaging: uniform strategy", |s| {
                let g = GainMatrix::identity(s.prior().labels())?;
                st_vg(&g, s.dist("baseline")?, s.prior()).map(exact)
            }),
        ],
    }
}

fn doctor() -> Scenario {
    let s = labels(&["x0", "x1", "x2"]);
    let prior = Dist::new(s.clone(), vec![rat(9, 10), rat(1, 20), rat(1, 20)]).unwrap();
    let c = Channel::new(
        s.clone(),
        labels(&["P", "N"]),
        vec![vec![rat(99, 100), rat(1, 100)], vec![rat(1, 100), rat(99, 100)], vec![rat(1, 100), rat(99, 100)]],
    )
    .unwrap();
    Scenario {
        name: "doctor",
        description: "A diagnostic test whose negative result moves belief away from the true condition",
        dists: vec![("prior".into(), prior), ("truth".into(), Dist::point("x0", &s).unwrap())],
        channels: vec![("C".into(), c)],
        observations: vec![("y".into(), "N".into())],
        checks: vec![
            check("outer at P", exact(rat(223, 250)), "diagnostic test: outer distribution", |s| {
                mass_at(&s.channel("C")?.outer(s.prior())?, "P")
            }),
            check("posterior at N, mass on x0", exact(rat(1, 12)), "diagnostic test: posterior", |s| {
                mass_at(&s.posterior("C", "y")?, "x0")
            }),
            check("posterior at N, mass on x1", exact(rat(11, 24)), "diagnostic test: posterior", |s| {
                mass_at(&s.posterior("C", "y")?, "x1")
            }),
            check("uniform strategy at N, mass on x1", exact(rat(1, 2)), "diagnostic test: tie between x1 and x2", |s| {
                mass_at(uniform_strategy(&s.identity_gain()?, &s.posterior("C", "y")?)?.dist(), "x1")
            }),
            check("strategy-based Bayes leakage at N", exact(rat(3, 8)), "diagnostic test: 11/24 - 1/12", |s| {
                Ok(st_dynamic_leakage(&s.identity_gain()?, s.prior(), s.channel("C")?, s.observation("y")?)?.leakage)
            }),
            check("multi-step leakage against x0", exact(rat(-1, 1)), "diagnostic test: 0 - 1, a privacy gain", |s| {
                multi_step_leakage(&s.identity_gain()?, s.dist("truth")?, s.prior(), &s.posterior("C", "y")?)
            }),
        ],
    }
}
