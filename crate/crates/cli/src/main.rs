//! `qif`: compute leakage measures from files, check refinements, replay
//! the worked-example scenarios and run the simulator.
//!
//! Exit codes: 0 success, 1 a scenario or consistency check failed,
//! 2 invalid input, 3 infeasible (no refinement witness).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qif_core::io::{channel_to_csv, channel_to_json, load_channel, load_dist, load_model};
use qif_core::measures::{measure, static_leakage, static_posterior, traditional_dynamic_leakage};
use qif_core::scenario::{scenario, scenario_names};
use qif_core::sim::{monitor_run, sample_trace, verify_consistency, Pipeline};
use qif_core::strategy::{
    averaged_strategy_vulnerability, enumerate_fixed_precision_strategies, optimal_actions, st_dynamic_leakage,
    st_measure, uniform_strategy, OptimalActions, Strategy,
};
use qif_core::{refinement_witness, AdversaryModel, Aggregate, Dist, Label, QifError, Rat, XVal};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "qif", version, about = "Exact quantitative information flow")]
struct Cli {
    /// Print exact values as decimals with this many digits.
    #[arg(long, global = true, value_name = "N")]
    decimal: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    #[arg(long)]
    prior: PathBuf,
    /// Channel file (.json or .csv).
    #[arg(long)]
    channel: PathBuf,
    /// Model file, or one of `shannon`, `bayes`.
    #[arg(long)]
    model: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Expected,
    Extreme,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Traditional,
    Strategy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Static posterior measure and leakage.
    Eval {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long, value_enum, default_value = "expected")]
        kind: Kind,
        /// Print JSON instead of `posterior=… leakage=…`.
        #[arg(long)]
        json: bool,
    },
    /// Dynamic leakage of one observation.
    Dynamic {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(long)]
        observe: String,
        #[arg(long, value_enum, default_value = "strategy")]
        mode: Mode,
    },
    /// Optimal actions, uniform strategy and strategy-based measure of a
    /// belief scored against a baseline.
    Strategy {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        belief: PathBuf,
        #[arg(long)]
        model: String,
        /// Also average over strategies with masses in steps of 10^-N.
        #[arg(long, value_name = "N")]
        enumerate: Option<u32>,
    },
    /// Find R with C ; R = D.
    Refine {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        /// Write the witness here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Recompute a worked-example scenario's expected values.
    Scenario {
        /// Scenario name; omit with --all.
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        all: bool,
        #[arg(long)]
        list: bool,
        /// Write each scenario's inputs as JSON files under DIR/<name>.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Sample runs through a pipeline, optionally under a leakage monitor.
    Simulate {
        #[arg(long)]
        prior: PathBuf,
        /// Pipeline stages in order; repeat for each stage.
        #[arg(long = "channel", required = true)]
        channels: Vec<PathBuf>,
        /// Seed; the QIF_SEED environment variable takes precedence.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of runs, with seeds `seed, seed + 1, …`.
        #[arg(long, default_value_t = 1)]
        runs: u64,
        #[arg(long, requires = "budget")]
        model: Option<String>,
        /// Abort a run once cumulative leakage exceeds this.
        #[arg(long, requires = "model")]
        budget: Option<String>,
    },
    /// Check that strategy-based measures average back to static ones.
    Verify {
        #[command(flatten)]
        inputs: Inputs,
        /// Post-processing channel R; the identities are then also checked
        /// for C ; R.
        #[arg(long)]
        post: Option<PathBuf>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl From<QifError> for Failure {
    fn from(e: QifError) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure { code: 2, message: e.to_string() }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("qif: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

struct Render {
    decimal: Option<usize>,
}

impl Render {
    fn rat(&self, r: &Rat) -> String {
        match self.decimal {
            Some(d) => r.to_decimal_string(d),
            None => r.to_string(),
        }
    }

    fn xval(&self, v: &XVal) -> Value {
        match v {
            XVal::Exact(r) => Value::from(self.rat(r)),
            XVal::Approx(f) => match self.decimal {
                Some(d) => Value::from(format!("{f:.d$}")),
                None => json!(f),
            },
            other => Value::from(other.render(None)),
        }
    }

    fn text(&self, v: &XVal) -> String {
        match self.xval(v) {
            Value::String(s) => s,
            other => other.to_string(),
        }
    }

    fn dist(&self, d: &Dist) -> Value {
        json!({
            "labels": d.labels(),
            "mass": d.masses().iter().map(|m| self.rat(m)).collect::<Vec<_>>(),
        })
    }

    fn strategy(&self, s: &Strategy) -> Value {
        match s {
            Strategy::Mixed(d) => json!({ "mixed": self.dist(d) }),
            Strategy::Belief(d) => json!({ "belief": self.dist(d) }),
        }
    }
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("JSON values serialise"));
}

fn model_arg(arg: &str, secrets: &[Label]) -> Result<AdversaryModel, Failure> {
    Ok(match arg {
        "shannon" => AdversaryModel::Shannon,
        "bayes" => AdversaryModel::identity_gain(secrets)?,
        path => load_model(Path::new(path), secrets)?,
    })
}

fn load_inputs(i: &Inputs) -> Result<(Dist, qif_core::Channel, AdversaryModel), Failure> {
    let prior = load_dist(&i.prior)?;
    let channel = load_channel(&i.channel)?;
    prior.expect_labels(channel.rows(), "prior vs channel rows")?;
    let model = model_arg(&i.model, prior.labels())?;
    Ok((prior, channel, model))
}

fn run(cli: Cli) -> CmdResult {
    let r = Render { decimal: cli.decimal };
    match cli.command {
        Command::Eval { inputs, kind, json } => {
            let (prior, c, model) = load_inputs(&inputs)?;
            let agg = match kind {
                Kind::Expected => Aggregate::Expected,
                Kind::Extreme => Aggregate::Extreme,
            };
            let post = static_posterior(&model, agg, &prior, &c)?;
            let leak = static_leakage(&model, agg, &prior, &c)?;
            if json {
                print_json(&json!({
                    "prior": r.xval(&measure(&model, &prior)?),
                    "posterior": r.xval(&post),
                    "leakage": r.xval(&leak),
                }));
            } else {
                println!("posterior={} leakage={}", r.text(&post), r.text(&leak));
            }
            Ok(())
        }
        Command::Dynamic { inputs, observe, mode } => {
            let (prior, c, model) = load_inputs(&inputs)?;
            match mode {
                Mode::Traditional => {
                    let post = c.posterior(&prior, &observe)?;
                    let leak = traditional_dynamic_leakage(&model, &prior, &c, &observe)?;
                    print_json(&json!({
                        "mode": "traditional",
                        "observation": observe,
                        "posterior": r.dist(&post),
                        "prior_measure": r.xval(&measure(&model, &prior)?),
                        "posterior_measure": r.xval(&measure(&model, &post)?),
                        "leakage": r.xval(&leak),
                    }));
                }
                Mode::Strategy => {
                    let rep = st_dynamic_leakage(&model, &prior, &c, &observe)?;
                    print_json(&json!({
                        "mode": "strategy",
                        "observation": rep.observation,
                        "belief": r.dist(&rep.belief),
                        "baseline": r.dist(&rep.baseline),
                        "strategy": r.strategy(&rep.strategy),
                        "baseline_strategy": r.strategy(&rep.baseline_strategy),
                        "st_measure_belief": r.xval(&rep.st_measure_belief),
                        "st_measure_baseline": r.xval(&rep.st_measure_baseline),
                        "leakage": r.xval(&rep.leakage),
                    }));
                }
            }
            Ok(())
        }
        Command::Strategy { baseline, belief, model, enumerate } => {
            let p = load_dist(&baseline)?;
            let q = load_dist(&belief)?;
            let model = model_arg(&model, q.labels())?;
            let actions = match optimal_actions(&model, &q)? {
                OptimalActions::Finite(v) => json!(v),
                OptimalActions::Belief(d) => json!([r.dist(&d)]),
            };
            let mut out = json!({
                "optimal_actions": actions,
                "strategy": r.strategy(&uniform_strategy(&model, &q)?),
                "st_measure": r.xval(&st_measure(&model, &p, &q)?),
            });
            if let Some(n) = enumerate {
                let AdversaryModel::Gain(g) = &model else {
                    return Err(Failure { code: 2, message: "--enumerate needs a gain model".into() });
                };
                out["strategies"] = json!(enumerate_fixed_precision_strategies(g, &q, n)?.len());
                out["averaged"] = Value::from(r.rat(&averaged_strategy_vulnerability(g, &p, &q, n)?));
            }
            print_json(&out);
            Ok(())
        }
        Command::Refine { from, to, out, format } => {
            let c = load_channel(&from)?;
            let d = load_channel(&to)?;
            let Some(w) = refinement_witness(&c, &d)? else {
                println!("none");
                return Err(Failure { code: 3, message: "no refinement witness exists".into() });
            };
            let text = match format {
                Format::Json => channel_to_json(&w),
                Format::Csv => channel_to_csv(&w),
            };
            match out {
                Some(path) => std::fs::write(path, text)?,
                None => println!("{}", text.trim_end()),
            }
            Ok(())
        }
        Command::Scenario { name, all, list, export } => {
            if list {
                for n in scenario_names() {
                    println!("{n}");
                }
                return Ok(());
            }
            let names: Vec<String> = match (name, all) {
                (Some(n), _) => vec![n],
                (None, true) => scenario_names().into_iter().map(String::from).collect(),
                (None, false) => {
                    return Err(Failure { code: 2, message: "give a scenario name, --all or --list".into() })
                }
            };
            let mut failed = 0;
            for n in &names {
                let s = scenario(n)?;
                if let Some(dir) = &export {
                    s.export(&dir.join(n))?;
                }
                for o in s.run() {
                    let actual = match (&o.actual, &o.error) {
                        (Some(a), _) => r.text(a),
                        (None, Some(e)) => format!("error: {e}"),
                        (None, None) => "-".into(),
                    };
                    let status = if o.pass { "pass" } else { "FAIL" };
                    println!("{status}  {:<16} {:<48} expected {:<22} got {actual}", o.scenario, o.check, r.text(&o.expected));
                    if !o.pass {
                        failed += 1;
                    }
                }
            }
            if failed > 0 {
                return Err(Failure { code: 1, message: format!("{failed} check(s) failed") });
            }
            Ok(())
        }
        Command::Simulate { prior, channels, seed, runs, model, budget } => {
            let prior = load_dist(&prior)?;
            let stages = channels.iter().map(|p| load_channel(p)).collect::<Result<Vec<_>, _>>()?;
            let pipeline = Pipeline::new(prior, stages)?;
            let seed = match std::env::var("QIF_SEED") {
                Ok(s) => s
                    .trim()
                    .parse()
                    .map_err(|_| Failure { code: 2, message: format!("QIF_SEED is not a u64: {s:?}") })?,
                Err(_) => seed,
            };
            let monitor = match (model, budget) {
                (Some(m), Some(b)) => {
                    let model = model_arg(&m, pipeline.prior().labels())?;
                    let budget = b.parse::<Rat>().map(XVal::Exact)?;
                    Some((model, budget))
                }
                _ => None,
            };
            for i in 0..runs {
                let s = seed.wrapping_add(i);
                let trace = match &monitor {
                    Some((m, b)) => monitor_run(&pipeline, m, b, s)?,
                    None => sample_trace(&pipeline, s),
                };
                print!("{}", trace.to_json_lines());
            }
            Ok(())
        }
        Command::Verify { inputs, post } => {
            let (prior, c, model) = load_inputs(&inputs)?;
            let rch = post.as_deref().map(load_channel).transpose()?;
            let rep = verify_consistency(&prior, &c, rch.as_ref(), &model)?;
            let ids: Vec<Value> = rep
                .identities
                .iter()
                .map(|i| {
                    json!({
                        "identity": i.name,
                        "lhs": r.xval(&i.lhs),
                        "rhs": r.xval(&i.rhs),
                        "residual": r.xval(&i.residual),
                        "holds": i.holds,
                    })
                })
                .collect();
            print_json(&json!({ "identities": ids, "all_hold": rep.all_hold() }));
            if !rep.all_hold() {
                return Err(Failure { code: 1, message: "an identity does not hold".into() });
            }
            Ok(())
        }
    }
}
