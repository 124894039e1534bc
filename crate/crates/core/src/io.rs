//! File formats: JSON for distributions, channels and adversary models, and
//! CSV as an alternative channel format.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryModel, GainMatrix, LossMatrix};
use crate::channel::Channel;
use crate::dist::{Dist, Label};
use crate::error::{QifError, Result};
use crate::rat::Rat;
use crate::xval::XVal;

fn parse_err(e: impl std::fmt::Display) -> QifError {
    QifError::Parse(e.to_string())
}

fn json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(parse_err)
}

pub fn dist_from_json(text: &str) -> Result<Dist> {
    json(text)
}

pub fn dist_to_json(d: &Dist) -> String {
    serde_json::to_string_pretty(d).expect("distributions serialise")
}

pub fn channel_from_json(text: &str) -> Result<Channel> {
    json(text)
}

pub fn channel_to_json(c: &Channel) -> String {
    serde_json::to_string_pretty(c).expect("channels serialise")
}

/// Reads a channel from CSV: the header row holds the column labels and the
/// first field of every other row is its row label. A leading corner cell
/// in the header is optional.
pub fn channel_from_csv(text: &str) -> Result<Channel> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = records.next().ok_or_else(|| parse_err("empty CSV"))?.map_err(parse_err)?;
    let header: Vec<Label> = header.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for rec in records {
        let rec = rec.map_err(parse_err)?;
        let mut fields = rec.iter();
        let label = fields.next().ok_or_else(|| parse_err("empty CSV row"))?;
        rows.push(label.to_string());
        entries.push(fields.map(|f| f.trim().parse::<Rat>()).collect::<Result<Vec<_>>>()?);
    }
    let width = entries.first().map_or(0, Vec::len);
    let cols = if header.len() == width + 1 { header[1..].to_vec() } else { header };
    Channel::new(rows, cols, entries)
}

/// Writes a channel as CSV with an empty corner cell.
pub fn channel_to_csv(c: &Channel) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = std::iter::once("").chain(c.cols().iter().map(String::as_str)).collect();
    w.write_record(&header).expect("in-memory write");
    for (label, row) in c.rows().iter().zip(c.entries()) {
        let fields: Vec<String> = std::iter::once(label.clone()).chain(row.iter().map(Rat::to_string)).collect();
        w.write_record(&fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}

/// Loads a channel, choosing CSV for `.csv` files and JSON otherwise.
pub fn load_channel(path: &Path) -> Result<Channel> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        channel_from_csv(&text)
    } else {
        channel_from_json(&text)
    }
}

pub fn load_dist(path: &Path) -> Result<Dist> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
    dist_from_json(&text)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Gain,
    Loss,
    Shannon,
    /// The identity gain over the secrets.
    Identity,
}

/// On-disk adversary model. `secrets` may be omitted, in which case the
/// secrets of the prior the model is used with are assumed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secrets: Option<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<Label>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<Vec<serde_json::Value>>,
}

fn value_literal(v: &serde_json::Value) -> Result<XVal> {
    match v {
        serde_json::Value::String(s) => match s.trim() {
            "inf" | "+inf" | "∞" => Ok(XVal::PosInf),
            "-inf" => Ok(XVal::NegInf),
            other => other.parse::<Rat>().map(XVal::Exact),
        },
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(i) => Ok(XVal::Exact(Rat::from_integer(i))),
            None => Err(parse_err(format!("non-integer number {n}: write it as a string literal"))),
        },
        other => Err(parse_err(format!("expected a rational or \"inf\", got {other}"))),
    }
}

impl ModelSpec {
    pub fn into_model(self, default_secrets: &[Label]) -> Result<AdversaryModel> {
        let secrets = self.secrets.unwrap_or_else(|| default_secrets.to_vec());
        let values = || -> Result<Vec<Vec<XVal>>> {
            self.values.iter().map(|row| row.iter().map(value_literal).collect()).collect()
        };
        match self.kind {
            ModelKind::Shannon => Ok(AdversaryModel::Shannon),
            ModelKind::Identity => AdversaryModel::identity_gain(&secrets),
            ModelKind::Gain => {
                let rows = values()?
                    .into_iter()
                    .map(|row| {
                        row.into_iter()
                            .map(|v| match v {
                                XVal::Exact(r) => Ok(r),
                                other => Err(QifError::InvalidModel(format!("gains must be finite, got {other}"))),
                            })
                            .collect()
                    })
                    .collect::<Result<Vec<_>>>()?;
                GainMatrix::new(self.actions, secrets, rows).map(AdversaryModel::Gain)
            }
            ModelKind::Loss => LossMatrix::new(self.actions, secrets, values()?).map(AdversaryModel::Loss),
        }
    }

    pub fn from_model(model: &AdversaryModel) -> Self {
        let to_json = |v: String| serde_json::Value::String(v);
        match model {
            AdversaryModel::Shannon => {
                ModelSpec { kind: ModelKind::Shannon, secrets: None, actions: vec![], values: vec![] }
            }
            AdversaryModel::Gain(g) => ModelSpec {
                kind: ModelKind::Gain,
                secrets: Some(g.secrets().to_vec()),
                actions: g.actions().to_vec(),
                values: g.values().iter().map(|r| r.iter().map(|v| to_json(v.to_string())).collect()).collect(),
            },
            AdversaryModel::Loss(l) => ModelSpec {
                kind: ModelKind::Loss,
                secrets: Some(l.secrets().to_vec()),
                actions: l.actions().to_vec(),
                values: l.values().iter().map(|r| r.iter().map(|v| to_json(v.render(None))).collect()).collect(),
            },
        }
    }
}

pub fn model_from_json(text: &str, default_secrets: &[Label]) -> Result<AdversaryModel> {
    json::<ModelSpec>(text)?.into_model(default_secrets)
}

pub fn model_to_json(model: &AdversaryModel) -> String {
    serde_json::to_string_pretty(&ModelSpec::from_model(model)).expect("models serialise")
}

pub fn load_model(path: &Path, default_secrets: &[Label]) -> Result<AdversaryModel> {
    let text = std::fs::read_to_string(path).map_err(|e| parse_err(format!("{}: {e}", path.display())))?;
    model_from_json(&text, default_secrets)
}
