//! Location datasets, de-identification, record-wise mechanisms and hint
//! channels for data-release analyses.

use std::collections::BTreeMap;

use crate::channel::Channel;
use crate::dist::Label;
use crate::error::{QifError, Result};
use crate::rat::Rat;

/// A mapping from people to multisets of locations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dataset {
    records: BTreeMap<String, Vec<Label>>,
}

impl Dataset {
    pub fn new<P, L>(records: impl IntoIterator<Item = (P, Vec<L>)>) -> Self
    where
        P: Into<String>,
        L: Into<Label>,
    {
        let records = records
            .into_iter()
            .map(|(p, locs)| {
                let mut locs: Vec<Label> = locs.into_iter().map(Into::into).collect();
                locs.sort();
                (p.into(), locs)
            })
            .collect();
        Dataset { records }
    }

    pub fn record(&self, person: &str) -> Option<&[Label]> {
        self.records.get(person).map(Vec::as_slice)
    }

    pub fn people(&self) -> impl Iterator<Item = &String> {
        self.records.keys()
    }

    /// Canonical label, e.g. `{Alex:[A,A],Bob:[B]}`. Independent of the
    /// order records and locations were given in.
    pub fn label(&self) -> Label {
        let parts: Vec<String> =
            self.records.iter().map(|(p, locs)| format!("{p}:[{}]", locs.join(","))).collect();
        format!("{{{}}}", parts.join(","))
    }

    /// Count of each location across all records.
    pub fn histogram(&self) -> BTreeMap<Label, usize> {
        let mut h = BTreeMap::new();
        for loc in self.records.values().flatten() {
            *h.entry(loc.clone()).or_insert(0) += 1;
        }
        h
    }

    /// Replaces person ids with positions `0, 1, …`, records ordered by
    /// size (largest first) and then by content.
    pub fn deidentify(&self) -> Dataset {
        let mut recs: Vec<&Vec<Label>> = self.records.values().collect();
        recs.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        Dataset::new(recs.into_iter().enumerate().map(|(i, r)| (i.to_string(), r.clone())))
    }
}

pub fn histogram_label(h: &BTreeMap<Label, usize>) -> Label {
    let parts: Vec<String> = h.iter().map(|(l, n)| format!("{l}:{n}")).collect();
    format!("{{{}}}", parts.join(","))
}

fn labels_of(space: &[Dataset]) -> Vec<Label> {
    space.iter().map(Dataset::label).collect()
}

/// Deterministic channel from each dataset to its location histogram.
pub fn histogram_hint(space: &[Dataset]) -> Result<Channel> {
    let by_label: BTreeMap<Label, Label> =
        space.iter().map(|d| (d.label(), histogram_label(&d.histogram()))).collect();
    Channel::deterministic(&labels_of(space), |l| by_label[l].clone())
}

/// Reveals one location drawn uniformly from `person`'s record.
pub fn hint_frequency(person: &str, space: &[Dataset]) -> Result<Channel> {
    let mut locations: Vec<Label> = Vec::new();
    for d in space {
        let rec = d.record(person).ok_or_else(|| QifError::UnknownPerson(person.to_string()))?;
        if rec.is_empty() {
            return Err(QifError::ShapeMismatch(format!("{person} has an empty record in {}", d.label())));
        }
        locations.extend(rec.iter().cloned());
    }
    locations.sort();
    locations.dedup();
    let entries = space
        .iter()
        .map(|d| {
            let rec = d.record(person).expect("checked above");
            let n = rec.len() as i64;
            locations
                .iter()
                .map(|l| Rat::new(rec.iter().filter(|x| *x == l).count() as i64, n))
                .collect()
        })
        .collect();
    Channel::new(labels_of(space), locations, entries)
}

/// Deterministic de-identification channel, plus the de-identified
/// datasets in column order.
pub fn deidentification(space: &[Dataset]) -> Result<(Channel, Vec<Dataset>)> {
    let mut outputs: Vec<Dataset> = Vec::new();
    for d in space {
        let o = d.deidentify();
        if !outputs.contains(&o) {
            outputs.push(o);
        }
    }
    let by_label: BTreeMap<Label, Label> = space.iter().map(|d| (d.label(), d.deidentify().label())).collect();
    let channel = Channel::deterministic(&labels_of(space), |l| by_label[l].clone())?;
    Ok((channel, outputs))
}

/// Output distribution of applying `per_element` independently to every
/// location of `d`. Outputs that agree as multisets are merged.
pub fn lift_dataset(per_element: &Channel, d: &Dataset) -> Result<Vec<(Dataset, Rat)>> {
    if per_element.rows() != per_element.cols() {
        return Err(QifError::ShapeMismatch("per-element mechanism must map locations to locations".into()));
    }
    // Partial outputs: (records so far, probability).
    let mut partial: Vec<(Vec<(String, Vec<Label>)>, Rat)> = vec![(Vec::new(), Rat::one())];
    for (person, locs) in &d.records {
        let mut per_record: Vec<(Vec<Label>, Rat)> = vec![(Vec::new(), Rat::one())];
        for loc in locs {
            let x = per_element.row_index(loc).ok_or_else(|| QifError::UnknownLabel(loc.clone()))?;
            let mut next = Vec::new();
            for (prefix, p) in &per_record {
                for (y, out) in per_element.cols().iter().enumerate() {
                    let q = per_element.at(x, y);
                    if q.is_zero() {
                        continue;
                    }
                    let mut v = prefix.clone();
                    v.push(out.clone());
                    next.push((v, p * q));
                }
            }
            per_record = next;
        }
        let mut next = Vec::new();
        for (recs, p) in &partial {
            for (r, q) in &per_record {
                let mut v = recs.clone();
                v.push((person.clone(), r.clone()));
                next.push((v, p * q));
            }
        }
        partial = next;
    }
    let mut merged: Vec<(Dataset, Rat)> = Vec::new();
    for (recs, p) in partial {
        let out = Dataset::new(recs);
        match merged.iter_mut().find(|(d, _)| *d == out) {
            Some((_, acc)) => *acc += &p,
            None => merged.push((out, p)),
        }
    }
    Ok(merged)
}

/// Lifts a per-location mechanism to a channel on datasets. Columns are the
/// reachable inputs in input order, then any other outputs in order of
/// first appearance.
pub fn mechanism_lift(per_element: &Channel, inputs: &[Dataset]) -> Result<Channel> {
    let dists = inputs.iter().map(|d| lift_dataset(per_element, d)).collect::<Result<Vec<_>>>()?;
    let mut cols: Vec<Label> = inputs.iter().map(Dataset::label).collect();
    cols.retain(|l| dists.iter().flatten().any(|(o, _)| &o.label() == l));
    for (o, _) in dists.iter().flatten() {
        let l = o.label();
        if !cols.contains(&l) {
            cols.push(l);
        }
    }
    let entries = dists
        .iter()
        .map(|dist| {
            let mut row = vec![Rat::zero(); cols.len()];
            for (o, p) in dist {
                let l = o.label();
                let j = cols.iter().position(|c| c == &l).expect("column collected above");
                row[j] += p;
            }
            row
        })
        .collect();
    Channel::new(labels_of(inputs), cols, entries)
}

/// `H_1 ∥ … ∥ H_k ∥ (D ; M)` over `space`, where `D` de-identifies and `M`
/// applies `per_location` to every location of the de-identified data.
pub fn build_data_release(space: &[Dataset], per_location: &Channel, hints: &[&Channel]) -> Result<Channel> {
    let (deid, outputs) = deidentification(space)?;
    let release = deid.cascade(&mechanism_lift(per_location, &outputs)?)?;
    let mut parts: Vec<&Channel> = hints.to_vec();
    parts.push(&release);
    Channel::parallel_all(&parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::labels;
    use crate::rat::rat;

    fn flip() -> Channel {
        let ab = labels(&["A", "B"]);
        Channel::new(ab.clone(), ab, vec![vec![rat(3, 4), rat(1, 4)], vec![rat(1, 4), rat(3, 4)]]).unwrap()
    }

    #[test]
    fn labels_are_canonical() {
        let a = Dataset::new([("Bob", vec!["B"]), ("Alex", vec!["A", "A"])]);
        let b = Dataset::new([("Alex", vec!["A", "A"]), ("Bob", vec!["B"])]);
        assert_eq!(a.label(), b.label());
        assert_eq!(a.label(), "{Alex:[A,A],Bob:[B]}");
        let c = Dataset::new([("Alex", vec!["B", "A"])]);
        assert_eq!(c.label(), "{Alex:[A,B]}");
    }

    #[test]
    fn deidentify_orders_by_size_then_content() {
        let x0 = Dataset::new([("Alex", vec!["A", "A"]), ("Bob", vec!["B"])]);
        let x1 = Dataset::new([("Alex", vec!["B"]), ("Bob", vec!["A", "A"])]);
        assert_eq!(x0.deidentify(), x1.deidentify());
        assert_eq!(x0.deidentify().label(), "{0:[A,A],1:[B]}");
    }

    #[test]
    fn lift_entries() {
        let d0 = Dataset::new([("0", vec!["A", "A"]), ("1", vec!["B"])]);
        let d1 = Dataset::new([("0", vec!["A", "B"]), ("1", vec!["A"])]);
        let m = mechanism_lift(&flip(), &[d0.clone(), d1.clone()]).unwrap();
        let s = d0.label();
        assert_eq!(m.get(&d0.label(), &s), Some(&rat(27, 64)));
        assert_eq!(m.get(&d1.label(), &s), Some(&rat(3, 64)));
        // [A,B] -> [A,B] merges AB and BA: 3/4*3/4 + 1/4*1/4, times A->A.
        assert_eq!(m.get(&d1.label(), &d1.label()), Some(&(rat(10, 16) * rat(3, 4))));
    }

    #[test]
    fn identity_lifts_to_identity() {
        let ab = labels(&["A", "B"]);
        let id = Channel::identity(&ab).unwrap();
        let ds = vec![
            Dataset::new([("0", vec!["A", "A"]), ("1", vec!["B"])]),
            Dataset::new([("0", vec!["A", "B"]), ("1", vec!["A"])]),
        ];
        let m = mechanism_lift(&id, &ds).unwrap();
        assert_eq!(m, Channel::identity(&ds.iter().map(Dataset::label).collect::<Vec<_>>()).unwrap());
    }

    #[test]
    fn frequency_hint() {
        let space = vec![
            Dataset::new([("Alex", vec!["A", "B"]), ("Bob", vec!["A"])]),
            Dataset::new([("Alex", vec!["B"]), ("Bob", vec!["A", "A"])]),
        ];
        let h = hint_frequency("Alex", &space).unwrap();
        assert_eq!(h.row(0), &[rat(1, 2), rat(1, 2)]);
        assert_eq!(h.row(1), &[rat(0, 1), rat(1, 1)]);
        assert!(matches!(hint_frequency("Carol", &space), Err(QifError::UnknownPerson(_))));
        let hist = histogram_hint(&space).unwrap();
        assert_eq!(hist.cols(), &labels(&["{A:2,B:1}"]));
        assert!(hist.row(1)[0].is_one());
    }

    #[test]
    fn unknown_location_is_rejected() {
        let d = Dataset::new([("0", vec!["C"])]);
        assert!(matches!(lift_dataset(&flip(), &d), Err(QifError::UnknownLabel(_))));
    }
}
