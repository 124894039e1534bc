#![allow(dead_code)]

use proptest::prelude::*;
use qif_core::{AdversaryModel, Channel, Dist, GainMatrix, Label, LossMatrix, Rat, XVal};

pub fn names(prefix: &str, n: usize) -> Vec<Label> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn normalise(labels: Vec<Label>, mut weights: Vec<u32>, fallback: usize) -> Dist {
    if weights.iter().all(|&w| w == 0) {
        let i = fallback % weights.len();
        weights[i] = 1;
    }
    Dist::normalized(labels, weights.into_iter().map(|w| Rat::from_integer(w as i64)).collect()).unwrap()
}

pub fn dist(labels: Vec<Label>) -> impl Strategy<Value = Dist> {
    let n = labels.len();
    prop::collection::vec(0u32..6, n).prop_map(move |w| normalise(labels.clone(), w, 0))
}

/// Full support, so every output of any channel is feasible under it.
pub fn full_dist(labels: Vec<Label>) -> impl Strategy<Value = Dist> {
    let n = labels.len();
    prop::collection::vec(1u32..6, n).prop_map(move |w| normalise(labels.clone(), w, 0))
}

pub fn channel(rows: Vec<Label>, cols: Vec<Label>) -> impl Strategy<Value = Channel> {
    let (nr, nc) = (rows.len(), cols.len());
    prop::collection::vec(prop::collection::vec(0u32..5, nc), nr).prop_map(move |m| {
        let entries = m
            .into_iter()
            .enumerate()
            .map(|(i, w)| normalise(cols.clone(), w, i).masses().to_vec())
            .collect();
        Channel::new(rows.clone(), cols.clone(), entries).unwrap()
    })
}

fn small_rat(lo: i64, hi: i64) -> impl Strategy<Value = Rat> {
    (lo..=hi, 1i64..=3).prop_map(|(n, d)| Rat::new(n, d))
}

pub fn gain(secrets: Vec<Label>, n_actions: usize) -> impl Strategy<Value = GainMatrix> {
    let n = secrets.len();
    prop::collection::vec(prop::collection::vec(small_rat(-3, 4), n), n_actions)
        .prop_map(move |v| GainMatrix::new(names("w", n_actions), secrets.clone(), v).unwrap())
}

pub fn loss(secrets: Vec<Label>, n_actions: usize) -> impl Strategy<Value = LossMatrix> {
    let n = secrets.len();
    let entry = prop_oneof![7 => small_rat(0, 4).prop_map(XVal::Exact), 1 => Just(XVal::PosInf)];
    prop::collection::vec(prop::collection::vec(entry, n), n_actions)
        .prop_map(move |v| LossMatrix::new(names("w", n_actions), secrets.clone(), v).unwrap())
}

/// A gain, loss or Shannon model over `secrets`.
pub fn model(secrets: Vec<Label>) -> impl Strategy<Value = AdversaryModel> {
    let s2 = secrets.clone();
    prop_oneof![
        (1usize..=4).prop_flat_map(move |w| gain(secrets.clone(), w)).prop_map(AdversaryModel::Gain),
        (1usize..=4).prop_flat_map(move |w| loss(s2.clone(), w)).prop_map(AdversaryModel::Loss),
        Just(AdversaryModel::Shannon),
    ]
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub prior: Dist,
    pub c: Channel,
    pub r: Channel,
    pub model: AdversaryModel,
}

impl Instance {
    pub fn d(&self) -> Channel {
        self.c.cascade(&self.r).unwrap()
    }
}

/// Random `(π, C, R, model)` with every dimension at most 4.
pub fn instance() -> impl Strategy<Value = Instance> {
    (1usize..=4, 1usize..=4, 1usize..=4).prop_flat_map(|(nx, ny, nz)| {
        let (xs, ys, zs) = (names("x", nx), names("y", ny), names("z", nz));
        (dist(xs.clone()), channel(xs.clone(), ys.clone()), channel(ys, zs), model(xs))
            .prop_map(|(prior, c, r, model)| Instance { prior, c, r, model })
    })
}
