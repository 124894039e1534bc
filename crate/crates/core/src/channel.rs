//! Channels as row-stochastic labelled matrices, and the Bayesian machinery
//! built on them: joint, outer and posterior distributions, hypers, cascade
//! and parallel composition.

use serde::{Deserialize, Serialize};

use crate::dist::{check_unique, Dist, Label};
use crate::error::{QifError, Result};
use crate::rat::Rat;

/// Output label of the null channel.
pub const BOTTOM: &str = "⊥";

/// Label for a joint observation of several channels.
pub fn tuple_label<S: AsRef<str>>(parts: &[S]) -> Label {
    let inner: Vec<&str> = parts.iter().map(|p| p.as_ref()).collect();
    format!("({})", inner.join(","))
}

/// A channel from secrets (rows) to observables (columns).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "ChannelRepr", into = "ChannelRepr")]
pub struct Channel {
    rows: Vec<Label>,
    cols: Vec<Label>,
    entries: Vec<Vec<Rat>>,
}

#[derive(Serialize, Deserialize)]
struct ChannelRepr {
    rows: Vec<Label>,
    cols: Vec<Label>,
    entries: Vec<Vec<Rat>>,
}

impl TryFrom<ChannelRepr> for Channel {
    type Error = QifError;
    fn try_from(r: ChannelRepr) -> Result<Self> {
        Channel::new(r.rows, r.cols, r.entries)
    }
}

impl From<Channel> for ChannelRepr {
    fn from(c: Channel) -> Self {
        ChannelRepr { rows: c.rows, cols: c.cols, entries: c.entries }
    }
}

impl Channel {
    pub fn new(rows: Vec<Label>, cols: Vec<Label>, entries: Vec<Vec<Rat>>) -> Result<Self> {
        if rows.is_empty() || cols.is_empty() {
            return Err(QifError::ShapeMismatch("channel needs at least one row and one column".into()));
        }
        check_unique(&rows)?;
        check_unique(&cols)?;
        if entries.len() != rows.len() {
            return Err(QifError::ShapeMismatch(format!(
                "{} row labels but {} matrix rows",
                rows.len(),
                entries.len()
            )));
        }
        for (x, row) in entries.iter().enumerate() {
            if row.len() != cols.len() {
                return Err(QifError::ShapeMismatch(format!(
                    "row {:?} has {} entries, expected {}",
                    rows[x],
                    row.len(),
                    cols.len()
                )));
            }
            if let Some(y) = row.iter().position(Rat::is_negative) {
                return Err(QifError::NegativeEntry {
                    row: rows[x].clone(),
                    col: cols[y].clone(),
                    value: row[y].clone(),
                });
            }
            let sum: Rat = row.iter().sum();
            if !sum.is_one() {
                return Err(QifError::NotStochastic { row: rows[x].clone(), sum });
            }
        }
        Ok(Channel { rows, cols, entries })
    }

    pub fn identity(labels: &[Label]) -> Result<Self> {
        let n = labels.len();
        let entries = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        Channel::new(labels.to_vec(), labels.to_vec(), entries)
    }

    /// The channel that leaks nothing: every row maps to [`BOTTOM`].
    pub fn null(rows: &[Label]) -> Result<Self> {
        Channel::new(rows.to_vec(), vec![BOTTOM.to_string()], vec![vec![Rat::one()]; rows.len()])
    }

    /// Deterministic channel sending each row to the column chosen by `f`.
    /// Columns appear in first-seen order.
    pub fn deterministic<F>(rows: &[Label], f: F) -> Result<Self>
    where
        F: Fn(&Label) -> Label,
    {
        let images: Vec<Label> = rows.iter().map(&f).collect();
        let mut cols: Vec<Label> = Vec::new();
        for img in &images {
            if !cols.contains(img) {
                cols.push(img.clone());
            }
        }
        let entries = images
            .iter()
            .map(|img| cols.iter().map(|c| if c == img { Rat::one() } else { Rat::zero() }).collect())
            .collect();
        Channel::new(rows.to_vec(), cols, entries)
    }

    pub fn rows(&self) -> &[Label] {
        &self.rows
    }

    pub fn cols(&self) -> &[Label] {
        &self.cols
    }

    pub fn entries(&self) -> &[Vec<Rat>] {
        &self.entries
    }

    pub fn row(&self, x: usize) -> &[Rat] {
        &self.entries[x]
    }

    pub fn at(&self, x: usize, y: usize) -> &Rat {
        &self.entries[x][y]
    }

    pub fn row_index(&self, label: &str) -> Option<usize> {
        self.rows.iter().position(|l| l == label)
    }

    pub fn col_index(&self, label: &str) -> Option<usize> {
        self.cols.iter().position(|l| l == label)
    }

    pub fn get(&self, row: &str, col: &str) -> Option<&Rat> {
        Some(&self.entries[self.row_index(row)?][self.col_index(col)?])
    }

    pub fn column(&self, y: usize) -> Vec<Rat> {
        self.entries.iter().map(|r| r[y].clone()).collect()
    }

    /// Row `x` as a distribution over the columns.
    pub fn row_dist(&self, x: usize) -> Dist {
        Dist::new(self.cols.clone(), self.entries[x].clone()).expect("rows are stochastic")
    }

    /// Sequential composition `self ; next` (matrix product).
    pub fn cascade(&self, next: &Channel) -> Result<Channel> {
        if self.cols != next.rows {
            return Err(QifError::ShapeMismatch(format!(
                "cascade: output labels {:?} do not match input labels {:?}",
                self.cols, next.rows
            )));
        }
        let entries = self
            .entries
            .iter()
            .map(|row| {
                (0..next.cols.len())
                    .map(|z| {
                        row.iter()
                            .zip(next.entries.iter())
                            .filter(|(c, _)| !c.is_zero())
                            .map(|(c, d)| c * &d[z])
                            .sum()
                    })
                    .collect()
            })
            .collect();
        Ok(Channel { rows: self.rows.clone(), cols: next.cols.clone(), entries })
    }

    /// Joint observation of `self` and `other` on the same secret.
    pub fn parallel(&self, other: &Channel) -> Result<Channel> {
        Channel::parallel_all(&[self, other])
    }

    /// N-ary parallel composition with flat tuple labels `(y1,...,yn)`.
    /// Columns are enumerated in row-major order of the components.
    pub fn parallel_all(channels: &[&Channel]) -> Result<Channel> {
        let first = channels
            .first()
            .ok_or_else(|| QifError::ShapeMismatch("parallel composition of zero channels".into()))?;
        for c in &channels[1..] {
            if c.rows != first.rows {
                return Err(QifError::ShapeMismatch(format!(
                    "parallel: input labels {:?} do not match {:?}",
                    c.rows, first.rows
                )));
            }
        }
        let mut combos: Vec<Vec<usize>> = vec![vec![]];
        for c in channels {
            combos = combos
                .into_iter()
                .flat_map(|prefix| {
                    (0..c.cols.len()).map(move |j| {
                        let mut v = prefix.clone();
                        v.push(j);
                        v
                    })
                })
                .collect();
        }
        let cols = combos
            .iter()
            .map(|combo| {
                let parts: Vec<&str> =
                    combo.iter().zip(channels).map(|(&j, c)| c.cols[j].as_str()).collect();
                tuple_label(&parts)
            })
            .collect();
        let entries = (0..first.rows.len())
            .map(|x| {
                combos
                    .iter()
                    .map(|combo| combo.iter().zip(channels).map(|(&j, c)| c.entries[x][j].clone()).product())
                    .collect()
            })
            .collect();
        Channel::new(first.rows.clone(), cols, entries)
    }

    /// Merges columns that `f` maps to the same label, summing their entries.
    pub fn relabel_columns<F>(&self, f: F) -> Result<Channel>
    where
        F: Fn(&Label) -> Label,
    {
        let mut cols: Vec<Label> = Vec::new();
        let mut target = Vec::with_capacity(self.cols.len());
        for c in &self.cols {
            let l = f(c);
            let idx = match cols.iter().position(|x| x == &l) {
                Some(i) => i,
                None => {
                    cols.push(l);
                    cols.len() - 1
                }
            };
            target.push(idx);
        }
        let entries = self
            .entries
            .iter()
            .map(|row| {
                let mut out = vec![Rat::zero(); cols.len()];
                for (v, &t) in row.iter().zip(&target) {
                    out[t] += v;
                }
                out
            })
            .collect();
        Channel::new(self.rows.clone(), cols, entries)
    }

    fn check_prior(&self, prior: &Dist) -> Result<()> {
        prior.expect_labels(&self.rows, "prior vs channel rows")
    }

    /// `J[x][y] = prior(x) * C[x][y]`.
    pub fn joint(&self, prior: &Dist) -> Result<Vec<Vec<Rat>>> {
        self.check_prior(prior)?;
        Ok(self
            .entries
            .iter()
            .zip(prior.masses())
            .map(|(row, p)| row.iter().map(|c| c * p).collect())
            .collect())
    }

    /// Marginal distribution on outputs.
    pub fn outer(&self, prior: &Dist) -> Result<Dist> {
        self.check_prior(prior)?;
        Ok(Dist::new(self.cols.clone(), self.outer_weights(prior)).expect("outer of a valid prior is normalised"))
    }

    fn outer_weights(&self, prior: &Dist) -> Vec<Rat> {
        (0..self.cols.len())
            .map(|y| {
                self.entries
                    .iter()
                    .zip(prior.masses())
                    .filter(|(_, p)| p.is_positive())
                    .map(|(row, p)| &row[y] * p)
                    .sum()
            })
            .collect()
    }

    fn posterior_at(&self, prior: &Dist, y: usize, outer_y: &Rat) -> Dist {
        let mass = self
            .entries
            .iter()
            .zip(prior.masses())
            .map(|(row, p)| &(&row[y] * p) / outer_y)
            .collect();
        Dist::new(self.rows.clone(), mass).expect("posterior is normalised")
    }

    /// Bayesian update of `prior` on observing `y`.
    pub fn posterior(&self, prior: &Dist, y: &str) -> Result<Dist> {
        self.check_prior(prior)?;
        let yi = self.col_index(y).ok_or_else(|| QifError::UnknownLabel(y.to_string()))?;
        let outer_y: Rat = self.outer_weights(prior).swap_remove(yi);
        if outer_y.is_zero() {
            return Err(QifError::ZeroProbabilityObservation(y.to_string()));
        }
        Ok(self.posterior_at(prior, yi, &outer_y))
    }

    pub fn hyper(&self, prior: &Dist) -> Result<Hyper> {
        self.check_prior(prior)?;
        let weights = self.outer_weights(prior);
        let inners = weights
            .iter()
            .enumerate()
            .filter(|(_, w)| w.is_positive())
            .map(|(y, w)| (self.cols[y].clone(), self.posterior_at(prior, y, w)))
            .collect();
        let outer = Dist::new(self.cols.clone(), weights).expect("outer is normalised");
        Ok(Hyper { outer, inners })
    }
}

/// Outer distribution over outputs together with the posterior for every
/// feasible output. Output labels are retained.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Hyper {
    outer: Dist,
    inners: Vec<(Label, Dist)>,
}

impl Hyper {
    pub fn outer(&self) -> &Dist {
        &self.outer
    }

    pub fn inner(&self, y: &str) -> Option<&Dist> {
        self.inners.iter().find(|(l, _)| l == y).map(|(_, d)| d)
    }

    /// `(label, outer weight, posterior)` for each feasible output.
    pub fn iter(&self) -> impl Iterator<Item = (&Label, &Rat, &Dist)> {
        self.inners
            .iter()
            .map(move |(l, d)| (l, self.outer.mass(l).expect("inner labels come from the outer"), d))
    }

    pub fn len(&self) -> usize {
        self.inners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inners.is_empty()
    }

    /// Hyper with output labels abstracted away: equal posteriors are
    /// merged and their outer weights summed. Sorted for comparison.
    pub fn erase_labels(&self) -> Vec<(Dist, Rat)> {
        let mut merged: Vec<(Dist, Rat)> = Vec::new();
        for (_, w, d) in self.iter() {
            match merged.iter_mut().find(|(m, _)| m == d) {
                Some((_, acc)) => *acc += w,
                None => merged.push((d.clone(), w.clone())),
            }
        }
        merged.sort_by(|a, b| a.0.masses().cmp(b.0.masses()).then_with(|| a.1.cmp(&b.1)));
        merged
    }

    /// Equality as distributions on posteriors, ignoring output labels.
    pub fn same_up_to_labels(&self, other: &Hyper) -> bool {
        self.erase_labels() == other.erase_labels()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::labels;
    use crate::rat::rat;

    fn yes_no() -> Vec<Label> {
        labels(&["no", "yes"])
    }

    fn p_chan() -> Channel {
        Channel::new(yes_no(), yes_no(), vec![vec![rat(2, 3), rat(1, 3)], vec![rat(1, 3), rat(2, 3)]]).unwrap()
    }

    fn s_chan() -> Channel {
        Channel::new(yes_no(), yes_no(), vec![vec![rat(1, 1), rat(0, 1)], vec![rat(1, 2), rat(1, 2)]]).unwrap()
    }

    #[test]
    fn construction_errors() {
        let e = Channel::new(yes_no(), yes_no(), vec![vec![rat(1, 2), rat(1, 3)], vec![rat(1, 2), rat(1, 2)]]);
        assert!(matches!(e, Err(QifError::NotStochastic { .. })));
        let e = Channel::new(yes_no(), yes_no(), vec![vec![rat(3, 2), rat(-1, 2)], vec![rat(1, 2), rat(1, 2)]]);
        assert!(matches!(e, Err(QifError::NegativeEntry { .. })));
        let e = Channel::new(yes_no(), yes_no(), vec![vec![rat(1, 1)]]);
        assert!(matches!(e, Err(QifError::ShapeMismatch(_))));
    }

    #[test]
    fn cascade_query_pipeline() {
        let ps = p_chan().cascade(&s_chan()).unwrap();
        assert_eq!(ps.entries(), &[vec![rat(5, 6), rat(1, 6)], vec![rat(2, 3), rat(1, 3)]]);
        let id = Channel::identity(&yes_no()).unwrap();
        assert_eq!(p_chan().cascade(&id).unwrap(), p_chan());
        let bad = Channel::null(&yes_no()).unwrap();
        assert!(bad.cascade(&p_chan()).is_err());
    }

    #[test]
    fn cascade_into_null_is_null() {
        let n = Channel::null(p_chan().cols()).unwrap();
        assert_eq!(p_chan().cascade(&n).unwrap(), Channel::null(&yes_no()).unwrap());
    }

    #[test]
    fn joint_outer_posterior() {
        let u = Dist::uniform(&yes_no()).unwrap();
        let j = p_chan().joint(&u).unwrap();
        assert_eq!(j, vec![vec![rat(1, 3), rat(1, 6)], vec![rat(1, 6), rat(1, 3)]]);
        let ps = p_chan().cascade(&s_chan()).unwrap();
        assert_eq!(ps.outer(&u).unwrap().masses(), &[rat(3, 4), rat(1, 4)]);
        assert_eq!(p_chan().posterior(&u, "yes").unwrap().masses(), &[rat(1, 3), rat(2, 3)]);
        assert_eq!(ps.posterior(&u, "no").unwrap().masses(), &[rat(5, 9), rat(4, 9)]);
    }

    #[test]
    fn posterior_errors() {
        let point = Dist::point("no", &yes_no()).unwrap();
        let s = s_chan();
        assert_eq!(s.posterior(&point, "yes"), Err(QifError::ZeroProbabilityObservation("yes".into())));
        assert_eq!(s.posterior(&point, "maybe"), Err(QifError::UnknownLabel("maybe".into())));
        assert_eq!(s.posterior(&point, "no").unwrap(), point);
    }

    #[test]
    fn null_channel_hyper_is_prior() {
        let pi = Dist::new(yes_no(), vec![rat(1, 5), rat(4, 5)]).unwrap();
        let h = Channel::null(&yes_no()).unwrap().hyper(&pi).unwrap();
        assert_eq!(h.len(), 1);
        assert_eq!(h.inner(BOTTOM), Some(&pi));
        assert_eq!(h.outer().masses(), &[Rat::one()]);
    }

    #[test]
    fn parallel_columns_and_projection() {
        let c = p_chan().parallel(&s_chan()).unwrap();
        assert_eq!(c.cols().len(), 4);
        assert_eq!(c.cols()[1], "(no,yes)");
        assert_eq!(c.get("yes", "(yes,no)"), Some(&rat(1, 3)));
        let trivial = p_chan().parallel(&Channel::null(&yes_no()).unwrap()).unwrap();
        assert_eq!(trivial.entries(), p_chan().entries());
    }

    #[test]
    fn erase_labels_merges_equal_posteriors() {
        let rows = labels(&["a", "b"]);
        let c = Channel::new(
            rows.clone(),
            labels(&["u", "v", "w"]),
            vec![vec![rat(1, 2), rat(1, 4), rat(1, 4)], vec![Rat::zero(), Rat::zero(), Rat::one()]],
        )
        .unwrap();
        let merged = Channel::new(
            rows.clone(),
            labels(&["uv", "w"]),
            vec![vec![rat(3, 4), rat(1, 4)], vec![Rat::zero(), Rat::one()]],
        )
        .unwrap();
        let pi = Dist::uniform(&rows).unwrap();
        let (h1, h2) = (c.hyper(&pi).unwrap(), merged.hyper(&pi).unwrap());
        assert_ne!(h1, h2);
        assert!(h1.same_up_to_labels(&h2));
    }

    #[test]
    fn relabel_merges_columns() {
        let c = p_chan().relabel_columns(|_| "*".to_string()).unwrap();
        assert_eq!(c, Channel::new(yes_no(), labels(&["*"]), vec![vec![Rat::one()]; 2]).unwrap());
    }
}
