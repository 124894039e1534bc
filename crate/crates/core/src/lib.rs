//! Exact quantitative information flow.
//!
//! Distributions and channels carry rational probabilities, so posteriors,
//! optimal-action ties and refinement witnesses are computed without
//! rounding. Shannon quantities are the one exception and are floating
//! point, compared with [`SHANNON_TOLERANCE`].
//!
//! ```
//! use qif_core::{labels, rat, AdversaryModel, Channel, Dist, XVal};
//! use qif_core::strategy::st_dynamic_leakage;
//!
//! let s = labels(&["x0", "x1", "x2"]);
//! let prior = Dist::new(s.clone(), vec![rat(9, 10), rat(1, 20), rat(1, 20)]).unwrap();
//! let test = Channel::new(
//!     s.clone(),
//!     labels(&["P", "N"]),
//!     vec![
//!         vec![rat(99, 100), rat(1, 100)],
//!         vec![rat(1, 100), rat(99, 100)],
//!         vec![rat(1, 100), rat(99, 100)],
//!     ],
//! )
//! .unwrap();
//! let bayes = AdversaryModel::identity_gain(&s).unwrap();
//! let report = st_dynamic_leakage(&bayes, &prior, &test, "N").unwrap();
//! assert_eq!(report.leakage, XVal::Exact(rat(3, 8)));
//! ```

pub mod adversary;
pub mod channel;
pub mod dist;
pub mod error;
pub mod io;
pub mod measures;
pub mod rat;
pub mod refine;
pub mod scenario;
pub mod sim;
mod simplex;
pub mod strategy;
pub mod xval;

pub use adversary::{AdversaryModel, GainMatrix, LossMatrix, MeasureKind};
pub use channel::{tuple_label, Channel, Hyper, BOTTOM};
pub use dist::{labels, Dist, Label};
pub use error::{QifError, Result};
pub use measures::Aggregate;
pub use rat::{rat, Rat};
pub use refine::refinement_witness;
pub use xval::{XVal, SHANNON_TOLERANCE};
