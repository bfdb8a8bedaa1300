//! Non-dominated sorting, crowding and the bi-objective GMW-SGD variant.

mod nsga;
mod train;

pub use nsga::{
    crowding_distance, dominates, fast_nondominated_sort, moo_leaders, select_survivors, ObjectiveVector, Ranking,
};
pub use train::{gmw_sgd_moo_train, MooOutcome, ParetoPoint, ParetoReport, REPORT_SIZE};
