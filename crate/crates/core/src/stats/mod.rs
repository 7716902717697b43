//! Estimators for the law of the hitting time, and numerical checks of the
//! averaging argument behind almost-sure arrival.

mod block_bound;
mod lln;
mod survival;

pub use block_bound::{
    block_lower_bound, choose_block_length, select_block_length, verify_block_bound,
    verify_block_bound_on, BlockBound, BlockBoundParams, BlockBoundReport, BlockDraws,
};
pub use lln::{lln_diagnostic, LlnPoint};
pub use survival::{mean_hitting_time, survival_curve, MeanEstimate, SurvivalCurve};
