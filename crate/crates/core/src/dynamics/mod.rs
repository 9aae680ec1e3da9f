//! Qualitative analysis of the mean trajectory: transient phases and the
//! return map on the positive x-axis.

mod phases;
mod poincare;

pub use phases::{classify, classify_with, feature_times, linspace, phase_diagram, Phase, PhaseDiagram, Thresholds};
pub use poincare::{
    first_recurrence, poincare_map, recurrence_horizon, PoincareSeries, Recurrence, Winding, PARTITION_GUARD,
};
