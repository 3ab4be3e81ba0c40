//! Feedback and observer design by pole placement, and assembly of the
//! closed-loop augmented model.

mod closed_loop;
mod placement;

pub use closed_loop::{
    build_closed_loop, default_feedback_poles, default_observer_poles, design_gains, ClosedLoopModel, GainSet,
};
pub use placement::{
    ackermann, characteristic_coefficients, controllability_matrix, place_poles_feedback, place_poles_observer,
    PlacementMethod, PlacementOptions,
};
