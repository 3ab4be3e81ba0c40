//! Grid description, swing-equation model and contingency scenarios.

mod model;
mod registry;
mod scenario;
mod spec;

pub use model::{apply_line_outage, build_nominal_model, kron_reduce, relative_angle_model};
pub use registry::{enumerate_scenarios, EnumerationPlan, GainBands, ScenarioRegistry};
pub use scenario::{apply_control_fault, apply_measurement_fault, ContingencyClass, ScenarioModel};
pub use spec::{Generator, GridSpec, Line, SensedState, Sensor};
