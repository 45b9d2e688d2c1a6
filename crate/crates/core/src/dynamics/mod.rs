//! Geodesic flow, conormal returns, density Jacobians, Maslov indices, loop
//! invariants q(t), the oscillating term Q(lambda), and dynamical diagnostics.

mod ergodic;
mod flow;
mod integrator;
mod jacobian;
mod loop_table;
mod maslov;
mod returns;

pub use ergodic::{
    ergodic_average, first_return_map, phase_distance, recurrence_fraction, ErgodicAverages,
    FirstReturnMap, NodeReturn,
};
pub use flow::{flow, symplectic_defect, tangent_flow, FlowBackend, Orbit, TangentFlowMatrix};
pub use integrator::{
    default_step, MidpointIntegrator, PhaseState, SPHERE_DEFAULT_STEP, TORUS_DEFAULT_STEP,
};
pub use jacobian::{
    conormal_coefficients, conormal_tangent_basis, conormal_transport, ConormalTransport,
    TRANSVERSAL_TOL,
};
pub use loop_table::{
    averaging_diagnostic, build_loop_table, eval_q, loop_table_from_json, loop_table_to_json,
    LoopCluster, LoopTable, LoopTableBuild, LoopTableParams,
};
pub use maslov::{maslov_index, MaslovData};
pub use returns::{
    detect_returns, first_return, jacobian_j, scan_step, FirstReturn, ReturnEvent, ReturnScan,
};
