//! Safe interval branch and bound for continuous constrained global
//! optimization.
//!
//! The solver keeps rigorous lower bounds (constraint propagation plus a
//! linear relaxation whose LP dual is post-processed in interval arithmetic)
//! and certified upper bounds (boxes proven to hold a feasible point). The
//! upper-bounding strategies differ in where candidate points come from; see
//! [`solver::Strategy`].

pub mod cli;
pub mod contractor;
pub mod corpus;
pub mod expr;
pub mod feasibility;
pub mod interval;
pub mod local_search;
pub mod lp;
pub mod proof;
pub mod relaxation;
pub mod report;
pub mod solver;
