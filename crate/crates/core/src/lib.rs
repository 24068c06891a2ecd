//! Trigonometric and modified trigonometric integrators for oscillatory
//! Hamiltonian systems `q'' + W^2 q = -grad U(q)` with constant high
//! frequencies, their energy functionals, and the integer-lattice analysis
//! of numerical resonances between step size and frequencies.

// Negated float comparisons are used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energies;
pub mod experiments;
pub mod filters;
pub mod harness;
pub mod integrators;
pub mod model;
pub mod resonance;
pub mod spectrum;
