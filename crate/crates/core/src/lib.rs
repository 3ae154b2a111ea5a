//! Adaptive delayed-feedback sliding-mode control of commensurate
//! fractional-order chaotic systems, with a linear delayed-feedback
//! baseline.
//!
//! Layering, bottom up: [`frac_calc`] (kernels and stability tests),
//! [`fde_solver`] (fractional PECE), [`delay_history`] (delayed lookups),
//! [`systems`] (plant models), [`controller`] (control and adaptation laws)
//! and [`experiments`] (closed loops, metrics and output).

pub mod controller;
pub mod delay_history;
pub mod experiments;
pub mod fde_solver;
pub mod frac_calc;
pub mod systems;
