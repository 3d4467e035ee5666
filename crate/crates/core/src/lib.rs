//! Curvature workbench for almost Hermitian manifolds.

pub mod analysis;
pub mod chart;
pub mod models;
pub mod report;
pub mod selftest;
pub mod tensor_core;
