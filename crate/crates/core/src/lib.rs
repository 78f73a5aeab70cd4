//! Translucent rationality in social dilemmas.
//!
//! Players who believe a planned deviation may be noticed by opponents before
//! play can find cooperation a best response in games where defection is the
//! unique Nash equilibrium. This crate provides the four canonical dilemmas,
//! the detection-probability belief model with a brute-force expected-utility
//! engine, closed-form cooperation conditions, finite counterfactual
//! structures, coherence and translucent-equilibrium checks, and the
//! Fehr–Schmidt, Charness–Rabin and logit-QRE comparison models.

pub mod error;
pub mod alt_models;
pub mod beliefs;
pub mod closed_form;
pub mod counterfactual;
pub mod equilibrium;
pub mod games;
pub mod numeric;

pub use error::{Error, Result};
