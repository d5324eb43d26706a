//! Simulation of one-shot "convince me you know my qubit" test messages,
//! and the attacks that turn any convincing message into information about
//! the qubit.
//!
//! Bob holds a qubit `φ`. Alice sends a test message: an ancilla state and a
//! measurement on ancilla ⊗ qubit, with a set of outcomes she predicts. A
//! message is convincing when the prediction is certain for `φ` and for no
//! other state. [`attacks`] shows how such a message leaks `φ`, and
//! [`estimation`] measures the leak as estimation fidelity.

pub mod attacks;
pub mod estimation;
pub mod protocol;
pub mod qmath;
pub mod quantum;
pub mod scenarios;
