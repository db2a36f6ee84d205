//! Single-qudit quantum neural network for multiclass classification.
//!
//! A d-class problem maps onto one d-dimensional qudit: a Cayley-transform
//! parameterization turns d−1 angles into an orthogonal operator whose
//! measurement outcomes are the classes. Each angle is a polynomial
//! function of the input (a truncated multivariable expansion squashed
//! through a sigmoid) whose weights come from soft-margin SVM fits, trained
//! sequentially with a hinge-loss-optimal class-to-outcome assignment.
//! The crate also carries the data pipeline used to evaluate the model on
//! MNIST/EMNIST-style IDX datasets (PCA, stratified k-fold CV) and a qubit
//! statevector simulator that validates the compiled circuit against the
//! qudit closed form.
//!
//! # Layout
//!
//! - [`qudit`] — exact qudit state evaluation and its verification oracles
//! - [`features`] — monomial feature maps for the activation ansätze
//! - [`svm`] — dual coordinate descent soft-margin solver
//! - [`trainer`] — sequential class assignment, the trained model, prediction
//! - [`data`] — IDX parsing, PCA, fold plans, metrics
//! - [`qubit`] — qubit-circuit compilation and statevector simulation
//! - [`pipeline`] — dataset loading, cross-validation sweeps, reports
//! - [`verify`] — the mathematical self-check battery

pub mod data;
pub mod error;
pub mod features;
pub mod linalg;
pub mod pipeline;
pub mod qubit;
pub mod qudit;
pub mod svm;
pub mod trainer;
pub mod verify;

pub use error::{Error, Result};
pub use linalg::Matrix;
pub use trainer::QuditClassifierModel;
