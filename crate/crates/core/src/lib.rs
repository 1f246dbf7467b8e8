//! Dynamic attention fusion for multimodal sentiment regression.
//!
//! The crate is organized around five pieces:
//!
//! * [`tensor`] — dense f64 tensors with a tape for reverse-mode
//!   autodiff and a finite-difference gradient checker.
//! * [`model`] — the fusion architecture: text projection, sequence
//!   encoders, text-guided attention over audio/video, interchangeable
//!   fusion strategies (selected by name at runtime), and a bounded
//!   regression head.
//! * [`train`] — MSE loss, global-norm clipping, Adam, early stopping,
//!   and the epoch loop.
//! * [`data`] — portable dataset formats (JSONL and packed binary),
//!   preprocessing, batching, and a synthetic generator with a known
//!   informative-modality oracle.
//! * [`metrics`] — MAE, Pearson correlation, 7-class accuracy, binary
//!   accuracy/F1 with neutral exclusion, and tie-aware ROC/AUC.

pub mod data;
pub mod error;
pub mod metrics;
pub mod model;
pub mod tensor;
pub mod train;

pub use error::{DafError, Result};
pub use tensor::{Tape, Tensor, Var};
