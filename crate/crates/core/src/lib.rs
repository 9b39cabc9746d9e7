//! Online adaptive dictionary-learning reconstruction of dynamic image
//! sequences from undersampled linear measurements.
//!
//! The toolkit streams minibatches (temporal windows) of frames and, for each
//! window, alternates a dictionary-learning step over spatiotemporal patches
//! with an image-update step against the measurements, carrying constant-size
//! recursive accumulators and a forgetting factor `ρ` across windows so that
//! memory use is independent of the stream length.

pub mod dict;
pub mod dictlearn;
pub mod error;
pub mod image_update;
pub mod linalg;
pub mod metrics;
pub mod pipeline;
pub mod scalar;
pub mod sensing;
pub mod sparse;
pub mod svd;
pub mod tensor;

pub use dict::{Dictionary, DictConstraint};
pub use error::{CoreError, Result};
pub use linalg::CMatrix;
pub use pipeline::{
    batch_reconstruct, reconstruct_stream, OnairConfig, ReconOptions, ReconOutput, ReconState,
    Variant,
};
pub use scalar::{Cx, Real};
pub use sensing::{MaskPattern, MaskSpec, SensingKind, SensingOperator};
pub use sparse::SparseCodeMatrix;
pub use svd::{svd, truncated_svd, unitary_polar_factor, Svd};
pub use tensor::{ComplexTensor, PatchConfig};

/// Double-precision matrix.
pub type Matrix64 = CMatrix<f64>;
/// Single-precision matrix.
pub type Matrix32 = CMatrix<f32>;
/// Double-precision frame stack.
pub type Tensor64 = ComplexTensor<f64>;
/// Single-precision frame stack.
pub type Tensor32 = ComplexTensor<f32>;
/// Double-precision dictionary.
pub type Dictionary64 = Dictionary<f64>;
/// Single-precision dictionary.
pub type Dictionary32 = Dictionary<f32>;
/// Double-precision sparse codes.
pub type SparseCodes64 = SparseCodeMatrix<f64>;
/// Single-precision sparse codes.
pub type SparseCodes32 = SparseCodeMatrix<f32>;
/// Double-precision sensing operator.
pub type SensingOperator64 = SensingOperator<f64>;
/// Single-precision sensing operator.
pub type SensingOperator32 = SensingOperator<f32>;
/// Double-precision reconstruction configuration.
pub type OnairConfig64 = OnairConfig<f64>;
/// Single-precision reconstruction configuration.
pub type OnairConfig32 = OnairConfig<f32>;
