//! Cross approximation and fixed-point solvers for tensors in Tucker format.
//!
//! The crate is organised bottom-up:
//!
//! * [`tensor`] and [`tucker`]: dense arrays, Tucker tensors, HOSVD, rounding;
//! * [`index_select`]: QDEIM and oversampled (GappyPOD+E) row selection;
//! * [`oracle`] and [`cross`]: black-box entry access and the iterative
//!   DEIM-guided fiber-sampling cross approximation;
//! * [`spectral`]: sine/cosine-transform Poisson and shifted solvers whose
//!   spectral-space solution is compressed by one cross approximation;
//! * [`aa`] and [`pde`]: Anderson acceleration in Tucker format and the
//!   Bratu and Allen-Cahn fixed-point maps.
//!
//! With the default `parallel` feature, oracle sampling and batched fiber
//! evaluation run on the rayon pool.

pub mod aa;
pub mod cross;
pub mod error;
pub mod index_select;
pub mod linalg;
pub mod oracle;
pub mod par;
pub mod pde;
pub mod spectral;
pub mod tensor;
pub mod tucker;

pub use aa::{aa_least_squares, tucker_aa, AAOutput, AAParams, AARecord, FixedPointMap, MapValue, Schedule, StopTolerance};
pub use cross::{c2d, c2di, C2DConfig, C2DOutput, C2DStats};
pub use error::{Error, Result};
pub use index_select::{gpode, increase, qdeim, spread_fill, IndexSet};
pub use oracle::{CountingOracle, FnOracle, TensorOracle, TuckerOracle};
pub use tensor::{DenseTensor, ModeUnfolding};
pub use tucker::{hosvd, rounded_sum, Truncation, TuckerTensor};
