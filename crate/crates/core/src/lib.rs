//! Exact-arithmetic kernel for deformation quantization of endomorphism
//! bundles: the matrix Weyl algebra with its Moyal product, Weyl-algebra
//! valued differential forms, the Fedosov recursion, cyclic chain operators,
//! characteristic classes on concrete curvature data and a numeric
//! single-chart realization of the canonical trace.

pub mod charclass;
pub mod cyclic;
pub mod error;
pub mod fedosov;
pub mod forms;
pub mod inner;
pub mod jets;
pub mod matrix;
pub mod multi;
pub mod scalar;
pub mod trace_grid;
pub mod weyl;

pub use error::{CharClassError, ChartError, CyclicError, GridError, WeylError};
pub use inner::{conjugator_from_automorphism, GeneratorImages};
pub use forms::{FormAlgebra, FormKey, FormShape, WeylForm};
pub use jets::{JetMatrix, JetPolynomial};
pub use matrix::Matrix;
pub use scalar::{GaussianRational, Gq};
pub use weyl::{Shape, WeylElement, WeylKey};
