//! Dense complex tensor algebra over the Einstein product.
//!
//! Tensors carry an explicit split into row modes and column modes. Every
//! computation goes through the reshape isomorphism onto ordinary matrices,
//! where small self-contained kernels (Jacobi SVD, Jacobi Hermitian
//! eigensolver, Hessenberg QR) do the numerical work.

pub mod cli;
pub mod error;
pub mod hull;
pub mod io;
pub mod matrix;
pub mod numrange;
pub mod random;
pub mod spectral;
pub mod tensor;
pub mod winverse;
pub mod wnorms;

pub use error::{Error, Result};
pub use matrix::{KernelError, Matrix};
pub use tensor::{DenseTensor, ModeSplit};
