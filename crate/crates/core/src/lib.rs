//! Spontaneous emission of a two-level atom coupled to a quantized field.
//!
//! The excited-state amplitude obeys the Volterra integro-differential
//! equation `c'(t) = -alpha int_0^t e^{i omega (t-s)} S(t,s) c(s) ds`,
//! `c(0) = 1`, where the kernel `S` is the smeared two-point function of the
//! initial field state. The crate builds kernels for the vacuum and for
//! squeezed states, solves the equation in the time domain and analyses
//! stationary kernels in the Laplace domain.

pub mod atom;
pub mod cli;
pub mod kernels;
pub mod laplace;
pub mod quad;
pub mod units;
pub mod volterra;
