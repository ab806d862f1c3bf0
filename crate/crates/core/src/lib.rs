//! Ground-state resonance of the quantum Hénon–Heiles oscillator
//! `H(β) = −Δ + x² + β(x₁²x₂ − x₂³/3)` on `L²(ℝ²)`.
//!
//! Three independent routes to the same number:
//!
//! * [`rspe`] generates the Rayleigh–Schrödinger series of the level at
//!   `E₀ = 2` exactly, on top of the rational polynomial algebra in
//!   [`exact_poly`].
//! * [`scaled_hamiltonian`] and [`resonance`] compute the complex eigenvalue
//!   of the dilated operator in a truncated oscillator basis.
//! * [`resummation`] rebuilds the real part and the width from the divergent
//!   series through an order-½ distributional Borel–Leroy sum.
//!
//! [`verify`] binds the three together into a pass/fail report.

pub mod error;
pub mod exact_poly;
pub mod linalg;
pub mod par;
pub mod resonance;
pub mod resummation;
pub mod rspe;
pub mod scaled_hamiltonian;
pub mod verify;

pub use error::{Error, Result};
