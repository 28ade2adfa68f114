//! Multiplicative integrals of matrix-valued forms.
//!
//! Path holonomies of connections, surface holonomies of 2-flags over
//! lattice-approximated homotopies, curvature from shrinking loops, and the
//! flatness, Bianchi, Stokes, gauge and monodromy checks built on them.
//!
//! ```
//! use flagint::forms::preset_alpha_connection;
//! use flagint::holonomy::path_holonomy;
//! use flagint::lattice::PathSpec;
//! use num_complex::Complex64;
//!
//! let a = preset_alpha_connection(Complex64::new(0.5, 0.0));
//! let circle = PathSpec::parse(&["cos(2*pi*t)", "sin(2*pi*t)"]).unwrap();
//! let h = path_holonomy(&a, &circle, 1024).unwrap();
//! assert!((h.entry(0, 0) + 1.0).norm() < 1e-5);
//! ```

pub mod algebra;
pub mod cohomology;
pub mod error;
pub mod formlang;
pub mod forms;
pub mod holonomy;
pub mod lattice;

pub use error::{Error, Result};
