//! Linearization of indifferent power-series dynamics over Laurent-series
//! fields of prime characteristic.
//!
//! The crate computes the Schröder conjugacy `g` with `g∘f = λg` for maps
//! `f(x) = λx + Σ a_i x^i` over `F_q((T))`, certifies convergence or
//! divergence from exact valuations, locates linearization discs with their
//! Weierstrass degrees, and finds indifferent periodic points on the
//! boundary sphere by Hensel lifting.
//!
//! Valuations are exact rationals; an absolute value `|x| = ε^{v(x)}` is
//! never materialized.

pub mod cli;
pub mod coeffield;
pub mod discs;
pub mod error;
pub mod laurent;
mod literal;
pub mod lucas;
pub mod multiplier;
pub mod powerseries;
pub mod schroder;

pub use coeffield::{FieldParams, FqElement, Field};
pub use error::{Error, Result};
pub use laurent::{fmt_q, LaurentSeries, PrecisionPolicy, Valuation, EXACT, Q};
pub use powerseries::{Gauge, PolyTable, PowerSeriesMap};
