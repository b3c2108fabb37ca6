//! Exact and high-precision arithmetic for sparse polynomials and block series.

pub mod block;
pub mod io;
pub mod poly;
pub mod recenter;
pub mod scalar;

pub use block::{BlockSeries, Center};
pub use io::{CoefficientRecord, PolynomialDoc, ScalarRecord, SeriesDoc};
pub use poly::SparsePolynomial;
pub use recenter::{
    a1_a2_split, binomial, partial_sum_at, partial_sum_at_many, recenter_coefficients,
    recentered_series,
};
pub use scalar::{
    float_string, format_hex_float, parse_float, parse_hex_float, parse_rational, BigComplex, Field, GaussRational, Mode,
    Scalar, DEFAULT_PRECISION,
};
