//! Finite 1-dimensional simplicial complexes and the piecewise-linear
//! machinery on top of them: points, PL maps, PL subsets (open sets and
//! covers), exact rational PL functions and piecewise-polynomial complex
//! fields.
//!
//! All parameters are exact rationals. Segments carry the unit
//! parametrization `[0, 1]` from their first to their second endpoint.

mod complex;
mod field;
mod map;
mod plfn;
mod set;

pub use complex::{Complex1, Dir, Point};
pub use field::{Poly, ScalarField};
pub use map::{same_complex, Germ, LocalHomeoReport, Piece, PlMap, SegmentImage};
pub use plfn::{partition_of_unity, quarter_refine, threshold_set, PlFunction, Threshold};
pub use set::{refinement_points, uncovered_point, Cover, OpenSet, PlSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Exact rational parameter.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q0() -> Q {
    Q::zero()
}

pub fn q1() -> Q {
    Q::one()
}

pub fn qf(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

pub fn half(a: &Q, b: &Q) -> Q {
    (a + b) / qi(2)
}

/// `a + (b - a) * w`.
pub fn lerp(a: &Q, b: &Q, w: &Q) -> Q {
    a + (b - a) * w
}

/// Parses `"p/q"`, `"p"` or a terminating decimal such as `"0.25"`.
pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let neg = int.starts_with('-');
        let int_abs = int.trim_start_matches('-');
        let digits = format!("{}{}", if int_abs.is_empty() { "0" } else { int_abs }, frac);
        let n: BigInt = digits.parse().ok()?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let v = Q::new(n, d);
        return Some(if neg { -v } else { v });
    }
    s.parse::<BigInt>().ok().map(Q::from_integer)
}

pub fn format_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Sorted, deduplicated copy.
pub(crate) fn sorted_unique(mut v: Vec<Q>) -> Vec<Q> {
    v.sort();
    v.dedup();
    v
}
