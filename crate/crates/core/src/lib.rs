//! Metallic Riemannian structures on warped product manifolds.
//!
//! The crate has two halves. The first implements closed-form results about
//! metallic structures (`J^2 = pJ + qI`) and warped products
//! `M1 x_f M2`: induced structures, projectors, the warped Levi-Civita
//! connection and the curvature and Ricci formulas in terms of the warping
//! function. The second is a brute-force tensor-calculus oracle
//! ([`geometry`]) that computes Christoffel symbols, Riemann and Ricci
//! tensors directly from metric-component expressions. Every closed form is
//! checked against the oracle on sampled points.
//!
//! The user guide lives in `book/` at the repository root.

// `!(a < b)` rejects NaN as well, which is the point at every use.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod expr;
pub mod gallery;
pub mod geometry;
pub mod sampling;
pub mod structures;
pub mod verify;
pub mod warped;

/// Guide chapters compiled as doctests so their snippets stay current.
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/metallic-algebra.md")]
    mod metallic_algebra {}
    #[doc = include_str!("../../../book/src/expressions-and-charts.md")]
    mod expressions_and_charts {}
    #[doc = include_str!("../../../book/src/curvature-oracle.md")]
    mod curvature_oracle {}
    #[doc = include_str!("../../../book/src/warped-products.md")]
    mod warped_products {}
    #[doc = include_str!("../../../book/src/product-structures.md")]
    mod product_structures {}
    #[doc = include_str!("../../../book/src/slant-cone.md")]
    mod slant_cone {}
    #[doc = include_str!("../../../book/src/verifier.md")]
    mod verifier {}
}
