//! Polynomial bases, quadrature, projectors and Koszul spaces.

mod koszul;
mod poly;
mod quadrature;
pub(crate) mod space;

pub use koszul::{koszul_block, KoszulBlock, KoszulSpaces};
pub use poly::{dim_p1, dim_p2, monomial_exponents, Basis1d, Basis2d, Tabulation};
pub use quadrature::{Quadrature, MAX_DEGREE};
pub use space::{element_basis, element_quadrature, simplex_basis, Integrand, PolySpace};

/// Element degree `k*` of the HHO space for face degree `k`.
pub fn k_star(k: usize) -> usize {
    if k <= 1 {
        k
    } else {
        k + 1
    }
}

/// Default exactness for bilinear forms and projections.
pub fn bilinear_degree(k: usize) -> usize {
    2 * k_star(k).max(k + 1) + 3
}

/// Exactness for integrals of non-polynomial data (interpolates and loads).
pub fn data_degree(k: usize) -> usize {
    bilinear_degree(k) + 10
}

/// Default exactness for the convective trilinear form.
pub fn trilinear_degree(k: usize) -> usize {
    3 * (k + 1) + 2
}
