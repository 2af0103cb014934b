//! First-order perturbation of eigenvectors of generalized Laplacians.

pub mod multi;
pub mod simple;

use nalgebra::DVector;
use serde::Serialize;

use crate::specmat::SymMatrix;

pub use multi::{
    reduce_to_small, split_first_order_check, split_group, splitting_diagonal, verify_multi_bounds,
    MultiBoundRecord, SplitBasis, SplittingDiagonal,
};
pub use simple::{
    certify_simple, perturbation_image_basis, CertifyOptions, ChainStep, ImageBasis,
    PerturbDirection, SigningCertificate, SimpleCertification,
};

/// An elementary symmetric perturbation supported on the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Generator {
    /// `e_v e_vᵀ`.
    Diagonal(usize),
    /// `e_u e_vᵀ + e_v e_uᵀ` for an edge `{u, v}`.
    Edge(usize, usize),
}

impl Generator {
    /// `G f`.
    pub fn apply(&self, f: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(f.len());
        match *self {
            Generator::Diagonal(v) => out[v] = f[v],
            Generator::Edge(u, v) => {
                out[u] = f[v];
                out[v] = f[u];
            }
        }
        out
    }

    /// `m += c G`.
    pub fn add_to(&self, m: &mut SymMatrix, c: f64) {
        match *self {
            Generator::Diagonal(v) => m.set_sym(v, v, m.get(v, v) + c),
            Generator::Edge(u, v) => m.set_sym(u, v, m.get(u, v) + c),
        }
    }
}

/// `f¹ = (M - λI)⁺ (-M₁ f)` given the pseudoinverse.
pub fn first_order_correction(pinv: &SymMatrix, m1: &SymMatrix, f: &DVector<f64>) -> DVector<f64> {
    -(pinv.mul_vec(&m1.mul_vec(f)))
}

/// First-order eigenvalue shift `(f, M₁ f) / (f, f)`.
pub fn rayleigh_slope(m1: &SymMatrix, f: &DVector<f64>) -> f64 {
    f.dot(&m1.mul_vec(f)) / f.dot(f)
}
