//! Nodal domain counts, Urschel numbers and sign-certifying perturbations for
//! eigenvectors of generalized graph Laplacians.

pub mod error;
pub mod families;
pub mod graph;
pub mod nodal;
pub mod oracle;
pub mod perturb;
pub mod report;
pub mod specmat;
pub mod urschel;

pub use error::{Error, Result};
pub use graph::Graph;
pub use nodal::{sign_pattern, snd, urschel_profile, wnd, Sign, SignPattern, Signing, UrschelProfile};
pub use oracle::{verify_instance, OracleOptions, VerificationReport};
pub use specmat::{classical_laplacian, eig_sym, EigGroup, GeneralizedLaplacian, Spectrum, SymMatrix};
pub use urschel::{classify_subspace, UrschelClassification};
