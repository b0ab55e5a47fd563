//! Representations over a prime field and homological dimensions.

pub mod field;
pub mod linalg;
pub mod rep;

pub use field::{Fp, DEFAULT_PRIME};
pub use linalg::Mat;
pub use rep::{
    build_extension, euler_check, euler_test, ext1_dim, ext1_probe, ext2_dim, hom_dim, nonsplit_z,
    semicontinuity_probe, z_basis, z_dim, EulerCheck, EulerReport, Ext1Probe, Rep, SemicontinuityProbe,
    Setting, ZElement,
};
