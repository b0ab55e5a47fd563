//! Elementary inequalities and reduction certificates for the bound
//! `<d - d', d'> <= 0`.

pub mod certificate;
pub mod lemmas;

pub use certificate::{
    base_bound, base_class, base_family, in_frak_o, in_frak_oprime, reduce_pair, reduce_pair_with, BaseBound,
    BaseClassTag, BaseFamily, Certificate, Conclusion, Policy, ReductionStep, StepKind,
};
pub use lemmas::{lemma_bound_5_5, verify_lemma_grid, LemmaId, VerificationReport};
