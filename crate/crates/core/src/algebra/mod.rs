//! Finitely presented algebras over the rationals: words in the entries
//! `u_{ij}` of a matrix and a projection `P`, formal sums, relation schemas
//! and bounded-degree ideal membership.

pub mod ideal;
pub mod repr;
pub mod schema;
pub mod sum;
pub mod verify;
pub mod word;

pub use ideal::{ideal_membership, CertificateTerm, Membership, MembershipCertificate, TruncatedIdeal};
pub use repr::{eval_representation, standard_representations, Assignment};
pub use schema::{delta, delta_image, tensor_embed, RelationSchema, SchemaName, Side};
pub use sum::FormalSum;
pub use verify::{
    decide, schema_for_family, vanishing_target, verify_coproduct, verify_membership, verify_quotient,
    verify_vanishing, verify_vanishing_one, IdealCache, Outcome, Status, TargetOutcome, VerificationReport,
};
pub use word::{u_product, Generator, TensorWord, Word};
