//! Exact computation of derivation spaces of finite group algebras.

pub mod algebra;
pub mod derivation;
pub mod family;
pub mod group;
pub mod linalg;
pub mod report;
pub mod scalar;

pub use algebra::{AlgebraElement, AlgebraError, GroupAlgebra};
pub use derivation::{DerivationError, DerivationMatrix, FailureReport, GeneratorAssignment};
pub use group::{Family, FiniteGroup, GroupError, GroupWord};
pub use linalg::SubspaceBasis;
pub use scalar::{Field, FieldSpec, PrimeField, Rationals, Scalar, ScalarError};

/// Exact rationals.
pub type Rational = num_rational::BigRational;
/// `QG`.
pub type QAlgebra = GroupAlgebra<Rationals>;
/// `GF(p)G`.
pub type FpAlgebra = GroupAlgebra<PrimeField>;
/// Group algebra over a field chosen at runtime.
pub type DynAlgebra = GroupAlgebra<FieldSpec>;
