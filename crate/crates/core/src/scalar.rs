//! Exact coefficient fields: the rationals and prime fields GF(p).
//!
//! Everything above this module is generic over [`Field`], a small context
//! trait that owns the arithmetic. The field value carries whatever runtime
//! data the arithmetic needs (the modulus for GF(p)), so element types can
//! stay plain: `BigRational` for Q and a reduced `u64` residue for GF(p).
//!
//! [`FieldSpec`] is the runtime descriptor chosen on the command line. It is
//! itself a [`Field`] over the dynamic [`Scalar`] enum, and
//! [`with_field!`](crate::with_field) dispatches it onto the concrete fields.

use std::fmt;
use std::hash::Hash;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("characteristic {0} is neither 0 nor a prime")]
    CompositeCharacteristic(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("scalar {value} does not belong to a field of characteristic {characteristic}")]
    FieldMismatch { value: String, characteristic: u64 },
    #[error("cannot parse scalar from {0:?}")]
    Parse(String),
}

/// Arithmetic context for an exact field.
pub trait Field: Clone + fmt::Debug + PartialEq + Eq + Send + Sync {
    type Elem: Clone + fmt::Debug + PartialEq + Eq + Hash + Send + Sync;

    fn characteristic(&self) -> u64;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, value: i64) -> Self::Elem;
    fn is_zero(&self, x: &Self::Elem) -> bool;
    fn add(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn sub(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn mul(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;
    fn neg(&self, x: &Self::Elem) -> Self::Elem;
    fn inv(&self, x: &Self::Elem) -> Result<Self::Elem, ScalarError>;

    fn to_scalar(&self, x: &Self::Elem) -> Scalar;
    fn from_scalar(&self, s: &Scalar) -> Result<Self::Elem, ScalarError>;

    fn spec(&self) -> FieldSpec {
        FieldSpec {
            characteristic: self.characteristic(),
        }
    }

    fn is_one(&self, x: &Self::Elem) -> bool {
        *x == self.one()
    }

    /// `acc += c * x`
    fn add_mul_assign(&self, acc: &mut Self::Elem, c: &Self::Elem, x: &Self::Elem) {
        *acc = self.add(acc, &self.mul(c, x));
    }

    fn add_assign(&self, acc: &mut Self::Elem, x: &Self::Elem) {
        *acc = self.add(acc, x);
    }

    fn sub_assign(&self, acc: &mut Self::Elem, x: &Self::Elem) {
        *acc = self.sub(acc, x);
    }
}

/// The field of rational numbers, backed by arbitrary-precision integers.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn characteristic(&self) -> u64 {
        0
    }
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_int(&self, value: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(value))
    }
    fn is_zero(&self, x: &BigRational) -> bool {
        x.is_zero()
    }
    fn add(&self, x: &BigRational, y: &BigRational) -> BigRational {
        x + y
    }
    fn sub(&self, x: &BigRational, y: &BigRational) -> BigRational {
        x - y
    }
    fn mul(&self, x: &BigRational, y: &BigRational) -> BigRational {
        x * y
    }
    fn neg(&self, x: &BigRational) -> BigRational {
        -x
    }
    fn inv(&self, x: &BigRational) -> Result<BigRational, ScalarError> {
        if x.is_zero() {
            Err(ScalarError::DivisionByZero)
        } else {
            Ok(x.recip())
        }
    }
    fn to_scalar(&self, x: &BigRational) -> Scalar {
        Scalar::Rational(x.clone())
    }
    fn from_scalar(&self, s: &Scalar) -> Result<BigRational, ScalarError> {
        match s {
            Scalar::Rational(q) => Ok(q.clone()),
            Scalar::Residue(r) => Err(ScalarError::FieldMismatch {
                value: r.to_string(),
                characteristic: 0,
            }),
        }
    }
    fn add_assign(&self, acc: &mut BigRational, x: &BigRational) {
        *acc += x;
    }
    fn sub_assign(&self, acc: &mut BigRational, x: &BigRational) {
        *acc -= x;
    }
}

/// GF(p) for a prime `p`; elements are residues in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self, ScalarError> {
        if is_prime(p) {
            Ok(Self { p })
        } else {
            Err(ScalarError::CompositeCharacteristic(p))
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn pow(&self, x: u64, mut e: u64) -> u64 {
        let mut base = x % self.p;
        let mut acc = 1 % self.p;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            e >>= 1;
        }
        acc
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn characteristic(&self) -> u64 {
        self.p
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.p
    }
    fn from_int(&self, value: i64) -> u64 {
        value.rem_euclid(self.p as i64) as u64
    }
    fn is_zero(&self, x: &u64) -> bool {
        *x == 0
    }
    fn add(&self, x: &u64, y: &u64) -> u64 {
        ((*x as u128 + *y as u128) % self.p as u128) as u64
    }
    fn sub(&self, x: &u64, y: &u64) -> u64 {
        ((*x as u128 + self.p as u128 - *y as u128) % self.p as u128) as u64
    }
    fn mul(&self, x: &u64, y: &u64) -> u64 {
        ((*x as u128 * *y as u128) % self.p as u128) as u64
    }
    fn neg(&self, x: &u64) -> u64 {
        if *x == 0 {
            0
        } else {
            self.p - x
        }
    }
    fn inv(&self, x: &u64) -> Result<u64, ScalarError> {
        if *x % self.p == 0 {
            return Err(ScalarError::DivisionByZero);
        }
        // Fermat: x^(p-2)
        Ok(self.pow(*x, self.p - 2))
    }
    fn to_scalar(&self, x: &u64) -> Scalar {
        Scalar::Residue(*x)
    }
    fn from_scalar(&self, s: &Scalar) -> Result<u64, ScalarError> {
        match s {
            Scalar::Residue(r) if *r < self.p => Ok(*r),
            Scalar::Residue(r) => Err(ScalarError::FieldMismatch {
                value: r.to_string(),
                characteristic: self.p,
            }),
            Scalar::Rational(q) => Err(ScalarError::FieldMismatch {
                value: render_rational(q),
                characteristic: self.p,
            }),
        }
    }
}

/// Deterministic trial division.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Runtime descriptor of a coefficient field: characteristic 0 (Q) or a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FieldSpec {
    characteristic: u64,
}

impl FieldSpec {
    pub const RATIONALS: FieldSpec = FieldSpec { characteristic: 0 };

    pub fn characteristic(&self) -> u64 {
        self.characteristic
    }

    pub fn is_rational(&self) -> bool {
        self.characteristic == 0
    }

    pub fn name(&self) -> String {
        if self.characteristic == 0 {
            "Q".to_string()
        } else {
            format!("GF({})", self.characteristic)
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

pub fn make_field(characteristic: u64) -> Result<FieldSpec, ScalarError> {
    if characteristic == 0 || is_prime(characteristic) {
        Ok(FieldSpec { characteristic })
    } else {
        Err(ScalarError::CompositeCharacteristic(characteristic))
    }
}

pub fn scalar_inverse(field: &FieldSpec, x: &Scalar) -> Result<Scalar, ScalarError> {
    field.inv(x)
}

/// A field element detached from its field context.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rational(BigRational),
    Residue(u64),
}

impl Scalar {
    pub fn rational(numer: i64, denom: i64) -> Self {
        Scalar::Rational(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }
}

fn render_rational(q: &BigRational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rational(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Scalar::Rational(q) => write!(f, "{}", render_rational(q)),
            Scalar::Residue(r) => write!(f, "{r}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = ScalarError;

    /// Parses `"p/q"` or `"p"` as a rational.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ScalarError::Parse(s.to_string());
        let (num, den) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num = BigInt::from_str(num).map_err(|_| err())?;
        let den = BigInt::from_str(den).map_err(|_| err())?;
        if den.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Scalar::Rational(BigRational::new(num, den)))
    }
}

/// Rationals serialize as `"p/q"` strings, residues as bare integers.
impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Rational(q) => serializer.serialize_str(&render_rational(q)),
            Scalar::Residue(r) => serializer.serialize_u64(*r),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(r) => Ok(Scalar::Residue(r)),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Runtime-dispatched arithmetic. Slower than the concrete fields but handy
/// for one-off scalar work and for cross-checking them.
impl Field for FieldSpec {
    type Elem = Scalar;

    fn characteristic(&self) -> u64 {
        self.characteristic
    }
    fn zero(&self) -> Scalar {
        self.from_int(0)
    }
    fn one(&self) -> Scalar {
        self.from_int(1)
    }
    fn from_int(&self, value: i64) -> Scalar {
        match self.characteristic {
            0 => Scalar::Rational(Rationals.from_int(value)),
            p => Scalar::Residue(value.rem_euclid(p as i64) as u64),
        }
    }
    fn is_zero(&self, x: &Scalar) -> bool {
        match x {
            Scalar::Rational(q) => q.is_zero(),
            Scalar::Residue(r) => *r == 0,
        }
    }
    fn add(&self, x: &Scalar, y: &Scalar) -> Scalar {
        self.lift2(x, y, |f, a, b| f.add(a, b), |a, b| a + b)
    }
    fn sub(&self, x: &Scalar, y: &Scalar) -> Scalar {
        self.lift2(x, y, |f, a, b| f.sub(a, b), |a, b| a - b)
    }
    fn mul(&self, x: &Scalar, y: &Scalar) -> Scalar {
        self.lift2(x, y, |f, a, b| f.mul(a, b), |a, b| a * b)
    }
    fn neg(&self, x: &Scalar) -> Scalar {
        self.sub(&self.zero(), x)
    }
    fn inv(&self, x: &Scalar) -> Result<Scalar, ScalarError> {
        match (self.characteristic, x) {
            (0, Scalar::Rational(q)) => Rationals.inv(q).map(Scalar::Rational),
            (p, Scalar::Residue(r)) if p > 0 => {
                PrimeField { p }.inv(&(r % p)).map(Scalar::Residue)
            }
            _ => Err(self.mismatch(x)),
        }
    }
    fn to_scalar(&self, x: &Scalar) -> Scalar {
        x.clone()
    }
    fn from_scalar(&self, s: &Scalar) -> Result<Scalar, ScalarError> {
        match self.characteristic {
            0 => Rationals.from_scalar(s).map(Scalar::Rational),
            p => PrimeField { p }.from_scalar(s).map(Scalar::Residue),
        }
    }
}

impl FieldSpec {
    fn mismatch(&self, x: &Scalar) -> ScalarError {
        ScalarError::FieldMismatch {
            value: x.to_string(),
            characteristic: self.characteristic,
        }
    }

    fn lift2(
        &self,
        x: &Scalar,
        y: &Scalar,
        modular: impl Fn(&PrimeField, &u64, &u64) -> u64,
        rational: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Scalar {
        match (x, y) {
            (Scalar::Rational(a), Scalar::Rational(b)) if self.characteristic == 0 => {
                Scalar::Rational(rational(a, b))
            }
            (Scalar::Residue(a), Scalar::Residue(b)) if self.characteristic > 0 => {
                let f = PrimeField {
                    p: self.characteristic,
                };
                Scalar::Residue(modular(&f, &(a % f.p), &(b % f.p)))
            }
            _ => panic!("mixed scalar kinds in {}: {x} and {y}", self.name()),
        }
    }
}

/// Integer value of a scalar when it has one (residues are returned as-is).
pub fn scalar_to_i64(s: &Scalar) -> Option<i64> {
    match s {
        Scalar::Rational(q) if q.is_integer() => q.numer().to_i64(),
        Scalar::Rational(_) => None,
        Scalar::Residue(r) => i64::try_from(*r).ok(),
    }
}

/// Signed display helper used by the `a^i b^j` printer: rationals keep their
/// sign, residues print as-is.
pub(crate) fn is_negative(s: &Scalar) -> bool {
    matches!(s, Scalar::Rational(q) if q.is_negative())
}

/// Runs `$body` with `$f` bound to the concrete field behind a [`FieldSpec`].
#[macro_export]
macro_rules! with_field {
    ($spec:expr, |$f:ident| $body:expr) => {{
        let spec: $crate::scalar::FieldSpec = $spec;
        match spec.characteristic() {
            0 => {
                let $f = $crate::scalar::Rationals;
                $body
            }
            p => {
                let $f = $crate::scalar::PrimeField::new(p).expect("FieldSpec is validated");
                $body
            }
        }
    }};
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn make_field_accepts_zero_and_primes() {
        assert!(make_field(0).unwrap().is_rational());
        assert_eq!(make_field(3).unwrap().characteristic(), 3);
        assert_eq!(make_field(2).unwrap().characteristic(), 2);
        assert_eq!(make_field(6), Err(ScalarError::CompositeCharacteristic(6)));
        assert_eq!(make_field(1), Err(ScalarError::CompositeCharacteristic(1)));
    }

    #[test]
    fn inverse_examples() {
        let q = make_field(0).unwrap();
        assert_eq!(scalar_inverse(&q, &Scalar::rational(1, 1)).unwrap(), Scalar::rational(1, 1));
        assert_eq!(scalar_inverse(&q, &Scalar::rational(2, 3)).unwrap(), Scalar::rational(3, 2));
        let gf7 = make_field(7).unwrap();
        // exhaustive search oracle
        let expected = (0..7u64).find(|y| (3 * y) % 7 == 1).unwrap();
        assert_eq!(expected, 5);
        assert_eq!(scalar_inverse(&gf7, &Scalar::Residue(3)).unwrap(), Scalar::Residue(expected));
        assert_eq!(scalar_inverse(&gf7, &Scalar::Residue(0)), Err(ScalarError::DivisionByZero));
        assert_eq!(
            scalar_inverse(&q, &Scalar::rational(0, 5)),
            Err(ScalarError::DivisionByZero)
        );
    }

    #[test]
    fn rationals_are_canonical() {
        assert_eq!(Scalar::rational(2, -4), Scalar::rational(-1, 2));
        assert_eq!("6/8".parse::<Scalar>().unwrap(), Scalar::rational(3, 4));
        assert_eq!("-5".parse::<Scalar>().unwrap(), Scalar::rational(-5, 1));
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("x".parse::<Scalar>().is_err());
    }

    #[test]
    fn serde_forms() {
        let q = Scalar::rational(-3, 6);
        assert_eq!(serde_json::to_string(&q).unwrap(), "\"-1/2\"");
        assert_eq!(serde_json::to_string(&Scalar::Residue(4)).unwrap(), "4");
        let back: Scalar = serde_json::from_str("\"-1/2\"").unwrap();
        assert_eq!(back, q);
        let r: Scalar = serde_json::from_str("4").unwrap();
        assert_eq!(r, Scalar::Residue(4));
    }

    #[test]
    fn prime_field_rejects_foreign_scalars() {
        let f = PrimeField::new(5).unwrap();
        assert!(f.from_scalar(&Scalar::Residue(5)).is_err());
        assert!(f.from_scalar(&Scalar::rational(1, 2)).is_err());
        assert!(Rationals.from_scalar(&Scalar::Residue(1)).is_err());
    }

    fn field_axioms<F: Field>(f: &F, a: &F::Elem, b: &F::Elem, c: &F::Elem) {
        assert_eq!(f.add(&f.add(a, b), c), f.add(a, &f.add(b, c)));
        assert_eq!(f.mul(&f.mul(a, b), c), f.mul(a, &f.mul(b, c)));
        assert_eq!(f.add(a, b), f.add(b, a));
        assert_eq!(f.mul(a, b), f.mul(b, a));
        assert_eq!(f.mul(a, &f.add(b, c)), f.add(&f.mul(a, b), &f.mul(a, c)));
        assert!(f.is_zero(&f.add(a, &f.neg(a))));
        if !f.is_zero(a) {
            assert!(f.is_one(&f.mul(a, &f.inv(a).unwrap())));
        }
        assert_eq!(f.sub(&f.add(a, b), b), *a);
    }

    #[test]
    fn prime_field_axioms_exhaustive() {
        for p in [2u64, 3, 5, 7] {
            let f = PrimeField::new(p).unwrap();
            for a in 0..p {
                for b in 0..p {
                    for c in 0..p {
                        field_axioms(&f, &a, &b, &c);
                    }
                }
            }
        }
    }

    #[test]
    fn fermat_exhaustive() {
        for p in [2u64, 3, 5, 7, 11, 13] {
            let f = PrimeField::new(p).unwrap();
            for x in 0..p {
                assert_eq!(f.pow(x, p), x);
            }
        }
    }

    #[test]
    fn dynamic_field_agrees_with_concrete() {
        let spec = make_field(7).unwrap();
        let f = PrimeField::new(7).unwrap();
        for a in 0..7u64 {
            for b in 0..7u64 {
                let dynamic = spec.mul(&Scalar::Residue(a), &Scalar::Residue(b));
                assert_eq!(dynamic, Scalar::Residue(f.mul(&a, &b)));
            }
        }
        let q = FieldSpec::RATIONALS;
        assert_eq!(
            q.add(&Scalar::rational(1, 2), &Scalar::rational(1, 3)),
            Scalar::rational(5, 6)
        );
    }

    #[test]
    fn with_field_dispatches() {
        let c = with_field!(make_field(5).unwrap(), |f| f.characteristic());
        assert_eq!(c, 5);
        let c = with_field!(make_field(0).unwrap(), |f| f.characteristic());
        assert_eq!(c, 0);
    }

    fn small_rational() -> impl Strategy<Value = BigRational> {
        (-50i64..50, 1i64..20).prop_map(|(n, d)| BigRational::new(n.into(), d.into()))
    }

    proptest! {
        #[test]
        fn rational_axioms(a in small_rational(), b in small_rational(), c in small_rational()) {
            field_axioms(&Rationals, &a, &b, &c);
        }

        #[test]
        fn rational_render_roundtrip(a in small_rational()) {
            let s = Scalar::Rational(a);
            let text = serde_json::to_string(&s).unwrap();
            prop_assert_eq!(serde_json::from_str::<Scalar>(&text).unwrap(), s);
        }
    }
}
