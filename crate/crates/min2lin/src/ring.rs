//! Exact arithmetic over effective Euclidean domains.
//!
//! Every algorithm in this crate is written against the [`EuclideanDomain`]
//! trait. Three instances ship with the crate: the integers ([`Integers`]),
//! the rationals ([`Rationals`]) and prime fields ([`PrimeField`]). Further
//! domains such as the Gaussian integers fit the same interface: they need
//! an element type, a norm (`a² + b²` for `a + bi`) and a division with
//! remainder (rounded complex division), and every generic routine below
//! (extended gcd, lcm, single-equation solving) then works unchanged.

use std::fmt;
use std::hash::Hash;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised by ring operations and domain construction.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RingError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("cannot parse {text:?} as an element of {domain}")]
    Parse { text: String, domain: String },
}

/// Serializable description of one of the shipped domains, written as
/// `{"kind": "Z"}`, `{"kind": "Q"}` or `{"kind": "Fp", "p": 5}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub enum DomainSpec {
    Integers,
    Rationals,
    PrimeField(u64),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainRepr {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<u64>,
}

impl TryFrom<DomainRepr> for DomainSpec {
    type Error = String;

    fn try_from(r: DomainRepr) -> Result<Self, String> {
        match (r.kind.as_str(), r.p) {
            ("Z", None) => Ok(DomainSpec::Integers),
            ("Q", None) => Ok(DomainSpec::Rationals),
            ("Fp", Some(p)) => DomainSpec::PrimeField(p).validate().map_err(|e| e.to_string()),
            ("Fp", None) => Err("domain Fp needs a modulus \"p\"".into()),
            (kind, Some(_)) if kind == "Z" || kind == "Q" => Err(format!("domain {kind} takes no modulus")),
            (kind, _) => Err(format!("unknown domain kind {kind:?}")),
        }
    }
}

impl From<DomainSpec> for DomainRepr {
    fn from(d: DomainSpec) -> Self {
        match d {
            DomainSpec::Integers => DomainRepr { kind: "Z".into(), p: None },
            DomainSpec::Rationals => DomainRepr { kind: "Q".into(), p: None },
            DomainSpec::PrimeField(p) => DomainRepr { kind: "Fp".into(), p: Some(p) },
        }
    }
}

impl DomainSpec {
    /// Checks the primality of a prime-field modulus.
    pub fn validate(self) -> Result<Self, RingError> {
        if let DomainSpec::PrimeField(p) = self {
            PrimeField::new(p)?;
        }
        Ok(self)
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Integers => write!(f, "Z"),
            DomainSpec::Rationals => write!(f, "Q"),
            DomainSpec::PrimeField(p) => write!(f, "F{p}"),
        }
    }
}

/// Particular solution of `a·x + b·y = c` together with its strides.
///
/// Every solution has the form `(x0 + stride_x·r, y0 + stride_y·r)` where
/// `stride_x = b/g` and `stride_y = -a/g`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingleSolution<E> {
    pub x0: E,
    pub y0: E,
    pub g: E,
    pub stride_x: E,
    pub stride_y: E,
}

/// An effective Euclidean domain with canonical unit representatives.
pub trait EuclideanDomain:
    Clone + fmt::Debug + fmt::Display + PartialEq + Eq + Hash + Send + Sync + 'static
{
    type Elem: Clone + fmt::Debug + fmt::Display + PartialEq + Eq + Hash + Ord + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    /// The Euclidean function: `norm(0) = 0` and every remainder produced by
    /// [`divmod`](Self::divmod) has norm strictly below the divisor's.
    fn norm(&self, a: &Self::Elem) -> BigUint;

    /// Division with remainder, `a = b·q + r` with `norm(r) < norm(b)`.
    fn divmod(&self, a: &Self::Elem, b: &Self::Elem)
        -> Result<(Self::Elem, Self::Elem), RingError>;

    /// Multiplicative inverse, present exactly for units.
    fn inverse(&self, a: &Self::Elem) -> Option<Self::Elem>;

    /// The unit `u` with `a = u · normal(a)`; `1` for zero.
    fn unit_part(&self, a: &Self::Elem) -> Self::Elem;

    fn is_field(&self) -> bool;

    /// Number of elements for finite domains.
    fn order(&self) -> Option<u64>;

    fn parse_elem(&self, text: &str) -> Result<Self::Elem, RingError>;

    fn spec(&self) -> DomainSpec;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.add(a, &self.neg(b))
    }

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }

    fn is_unit(&self, a: &Self::Elem) -> bool {
        self.inverse(a).is_some()
    }

    /// Canonical associate of `a`.
    fn normal(&self, a: &Self::Elem) -> Self::Elem {
        if self.is_zero(a) {
            return self.zero();
        }
        let u = self.unit_part(a);
        let inv = self.inverse(&u).expect("unit part is invertible");
        self.mul(a, &inv)
    }

    /// Does `a` divide `b`?
    fn divides(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        if self.is_zero(a) {
            return self.is_zero(b);
        }
        let (_, r) = self.divmod(b, a).expect("nonzero divisor");
        self.is_zero(&r)
    }

    /// `b / a` when `a` divides `b`.
    fn exact_div(&self, b: &Self::Elem, a: &Self::Elem) -> Option<Self::Elem> {
        if self.is_zero(a) {
            return None;
        }
        let (q, r) = self.divmod(b, a).ok()?;
        self.is_zero(&r).then_some(q)
    }

    /// Extended Euclid: `(g, s, t)` with `g = s·a + t·b`, `g` canonical.
    fn ext_gcd(&self, a: &Self::Elem, b: &Self::Elem) -> (Self::Elem, Self::Elem, Self::Elem) {
        if self.is_zero(a) && self.is_zero(b) {
            return (self.zero(), self.zero(), self.zero());
        }
        if self.is_field() {
            return match self.inverse(a) {
                Some(inv) => (self.one(), inv, self.zero()),
                None => (self.one(), self.zero(), self.inverse(b).expect("nonzero")),
            };
        }
        let (mut r0, mut s0, mut t0) = (a.clone(), self.one(), self.zero());
        let (mut r1, mut s1, mut t1) = (b.clone(), self.zero(), self.one());
        while !self.is_zero(&r1) {
            let (q, r) = self.divmod(&r0, &r1).expect("nonzero divisor");
            let s2 = self.sub(&s0, &self.mul(&q, &s1));
            let t2 = self.sub(&t0, &self.mul(&q, &t1));
            r0 = std::mem::replace(&mut r1, r);
            s0 = std::mem::replace(&mut s1, s2);
            t0 = std::mem::replace(&mut t1, t2);
        }
        let inv = self
            .inverse(&self.unit_part(&r0))
            .expect("unit part is invertible");
        (self.mul(&r0, &inv), self.mul(&s0, &inv), self.mul(&t0, &inv))
    }

    fn gcd(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        self.ext_gcd(a, b).0
    }

    /// Least common multiple in canonical form; `lcm(0, b) = 0`.
    fn lcm(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        if self.is_zero(a) || self.is_zero(b) {
            return self.zero();
        }
        let g = self.gcd(a, b);
        let q = self.exact_div(a, &g).expect("gcd divides its arguments");
        self.normal(&self.mul(&q, b))
    }

    /// Solves `a·x + b·y = c`, or reports that `gcd(a, b)` does not divide `c`.
    ///
    /// When `b/g ≠ 0` the returned `x0` is reduced modulo the stride, which
    /// makes the answer canonical.
    fn solve_single(
        &self,
        a: &Self::Elem,
        b: &Self::Elem,
        c: &Self::Elem,
    ) -> Option<SingleSolution<Self::Elem>> {
        if self.is_zero(a) && self.is_zero(b) {
            return self.is_zero(c).then(|| SingleSolution {
                x0: self.zero(),
                y0: self.zero(),
                g: self.zero(),
                stride_x: self.zero(),
                stride_y: self.zero(),
            });
        }
        let (g, s, t) = self.ext_gcd(a, b);
        let m = self.exact_div(c, &g)?;
        let stride_x = self.exact_div(b, &g).expect("gcd divides b");
        let stride_y = self.neg(&self.exact_div(a, &g).expect("gcd divides a"));
        let mut x0 = self.mul(&s, &m);
        let mut y0 = self.mul(&t, &m);
        if !self.is_zero(&stride_x) {
            let (q, r) = self.divmod(&x0, &stride_x).expect("nonzero stride");
            x0 = r;
            y0 = self.sub(&y0, &self.mul(&stride_y, &q));
        }
        Some(SingleSolution { x0, y0, g, stride_x, stride_y })
    }
}

/// The ring of integers with big-integer elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Integers;

impl fmt::Display for Integers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z")
    }
}

impl EuclideanDomain for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn from_i64(&self, v: i64) -> BigInt {
        BigInt::from(v)
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn neg(&self, a: &BigInt) -> BigInt {
        -a
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn norm(&self, a: &BigInt) -> BigUint {
        a.magnitude().clone()
    }
    fn divmod(&self, a: &BigInt, b: &BigInt) -> Result<(BigInt, BigInt), RingError> {
        if b.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        let r = a.mod_floor(&b.abs());
        let q = (a - &r) / b;
        Ok((q, r))
    }
    fn inverse(&self, a: &BigInt) -> Option<BigInt> {
        (a.is_one() || *a == -BigInt::one()).then(|| a.clone())
    }
    fn unit_part(&self, a: &BigInt) -> BigInt {
        if a.is_negative() {
            -BigInt::one()
        } else {
            BigInt::one()
        }
    }
    fn is_field(&self) -> bool {
        false
    }
    fn order(&self) -> Option<u64> {
        None
    }
    fn parse_elem(&self, text: &str) -> Result<BigInt, RingError> {
        let t = text.trim();
        let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
        if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
            return Err(parse_error(text, self));
        }
        t.parse::<BigInt>().map_err(|_| parse_error(text, self))
    }
    fn spec(&self) -> DomainSpec {
        DomainSpec::Integers
    }
}

/// The field of rationals with exact reduced fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Rationals;

impl fmt::Display for Rationals {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q")
    }
}

impl EuclideanDomain for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn norm(&self, a: &BigRational) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            BigUint::one()
        }
    }
    fn divmod(
        &self,
        a: &BigRational,
        b: &BigRational,
    ) -> Result<(BigRational, BigRational), RingError> {
        if b.is_zero() {
            return Err(RingError::DivisionByZero);
        }
        Ok((a / b, BigRational::zero()))
    }
    fn inverse(&self, a: &BigRational) -> Option<BigRational> {
        (!a.is_zero()).then(|| a.recip())
    }
    fn unit_part(&self, a: &BigRational) -> BigRational {
        if a.is_zero() {
            BigRational::one()
        } else {
            a.clone()
        }
    }
    fn is_field(&self) -> bool {
        true
    }
    fn order(&self) -> Option<u64> {
        None
    }
    fn parse_elem(&self, text: &str) -> Result<BigRational, RingError> {
        let t = text.trim();
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n, d),
            None => (t, "1"),
        };
        let num = Integers.parse_elem(num).map_err(|_| parse_error(text, self))?;
        let den = Integers.parse_elem(den).map_err(|_| parse_error(text, self))?;
        if den.is_zero() {
            return Err(parse_error(text, self));
        }
        Ok(BigRational::new(num, den))
    }
    fn spec(&self) -> DomainSpec {
        DomainSpec::Rationals
    }
}

/// The prime field of residues modulo `p`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Builds the field, refusing composite moduli.
    pub fn new(p: u64) -> Result<Self, RingError> {
        if is_prime(p) {
            Ok(PrimeField { p })
        } else {
            Err(RingError::NotPrime(p))
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    fn pow(&self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.p;
        base %= self.p;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = mul_mod(acc, base, self.p);
            }
            base = mul_mod(base, base, self.p);
            exp >>= 1;
        }
        acc
    }

    /// All field elements in increasing order.
    pub fn elements(&self) -> impl Iterator<Item = u64> {
        0..self.p
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}", self.p)
    }
}

impl EuclideanDomain for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        ((*a as u128 + *b as u128) % self.p as u128) as u64
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        mul_mod(*a, *b, self.p)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn norm(&self, a: &u64) -> BigUint {
        BigUint::from(u64::from(*a != 0))
    }
    fn divmod(&self, a: &u64, b: &u64) -> Result<(u64, u64), RingError> {
        let inv = self.inverse(b).ok_or(RingError::DivisionByZero)?;
        Ok((self.mul(a, &inv), 0))
    }
    fn inverse(&self, a: &u64) -> Option<u64> {
        (*a != 0).then(|| self.pow(*a, self.p - 2))
    }
    fn unit_part(&self, a: &u64) -> u64 {
        if *a == 0 {
            1
        } else {
            *a
        }
    }
    fn is_field(&self) -> bool {
        true
    }
    fn order(&self) -> Option<u64> {
        Some(self.p)
    }
    fn parse_elem(&self, text: &str) -> Result<u64, RingError> {
        let t = text.trim();
        if t.is_empty() || !t.bytes().all(|c| c.is_ascii_digit()) {
            return Err(parse_error(text, self));
        }
        match t.parse::<u64>() {
            Ok(v) if v < self.p => Ok(v),
            _ => Err(parse_error(text, self)),
        }
    }
    fn spec(&self) -> DomainSpec {
        DomainSpec::PrimeField(self.p)
    }
}

fn parse_error(text: &str, domain: &impl fmt::Display) -> RingError {
    RingError::Parse { text: text.to_string(), domain: domain.to_string() }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    let pow = |mut b: u64, mut e: u64| {
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = mul_mod(acc, b, n);
            }
            b = mul_mod(b, b, n);
            e >>= 1;
        }
        acc
    };
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// An element of the fraction field of `D`, kept in canonical form.
///
/// Used as a multiplicative group label: the nonzero elements of the
/// fraction field form an abelian group.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ratio<D: EuclideanDomain> {
    domain: D,
    num: D::Elem,
    den: D::Elem,
}

impl<D: EuclideanDomain> Ratio<D> {
    /// `num / den` reduced; panics when `den` is zero.
    pub fn new(domain: &D, num: D::Elem, den: D::Elem) -> Self {
        assert!(!domain.is_zero(&den), "zero denominator");
        if domain.is_field() {
            let num = domain.mul(&num, &domain.inverse(&den).expect("nonzero"));
            return Ratio { domain: domain.clone(), num, den: domain.one() };
        }
        let g = domain.gcd(&num, &den);
        let mut num = domain.exact_div(&num, &g).expect("gcd divides");
        let mut den = domain.exact_div(&den, &g).expect("gcd divides");
        let u = domain.inverse(&domain.unit_part(&den)).expect("unit");
        num = domain.mul(&num, &u);
        den = domain.mul(&den, &u);
        Ratio { domain: domain.clone(), num, den }
    }

    pub fn one(domain: &D) -> Self {
        Ratio { domain: domain.clone(), num: domain.one(), den: domain.one() }
    }

    pub fn numer(&self) -> &D::Elem {
        &self.num
    }

    pub fn denom(&self) -> &D::Elem {
        &self.den
    }

    pub fn mul(&self, other: &Self) -> Self {
        let d = &self.domain;
        Ratio::new(d, d.mul(&self.num, &other.num), d.mul(&self.den, &other.den))
    }

    /// Inverse; panics on zero.
    pub fn inv(&self) -> Self {
        Ratio::new(&self.domain, self.den.clone(), self.num.clone())
    }

    pub fn is_one(&self) -> bool {
        self.domain.is_one(&self.num) && self.domain.is_one(&self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.domain.is_zero(&self.num)
    }
}

impl<D: EuclideanDomain> fmt::Display for Ratio<D> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.domain.is_one(&self.den) {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(v: i64) -> BigInt {
        BigInt::from(v)
    }

    #[test]
    fn integer_divmod_uses_nonnegative_remainder() {
        assert_eq!(Integers.divmod(&z(9), &z(4)).unwrap(), (z(2), z(1)));
        assert_eq!(Integers.divmod(&z(-9), &z(4)).unwrap(), (z(-3), z(3)));
        assert_eq!(Integers.divmod(&z(9), &z(-4)).unwrap(), (z(-2), z(1)));
        assert_eq!(Integers.divmod(&z(1), &z(0)), Err(RingError::DivisionByZero));
    }

    #[test]
    fn norms() {
        assert_eq!(Integers.norm(&z(-7)), BigUint::from(7u32));
        let q = Rationals.parse_elem("3/4").unwrap();
        assert_eq!(Rationals.norm(&q), BigUint::one());
        assert_eq!(Rationals.norm(&Rationals.zero()), BigUint::zero());
        assert_eq!(Integers.norm(&z(0)), BigUint::zero());
    }

    #[test]
    fn field_divmod_is_exact() {
        let a = Rationals.parse_elem("3/2").unwrap();
        let b = Rationals.parse_elem("5").unwrap();
        let (q, r) = Rationals.divmod(&a, &b).unwrap();
        assert_eq!(q, Rationals.parse_elem("3/10").unwrap());
        assert!(r.is_zero());
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.divmod(&3, &5).unwrap(), (2, 0));
    }

    #[test]
    fn divmod_by_one() {
        assert_eq!(Integers.divmod(&z(-13), &z(1)).unwrap(), (z(-13), z(0)));
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.divmod(&4, &1).unwrap(), (4, 0));
    }

    #[test]
    fn ext_gcd_examples() {
        let (g, s, t) = Integers.ext_gcd(&z(4), &z(6));
        assert_eq!(g, z(2));
        assert_eq!(&s * z(4) + &t * z(6), z(2));
        assert_eq!(Integers.ext_gcd(&z(0), &z(0)), (z(0), z(0), z(0)));
        assert_eq!(Integers.ext_gcd(&z(-5), &z(0)), (z(5), z(-1), z(0)));
        let f = PrimeField::new(5).unwrap();
        let (g, s, t) = f.ext_gcd(&2, &3);
        assert_eq!(g, 1);
        assert_eq!(f.add(&f.mul(&s, &2), &f.mul(&t, &3)), 1);
    }

    #[test]
    fn lcm_examples() {
        assert_eq!(Integers.lcm(&z(4), &z(6)), z(12));
        assert_eq!(Integers.lcm(&z(-4), &z(6)), z(12));
        assert_eq!(Integers.lcm(&z(0), &z(6)), z(0));
        assert_eq!(Integers.lcm(&z(-9), &z(1)), z(9));
        let f = PrimeField::new(3).unwrap();
        assert_eq!(f.lcm(&2, &2), 1);
    }

    #[test]
    fn solve_single_examples() {
        assert!(Integers.solve_single(&z(2), &z(-2), &z(1)).is_none());
        let s = Integers.solve_single(&z(4), &z(6), &z(2)).unwrap();
        assert_eq!((s.x0.clone(), s.y0.clone()), (z(2), z(-1)));
        assert_eq!((s.stride_x.clone(), s.stride_y.clone()), (z(3), z(-2)));
        let s = Integers.solve_single(&z(1), &z(0), &z(7)).unwrap();
        assert_eq!(s.x0, z(7));
    }

    #[test]
    fn units() {
        assert!(Integers.is_unit(&z(1)));
        assert!(Integers.is_unit(&z(-1)));
        assert!(!Integers.is_unit(&z(2)));
        assert!(!Integers.is_unit(&z(0)));
        assert!(Rationals.is_unit(&Rationals.from_i64(-3)));
        assert!(!Rationals.is_unit(&Rationals.zero()));
        let f = PrimeField::new(11).unwrap();
        assert!((1..11).all(|a| f.is_unit(&a)));
        assert!(!f.is_unit(&0));
    }

    #[test]
    fn prime_field_construction() {
        assert!(PrimeField::new(2).is_ok());
        assert_eq!(PrimeField::new(9), Err(RingError::NotPrime(9)));
        assert_eq!(PrimeField::new(1), Err(RingError::NotPrime(1)));
        assert!(PrimeField::new(1_000_000_007).is_ok());
        assert!(DomainSpec::PrimeField(15).validate().is_err());
    }

    #[test]
    fn parsing() {
        assert_eq!(Integers.parse_elem("-12").unwrap(), z(-12));
        assert!(Integers.parse_elem("1.5").is_err());
        assert!(Integers.parse_elem("").is_err());
        assert_eq!(Rationals.parse_elem("6/-4").unwrap(), Rationals.parse_elem("-3/2").unwrap());
        assert!(Rationals.parse_elem("1/0").is_err());
        let f = PrimeField::new(5).unwrap();
        assert_eq!(f.parse_elem("4").unwrap(), 4);
        assert!(f.parse_elem("5").is_err());
        assert!(f.parse_elem("-1").is_err());
    }

    #[test]
    fn domain_json() {
        for d in [DomainSpec::Integers, DomainSpec::Rationals, DomainSpec::PrimeField(7)] {
            let text = serde_json::to_string(&d).unwrap();
            assert_eq!(serde_json::from_str::<DomainSpec>(&text).unwrap(), d);
        }
        assert_eq!(serde_json::to_string(&DomainSpec::PrimeField(7)).unwrap(), r#"{"kind":"Fp","p":7}"#);
        for bad in [r#"{"kind":"Fp"}"#, r#"{"kind":"Fp","p":9}"#, r#"{"kind":"Z","p":3}"#, r#"{"kind":"R"}"#, r#"{"kind":"Q","x":1}"#] {
            assert!(serde_json::from_str::<DomainSpec>(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn field_ratios_are_normalized() {
        let r = Ratio::new(&Rationals, Rationals.from_i64(4), Rationals.from_i64(-6));
        assert_eq!(r.numer(), &Rationals.parse_elem("-2/3").unwrap());
        assert!(Rationals.is_one(r.denom()));
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.gcd(&3, &0), 1);
        assert_eq!(f.ext_gcd(&0, &5), (1, 0, 3));
    }

    #[test]
    fn ratio_canonical_form() {
        let r = Ratio::new(&Integers, z(4), z(-6));
        assert_eq!((r.numer().clone(), r.denom().clone()), (z(-2), z(3)));
        assert!(r.mul(&r.inv()).is_one());
        let f = PrimeField::new(5).unwrap();
        let r = Ratio::new(&f, 2, 3);
        assert_eq!((*r.numer(), *r.denom()), (4, 1));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn divmod_invariant(a in -10_000i64..10_000, b in -500i64..500) {
                prop_assume!(b != 0);
                let (q, r) = Integers.divmod(&z(a), &z(b)).unwrap();
                prop_assert_eq!(z(b) * &q + &r, z(a));
                prop_assert!(Integers.norm(&r) < Integers.norm(&z(b)));
            }

            #[test]
            fn bezout(a in -10_000i64..10_000, b in -10_000i64..10_000, d in 1i64..50) {
                let (g, s, t) = Integers.ext_gcd(&z(a), &z(b));
                prop_assert_eq!(&s * z(a) + &t * z(b), g.clone());
                prop_assert!(Integers.divides(&g, &z(a)) && Integers.divides(&g, &z(b)));
                if a % d == 0 && b % d == 0 {
                    prop_assert!(Integers.divides(&z(d), &g));
                }
            }

            #[test]
            fn gcd_lcm_distributivity(a in proptest::collection::vec(-60i64..60, 2..=4), b in -60i64..60) {
                let d = Integers;
                let lhs = a.iter().fold(d.one(), |acc, ai| d.lcm(&acc, &d.gcd(&z(*ai), &z(b))));
                let all = a.iter().fold(d.one(), |acc, ai| d.lcm(&acc, &z(*ai)));
                let rhs = d.gcd(&all, &z(b));
                prop_assert_eq!(d.normal(&lhs), d.normal(&rhs));
            }

            #[test]
            fn solve_single_parametrization(a in -40i64..40, b in -40i64..40, c in -200i64..200) {
                prop_assume!(a != 0 || b != 0);
                let sol = Integers.solve_single(&z(a), &z(b), &z(c));
                let g = num_integer::Integer::gcd(&a, &b);
                prop_assert_eq!(sol.is_some(), c % g == 0);
                if let Some(s) = sol {
                    for r in -3..=3 {
                        let x = &s.x0 + &s.stride_x * z(r);
                        let y = &s.y0 + &s.stride_y * z(r);
                        prop_assert_eq!(z(a) * x + z(b) * y, z(c));
                    }
                }
            }

            #[test]
            fn field_inverse(p in prop::sample::select(vec![2u64, 3, 5, 7, 97, 65_537]), a in 1u64..1_000_000) {
                let f = PrimeField::new(p).unwrap();
                let a = a % p;
                prop_assume!(a != 0);
                prop_assert_eq!(f.mul(&a, &f.inverse(&a).unwrap()), 1);
            }
        }
    }
}
