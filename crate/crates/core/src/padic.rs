//! Residue rings `Z/p^n`, truncated p-adic integers and the constants that
//! pick out the definite quadratic forms.
//!
//! Everything is backed by arbitrary-precision integers; a modulus `p^n`
//! larger than a machine word is handled the same way as a small one.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An odd prime `p > 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct OddPrime(u64);

impl OddPrime {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || p % 2 == 0 || !is_prime(p) {
            return Err(Error::NotOddPrime(p));
        }
        Ok(OddPrime(p))
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.0
    }

    /// `p^n` as a big integer.
    pub fn pow(self, n: u32) -> BigUint {
        Pow::pow(BigUint::from(self.0), n)
    }
}

impl TryFrom<u64> for OddPrime {
    type Error = Error;
    fn try_from(p: u64) -> Result<Self> {
        OddPrime::new(p)
    }
}

impl From<OddPrime> for u64 {
    fn from(p: OddPrime) -> u64 {
        p.0
    }
}

impl fmt::Display for OddPrime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_prime(n: u64) -> bool {
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

/// The ring `Z/p^n` as an arithmetic context over canonical representatives
/// in `[0, p^n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResidueRing {
    p: OddPrime,
    level: u32,
    modulus: BigUint,
}

impl ResidueRing {
    pub fn new(p: OddPrime, level: u32) -> Result<Self> {
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        Ok(ResidueRing { p, level, modulus: p.pow(level) })
    }

    pub fn prime(&self) -> OddPrime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn modulus(&self) -> &BigUint {
        &self.modulus
    }

    pub fn reduce(&self, x: &BigUint) -> BigUint {
        x % &self.modulus
    }

    /// Least non-negative representative of a signed integer.
    pub fn reduce_int(&self, x: &BigInt) -> BigUint {
        let m = BigInt::from(self.modulus.clone());
        x.mod_floor(&m).to_biguint().expect("mod_floor is non-negative")
    }

    pub fn from_i64(&self, x: i64) -> BigUint {
        self.reduce_int(&BigInt::from(x))
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if s >= self.modulus {
            s - &self.modulus
        } else {
            s
        }
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.modulus - (b - a)
        }
    }

    pub fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            &self.modulus - a
        }
    }

    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.modulus
    }

    pub fn is_unit(&self, a: &BigUint) -> bool {
        !(a % self.p.get()).is_zero()
    }

    pub fn inv(&self, a: &BigUint) -> Result<BigUint> {
        if !self.is_unit(a) {
            return Err(Error::NonUnit { value: a.clone(), p: self.p.get(), level: self.level });
        }
        let a = BigInt::from(a.clone());
        let m = BigInt::from(self.modulus.clone());
        let eg = a.extended_gcd(&m);
        debug_assert!(eg.gcd.is_one());
        Ok(self.reduce_int(&eg.x))
    }
}

/// An element of `Z/p^n`, stored as its canonical representative.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ResidueJson", into = "ResidueJson")]
pub struct ResidueInt {
    p: OddPrime,
    level: u32,
    value: BigUint,
}

#[derive(Serialize, Deserialize)]
struct ResidueJson {
    p: u64,
    n: u32,
    #[serde(with = "crate::json::uint")]
    value: BigUint,
}

impl TryFrom<ResidueJson> for ResidueInt {
    type Error = Error;
    fn try_from(j: ResidueJson) -> Result<Self> {
        let p = OddPrime::new(j.p)?;
        let ring = ResidueRing::new(p, j.n)?;
        if j.value >= *ring.modulus() {
            return Err(Error::Parse(format!("{} is not reduced modulo {}^{}", j.value, j.p, j.n)));
        }
        Ok(ResidueInt { p, level: j.n, value: j.value })
    }
}

impl From<ResidueInt> for ResidueJson {
    fn from(r: ResidueInt) -> Self {
        ResidueJson { p: r.p.get(), n: r.level, value: r.value }
    }
}

impl ResidueInt {
    pub fn new(p: OddPrime, level: u32, value: impl Into<BigInt>) -> Result<Self> {
        let ring = ResidueRing::new(p, level)?;
        Ok(ResidueInt { p, level, value: ring.reduce_int(&value.into()) })
    }

    pub(crate) fn from_reduced(p: OddPrime, level: u32, value: BigUint) -> Self {
        ResidueInt { p, level, value }
    }

    pub fn prime(&self) -> OddPrime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn ring(&self) -> ResidueRing {
        ResidueRing::new(self.p, self.level).expect("level is positive by construction")
    }

    fn check_same(&self, other: &ResidueInt) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch { left: self.p.get(), right: other.p.get() });
        }
        if self.level != other.level {
            return Err(Error::LevelMismatch { left: self.level, right: other.level });
        }
        Ok(())
    }

    pub fn add(&self, other: &ResidueInt) -> Result<ResidueInt> {
        self.check_same(other)?;
        let v = self.ring().add(&self.value, &other.value);
        Ok(ResidueInt::from_reduced(self.p, self.level, v))
    }

    pub fn sub(&self, other: &ResidueInt) -> Result<ResidueInt> {
        self.check_same(other)?;
        let v = self.ring().sub(&self.value, &other.value);
        Ok(ResidueInt::from_reduced(self.p, self.level, v))
    }

    pub fn mul(&self, other: &ResidueInt) -> Result<ResidueInt> {
        self.check_same(other)?;
        let v = self.ring().mul(&self.value, &other.value);
        Ok(ResidueInt::from_reduced(self.p, self.level, v))
    }

    pub fn neg(&self) -> ResidueInt {
        ResidueInt::from_reduced(self.p, self.level, self.ring().neg(&self.value))
    }

    pub fn inv(&self) -> Result<ResidueInt> {
        let v = self.ring().inv(&self.value)?;
        Ok(ResidueInt::from_reduced(self.p, self.level, v))
    }

    pub fn is_unit(&self) -> bool {
        self.ring().is_unit(&self.value)
    }

    /// Reduction `Z/p^l -> Z/p^n` for `n <= l`.
    pub fn project(&self, target: u32) -> Result<ResidueInt> {
        if target == 0 {
            return Err(Error::ZeroLevel);
        }
        if target > self.level {
            return Err(Error::PrecisionExceeded { source_level: self.level, target });
        }
        let v = &self.value % self.p.pow(target);
        Ok(ResidueInt::from_reduced(self.p, target, v))
    }

    /// Valuation of the residue, certified only below the working level.
    pub fn valuation(&self) -> Result<u32> {
        valuation_biguint(&self.value, self.p).ok_or(Error::ValuationUnknown { precision: self.level })
    }

    /// Base-p digits, little-endian, exactly `level` of them.
    pub fn digits(&self) -> Vec<u64> {
        to_digits(&self.value, self.p, self.level)
    }
}

impl fmt::Display for ResidueInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} mod {}^{}", self.value, self.p, self.level)
    }
}

/// `level` base-p digits of `x`, little-endian.
pub fn to_digits(x: &BigUint, p: OddPrime, level: u32) -> Vec<u64> {
    let pb = BigUint::from(p.get());
    let mut out = Vec::with_capacity(level as usize);
    let mut rest = x.clone();
    for _ in 0..level {
        let (q, r) = rest.div_rem(&pb);
        out.push(r.to_u64().expect("digit below p"));
        rest = q;
    }
    out
}

/// Inverse of [`to_digits`].
pub fn from_digits(digits: &[u64], p: OddPrime) -> BigUint {
    let pb = BigUint::from(p.get());
    digits.iter().rev().fold(BigUint::zero(), |acc, &d| acc * &pb + BigUint::from(d))
}

fn valuation_biguint(x: &BigUint, p: OddPrime) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let pb = BigUint::from(p.get());
    let mut k = 0;
    let mut rest = x.clone();
    loop {
        let (q, r) = rest.div_rem(&pb);
        if !r.is_zero() {
            return Some(k);
        }
        rest = q;
        k += 1;
    }
}

/// p-adic valuation of a nonzero integer; `None` for zero.
pub fn valuation(x: &BigInt, p: OddPrime) -> Option<u32> {
    valuation_biguint(x.magnitude(), p)
}

/// `|x|_p = p^{-v_p(x)}`, with `|0|_p = 0`.
pub fn abs_p(x: &BigInt, p: OddPrime) -> BigRational {
    match valuation(x, p) {
        None => BigRational::zero(),
        Some(k) => BigRational::new(BigInt::one(), BigInt::from(p.pow(k))),
    }
}

/// `|x|_p` for a rational `x`.
pub fn abs_p_rational(x: &BigRational, p: OddPrime) -> BigRational {
    if x.is_zero() {
        return BigRational::zero();
    }
    abs_p(x.numer(), p) / abs_p(x.denom(), p)
}

/// A truncated p-adic integer: a coherent sequence `r_1, ..., r_N` with
/// `r_k` in `Z/p^k` and `r_{k+1} = r_k mod p^k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PadicTower {
    p: OddPrime,
    residues: Vec<BigUint>,
}

impl PadicTower {
    pub fn from_digits(p: OddPrime, digits: &[u64]) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::ZeroLevel);
        }
        if let Some(&d) = digits.iter().find(|&&d| d >= p.get()) {
            return Err(Error::Parse(format!("digit {d} out of range for p={p}")));
        }
        let residues = (1..=digits.len()).map(|k| from_digits(&digits[..k], p)).collect();
        Ok(PadicTower { p, residues })
    }

    /// Image of an integer (possibly negative) in `Z/p^N` for every level.
    pub fn from_integer(p: OddPrime, x: &BigInt, precision: u32) -> Result<Self> {
        if precision == 0 {
            return Err(Error::ZeroLevel);
        }
        let residues =
            (1..=precision).map(|k| ResidueRing::new(p, k).map(|r| r.reduce_int(x))).collect::<Result<_>>()?;
        Ok(PadicTower { p, residues })
    }

    /// Build from explicit residues, checking coherence.
    pub fn from_residues(residues: &[ResidueInt]) -> Result<Self> {
        let first = residues.first().ok_or(Error::ZeroLevel)?;
        let p = first.prime();
        for (k, r) in residues.iter().enumerate() {
            if r.prime() != p {
                return Err(Error::PrimeMismatch { left: p.get(), right: r.prime().get() });
            }
            if r.level() != k as u32 + 1 {
                return Err(Error::LevelMismatch { left: k as u32 + 1, right: r.level() });
            }
        }
        let tower = PadicTower { p, residues: residues.iter().map(|r| r.value().clone()).collect() };
        if !tower.is_coherent() {
            return Err(Error::Parse("residues are not coherent".into()));
        }
        Ok(tower)
    }

    pub fn prime(&self) -> OddPrime {
        self.p
    }

    pub fn precision(&self) -> u32 {
        self.residues.len() as u32
    }

    pub fn is_coherent(&self) -> bool {
        self.residues.windows(2).enumerate().all(|(k, w)| &w[1] % self.p.pow(k as u32 + 1) == w[0])
    }

    /// Residue at `level` (1-based).
    pub fn residue(&self, level: u32) -> Result<ResidueInt> {
        self.project(level)
    }

    pub fn top(&self) -> ResidueInt {
        ResidueInt::from_reduced(self.p, self.precision(), self.residues.last().unwrap().clone())
    }

    pub fn project(&self, level: u32) -> Result<ResidueInt> {
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        if level > self.precision() {
            return Err(Error::PrecisionExceeded { source_level: self.precision(), target: level });
        }
        Ok(ResidueInt::from_reduced(self.p, level, self.residues[level as usize - 1].clone()))
    }

    pub fn digits(&self) -> Vec<u64> {
        to_digits(self.residues.last().unwrap(), self.p, self.precision())
    }

    /// Little-endian base-p digit string; digits above 9 use letters, and
    /// primes above 36 fall back to dot-separated decimal digits.
    pub fn to_digit_string(&self) -> String {
        encode_digits(&self.digits(), self.p)
    }

    pub fn parse_digit_string(p: OddPrime, s: &str) -> Result<Self> {
        PadicTower::from_digits(p, &decode_digits(s, p)?)
    }

    fn zip_with(&self, other: &PadicTower, f: impl Fn(&ResidueRing, &BigUint, &BigUint) -> BigUint) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch { left: self.p.get(), right: other.p.get() });
        }
        if self.precision() != other.precision() {
            return Err(Error::LevelMismatch { left: self.precision(), right: other.precision() });
        }
        let residues = (1..=self.precision())
            .zip(self.residues.iter().zip(&other.residues))
            .map(|(k, (a, b))| f(&ResidueRing::new(self.p, k).unwrap(), a, b))
            .collect();
        Ok(PadicTower { p: self.p, residues })
    }

    pub fn add(&self, other: &PadicTower) -> Result<Self> {
        self.zip_with(other, |r, a, b| r.add(a, b))
    }

    pub fn sub(&self, other: &PadicTower) -> Result<Self> {
        self.zip_with(other, |r, a, b| r.sub(a, b))
    }

    pub fn mul(&self, other: &PadicTower) -> Result<Self> {
        self.zip_with(other, |r, a, b| r.mul(a, b))
    }

    /// Valuation relative to the precision; an all-zero tower only certifies
    /// `v >= N`.
    pub fn valuation(&self) -> Result<u32> {
        self.top().valuation()
    }

    pub fn abs_p(&self) -> Result<BigRational> {
        let k = self.valuation()?;
        Ok(BigRational::new(BigInt::one(), BigInt::from(self.p.pow(k))))
    }
}

pub(crate) fn digit_char(d: u64) -> char {
    std::char::from_digit(d as u32, 36).expect("digit below 36")
}

/// Encode a digit sequence: one character per digit for `p <= 36`,
/// otherwise dot-separated decimal.
pub fn encode_digits(digits: &[u64], p: OddPrime) -> String {
    if p.get() <= 36 {
        digits.iter().map(|&d| digit_char(d)).collect()
    } else {
        digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(".")
    }
}

pub fn decode_digits(s: &str, p: OddPrime) -> Result<Vec<u64>> {
    let digits: Vec<u64> = if p.get() <= 36 {
        s.chars()
            .map(|c| c.to_digit(36).map(u64::from).ok_or_else(|| Error::Parse(format!("bad digit {c:?}"))))
            .collect::<Result<_>>()?
    } else {
        s.split('.')
            .map(|t| t.parse::<u64>().map_err(|e| Error::Parse(format!("bad digit {t:?}: {e}"))))
            .collect::<Result<_>>()?
    };
    if let Some(d) = digits.iter().find(|&&d| d >= p.get()) {
        return Err(Error::Parse(format!("digit {d} out of range for p={p}")));
    }
    Ok(digits)
}

/// Euler's criterion: `a` is a square mod p iff `a = 0` or `a^((p-1)/2) = 1`.
pub fn is_square_mod_p(a: &ResidueInt) -> bool {
    let p = a.prime().get();
    let a = (a.value() % p).to_u64().unwrap();
    if a == 0 {
        return true;
    }
    pow_mod(a, (p - 1) / 2, p) == 1
}

pub(crate) fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    let m = m as u128;
    let mut acc = 1u128;
    let mut b = base as u128 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc as u64
}

/// The constants `u` (a non-square unit) and `v` of the classification.
///
/// `u` is the smallest positive quadratic non-residue mod p and is used as
/// the same literal integer at every level. `v = -1` when `p = 3 mod 4`
/// and `v = -u` when `p = 1 mod 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormConstants {
    pub p: OddPrime,
    pub u: u64,
    /// `v` as a signed integer: `-1` or `-u`.
    pub v: i64,
}

impl FormConstants {
    /// `-v` as a positive integer (`1` or `u`).
    pub fn minus_v(&self) -> u64 {
        (-self.v) as u64
    }

    pub fn u_mod(&self, level: u32) -> ResidueInt {
        ResidueInt::new(self.p, level, self.u).expect("level checked by caller")
    }

    pub fn v_mod(&self, level: u32) -> ResidueInt {
        ResidueInt::new(self.p, level, self.v).expect("level checked by caller")
    }

    /// `alpha_kappa` as an exact rational: `-v`, `p` or `p/u`.
    pub fn alpha(&self, label: crate::forms::KappaLabel) -> Option<BigRational> {
        use crate::forms::KappaLabel::*;
        let p = BigInt::from(self.p.get());
        match label {
            MinusV => Some(BigRational::from_integer(BigInt::from(self.minus_v()))),
            P => Some(BigRational::from_integer(p)),
            Up => Some(BigRational::new(p, BigInt::from(self.u))),
            Plus => None,
        }
    }
}

pub fn find_constants(p: OddPrime) -> FormConstants {
    let pp = p.get();
    let u = (2..pp).find(|&a| pow_mod(a, (pp - 1) / 2, pp) != 1).expect("every odd prime has a non-residue");
    let v = if pp % 4 == 3 { -1 } else { -(u as i64) };
    FormConstants { p, u, v }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: u64) -> OddPrime {
        OddPrime::new(x).unwrap()
    }

    fn r(pr: u64, n: u32, v: i64) -> ResidueInt {
        ResidueInt::new(p(pr), n, v).unwrap()
    }

    #[test]
    fn rejects_non_odd_primes() {
        for bad in [0, 1, 2, 4, 9, 15, 21] {
            assert_eq!(OddPrime::new(bad), Err(Error::NotOddPrime(bad)));
        }
        assert!(OddPrime::new(101).is_ok());
    }

    #[test]
    fn ring_operations() {
        assert_eq!(r(3, 2, 5).add(&r(3, 2, 7)).unwrap(), r(3, 2, 3));
        assert_eq!(r(3, 2, 4).mul(&r(3, 2, 7)).unwrap(), r(3, 2, 1));
        assert_eq!(r(5, 1, 2).sub(&r(5, 1, 4)).unwrap(), r(5, 1, 3));
        assert!(matches!(r(3, 2, 1).add(&r(3, 1, 1)), Err(Error::LevelMismatch { .. })));
        assert!(matches!(r(3, 1, 1).add(&r(5, 1, 1)), Err(Error::PrimeMismatch { .. })));
    }

    #[test]
    fn inverses() {
        assert_eq!(r(3, 2, 2).inv().unwrap(), r(3, 2, 5));
        assert!(matches!(r(3, 2, 3).inv(), Err(Error::NonUnit { .. })));
        assert_eq!(r(7, 1, 3).inv().unwrap(), r(7, 1, 5));
    }

    #[test]
    fn valuations() {
        let x = BigInt::from(18);
        assert_eq!(valuation(&x, p(3)), Some(2));
        assert_eq!(abs_p(&x, p(3)), BigRational::new(1.into(), 9.into()));
        assert_eq!(valuation(&BigInt::from(7), p(5)), Some(0));
        assert_eq!(abs_p(&BigInt::from(7), p(5)), BigRational::one());
        let zero = PadicTower::from_integer(p(3), &BigInt::zero(), 4).unwrap();
        assert_eq!(zero.valuation(), Err(Error::ValuationUnknown { precision: 4 }));
    }

    #[test]
    fn constants() {
        let c3 = find_constants(p(3));
        assert_eq!((c3.u, c3.v), (2, -1));
        assert_eq!(c3.v_mod(1).value(), &BigUint::from(2u32));
        let c5 = find_constants(p(5));
        assert_eq!((c5.u, c5.v), (2, -2));
        assert_eq!(c5.v_mod(1).value(), &BigUint::from(3u32));
        let c7 = find_constants(p(7));
        assert_eq!((c7.u, c7.v), (3, -1));
    }

    #[test]
    fn projection() {
        assert_eq!(r(3, 3, 25).project(2).unwrap(), r(3, 2, 7));
        assert_eq!(r(3, 3, 25).project(3).unwrap(), r(3, 3, 25));
        assert!(matches!(r(3, 2, 1).project(3), Err(Error::PrecisionExceeded { .. })));
    }

    #[test]
    fn squares_mod_p() {
        assert!(is_square_mod_p(&r(7, 1, 2)));
        assert!(!is_square_mod_p(&r(7, 1, 3)));
        assert!(is_square_mod_p(&r(5, 1, 0)));
    }

    #[test]
    fn tower_digits_and_negatives() {
        let t = PadicTower::from_integer(p(3), &BigInt::from(-1), 4).unwrap();
        assert_eq!(t.digits(), vec![2, 2, 2, 2]);
        assert_eq!(t.to_digit_string(), "2222");
        let back = PadicTower::parse_digit_string(p(3), "2222").unwrap();
        assert_eq!(back, t);
        let big = PadicTower::from_digits(p(37), &[36, 0, 5]).unwrap();
        assert_eq!(big.to_digit_string(), "36.0.5");
        assert_eq!(PadicTower::parse_digit_string(p(37), "36.0.5").unwrap(), big);
    }

    #[test]
    fn residues_must_cohere() {
        let ok = [r(3, 1, 1), r(3, 2, 4), r(3, 3, 13)];
        assert!(PadicTower::from_residues(&ok).is_ok());
        let bad = [r(3, 1, 1), r(3, 2, 5)];
        assert!(PadicTower::from_residues(&bad).is_err());
    }

    #[test]
    fn large_modulus() {
        // 3^50 exceeds u64; arithmetic stays exact.
        let x = ResidueInt::new(p(3), 50, 2).unwrap();
        let inv = x.inv().unwrap();
        assert_eq!(x.mul(&inv).unwrap().value(), &BigUint::one());
    }

    #[test]
    fn residue_json() {
        let x = r(3, 2, 7);
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"p":3,"n":2,"value":7}"#);
        let y: ResidueInt = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
        assert!(serde_json::from_str::<ResidueInt>(r#"{"p":3,"n":2,"value":9}"#).is_err());
    }
}
