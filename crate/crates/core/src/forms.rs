//! The three definite binary forms and the definite ternary form.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::ResidueMatrix;
use crate::padic::{find_constants, FormConstants, OddPrime, ResidueInt};

/// Which form: `-v`, `p`, `up` (binary) or `+` (ternary).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum KappaLabel {
    #[serde(rename = "-v")]
    MinusV,
    #[serde(rename = "p")]
    P,
    #[serde(rename = "up")]
    Up,
    #[serde(rename = "+")]
    Plus,
}

impl KappaLabel {
    pub const BINARY: [KappaLabel; 3] = [KappaLabel::MinusV, KappaLabel::P, KappaLabel::Up];

    pub fn dim(self) -> usize {
        match self {
            KappaLabel::Plus => 3,
            _ => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            KappaLabel::MinusV => "-v",
            KappaLabel::P => "p",
            KappaLabel::Up => "up",
            KappaLabel::Plus => "+",
        }
    }

    /// The label for a dimension, with `kappa` required only for `d = 2`.
    pub fn for_dim(d: usize, kappa: Option<KappaLabel>) -> Result<KappaLabel> {
        match (d, kappa) {
            (3, None) | (3, Some(KappaLabel::Plus)) => Ok(KappaLabel::Plus),
            (2, Some(k)) if k != KappaLabel::Plus => Ok(k),
            (2, None) => Err(Error::Parse("d = 2 needs a kappa label (-v, p or up)".into())),
            (d, k) => Err(Error::LabelDimension { label: k.map(|k| k.as_str().to_string()).unwrap_or_default(), d }),
        }
    }
}

impl fmt::Display for KappaLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KappaLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "-v" | "mv" | "minusv" | "minus-v" => Ok(KappaLabel::MinusV),
            "p" => Ok(KappaLabel::P),
            "up" => Ok(KappaLabel::Up),
            "+" | "plus" | "plus3" => Ok(KappaLabel::Plus),
            other => Err(Error::Parse(format!("unknown kappa label {other:?}"))),
        }
    }
}

/// Group descriptor without the level: the form label and the prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Descriptor {
    pub label: KappaLabel,
    pub p: OddPrime,
}

impl Descriptor {
    pub fn new(label: KappaLabel, p: OddPrime) -> Self {
        Descriptor { label, p }
    }

    pub fn dim(&self) -> usize {
        self.label.dim()
    }

    pub fn constants(&self) -> FormConstants {
        find_constants(self.p)
    }

    pub fn form(&self) -> DiagonalForm {
        form_matrix(self.label, self.p)
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d={} kappa={} p={}", self.dim(), self.label, self.p)
    }
}

/// `diag(a_1, ..., a_d)` with exact integer entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagonalForm {
    pub label: KappaLabel,
    pub p: OddPrime,
    pub entries: Vec<i64>,
}

pub fn form_matrix(label: KappaLabel, p: OddPrime) -> DiagonalForm {
    let c = find_constants(p);
    let mv = c.minus_v() as i64;
    let pp = p.get() as i64;
    let entries = match label {
        KappaLabel::MinusV => vec![1, mv],
        KappaLabel::P => vec![1, pp],
        KappaLabel::Up => vec![c.u as i64, pp],
        KappaLabel::Plus => vec![1, mv, pp],
    };
    DiagonalForm { label, p, entries }
}

impl DiagonalForm {
    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn evaluate(&self, x: &[ResidueInt]) -> Result<ResidueInt> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        let first = &x[0];
        let ring = first.ring();
        let mut acc = BigInt::zero();
        for (xi, &a) in x.iter().zip(&self.entries) {
            if xi.prime() != self.p {
                return Err(Error::PrimeMismatch { left: self.p.get(), right: xi.prime().get() });
            }
            if xi.level() != first.level() {
                return Err(Error::LevelMismatch { left: first.level(), right: xi.level() });
            }
            let v = BigInt::from(xi.value().clone());
            acc += BigInt::from(a) * &v * &v;
        }
        Ok(ResidueInt::from_reduced(self.p, first.level(), ring.reduce_int(&acc)))
    }

    /// The form as a matrix at `level`.
    pub fn as_matrix(&self, level: u32) -> Result<ResidueMatrix> {
        ResidueMatrix::diagonal(self.p, level, &self.entries)
    }

    /// `L^T A L = A` and `det L = 1` modulo `p^level`.
    pub fn is_special_orthogonal(&self, l: &ResidueMatrix) -> Result<bool> {
        if l.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: l.dim() });
        }
        if l.prime() != self.p {
            return Err(Error::PrimeMismatch { left: self.p.get(), right: l.prime().get() });
        }
        if !l.det().value().is_one() {
            return Ok(false);
        }
        let a = self.as_matrix(l.level())?;
        let lhs = l.transpose().mul(&a)?.mul(l)?;
        Ok(lhs == a)
    }

    /// Anisotropy certificate: the unit-coefficient part and the
    /// `p`-divisible part (divided by `p`) each represent 0 mod p only
    /// trivially. For the ternary form the unit part is the first two
    /// coordinates.
    pub fn definiteness_witness_mod_p(&self) -> bool {
        let p = self.p.get() as i64;
        let (units, pdiv): (Vec<i64>, Vec<i64>) = self.entries.iter().partition(|a| a.rem_euclid(p) != 0);
        let pdiv: Vec<i64> = pdiv.iter().map(|a| a / p).collect();
        isotropic_free(&units, p) && isotropic_free(&pdiv, p)
    }
}

/// Exhaustive check that `sum c_i x_i^2 = 0 mod p` has only the trivial
/// solution. Coefficients divisible by p make the answer false.
pub fn isotropic_free(coeffs: &[i64], p: i64) -> bool {
    let k = coeffs.len() as u32;
    let total = p.pow(k);
    (1..total).all(|mut idx| {
        let mut s = 0i64;
        for &c in coeffs {
            let x = idx % p;
            idx /= p;
            s = (s + c * x * x) % p;
        }
        s != 0
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: u64) -> OddPrime {
        OddPrime::new(x).unwrap()
    }

    #[test]
    fn form_entries() {
        assert_eq!(form_matrix(KappaLabel::MinusV, p(3)).entries, vec![1, 1]);
        assert_eq!(form_matrix(KappaLabel::Up, p(3)).entries, vec![2, 3]);
        assert_eq!(form_matrix(KappaLabel::Plus, p(5)).entries, vec![1, 2, 5]);
        assert_eq!(form_matrix(KappaLabel::P, p(7)).entries, vec![1, 7]);
    }

    #[test]
    fn evaluation() {
        let q = form_matrix(KappaLabel::MinusV, p(3));
        let r = |n, v: i64| ResidueInt::new(p(3), n, v).unwrap();
        assert_eq!(q.evaluate(&[r(1, 1), r(1, 0)]).unwrap().value().to_string(), "1");
        assert_eq!(q.evaluate(&[r(1, 2), r(1, 1)]).unwrap().value().to_string(), "2");
        let plus = form_matrix(KappaLabel::Plus, p(3));
        assert_eq!(plus.evaluate(&[r(2, 0), r(2, 0), r(2, 1)]).unwrap().value().to_string(), "3");
        assert!(q.evaluate(&[r(1, 1)]).is_err());
        assert!(q.evaluate(&[r(1, 1), r(2, 1)]).is_err());
    }

    #[test]
    fn special_orthogonality() {
        let q = form_matrix(KappaLabel::MinusV, p(3));
        assert!(q.is_special_orthogonal(&ResidueMatrix::identity(p(3), 1, 2)).unwrap());
        assert!(!q.is_special_orthogonal(&ResidueMatrix::diagonal(p(3), 1, &[1, -1]).unwrap()).unwrap());
        let m = ResidueMatrix::from_i64(p(3), 1, 2, &[0, 2, 1, 0]).unwrap();
        assert!(q.is_special_orthogonal(&m).unwrap());
        assert!(q.is_special_orthogonal(&ResidueMatrix::identity(p(3), 1, 3)).is_err());
    }

    #[test]
    fn definiteness() {
        for pr in [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
            for label in [KappaLabel::MinusV, KappaLabel::P, KappaLabel::Up, KappaLabel::Plus] {
                assert!(form_matrix(label, p(pr)).definiteness_witness_mod_p(), "{label} p={pr}");
            }
        }
        assert!(!isotropic_free(&[1, -1], 5));
        let indefinite = DiagonalForm { label: KappaLabel::MinusV, p: p(5), entries: vec![1, -1] };
        assert!(!indefinite.definiteness_witness_mod_p());
        // x^2 - 3y^2 has a square ratio mod 11 (3 = 5^2), so it is isotropic
        let iso = DiagonalForm { label: KappaLabel::P, p: p(11), entries: vec![1, -3] };
        assert!(!iso.definiteness_witness_mod_p());
    }

    #[test]
    fn label_parsing() {
        assert_eq!("-v".parse::<KappaLabel>().unwrap(), KappaLabel::MinusV);
        assert_eq!("UP".parse::<KappaLabel>().unwrap(), KappaLabel::Up);
        assert!("q".parse::<KappaLabel>().is_err());
        assert_eq!(KappaLabel::for_dim(3, None).unwrap(), KappaLabel::Plus);
        assert!(KappaLabel::for_dim(3, Some(KappaLabel::P)).is_err());
        assert!(KappaLabel::for_dim(2, Some(KappaLabel::Plus)).is_err());
    }
}
