//! Square matrices over `Z/p^n`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::padic::{decode_digits, encode_digits, from_digits, to_digits, OddPrime, ResidueInt, ResidueRing};

/// A `d x d` matrix over `Z/p^n`, entries row-major as canonical
/// representatives.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ResidueMatrix {
    p: OddPrime,
    level: u32,
    d: usize,
    entries: Vec<BigUint>,
}

impl ResidueMatrix {
    pub fn new(p: OddPrime, level: u32, d: usize, entries: &[BigInt]) -> Result<Self> {
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: entries.len() });
        }
        let ring = ResidueRing::new(p, level)?;
        Ok(ResidueMatrix { p, level, d, entries: entries.iter().map(|x| ring.reduce_int(x)).collect() })
    }

    pub fn from_i64(p: OddPrime, level: u32, d: usize, entries: &[i64]) -> Result<Self> {
        let big: Vec<BigInt> = entries.iter().map(|&x| BigInt::from(x)).collect();
        Self::new(p, level, d, &big)
    }

    /// Entries already reduced into `[0, p^level)`.
    pub(crate) fn from_reduced(p: OddPrime, level: u32, d: usize, entries: Vec<BigUint>) -> Self {
        debug_assert_eq!(entries.len(), d * d);
        ResidueMatrix { p, level, d, entries }
    }

    pub fn from_residues(d: usize, entries: &[ResidueInt]) -> Result<Self> {
        let first = entries.first().ok_or(Error::DimensionMismatch { expected: d * d, got: 0 })?;
        if entries.len() != d * d {
            return Err(Error::DimensionMismatch { expected: d * d, got: entries.len() });
        }
        for e in entries {
            if e.prime() != first.prime() {
                return Err(Error::PrimeMismatch { left: first.prime().get(), right: e.prime().get() });
            }
            if e.level() != first.level() {
                return Err(Error::LevelMismatch { left: first.level(), right: e.level() });
            }
        }
        Ok(Self::from_reduced(first.prime(), first.level(), d, entries.iter().map(|e| e.value().clone()).collect()))
    }

    pub fn identity(p: OddPrime, level: u32, d: usize) -> Self {
        let entries = (0..d * d).map(|k| if k % (d + 1) == 0 { BigUint::one() } else { BigUint::zero() }).collect();
        ResidueMatrix { p, level, d, entries }
    }

    pub fn diagonal(p: OddPrime, level: u32, diag: &[i64]) -> Result<Self> {
        let d = diag.len();
        let mut e = vec![0i64; d * d];
        for (i, &x) in diag.iter().enumerate() {
            e[i * d + i] = x;
        }
        Self::from_i64(p, level, d, &e)
    }

    pub fn prime(&self) -> OddPrime {
        self.p
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn entries(&self) -> &[BigUint] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &BigUint {
        &self.entries[i * self.d + j]
    }

    pub fn entry(&self, i: usize, j: usize) -> ResidueInt {
        ResidueInt::from_reduced(self.p, self.level, self.get(i, j).clone())
    }

    pub fn ring(&self) -> ResidueRing {
        ResidueRing::new(self.p, self.level).expect("positive level")
    }

    pub(crate) fn check_compatible(&self, other: &ResidueMatrix) -> Result<()> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch { left: self.p.get(), right: other.p.get() });
        }
        if self.level != other.level {
            return Err(Error::LevelMismatch { left: self.level, right: other.level });
        }
        if self.d != other.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: other.d });
        }
        Ok(())
    }

    pub fn mul(&self, other: &ResidueMatrix) -> Result<ResidueMatrix> {
        self.check_compatible(other)?;
        let d = self.d;
        let m = self.ring();
        let mut out = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = BigUint::zero();
                for k in 0..d {
                    acc += self.get(i, k) * other.get(k, j);
                }
                out.push(m.reduce(&acc));
            }
        }
        Ok(ResidueMatrix::from_reduced(self.p, self.level, d, out))
    }

    pub fn transpose(&self) -> ResidueMatrix {
        let d = self.d;
        let entries = (0..d * d).map(|k| self.get(k % d, k / d).clone()).collect();
        ResidueMatrix::from_reduced(self.p, self.level, d, entries)
    }

    pub fn neg(&self) -> ResidueMatrix {
        let m = self.ring();
        ResidueMatrix::from_reduced(self.p, self.level, self.d, self.entries.iter().map(|x| m.neg(x)).collect())
    }

    pub fn sub(&self, other: &ResidueMatrix) -> Result<ResidueMatrix> {
        self.check_compatible(other)?;
        let m = self.ring();
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| m.sub(a, b)).collect();
        Ok(ResidueMatrix::from_reduced(self.p, self.level, self.d, entries))
    }

    /// Multiply row `i` by -1 for every `i` with `signs[i] < 0`; i.e. left
    /// multiplication by a diagonal sign matrix.
    pub fn left_signs(&self, signs: &[i8]) -> ResidueMatrix {
        let m = self.ring();
        let d = self.d;
        let entries = (0..d * d)
            .map(|k| if signs[k / d] < 0 { m.neg(&self.entries[k]) } else { self.entries[k].clone() })
            .collect();
        ResidueMatrix::from_reduced(self.p, self.level, d, entries)
    }

    /// Determinant of the integer representatives, unreduced.
    pub fn det_integer(&self) -> BigInt {
        let e = |i: usize, j: usize| BigInt::from(self.get(i, j).clone());
        match self.d {
            1 => e(0, 0),
            2 => e(0, 0) * e(1, 1) - e(0, 1) * e(1, 0),
            3 => {
                e(0, 0) * e(1, 1) * e(2, 2) + e(0, 1) * e(1, 2) * e(2, 0) + e(0, 2) * e(1, 0) * e(2, 1)
                    - e(0, 0) * e(1, 2) * e(2, 1)
                    - e(0, 1) * e(1, 0) * e(2, 2)
                    - e(0, 2) * e(1, 1) * e(2, 0)
            }
            _ => unimplemented!("only d <= 3 is supported"),
        }
    }

    /// Determinant by explicit expansion (no division).
    pub fn det(&self) -> ResidueInt {
        ResidueInt::from_reduced(self.p, self.level, self.ring().reduce_int(&self.det_integer()))
    }

    /// Adjugate matrix; equals the inverse when the determinant is 1.
    pub fn adjugate(&self) -> ResidueMatrix {
        let m = self.ring();
        let e = |i: usize, j: usize| BigInt::from(self.get(i, j).clone());
        let adj: Vec<BigInt> = match self.d {
            1 => vec![BigInt::one()],
            2 => vec![e(1, 1), -e(0, 1), -e(1, 0), e(0, 0)],
            3 => {
                let cof = |r: usize, c: usize| {
                    let rows: Vec<usize> = (0..3).filter(|&x| x != r).collect();
                    let cols: Vec<usize> = (0..3).filter(|&x| x != c).collect();
                    let minor = e(rows[0], cols[0]) * e(rows[1], cols[1]) - e(rows[0], cols[1]) * e(rows[1], cols[0]);
                    if (r + c) % 2 == 0 {
                        minor
                    } else {
                        -minor
                    }
                };
                // adj[i][j] = cofactor(j, i)
                (0..9).map(|k| cof(k % 3, k / 3)).collect()
            }
            _ => unimplemented!("only d <= 3 is supported"),
        };
        ResidueMatrix::from_reduced(self.p, self.level, self.d, adj.iter().map(|x| m.reduce_int(x)).collect())
    }

    /// Entrywise reduction to a lower level.
    pub fn project(&self, target: u32) -> Result<ResidueMatrix> {
        if target == 0 {
            return Err(Error::ZeroLevel);
        }
        if target > self.level {
            return Err(Error::PrecisionExceeded { source_level: self.level, target });
        }
        let m = self.p.pow(target);
        Ok(ResidueMatrix::from_reduced(self.p, target, self.d, self.entries.iter().map(|x| x % &m).collect()))
    }

    /// Reinterpret the canonical representatives at a higher level
    /// (every added digit is zero).
    pub fn embed(&self, target: u32) -> Result<ResidueMatrix> {
        if target < self.level {
            return Err(Error::LevelOrder { from: self.level, to: target });
        }
        Ok(ResidueMatrix::from_reduced(self.p, target, self.d, self.entries.clone()))
    }

    pub fn is_identity(&self) -> bool {
        *self == ResidueMatrix::identity(self.p, self.level, self.d)
    }

    /// Row-major base-p digits, `level` little-endian digits per entry.
    pub fn digits(&self) -> Vec<u64> {
        self.entries.iter().flat_map(|x| to_digits(x, self.p, self.level)).collect()
    }

    /// Row-major base-p digit string; the `{p, n, d}` header travels
    /// separately.
    pub fn encode(&self) -> String {
        encode_digits(&self.digits(), self.p)
    }

    pub fn decode(p: OddPrime, level: u32, d: usize, s: &str) -> Result<Self> {
        let digits = decode_digits(s.trim(), p)?;
        let per = level as usize;
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        if digits.len() != d * d * per {
            return Err(Error::Parse(format!(
                "expected {} digits for a {d}x{d} matrix at level {level}, got {}",
                d * d * per,
                digits.len()
            )));
        }
        let entries = digits.chunks(per).map(|c| from_digits(c, p)).collect();
        Ok(ResidueMatrix::from_reduced(p, level, d, entries))
    }

    /// Rows of canonical representatives, for display and JSON.
    pub fn rows(&self) -> Vec<Vec<BigUint>> {
        self.entries.chunks(self.d).map(|r| r.to_vec()).collect()
    }
}

impl fmt::Display for ResidueMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> =
            self.rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")).collect();
        write!(f, "[{}] mod {}^{}", rows.join("; "), self.p, self.level)
    }
}

/// JSON form: header plus digit string and the readable rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub p: u64,
    pub n: u32,
    pub d: usize,
    pub digits: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<Vec<Vec<u64>>>,
}

impl From<&ResidueMatrix> for MatrixJson {
    fn from(m: &ResidueMatrix) -> Self {
        use num_traits::ToPrimitive;
        let rows = m.rows().iter().map(|r| r.iter().map(|x| x.to_u64()).collect::<Option<Vec<_>>>()).collect();
        MatrixJson { p: m.p.get(), n: m.level, d: m.d, digits: m.encode(), rows }
    }
}

impl TryFrom<&MatrixJson> for ResidueMatrix {
    type Error = Error;
    fn try_from(j: &MatrixJson) -> Result<Self> {
        ResidueMatrix::decode(OddPrime::new(j.p)?, j.n, j.d, &j.digits)
    }
}
