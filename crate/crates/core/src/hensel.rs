//! Lifting solutions of the defining congruences from `p^n` to `p^{n+1}`.
//!
//! A solution `L` mod `p^n` is perturbed to `L + p^n Z`; the residual
//! vector `lambda` records how far `L` is from solving the system mod
//! `p^{n+1}`, and the correction `Z` mod p is given in closed form by the
//! mod-p shape of `L`, up to one free digit (plane) or three (space).

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{form_matrix, KappaLabel};
use crate::matrix::ResidueMatrix;
use crate::padic::{find_constants, pow_mod, FormConstants};

/// Residuals mod p. `lambdas` is `(l1, l2, l3)` in the plane and
/// `(l1, ..., l6)` in space; `lambda_d` comes from the determinant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftResiduals {
    pub lambdas: Vec<u64>,
    pub lambda_d: u64,
}

/// A correction `Z` mod p and the free digits that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftCorrection {
    /// Row-major `d x d` digits.
    pub z: Vec<u64>,
    /// `(row, col, digit)` of each free entry, 1-based positions.
    pub free: Vec<(usize, usize, u64)>,
}

/// Arithmetic in `Z/p` on signed machine integers.
#[derive(Clone, Copy)]
struct Fp {
    p: i128,
}

impl Fp {
    fn r(&self, x: i128) -> i128 {
        x.rem_euclid(self.p)
    }
    fn inv(&self, x: i128) -> i128 {
        let x = self.r(x) as u64;
        assert!(x != 0, "division by a multiple of p in a lift formula");
        pow_mod(x, self.p as u64 - 2, self.p as u64) as i128
    }
    fn div(&self, x: i128, y: i128) -> i128 {
        self.r(self.r(x) * self.inv(y))
    }
}

fn big_entry(l: &ResidueMatrix, i: usize, j: usize) -> BigInt {
    BigInt::from(l.get(i, j).clone())
}

/// Exact residuals of `L`, read as integer representatives, against the
/// defining system modulo `p^{n+1}`. Fails if `L` is not a solution
/// mod `p^n`.
pub fn extract_residuals(l: &ResidueMatrix, label: KappaLabel, n: u32) -> Result<LiftResiduals> {
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    if n > l.level() {
        return Err(Error::PrecisionExceeded { source_level: l.level(), target: n });
    }
    let d = label.dim();
    if l.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: l.dim() });
    }
    let p = l.prime();
    let a: Vec<BigInt> = form_matrix(label, p).entries.iter().map(|&x| BigInt::from(x)).collect();
    let pn = BigInt::from(p.pow(n));
    let pb = BigInt::from(p.get());
    let e = |i: usize, j: usize| big_entry(l, i, j);
    let quotient = |value: BigInt| -> Result<u64> {
        let (q, r) = value.div_mod_floor(&pn);
        if !r.is_zero() {
            return Err(Error::NotASolutionModPn { level: n });
        }
        Ok(q.mod_floor(&pb).to_u64().expect("reduced mod p"))
    };
    let bilinear = |j: usize, m: usize| -> BigInt { (0..d).map(|i| &a[i] * e(i, j) * e(i, m)).sum() };
    let mut lambdas = Vec::new();
    for (j, aj) in a.iter().enumerate() {
        lambdas.push(quotient(bilinear(j, j) - aj)?);
    }
    let pairs: &[(usize, usize)] = if d == 2 { &[(0, 1)] } else { &[(0, 1), (0, 2), (1, 2)] };
    for &(j, m) in pairs {
        lambdas.push(quotient(bilinear(j, m))?);
    }
    let det = l.det_integer();
    let lambda_d = quotient(det - 1)?;
    Ok(LiftResiduals { lambdas, lambda_d })
}

/// The solvability condition on the residuals.
pub fn constraint_holds(label: KappaLabel, r: &LiftResiduals, c: &FormConstants) -> bool {
    let f = Fp { p: c.p.get() as i128 };
    let lam = |i: usize| r.lambdas[i] as i128;
    match label {
        KappaLabel::MinusV => {
            let v = c.v as i128;
            f.r(v * lam(0) - lam(1) - 2 * v * r.lambda_d as i128) == 0
        }
        KappaLabel::P | KappaLabel::Up => f.r(lam(1)) == 0,
        KappaLabel::Plus => f.r(lam(2)) == 0,
    }
}

/// Number of free digits in a correction.
pub fn free_count(label: KappaLabel) -> usize {
    if label == KappaLabel::Plus {
        3
    } else {
        1
    }
}

fn md(l: &ResidueMatrix, i: usize, j: usize) -> i128 {
    (l.get(i, j) % l.prime().get()).to_u64().expect("digit") as i128
}

/// The correction `Z` mod p for the given free digits.
pub fn correction(
    l: &ResidueMatrix,
    label: KappaLabel,
    r: &LiftResiduals,
    c: &FormConstants,
    free: &[u64],
) -> Result<LiftCorrection> {
    if free.len() != free_count(label) {
        return Err(Error::DimensionMismatch { expected: free_count(label), got: free.len() });
    }
    if !constraint_holds(label, r, c) {
        return Err(Error::ConstraintViolated(format!(
            "residuals {:?}, lambda_d = {} for {label}",
            r.lambdas, r.lambda_d
        )));
    }
    let f = Fp { p: c.p.get() as i128 };
    let v = c.v as i128;
    let l1 = r.lambdas[0] as i128;
    let l2 = r.lambdas[1] as i128;
    let ld = r.lambda_d as i128;
    let fr: Vec<i128> = free.iter().map(|&x| f.r(x as i128)).collect();
    let half = |x: i128| f.div(x, 2);
    let out = match label {
        KappaLabel::MinusV => {
            let l3 = r.lambdas[2] as i128;
            let a = md(l, 0, 0);
            let b = md(l, 1, 0);
            if b == 0 {
                let z21 = fr[0];
                let z11 = f.r(-a * half(l1));
                let z22 = f.r(a * f.div(l2, 2 * v));
                let z12 = f.r(v * z21 - a * l3);
                LiftCorrection {
                    z: vec![z11, z12, z21, z22].into_iter().map(|x| x as u64).collect(),
                    free: vec![(2, 1, fr[0] as u64)],
                }
            } else {
                let z11 = fr[0];
                let vb = v * b;
                let z21 = f.r(f.div(a * z11, vb) + f.div(l1, 2 * vb));
                let z12 = f.r(f.div(a * z11, b) + f.div(a * a * l1, 2 * b) + f.div((a * a - 1) * l2, 2 * vb) - a * l3);
                let z22 = f.r(z11 + a * half(l1) + f.div(a * l2, 2 * v) - b * l3);
                LiftCorrection {
                    z: vec![z11, z12, z21, z22].into_iter().map(|x| x as u64).collect(),
                    free: vec![(1, 1, fr[0] as u64)],
                }
            }
        }
        KappaLabel::P | KappaLabel::Up => {
            let l3 = r.lambdas[2] as i128;
            let a1 = if label == KappaLabel::P { 1 } else { c.u as i128 };
            let s = md(l, 0, 0);
            let cc = md(l, 1, 0);
            let z21 = fr[0];
            let z11 = f.r(-s * f.div(l1, 2 * a1));
            let z12 = f.r(-s * f.div(l3, a1));
            let z22 = f.r(s * f.div(l1, 2 * a1) - f.div(cc * l3, a1) - s * ld);
            LiftCorrection {
                z: vec![z11, z12, z21, z22].into_iter().map(|x| x as u64).collect(),
                free: vec![(2, 1, fr[0] as u64)],
            }
        }
        KappaLabel::Plus => {
            let l4 = r.lambdas[3] as i128;
            let l5 = r.lambdas[4] as i128;
            let l6 = r.lambdas[5] as i128;
            let a = md(l, 0, 0);
            let b = md(l, 1, 0);
            let cc = md(l, 2, 0);
            let dd = md(l, 2, 1);
            let s = md(l, 2, 2);
            let z33 = f.r(s * half(l1) - s * f.div(l2, 2 * v) - cc * l5 + dd * f.div(l6, v) - s * ld);
            let z31 = fr[1];
            let z32 = fr[2];
            let (z11, z12, z13, z21, z22, z23, free_pos) = if b == 0 {
                let z21 = fr[0];
                let z11 = f.r(-a * half(l1));
                let z22 = f.r(s * a * f.div(l2, 2 * v));
                let z12 = f.r(s * v * z21 - a * l4);
                let z13 = f.r(-a * l5);
                let z23 = f.r(s * a * f.div(l6, v));
                (z11, z12, z13, z21, z22, z23, (2, 1))
            } else {
                let z11 = fr[0];
                let z12 = f.r(f.div(s * a * z11, b) + f.div(s * a * a * l1, 2 * b) + s * b * half(l2) - a * l4);
                let z13 = f.r(s * b * l6 - a * l5);
                let z21 = f.r(f.div(a * z11, v * b) + f.div(l1, 2 * v * b));
                let z22 = f.r(s * z11 + s * a * half(l1 + f.div(l2, v)) - b * l4);
                let z23 = f.r(s * a * f.div(l6, v) - b * l5);
                (z11, z12, z13, z21, z22, z23, (1, 1))
            };
            LiftCorrection {
                z: vec![z11, z12, z13, z21, z22, z23, z31, z32, z33].into_iter().map(|x| x as u64).collect(),
                free: vec![(free_pos.0, free_pos.1, fr[0] as u64), (3, 1, z31 as u64), (3, 2, z32 as u64)],
            }
        }
    };
    Ok(out)
}

/// `L + p^n Z` at level `n + 1`, where `n` is the level of `L`.
pub fn apply_correction(l: &ResidueMatrix, z: &LiftCorrection) -> ResidueMatrix {
    let n = l.level();
    let pn = l.prime().pow(n);
    let entries: Vec<BigUint> = l.entries().iter().zip(&z.z).map(|(x, &zi)| x + &pn * zi).collect();
    ResidueMatrix::from_reduced(l.prime(), n + 1, l.dim(), entries)
}

/// The lift for one choice of free digits.
pub fn lift_with(l: &ResidueMatrix, label: KappaLabel, free: &[u64]) -> Result<ResidueMatrix> {
    let c = find_constants(l.prime());
    let r = extract_residuals(l, label, l.level())?;
    let z = correction(l, label, &r, &c, free)?;
    Ok(apply_correction(l, &z))
}

/// Every lift of `L` from its level to the next, indexed by the free
/// digits in lexicographic order: `p` matrices in the plane, `p^3` in
/// space.
pub fn lift_all(l: &ResidueMatrix, label: KappaLabel) -> Result<Vec<ResidueMatrix>> {
    let p = l.prime().get();
    let c = find_constants(l.prime());
    let r = extract_residuals(l, label, l.level())?;
    let k = free_count(label) as u32;
    let total = p.pow(k);
    (0..total)
        .map(|mut idx| {
            let mut free = vec![0u64; k as usize];
            for slot in free.iter_mut().rev() {
                *slot = idx % p;
                idx /= p;
            }
            correction(l, label, &r, &c, &free).map(|z| apply_correction(l, &z))
        })
        .collect()
}

pub fn lift_2d(l: &ResidueMatrix, label: KappaLabel) -> Result<Vec<ResidueMatrix>> {
    if label == KappaLabel::Plus {
        return Err(Error::LabelDimension { label: "+".into(), d: 2 });
    }
    lift_all(l, label)
}

pub fn lift_3d(l: &ResidueMatrix) -> Result<Vec<ResidueMatrix>> {
    lift_all(l, KappaLabel::Plus)
}

/// Policy for the free digits when lifting one step at a time.
pub trait DigitChooser {
    fn choose(&mut self, p: u64, count: usize) -> Vec<u64>;
}

/// Always zero: deterministic lifts.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroDigits;

impl DigitChooser for ZeroDigits {
    fn choose(&mut self, _p: u64, count: usize) -> Vec<u64> {
        vec![0; count]
    }
}

/// Uniform digits from a caller-owned random stream.
pub struct RandomDigits<R: Rng>(pub R);

impl<R: Rng> DigitChooser for RandomDigits<R> {
    fn choose(&mut self, p: u64, count: usize) -> Vec<u64> {
        (0..count).map(|_| self.0.gen_range(0..p)).collect()
    }
}

/// Lift step by step up to level `target`, returning every level from
/// the input's up to `target`.
pub fn lift_tower(
    l: &ResidueMatrix,
    label: KappaLabel,
    target: u32,
    chooser: &mut dyn DigitChooser,
) -> Result<Vec<ResidueMatrix>> {
    if target < l.level() {
        return Err(Error::LevelOrder { from: l.level(), to: target });
    }
    let form = form_matrix(label, l.prime());
    if !form.is_special_orthogonal(l)? {
        return Err(Error::NotASolutionModPn { level: l.level() });
    }
    let mut out = vec![l.clone()];
    while out.last().expect("non-empty").level() < target {
        let cur = out.last().expect("non-empty");
        let free = chooser.choose(l.prime().get(), free_count(label));
        out.push(lift_with(cur, label, &free)?);
    }
    Ok(out)
}

/// The top of [`lift_tower`].
pub fn lift_to_precision(
    l: &ResidueMatrix,
    label: KappaLabel,
    target: u32,
    chooser: &mut dyn DigitChooser,
) -> Result<ResidueMatrix> {
    Ok(lift_tower(l, label, target, chooser)?.pop().expect("non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::OddPrime;

    fn p(x: u64) -> OddPrime {
        OddPrime::new(x).unwrap()
    }

    #[test]
    fn identity_has_zero_residuals() {
        for label in [KappaLabel::MinusV, KappaLabel::P, KappaLabel::Up, KappaLabel::Plus] {
            let id = ResidueMatrix::identity(p(5), 2, label.dim());
            let r = extract_residuals(&id, label, 2).unwrap();
            assert!(r.lambdas.iter().all(|&x| x == 0));
            assert_eq!(r.lambda_d, 0);
        }
    }

    #[test]
    fn identity_lifts() {
        let id = ResidueMatrix::identity(p(3), 1, 2);
        let lifts = lift_2d(&id, KappaLabel::P).unwrap();
        assert_eq!(lifts.len(), 3);
        assert!(lifts.contains(&ResidueMatrix::identity(p(3), 2, 2)));
        let id3 = ResidueMatrix::identity(p(3), 1, 3);
        assert_eq!(lift_3d(&id3).unwrap().len(), 27);
    }

    #[test]
    fn corrupted_input_is_rejected() {
        let m = ResidueMatrix::from_i64(p(3), 1, 2, &[1, 1, 0, 1]).unwrap();
        assert_eq!(extract_residuals(&m, KappaLabel::MinusV, 1), Err(Error::NotASolutionModPn { level: 1 }));
    }

    #[test]
    fn zero_chooser_keeps_identity() {
        let id = ResidueMatrix::identity(p(3), 1, 3);
        let top = lift_to_precision(&id, KappaLabel::Plus, 4, &mut ZeroDigits).unwrap();
        assert!(top.is_identity());
        assert_eq!(top.level(), 4);
    }
}
