//! The integral form of the Haar measure on the plane rotation groups
//! and its comparison with the counting measure.
//!
//! The density `1 / |1 + alpha sigma^2|_p` is locally constant on `Z_p`,
//! so every integral here is a finite sum over residue classes with
//! `vol(Z_p) = 1`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{Descriptor, KappaLabel};
use crate::haar::p_power;
use crate::matrix::ResidueMatrix;
use crate::padic::{abs_p_rational, find_constants, valuation, OddPrime};
use crate::quotient::{enumerate_g2, Budget};
use crate::rotation::{rot2, rot2_params, Branch};

/// A function on `Z_p` constant on classes mod `p^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocallyConstant {
    pub p: OddPrime,
    pub resolution: u32,
    /// `values[c]` on the class `c + p^m Z_p`.
    pub values: Vec<BigRational>,
}

impl LocallyConstant {
    pub fn from_fn(p: OddPrime, resolution: u32, f: impl Fn(u64) -> BigRational) -> Self {
        let m = p.get().pow(resolution);
        LocallyConstant { p, resolution, values: (0..m).map(f).collect() }
    }

    pub fn constant(p: OddPrime, c: BigRational) -> Self {
        LocallyConstant { p, resolution: 0, values: vec![c] }
    }

    pub fn indicator(p: OddPrime, resolution: u32, pred: impl Fn(u64) -> bool) -> Self {
        Self::from_fn(p, resolution, |c| if pred(c) { BigRational::one() } else { BigRational::zero() })
    }

    /// Pointwise product, at the finer of the two resolutions.
    pub fn mul(&self, other: &LocallyConstant) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::PrimeMismatch { left: self.p.get(), right: other.p.get() });
        }
        let m = self.resolution.max(other.resolution);
        let ms = self.p.get().pow(self.resolution);
        let mo = self.p.get().pow(other.resolution);
        Ok(Self::from_fn(self.p, m, |c| &self.values[(c % ms) as usize] * &other.values[(c % mo) as usize]))
    }
}

/// `sum_c f(c) p^{-m}`.
pub fn integrate_zp(f: &LocallyConstant) -> BigRational {
    let total: BigRational = f.values.iter().sum();
    total * p_power(f.p, -(f.resolution as i64))
}

/// `alpha_kappa` as an exact rational.
pub fn alpha(label: KappaLabel, p: OddPrime) -> Result<BigRational> {
    find_constants(p).alpha(label).ok_or(Error::LabelDimension { label: label.to_string(), d: 3 })
}

/// `1 / |1 + alpha sigma^2|_p` at an exact rational point.
pub fn density_at(label: KappaLabel, p: OddPrime, sigma: &BigRational) -> Result<BigRational> {
    let x = BigRational::one() + alpha(label, p)? * sigma * sigma;
    if x.is_zero() {
        return Err(Error::ConstraintViolated("density pole".into()));
    }
    Ok(abs_p_rational(&x, p).recip())
}

/// The density on `Z_p` at resolution `m`. Each class must see a unit
/// `1 + alpha sigma^2`, so the value does not depend on the representative.
pub fn density_kappa(label: KappaLabel, p: OddPrime, resolution: u32) -> Result<LocallyConstant> {
    let a = alpha(label, p)?;
    let m = p.get().pow(resolution);
    let mut values = Vec::with_capacity(m as usize);
    for c in 0..m {
        let s = BigRational::from_integer(BigInt::from(c));
        let x = BigRational::one() + &a * &s * &s;
        let num_val = valuation(x.numer(), p).unwrap_or(u32::MAX);
        let den_val = valuation(x.denom(), p).unwrap_or(0);
        if num_val != 0 || den_val != 0 {
            return Err(Error::ConstraintViolated(format!("1 + alpha sigma^2 is not a unit at sigma = {c}")));
        }
        values.push(abs_p_rational(&x, p).recip());
    }
    Ok(LocallyConstant { p, resolution, values })
}

/// Indicator of the disc `D_k(0) = p^{-k} Z_p`, `k <= 0`.
pub fn disc(p: OddPrime, k: i64) -> Result<LocallyConstant> {
    if k > 0 {
        return Err(Error::Parse(format!("disc radius exponent must be <= 0, got {k}")));
    }
    let r = (-k) as u32;
    let m = p.get().pow(r);
    Ok(LocallyConstant::indicator(p, r, |c| c % m == 0))
}

/// Indicator of the circle `S_j(0) = {|sigma|_p = p^j}`, `j <= 0`.
pub fn circle(p: OddPrime, j: i64) -> Result<LocallyConstant> {
    if j > 0 {
        return Err(Error::Parse(format!("circle exponent must be <= 0, got {j}")));
    }
    let r = (-j) as u32;
    let inner = p.get().pow(r);
    let outer = inner * p.get();
    Ok(LocallyConstant::indicator(p, r + 1, |c| c % inner == 0 && c % outer != 0))
}

/// `int_{D_k(0)} density`.
pub fn disc_integral(label: KappaLabel, p: OddPrime, k: i64) -> Result<BigRational> {
    let r = (-k).max(0) as u32;
    Ok(integrate_zp(&density_kappa(label, p, r)?.mul(&disc(p, k)?)?))
}

/// Check, at the given nonzero `tau`, that the substitution
/// `sigma = -1 / (alpha tau)` turns `density(sigma) |d sigma / d tau|` into
/// `density(tau)`.
pub fn change_of_variables_holds(label: KappaLabel, p: OddPrime, tau: &BigRational) -> Result<bool> {
    let a = alpha(label, p)?;
    let sigma = -(&a * tau).recip();
    let jacobian = abs_p_rational(&(&a * tau * tau), p).recip();
    Ok(density_at(label, p, &sigma)? * jacobian == density_at(label, p, tau)?)
}

/// Domain of the second chart: `p Z_p` for `-v` (exponent -1), `Z_p` for
/// `p` and `up` (exponent 0).
pub fn second_chart_disc(label: KappaLabel) -> i64 {
    match label {
        KappaLabel::MinusV => -1,
        _ => 0,
    }
}

/// Total mass of the integral measure: the principal chart over `Z_p` plus
/// the second chart after the change of variables.
pub fn normalization(label: KappaLabel, p: OddPrime) -> Result<BigRational> {
    let first = disc_integral(label, p, 0)?;
    let second = disc_integral(label, p, second_chart_disc(label))?;
    Ok(first + second)
}

pub fn normalization_closed_form(label: KappaLabel, p: OddPrime) -> BigRational {
    match label {
        KappaLabel::MinusV => BigRational::one() + p_power(p, -1),
        _ => BigRational::from_integer(BigInt::from(2)),
    }
}

/// `max_ij |m_ij|_p` for `m` given mod `p^N`; entries that vanish mod `p^N`
/// count as `p^{-N}` (an upper bound).
pub fn matrix_norm_bound(m: &ResidueMatrix) -> BigRational {
    let p = m.prime();
    let n = m.level();
    m.entries()
        .iter()
        .map(|x| match valuation(&BigInt::from(x.clone()), p) {
            Some(v) if v < n => p_power(p, -(v as i64)),
            _ => p_power(p, -(n as i64)),
        })
        .max()
        .expect("non-empty matrix")
}

/// Outcome of the coordinate-ball scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallImageReport {
    pub kappa: KappaLabel,
    pub p: u64,
    pub n: u32,
    pub scanned: usize,
    pub inside: usize,
    pub norm_equals_abs_sigma: bool,
    pub verified: bool,
}

/// Scan every parameter at level `n + 1`: `||R - I||_p <= p^{-n}` exactly
/// when the branch is principal and `sigma = 0 mod p^n`; on the principal
/// branch `||R(sigma) - I||_p = |sigma|_p`.
pub fn coordinate_ball_image(label: KappaLabel, p: OddPrime, n: u32) -> Result<BallImageReport> {
    let work = n + 1;
    let id = ResidueMatrix::identity(p, work, 2);
    let radius = p_power(p, -(n as i64));
    let pn = p.pow(n);
    let mut scanned = 0;
    let mut inside = 0;
    let mut verified = true;
    let mut norm_ok = true;
    for prm in rot2_params(label, p, work)? {
        scanned += 1;
        let r = rot2(label, &prm)?;
        let norm = matrix_norm_bound(&r.sub(&id)?);
        let in_ball = norm <= radius;
        let expect = prm.branch == Branch::Principal && (prm.sigma.value() % &pn).is_zero();
        if in_ball {
            inside += 1;
        }
        verified &= in_ball == expect;
        if prm.branch == Branch::Principal {
            let s = BigInt::from(prm.sigma.value().clone());
            let abs_sigma = match valuation(&s, p) {
                Some(v) if v < work => p_power(p, -(v as i64)),
                _ => p_power(p, -(work as i64)),
            };
            norm_ok &= norm == abs_sigma;
        } else {
            norm_ok &= norm == BigRational::one();
        }
    }
    Ok(BallImageReport {
        kappa: label,
        p: p.get(),
        n,
        scanned,
        inside,
        norm_equals_abs_sigma: norm_ok,
        verified: verified && norm_ok,
    })
}

/// Both sides of the ball-measure comparison.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureComparison {
    pub kappa: KappaLabel,
    pub p: u64,
    pub n: u32,
    /// `p^{-n} / normalization`.
    pub integral_value: String,
    /// `1 / |G_{kappa,p^n}|`.
    pub counting_value: String,
    pub equal: bool,
}

/// Integral side: the ball `B_{-n}(I)` is the disc `D_{-n}(0)` in the
/// principal chart, so its mass is the disc integral over the total mass.
pub fn compare_measures(label: KappaLabel, p: OddPrime, n: u32, budget: &Budget) -> Result<MeasureComparison> {
    let disc_mass = disc_integral(label, p, -(n as i64))?;
    let integral = disc_mass / normalization(label, p)?;
    let table = enumerate_g2(label, p, n, budget)?;
    let id = ResidueMatrix::identity(p, n, 2);
    table.locate(&id)?;
    let counting = BigRational::new(BigInt::from(1), BigInt::from(table.order()));
    Ok(MeasureComparison {
        kappa: label,
        p: p.get(),
        n,
        integral_value: integral.to_string(),
        counting_value: counting.to_string(),
        equal: integral == counting,
    })
}

/// Convenience for a descriptor.
pub fn compare_for(descriptor: Descriptor, n: u32, budget: &Budget) -> Result<MeasureComparison> {
    compare_measures(descriptor.label, descriptor.p, n, budget)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: u64) -> OddPrime {
        OddPrime::new(x).unwrap()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn basic_integrals() {
        assert_eq!(integrate_zp(&LocallyConstant::constant(p(5), q(1, 1))), q(1, 1));
        assert_eq!(integrate_zp(&disc(p(5), -1).unwrap()), q(1, 5));
        assert_eq!(integrate_zp(&circle(p(5), 0).unwrap()), q(4, 5));
    }

    #[test]
    fn normalizations() {
        assert_eq!(normalization(KappaLabel::P, p(5)).unwrap(), q(2, 1));
        assert_eq!(normalization(KappaLabel::MinusV, p(3)).unwrap(), q(4, 3));
        assert_eq!(normalization(KappaLabel::Up, p(7)).unwrap(), q(2, 1));
    }

    #[test]
    fn comparisons() {
        let b = Budget::default();
        let c = compare_measures(KappaLabel::P, p(3), 1, &b).unwrap();
        assert_eq!((c.integral_value.as_str(), c.equal), ("1/6", true));
        let c = compare_measures(KappaLabel::MinusV, p(3), 2, &b).unwrap();
        assert_eq!((c.integral_value.as_str(), c.equal), ("1/12", true));
        let c = compare_measures(KappaLabel::Up, p(5), 1, &b).unwrap();
        assert_eq!((c.integral_value.as_str(), c.equal), ("1/10", true));
    }

    #[test]
    fn ball_images() {
        assert!(coordinate_ball_image(KappaLabel::MinusV, p(3), 1).unwrap().verified);
        assert!(coordinate_ball_image(KappaLabel::P, p(5), 2).unwrap().verified);
    }
}
