//! Rotations from integer parameters: `R_kappa(sigma)` in the plane,
//! the three reference-axis rotations in space, Cardano products and
//! the partner decomposition.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::KappaLabel;
use crate::matrix::ResidueMatrix;
use crate::padic::{find_constants, FormConstants, OddPrime, ResidueInt};

/// The two integer charts of the projective parameter. `Flipped` stands
/// for the coset reached through the point at infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    Principal,
    Flipped,
}

impl Branch {
    pub fn flip(self) -> Branch {
        match self {
            Branch::Principal => Branch::Flipped,
            Branch::Flipped => Branch::Principal,
        }
    }

    pub fn short(self) -> char {
        match self {
            Branch::Principal => 'P',
            Branch::Flipped => 'F',
        }
    }
}

impl std::str::FromStr for Branch {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p" | "principal" => Ok(Branch::Principal),
            "f" | "flipped" => Ok(Branch::Flipped),
            other => Err(Error::Parse(format!("unknown branch {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BranchedParam {
    pub sigma: ResidueInt,
    pub branch: Branch,
}

impl BranchedParam {
    pub fn new(sigma: ResidueInt, branch: Branch) -> Self {
        BranchedParam { sigma, branch }
    }

    pub fn principal(p: OddPrime, level: u32, sigma: i64) -> Result<Self> {
        Ok(BranchedParam { sigma: ResidueInt::new(p, level, sigma)?, branch: Branch::Principal })
    }

    pub fn flipped(p: OddPrime, level: u32, sigma: i64) -> Result<Self> {
        Ok(BranchedParam { sigma: ResidueInt::new(p, level, sigma)?, branch: Branch::Flipped })
    }

    fn sigma_divisible_by_p(&self) -> bool {
        (self.sigma.value() % self.sigma.prime().get()).is_zero()
    }
}

impl fmt::Display for BranchedParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.branch.short(), self.sigma.value())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            other => Err(Error::Parse(format!("unknown axis {other:?}"))),
        }
    }
}

/// Build a matrix from unit-denominator fractions: every entry is
/// `num / den` with the same unit `den`.
fn from_fraction(p: OddPrime, level: u32, d: usize, nums: &[BigInt], den: &BigInt) -> ResidueMatrix {
    let m = crate::padic::ResidueRing::new(p, level).expect("level >= 1");
    let inv = m.inv(&m.reduce_int(den)).expect("denominator is a unit for integer parameters");
    let entries = nums.iter().map(|x| m.mul(&m.reduce_int(x), &inv)).collect();
    ResidueMatrix::from_reduced(p, level, d, entries)
}

/// `R_kappa(sigma)`, or `-R_kappa(sigma)` on the flipped branch.
pub fn rot2(label: KappaLabel, param: &BranchedParam) -> Result<ResidueMatrix> {
    let p = param.sigma.prime();
    let level = param.sigma.level();
    let c = find_constants(p);
    let s = BigInt::from(param.sigma.value().clone());
    let s2 = &s * &s;
    let pp = BigInt::from(p.get());
    let two = BigInt::from(2);
    let (nums, den) = match label {
        KappaLabel::MinusV => {
            if param.branch == Branch::Flipped && !param.sigma_divisible_by_p() {
                return Err(Error::InvalidBranchParam(format!(
                    "flipped branch for -v needs sigma = 0 mod p, got {}",
                    param.sigma
                )));
            }
            let w = BigInt::from(c.minus_v());
            let a = BigInt::from(1) - &w * &s2;
            (vec![a.clone(), -&two * &w * &s, &two * &s, a], BigInt::from(1) + &w * &s2)
        }
        KappaLabel::P => {
            let a = BigInt::from(1) - &pp * &s2;
            (vec![a.clone(), -&two * &pp * &s, &two * &s, a], BigInt::from(1) + &pp * &s2)
        }
        KappaLabel::Up => {
            let u = BigInt::from(c.u);
            let a = &u - &pp * &s2;
            (vec![a.clone(), -&two * &pp * &s, &two * &u * &s, a], &u + &pp * &s2)
        }
        KappaLabel::Plus => {
            return Err(Error::LabelDimension { label: "+".into(), d: 2 });
        }
    };
    let r = from_fraction(p, level, 2, &nums, &den);
    Ok(match param.branch {
        Branch::Principal => r,
        Branch::Flipped => r.neg(),
    })
}

/// The diagonal sign pattern of the rotation by the point at infinity.
pub fn axis_infinity_signs(axis: Axis) -> [i8; 3] {
    match axis {
        Axis::X => [1, -1, -1],
        Axis::Y => [-1, 1, -1],
        Axis::Z => [-1, -1, 1],
    }
}

/// Reference-axis rotation `R_axis(param)`; the flipped branch is
/// `R_axis(infinity) R_axis(param)`.
pub fn rot3_axis(axis: Axis, param: &BranchedParam) -> Result<ResidueMatrix> {
    let p = param.sigma.prime();
    let level = param.sigma.level();
    let c = find_constants(p);
    let s = BigInt::from(param.sigma.value().clone());
    let s2 = &s * &s;
    let pp = BigInt::from(p.get());
    let v = BigInt::from(c.v);
    let two = BigInt::from(2);
    let z = BigInt::zero;
    let one = || BigInt::from(1);
    let r = match axis {
        Axis::X => {
            let den = &v - &pp * &s2;
            let a = &v + &pp * &s2;
            let nums = vec![den.clone(), z(), z(), z(), a.clone(), &two * &pp * &s, z(), &two * &v * &s, a];
            from_fraction(p, level, 3, &nums, &den)
        }
        Axis::Y => {
            let den = one() + &pp * &s2;
            let e = one() - &pp * &s2;
            let g = &two * &s;
            let nums = vec![e.clone(), z(), -&pp * &g, z(), den.clone(), z(), g, z(), e];
            from_fraction(p, level, 3, &nums, &den)
        }
        Axis::Z => {
            if param.branch == Branch::Flipped && !param.sigma_divisible_by_p() {
                return Err(Error::InvalidBranchParam(format!(
                    "flipped z-rotation needs zeta = 0 mod p, got {}",
                    param.sigma
                )));
            }
            let den = one() - &v * &s2;
            let l = one() + &v * &s2;
            let m = &two * &s;
            let nums = vec![l.clone(), &v * &m, z(), m, l, z(), z(), z(), den.clone()];
            from_fraction(p, level, 3, &nums, &den)
        }
    };
    Ok(match param.branch {
        Branch::Principal => r,
        Branch::Flipped => r.left_signs(&axis_infinity_signs(axis)),
    })
}

/// Parameters of `R_x(xi) R_y(eta) R_z(zeta)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CardanoTriple {
    pub xi: BranchedParam,
    pub eta: BranchedParam,
    pub zeta: BranchedParam,
}

impl CardanoTriple {
    pub fn level(&self) -> u32 {
        self.xi.sigma.level()
    }
}

impl fmt::Display for CardanoTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x:{} y:{} z:{}", self.xi, self.eta, self.zeta)
    }
}

pub fn cardano_compose(t: &CardanoTriple) -> Result<ResidueMatrix> {
    let rx = rot3_axis(Axis::X, &t.xi)?;
    let ry = rot3_axis(Axis::Y, &t.eta)?;
    let rz = rot3_axis(Axis::Z, &t.zeta)?;
    rx.mul(&ry)?.mul(&rz)
}

/// The other Cardano decomposition of the same element.
pub fn cardano_partner(t: &CardanoTriple) -> Result<CardanoTriple> {
    partner_with(t, &find_constants(t.xi.sigma.prime()))
}

pub(crate) fn partner_with(t: &CardanoTriple, c: &FormConstants) -> Result<CardanoTriple> {
    let level = t.level();
    let xi = BranchedParam::new(t.xi.sigma.clone(), t.xi.branch.flip());
    let eta = BranchedParam::new(t.eta.sigma.neg(), t.eta.branch.flip());
    let zeta = if t.zeta.sigma_divisible_by_p() {
        BranchedParam::new(t.zeta.sigma.clone(), t.zeta.branch.flip())
    } else {
        let vz = c.v_mod(level).mul(&t.zeta.sigma)?;
        BranchedParam::new(vz.inv()?, t.zeta.branch)
    };
    Ok(CardanoTriple { xi, eta, zeta })
}

/// Every valid parameter of the plane rotation group at `level`, in a
/// fixed order: principal branch first, then flipped.
pub fn rot2_params(label: KappaLabel, p: OddPrime, level: u32) -> Result<Vec<BranchedParam>> {
    let restricted = label == KappaLabel::MinusV;
    params_for(p, level, restricted)
}

/// Every valid parameter of an axis subgroup at `level`.
pub fn axis_params(axis: Axis, p: OddPrime, level: u32) -> Result<Vec<BranchedParam>> {
    params_for(p, level, axis == Axis::Z)
}

fn params_for(p: OddPrime, level: u32, flipped_needs_multiple_of_p: bool) -> Result<Vec<BranchedParam>> {
    use num_traits::ToPrimitive;
    let m = p.pow(level).to_u64().ok_or_else(|| Error::CapacityExceeded {
        what: "parameter range".into(),
        needed: u128::MAX,
        cap: u64::MAX as u128,
    })?;
    let mut out = Vec::new();
    for s in 0..m {
        out.push(BranchedParam::new(ResidueInt::new(p, level, s)?, Branch::Principal));
    }
    let step = if flipped_needs_multiple_of_p { p.get() } else { 1 };
    for s in (0..m).step_by(step as usize) {
        out.push(BranchedParam::new(ResidueInt::new(p, level, s)?, Branch::Flipped));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::form_matrix;

    fn p(x: u64) -> OddPrime {
        OddPrime::new(x).unwrap()
    }

    #[test]
    fn identity_and_minus_identity() {
        for label in KappaLabel::BINARY {
            let id = rot2(label, &BranchedParam::principal(p(5), 2, 0).unwrap()).unwrap();
            assert!(id.is_identity());
            let m = rot2(label, &BranchedParam::flipped(p(5), 2, 0).unwrap()).unwrap();
            assert_eq!(m, ResidueMatrix::identity(p(5), 2, 2).neg());
        }
    }

    #[test]
    fn minus_v_sigma_one_mod_three() {
        let m = rot2(KappaLabel::MinusV, &BranchedParam::principal(p(3), 1, 1).unwrap()).unwrap();
        assert_eq!(m, ResidueMatrix::from_i64(p(3), 1, 2, &[0, 2, 1, 0]).unwrap());
        assert!(rot2(KappaLabel::MinusV, &BranchedParam::flipped(p(3), 1, 1).unwrap()).is_err());
    }

    #[test]
    fn rot2_is_special_orthogonal() {
        for pr in [3, 5, 7] {
            for label in KappaLabel::BINARY {
                let q = form_matrix(label, p(pr));
                for n in 1..=2 {
                    for prm in rot2_params(label, p(pr), n).unwrap() {
                        let m = rot2(label, &prm).unwrap();
                        assert!(q.is_special_orthogonal(&m).unwrap(), "{label} p={pr} {prm}");
                    }
                }
            }
        }
    }

    #[test]
    fn axis_rotations() {
        let q = form_matrix(KappaLabel::Plus, p(3));
        assert!(rot3_axis(Axis::Z, &BranchedParam::principal(p(3), 1, 0).unwrap()).unwrap().is_identity());
        for eta in 0..3 {
            let m = rot3_axis(Axis::Y, &BranchedParam::principal(p(3), 1, eta).unwrap()).unwrap();
            assert_eq!(m, ResidueMatrix::from_i64(p(3), 1, 3, &[1, 0, 0, 0, 1, 0, 2 * eta, 0, 1]).unwrap());
        }
        assert!(rot3_axis(Axis::Z, &BranchedParam::flipped(p(3), 1, 1).unwrap()).is_err());
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for prm in axis_params(axis, p(3), 2).unwrap() {
                let m = rot3_axis(axis, &prm).unwrap();
                assert!(q.is_special_orthogonal(&m).unwrap(), "{axis:?} {prm}");
            }
        }
    }

    #[test]
    fn partner_basics() {
        let pp = p(3);
        let zero = CardanoTriple {
            xi: BranchedParam::principal(pp, 1, 0).unwrap(),
            eta: BranchedParam::principal(pp, 1, 0).unwrap(),
            zeta: BranchedParam::principal(pp, 1, 0).unwrap(),
        };
        let q = cardano_partner(&zero).unwrap();
        assert_eq!(q.xi.branch, Branch::Flipped);
        assert_eq!(q.eta.branch, Branch::Flipped);
        assert_eq!(q.zeta.branch, Branch::Flipped);
        assert_eq!(cardano_compose(&zero).unwrap(), cardano_compose(&q).unwrap());

        let t = CardanoTriple { zeta: BranchedParam::principal(pp, 1, 1).unwrap(), ..zero };
        let q = cardano_partner(&t).unwrap();
        assert_eq!(q.zeta, BranchedParam::principal(pp, 1, 2).unwrap());
        assert_eq!(cardano_compose(&t).unwrap(), cardano_compose(&q).unwrap());
    }
}
