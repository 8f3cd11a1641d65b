//! Haar measure on cylinder sets.
//!
//! A cylinder set at level `n` is the preimage of a subset of `G_n`; its
//! measure is the counting measure `|E_n| / |G_n|`. Sets at different
//! levels are compared by refining along the projection fibers.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::Descriptor;
use crate::hensel::{lift_to_precision, RandomDigits};
use crate::matrix::ResidueMatrix;
use crate::padic::OddPrime;
use crate::quotient::{enumerate, fiber_map, Budget, GroupTable};

pub const CYLINDER_SCHEMA: &str = "padic-haar/cylinder/v1";

/// Closed-form Haar measure of a ball of radius `p^{-n}`.
pub fn ball_measure_closed_form(descriptor: Descriptor, n: u32) -> BigRational {
    use crate::forms::KappaLabel::*;
    let p = descriptor.p;
    let n = n as i64;
    let int = |x: u64| BigRational::from_integer(BigInt::from(x));
    match descriptor.label {
        P | Up => p_power(p, -n) / int(2),
        MinusV => p_power(p, 1 - n) / int(p.get() + 1),
        Plus => p_power(p, 1 - 3 * n) / int(2 * (p.get() + 1)),
    }
}

/// Tables for levels `1..=N` and the fiber structure between consecutive
/// levels.
#[derive(Debug, Clone)]
pub struct HaarSpace {
    descriptor: Descriptor,
    tables: Vec<GroupTable>,
    /// `parents[k][i]`: index at level `k + 1` of the projection of element
    /// `i` at level `k + 2`.
    parents: Vec<Vec<usize>>,
    /// `children[k][j]`: indices at level `k + 2` over element `j` at level
    /// `k + 1`.
    children: Vec<Vec<Vec<usize>>>,
}

impl HaarSpace {
    pub fn build(descriptor: Descriptor, max_level: u32, budget: &Budget) -> Result<Self> {
        if max_level == 0 {
            return Err(Error::ZeroLevel);
        }
        let tables = (1..=max_level)
            .map(|n| enumerate(descriptor.label, descriptor.p, n, budget))
            .collect::<Result<Vec<_>>>()?;
        Self::from_tables(tables)
    }

    /// Tables must be consecutive levels starting at 1.
    pub fn from_tables(tables: Vec<GroupTable>) -> Result<Self> {
        let first = tables.first().ok_or(Error::ZeroLevel)?;
        let descriptor = first.descriptor();
        let mut parents = Vec::new();
        let mut children = Vec::new();
        for (k, t) in tables.iter().enumerate() {
            if t.level() != k as u32 + 1 {
                return Err(Error::LevelOrder { from: k as u32 + 1, to: t.level() });
            }
            if t.descriptor() != descriptor {
                return Err(Error::DescriptorMismatch(descriptor.to_string(), t.descriptor().to_string()));
            }
        }
        for w in tables.windows(2) {
            let f = fiber_map(&w[1], &w[0])?;
            parents.push(f.map);
            children.push(f.fibers);
        }
        Ok(HaarSpace { descriptor, tables, parents, children })
    }

    pub fn descriptor(&self) -> Descriptor {
        self.descriptor
    }

    pub fn max_level(&self) -> u32 {
        self.tables.len() as u32
    }

    pub fn table(&self, n: u32) -> Result<&GroupTable> {
        if n == 0 {
            return Err(Error::ZeroLevel);
        }
        self.tables.get(n as usize - 1).ok_or(Error::PrecisionExceeded { source_level: self.max_level(), target: n })
    }

    pub fn order(&self, n: u32) -> Result<usize> {
        Ok(self.table(n)?.order())
    }

    fn check(&self, e: &CylinderSet) -> Result<()> {
        if e.descriptor != self.descriptor {
            return Err(Error::DescriptorMismatch(self.descriptor.to_string(), e.descriptor.to_string()));
        }
        self.table(e.level).map(|_| ())
    }

    pub fn full(&self, n: u32) -> Result<CylinderSet> {
        let order = self.order(n)?;
        Ok(CylinderSet { descriptor: self.descriptor, level: n, members: (0..order).collect() })
    }

    pub fn empty(&self, n: u32) -> Result<CylinderSet> {
        self.table(n)?;
        Ok(CylinderSet { descriptor: self.descriptor, level: n, members: BTreeSet::new() })
    }

    pub fn cylinder(&self, n: u32, members: impl IntoIterator<Item = usize>) -> Result<CylinderSet> {
        let order = self.order(n)?;
        let members: BTreeSet<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&i| i >= order) {
            return Err(Error::Parse(format!("member index {bad} out of range for order {order}")));
        }
        Ok(CylinderSet { descriptor: self.descriptor, level: n, members })
    }

    /// `|E_n| / |G_n|`.
    pub fn measure(&self, e: &CylinderSet) -> Result<BigRational> {
        self.check(e)?;
        Ok(BigRational::new(BigInt::from(e.members.len()), BigInt::from(self.order(e.level)?)))
    }

    /// The ball of radius `p^{-n}` about `center`: a singleton at level `n`.
    pub fn ball(&self, center: &ResidueMatrix, n: u32) -> Result<CylinderSet> {
        let t = self.table(n)?;
        if center.level() < n {
            return Err(Error::PrecisionExceeded { source_level: center.level(), target: n });
        }
        // the center must be a group element at its own level when we can see it
        if let Ok(own) = self.table(center.level()) {
            own.locate(center)?;
        }
        let idx = t.locate(center)?;
        Ok(CylinderSet { descriptor: self.descriptor, level: n, members: BTreeSet::from([idx]) })
    }

    /// The same subset of the profinite group, described at level `l`.
    pub fn refine(&self, e: &CylinderSet, l: u32) -> Result<CylinderSet> {
        self.check(e)?;
        if l < e.level {
            return Err(Error::LevelOrder { from: e.level, to: l });
        }
        self.table(l)?;
        let mut members = e.members.clone();
        for k in e.level..l {
            let ch = &self.children[k as usize - 1];
            members = members.iter().flat_map(|&j| ch[j].iter().copied()).collect();
        }
        Ok(CylinderSet { descriptor: self.descriptor, level: l, members })
    }

    /// Image of a level-`l` set at level `n <= l`.
    pub fn project_set(&self, e: &CylinderSet, n: u32) -> Result<CylinderSet> {
        self.check(e)?;
        if n > e.level || n == 0 {
            return Err(Error::LevelOrder { from: e.level, to: n });
        }
        let mut members = e.members.clone();
        for k in (n..e.level).rev() {
            let par = &self.parents[k as usize - 1];
            members = members.iter().map(|&i| par[i]).collect();
        }
        Ok(CylinderSet { descriptor: self.descriptor, level: n, members })
    }

    /// The lowest level at which `e` is a union of fibers.
    pub fn canonical(&self, e: &CylinderSet) -> Result<CylinderSet> {
        self.check(e)?;
        let mut cur = e.clone();
        while cur.level > 1 {
            let down = self.project_set(&cur, cur.level - 1)?;
            if self.refine(&down, cur.level)? == cur {
                cur = down;
            } else {
                break;
            }
        }
        Ok(cur)
    }

    fn align(&self, a: &CylinderSet, b: &CylinderSet) -> Result<(CylinderSet, CylinderSet)> {
        self.check(a)?;
        self.check(b)?;
        let l = a.level.max(b.level);
        Ok((self.refine(a, l)?, self.refine(b, l)?))
    }

    pub fn union(&self, a: &CylinderSet, b: &CylinderSet) -> Result<CylinderSet> {
        let (a, b) = self.align(a, b)?;
        Ok(CylinderSet { members: a.members.union(&b.members).copied().collect(), ..a })
    }

    pub fn intersection(&self, a: &CylinderSet, b: &CylinderSet) -> Result<CylinderSet> {
        let (a, b) = self.align(a, b)?;
        Ok(CylinderSet { members: a.members.intersection(&b.members).copied().collect(), ..a })
    }

    pub fn difference(&self, a: &CylinderSet, b: &CylinderSet) -> Result<CylinderSet> {
        let (a, b) = self.align(a, b)?;
        Ok(CylinderSet { members: a.members.difference(&b.members).copied().collect(), ..a })
    }

    /// Complement at the set's own level.
    pub fn complement(&self, a: &CylinderSet) -> Result<CylinderSet> {
        self.check(a)?;
        let order = self.order(a.level)?;
        Ok(CylinderSet { members: (0..order).filter(|i| !a.members.contains(i)).collect(), ..a.clone() })
    }

    /// `R E` (left) or `E R` (right).
    pub fn translate(&self, e: &CylinderSet, r: &ResidueMatrix, side: Side) -> Result<CylinderSet> {
        self.check(e)?;
        let t = self.table(e.level)?;
        if r.level() < e.level {
            return Err(Error::PrecisionExceeded { source_level: r.level(), target: e.level });
        }
        let ri = t.locate(r)?;
        let members = e
            .members
            .iter()
            .map(|&x| match side {
                Side::Left => t.mul(ri, x),
                Side::Right => t.mul(x, ri),
            })
            .collect::<Result<BTreeSet<_>>>()?;
        Ok(CylinderSet { members, ..e.clone() })
    }

    /// Upper bounds `mu_n(pi_n(E))` for `n = 1..=N` given the images
    /// `pi_n(E)`; checks that the family is projectively consistent.
    pub fn outer_measure<F>(&self, max_level: u32, mut image: F) -> Result<OuterMeasure>
    where
        F: FnMut(u32, &GroupTable) -> BTreeSet<usize>,
    {
        let mut sets = Vec::new();
        for n in 1..=max_level {
            let t = self.table(n)?;
            sets.push(CylinderSet { descriptor: self.descriptor, level: n, members: image(n, t) });
        }
        for w in sets.windows(2) {
            if self.project_set(&w[1], w[0].level)? != w[0] {
                return Err(Error::InconsistentFamily { level: w[0].level, next: w[1].level });
            }
        }
        let sequence = sets.iter().map(|s| self.measure(s)).collect::<Result<Vec<_>>>()?;
        let infimum = sequence.iter().min().cloned().expect("at least one level");
        Ok(OuterMeasure { sequence, infimum })
    }

    pub fn to_json(&self, e: &CylinderSet) -> Result<CylinderJson> {
        self.check(e)?;
        let t = self.table(e.level)?;
        Ok(CylinderJson {
            schema: CYLINDER_SCHEMA.to_string(),
            descriptor: crate::quotient::DescriptorJson {
                d: self.descriptor.dim(),
                kappa: self.descriptor.label,
                p: self.descriptor.p.get(),
                n: e.level,
            },
            level: e.level,
            member_encodings: e.members.iter().map(|&i| t.element(i).encode()).collect(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// `pi_n^{-1}(members)` at a fixed level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderSet {
    pub descriptor: Descriptor,
    pub level: u32,
    pub members: BTreeSet<usize>,
}

impl CylinderSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

impl fmt::Display for CylinderSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} elements at level {} ({})", self.members.len(), self.level, self.descriptor)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CylinderJson {
    pub schema: String,
    pub descriptor: crate::quotient::DescriptorJson,
    pub level: u32,
    pub member_encodings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OuterMeasure {
    pub sequence: Vec<BigRational>,
    pub infimum: BigRational,
}

impl OuterMeasure {
    pub fn is_non_increasing(&self) -> bool {
        self.sequence.windows(2).all(|w| w[1] <= w[0])
    }
}

/// Uniform sampling from `G_N`.
pub struct HaarSampler<'a> {
    space: Option<&'a HaarSpace>,
    level1: GroupTable,
}

impl<'a> HaarSampler<'a> {
    /// Sample through the tables of `space` when the level is available,
    /// otherwise lift a uniform level-1 element with uniform free digits.
    pub fn new(space: &'a HaarSpace) -> Result<Self> {
        Ok(HaarSampler { space: Some(space), level1: space.table(1)?.clone() })
    }

    /// Sampler that only uses the level-1 table and lifting.
    pub fn lifting(descriptor: Descriptor, budget: &Budget) -> Result<HaarSampler<'static>> {
        Ok(HaarSampler { space: None, level1: enumerate(descriptor.label, descriptor.p, 1, budget)? })
    }

    pub fn sample<R: Rng>(&self, level: u32, rng: &mut R) -> Result<ResidueMatrix> {
        if level == 0 {
            return Err(Error::ZeroLevel);
        }
        if let Some(t) = self.space.and_then(|s| s.table(level).ok()) {
            return Ok(t.element(rng.gen_range(0..t.order())).clone());
        }
        let start = self.level1.element(rng.gen_range(0..self.level1.order())).clone();
        lift_to_precision(&start, self.level1.descriptor().label, level, &mut RandomDigits(rng))
    }
}

/// `p^e` as a rational with possibly negative `e`.
pub fn p_power(p: OddPrime, e: i64) -> BigRational {
    let base = BigUint::from(p.get());
    let mag = BigInt::from(num_traits::pow(base, e.unsigned_abs() as usize));
    if e >= 0 {
        BigRational::from_integer(mag)
    } else {
        BigRational::new(BigInt::from(1), mag)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::KappaLabel;

    fn space(label: KappaLabel, pr: u64, n: u32) -> HaarSpace {
        HaarSpace::build(Descriptor::new(label, OddPrime::new(pr).unwrap()), n, &Budget::default()).unwrap()
    }

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn normalization_and_singletons() {
        let s = space(KappaLabel::Plus, 3, 1);
        assert_eq!(s.measure(&s.full(1).unwrap()).unwrap(), q(1, 1));
        assert_eq!(s.measure(&s.empty(1).unwrap()).unwrap(), q(0, 1));
        let id = ResidueMatrix::identity(OddPrime::new(3).unwrap(), 1, 3);
        assert_eq!(s.measure(&s.ball(&id, 1).unwrap()).unwrap(), q(1, 72));
    }

    #[test]
    fn closed_forms() {
        let p3 = OddPrime::new(3).unwrap();
        let p5 = OddPrime::new(5).unwrap();
        assert_eq!(ball_measure_closed_form(Descriptor::new(KappaLabel::P, p3), 2), q(1, 18));
        assert_eq!(ball_measure_closed_form(Descriptor::new(KappaLabel::MinusV, p5), 1), q(1, 6));
        assert_eq!(ball_measure_closed_form(Descriptor::new(KappaLabel::Plus, p3), 1), q(1, 72));
    }

    #[test]
    fn refine_and_canonical() {
        let s = space(KappaLabel::P, 3, 3);
        let e = s.cylinder(1, [0, 2]).unwrap();
        let r = s.refine(&e, 3).unwrap();
        assert_eq!(r.len(), 2 * 9);
        assert_eq!(s.measure(&r).unwrap(), s.measure(&e).unwrap());
        assert_eq!(s.canonical(&r).unwrap(), e);
        assert_eq!(s.refine(&s.full(1).unwrap(), 3).unwrap(), s.full(3).unwrap());
    }

    #[test]
    fn outer_measure_of_a_point() {
        let s = space(KappaLabel::MinusV, 3, 4);
        let id = ResidueMatrix::identity(OddPrime::new(3).unwrap(), 4, 2);
        let om = s.outer_measure(4, |_, t| BTreeSet::from([t.locate(&id).unwrap()])).unwrap();
        assert!(om.is_non_increasing());
        assert_eq!(om.infimum, q(1, 108));
        let bad = s.outer_measure(2, |n, _| if n == 1 { BTreeSet::from([0]) } else { BTreeSet::new() });
        assert!(matches!(bad, Err(Error::InconsistentFamily { .. })));
    }
}
