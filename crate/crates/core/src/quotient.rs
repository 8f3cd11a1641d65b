//! The finite groups `G_{(kappa,)p^n}`: enumeration from parameters,
//! the brute-force solution set of the defining congruences, group
//! tables and the projections between levels.

use std::collections::HashMap;

use num_bigint::{BigUint, ToBigUint};
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{Descriptor, KappaLabel};
use crate::matrix::ResidueMatrix;
use crate::padic::OddPrime;
use crate::rotation::{axis_params, rot2, rot2_params, rot3_axis, Axis, CardanoTriple};

pub const TABLE_SCHEMA: &str = "padic-haar/group-table/v1";

/// Hard caps on exhaustive work.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Candidate matrices scanned by the brute-force oracle.
    pub max_candidates: u128,
    /// Elements in an enumerated table (or triples composed for `d = 3`).
    pub max_table: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_candidates: 100_000_000, max_table: 1_000_000 }
    }
}

impl Budget {
    pub const ENV_CANDIDATES: &'static str = "PADIC_HAAR_MAX_CANDIDATES";
    pub const ENV_TABLE: &'static str = "PADIC_HAAR_MAX_TABLE";

    /// Defaults overridden by the environment variables, when set.
    pub fn from_env() -> Self {
        let mut b = Budget::default();
        if let Some(v) = std::env::var(Self::ENV_CANDIDATES).ok().and_then(|s| s.parse().ok()) {
            b.max_candidates = v;
        }
        if let Some(v) = std::env::var(Self::ENV_TABLE).ok().and_then(|s| s.parse().ok()) {
            b.max_table = v;
        }
        b
    }

    pub fn unlimited() -> Self {
        Budget { max_candidates: u128::MAX, max_table: u128::MAX }
    }

    fn check(what: &str, needed: u128, cap: u128) -> Result<()> {
        if needed > cap {
            Err(Error::CapacityExceeded { what: what.to_string(), needed, cap })
        } else {
            Ok(())
        }
    }
}

fn pow_u128(p: u64, e: u32) -> u128 {
    (p as u128).checked_pow(e).unwrap_or(u128::MAX)
}

/// Closed-form order of `G_{(kappa,)p^n}`.
pub fn closed_form_order(label: KappaLabel, p: OddPrime, n: u32) -> BigUint {
    let pp = p.get();
    match label {
        KappaLabel::P | KappaLabel::Up => 2u32 * p.pow(n),
        KappaLabel::MinusV => p.pow(n - 1) * (pp + 1),
        KappaLabel::Plus => 2u32 * p.pow(3 * n - 1) * (pp + 1),
    }
}

/// A fully enumerated finite group, sorted by digit encoding.
#[derive(Debug, Clone)]
pub struct GroupTable {
    descriptor: Descriptor,
    level: u32,
    elements: Vec<ResidueMatrix>,
    index: HashMap<ResidueMatrix, usize>,
}

impl GroupTable {
    /// Sort, deduplicate and index.
    pub fn from_elements(descriptor: Descriptor, level: u32, mut elements: Vec<ResidueMatrix>) -> Result<Self> {
        for e in &elements {
            if e.prime() != descriptor.p {
                return Err(Error::PrimeMismatch { left: descriptor.p.get(), right: e.prime().get() });
            }
            if e.level() != level {
                return Err(Error::LevelMismatch { left: level, right: e.level() });
            }
            if e.dim() != descriptor.dim() {
                return Err(Error::DimensionMismatch { expected: descriptor.dim(), got: e.dim() });
            }
        }
        elements.par_sort_by_cached_key(|m| m.digits());
        elements.dedup();
        let index = elements.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        Ok(GroupTable { descriptor, level, elements, index })
    }

    pub fn descriptor(&self) -> Descriptor {
        self.descriptor
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[ResidueMatrix] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &ResidueMatrix {
        &self.elements[i]
    }

    pub fn index_of(&self, m: &ResidueMatrix) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn contains(&self, m: &ResidueMatrix) -> bool {
        self.index.contains_key(m)
    }

    pub fn identity(&self) -> usize {
        let id = ResidueMatrix::identity(self.descriptor.p, self.level, self.descriptor.dim());
        self.index_of(&id).expect("identity is in every group table")
    }

    pub fn mul(&self, a: usize, b: usize) -> Result<usize> {
        let prod = self.elements[a].mul(&self.elements[b])?;
        self.index_of(&prod).ok_or_else(|| Error::ClosureViolation(format!("product {prod}")))
    }

    /// Inverse via the adjugate (determinant is 1).
    pub fn inv(&self, a: usize) -> Result<usize> {
        let inv = self.elements[a].adjugate();
        self.index_of(&inv).ok_or_else(|| Error::ClosureViolation(format!("inverse {inv}")))
    }

    /// Look up `m` after projecting it to this table's level.
    pub fn locate(&self, m: &ResidueMatrix) -> Result<usize> {
        if m.prime() != self.descriptor.p {
            return Err(Error::PrimeMismatch { left: self.descriptor.p.get(), right: m.prime().get() });
        }
        if m.dim() != self.descriptor.dim() {
            return Err(Error::DimensionMismatch { expected: self.descriptor.dim(), got: m.dim() });
        }
        let m = m.project(self.level).map_err(|_| Error::NotAGroupElement { level: self.level })?;
        self.index_of(&m).ok_or(Error::NotAGroupElement { level: self.level })
    }

    /// Sets equal as matrices (descriptor and level included).
    pub fn same_elements(&self, other: &GroupTable) -> bool {
        self.descriptor == other.descriptor && self.level == other.level && self.elements == other.elements
    }

    pub fn to_json(&self) -> TableJson {
        TableJson {
            schema: TABLE_SCHEMA.to_string(),
            descriptor: DescriptorJson {
                d: self.descriptor.dim(),
                kappa: self.descriptor.label,
                p: self.descriptor.p.get(),
                n: self.level,
            },
            order: self.order(),
            elements: self.elements.iter().map(|m| m.encode()).collect(),
        }
    }

    pub fn from_json(j: &TableJson) -> Result<Self> {
        let p = OddPrime::new(j.descriptor.p)?;
        let label = KappaLabel::for_dim(j.descriptor.d, Some(j.descriptor.kappa))?;
        let elements = j
            .elements
            .iter()
            .map(|s| ResidueMatrix::decode(p, j.descriptor.n, j.descriptor.d, s))
            .collect::<Result<Vec<_>>>()?;
        let t = GroupTable::from_elements(Descriptor::new(label, p), j.descriptor.n, elements)?;
        if t.order() != j.order {
            return Err(Error::Parse(format!("order {} does not match {} elements", j.order, t.order())));
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptorJson {
    pub d: usize,
    pub kappa: KappaLabel,
    pub p: u64,
    pub n: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableJson {
    pub schema: String,
    pub descriptor: DescriptorJson,
    pub order: usize,
    pub elements: Vec<String>,
}

/// `G_{kappa,p^n}` from `rot2` over every valid parameter.
pub fn enumerate_g2(label: KappaLabel, p: OddPrime, n: u32, budget: &Budget) -> Result<GroupTable> {
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    if label == KappaLabel::Plus {
        return Err(Error::LabelDimension { label: "+".into(), d: 2 });
    }
    Budget::check("parametrized d=2 enumeration", 2 * pow_u128(p.get(), n), budget.max_table)?;
    let params = rot2_params(label, p, n)?;
    let count = params.len();
    let elements = params.par_iter().map(|s| rot2(label, s)).collect::<Result<Vec<_>>>()?;
    let t = GroupTable::from_elements(Descriptor::new(label, p), n, elements)?;
    if t.order() != count {
        return Err(Error::ClosureViolation(format!("{count} parameters gave only {} distinct matrices", t.order())));
    }
    Ok(t)
}

/// Bookkeeping from the Cardano enumeration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CardanoStats {
    pub triples: usize,
    pub distinct: usize,
    pub min_multiplicity: usize,
    pub max_multiplicity: usize,
}

pub fn cardano_triple_count(p: OddPrime, n: u32) -> u128 {
    let pn = pow_u128(p.get(), n);
    let z = pow_u128(p.get(), n - 1) * (p.get() as u128 + 1);
    (2 * pn).saturating_mul(2 * pn).saturating_mul(z)
}

/// All Cardano triples at level `n`, in a fixed order.
pub fn cardano_triples(p: OddPrime, n: u32) -> Result<Vec<CardanoTriple>> {
    let xs = axis_params(Axis::X, p, n)?;
    let ys = axis_params(Axis::Y, p, n)?;
    let zs = axis_params(Axis::Z, p, n)?;
    let mut out = Vec::with_capacity(xs.len() * ys.len() * zs.len());
    for x in &xs {
        for y in &ys {
            for z in &zs {
                out.push(CardanoTriple { xi: x.clone(), eta: y.clone(), zeta: z.clone() });
            }
        }
    }
    Ok(out)
}

/// `G_{p^n}` by composing every Cardano triple. Each element must be hit
/// exactly twice.
pub fn enumerate_g3(p: OddPrime, n: u32, budget: &Budget) -> Result<(GroupTable, CardanoStats)> {
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    Budget::check("Cardano triples for d=3 enumeration", cardano_triple_count(p, n), budget.max_table)?;
    let xs = axis_params(Axis::X, p, n)?.iter().map(|x| rot3_axis(Axis::X, x)).collect::<Result<Vec<_>>>()?;
    let ys = axis_params(Axis::Y, p, n)?.iter().map(|y| rot3_axis(Axis::Y, y)).collect::<Result<Vec<_>>>()?;
    let zs = axis_params(Axis::Z, p, n)?.iter().map(|z| rot3_axis(Axis::Z, z)).collect::<Result<Vec<_>>>()?;
    let mut xy = Vec::with_capacity(xs.len() * ys.len());
    for x in &xs {
        for y in &ys {
            xy.push(x.mul(y)?);
        }
    }
    let products: Vec<ResidueMatrix> = xy
        .par_iter()
        .map(|a| zs.iter().map(|z| a.mul(z)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let triples = products.len();
    let mut counts: HashMap<ResidueMatrix, usize> = HashMap::with_capacity(triples / 2 + 1);
    for m in products {
        *counts.entry(m).or_insert(0) += 1;
    }
    let min = counts.values().copied().min().unwrap_or(0);
    let max = counts.values().copied().max().unwrap_or(0);
    if let Some((m, &c)) = counts.iter().find(|(_, &c)| c != 2) {
        return Err(Error::CardanoMultiplicity { element: m.to_string(), found: c });
    }
    let distinct = counts.len();
    let t = GroupTable::from_elements(Descriptor::new(KappaLabel::Plus, p), n, counts.into_keys().collect())?;
    Ok((t, CardanoStats { triples, distinct, min_multiplicity: min, max_multiplicity: max }))
}

/// Every Cardano triple composing to `m`, by scanning all triples at its
/// level.
pub fn cardano_decompositions(m: &ResidueMatrix, budget: &Budget) -> Result<Vec<CardanoTriple>> {
    if m.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: m.dim() });
    }
    let (p, n) = (m.prime(), m.level());
    Budget::check("Cardano triples to scan", cardano_triple_count(p, n), budget.max_table)?;
    let xs = axis_params(Axis::X, p, n)?;
    let ys = axis_params(Axis::Y, p, n)?;
    let zs = axis_params(Axis::Z, p, n)?;
    let rz = zs.iter().map(|z| rot3_axis(Axis::Z, z)).collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for x in &xs {
        let rx = rot3_axis(Axis::X, x)?;
        for y in &ys {
            let rxy = rx.mul(&rot3_axis(Axis::Y, y)?)?;
            for (z, r) in zs.iter().zip(&rz) {
                if rxy.mul(r)? == *m {
                    out.push(CardanoTriple { xi: x.clone(), eta: y.clone(), zeta: z.clone() });
                }
            }
        }
    }
    Ok(out)
}

/// Parametrized enumeration for any label.
pub fn enumerate(label: KappaLabel, p: OddPrime, n: u32, budget: &Budget) -> Result<GroupTable> {
    match label {
        KappaLabel::Plus => enumerate_g3(p, n, budget).map(|(t, _)| t),
        _ => enumerate_g2(label, p, n, budget),
    }
}

pub fn brute_force_candidates(d: usize, p: OddPrime, n: u32) -> u128 {
    let m = pow_u128(p.get(), n);
    let mut c: u128 = 1;
    for _ in 0..d * d {
        c = c.saturating_mul(m);
    }
    c
}

/// Every `d x d` matrix over `Z/p^n` with `L^T A L = A` and `det L = 1`,
/// by exhaustive scan. Column conditions are checked as soon as the
/// column is complete; nothing else prunes the search.
pub fn brute_force_gtilde(label: KappaLabel, p: OddPrime, n: u32, budget: &Budget) -> Result<GroupTable> {
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    let d = label.dim();
    let needed = brute_force_candidates(d, p, n);
    Budget::check("brute-force candidates", needed, budget.max_candidates)?;
    let m = pow_u128(p.get(), n);
    let m64 = u64::try_from(m).map_err(|_| Error::CapacityExceeded {
        what: "brute-force modulus".into(),
        needed: m,
        cap: u64::MAX as u128,
    })?;
    let a: Vec<u128> = Descriptor::new(label, p).form().entries.iter().map(|&x| (x as u128) % m).collect();
    let rows: Vec<Vec<u64>> = match d {
        2 => scan2(m64, &a),
        3 => scan3(m64, &a),
        _ => unreachable!(),
    };
    let elements = rows
        .into_iter()
        .map(|e| {
            let big: Vec<BigUint> = e.iter().map(|&x| x.to_biguint().expect("non-negative")).collect();
            ResidueMatrix::from_reduced(p, n, d, big)
        })
        .collect();
    GroupTable::from_elements(Descriptor::new(label, p), n, elements)
}

// Entries are indexed column-first inside the scans, (l11, l21) then
// (l12, l22); results are returned row-major.
fn scan2(m: u64, a: &[u128]) -> Vec<Vec<u64>> {
    let mm = m as u128;
    let norm = |x: u64, y: u64| (a[0] * (x as u128) * (x as u128) + a[1] * (y as u128) * (y as u128)) % mm;
    let firsts: Vec<(u64, u64)> =
        (0..m).flat_map(|x| (0..m).map(move |y| (x, y))).filter(|&(x, y)| norm(x, y) == a[0]).collect();
    firsts
        .par_iter()
        .flat_map_iter(|&(l11, l21)| {
            let mut out = Vec::new();
            for l12 in 0..m {
                for l22 in 0..m {
                    if norm(l12, l22) != a[1] {
                        continue;
                    }
                    let ip = (a[0] * l11 as u128 * l12 as u128 + a[1] * l21 as u128 * l22 as u128) % mm;
                    if ip != 0 {
                        continue;
                    }
                    let det = ((l11 as u128 * l22 as u128) % mm + mm - (l12 as u128 * l21 as u128) % mm) % mm;
                    if det == 1 % mm {
                        out.push(vec![l11, l12, l21, l22]);
                    }
                }
            }
            out
        })
        .collect()
}

fn scan3(m: u64, a: &[u128]) -> Vec<Vec<u64>> {
    let mm = m as u128;
    let cols: Vec<[u64; 3]> = (0..m).flat_map(|x| (0..m).flat_map(move |y| (0..m).map(move |z| [x, y, z]))).collect();
    let q = |c: &[u64; 3]| (0..3).map(|i| a[i] * c[i] as u128 * c[i] as u128).sum::<u128>() % mm;
    let b = |c: &[u64; 3], e: &[u64; 3]| (0..3).map(|i| a[i] * c[i] as u128 * e[i] as u128).sum::<u128>() % mm;
    let by_norm = |target: u128| -> Vec<[u64; 3]> { cols.iter().copied().filter(|c| q(c) == target).collect() };
    let c1s = by_norm(a[0]);
    let c2s = by_norm(a[1]);
    let c3s = by_norm(a[2]);
    c1s.par_iter()
        .flat_map_iter(|c1| {
            let mut out = Vec::new();
            for c2 in &c2s {
                if b(c1, c2) != 0 {
                    continue;
                }
                for c3 in &c3s {
                    if b(c1, c3) != 0 || b(c2, c3) != 0 {
                        continue;
                    }
                    if det3(c1, c2, c3, mm) == 1 % mm {
                        out.push(vec![c1[0], c2[0], c3[0], c1[1], c2[1], c3[1], c1[2], c2[2], c3[2]]);
                    }
                }
            }
            out
        })
        .collect()
}

fn det3(c1: &[u64; 3], c2: &[u64; 3], c3: &[u64; 3], m: u128) -> u128 {
    // columns c1, c2, c3; det of the matrix with these columns
    let e = |c: &[u64; 3], i: usize| c[i] as u128 % m;
    let pos =
        (e(c1, 0) * e(c2, 1) % m * e(c3, 2) + e(c2, 0) * e(c3, 1) % m * e(c1, 2) + e(c3, 0) * e(c1, 1) % m * e(c2, 2))
            % m;
    let neg =
        (e(c1, 0) * e(c3, 1) % m * e(c2, 2) + e(c2, 0) * e(c1, 1) % m * e(c3, 2) + e(c3, 0) * e(c2, 1) % m * e(c1, 2))
            % m;
    (pos + m - neg) % m
}

/// Result of projecting a level-`l` table to level `n`.
#[derive(Debug, Clone)]
pub struct Projection {
    pub image: GroupTable,
    /// `map[i]` is the image index of element `i` of the source table.
    pub map: Vec<usize>,
    /// `fibers[j]` lists the source indices over image element `j`.
    pub fibers: Vec<Vec<usize>>,
}

impl Projection {
    pub fn fiber_sizes(&self) -> Vec<usize> {
        self.fibers.iter().map(|f| f.len()).collect()
    }
}

/// Reduce every element of `table` to level `n`.
pub fn project_group(table: &GroupTable, n: u32) -> Result<Projection> {
    if n == 0 {
        return Err(Error::ZeroLevel);
    }
    if n > table.level() {
        return Err(Error::LevelOrder { from: table.level(), to: n });
    }
    let projected: Vec<ResidueMatrix> =
        table.elements().par_iter().map(|m| m.project(n)).collect::<Result<Vec<_>>>()?;
    let image = GroupTable::from_elements(table.descriptor(), n, projected.clone())?;
    let map: Vec<usize> = projected.iter().map(|m| image.index_of(m).expect("image contains projection")).collect();
    let mut fibers = vec![Vec::new(); image.order()];
    for (i, &j) in map.iter().enumerate() {
        fibers[j].push(i);
    }
    Ok(Projection { image, map, fibers })
}

/// Projection onto an already built target table. Fails if the target
/// misses an image point.
pub fn fiber_map(source: &GroupTable, target: &GroupTable) -> Result<Projection> {
    if source.descriptor() != target.descriptor() {
        return Err(Error::DescriptorMismatch(source.descriptor().to_string(), target.descriptor().to_string()));
    }
    let n = target.level();
    if n > source.level() {
        return Err(Error::LevelOrder { from: source.level(), to: n });
    }
    let map = source
        .elements()
        .par_iter()
        .map(|m| {
            let pm = m.project(n)?;
            target.index_of(&pm).ok_or_else(|| Error::ClosureViolation(format!("projection {pm} missing")))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut fibers = vec![Vec::new(); target.order()];
    for (i, &j) in map.iter().enumerate() {
        fibers[j].push(i);
    }
    Ok(Projection { image: target.clone(), map, fibers })
}

/// `|G_n|` as a machine integer, for callers that index tables.
pub fn order_u64(label: KappaLabel, p: OddPrime, n: u32) -> Option<u64> {
    closed_form_order(label, p, n).to_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: u64) -> OddPrime {
        OddPrime::new(x).unwrap()
    }

    #[test]
    fn small_orders() {
        let b = Budget::default();
        assert_eq!(enumerate_g2(KappaLabel::P, p(3), 1, &b).unwrap().order(), 6);
        assert_eq!(enumerate_g2(KappaLabel::MinusV, p(3), 1, &b).unwrap().order(), 4);
        assert_eq!(enumerate_g2(KappaLabel::MinusV, p(5), 2, &b).unwrap().order(), 30);
        let (t, stats) = enumerate_g3(p(3), 1, &b).unwrap();
        assert_eq!(t.order(), 72);
        assert_eq!(stats.triples, 144);
    }

    #[test]
    fn brute_force_small() {
        let b = Budget::default();
        let t = brute_force_gtilde(KappaLabel::P, p(3), 1, &b).unwrap();
        assert_eq!(t.order(), 6);
        // shape (s, 0; c, s)
        for m in t.elements() {
            assert_eq!(m.get(0, 1).to_u64(), Some(0));
            assert_eq!(m.get(0, 0), m.get(1, 1));
        }
        assert_eq!(brute_force_gtilde(KappaLabel::MinusV, p(3), 1, &b).unwrap().order(), 4);
    }

    #[test]
    fn budget_errors() {
        let tiny = Budget { max_candidates: 10, max_table: 10 };
        match brute_force_gtilde(KappaLabel::P, p(3), 1, &tiny) {
            Err(Error::CapacityExceeded { needed, .. }) => assert_eq!(needed, 81),
            other => panic!("{other:?}"),
        }
        assert!(matches!(enumerate_g2(KappaLabel::P, p(3), 2, &tiny), Err(Error::CapacityExceeded { .. })));
    }

    #[test]
    fn cyclic_minus_v() {
        let t = enumerate_g2(KappaLabel::MinusV, p(3), 1, &Budget::default()).unwrap();
        let e = t.identity();
        let gen = (0..4).find(|&x| t.mul(x, x).unwrap() != e).unwrap();
        let x2 = t.mul(gen, gen).unwrap();
        assert_eq!(t.mul(x2, x2).unwrap(), e);
        for x in 0..4 {
            assert_eq!(t.mul(e, x).unwrap(), x);
            assert_eq!(t.inv(t.inv(x).unwrap()).unwrap(), x);
        }
    }

    #[test]
    fn json_roundtrip() {
        let t = enumerate_g2(KappaLabel::Up, p(5), 1, &Budget::default()).unwrap();
        let s = serde_json::to_string(&t.to_json()).unwrap();
        let back: TableJson = serde_json::from_str(&s).unwrap();
        assert!(GroupTable::from_json(&back).unwrap().same_elements(&t));
    }
}
