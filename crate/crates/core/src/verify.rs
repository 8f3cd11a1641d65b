//! The full verification suite: every quantitative claim checked
//! exactly on a fixed grid, reported check by check.

use std::collections::{BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{Descriptor, KappaLabel};
use crate::haar::{ball_measure_closed_form, p_power, HaarSampler, HaarSpace, Side};
use crate::hensel::{apply_correction, correction, extract_residuals, free_count, lift_all};
use crate::integral::{
    change_of_variables_holds, circle, compare_measures, coordinate_ball_image, disc_integral, integrate_zp,
    normalization, normalization_closed_form, second_chart_disc,
};
use crate::matrix::ResidueMatrix;
use crate::padic::{find_constants, OddPrime};
use crate::quotient::{
    brute_force_gtilde, cardano_triples, closed_form_order, enumerate, enumerate_g3, fiber_map, Budget, GroupTable,
};
use crate::rotation::{cardano_partner, rot3_axis, Axis, BranchedParam, CardanoTriple};

pub const REPORT_SCHEMA: &str = "padic-haar/verify/v1";

pub const GROUPS: [&str; 8] = ["orders", "oracle", "hensel", "cardano", "balls", "invariance", "integral", "sampler"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub group: String,
    pub name: String,
    /// The formula or statement being checked.
    pub claim: String,
    pub computed: String,
    pub expected: String,
    pub status: Status,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema: String,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    /// Restrict to these groups; empty means all.
    pub only: Vec<String>,
    /// Restrict grids to these primes; empty means the default grids.
    pub primes: Vec<u64>,
    pub budget: Budget,
    pub seed: u64,
    /// Negative control: perturb the closed-form orders by one.
    pub tamper: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { only: Vec::new(), primes: Vec::new(), budget: Budget::from_env(), seed: 0, tamper: false }
    }
}

struct Ctx<'a> {
    opts: &'a VerifyOptions,
    out: Vec<CheckResult>,
    group: &'static str,
    tables: HashMap<(KappaLabel, u64, u32), GroupTable>,
}

impl<'a> Ctx<'a> {
    fn wants_p(&self, p: u64) -> bool {
        self.opts.primes.is_empty() || self.opts.primes.contains(&p)
    }

    fn push(&mut self, name: String, claim: &str, computed: String, expected: String, ok: bool) {
        self.out.push(CheckResult {
            group: self.group.to_string(),
            name,
            claim: claim.to_string(),
            computed,
            expected,
            status: if ok { Status::Pass } else { Status::Fail },
        });
    }

    fn error(&mut self, name: String, claim: &str, e: Error) {
        let status = if matches!(e, Error::CapacityExceeded { .. }) { Status::Skipped } else { Status::Fail };
        self.out.push(CheckResult {
            group: self.group.to_string(),
            name,
            claim: claim.to_string(),
            computed: e.to_string(),
            expected: String::new(),
            status,
        });
    }

    /// Run `f`, turning an error into a failed or skipped check.
    fn guard(&mut self, name: String, claim: &str, f: impl FnOnce(&mut Self) -> Result<(String, String, bool)>) {
        match f(self) {
            Ok((c, e, ok)) => self.push(name, claim, c, e, ok),
            Err(e) => self.error(name, claim, e),
        }
    }

    fn table(&mut self, label: KappaLabel, p: u64, n: u32) -> Result<GroupTable> {
        if let Some(t) = self.tables.get(&(label, p, n)) {
            return Ok(t.clone());
        }
        let t = enumerate(label, OddPrime::new(p)?, n, &self.opts.budget)?;
        self.tables.insert((label, p, n), t.clone());
        Ok(t)
    }
}

pub fn run(opts: &VerifyOptions) -> Result<VerifyReport> {
    for g in &opts.only {
        if !GROUPS.contains(&g.as_str()) {
            return Err(Error::Parse(format!("unknown check group {g:?}; known: {}", GROUPS.join(", "))));
        }
    }
    let mut ctx = Ctx { opts, out: Vec::new(), group: "", tables: HashMap::new() };
    let selected = |g: &str| opts.only.is_empty() || opts.only.iter().any(|x| x == g);
    type GroupFn = fn(&mut Ctx<'_>);
    let all: [(&'static str, GroupFn); 8] = [
        ("orders", orders),
        ("oracle", oracle),
        ("hensel", hensel),
        ("cardano", cardano),
        ("balls", balls),
        ("invariance", invariance),
        ("integral", integral_form),
        ("sampler", sampler),
    ];
    for (name, f) in all {
        if selected(name) {
            ctx.group = name;
            f(&mut ctx);
        }
    }
    let count = |s: Status| ctx.out.iter().filter(|c| c.status == s).count();
    Ok(VerifyReport {
        schema: REPORT_SCHEMA.to_string(),
        passed: count(Status::Pass),
        failed: count(Status::Fail),
        skipped: count(Status::Skipped),
        checks: ctx.out,
    })
}

/// `(label, p, n)` for the order grid.
pub fn order_grid() -> Vec<(KappaLabel, u64, u32)> {
    let mut g = Vec::new();
    for p in [3, 5, 7, 11] {
        for label in KappaLabel::BINARY {
            for n in 1..=3 {
                g.push((label, p, n));
            }
        }
    }
    for (p, n) in [(3, 1), (3, 2), (5, 1), (5, 2), (7, 1)] {
        g.push((KappaLabel::Plus, p, n));
    }
    g
}

fn order_claim(label: KappaLabel) -> &'static str {
    match label {
        KappaLabel::P | KappaLabel::Up => "|G_{kappa,p^n}| = 2 p^n",
        KappaLabel::MinusV => "|G_{-v,p^n}| = p^(n-1) (p+1)",
        KappaLabel::Plus => "|G_{p^n}| = 2 p^(3n-1) (p+1)",
    }
}

fn orders(ctx: &mut Ctx<'_>) {
    for (label, p, n) in order_grid() {
        if !ctx.wants_p(p) {
            continue;
        }
        let tamper = ctx.opts.tamper;
        ctx.guard(format!("order d={} kappa={label} p={p} n={n}", label.dim()), order_claim(label), |c| {
            let t = c.table(label, p, n)?;
            let mut want = closed_form_order(label, OddPrime::new(p)?, n);
            if tamper {
                want += 1u32;
            }
            Ok((t.order().to_string(), want.to_string(), want == t.order().into()))
        });
    }
}

pub fn oracle_grid() -> Vec<(KappaLabel, u64, u32)> {
    let mut g = Vec::new();
    for (p, n) in [(3, 1), (3, 2), (3, 3), (3, 4), (5, 1), (5, 2), (7, 1), (7, 2), (11, 1)] {
        for label in KappaLabel::BINARY {
            g.push((label, p, n));
        }
    }
    for p in [3, 5, 7] {
        g.push((KappaLabel::Plus, p, 1));
    }
    g
}

fn oracle(ctx: &mut Ctx<'_>) {
    for (label, p, n) in oracle_grid() {
        if !ctx.wants_p(p) {
            continue;
        }
        ctx.guard(
            format!("brute force d={} kappa={label} p={p} n={n}", label.dim()),
            "parametrized group = all solutions of L^T A L = A, det L = 1 mod p^n",
            |c| {
                let t = c.table(label, p, n)?;
                let o = brute_force_gtilde(label, OddPrime::new(p)?, n, &c.opts.budget)?;
                Ok((format!("{} solutions", o.order()), format!("{} elements", t.order()), o.same_elements(&t)))
            },
        );
    }
}

pub fn hensel_grid() -> Vec<(KappaLabel, u64, u32)> {
    let mut g = Vec::new();
    for p in [3, 5, 7, 11] {
        for label in KappaLabel::BINARY {
            for n in 1..=2 {
                g.push((label, p, n));
            }
        }
    }
    g.push((KappaLabel::Plus, 3, 1));
    g.push((KappaLabel::Plus, 5, 1));
    g
}

/// Lift every element of `G_n`; compare each lift set with the fiber of
/// the projection from `G_{n+1}`. Returns (elements checked, failures).
pub fn lifts_match_fibers(lo: &GroupTable, hi: &GroupTable) -> Result<(usize, usize)> {
    let label = lo.descriptor().label;
    let p = lo.descriptor().p.get();
    let want = if label == KappaLabel::Plus { p.pow(3) } else { p } as usize;
    let fm = fiber_map(hi, lo)?;
    let form = lo.descriptor().form();
    let mut bad = 0;
    for (i, m) in lo.elements().iter().enumerate() {
        let lifts = lift_all(m, label)?;
        let set: HashSet<&ResidueMatrix> = lifts.iter().collect();
        let fiber: HashSet<&ResidueMatrix> = fm.fibers[i].iter().map(|&j| hi.element(j)).collect();
        let valid = lifts.iter().all(|l| form.is_special_orthogonal(l).unwrap_or(false));
        if set.len() != want || set != fiber || !valid {
            bad += 1;
        }
    }
    Ok((lo.order(), bad))
}

fn hensel(ctx: &mut Ctx<'_>) {
    for (label, p, n) in hensel_grid() {
        if !ctx.wants_p(p) {
            continue;
        }
        let claim = if label == KappaLabel::Plus {
            "each solution mod p^n has exactly p^3 lifts mod p^(n+1), equal to its projection fiber"
        } else {
            "each solution mod p^n has exactly p lifts mod p^(n+1), equal to its projection fiber"
        };
        ctx.guard(format!("lifts d={} kappa={label} p={p} n={n}", label.dim()), claim, |c| {
            let lo = c.table(label, p, n)?;
            let hi = c.table(label, p, n + 1)?;
            let (total, bad) = lifts_match_fibers(&lo, &hi)?;
            Ok((format!("{bad} of {total} elements mismatched"), "0 mismatched".into(), bad == 0))
        });
    }
    // distinct free digits give distinct corrections
    for p in [3u64, 5] {
        if !ctx.wants_p(p) {
            continue;
        }
        ctx.guard(format!("distinct corrections d=3 p={p}"), "different Z mod p give different lifts", |c| {
            let t = c.table(KappaLabel::Plus, p, 1)?;
            let consts = find_constants(OddPrime::new(p)?);
            let mut bad = 0;
            for m in t.elements() {
                let r = extract_residuals(m, KappaLabel::Plus, 1)?;
                let mut seen = HashSet::new();
                let k = free_count(KappaLabel::Plus) as u32;
                for idx in 0..p.pow(k) {
                    let free = [idx / (p * p), (idx / p) % p, idx % p];
                    let z = correction(m, KappaLabel::Plus, &r, &consts, &free)?;
                    seen.insert(apply_correction(m, &z));
                }
                if seen.len() != p.pow(3) as usize {
                    bad += 1;
                }
            }
            Ok((format!("{bad} elements with colliding lifts"), "0".into(), bad == 0))
        });
    }
}

/// Outcome of the exhaustive Cardano check at one level.
#[derive(Debug, Clone)]
pub struct CardanoCheck {
    pub triples: usize,
    pub elements: usize,
    pub group_order: usize,
    pub min_multiplicity: usize,
    pub max_multiplicity: usize,
    /// The partner map is an involution without fixed points and the two
    /// triples over every element are partners.
    pub partners_ok: bool,
}

impl CardanoCheck {
    pub fn holds(&self) -> bool {
        self.min_multiplicity == 2
            && self.max_multiplicity == 2
            && self.partners_ok
            && self.elements == self.group_order
    }
}

pub fn cardano_check(p: OddPrime, n: u32, budget: &Budget) -> Result<CardanoCheck> {
    let (table, _) = enumerate_g3(p, n, budget)?;
    let triples = cardano_triples(p, n)?;
    let mut cache: HashMap<(Axis, BranchedParam), ResidueMatrix> = HashMap::new();
    let mut axis = |a: Axis, prm: &BranchedParam| -> Result<ResidueMatrix> {
        if let Some(m) = cache.get(&(a, prm.clone())) {
            return Ok(m.clone());
        }
        let m = rot3_axis(a, prm)?;
        cache.insert((a, prm.clone()), m.clone());
        Ok(m)
    };
    let mut elem_of = Vec::with_capacity(triples.len());
    let mut count = vec![0usize; table.order()];
    let mut index: HashMap<&CardanoTriple, usize> = HashMap::new();
    for (k, t) in triples.iter().enumerate() {
        let m = axis(Axis::X, &t.xi)?.mul(&axis(Axis::Y, &t.eta)?)?.mul(&axis(Axis::Z, &t.zeta)?)?;
        let e = table.index_of(&m).ok_or_else(|| Error::ClosureViolation(format!("triple {t} gives {m}")))?;
        elem_of.push(e);
        count[e] += 1;
        index.insert(t, k);
    }
    let mut partners_ok = true;
    for (k, t) in triples.iter().enumerate() {
        let q = cardano_partner(t)?;
        partners_ok &= cardano_partner(&q)? == *t;
        match index.get(&q) {
            Some(&qk) => partners_ok &= qk != k && elem_of[qk] == elem_of[k],
            None => partners_ok = false,
        }
    }
    let hit: Vec<usize> = count.iter().copied().filter(|&c| c > 0).collect();
    Ok(CardanoCheck {
        triples: triples.len(),
        elements: hit.len(),
        group_order: table.order(),
        min_multiplicity: count.iter().copied().min().unwrap_or(0),
        max_multiplicity: count.iter().copied().max().unwrap_or(0),
        partners_ok,
    })
}

fn cardano(ctx: &mut Ctx<'_>) {
    for (p, n) in [(3u64, 1u32), (3, 2), (5, 1), (5, 2)] {
        if !ctx.wants_p(p) {
            continue;
        }
        ctx.guard(
            format!("Cardano duplicity p={p} n={n}"),
            "every element of G_{p^n} is R_x R_y R_z for exactly two triples, related by the partner map",
            |c| {
                let r = cardano_check(OddPrime::new(p)?, n, &c.opts.budget)?;
                Ok((
                    format!(
                        "{} triples over {} of {} elements, multiplicity {}..{}, partners {}",
                        r.triples, r.elements, r.group_order, r.min_multiplicity, r.max_multiplicity, r.partners_ok
                    ),
                    "multiplicity 2..2, partners true".into(),
                    r.holds(),
                ))
            },
        );
    }
}

fn balls(ctx: &mut Ctx<'_>) {
    for (label, p, n) in order_grid() {
        if !ctx.wants_p(p) {
            continue;
        }
        let seed = ctx.opts.seed;
        ctx.guard(
            format!("ball measures d={} kappa={label} p={p} n={n}", label.dim()),
            "mu(B_{-n}(R)) = 1/|G_n| in closed form",
            |c| {
                let t = c.table(label, p, n)?;
                let d = t.descriptor();
                let want = ball_measure_closed_form(d, n);
                let space = HaarSpace::from_tables_at(t)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (p << 8) ^ (n as u64));
                let mut ok = true;
                let mut last = BigRational::from_integer(0.into());
                for _ in 0..20 {
                    let r = space.table(n)?.element(rng.gen_range(0..space.order(n)?)).clone();
                    let b = space.ball(&r, n)?;
                    last = space.measure(&b)?;
                    ok &= last == want;
                }
                Ok((last.to_string(), want.to_string(), ok))
            },
        );
    }
}

fn invariance(ctx: &mut Ctx<'_>) {
    // exhaustive at level 1, p = 3
    if ctx.wants_p(3) {
        for label in KappaLabel::BINARY {
            ctx.guard(
                format!("exhaustive invariance kappa={label} p=3 n=1"),
                "mu(R E) = mu(E R) = mu(E) for all E, R",
                |c| {
                    let t = c.table(label, 3, 1)?;
                    let space = HaarSpace::from_tables(vec![t])?;
                    let (pairs, bad) = exhaustive_invariance(&space)?;
                    Ok((format!("{bad} of {pairs} pairs changed measure"), "0".into(), bad == 0))
                },
            );
        }
    }
    let mut descs: Vec<(KappaLabel, u64, u32)> = Vec::new();
    for p in [3u64, 5] {
        for label in KappaLabel::BINARY {
            descs.push((label, p, 2));
        }
    }
    descs.push((KappaLabel::Plus, 3, 2));
    descs.push((KappaLabel::Plus, 5, 1));
    for (label, p, top) in descs {
        if !ctx.wants_p(p) {
            continue;
        }
        let seed = ctx.opts.seed;
        ctx.guard(
            format!("randomized invariance and refinement d={} kappa={label} p={p} levels 1..{top}", label.dim()),
            "mu(R E) = mu(E R) = mu(E); mu(refine(E)) = mu(E); mu(full) = 1",
            |c| {
                let tables = (1..=top).map(|n| c.table(label, p, n)).collect::<Result<Vec<_>>>()?;
                let space = HaarSpace::from_tables(tables)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ p);
                let (trials, bad) = randomized_invariance(&space, 1000, 100, &mut rng)?;
                Ok((format!("{bad} of {trials} trials failed"), "0".into(), bad == 0))
            },
        );
    }
}

/// Every subset of the level-1 group against every translator, both sides.
pub fn exhaustive_invariance(space: &HaarSpace) -> Result<(usize, usize)> {
    let order = space.order(1)?;
    let t = space.table(1)?;
    let mut pairs = 0;
    let mut bad = 0;
    for mask in 0u64..(1u64 << order) {
        let e = space.cylinder(1, (0..order).filter(|i| mask >> i & 1 == 1))?;
        let mu = space.measure(&e)?;
        for r in t.elements() {
            pairs += 1;
            let l = space.translate(&e, r, Side::Left)?;
            let rt = space.translate(&e, r, Side::Right)?;
            if space.measure(&l)? != mu || space.measure(&rt)? != mu {
                bad += 1;
            }
        }
    }
    Ok((pairs, bad))
}

/// Random translations at random levels plus random refinements; returns
/// (trials, failures).
pub fn randomized_invariance<R: Rng>(
    space: &HaarSpace,
    translations: usize,
    refinements: usize,
    rng: &mut R,
) -> Result<(usize, usize)> {
    let top = space.max_level();
    let mut bad = 0;
    for n in 1..=top {
        if space.measure(&space.full(n)?)? != BigRational::from_integer(1.into()) {
            bad += 1;
        }
    }
    let random_set = |rng: &mut R, n: u32| -> Result<crate::haar::CylinderSet> {
        let order = space.order(n)?;
        let k = rng.gen_range(0..=order.min(64));
        let mut idx: Vec<usize> = (0..order).collect();
        idx.shuffle(rng);
        space.cylinder(n, idx.into_iter().take(k))
    };
    for _ in 0..translations {
        let n = rng.gen_range(1..=top);
        let e = random_set(rng, n)?;
        let mu = space.measure(&e)?;
        let r = space.table(top)?.element(rng.gen_range(0..space.order(top)?)).clone();
        for side in [Side::Left, Side::Right] {
            if space.measure(&space.translate(&e, &r, side)?)? != mu {
                bad += 1;
            }
        }
    }
    for _ in 0..refinements {
        let e = random_set(rng, 1)?;
        let l = rng.gen_range(1..=top);
        let r = space.refine(&e, l)?;
        if space.measure(&r)? != space.measure(&e)? || space.canonical(&r)?.level > e.level {
            bad += 1;
        }
    }
    Ok((top as usize + 2 * translations + refinements, bad))
}

fn integral_form(ctx: &mut Ctx<'_>) {
    for p in [3u64, 5, 7] {
        if !ctx.wants_p(p) {
            continue;
        }
        for label in KappaLabel::BINARY {
            ctx.guard(
                format!("disc integrals kappa={label} p={p}"),
                "int_{D_k(0)} dsigma / |1 + alpha sigma^2|_p = p^k for k = 0, -1, -2, -3",
                |_| {
                    let pp = OddPrime::new(p)?;
                    let mut got = Vec::new();
                    let mut ok = true;
                    for k in [0i64, -1, -2, -3] {
                        let v = disc_integral(label, pp, k)?;
                        ok &= v == p_power(pp, k);
                        got.push(v.to_string());
                    }
                    Ok((got.join(", "), "1, 1/p, 1/p^2, 1/p^3".into(), ok))
                },
            );
            ctx.guard(
                format!("circle volumes and telescoping p={p}"),
                "vol(S_m(0)) = p^m (1 - 1/p); sum over m = k..-r+1 plus p^-r equals p^k",
                |_| {
                    let pp = OddPrime::new(p)?;
                    let mut ok = true;
                    for m in [0i64, -1, -2, -3] {
                        let v = integrate_zp(&circle(pp, m)?);
                        ok &= v == p_power(pp, m) * (BigRational::from_integer(1.into()) - p_power(pp, -1));
                    }
                    for k in [0i64, -1, -2] {
                        let r = 4i64;
                        let mut total = p_power(pp, -r);
                        for m in (-r + 1)..=k {
                            total += integrate_zp(&circle(pp, m)?);
                        }
                        ok &= total == p_power(pp, k);
                    }
                    Ok((ok.to_string(), "true".into(), ok))
                },
            );
            ctx.guard(
                format!("normalization kappa={label} p={p}"),
                "total mass = 1 + 1/p for -v, 2 for p and up",
                |_| {
                    let pp = OddPrime::new(p)?;
                    let v = normalization(label, pp)?;
                    let w = normalization_closed_form(label, pp);
                    let mut cov = true;
                    let base = p_power(pp, -second_chart_disc(label));
                    for t in 1..=12i64 {
                        let tau = BigRational::from_integer(BigInt::from(t)) / &base;
                        cov &= change_of_variables_holds(label, pp, &tau)?;
                    }
                    Ok((
                        format!("{v} (change of variables {cov})"),
                        format!("{w} (change of variables true)"),
                        v == w && cov,
                    ))
                },
            );
            for n in 1..=3u32 {
                ctx.guard(
                    format!("coordinate ball image kappa={label} p={p} n={n}"),
                    "||R(sigma) - I||_p <= p^-n iff principal and sigma in p^n Z_p; ||R(sigma) - I||_p = |sigma|_p",
                    |_| {
                        let r = coordinate_ball_image(label, OddPrime::new(p)?, n)?;
                        Ok((
                            format!(
                                "{} of {} parameters inside, norm identity {}",
                                r.inside, r.scanned, r.norm_equals_abs_sigma
                            ),
                            format!("{} inside", p),
                            r.verified && r.inside == p as usize,
                        ))
                    },
                );
                ctx.guard(
                    format!("measure coincidence kappa={label} p={p} n={n}"),
                    "p^-n / normalization = 1 / |G_{kappa,p^n}|",
                    |c| {
                        let r = compare_measures(label, OddPrime::new(p)?, n, &c.opts.budget)?;
                        Ok((r.integral_value, r.counting_value, r.equal))
                    },
                );
            }
        }
    }
}

/// Every sequence of free digits applied to one level-1 element reaches
/// each element of its fiber at level `top` exactly once.
pub fn lift_paths_are_bijective(level1: &ResidueMatrix, label: KappaLabel, top: u32, hi: &GroupTable) -> Result<bool> {
    let mut frontier = vec![level1.clone()];
    for _ in 1..top {
        frontier =
            frontier.iter().map(|m| lift_all(m, label)).collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    }
    let distinct: HashSet<&ResidueMatrix> = frontier.iter().collect();
    let fiber: HashSet<&ResidueMatrix> =
        hi.elements().iter().filter(|m| m.project(1).map(|x| &x == level1).unwrap_or(false)).collect();
    Ok(distinct.len() == frontier.len() && distinct == fiber)
}

fn sampler(ctx: &mut Ctx<'_>) {
    let seed = ctx.opts.seed;
    for (label, p, top) in [(KappaLabel::MinusV, 3u64, 3u32), (KappaLabel::Plus, 3, 2)] {
        if !ctx.wants_p(p) {
            continue;
        }
        ctx.guard(
            format!("structural uniformity d={} kappa={label} p={p} level {top}", label.dim()),
            "fibers of G_l -> G_n have equal size and every free-digit path is a distinct fiber element",
            |c| {
                let tables = (1..=top).map(|n| c.table(label, p, n)).collect::<Result<Vec<_>>>()?;
                let mut ok = true;
                for w in tables.windows(2) {
                    let f = fiber_map(&w[1], &w[0])?;
                    let sizes: BTreeSet<usize> = f.fiber_sizes().into_iter().collect();
                    ok &= sizes.len() == 1;
                }
                let hi = tables.last().expect("non-empty");
                for m in tables[0].elements() {
                    ok &= lift_paths_are_bijective(m, label, top, hi)?;
                }
                Ok((ok.to_string(), "true".into(), ok))
            },
        );
    }
    if ctx.wants_p(3) {
        ctx.guard(
            "frequency test d=2 kappa=-v p=3 level 1".into(),
            "100000 uniform draws: each of the 4 elements within 3 sigma of 25000",
            |c| {
                let t = c.table(KappaLabel::MinusV, 3, 1)?;
                let space = HaarSpace::from_tables(vec![t.clone()])?;
                let sampler = HaarSampler::new(&space)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let (counts, ok) = frequency_test(&sampler, &t, 100_000, &mut rng)?;
                Ok((format!("{counts:?}"), "each within 25000 +- 411".into(), ok))
            },
        );
    }
}

/// Level-1 counts from `draws` samples and whether each is within three
/// standard deviations of the uniform expectation.
pub fn frequency_test<R: Rng>(
    sampler: &HaarSampler<'_>,
    t: &GroupTable,
    draws: usize,
    rng: &mut R,
) -> Result<(Vec<usize>, bool)> {
    let mut counts = vec![0usize; t.order()];
    for _ in 0..draws {
        let m = sampler.sample(1, rng)?;
        counts[t.locate(&m)?] += 1;
    }
    let k = t.order() as f64;
    let mean = draws as f64 / k;
    let sd = (draws as f64 * (1.0 / k) * (1.0 - 1.0 / k)).sqrt();
    let ok = counts.iter().all(|&c| (c as f64 - mean).abs() <= 3.0 * sd);
    Ok((counts, ok))
}

impl HaarSpace {
    /// A space holding tables `1..=n` where only `t` (level `n`) is given:
    /// lower levels are rebuilt by projection.
    pub fn from_tables_at(t: GroupTable) -> Result<HaarSpace> {
        let mut tables = vec![t];
        while tables[0].level() > 1 {
            let lower = crate::quotient::project_group(&tables[0], tables[0].level() - 1)?.image;
            tables.insert(0, lower);
        }
        HaarSpace::from_tables(tables)
    }
}

/// The descriptor grid used by `balls`, for callers outside the suite.
pub fn ball_descriptors() -> Vec<(Descriptor, u32)> {
    order_grid()
        .into_iter()
        .map(|(l, p, n)| (Descriptor::new(l, OddPrime::new(p).expect("grid primes are odd primes")), n))
        .collect()
}
