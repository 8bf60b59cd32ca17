//! Seeded property suites. Every case draws from its own seed, so a failing
//! case can be replayed alone with [`run_case`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::arrangement::{AxisGrid, Cell, CellComplex};
use crate::cone::{ConeSpec, GaugeSpec};
use crate::conv1d::{compare_with_interleaving, convolution_distance, RaySheaf};
use crate::error::{Error, Result};
use crate::interleave::{
    candidate_scales, hom_basis, interleaving_distance, inter_probe, is_interleaved, isometry_check,
    verify_witness, DecisionOptions, DistanceMode, DistanceValue, DEFAULT_BUDGET,
};
use crate::oracle::{bottleneck_bruteforce, exhaustive_interleaved, gauge_bisection};
use crate::par::{self, Parallelism};
use crate::persist::{
    common_pair, direct_sum, indicator_module, point_module, principal_module, random_complex, random_module_on,
    ArrModule, ModMorphism, RandomSpec,
};
use crate::rat::{vadd, vscale, vsub, RVec, Rat};
use crate::sites::{
    alpha_star, beta_inv, beta_star, exactness_probe, is_ephemeral, vanishes_on_open_cells, OpenSet, PieceKind,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Suite {
    Isometry,
    Ephemeral,
    Gauge,
    ConvVsInt,
    Serre,
    Functor,
    Opens,
    Decision,
    Metric,
    Monotone,
    ExactVsBisection,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Isometry,
        Suite::Ephemeral,
        Suite::Gauge,
        Suite::ConvVsInt,
        Suite::Serre,
        Suite::Functor,
        Suite::Opens,
        Suite::Decision,
        Suite::Metric,
        Suite::Monotone,
        Suite::ExactVsBisection,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Isometry => "isometry",
            Suite::Ephemeral => "ephemeral",
            Suite::Gauge => "gauge",
            Suite::ConvVsInt => "conv-vs-int",
            Suite::Serre => "serre",
            Suite::Functor => "functor",
            Suite::Opens => "opens",
            Suite::Decision => "decision",
            Suite::Metric => "metric",
            Suite::Monotone => "monotone",
            Suite::ExactVsBisection => "exact-vs-bisection",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

/// Result of one case. Tags are counted into the suite statistics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseOutcome {
    pub pass: bool,
    pub detail: String,
    pub tags: Vec<String>,
}

impl CaseOutcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        CaseOutcome { pass, detail: detail.into(), tags: Vec::new() }
    }

    fn tag(mut self, t: impl Into<String>) -> Self {
        self.tags.push(t.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CaseFailure {
    pub index: usize,
    pub seed: u64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub count: usize,
    pub passed: usize,
    pub failures: Vec<CaseFailure>,
    pub stats: BTreeMap<String, usize>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Seed of case `i` in a run seeded with `seed`.
pub fn case_seed(seed: u64, i: usize) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_suite(suite: Suite, seed: u64, count: usize, parallelism: Parallelism) -> SuiteReport {
    let idx: Vec<usize> = (0..count).collect();
    let outcomes = par::map(parallelism, &idx, |&i| {
        let s = case_seed(seed, i);
        (s, run_case(suite, s).unwrap_or_else(|e| CaseOutcome::new(false, format!("error: {e}")).tag("error")))
    });
    let mut report =
        SuiteReport { suite: suite.name().into(), seed, count, passed: 0, failures: Vec::new(), stats: BTreeMap::new() };
    for (i, (s, o)) in outcomes.into_iter().enumerate() {
        for t in o.tags {
            *report.stats.entry(t).or_default() += 1;
        }
        if o.pass {
            report.passed += 1;
        } else {
            report.failures.push(CaseFailure { index: i, seed: s, detail: o.detail });
        }
    }
    report
}

/// One case, fully determined by its seed.
pub fn run_case(suite: Suite, seed: u64) -> Result<CaseOutcome> {
    let rng = &mut ChaCha8Rng::seed_from_u64(seed);
    match suite {
        Suite::Isometry => isometry_case(rng),
        Suite::Ephemeral => ephemeral_case(rng),
        Suite::Gauge => gauge_case(rng),
        Suite::ConvVsInt => conv_case(rng),
        Suite::Serre => serre_case(rng),
        Suite::Functor => functor_case(rng),
        Suite::Opens => opens_case(rng),
        Suite::Decision => decision_case(rng),
        Suite::Metric => metric_case(rng),
        Suite::Monotone => monotone_case(rng),
        Suite::ExactVsBisection => bisection_case(rng),
    }
}

fn opts() -> DecisionOptions {
    DecisionOptions { budget: DEFAULT_BUDGET, parallelism: Parallelism::Sequential }
}

fn pick_spec(rng: &mut ChaCha8Rng) -> RandomSpec {
    if rng.gen_bool(0.5) {
        RandomSpec::line()
    } else {
        RandomSpec::plane()
    }
}

fn module(rng: &mut ChaCha8Rng, spec: &RandomSpec) -> ArrModule {
    let c = random_complex(rng, spec);
    random_module_on(rng, c, spec)
}

fn ones(n: usize) -> RVec {
    vec![Rat::one(); n]
}

/// Strictly positive integer combination of the extreme rays of `cone`.
fn interior_point(rng: &mut ChaCha8Rng, cone: &ConeSpec) -> RVec {
    cone.generators()
        .iter()
        .fold(vec![Rat::zero(); cone.dim()], |acc, g| vadd(&acc, &vscale(&Rat::from_int(rng.gen_range(1..=3)), g)))
}

fn small_rat(rng: &mut ChaCha8Rng, range: i64) -> Rat {
    let d = rng.gen_range(1..=7);
    Rat::new(rng.gen_range(-range * d..=range * d), d)
}

/// Bounded box indicator in cell-index coordinates, at most three cells
/// wide per axis.
fn box_module(rng: &mut ChaCha8Rng, c: &CellComplex, p: u32) -> Result<ArrModule> {
    let bounds: Vec<(usize, usize)> = c
        .axes()
        .iter()
        .map(|a| {
            let last = a.num_cells() - 2;
            let lo = rng.gen_range(1..=last);
            (lo, (lo + rng.gen_range(0..=2)).min(last))
        })
        .collect();
    indicator_module(c.clone(), p, move |a: &Cell| a.0.iter().zip(&bounds).all(|(&i, &(lo, hi))| lo <= i && i <= hi))
}

fn block_sum(rng: &mut ChaCha8Rng, spec: &RandomSpec, apex: Option<&RVec>) -> Result<ArrModule> {
    let c = complex_with_vertices(rng, spec);
    let mut m = box_module(rng, &c, spec.p)?;
    if rng.gen_bool(0.4) {
        m = direct_sum(&m, &box_module(rng, &c, spec.p)?)?;
    }
    if let Some(x) = apex {
        m = direct_sum(&m, &principal_module(&c, x, spec.p)?)?;
    }
    Ok(m)
}

/// Pairs at finite distance more often than independent draws: a module
/// and a translate, or sums of boxes and principals with nearby apexes.
fn module_pair(rng: &mut ChaCha8Rng, spec: &RandomSpec) -> Result<(ArrModule, ArrModule, &'static str)> {
    let n = spec.cone.dim();
    Ok(match rng.gen_range(0..4) {
        0 => (module(rng, spec), module(rng, spec), "independent"),
        1 => {
            let f = module(rng, spec);
            let t: RVec = (0..n).map(|_| Rat::new(rng.gen_range(-4..=4), 4)).collect();
            let g = f.shift_grid(&t);
            (f, g, "translate")
        }
        _ => {
            let apex = rng.gen_bool(0.5).then(|| (0..n).map(|_| Rat::new(rng.gen_range(-4..=4), 2)).collect::<RVec>());
            let near = apex.as_ref().map(|x| x.iter().map(|c| c + &Rat::new(rng.gen_range(-2..=2), 2)).collect());
            (block_sum(rng, spec, apex.as_ref())?, block_sum(rng, spec, near.as_ref())?, "blocks")
        }
    })
}

fn isometry_case(rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
    let spec = pick_spec(rng);
    let (f, g, kind) = module_pair(rng, &spec)?;
    let v0 = ones(spec.cone.dim());
    let r = isometry_check(&f, &g, &v0, &opts())?;
    let out = CaseOutcome::new(r.equal, format!("d(F,G) = {}, d(bF,bG) = {}", r.lhs.value, r.rhs.value));
    Ok(out.tag(format!("dim{}", spec.cone.dim())).tag(kind).tag(finiteness(&r.lhs.value)))
}

fn complex_with_vertices(rng: &mut ChaCha8Rng, spec: &RandomSpec) -> CellComplex {
    let c = random_complex(rng, spec);
    let axes = c
        .axes()
        .iter()
        .map(|a| {
            if a.breakpoints().is_empty() {
                AxisGrid::new(vec![Rat::new(rng.gen_range(-2 * spec.range..=2 * spec.range), 2)]).unwrap()
            } else {
                a.clone()
            }
        })
        .collect();
    c.with_axes(axes).expect("same dimension")
}

fn random_vertex(rng: &mut ChaCha8Rng, c: &CellComplex) -> RVec {
    let y: RVec = c.axes().iter().map(|a| a.breakpoints().choose(rng).unwrap().clone()).collect();
    c.from_grid(&y)
}

/// Modules of assorted shapes: point modules, thin slabs, principals,
/// sums and random ones.
fn shaped_module(rng: &mut ChaCha8Rng) -> Result<(ArrModule, &'static str)> {
    let spec = pick_spec(rng);
    let n = spec.cone.dim();
    Ok(match rng.gen_range(0..5) {
        0 => {
            let c = complex_with_vertices(rng, &spec);
            let x = random_vertex(rng, &c);
            (point_module(&c, &x, spec.p)?, "point")
        }
        1 => {
            let c = complex_with_vertices(rng, &spec);
            // a thin slab: a point on one axis, a half-open run on the others
            let thin = rng.gen_range(0..n);
            let at: Vec<usize> = c.axes().iter().map(|a| 2 * rng.gen_range(0..a.breakpoints().len()) + 1).collect();
            let support = move |a: &Cell| {
                (0..n).all(|k| if k == thin { a.0[k] == at[k] } else { a.0[k] == at[k] || a.0[k] == at[k] + 1 })
            };
            (indicator_module(c, spec.p, support)?, "slab")
        }
        2 => {
            let c = random_complex(rng, &spec);
            let x: RVec = (0..n).map(|_| Rat::new(rng.gen_range(-4..=4), 2)).collect();
            (principal_module(&c, &x, spec.p)?, "principal")
        }
        3 => {
            let c = complex_with_vertices(rng, &spec);
            let x = random_vertex(rng, &c);
            let y = random_vertex(rng, &c);
            let a = point_module(&c, &x, spec.p)?;
            let b = if rng.gen_bool(0.5) { point_module(&c, &y, spec.p)? } else { principal_module(&c, &y, spec.p)? };
            (direct_sum(&a, &b)?, "sum")
        }
        _ => (module(rng, &spec), "random"),
    })
}

fn ephemeral_case(rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
    let (f, shape) = shaped_module(rng)?;
    let n = f.complex().dim();
    let anti = f.complex().cone().antipode();
    let zero = ArrModule::zero(f.complex().clone(), f.p());
    let a = is_ephemeral(&f);
    let b = vanishes_on_open_cells(&f);
    let b2 = beta_star(&f).is_zero();
    let d = interleaving_distance(&f, &zero, &ones(n), &DistanceMode::Exact, &opts())?;
    let c = d.value == DistanceValue::Finite(Rat::zero());
    // small probes: every open cell is at least 1/2 wide
    let mut samples = vec![vscale(&Rat::new(1, 8), &ones(n))];
    for _ in 0..2 {
        let v = interior_point(rng, &anti);
        let s = Rat::new(1, 16 * rng.gen_range(1..=4));
        samples.push(vscale(&s, &v));
    }
    let e = inter_probe(&f, &zero, &samples, &opts())?.into_iter().all(|x| x);
    let agree = a == b && b == b2 && b2 == c && c == e;
    // an ephemeral nonzero module is at distance 0 without a 0-interleaving
    let attained_ok = !(a && !f.is_zero()) || !d.attained;
    let out = CaseOutcome::new(
        agree && attained_ok,
        format!("{shape}: ephemeral={a} open-vanishing={b} beta-zero={b2} d0={} probes={e}", d.value),
    );
    Ok(out.tag(shape).tag(if a { "ephemeral" } else { "not-ephemeral" }))
}

fn gauge_cone(rng: &mut ChaCha8Rng) -> ConeSpec {
    let n = rng.gen_range(1..=3);
    let signs: Vec<i64> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    let r = |xs: &[&[i64]]| xs.iter().map(|x| x.iter().map(|&v| Rat::from_int(v)).collect()).collect::<Vec<RVec>>();
    match (n, rng.gen_range(0..3)) {
        (2, 0) => ConeSpec::from_normals(2, r(&[&[-2, 1], &[1, -2]])).unwrap(),
        (2, 1) => ConeSpec::from_normals(2, r(&[&[1, 3], &[1, -1]])).unwrap(),
        (3, 0) => ConeSpec::from_normals(3, r(&[&[1, 0, 1], &[-1, 0, 1], &[0, 1, 1], &[0, -1, 1]])).unwrap(),
        (3, 1) => ConeSpec::from_normals(3, r(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]])).unwrap(),
        _ => ConeSpec::signed_orthant(&signs),
    }
}

fn gauge_case(rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
    let cone = gauge_cone(rng);
    let n = cone.dim();
    let v = interior_point(rng, &cone.antipode());
    let g = GaugeSpec::new(cone, v)?;
    let x: RVec = (0..n).map(|_| small_rat(rng, 5)).collect();
    let y: RVec = (0..n).map(|_| small_rat(rng, 5)).collect();
    let lam = small_rat(rng, 3);
    let zero = vec![Rat::zero(); n];
    let gx = g.gauge(&x)?;
    let mut bad = Vec::new();
    if gx.is_negative() {
        bad.push("negative");
    }
    if !g.gauge(&zero)?.is_zero() || (x != zero && gx.is_zero()) {
        bad.push("definiteness");
    }
    if g.gauge(&vscale(&lam, &x))? != &lam.abs() * &gx {
        bad.push("homogeneity");
    }
    if g.gauge(&vsub(&zero, &x))? != gx {
        bad.push("symmetry");
    }
    if g.gauge(&vadd(&x, &y))? > &gx + &g.gauge(&y)? {
        bad.push("triangle");
    }
    let (lo, hi) = gauge_bisection(&g, &x, 30)?;
    if !(lo <= gx && gx <= hi && &hi - &lo <= Rat::pow2_neg(30)) {
        bad.push("bisection");
    }
    // certification: x sits on the boundary of g(x) B
    if !g.in_scaled_ball(&gx, &x)? {
        bad.push("not-in-ball");
    }
    if gx.is_positive() && g.in_scaled_ball(&(&gx * &(&Rat::one() - &Rat::pow2_neg(40))), &x)? {
        bad.push("not-on-boundary");
    }
    let out = CaseOutcome::new(bad.is_empty(), format!("g({x:?}) = {gx}: {}", bad.join(",")));
    Ok(out.tag(format!("dim{n}")))
}

/// Gauge directions exercised by the convolution comparison.
pub const CONV_DIRECTIONS: [(i64, i64); 3] = [(1, 1), (2, 1), (1, 3)];

fn ray_sheaf(rng: &mut ChaCha8Rng, m: usize) -> RaySheaf {
    RaySheaf::new((0..m).map(|_| Rat::new(rng.gen_range(-8..=8), 2)).collect())
}

fn conv_case(rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
    let m = rng.gen_range(0..=5);
    let n = if rng.gen_bool(0.85) { m } else { rng.gen_range(0..=5) };
    let (f, g) = (ray_sheaf(rng, m), ray_sheaf(rng, n));
    let cone = ConeSpec::nonpositive_orthant(1);
    let mut bad = Vec::new();
    let mut out_tags = vec![format!("m{}", m.max(n))];
    for (a, b) in CONV_DIRECTIONS {
        let gauge = GaugeSpec::new(cone.clone(), vec![Rat::new(a, b)])?;
        let r = compare_with_interleaving(&f, &g, &gauge, DEFAULT_BUDGET, &opts())?;
        if !r.equal {
            bad.push(format!("v={}: conv {} vs int {}", Rat::new(a, b), r.d_conv, r.d_int));
        }
        let bn = bottleneck_bruteforce(f.births(), g.births())
            .map_or(DistanceValue::Infinite, |x| DistanceValue::Finite(&x / &Rat::new(a, b)));
        if bn != r.d_conv {
            bad.push(format!("v={}: conv {} vs bottleneck {bn}", Rat::new(a, b), r.d_conv));
        }
        out_tags.push(format!("direction {}", Rat::new(a, b)));
    }
    // a size-6 pair against the matching oracle alone
    let (f6, g6) = (ray_sheaf(rng, 6), ray_sheaf(rng, 6));
    let gauge = GaugeSpec::new(cone, vec![Rat::one()])?;
    let d6 = convolution_distance(&f6, &g6, &gauge, DEFAULT_BUDGET)?.value;
    let b6 = DistanceValue::Finite(bottleneck_bruteforce(f6.births(), g6.births()).unwrap());
    if d6 != b6 {
        bad.push(format!("m=6: conv {d6} vs bottleneck {b6}"));
    }
    let mut out = CaseOutcome::new(bad.is_empty(), format!("{:?} vs {:?}: {}", f.births(), g.births(), bad.join("; ")));
    out.tags = out_tags;
    Ok(out)
}

fn random_morphism(rng: &mut ChaCha8Rng, a: &ArrModule, b: &ArrModule) -> Result<ModMorphism> {
    let basis = hom_basis(a, b);
    let p = a.p();
    let mut comps: Vec<_> = ModMorphism::zero(a, b)?.components().to_vec();
    for e in &basis {
        let s = rng.gen_range(0..p);
        for (c, m) in comps.iter_mut().zip(e) {
            *c = c.add(&m.scale(s));
        }
    }
    ModMorphism::checked(a.clone(), b.clone(), comps)
}

fn serre_case(rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
    let (src, shape) = shaped_module(rng)?;
    let spec = if src.complex().dim() == 1 { RandomSpec::line() } else { RandomSpec::plane() };
    let dst = if rng.gen_bool(0.3) { src.clone() } else { module(rng, &spec) };
    let (a, b) = common_pair(&src, &dst)?;
    let f = random_morphism(rng, &a, &b)?;
    let r = exactness_probe(&f)?;
    let out = CaseOutcome::new(r.exact, r.failure.unwrap_or_default());
    Ok(out.tag(shape))
}

fn functor_case(rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
    let spec = pick_spec(rng);
    let g = beta_star(&module(rng, &spec));
    let a = alpha_star(&g);
    let b = beta_inv(&g);
    let valid = a.validate().is_ok() && b.validate().is_ok();
    let ok_a = beta_star(&a) == g;
    let ok_b = beta_star(&b) == g;
    let out = CaseOutcome::new(valid && ok_a && ok_b, format!("valid={valid} beta*alpha*={ok_a} beta*beta^-1={ok_b}"));
    Ok(out.tag(format!("dim{}", spec.cone.dim())))
}

fn opens_cone(rng: &mut ChaCha8Rng) -> ConeSpec {
    let r = |xs: &[&[i64]]| xs.iter().map(|x| x.iter().map(|&v| Rat::from_int(v)).collect()).collect::<Vec<RVec>>();
    match rng.gen_range(0..5) {
        0 => ConeSpec::nonpositive_orthant(1),
        1 => ConeSpec::nonpositive_orthant(2),
        2 => ConeSpec::signed_orthant(&[1, -1]),
        3 => ConeSpec::from_normals(2, r(&[&[-2, 1], &[1, -2]])).unwrap(),
        _ => ConeSpec::nonpositive_orthant(3),
    }
}

fn random_open(rng: &mut ChaCha8Rng, cone: &ConeSpec) -> Result<OpenSet> {
    let k = rng.gen_range(0..=3);
    let pieces = (0..k)
        .map(|_| (PieceKind::Closed, (0..cone.dim()).map(|_| Rat::new(rng.gen_range(-6..=6), 2)).collect()))
        .collect();
    OpenSet::new(cone.clone(), pieces)
}

fn opens_case(rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
    let cone = opens_cone(rng);
    let (u, v) = (random_open(rng, &cone)?, random_open(rng, &cone)?);
    let lhs = u.intersection(&v)?.alpha_t()?;
    let rhs = u.alpha_t()?.intersection(&v.alpha_t()?)?;
    let eq = lhs.set_eq(&rhs);
    let out = CaseOutcome::new(eq, format!("U = {:?}, V = {:?}", u.pieces(), v.pieces()));
    Ok(out.tag(format!("dim{}", cone.dim())))
}

/// Scale for a decision instance: a candidate, a midpoint between two, or
/// something arbitrary.
fn decision_scale(rng: &mut ChaCha8Rng, f: &ArrModule, g: &ArrModule, v0: &[Rat]) -> Result<Rat> {
    let cands = candidate_scales(f, g, &f.complex().to_grid(v0)?);
    Ok(match rng.gen_range(0..3) {
        0 => cands.choose(rng).unwrap().clone(),
        1 if cands.len() > 1 => {
            let i = rng.gen_range(1..cands.len());
            cands[i - 1].midpoint(&cands[i])
        }
        _ => Rat::new(rng.gen_range(0..=12), 4),
    })
}

fn decision_case(rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
    let mut spec = pick_spec(rng);
    spec.max_total_dim = 3;
    let (mut f, mut g, mut kind) = module_pair(rng, &spec)?;
    if f.total_dim() + g.total_dim() > 6 {
        (f, g, kind) = (module(rng, &spec), module(rng, &spec), "independent");
    }
    let v0 = ones(spec.cone.dim());
    let c = decision_scale(rng, &f, &g, &v0)?;
    let v = vscale(&c, &v0);
    let fast = is_interleaved(&f, &g, &v, &opts())?;
    let slow = exhaustive_interleaved(&f, &g, &v, 1 << 14)?;
    let witness_ok = match &fast {
        Some(w) => verify_witness(&f, &g, w)?,
        None => true,
    };
    let pass = fast.is_some() == slow && witness_ok;
    let out = CaseOutcome::new(
        pass,
        format!("c = {c}: decision={} exhaustive={slow} witness_ok={witness_ok}", fast.is_some()),
    );
    Ok(out
        .tag(format!("dim{}", spec.cone.dim()))
        .tag(if slow { "interleaved" } else { "not-interleaved" })
        .tag(format!("total{}", f.total_dim() + g.total_dim()))
        .tag(kind))
}

fn finiteness(d: &DistanceValue) -> &'static str {
    if *d == DistanceValue::Infinite {
        "infinite"
    } else {
        "finite"
    }
}

fn dist(f: &ArrModule, g: &ArrModule, v: &[Rat]) -> Result<DistanceValue> {
    Ok(interleaving_distance(f, g, v, &DistanceMode::Exact, &opts())?.value)
}

fn metric_case(rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
    let mut spec = pick_spec(rng);
    spec.max_total_dim = 4;
    let (f, g, kind) = module_pair(rng, &spec)?;
    let h = if rng.gen_bool(0.5) {
        let t: RVec = (0..spec.cone.dim()).map(|_| Rat::new(rng.gen_range(-4..=4), 4)).collect();
        g.shift_grid(&t)
    } else {
        module_pair(rng, &spec)?.1
    };
    let v0 = ones(spec.cone.dim());
    let (fg, gh, fh) = (dist(&f, &g, &v0)?, dist(&g, &h, &v0)?, dist(&f, &h, &v0)?);
    let gf = dist(&g, &f, &v0)?;
    let ff = dist(&f, &f, &v0)?;
    let mut bad = Vec::new();
    if fh > &fg + &gh {
        bad.push("triangle");
    }
    if fg != gf {
        bad.push("symmetry");
    }
    if ff != DistanceValue::Finite(Rat::zero()) {
        bad.push("d(F,F)");
    }
    let out = CaseOutcome::new(bad.is_empty(), format!("d(F,G)={fg} d(G,H)={gh} d(F,H)={fh}: {}", bad.join(",")));
    Ok(out.tag(format!("dim{}", spec.cone.dim())).tag(kind).tag(finiteness(&fh)))
}

fn monotone_case(rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
    let spec = pick_spec(rng);
    let (f, g, kind) = module_pair(rng, &spec)?;
    let anti = spec.cone.antipode();
    // v - w ∈ γ, i.e. v >= w in the order of γ^a
    let v = interior_point(rng, &anti);
    let u = if rng.gen_bool(0.2) { vec![Rat::zero(); v.len()] } else { interior_point(rng, &anti) };
    let w = vadd(&v, &vscale(&Rat::new(rng.gen_range(0..=4), 2), &u));
    let (dv, dw) = (dist(&f, &g, &v)?, dist(&f, &g, &w)?);
    let out = CaseOutcome::new(dv >= dw, format!("v={v:?} w={w:?}: d^v={dv} d^w={dw}"));
    Ok(out.tag(format!("dim{}", spec.cone.dim())).tag(kind).tag(finiteness(&dw)))
}

fn bisection_case(rng: &mut ChaCha8Rng) -> Result<CaseOutcome> {
    let spec = pick_spec(rng);
    let (f, g, kind) = module_pair(rng, &spec)?;
    let v0 = ones(spec.cone.dim());
    let tol = Rat::pow2_neg(20);
    let exact = interleaving_distance(&f, &g, &v0, &DistanceMode::Exact, &opts())?;
    let approx = interleaving_distance(&f, &g, &v0, &DistanceMode::Tolerance(tol.clone()), &opts())?;
    let pass = match (&exact.value, &approx.bracket) {
        (DistanceValue::Infinite, _) => approx.value == DistanceValue::Infinite,
        (DistanceValue::Finite(d), Some((lo, hi))) => lo <= d && d <= hi && hi - lo <= tol,
        _ => false,
    };
    let out = CaseOutcome::new(pass, format!("exact {} vs bracket {:?}", exact.value, approx.bracket));
    Ok(out.tag(finiteness(&exact.value)).tag(kind))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = run_suite(Suite::Gauge, 7, 20, Parallelism::Parallel);
        let b = run_suite(Suite::Gauge, 7, 20, Parallelism::Sequential);
        assert_eq!(a, b);
        assert!(a.ok(), "{:?}", a.failures);
    }
}
