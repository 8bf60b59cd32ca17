//! `v`-interleavings of arrangement modules and the directional
//! interleaving distance.
//!
//! A `v`-interleaving is a pair `f: τ_v F -> G`, `g: τ_v G -> F` with
//! `g ∘ τ_v f = χ_{2v,0}(F)` and `f ∘ τ_v g = χ_{2v,0}(G)`. Natural maps of
//! each kind form a finite-dimensional space; the triangle identities are
//! bilinear, so the decision enumerates one side over `F_p` and solves a
//! linear system for the other.

use std::collections::BTreeMap;

use crate::arrangement::CellComplex;
use crate::error::{Error, Result};
use crate::exactla::{BlockEquation, BlockSystem, FieldMat, Term};
use crate::par::{self, Parallelism};
use crate::persist::{smoothing_grid, ArrModule, ModMorphism};
use crate::rat::{vadd, vscale, RVec, Rat};
use crate::sites::beta_star;

pub const DEFAULT_BUDGET: usize = 20;

#[derive(Clone, Copy, Debug)]
pub struct DecisionOptions {
    /// Largest number of free `F_p` coordinates the search may enumerate.
    pub budget: usize,
    pub parallelism: Parallelism,
}

impl Default for DecisionOptions {
    fn default() -> Self {
        DecisionOptions { budget: DEFAULT_BUDGET, parallelism: Parallelism::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InterleavingWitness {
    pub v: RVec,
    /// `τ_v F -> G`
    pub f: ModMorphism,
    /// `τ_v G -> F`
    pub g: ModMorphism,
}

/// Basis of the natural maps `a -> b` (same complex), each a list of
/// per-cell components.
pub fn hom_basis(a: &ArrModule, b: &ArrModule) -> Vec<Vec<FieldMat>> {
    let c = a.complex();
    let p = a.p();
    let shapes = a.dims().iter().zip(b.dims()).map(|(&da, &db)| (db, da)).collect();
    let mut sys = BlockSystem::new(p, shapes);
    for x in c.cells() {
        for k in 0..c.dim() {
            let Some(y) = c.upper_cover(&x, k) else { continue };
            let (lx, ly) = (c.linear(&x), c.linear(&y));
            if b.dims()[lx] * a.dims()[ly] == 0 {
                continue;
            }
            sys.push(BlockEquation {
                terms: vec![
                    Term {
                        left: FieldMat::identity(p, b.dims()[lx]),
                        unknown: lx,
                        right: a.cover_map(&x, k).unwrap().clone(),
                    },
                    Term {
                        left: b.cover_map(&x, k).unwrap().neg(),
                        unknown: ly,
                        right: FieldMat::identity(p, a.dims()[ly]),
                    },
                ],
                rhs: FieldMat::zeros(p, b.dims()[lx], a.dims()[ly]),
            });
        }
    }
    let sol = sys.solve();
    sol.basis.iter().map(|v| sol.unflatten(v)).collect()
}

/// One triangle identity at a cell: `left[l] * right[r] = rhs`, where the
/// left factor is a component of `g` and the right one of `f` (kind `Gf`),
/// or the other way round (kind `Fg`).
struct Triangle {
    g_left: bool,
    l: usize,
    r: usize,
    rhs: FieldMat,
}

/// The decision problem at a fixed shift, in grid coordinates.
struct Problem {
    p: u32,
    rf: CellComplex,
    rg: CellComplex,
    af: ArrModule,
    bf: ArrModule,
    ag: ArrModule,
    bg: ArrModule,
    hom_f: Vec<Vec<FieldMat>>,
    hom_g: Vec<Vec<FieldMat>>,
    tris: Vec<Triangle>,
}

fn check_setting(f: &ArrModule, g: &ArrModule) -> Result<()> {
    if f.p() != g.p() {
        return Err(Error::Domain(format!("field mismatch: F_{} vs F_{}", f.p(), g.p())));
    }
    if !f.complex().compatible(g.complex()) {
        return Err(Error::Domain("modules live over different cones or transforms".into()));
    }
    Ok(())
}

fn triangles(
    outer: &ArrModule,
    inner: &ArrModule,
    tv: &[Rat],
    r_left: &CellComplex,
    r_right: &CellComplex,
    g_left: bool,
) -> Result<Vec<Triangle>> {
    // cells where outer(y + 2tv) -> outer(y) must factor through inner(y + tv)
    let tv2 = vscale(&Rat::from_int(2), tv);
    let r = CellComplex::refine_all([
        outer.complex(),
        &inner.complex().shift_grid(tv),
        &outer.complex().shift_grid(&tv2),
    ])?;
    let mut seen = BTreeMap::new();
    for cell in r.cells() {
        let y = r.representative(&cell);
        let l = r_left.linear(&r_left.cell_of_grid(&y));
        let rr = r_right.linear(&r_right.cell_of_grid(&vadd(&y, tv)));
        if seen.contains_key(&(l, rr)) {
            continue;
        }
        let hi = outer.complex().cell_of_grid(&vadd(&y, &tv2));
        let lo = outer.complex().cell_of_grid(&y);
        let rhs = outer.map_between(&hi, &lo)?;
        seen.insert((l, rr), rhs);
    }
    Ok(seen
        .into_iter()
        .filter(|(_, rhs)| rhs.rows() * rhs.cols() > 0)
        .map(|((l, r), rhs)| Triangle { g_left, l, r, rhs })
        .collect())
}

impl Problem {
    fn new(f: &ArrModule, g: &ArrModule, tv: &[Rat]) -> Result<Self> {
        let (fs, gs) = (f.shift_grid(tv), g.shift_grid(tv));
        let rf = fs.complex().common_refinement(g.complex())?;
        let rg = gs.complex().common_refinement(f.complex())?;
        let (af, bf) = (fs.refine_to(&rf)?, g.refine_to(&rf)?);
        let (ag, bg) = (gs.refine_to(&rg)?, f.refine_to(&rg)?);
        let hom_f = hom_basis(&af, &bf);
        let hom_g = hom_basis(&ag, &bg);
        // g(y) f(y + v) = χ_F at y; f(y) g(y + v) = χ_G at y
        let mut tris = triangles(f, g, tv, &rg, &rf, true)?;
        tris.extend(triangles(g, f, tv, &rf, &rg, false)?);
        Ok(Problem { p: f.p(), rf, rg, af, bf, ag, bg, hom_f, hom_g, tris })
    }

    fn rhs(&self) -> Vec<u32> {
        self.tris.iter().flat_map(|t| t.rhs.data().iter().copied()).collect()
    }

    /// Coefficient matrix of the triangle system in the coordinates of the
    /// solved side, for one basis vector `e` of the enumerated side.
    fn slice(&self, enum_f: bool, e: &[FieldMat]) -> FieldMat {
        let solved = if enum_f { &self.hom_g } else { &self.hom_f };
        let rows: usize = self.tris.iter().map(|t| t.rhs.rows() * t.rhs.cols()).sum();
        let mut m = FieldMat::zeros(self.p, rows, solved.len());
        for (col, h) in solved.iter().enumerate() {
            let mut r0 = 0;
            for t in &self.tris {
                // the enumerated factor is the g-side one iff !enum_f
                let left_is_enum = t.g_left != enum_f;
                let prod = if left_is_enum { e[t.l].mul(&h[t.r]) } else { h[t.l].mul(&e[t.r]) };
                for (i, &x) in prod.data().iter().enumerate() {
                    m.set(r0 + i, col, x);
                }
                r0 += prod.rows() * prod.cols();
            }
        }
        m
    }
}

/// The linearized search: find coefficients `a` with `(Σ a_k M_k) β = rhs`
/// solvable.
struct Search {
    p: u32,
    slices: Vec<FieldMat>,
    keep: Vec<usize>,
    rhs: Vec<u32>,
}

/// Reduced row echelon form of a growing system `row · β = rhs` over `F_p`.
#[derive(Clone)]
struct Echelon {
    p: u32,
    rows: Vec<(usize, Vec<u32>, u32)>,
}

fn inv_mod(a: u32, p: u32) -> u32 {
    let (mut r, mut b, mut e) = (1u64, a as u64, p as u64 - 2);
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p as u64;
        }
        b = b * b % p as u64;
        e >>= 1;
    }
    r as u32
}

impl Echelon {
    /// Adds one equation; false if the system became inconsistent.
    fn insert(&mut self, mut v: Vec<u32>, mut b: u32) -> bool {
        let p = self.p as u64;
        let axpy = |v: &mut [u32], b: &mut u32, c: u32, row: &[u32], rb: u32| {
            let neg = p - c as u64;
            for (x, &y) in v.iter_mut().zip(row) {
                *x = ((*x as u64 + neg * y as u64) % p) as u32;
            }
            *b = ((*b as u64 + neg * rb as u64) % p) as u32;
        };
        for (pc, row, rb) in &self.rows {
            let c = v[*pc];
            if c != 0 {
                axpy(&mut v, &mut b, c, row, *rb);
            }
        }
        let Some(q) = v.iter().position(|&x| x != 0) else { return b == 0 };
        let s = inv_mod(v[q], self.p) as u64;
        for x in v.iter_mut() {
            *x = (*x as u64 * s % p) as u32;
        }
        b = (b as u64 * s % p) as u32;
        for (_, row, rb) in self.rows.iter_mut() {
            let c = row[q];
            if c != 0 {
                axpy(row, rb, c, &v, b);
            }
        }
        self.rows.push((q, v, b));
        true
    }

    /// The solution with every free coordinate zero.
    fn solution(&self, ncols: usize) -> Vec<u32> {
        let mut beta = vec![0; ncols];
        for (pc, _, rb) in &self.rows {
            beta[*pc] = *rb;
        }
        beta
    }
}

/// Search state shared by the chunks of one run.
struct Plan<'a> {
    search: &'a Search,
    /// Kept-slice positions in decision order.
    order: Vec<usize>,
    /// Rows whose coefficients are fixed once `order[..=i]` is decided.
    ready: Vec<Vec<usize>>,
    ncols: usize,
}

enum Walk {
    Found(Vec<u32>, Vec<u32>),
    Exhausted,
    OutOfBudget,
}

impl Search {
    /// Drops rows no slice touches (infeasible if such a row has nonzero
    /// right-hand side) and keeps a maximal independent set of slices;
    /// the dropped ones add no new matrices to the span.
    fn build(p: u32, all: Vec<FieldMat>, rhs: Vec<u32>, ncols: usize) -> Option<Search> {
        let nrows = rhs.len();
        let live: Vec<usize> = (0..nrows)
            .filter(|&r| all.iter().any(|m| m.row(r).iter().any(|&x| x != 0)))
            .collect();
        if (0..nrows).any(|r| rhs[r] != 0 && !live.contains(&r)) {
            return None;
        }
        let project = |m: &FieldMat| {
            let mut out = FieldMat::zeros(p, live.len(), ncols);
            for (i, &r) in live.iter().enumerate() {
                for c in 0..ncols {
                    out.set(i, c, m.get(r, c));
                }
            }
            out
        };
        let slices: Vec<FieldMat> = all.iter().map(project).collect();
        let rhs: Vec<u32> = live.iter().map(|&r| rhs[r]).collect();
        // independent slices: pivot columns of the matrix whose columns are vec(M_k)
        let width = live.len() * ncols;
        let mut stacked = FieldMat::zeros(p, width, slices.len());
        for (k, m) in slices.iter().enumerate() {
            for (i, &x) in m.data().iter().enumerate() {
                stacked.set(i, k, x);
            }
        }
        let (rr, rank) = stacked.rref();
        let keep: Vec<usize> =
            (0..rank).map(|i| (0..slices.len()).find(|&c| rr.get(i, c) != 0).unwrap()).collect();
        Some(Search { p, slices, keep, rhs })
    }

    fn dim(&self) -> usize {
        self.keep.len()
    }

    fn touches(&self, i: usize, r: usize) -> bool {
        self.slices[self.keep[i]].row(r).iter().any(|&x| x != 0)
    }

    /// Greedy decision order: next is the slice that completes the most rows.
    fn plan(&self) -> Plan<'_> {
        let d = self.dim();
        let rows = self.rhs.len();
        let touch: Vec<Vec<usize>> = (0..rows).map(|r| (0..d).filter(|&i| self.touches(i, r)).collect()).collect();
        let mut missing: Vec<usize> = touch.iter().map(|t| t.len()).collect();
        let mut order = Vec::with_capacity(d);
        let mut used = vec![false; d];
        let mut ready = Vec::with_capacity(d);
        for _ in 0..d {
            let gain = |i: usize| (0..rows).filter(|&r| missing[r] == 1 && touch[r].contains(&i)).count();
            let next = (0..d).filter(|&i| !used[i]).max_by_key(|&i| (gain(i), std::cmp::Reverse(i))).unwrap();
            used[next] = true;
            order.push(next);
            let mut now = Vec::new();
            for r in 0..rows {
                if touch[r].contains(&next) {
                    missing[r] -= 1;
                    if missing[r] == 0 {
                        now.push(r);
                    }
                }
            }
            ready.push(now);
        }
        let ncols = self.slices.first().map_or(0, |m| m.cols());
        Plan { search: self, order, ready, ncols }
    }

    /// First coefficient vector in lexicographic decision order with a
    /// solution. Depth-first: a row joins the echelon system as soon as
    /// every slice touching it is decided, and inconsistent prefixes are
    /// cut. Each of the (at most 64) top-level chunks may visit
    /// `node_cap / chunks` nodes.
    fn run(&self, par: Parallelism, node_cap: u64) -> Result<Option<(Vec<u32>, Vec<u32>)>> {
        let plan = self.plan();
        let d = self.dim();
        let p = self.p as u64;
        let mut top = 0;
        while top < d && p.pow(top as u32 + 1) <= 64 {
            top += 1;
        }
        let chunks: Vec<u64> = (0..p.pow(top as u32)).collect();
        let per_chunk = (node_cap / chunks.len() as u64).max(1);
        let hit = par::find_map_first(par, &chunks, |&chunk| {
            let mut a = vec![0u32; d];
            let mut rest = chunk;
            for i in (0..top).rev() {
                a[i] = (rest % p) as u32;
                rest /= p;
            }
            let mut ech = Echelon { p: self.p, rows: Vec::new() };
            for i in 0..top {
                if !plan.absorb(&mut ech, &a, i) {
                    return None;
                }
            }
            let mut budget = per_chunk;
            match plan.walk(top, &mut a, ech, &mut budget) {
                Walk::Found(a, beta) => Some(Ok((a, beta))),
                Walk::Exhausted => None,
                Walk::OutOfBudget => Some(Err(())),
            }
        });
        match hit {
            None => Ok(None),
            Some(Err(())) => Err(Error::Budget { needed: d, p: self.p, budget: 0 }),
            Some(Ok((a, beta))) => {
                let mut digits = vec![0u32; d];
                for (i, &k) in plan.order.iter().enumerate() {
                    digits[k] = a[i];
                }
                Ok(Some((digits, beta)))
            }
        }
    }
}

impl Plan<'_> {
    /// Adds the rows completed by decision `i`; false on inconsistency.
    fn absorb(&self, ech: &mut Echelon, a: &[u32], i: usize) -> bool {
        let s = self.search;
        let p = s.p as u64;
        for &r in &self.ready[i] {
            let mut v = vec![0u32; self.ncols];
            for (&aj, &oj) in a[..=i].iter().zip(&self.order) {
                let c = aj as u64;
                if c == 0 {
                    continue;
                }
                for (x, &y) in v.iter_mut().zip(s.slices[s.keep[oj]].row(r)) {
                    *x = ((*x as u64 + c * y as u64) % p) as u32;
                }
            }
            if !ech.insert(v, s.rhs[r]) {
                return false;
            }
        }
        true
    }

    fn walk(&self, i: usize, a: &mut Vec<u32>, ech: Echelon, budget: &mut u64) -> Walk {
        if i == a.len() {
            return Walk::Found(a.clone(), ech.solution(self.ncols));
        }
        for x in 0..self.search.p {
            if *budget == 0 {
                return Walk::OutOfBudget;
            }
            *budget -= 1;
            a[i] = x;
            let mut next = ech.clone();
            if !self.absorb(&mut next, a, i) {
                continue;
            }
            match self.walk(i + 1, a, next, budget) {
                Walk::Exhausted => {}
                w => return w,
            }
        }
        a[i] = 0;
        Walk::Exhausted
    }
}

fn combine(p: u32, basis: &[Vec<FieldMat>], coeffs: &[u32], template: &[FieldMat]) -> Vec<FieldMat> {
    let mut out: Vec<FieldMat> = template.iter().map(|m| FieldMat::zeros(p, m.rows(), m.cols())).collect();
    for (c, b) in coeffs.iter().zip(basis) {
        if *c == 0 {
            continue;
        }
        for (o, m) in out.iter_mut().zip(b) {
            *o = o.add(&m.scale(*c));
        }
    }
    out
}

fn zero_comps(src: &ArrModule, dst: &ArrModule) -> Vec<FieldMat> {
    src.dims().iter().zip(dst.dims()).map(|(&a, &b)| FieldMat::zeros(src.p(), b, a)).collect()
}

/// Work allowance for a budget `b`: twice the nodes of a full depth-`b`
/// enumeration, so every search over at most `b` free coordinates finishes.
fn node_cap(p: u32, budget: usize) -> u64 {
    (p as u64).checked_pow(budget as u32).and_then(|n| n.checked_mul(2)).unwrap_or(u64::MAX)
}

/// Decides whether `f` and `g` are `v`-interleaved and returns a witness.
pub fn is_interleaved(
    f: &ArrModule,
    g: &ArrModule,
    v: &[Rat],
    opts: &DecisionOptions,
) -> Result<Option<InterleavingWitness>> {
    check_setting(f, g)?;
    let cone = f.complex().cone();
    if !cone.antipode().contains(v)? {
        return Err(Error::Domain("interleaving direction must lie in the antipodal cone".into()));
    }
    let tv = f.complex().to_grid(v)?;
    let pb = Problem::new(f, g, &tv)?;
    let rhs = pb.rhs();

    let order = if pb.hom_f.len() <= pb.hom_g.len() { [true, false] } else { [false, true] };
    let mut best_needed = usize::MAX;
    for enum_f in order {
        let (enumerated, solved) = if enum_f { (&pb.hom_f, &pb.hom_g) } else { (&pb.hom_g, &pb.hom_f) };
        let slices: Vec<FieldMat> = enumerated.iter().map(|e| pb.slice(enum_f, e)).collect();
        let ncols = solved.len();
        let search = if slices.is_empty() {
            // nothing to enumerate: the only candidate is zero
            let zero = FieldMat::zeros(pb.p, rhs.len(), ncols);
            Search::build(pb.p, vec![zero], rhs.clone(), ncols)
        } else {
            Search::build(pb.p, slices, rhs.clone(), ncols)
        };
        let Some(search) = search else { return Ok(None) };
        let cap = node_cap(pb.p, opts.budget);
        let (digits, beta) = match search.run(opts.parallelism, cap) {
            Ok(Some(hit)) => hit,
            Ok(None) => return Ok(None),
            Err(_) => {
                best_needed = best_needed.min(search.dim());
                continue;
            }
        };
        let mut a = vec![0u32; enumerated.len()];
        for (i, &k) in search.keep.iter().enumerate() {
            if k < a.len() {
                a[k] = digits[i];
            }
        }
        let f_tmpl = zero_comps(&pb.af, &pb.bf);
        let g_tmpl = zero_comps(&pb.ag, &pb.bg);
        let (fc, gc) = if enum_f {
            (combine(pb.p, &pb.hom_f, &a, &f_tmpl), combine(pb.p, &pb.hom_g, &beta, &g_tmpl))
        } else {
            (combine(pb.p, &pb.hom_f, &beta, &f_tmpl), combine(pb.p, &pb.hom_g, &a, &g_tmpl))
        };
        debug_assert_eq!(fc.len(), pb.rf.num_cells());
        debug_assert_eq!(gc.len(), pb.rg.num_cells());
        let fm = ModMorphism::new(pb.af.clone(), pb.bf.clone(), fc)?;
        let gm = ModMorphism::new(pb.ag.clone(), pb.bg.clone(), gc)?;
        return Ok(Some(InterleavingWitness { v: v.to_vec(), f: fm, g: gm }));
    }
    Err(Error::Budget { needed: best_needed, p: pb.p, budget: opts.budget })
}

/// Independent check of a witness through the morphism algebra.
pub fn verify_witness(f: &ArrModule, g: &ArrModule, w: &InterleavingWitness) -> Result<bool> {
    check_setting(f, g)?;
    let tv = f.complex().to_grid(&w.v)?;
    let ok_ends = |m: &ModMorphism, a: &ArrModule, b: &ArrModule| -> Result<bool> {
        let r = m.complex();
        Ok(a.shift_grid(&tv).complex().is_refined_by(r)
            && b.complex().is_refined_by(r)
            && *m.src() == a.shift_grid(&tv).refine_to(r)?
            && *m.dst() == b.refine_to(r)?)
    };
    if !ok_ends(&w.f, f, g)? || !ok_ends(&w.g, g, f)? {
        return Ok(false);
    }
    if w.f.validate().is_err() || w.g.validate().is_err() {
        return Ok(false);
    }
    let zero = vec![Rat::zero(); tv.len()];
    let tv2 = vscale(&Rat::from_int(2), &tv);
    let tri = |outer: &ArrModule, first: &ModMorphism, second: &ModMorphism| -> Result<bool> {
        let sf = first.shift_grid(&tv);
        let chi = smoothing_grid(outer, &tv2, &zero)?;
        let r = CellComplex::refine_all([sf.complex(), second.complex(), chi.complex()])?;
        let lhs = second.refine_to(&r)?.after(&sf.refine_to(&r)?)?;
        Ok(lhs == chi.refine_to(&r)?)
    };
    Ok(tri(f, &w.f, &w.g)? && tri(g, &w.g, &w.f)?)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistanceValue {
    Finite(Rat),
    Infinite,
}

impl DistanceValue {
    pub fn finite(&self) -> Option<&Rat> {
        match self {
            DistanceValue::Finite(r) => Some(r),
            DistanceValue::Infinite => None,
        }
    }
}

impl std::fmt::Display for DistanceValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DistanceValue::Finite(r) => write!(f, "{r}"),
            DistanceValue::Infinite => write!(f, "inf"),
        }
    }
}

impl PartialOrd for DistanceValue {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        use DistanceValue::*;
        Some(match (self, other) {
            (Finite(a), Finite(b)) => a.cmp(b),
            (Finite(_), Infinite) => std::cmp::Ordering::Less,
            (Infinite, Finite(_)) => std::cmp::Ordering::Greater,
            (Infinite, Infinite) => std::cmp::Ordering::Equal,
        })
    }
}

impl std::ops::Add for &DistanceValue {
    type Output = DistanceValue;
    fn add(self, rhs: &DistanceValue) -> DistanceValue {
        match (self, rhs) {
            (DistanceValue::Finite(a), DistanceValue::Finite(b)) => DistanceValue::Finite(a + b),
            _ => DistanceValue::Infinite,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DistanceMode {
    Exact,
    /// Bisection until the bracket is at most this wide.
    Tolerance(Rat),
}

#[derive(Clone, Debug)]
pub struct DistanceResult {
    pub value: DistanceValue,
    /// Whether an interleaving exists at `value` itself.
    pub attained: bool,
    /// Set in tolerance mode: the infimum lies in `[lo, hi]`.
    pub bracket: Option<(Rat, Rat)>,
    pub witness: Option<InterleavingWitness>,
}

/// Scales `c` at which the combinatorics of the shifted arrangements can
/// change: a breakpoint of one translate meeting one of another.
pub fn candidate_scales(f: &ArrModule, g: &ArrModule, tv0: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero()];
    for (k, t) in tv0.iter().enumerate() {
        let t = t.abs();
        if t.is_zero() {
            continue;
        }
        let mut bs: Vec<&Rat> =
            f.complex().axes()[k].breakpoints().iter().chain(g.complex().axes()[k].breakpoints()).collect();
        bs.sort();
        bs.dedup();
        for (i, b) in bs.iter().enumerate() {
            for b2 in &bs[..i] {
                let gap = *b - *b2;
                for m in [1, 2] {
                    out.push(&gap / &(&t * &Rat::from_int(m)));
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

pub fn interleaving_distance(
    f: &ArrModule,
    g: &ArrModule,
    v0: &[Rat],
    mode: &DistanceMode,
    opts: &DecisionOptions,
) -> Result<DistanceResult> {
    check_setting(f, g)?;
    if !f.complex().cone().antipode().interior_contains(v0)? {
        return Err(Error::Domain("direction must lie in the interior of the antipodal cone".into()));
    }
    let tv0 = f.complex().to_grid(v0)?;
    let cands = candidate_scales(f, g, &tv0);
    let top = cands.last().unwrap() + &Rat::one();
    let decide = |c: &Rat| is_interleaved(f, g, &vscale(c, v0), opts);
    let bracket_err = |e: Error, lo: &Rat, hi: &Rat| match e {
        Error::Budget { .. } => Error::BudgetBracket { lo: Box::new(lo.clone()), hi: Box::new(hi.clone()) },
        e => e,
    };
    let infinite = DistanceResult { value: DistanceValue::Infinite, attained: false, bracket: None, witness: None };

    match mode {
        DistanceMode::Exact => {
            let mut pts = Vec::with_capacity(2 * cands.len() + 1);
            for (i, c) in cands.iter().enumerate() {
                if i > 0 {
                    pts.push(cands[i - 1].midpoint(c));
                }
                pts.push(c.clone());
            }
            pts.push(top.clone());
            let last = pts.len() - 1;
            let Some(mut best) = decide(&pts[last]).map_err(|e| bracket_err(e, &pts[0], &top))? else {
                return Ok(infinite);
            };
            // invariant: pts[lo] fails (or lo is before the start), pts[hi] succeeds
            let (mut lo, mut hi): (Option<usize>, usize) = (None, last);
            while lo.map_or(0, |l| l + 1) < hi {
                let mid = (lo.map_or(0, |l| l + 1) + hi) / 2;
                let lo_val = lo.map_or_else(Rat::zero, |l| pts[l].clone());
                match decide(&pts[mid]).map_err(|e| bracket_err(e, &lo_val, &pts[hi]))? {
                    Some(w) => {
                        hi = mid;
                        best = w;
                    }
                    None => lo = Some(mid),
                }
            }
            // pts[hi] is the first success; candidates sit at even positions
            if hi % 2 == 0 && hi != last {
                Ok(DistanceResult {
                    value: DistanceValue::Finite(pts[hi].clone()),
                    attained: true,
                    bracket: None,
                    witness: Some(best),
                })
            } else {
                Ok(DistanceResult {
                    value: DistanceValue::Finite(pts[hi - 1].clone()),
                    attained: false,
                    bracket: None,
                    witness: None,
                })
            }
        }
        DistanceMode::Tolerance(tol) => {
            if !tol.is_positive() {
                return Err(Error::Domain("tolerance must be positive".into()));
            }
            let zero = Rat::zero();
            if let Some(w) = decide(&zero).map_err(|e| bracket_err(e, &zero, &top))? {
                return Ok(DistanceResult {
                    value: DistanceValue::Finite(zero.clone()),
                    attained: true,
                    bracket: Some((zero.clone(), zero)),
                    witness: Some(w),
                });
            }
            let Some(mut best) = decide(&top).map_err(|e| bracket_err(e, &zero, &top))? else {
                return Ok(infinite);
            };
            let (mut lo, mut hi) = (zero, top);
            while &(&hi - &lo) > tol {
                let mid = lo.midpoint(&hi);
                match decide(&mid).map_err(|e| bracket_err(e, &lo, &hi))? {
                    Some(w) => {
                        hi = mid;
                        best = w;
                    }
                    None => lo = mid,
                }
            }
            Ok(DistanceResult {
                value: DistanceValue::Finite(hi.clone()),
                attained: true,
                bracket: Some((lo, hi)),
                witness: Some(best),
            })
        }
    }
}

/// Per-sample interleaving decisions.
pub fn inter_probe(f: &ArrModule, g: &ArrModule, samples: &[RVec], opts: &DecisionOptions) -> Result<Vec<bool>> {
    let anti = f.complex().cone().antipode();
    for s in samples {
        if !anti.interior_contains(s)? {
            return Err(Error::Domain("probe vectors must lie in the interior of the antipodal cone".into()));
        }
    }
    let inner = DecisionOptions { parallelism: Parallelism::Sequential, ..*opts };
    par::map(opts.parallelism, samples, |s| is_interleaved(f, g, s, &inner).map(|w| w.is_some()))
        .into_iter()
        .collect()
}

#[derive(Clone, Debug)]
pub struct IsometryRecord {
    pub lhs: DistanceResult,
    pub rhs: DistanceResult,
    pub equal: bool,
}

/// Distance of `(F, G)` against distance of `(β_*F, β_*G)`.
pub fn isometry_check(f: &ArrModule, g: &ArrModule, v0: &[Rat], opts: &DecisionOptions) -> Result<IsometryRecord> {
    let lhs = interleaving_distance(f, g, v0, &DistanceMode::Exact, opts)?;
    let (bf, bg) = (beta_star(f), beta_star(g));
    let rhs = interleaving_distance(bf.module(), bg.module(), v0, &DistanceMode::Exact, opts)?;
    let equal = lhs.value == rhs.value;
    Ok(IsometryRecord { lhs, rhs, equal })
}

/// `F` is `v`-interleaved with zero iff `χ_{2v,0}` vanishes.
pub fn zero_interleaving_criterion(f: &ArrModule, v: &[Rat]) -> Result<bool> {
    let c = f.complex();
    if !c.cone().antipode().interior_contains(v)? {
        return Err(Error::Domain("direction must lie in the interior of the antipodal cone".into()));
    }
    let tv = c.to_grid(v)?;
    let zero = vec![Rat::zero(); tv.len()];
    Ok(smoothing_grid(f, &vscale(&Rat::from_int(2), &tv), &zero)?.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persist::{point_module, principal_module, random_module, RandomSpec};
    use crate::rat::rvec;

    fn opts() -> DecisionOptions {
        DecisionOptions::default()
    }

    fn principal(x: i64) -> ArrModule {
        principal_module(&CellComplex::line(&[]), &rvec(&[x]), 2).unwrap()
    }

    #[test]
    fn self_interleaving_at_zero() {
        let f = random_module(11, &RandomSpec::plane());
        let w = is_interleaved(&f, &f, &rvec(&[0, 0]), &opts()).unwrap().unwrap();
        assert!(verify_witness(&f, &f, &w).unwrap());
    }

    #[test]
    fn principal_pair() {
        let (f, g) = (principal(0), principal(3));
        let w = is_interleaved(&f, &g, &rvec(&[3]), &opts()).unwrap().unwrap();
        assert!(verify_witness(&f, &g, &w).unwrap());
        assert!(is_interleaved(&f, &g, &rvec(&[2]), &opts()).unwrap().is_none());
        assert!(is_interleaved(&f, &g, &rvec(&[-1]), &opts()).is_err());
        let d = interleaving_distance(&f, &g, &rvec(&[1]), &DistanceMode::Exact, &opts()).unwrap();
        assert_eq!(d.value, DistanceValue::Finite(Rat::from_int(3)));
        assert!(d.attained);
    }

    #[test]
    fn point_module_distance_to_zero() {
        let c = CellComplex::line(&rvec(&[0]));
        let pt = point_module(&c, &rvec(&[0]), 2).unwrap();
        let z = ArrModule::zero(c, 2);
        assert!(is_interleaved(&pt, &z, &rvec(&[1]), &opts()).unwrap().is_some());
        assert!(is_interleaved(&pt, &z, &rvec(&[0]), &opts()).unwrap().is_none());
        let d = interleaving_distance(&pt, &z, &rvec(&[1]), &DistanceMode::Exact, &opts()).unwrap();
        assert_eq!(d.value, DistanceValue::Finite(Rat::zero()));
        assert!(!d.attained);
        assert!(zero_interleaving_criterion(&pt, &rvec(&[1])).unwrap());
        assert!(!zero_interleaving_criterion(&principal(0), &rvec(&[1])).unwrap());
    }

    #[test]
    fn principal_vs_zero_is_infinite() {
        let f = principal(0);
        let z = ArrModule::zero(CellComplex::line(&[]), 2);
        let d = interleaving_distance(&f, &z, &rvec(&[1]), &DistanceMode::Exact, &opts()).unwrap();
        assert_eq!(d.value, DistanceValue::Infinite);
    }

    #[test]
    fn tolerance_mode_brackets() {
        let (f, g) = (principal(0), principal(3));
        let tol = Rat::pow2_neg(10);
        let d = interleaving_distance(&f, &g, &rvec(&[1]), &DistanceMode::Tolerance(tol.clone()), &opts()).unwrap();
        let (lo, hi) = d.bracket.unwrap();
        assert!(&hi - &lo <= tol);
        assert!(lo <= Rat::from_int(3) && Rat::from_int(3) <= hi);
    }

    #[test]
    fn budget_is_reported() {
        let f = random_module(5, &RandomSpec::plane());
        let tight = DecisionOptions { budget: 0, ..opts() };
        match is_interleaved(&f, &f, &rvec(&[1, 1]), &tight) {
            Ok(_) | Err(Error::Budget { .. }) => {}
            Err(e) => panic!("unexpected {e}"),
        }
    }
}
