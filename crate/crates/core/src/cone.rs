//! Exact rational geometry of a closed proper polyhedral cone: membership,
//! the induced order, polar and antipodal cones, the gauge norm of the
//! ball `B_v = (v + γ) ∩ (-v + γ^a)`, and properness of sum maps.
//!
//! A [`ConeSpec`] carries both descriptions of the cone: facet normals
//! (`γ = {x : <ξ, x> >= 0}`) and generators (`γ = cone(g_1, ..., g_m)`).
//! Construction checks that they agree and stores both in a canonical form
//! (primitive integer vectors, irredundant, sorted) so cones compare by `==`.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::rat::{dot, primitive, vadd, vneg, vsub, RVec, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConeSpec {
    dim: usize,
    normals: Vec<RVec>,
    generators: Vec<RVec>,
}

/// Rank of a family of rational vectors.
pub(crate) fn rat_rank(rows: &[RVec], n: usize) -> usize {
    rat_rref(rows.to_vec(), n).1.len()
}

fn rat_rref(mut rows: Vec<RVec>, n: usize) -> (Vec<RVec>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(sel) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = rows[r][c].recip();
        rows[r] = rows[r].iter().map(|x| x * &inv).collect();
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                let piv = rows[r].clone();
                for (a, b) in rows[i].iter_mut().zip(&piv) {
                    *a = &*a - &(&f * b);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Basis of `{x : <row, x> = 0 for every row}`.
pub(crate) fn rat_nullspace(rows: &[RVec], n: usize) -> Vec<RVec> {
    let (red, pivots) = rat_rref(rows.to_vec(), n);
    let mut is_piv = vec![false; n];
    for &c in &pivots {
        is_piv[c] = true;
    }
    (0..n)
        .filter(|&c| !is_piv[c])
        .map(|fc| {
            let mut x = vec![Rat::zero(); n];
            x[fc] = Rat::one();
            for (row, &pc) in red.iter().zip(&pivots) {
                x[pc] = -&row[fc];
            }
            x
        })
        .collect()
}

/// Inverse of a square rational matrix given by rows.
pub(crate) fn rat_inverse(m: &[RVec]) -> Option<Vec<RVec>> {
    let n = m.len();
    let aug: Vec<RVec> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    let (red, pivots) = rat_rref(aug, 2 * n);
    if pivots.len() < n || pivots[n - 1] >= n {
        return None;
    }
    Some(red.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub(crate) fn mat_vec(m: &[RVec], x: &[Rat]) -> RVec {
    m.iter().map(|row| dot(row, x)).collect()
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(0, m, k, &mut cur, &mut out);
    out
}

/// Extreme rays of the pointed cone `{x : <w, x> >= 0 for w in ws}`,
/// enumerated from rank-(n-1) subfamilies of tight constraints.
fn dual_rays(ws: &[RVec], n: usize) -> Vec<RVec> {
    let mut rays: Vec<RVec> = Vec::new();
    for subset in combinations(ws.len(), n - 1) {
        let rows: Vec<RVec> = subset.iter().map(|&i| ws[i].clone()).collect();
        let null = rat_nullspace(&rows, n);
        if null.len() != 1 {
            continue;
        }
        let r = &null[0];
        let signs: Vec<i32> = ws.iter().map(|w| dot(w, r).signum()).collect();
        let cand = if signs.iter().all(|&s| s >= 0) {
            r.clone()
        } else if signs.iter().all(|&s| s <= 0) {
            vneg(r)
        } else {
            continue;
        };
        let cand = primitive(&cand);
        if !rays.contains(&cand) {
            rays.push(cand);
        }
    }
    rays.sort();
    rays
}

fn all_nonneg(ws: &[RVec], x: &[Rat]) -> bool {
    ws.iter().all(|w| !dot(w, x).is_negative())
}

impl ConeSpec {
    /// Validates and canonicalizes a double description.
    pub fn new(dim: usize, normals: Vec<RVec>, generators: Vec<RVec>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Invariant("cone dimension must be positive".into()));
        }
        for v in normals.iter().chain(&generators) {
            check_dim(dim, v.len())?;
        }
        if rat_rank(&normals, dim) < dim {
            return Err(Error::Invariant("cone is not proper: normals do not span the dual space".into()));
        }
        if rat_rank(&generators, dim) < dim {
            return Err(Error::Invariant("cone has empty interior: generators do not span".into()));
        }
        if let Some(g) = generators.iter().find(|g| !all_nonneg(&normals, g)) {
            return Err(Error::Invariant(format!("generator {g:?} violates a facet inequality")));
        }
        let facets = dual_rays(&generators, dim);
        let rays = dual_rays(&normals, dim);
        if let Some(r) = rays.iter().find(|r| !all_nonneg(&facets, r)) {
            return Err(Error::Invariant(format!(
                "normals and generators describe different cones: ray {r:?} is not generated"
            )));
        }
        Ok(ConeSpec { dim, normals: facets, generators: rays })
    }

    /// Builds the cone `{x : <ξ, x> >= 0}` and enumerates its generators.
    pub fn from_normals(dim: usize, normals: Vec<RVec>) -> Result<Self> {
        for v in &normals {
            check_dim(dim, v.len())?;
        }
        if rat_rank(&normals, dim) < dim {
            return Err(Error::Invariant("cone is not proper: normals do not span the dual space".into()));
        }
        let gens = dual_rays(&normals, dim);
        Self::new(dim, normals, gens)
    }

    /// `{x : signs[i] * x_i >= 0}`; every sign must be `1` or `-1`.
    pub fn signed_orthant(signs: &[i64]) -> Self {
        let n = signs.len();
        let axes: Vec<RVec> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { Rat::from_int(signs[i].signum()) } else { Rat::zero() }).collect())
            .collect();
        Self::new(n, axes.clone(), axes).expect("signed orthant")
    }

    /// The cone `(-∞, 0]^n`, whose order is the usual product order.
    pub fn nonpositive_orthant(n: usize) -> Self {
        Self::signed_orthant(&vec![-1; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn normals(&self) -> &[RVec] {
        &self.normals
    }

    pub fn generators(&self) -> &[RVec] {
        &self.generators
    }

    pub fn contains(&self, x: &[Rat]) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        Ok(all_nonneg(&self.normals, x))
    }

    pub fn interior_contains(&self, x: &[Rat]) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        Ok(self.normals.iter().all(|w| dot(w, x).is_positive()))
    }

    pub fn antipode(&self) -> ConeSpec {
        let neg = |vs: &[RVec]| {
            let mut out: Vec<RVec> = vs.iter().map(|v| vneg(v)).collect();
            out.sort();
            out
        };
        ConeSpec { dim: self.dim, normals: neg(&self.normals), generators: neg(&self.generators) }
    }

    /// The polar cone, living in the dual space.
    pub fn polar(&self) -> ConeSpec {
        ConeSpec { dim: self.dim, normals: self.generators.clone(), generators: self.normals.clone() }
    }

    /// `x <=_γ y`, i.e. `x + γ ⊂ y + γ`, i.e. `x - y ∈ γ`.
    pub fn leq(&self, x: &[Rat], y: &[Rat]) -> Result<bool> {
        check_dim(self.dim, y.len())?;
        self.contains(&vsub(x, y))
    }

    /// A rational point of the interior: the sum of the generators.
    pub fn interior_witness(&self) -> RVec {
        self.generators
            .iter()
            .fold(vec![Rat::zero(); self.dim], |acc, g| vadd(&acc, g))
    }

    /// Whether the ray generators of `self` and `other` span the same cone.
    pub fn same_cone(&self, other: &ConeSpec) -> bool {
        self.dim == other.dim
            && self.generators.iter().all(|g| all_nonneg(&other.normals, g))
            && other.generators.iter().all(|g| all_nonneg(&self.normals, g))
    }

    /// Whether the cone is simplicial (as many facets as the dimension).
    pub fn is_simplicial(&self) -> bool {
        self.normals.len() == self.dim
    }
}

/// A cone together with a direction `v ∈ Int(γ^a)`; defines the gauge norm
/// whose unit ball is `(v + γ) ∩ (-v + γ^a)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaugeSpec {
    cone: ConeSpec,
    v: RVec,
}

impl GaugeSpec {
    pub fn new(cone: ConeSpec, v: RVec) -> Result<Self> {
        if !cone.antipode().interior_contains(&v)? {
            return Err(Error::Domain(format!("direction {v:?} is not interior to the antipodal cone")));
        }
        Ok(GaugeSpec { cone, v })
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    pub fn direction(&self) -> &[Rat] {
        &self.v
    }

    /// Closed form `max_i |<ξ_i, x>| / |<ξ_i, v>|` over the facet normals.
    pub fn gauge(&self, x: &[Rat]) -> Result<Rat> {
        check_dim(self.cone.dim, x.len())?;
        Ok(self
            .cone
            .normals
            .iter()
            .map(|w| dot(w, x).abs() / dot(w, &self.v).abs())
            .max()
            .unwrap_or_else(Rat::zero))
    }

    /// `x ∈ λ B_v`, decided from the definition with cone membership only.
    pub fn in_scaled_ball(&self, lambda: &Rat, x: &[Rat]) -> Result<bool> {
        let lv: RVec = self.v.iter().map(|c| lambda * c).collect();
        let in_upper = self.cone.contains(&vsub(x, &lv))?;
        let in_lower = self.cone.antipode().contains(&vadd(x, &lv))?;
        Ok(in_upper && in_lower)
    }

    pub fn ball_membership(&self, r: &Rat, x: &[Rat]) -> Result<bool> {
        if r.is_negative() {
            return Err(Error::Domain("ball radius must be non-negative".into()));
        }
        Ok(self.gauge(x)? <= *r)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MapCompat {
    pub maps_cone: bool,
    pub maps_interior: bool,
}

/// Whether the linear map `m` (rows = `dst.dim`) sends `src` into `dst`, and
/// `Int(src)` into `Int(dst)`.
pub fn linear_map_compatible(m: &[RVec], src: &ConeSpec, dst: &ConeSpec) -> Result<MapCompat> {
    check_dim(dst.dim, m.len())?;
    for row in m {
        check_dim(src.dim, row.len())?;
    }
    let maps_cone = src.generators.iter().all(|g| all_nonneg(&dst.normals, &mat_vec(m, g)));
    // With γ mapped into λ, every <η, M g> is >= 0, so positivity on the
    // interior reduces to positivity at one interior point.
    let maps_interior = maps_cone && dst.interior_contains(&mat_vec(m, &src.interior_witness()))?;
    Ok(MapCompat { maps_cone, maps_interior })
}

/// `conv(vertices) + cone(recession_generators)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolySet {
    pub vertices: Vec<RVec>,
    pub recession_generators: Vec<RVec>,
}

impl PolySet {
    pub fn new(vertices: Vec<RVec>, recession_generators: Vec<RVec>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Invariant("polyhedral set needs at least one vertex".into()));
        }
        Ok(PolySet { vertices, recession_generators })
    }

    /// The closed ray `t + cone(dir)`.
    pub fn ray(t: RVec, dir: RVec) -> Self {
        PolySet { vertices: vec![t], recession_generators: vec![dir] }
    }

    pub fn bounded(vertices: Vec<RVec>) -> Self {
        PolySet { vertices, recession_generators: Vec::new() }
    }
}

/// Feasibility of `{x : a·x >= b}` by Fourier–Motzkin elimination.
pub(crate) fn fm_feasible(mut ineqs: Vec<(RVec, Rat)>, nvars: usize) -> bool {
    for k in 0..nvars {
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for (a, b) in ineqs {
            match a[k].signum() {
                1 => pos.push((a, b)),
                -1 => neg.push((a, b)),
                _ => rest.push((a, b)),
            }
        }
        for (ap, bp) in &pos {
            for (an, bn) in &neg {
                let (sp, sn) = (-&an[k], ap[k].clone());
                let a: RVec = ap.iter().zip(an).map(|(x, y)| &(x * &sp) + &(y * &sn)).collect();
                rest.push((a, &(bp * &sp) + &(bn * &sn)));
            }
        }
        ineqs = rest;
    }
    ineqs.iter().all(|(_, b)| !b.is_positive())
}

/// Properness of the sum map on `γ × A`: no nonzero `u ∈ γ` with `-u` in
/// the recession cone of `A`.
pub fn is_gamma_proper(cone: &ConeSpec, a: &PolySet) -> Result<bool> {
    for v in a.vertices.iter().chain(&a.recession_generators) {
        check_dim(cone.dim, v.len())?;
    }
    let m = a.recession_generators.len();
    if m == 0 {
        return Ok(true);
    }
    // u = sum_j mu_j (-r_j), mu >= 0, u ∈ γ, <w, u> = 1 with w strictly
    // positive on γ \ {0}.
    let w = cone.normals.iter().fold(vec![Rat::zero(); cone.dim], |acc, x| vadd(&acc, x));
    let negr: Vec<RVec> = a.recession_generators.iter().map(|r| vneg(r)).collect();
    let mut ineqs = Vec::new();
    for j in 0..m {
        let mut e = vec![Rat::zero(); m];
        e[j] = Rat::one();
        ineqs.push((e, Rat::zero()));
    }
    for xi in &cone.normals {
        ineqs.push((negr.iter().map(|r| dot(xi, r)).collect(), Rat::zero()));
    }
    let wn: RVec = negr.iter().map(|r| dot(&w, r)).collect();
    ineqs.push((wn.clone(), Rat::one()));
    ineqs.push((vneg(&wn), -Rat::one()));
    Ok(!fm_feasible(ineqs, m))
}
