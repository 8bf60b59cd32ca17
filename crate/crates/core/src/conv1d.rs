//! Degree-0 convolution calculus for sums of closed rays on the line.
//!
//! The cone is `γ = (-∞, 0]`, so a ray sheaf with births `t_1, ..., t_m`
//! is `⊕ k_[t_i, ∞)`. A nonzero map `k_[s,∞) -> k_[t,∞)` exists iff
//! `s <= t`, and every such map is a multiple of the canonical one, so
//! morphisms between ray sheaves are matrices with a prescribed zero
//! pattern.

use serde::{Deserialize, Serialize};

use crate::arrangement::CellComplex;
use crate::cone::{is_gamma_proper, ConeSpec, GaugeSpec, PolySet};
use crate::error::{Error, Result};
use crate::exactla::FieldMat;
use crate::interleave::{interleaving_distance, DecisionOptions, DistanceMode, DistanceResult, DistanceValue};
use crate::persist::ArrModule;
use crate::rat::Rat;
use crate::sites::GammaModule;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaySheaf {
    births: Vec<Rat>,
}

impl RaySheaf {
    pub fn new(mut births: Vec<Rat>) -> Self {
        births.sort();
        RaySheaf { births }
    }

    pub fn empty() -> Self {
        RaySheaf { births: Vec::new() }
    }

    pub fn births(&self) -> &[Rat] {
        &self.births
    }

    pub fn len(&self) -> usize {
        self.births.len()
    }

    pub fn is_empty(&self) -> bool {
        self.births.is_empty()
    }
}

/// `allowed[j * cols + i]`: a nonzero map from source summand `i` to target
/// summand `j` exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomPattern {
    pub rows: usize,
    pub cols: usize,
    pub allowed: Vec<bool>,
}

impl HomPattern {
    pub fn get(&self, j: usize, i: usize) -> bool {
        self.allowed[j * self.cols + i]
    }

    pub fn count(&self) -> usize {
        self.allowed.iter().filter(|&&b| b).count()
    }
}

pub fn hom_pattern(src: &[Rat], dst: &[Rat]) -> HomPattern {
    let allowed = dst.iter().flat_map(|t| src.iter().map(move |s| s <= t)).collect();
    HomPattern { rows: dst.len(), cols: src.len(), allowed }
}

fn gauge_unit(g: &GaugeSpec) -> Result<Rat> {
    if g.cone().dim() != 1 {
        return Err(Error::Domain("ray sheaves live on the line".into()));
    }
    Ok(g.direction()[0].abs())
}

fn shifted(f: &RaySheaf, by: &Rat) -> Vec<Rat> {
    f.births.iter().map(|t| t - by).collect()
}

/// `K_r ⋆ F`: the ball of gauge radius `r` is `[-r|v|, r|v|]`, and its
/// proper convolution with `k_[t,∞)` is `k_[t - r|v|, ∞)`.
pub fn convolve_ball(f: &RaySheaf, r: &Rat, g: &GaugeSpec) -> Result<RaySheaf> {
    if r.is_negative() {
        return Err(Error::Domain("ball radius must be non-negative".into()));
    }
    let u = gauge_unit(g)?;
    Ok(RaySheaf::new(shifted(f, &(r * &u))))
}

/// Support of a single summand on the line.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Support1 {
    /// `[a, ∞)`
    Ray(Rat),
    /// `[a, b]`
    Bounded(Rat, Rat),
}

/// Support of the nonproper convolution with `k_{γ^a}`: `S + [0, ∞)`.
pub fn fixed_support(s: &Support1) -> Support1 {
    match s {
        Support1::Ray(a) | Support1::Bounded(a, _) => Support1::Ray(a.clone()),
    }
}

pub fn summand_is_fixed(s: &Support1) -> bool {
    fixed_support(s) == *s
}

/// Every summand is fixed by convolution with `k_{γ^a}`.
pub fn gamma_fixed_check(f: &RaySheaf) -> bool {
    f.births.iter().all(|t| summand_is_fixed(&Support1::Ray(t.clone())))
}

/// Whether some `A` in the pattern is invertible with `A⁻¹` in `inverse`,
/// over `F_2`. Entries of the pattern are enumerated in Gray-code order.
fn pattern_search(pattern: &HomPattern, inverse: &HomPattern) -> bool {
    let n = pattern.rows;
    let slots: Vec<(usize, usize)> =
        (0..n).flat_map(|j| (0..n).map(move |i| (j, i))).filter(|&(j, i)| pattern.get(j, i)).collect();
    let mut rows = vec![0u64; n];
    let total: u64 = 1 << slots.len();
    for step in 0..total {
        if step > 0 {
            let (j, i) = slots[step.trailing_zeros() as usize];
            rows[j] ^= 1 << i;
        }
        if let Some(inv) = invert_f2(&rows, n) {
            let fits = (0..n).all(|r| (0..n).all(|c| (inv[r] >> c) & 1 == 0 || inverse.get(r, c)));
            if fits {
                return true;
            }
        }
    }
    false
}

/// Gauss–Jordan inverse of a bit-row matrix over `F_2`.
fn invert_f2(rows: &[u64], n: usize) -> Option<Vec<u64>> {
    let mut a = rows.to_vec();
    let mut b: Vec<u64> = (0..n).map(|i| 1 << i).collect();
    for c in 0..n {
        let piv = (c..n).find(|&r| (a[r] >> c) & 1 == 1)?;
        a.swap(c, piv);
        b.swap(c, piv);
        for r in 0..n {
            if r != c && (a[r] >> c) & 1 == 1 {
                a[r] ^= a[c];
                b[r] ^= b[c];
            }
        }
    }
    Some(b)
}

/// Sorted matching: both birth lists sorted, `i`-th matched to `i`-th.
pub fn sorted_matching_value(s: &[Rat], t: &[Rat]) -> Option<Rat> {
    if s.len() != t.len() {
        return None;
    }
    let (mut s, mut t) = (s.to_vec(), t.to_vec());
    s.sort();
    t.sort();
    Some(s.iter().zip(&t).map(|(a, b)| (a - b).abs()).max().unwrap_or_else(Rat::zero))
}

/// How [`is_c_isomorphic_with`] reached its answer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CIsoMethod {
    Search,
    SortedMatching,
}

/// `F` and `G` are `c`-isomorphic: there are `M: K_c ⋆ F -> G` and
/// `N: K_c ⋆ G -> F` whose composites are the canonical maps, i.e.
/// `N M = I` and `M N = I` in the ray bases.
pub fn is_c_isomorphic(f: &RaySheaf, g: &RaySheaf, c: &Rat, gauge: &GaugeSpec, budget: usize) -> Result<bool> {
    Ok(is_c_isomorphic_with(f, g, c, gauge, budget)?.0)
}

pub fn is_c_isomorphic_with(
    f: &RaySheaf,
    g: &RaySheaf,
    c: &Rat,
    gauge: &GaugeSpec,
    budget: usize,
) -> Result<(bool, CIsoMethod)> {
    if c.is_negative() {
        return Err(Error::Domain("c must be non-negative".into()));
    }
    if f.len() != g.len() {
        return Ok((false, CIsoMethod::Search));
    }
    let r = c * &gauge_unit(gauge)?;
    let m = hom_pattern(&shifted(f, &r), &g.births);
    let n = hom_pattern(&shifted(g, &r), &f.births);
    let smaller = m.count().min(n.count());
    if smaller <= budget && f.len() <= 64 {
        let found = if m.count() <= n.count() { pattern_search(&m, &n) } else { pattern_search(&n, &m) };
        return Ok((found, CIsoMethod::Search));
    }
    let v = sorted_matching_value(&f.births, &g.births).expect("equal sizes");
    Ok((v <= r, CIsoMethod::SortedMatching))
}

/// Exact convolution distance. Infinite when the multiplicities differ;
/// otherwise the least candidate `|s_i - t_j| / |v|` at which the sheaves
/// are c-isomorphic, certified by a refutation just below it.
pub fn convolution_distance(f: &RaySheaf, g: &RaySheaf, gauge: &GaugeSpec, budget: usize) -> Result<DistanceResult> {
    if f.len() != g.len() {
        return Ok(DistanceResult { value: DistanceValue::Infinite, attained: false, bracket: None, witness: None });
    }
    let u = gauge_unit(gauge)?;
    let mut cands = vec![Rat::zero()];
    for s in &f.births {
        for t in &g.births {
            cands.push(&(s - t).abs() / &u);
        }
    }
    cands.sort();
    cands.dedup();
    let iso = |c: &Rat| is_c_isomorphic(f, g, c, gauge, budget);
    let (mut lo, mut hi) = (0usize, cands.len() - 1);
    if !iso(&cands[hi])? {
        return Err(Error::Invariant("ray sheaves of equal size failed at the largest candidate".into()));
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if iso(&cands[mid])? {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if hi > 0 && iso(&cands[hi - 1].midpoint(&cands[hi]))? {
        return Err(Error::Invariant("c-isomorphism is not monotone between candidates".into()));
    }
    Ok(DistanceResult {
        value: DistanceValue::Finite(cands[hi].clone()),
        attained: true,
        bracket: None,
        witness: None,
    })
}

/// The γ-module `x ↦ F(x + Int γ)`: summand `i` contributes `k` strictly
/// above `t_i`, with the canonical inclusions as structure maps.
pub fn ray_gamma_module(f: &RaySheaf, p: u32) -> GammaModule {
    let c = CellComplex::line(&f.births);
    let births = f.births.clone();
    let count = {
        let c = c.clone();
        move |cell: &crate::arrangement::Cell| {
            let x = c.representative(cell);
            births.iter().filter(|t| **t < x[0]).count()
        }
    };
    // births are sorted, so the summands alive below are a prefix of those alive above
    let m = ArrModule::from_fn(c, p, &count, |b, a, _| {
        let (da, db) = (count(a), count(b));
        let mut m = FieldMat::zeros(p, da, db);
        for i in 0..da.min(db) {
            m.set(i, i, 1);
        }
        m
    })
    .expect("ray modules are functorial");
    GammaModule::new(m).expect("ray modules are gamma-continuous")
}

#[derive(Clone, Debug)]
pub struct ConvComparison {
    pub d_conv: DistanceValue,
    pub d_int: DistanceValue,
    pub equal: bool,
}

pub fn compare_with_interleaving(
    f: &RaySheaf,
    g: &RaySheaf,
    gauge: &GaugeSpec,
    budget: usize,
    opts: &DecisionOptions,
) -> Result<ConvComparison> {
    let d_conv = convolution_distance(f, g, gauge, budget)?.value;
    let (mf, mg) = (ray_gamma_module(f, 2), ray_gamma_module(g, 2));
    let d_int = interleaving_distance(mf.module(), mg.module(), gauge.direction(), &DistanceMode::Exact, opts)?.value;
    let equal = d_conv == d_int;
    Ok(ConvComparison { d_conv, d_int, equal })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProperReport {
    /// `A` is γ-proper.
    pub literal: bool,
    /// `A` is γ^a-proper.
    pub mirrored: bool,
}

pub fn properness_of_supports(supports: &[Support1], cone: &ConeSpec) -> Result<ProperReport> {
    if cone.dim() != 1 {
        return Err(Error::Domain("supports live on the line".into()));
    }
    let sets: Vec<PolySet> = supports
        .iter()
        .map(|s| match s {
            Support1::Ray(a) => PolySet::ray(vec![a.clone()], vec![Rat::one()]),
            Support1::Bounded(a, b) => PolySet::bounded(vec![vec![a.clone()], vec![b.clone()]]),
        })
        .collect();
    let anti = cone.antipode();
    let mut literal = true;
    let mut mirrored = true;
    for s in &sets {
        literal &= is_gamma_proper(cone, s)?;
        mirrored &= is_gamma_proper(&anti, s)?;
    }
    Ok(ProperReport { literal, mirrored })
}

/// γ-properness of the support of `F`, literally and for the antipodal cone.
pub fn properness_report(f: &RaySheaf, cone: &ConeSpec) -> Result<ProperReport> {
    let supports: Vec<Support1> = f.births.iter().map(|t| Support1::Ray(t.clone())).collect();
    properness_of_supports(&supports, cone)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interleave::DEFAULT_BUDGET;
    use crate::rat::rvec;

    fn sheaf(bs: &[i64]) -> RaySheaf {
        RaySheaf::new(rvec(bs))
    }

    fn gauge(v: i64) -> GaugeSpec {
        GaugeSpec::new(ConeSpec::nonpositive_orthant(1), rvec(&[v])).unwrap()
    }

    #[test]
    fn convolve_examples() {
        let f = sheaf(&[3]);
        assert_eq!(convolve_ball(&f, &Rat::zero(), &gauge(1)).unwrap(), f);
        assert_eq!(convolve_ball(&f, &Rat::one(), &gauge(1)).unwrap(), sheaf(&[2]));
        let (r, r2) = (Rat::new(1, 3), Rat::new(5, 2));
        let twice = convolve_ball(&convolve_ball(&f, &r, &gauge(2)).unwrap(), &r2, &gauge(2)).unwrap();
        assert_eq!(twice, convolve_ball(&f, &(&r + &r2), &gauge(2)).unwrap());
        assert!(convolve_ball(&f, &Rat::from_int(-1), &gauge(1)).is_err());
    }

    #[test]
    fn fixed_point_examples() {
        assert!(gamma_fixed_check(&sheaf(&[0, 2, 2])));
        assert!(gamma_fixed_check(&RaySheaf::empty()));
        let seg = Support1::Bounded(Rat::zero(), Rat::one());
        assert_eq!(fixed_support(&seg), Support1::Ray(Rat::zero()));
        assert!(!summand_is_fixed(&seg));
    }

    #[test]
    fn c_iso_examples() {
        let b = DEFAULT_BUDGET;
        let f = sheaf(&[0, 1]);
        assert!(is_c_isomorphic(&f, &f, &Rat::zero(), &gauge(1), b).unwrap());
        let (a, c) = (sheaf(&[0]), sheaf(&[3]));
        assert!(is_c_isomorphic(&a, &c, &Rat::from_int(3), &gauge(1), b).unwrap());
        assert!(!is_c_isomorphic(&a, &c, &Rat::from_int(2), &gauge(1), b).unwrap());
        for k in [0, 1, 10, 100] {
            assert!(!is_c_isomorphic(&a, &RaySheaf::empty(), &Rat::from_int(k), &gauge(1), b).unwrap());
        }
    }

    #[test]
    fn distance_examples() {
        let b = DEFAULT_BUDGET;
        let f = sheaf(&[0, 10]);
        assert_eq!(convolution_distance(&f, &f, &gauge(1), b).unwrap().value, DistanceValue::Finite(Rat::zero()));
        let d = convolution_distance(&sheaf(&[0]), &sheaf(&[3]), &gauge(1), b).unwrap();
        assert_eq!(d.value, DistanceValue::Finite(Rat::from_int(3)));
        let d = convolution_distance(&f, &sheaf(&[1, 10]), &gauge(1), b).unwrap();
        assert_eq!(d.value, DistanceValue::Finite(Rat::one()));
        let d = convolution_distance(&f, &sheaf(&[1]), &gauge(1), b).unwrap();
        assert_eq!(d.value, DistanceValue::Infinite);
    }

    #[test]
    fn comparison_examples() {
        let opts = DecisionOptions::default();
        let b = DEFAULT_BUDGET;
        let (f, g) = (sheaf(&[0]), sheaf(&[3]));
        let r = compare_with_interleaving(&f, &g, &gauge(1), b, &opts).unwrap();
        assert_eq!((r.d_conv.clone(), r.equal), (DistanceValue::Finite(Rat::from_int(3)), true));
        let r = compare_with_interleaving(&f, &g, &gauge(3), b, &opts).unwrap();
        assert_eq!((r.d_int.clone(), r.equal), (DistanceValue::Finite(Rat::one()), true));
        let r = compare_with_interleaving(&f, &f, &gauge(1), b, &opts).unwrap();
        assert_eq!(r.d_int, DistanceValue::Finite(Rat::zero()));
    }

    #[test]
    fn properness_examples() {
        let down = ConeSpec::nonpositive_orthant(1);
        let r = properness_report(&sheaf(&[0]), &down).unwrap();
        assert_eq!((r.literal, r.mirrored), (false, true));
        let r = properness_report(&RaySheaf::empty(), &down).unwrap();
        assert_eq!((r.literal, r.mirrored), (true, true));
        let r = properness_of_supports(&[Support1::Bounded(Rat::zero(), Rat::one())], &down).unwrap();
        assert_eq!((r.literal, r.mirrored), (true, true));
    }
}
