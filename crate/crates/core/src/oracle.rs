//! Slow reference computations used to cross-check the engines. Nothing
//! here shares search logic with the fast paths.

use crate::arrangement::{Cell, CellComplex};
use crate::cone::GaugeSpec;
use crate::error::{Error, Result};
use crate::exactla::FieldMat;
use crate::persist::{smoothing, ArrModule, ModMorphism};
use crate::rat::{vscale, Rat};

/// Brackets `g(x)` by bisection on ball membership alone: returns
/// `(lo, hi)` with `x ∉ lo·B` (unless `lo = 0`), `x ∈ hi·B`, and
/// `hi - lo <= 2^-bits`.
pub fn gauge_bisection(g: &GaugeSpec, x: &[Rat], bits: u32) -> Result<(Rat, Rat)> {
    if g.in_scaled_ball(&Rat::zero(), x)? {
        return Ok((Rat::zero(), Rat::zero()));
    }
    let mut hi = Rat::one();
    while !g.in_scaled_ball(&hi, x)? {
        hi = &hi * &Rat::from_int(2);
    }
    let mut lo = Rat::zero();
    let width = Rat::pow2_neg(bits);
    while &hi - &lo > width {
        let mid = lo.midpoint(&hi);
        if g.in_scaled_ball(&mid, x)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((lo, hi))
}

/// Minimum over all bijections of the largest matched gap.
pub fn bottleneck_bruteforce(s: &[Rat], t: &[Rat]) -> Option<Rat> {
    if s.len() != t.len() {
        return None;
    }
    let mut perm: Vec<usize> = (0..t.len()).collect();
    let mut best: Option<Rat> = None;
    permute(&mut perm, 0, &mut |p| {
        let v = s.iter().zip(p).map(|(a, &j)| (a - &t[j]).abs()).max().unwrap_or_else(Rat::zero);
        if best.as_ref().is_none_or(|b| v < *b) {
            best = Some(v);
        }
    });
    best
}

fn permute(p: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == p.len() {
        visit(p);
        return;
    }
    for i in k..p.len() {
        p.swap(k, i);
        permute(p, k + 1, visit);
        p.swap(k, i);
    }
}

fn all_matrices(p: u32, rows: usize, cols: usize) -> Vec<FieldMat> {
    let n = rows * cols;
    let total = (p as usize).pow(n as u32);
    (0..total)
        .map(|mut code| {
            let mut m = FieldMat::zeros(p, rows, cols);
            for e in 0..n {
                m.set(e / cols, e % cols, (code % p as usize) as u32);
                code /= p as usize;
            }
            m
        })
        .collect()
}

/// Every natural map `a -> b` (same complex), by depth-first search over
/// cellwise matrices with naturality pruning. Fails once more than
/// `limit` maps have been found.
pub fn all_natural_maps(a: &ArrModule, b: &ArrModule, limit: usize) -> Result<Vec<ModMorphism>> {
    if a.complex() != b.complex() || a.p() != b.p() {
        return Err(Error::Domain("natural maps need modules on one complex".into()));
    }
    let c = a.complex();
    let cells: Vec<Cell> = c.cells().collect();
    let mut choice: Vec<Option<FieldMat>> = vec![None; cells.len()];
    let mut out = Vec::new();
    let options: Vec<Vec<FieldMat>> = cells.iter().map(|x| all_matrices(a.p(), b.dim_at(x), a.dim_at(x))).collect();
    dfs(a, b, c, &cells, &options, 0, &mut choice, &mut out, limit)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    a: &ArrModule,
    b: &ArrModule,
    c: &CellComplex,
    cells: &[Cell],
    options: &[Vec<FieldMat>],
    i: usize,
    choice: &mut Vec<Option<FieldMat>>,
    out: &mut Vec<ModMorphism>,
    limit: usize,
) -> Result<()> {
    if i == cells.len() {
        if out.len() >= limit {
            return Err(Error::Budget { needed: out.len() + 1, p: a.p(), budget: limit });
        }
        let comps = choice.iter().map(|m| m.clone().unwrap()).collect();
        out.push(ModMorphism::new(a.clone(), b.clone(), comps)?);
        return Ok(());
    }
    let x = &cells[i];
    for m in &options[i] {
        choice[i] = Some(m.clone());
        if consistent(a, b, c, x, choice) {
            dfs(a, b, c, cells, options, i + 1, choice, out, limit)?;
        }
    }
    choice[i] = None;
    Ok(())
}

/// Naturality squares touching `x` whose other corner is already chosen.
fn consistent(a: &ArrModule, b: &ArrModule, c: &CellComplex, x: &Cell, choice: &[Option<FieldMat>]) -> bool {
    let at = |y: &Cell| choice[c.linear(y)].as_ref();
    let phi = at(x).unwrap();
    for k in 0..c.dim() {
        if let Some(up) = c.upper_cover(x, k) {
            if let Some(psi) = at(&up) {
                if phi.mul(a.cover_map(x, k).unwrap()) != b.cover_map(x, k).unwrap().mul(psi) {
                    return false;
                }
            }
        }
        if let Some(lo) = c.lower_cover(x, k) {
            if let Some(psi) = at(&lo) {
                if psi.mul(a.cover_map(&lo, k).unwrap()) != b.cover_map(&lo, k).unwrap().mul(phi) {
                    return false;
                }
            }
        }
    }
    true
}

/// Exhaustive `v`-interleaving test: every pair of natural maps
/// `τ_v F -> G`, `τ_v G -> F` is tried against both triangles, each
/// evaluated on a common refinement of the composite and the smoothing.
pub fn exhaustive_interleaved(f: &ArrModule, g: &ArrModule, v: &[Rat], limit: usize) -> Result<bool> {
    let c = f.complex();
    let zero = vec![Rat::zero(); v.len()];
    let v2 = vscale(&Rat::from_int(2), v);
    let (chi_f, chi_g) = (smoothing(f, &v2, &zero)?, smoothing(g, &v2, &zero)?);
    let sf = crate::persist::shift(f, v)?;
    let sg = crate::persist::shift(g, v)?;
    let r = CellComplex::refine_all([c, g.complex(), sf.complex(), sg.complex()])?;

    let fs = all_natural_maps(&sf.refine_to(&r)?, &g.refine_to(&r)?, limit)?;
    let gs = all_natural_maps(&sg.refine_to(&r)?, &f.refine_to(&r)?, limit)?;
    let shifted = |m: &ModMorphism| m.shift(v);
    let fs_shift: Vec<ModMorphism> = fs.iter().map(shifted).collect::<Result<_>>()?;
    let gs_shift: Vec<ModMorphism> = gs.iter().map(shifted).collect::<Result<_>>()?;
    for (f1, f1s) in fs.iter().zip(&fs_shift) {
        for (g1, g1s) in gs.iter().zip(&gs_shift) {
            if triangle(g1, f1s, &chi_f)? && triangle(f1, g1s, &chi_g)? {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// `second ∘ first == chi` on a common refinement.
fn triangle(second: &ModMorphism, first: &ModMorphism, chi: &ModMorphism) -> Result<bool> {
    let r = CellComplex::refine_all([second.complex(), first.complex(), chi.complex()])?;
    let lhs = second.refine_to(&r)?.after(&first.refine_to(&r)?)?;
    Ok(lhs == chi.refine_to(&r)?)
}
