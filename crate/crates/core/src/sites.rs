//! Open sets of the Alexandrov and γ-topologies, the functors `β_*`, `β⁻¹`,
//! `α_*` on arrangement modules, and ephemeral detection.
//!
//! The limits defining `β_*` and the stalks defining `β⁻¹` are infinite, but
//! on an arrangement module they stabilize on the cell reached by the corner
//! approach `x + δc`: sections over `x + Int γ` are the value on
//! `just_inside(a, interior)`, and the stalk of a γ-module at `x` is its
//! value on `just_inside(a, antipodal_interior)`.

use crate::arrangement::{orthant_frame, Approach, Cell, CellComplex};
use crate::cone::{mat_vec, rat_inverse, ConeSpec};
use crate::error::{Error, Result};
use crate::exactla::Diagram;
use crate::persist::{pointwise_image, pointwise_kernel, ArrModule, ModMorphism};
use crate::rat::{vsub, RVec, Rat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PieceKind {
    /// `x + γ`
    Closed,
    /// `x + Int γ`
    Interior,
}

/// A finite union of principal pieces, kept as an antichain.
#[derive(Clone, Debug)]
pub struct OpenSet {
    cone: ConeSpec,
    pieces: Vec<(PieceKind, RVec)>,
}

fn piece_in_piece(cone: &ConeSpec, p: &(PieceKind, RVec), q: &(PieceKind, RVec)) -> bool {
    let d = vsub(&p.1, &q.1);
    match (p.0, q.0) {
        (PieceKind::Closed, PieceKind::Interior) => cone.interior_contains(&d).unwrap_or(false),
        _ => cone.contains(&d).unwrap_or(false),
    }
}

impl OpenSet {
    pub fn new(cone: ConeSpec, pieces: Vec<(PieceKind, RVec)>) -> Result<Self> {
        for (_, x) in &pieces {
            if x.len() != cone.dim() {
                return Err(Error::Dimension { expected: cone.dim(), got: x.len() });
            }
        }
        let mut kept: Vec<(PieceKind, RVec)> = Vec::new();
        for (i, p) in pieces.iter().enumerate() {
            let covered = pieces.iter().enumerate().any(|(j, q)| {
                j != i && piece_in_piece(&cone, p, q) && (!piece_in_piece(&cone, q, p) || j < i)
            });
            if !covered {
                kept.push(p.clone());
            }
        }
        kept.sort();
        Ok(OpenSet { cone, pieces: kept })
    }

    pub fn empty(cone: ConeSpec) -> Self {
        OpenSet { cone, pieces: Vec::new() }
    }

    pub fn principal(cone: ConeSpec, x: RVec) -> Result<Self> {
        Self::new(cone, vec![(PieceKind::Closed, x)])
    }

    pub fn interior_principal(cone: ConeSpec, x: RVec) -> Result<Self> {
        Self::new(cone, vec![(PieceKind::Interior, x)])
    }

    pub fn pieces(&self) -> &[(PieceKind, RVec)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains_point(&self, z: &[Rat]) -> bool {
        self.pieces.iter().any(|(k, x)| {
            let d = vsub(z, x);
            match k {
                PieceKind::Closed => self.cone.contains(&d).unwrap_or(false),
                PieceKind::Interior => self.cone.interior_contains(&d).unwrap_or(false),
            }
        })
    }

    fn uniform_kind(&self) -> Option<PieceKind> {
        let first = self.pieces.first()?.0;
        self.pieces.iter().all(|(k, _)| *k == first).then_some(first)
    }

    /// `α^t`: every closed piece `x + γ` becomes `x + Int γ`.
    pub fn alpha_t(&self) -> Result<OpenSet> {
        if self.pieces.iter().any(|(k, _)| *k != PieceKind::Closed) {
            return Err(Error::Domain("alpha_t takes closed-principal pieces only".into()));
        }
        let pieces = self.pieces.iter().map(|(_, x)| (PieceKind::Interior, x.clone())).collect();
        OpenSet::new(self.cone.clone(), pieces)
    }

    /// `β^t`: the inclusion of γ-opens, the identity on interior pieces.
    pub fn beta_t(&self) -> Result<OpenSet> {
        if self.pieces.iter().any(|(k, _)| *k != PieceKind::Interior) {
            return Err(Error::Domain("beta_t takes interior-principal pieces only".into()));
        }
        Ok(self.clone())
    }

    /// Whether `other ⊆ self`. A piece lies in a finite union of pieces iff
    /// it lies in one of them.
    pub fn open_contains(&self, other: &OpenSet) -> bool {
        other.pieces.iter().all(|p| self.pieces.iter().any(|q| piece_in_piece(&self.cone, p, q)))
    }

    pub fn set_eq(&self, other: &OpenSet) -> bool {
        self.open_contains(other) && other.open_contains(self)
    }

    pub fn union(&self, other: &OpenSet) -> Result<OpenSet> {
        let pieces = self.pieces.iter().chain(&other.pieces).cloned().collect();
        OpenSet::new(self.cone.clone(), pieces)
    }

    /// Intersection of two sets whose pieces share one kind. Needs a
    /// simplicial cone, where two principal pieces meet in the principal
    /// piece of their meet.
    pub fn intersection(&self, other: &OpenSet) -> Result<OpenSet> {
        if self.is_empty() || other.is_empty() {
            return Ok(OpenSet::empty(self.cone.clone()));
        }
        let kind = match (self.uniform_kind(), other.uniform_kind()) {
            (Some(a), Some(b)) if a == b => a,
            _ => return Err(Error::Domain("intersection needs pieces of a single kind".into())),
        };
        let (t, signs) = orthant_frame(&self.cone)?;
        let tinv = rat_inverse(&t).expect("frame is invertible");
        let mut pieces = Vec::new();
        for (_, x) in &self.pieces {
            for (_, y) in &other.pieces {
                let (gx, gy) = (mat_vec(&t, x), mat_vec(&t, y));
                let meet: RVec = gx
                    .iter()
                    .zip(&gy)
                    .zip(&signs)
                    .map(|((a, b), s)| if *s < 0 { Rat::min(a, b) } else { Rat::max(a, b) })
                    .collect();
                pieces.push((kind, mat_vec(&tinv, &meet)));
            }
        }
        OpenSet::new(self.cone.clone(), pieces)
    }
}

/// An arrangement module whose map from each cell `a` to
/// `just_inside(a, interior)` is an isomorphism, read as the γ-sheaf
/// `x ↦ G(x + Int γ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaModule {
    module: ArrModule,
}

impl GammaModule {
    pub fn new(module: ArrModule) -> Result<Self> {
        let c = module.complex();
        for a in c.cells() {
            let j = c.just_inside(&a, Approach::Interior);
            let m = module.map_between(&a, &j)?;
            if m.rows() != m.cols() || m.rank() != m.rows() {
                return Err(Error::Invariant(format!(
                    "gamma-continuity fails at cell {:?}: map to the corner cell is not invertible",
                    a.0
                )));
            }
        }
        Ok(GammaModule { module })
    }

    pub fn zero(c: CellComplex, p: u32) -> Self {
        GammaModule { module: ArrModule::zero(c, p) }
    }

    pub fn module(&self) -> &ArrModule {
        &self.module
    }

    pub fn into_module(self) -> ArrModule {
        self.module
    }

    pub fn complex(&self) -> &CellComplex {
        self.module.complex()
    }

    pub fn is_zero(&self) -> bool {
        self.module.is_zero()
    }
}

fn corner(c: &CellComplex, side: Approach) -> impl Fn(&Cell) -> Cell + Copy + '_ {
    move |a| c.just_inside(a, side)
}

/// `β_*F`: value `F(j(a))` at cell `a`, `j` the interior corner approach.
/// The result is canonical: the map from `a` to `j(a)` is the identity.
pub fn beta_star(f: &ArrModule) -> GammaModule {
    GammaModule { module: f.reindex(corner(f.complex(), Approach::Interior)) }
}

/// `β⁻¹G`: the stalk at `a` is `G` on the antipodal corner cell.
pub fn beta_inv(g: &GammaModule) -> ArrModule {
    g.module.reindex(corner(g.complex(), Approach::AntipodalInterior))
}

/// `α_*G`: sections over `x + γ` read through `α^t` on `x + Int γ`.
pub fn alpha_star(g: &GammaModule) -> ArrModule {
    g.module.reindex(corner(g.complex(), Approach::Interior))
}

pub fn beta_star_morphism(f: &ModMorphism) -> ModMorphism {
    f.reindex(corner(f.complex(), Approach::Interior))
}

pub fn beta_inv_morphism(f: &ModMorphism) -> ModMorphism {
    f.reindex(corner(f.complex(), Approach::AntipodalInterior))
}

pub fn alpha_star_morphism(f: &ModMorphism) -> ModMorphism {
    f.reindex(corner(f.complex(), Approach::Interior))
}

pub fn is_ephemeral(f: &ArrModule) -> bool {
    beta_star(f).is_zero()
}

/// The direct criterion: zero on every cell open along all axes.
pub fn vanishes_on_open_cells(f: &ArrModule) -> bool {
    f.complex().cells().all(|a| !a.is_fully_open() || f.dim_at(&a) == 0)
}

/// Finite shadow of `lim F(u + γ)` over `u + γ ⊂ x + Int γ` for `x` in cell
/// `a`: the diagram on the cells meeting `x + Int γ` within `depth` cover
/// steps of the corner cell. Returns whether the limit maps isomorphically
/// onto the corner value, as the corner approach predicts.
pub fn corner_limit_agrees(f: &ArrModule, a: &Cell, depth: usize) -> Result<bool> {
    let c = f.complex();
    let top = c.just_inside(a, Approach::Interior);
    let nodes: Vec<Cell> = c
        .cells()
        .filter(|x| c.cell_leq(x, &top) && steps(x, &top) <= depth)
        .collect();
    let (d, at) = truncated_diagram(f, &nodes, &top)?;
    let lim = d.limit();
    let proj = &lim.projections[at];
    Ok(lim.space_dim == f.dim_at(&top) && proj.rank() == lim.space_dim)
}

/// Finite shadow of the stalk `colim G(U)` over γ-opens `U ∋ x`, `x` in
/// cell `a`: the colimit over cells above the antipodal corner cell within
/// `depth` steps.
pub fn corner_colimit_agrees(g: &GammaModule, a: &Cell, depth: usize) -> Result<bool> {
    let c = g.complex();
    let bottom = c.just_inside(a, Approach::AntipodalInterior);
    let nodes: Vec<Cell> = c
        .cells()
        .filter(|x| c.cell_leq(&bottom, x) && steps(x, &bottom) <= depth)
        .collect();
    let (d, at) = truncated_diagram(g.module(), &nodes, &bottom)?;
    let colim = d.colimit();
    let inj = &colim.injections[at];
    Ok(colim.space_dim == g.module().dim_at(&bottom) && inj.rank() == colim.space_dim)
}

fn steps(a: &Cell, b: &Cell) -> usize {
    a.0.iter().zip(&b.0).map(|(x, y)| x.abs_diff(*y)).sum()
}

fn truncated_diagram(f: &ArrModule, nodes: &[Cell], mark: &Cell) -> Result<(Diagram, usize)> {
    let c = f.complex();
    let pos = |x: &Cell| nodes.iter().position(|y| y == x);
    let mut arrows = Vec::new();
    for (i, x) in nodes.iter().enumerate() {
        for k in 0..c.dim() {
            if let Some(j) = c.upper_cover(x, k).and_then(|b| pos(&b)) {
                arrows.push((j, i, f.cover_map(x, k).unwrap().clone()));
            }
        }
    }
    let dims = nodes.iter().map(|x| f.dim_at(x)).collect();
    let d = Diagram::new(f.p(), dims, arrows)?;
    Ok((d, pos(mark).expect("marked node present")))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactnessReport {
    pub exact: bool,
    pub cells_checked: usize,
    pub failure: Option<String>,
}

/// Applies `β_*` to `0 -> ker f -> src -> im f -> 0` and checks exactness
/// cellwise, and that `β_*` commutes with taking the kernel.
pub fn exactness_probe(f: &ModMorphism) -> Result<ExactnessReport> {
    let (k, incl) = pointwise_kernel(f)?;
    let (im, onto, _) = pointwise_image(f)?;
    let (bk, bsrc, bim) = (beta_star(&k), beta_star(f.src()), beta_star(&im));
    let (bi, be) = (beta_star_morphism(&incl), beta_star_morphism(&onto));
    let (kb, _) = pointwise_kernel(&beta_star_morphism(f))?;
    let c = f.complex();
    let fail = |a: &Cell, what: &str| ExactnessReport {
        exact: false,
        cells_checked: c.num_cells(),
        failure: Some(format!("cell {:?}: {what}", a.0)),
    };
    for a in c.cells() {
        let (i, e) = (bi.component(&a), be.component(&a));
        let (dk, ds, dim) = (bk.module().dim_at(&a), bsrc.module().dim_at(&a), bim.module().dim_at(&a));
        if !e.mul(i).is_zero() {
            return Ok(fail(&a, "composite is nonzero"));
        }
        if i.rank() != dk {
            return Ok(fail(&a, "kernel inclusion is not injective"));
        }
        if e.rank() != dim {
            return Ok(fail(&a, "image projection is not surjective"));
        }
        if ds != dk + dim {
            return Ok(fail(&a, "middle term has the wrong dimension"));
        }
        if kb.dim_at(&a) != dk {
            return Ok(fail(&a, "kernel does not commute with beta_star"));
        }
    }
    Ok(ExactnessReport { exact: true, cells_checked: c.num_cells(), failure: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::AxisGrid;
    use crate::persist::{direct_sum, indicator_module, point_module, principal_module};
    use crate::rat::rvec;

    fn line(bs: &[i64]) -> CellComplex {
        CellComplex::line(&rvec(bs))
    }

    /// γ-module of the closed ray `[t, ∞)`: `k` strictly above `t`.
    fn ray_gamma(t: i64) -> GammaModule {
        let c = line(&[t]);
        GammaModule::new(indicator_module(c, 2, |a| a.0[0] == 2).unwrap()).unwrap()
    }

    #[test]
    fn open_set_examples() {
        let g = ConeSpec::nonpositive_orthant(2);
        let u = OpenSet::new(
            g.clone(),
            vec![(PieceKind::Closed, rvec(&[1, 0])), (PieceKind::Closed, rvec(&[0, 1]))],
        )
        .unwrap();
        assert!(u.open_contains(&u));
        let w = OpenSet::principal(g.clone(), rvec(&[1, 1])).unwrap();
        // (1,1) + γ is not inside the union for γ = lower quadrant
        assert!(!u.open_contains(&w));
        assert!(w.open_contains(&u));
        let x = OpenSet::principal(g.clone(), rvec(&[0, 0])).unwrap();
        assert!(x.open_contains(&x.alpha_t().unwrap()));
        assert!(!x.alpha_t().unwrap().open_contains(&x));
        assert!(OpenSet::empty(g.clone()).alpha_t().unwrap().is_empty());
        let xi = x.alpha_t().unwrap();
        assert!(xi.beta_t().unwrap().set_eq(&xi));
        assert!(x.beta_t().is_err());
        assert!(xi.alpha_t().is_err());
    }

    #[test]
    fn containment_in_union_via_single_piece() {
        // γ = upper quadrant order: (1,1) + γ sits inside (1,0) + γ
        let g = ConeSpec::signed_orthant(&[1, 1]);
        let u = OpenSet::new(
            g.clone(),
            vec![(PieceKind::Closed, rvec(&[1, 0])), (PieceKind::Closed, rvec(&[0, 1]))],
        )
        .unwrap();
        let w = OpenSet::principal(g, rvec(&[1, 1])).unwrap();
        assert!(u.open_contains(&w));
    }

    #[test]
    fn alpha_t_preserves_intersections() {
        let g = ConeSpec::nonpositive_orthant(2);
        let u = OpenSet::new(g.clone(), vec![(PieceKind::Closed, rvec(&[0, 3])), (PieceKind::Closed, rvec(&[2, 1]))])
            .unwrap();
        let v = OpenSet::principal(g, rvec(&[1, 2])).unwrap();
        let lhs = u.intersection(&v).unwrap().alpha_t().unwrap();
        let rhs = u.alpha_t().unwrap().intersection(&v.alpha_t().unwrap()).unwrap();
        assert!(lhs.set_eq(&rhs));
    }

    #[test]
    fn example_stalks_of_closed_ray() {
        let g = ray_gamma(0);
        let at_t = Cell(vec![1]);
        assert_eq!(beta_inv(&g).dim_at(&at_t), 1);
        assert_eq!(alpha_star(&g).dim_at(&at_t), 0);
        assert_eq!(beta_star(&beta_inv(&g)), g);
        assert_eq!(beta_star(&alpha_star(&g)), g);
    }

    #[test]
    fn functors_on_zero() {
        let z = GammaModule::zero(line(&[0]), 2);
        assert!(beta_inv(&z).is_zero());
        assert!(alpha_star(&z).is_zero());
        assert!(beta_star(z.module()).is_zero());
    }

    #[test]
    fn ephemeral_examples() {
        let c = line(&[0, 1]);
        let pt = point_module(&c, &rvec(&[0]), 2).unwrap();
        assert!(is_ephemeral(&pt));
        let two = direct_sum(&pt, &point_module(&c, &rvec(&[1]), 2).unwrap()).unwrap();
        assert!(is_ephemeral(&two));
        let pr = principal_module(&c, &rvec(&[0]), 2).unwrap();
        assert!(!is_ephemeral(&pr));
        let b = beta_star(&pr);
        assert_eq!(b.module().dim_at(&Cell(vec![1])), 1);
        assert_eq!(b.module().dim_at(&Cell(vec![2])), 0);
        // slab {0} x [0, 1) in the plane
        let c2 = CellComplex::new(
            ConeSpec::nonpositive_orthant(2),
            vec![AxisGrid::new(rvec(&[0])).unwrap(), AxisGrid::new(rvec(&[0, 1])).unwrap()],
        )
        .unwrap();
        let slab = indicator_module(c2, 2, |a| a.0[0] == 1 && (a.0[1] == 1 || a.0[1] == 2)).unwrap();
        assert!(is_ephemeral(&slab));
        assert!(vanishes_on_open_cells(&slab));
    }

    #[test]
    fn gamma_invariant_rejects_point_module() {
        let pt = point_module(&line(&[0]), &rvec(&[0]), 2).unwrap();
        assert!(GammaModule::new(pt).is_err());
    }

    #[test]
    fn corner_approach_matches_finite_limits() {
        let f = principal_module(&line(&[0, 2]), &rvec(&[2]), 2).unwrap();
        for a in f.complex().cells() {
            for depth in 1..=3 {
                assert!(corner_limit_agrees(&f, &a, depth).unwrap());
            }
        }
        let g = ray_gamma(0);
        for a in g.complex().cells() {
            for depth in 1..=3 {
                assert!(corner_colimit_agrees(&g, &a, depth).unwrap());
            }
        }
    }

    #[test]
    fn exactness_on_identity() {
        let f = principal_module(&line(&[0]), &rvec(&[0]), 2).unwrap();
        let r = exactness_probe(&ModMorphism::identity(&f)).unwrap();
        assert!(r.exact);
    }
}
