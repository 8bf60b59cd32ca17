//! Axis-aligned rational cell arrangements.
//!
//! Each axis is cut by finitely many breakpoints `b_1 < ... < b_k` into the
//! cells `(-∞, b_1), {b_1}, (b_1, b_2), ..., {b_k}, (b_k, ∞)`, indexed
//! `0..2k+1` from left to right (odd indices are points). A cell of the
//! complex is one such cell per axis.
//!
//! Only simplicial cones are supported. A stored rational transform `T`
//! carries the cone onto a signed orthant `{y : s_i y_i >= 0}`; breakpoints
//! live in these grid coordinates `y = T x`.

use serde::{Deserialize, Serialize};

use crate::cone::{mat_vec, rat_inverse, ConeSpec};
use crate::error::{check_dim, Error, Result};
use crate::rat::{dot, RVec, Rat};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AxisGrid {
    breakpoints: Vec<Rat>,
}

impl AxisGrid {
    pub fn new(breakpoints: Vec<Rat>) -> Result<Self> {
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invariant("axis breakpoints must be strictly increasing".into()));
        }
        Ok(AxisGrid { breakpoints })
    }

    pub fn empty() -> Self {
        AxisGrid { breakpoints: Vec::new() }
    }

    pub fn breakpoints(&self) -> &[Rat] {
        &self.breakpoints
    }

    pub fn num_cells(&self) -> usize {
        2 * self.breakpoints.len() + 1
    }

    /// Index of the cell containing `y`.
    pub fn locate(&self, y: &Rat) -> usize {
        match self.breakpoints.binary_search(y) {
            Ok(i) => 2 * i + 1,
            Err(i) => 2 * i,
        }
    }

    /// A point of cell `i`.
    pub fn representative(&self, i: usize) -> Rat {
        let b = &self.breakpoints;
        if i % 2 == 1 {
            return b[i / 2].clone();
        }
        let j = i / 2;
        match (j.checked_sub(1).map(|l| &b[l]), b.get(j)) {
            (None, None) => Rat::zero(),
            (None, Some(hi)) => hi - &Rat::one(),
            (Some(lo), None) => lo + &Rat::one(),
            (Some(lo), Some(hi)) => lo.midpoint(hi),
        }
    }

    fn union(&self, other: &AxisGrid) -> AxisGrid {
        let mut b: Vec<Rat> = self.breakpoints.iter().chain(&other.breakpoints).cloned().collect();
        b.sort();
        b.dedup();
        AxisGrid { breakpoints: b }
    }

    fn translate(&self, t: &Rat) -> AxisGrid {
        AxisGrid { breakpoints: self.breakpoints.iter().map(|b| b + t).collect() }
    }
}

/// Which side of a point cell the corner approach moves to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Approach {
    /// `x + δc` with `c ∈ Int(γ)`.
    Interior,
    /// `x + δc` with `c ∈ Int(γ^a)`.
    AntipodalInterior,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell(pub Vec<usize>);

impl Cell {
    pub fn is_point_on(&self, axis: usize) -> bool {
        self.0[axis] % 2 == 1
    }

    /// Open on every axis.
    pub fn is_fully_open(&self) -> bool {
        self.0.iter().all(|i| i % 2 == 0)
    }

    /// A point on every axis.
    pub fn is_vertex(&self) -> bool {
        self.0.iter().all(|i| i % 2 == 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CellComplex {
    cone: ConeSpec,
    transform: Vec<RVec>,
    signs: Vec<i32>,
    axes: Vec<AxisGrid>,
}

fn identity(n: usize) -> Vec<RVec> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect()
}

/// Per-axis orientation of `cone` under `transform`, if it is a signed orthant.
fn orthant_signs(cone: &ConeSpec, transform: &[RVec]) -> Result<Vec<i32>> {
    let n = cone.dim();
    check_dim(n, transform.len())?;
    for row in transform {
        check_dim(n, row.len())?;
    }
    if !cone.is_simplicial() {
        return Err(Error::Domain("module calculus needs a simplicial cone".into()));
    }
    let inv = rat_inverse(transform).ok_or_else(|| Error::Invariant("transform is singular".into()))?;
    let mut signs = vec![0i32; n];
    for xi in cone.normals() {
        // covector in grid coordinates: ξ T^{-1}
        let cov: RVec = (0..n).map(|j| (0..n).fold(Rat::zero(), |acc, i| acc + &xi[i] * &inv[i][j])).collect();
        let nz: Vec<usize> = (0..n).filter(|&j| !cov[j].is_zero()).collect();
        if nz.len() != 1 || signs[nz[0]] != 0 {
            return Err(Error::Invariant(
                "transform does not carry the cone onto a signed orthant".into(),
            ));
        }
        signs[nz[0]] = cov[nz[0]].signum();
    }
    Ok(signs)
}

/// Canonical transform of a simplicial cone and the resulting axis signs:
/// the identity when the facets are coordinate hyperplanes, otherwise the
/// facet normals as rows.
pub fn orthant_frame(cone: &ConeSpec) -> Result<(Vec<RVec>, Vec<i32>)> {
    let aligned = cone
        .normals()
        .iter()
        .all(|xi| xi.iter().filter(|c| !c.is_zero()).count() == 1);
    let transform = if aligned { identity(cone.dim()) } else { cone.normals().to_vec() };
    let signs = orthant_signs(cone, &transform)?;
    Ok((transform, signs))
}

impl CellComplex {
    pub fn new(cone: ConeSpec, axes: Vec<AxisGrid>) -> Result<Self> {
        let (transform, _) = orthant_frame(&cone)?;
        Self::with_transform(cone, transform, axes)
    }

    pub fn with_transform(cone: ConeSpec, transform: Vec<RVec>, axes: Vec<AxisGrid>) -> Result<Self> {
        check_dim(cone.dim(), axes.len())?;
        let signs = orthant_signs(&cone, &transform)?;
        Ok(CellComplex { cone, transform, signs, axes })
    }

    /// No breakpoints: a single cell.
    pub fn trivial(cone: ConeSpec) -> Result<Self> {
        let n = cone.dim();
        Self::new(cone, vec![AxisGrid::empty(); n])
    }

    /// 1-D complex for `γ = (-∞, 0]` with the given breakpoints.
    pub fn line(breakpoints: &[Rat]) -> Self {
        let mut b = breakpoints.to_vec();
        b.sort();
        b.dedup();
        Self::new(ConeSpec::nonpositive_orthant(1), vec![AxisGrid { breakpoints: b }]).expect("line complex")
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn cone(&self) -> &ConeSpec {
        &self.cone
    }

    pub fn transform(&self) -> &[RVec] {
        &self.transform
    }

    pub fn signs(&self) -> &[i32] {
        &self.signs
    }

    pub fn axes(&self) -> &[AxisGrid] {
        &self.axes
    }

    pub fn with_axes(&self, axes: Vec<AxisGrid>) -> Result<Self> {
        check_dim(self.dim(), axes.len())?;
        Ok(CellComplex { axes, ..self.clone() })
    }

    /// Same cone and transform.
    pub fn compatible(&self, other: &CellComplex) -> bool {
        self.cone == other.cone && self.transform == other.transform
    }

    /// Grid coordinates `T x` of an ambient point.
    pub fn to_grid(&self, x: &[Rat]) -> Result<RVec> {
        check_dim(self.dim(), x.len())?;
        Ok(mat_vec(&self.transform, x))
    }

    /// Ambient coordinates of a grid point.
    pub fn from_grid(&self, y: &[Rat]) -> RVec {
        let inv = rat_inverse(&self.transform).expect("validated transform");
        inv.iter().map(|row| dot(row, y)).collect()
    }

    pub fn num_cells(&self) -> usize {
        self.axes.iter().map(|a| a.num_cells()).product()
    }

    pub fn linear(&self, c: &Cell) -> usize {
        let mut idx = 0;
        for (a, &i) in self.axes.iter().zip(&c.0) {
            idx = idx * a.num_cells() + i;
        }
        idx
    }

    pub fn cell_at(&self, mut lin: usize) -> Cell {
        let mut out = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            let m = self.axes[k].num_cells();
            out[k] = lin % m;
            lin /= m;
        }
        Cell(out)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.num_cells()).map(move |i| self.cell_at(i))
    }

    /// Cell containing a point given in grid coordinates.
    pub fn cell_of_grid(&self, y: &[Rat]) -> Cell {
        Cell(self.axes.iter().zip(y).map(|(a, v)| a.locate(v)).collect())
    }

    /// Cell containing an ambient point.
    pub fn cell_of(&self, x: &[Rat]) -> Result<Cell> {
        Ok(self.cell_of_grid(&self.to_grid(x)?))
    }

    /// A grid point in the cell.
    pub fn representative(&self, c: &Cell) -> RVec {
        self.axes.iter().zip(&c.0).map(|(a, &i)| a.representative(i)).collect()
    }

    /// Index step that moves up in the cone order along `axis`.
    #[inline]
    pub fn up_step(&self, axis: usize) -> isize {
        -(self.signs[axis] as isize)
    }

    /// `a <=_γ b` on cells: some (equivalently every comparable choice of)
    /// representatives are ordered.
    pub fn cell_leq(&self, a: &Cell, b: &Cell) -> bool {
        a.0.iter().zip(&b.0).zip(&self.signs).all(|((x, y), s)| if *s < 0 { x <= y } else { x >= y })
    }

    /// Upper cover of `a` along `axis`, if any.
    pub fn upper_cover(&self, a: &Cell, axis: usize) -> Option<Cell> {
        let i = a.0[axis] as isize + self.up_step(axis);
        if i < 0 || i as usize >= self.axes[axis].num_cells() {
            return None;
        }
        let mut b = a.clone();
        b.0[axis] = i as usize;
        Some(b)
    }

    /// Lower cover of `a` along `axis`, if any.
    pub fn lower_cover(&self, a: &Cell, axis: usize) -> Option<Cell> {
        let i = a.0[axis] as isize - self.up_step(axis);
        if i < 0 || i as usize >= self.axes[axis].num_cells() {
            return None;
        }
        let mut b = a.clone();
        b.0[axis] = i as usize;
        Some(b)
    }

    /// Cell reached by `x + δc` for `x ∈ a`, `c` interior to the requested
    /// side and all small `δ > 0`.
    pub fn just_inside(&self, a: &Cell, side: Approach) -> Cell {
        let out = a
            .0
            .iter()
            .zip(&self.signs)
            .map(|(&i, &s)| {
                if i % 2 == 0 {
                    return i;
                }
                let step = match side {
                    Approach::Interior => s as isize,
                    Approach::AntipodalInterior => -(s as isize),
                };
                (i as isize + step) as usize
            })
            .collect();
        Cell(out)
    }

    /// Union of breakpoints per axis.
    pub fn common_refinement(&self, other: &CellComplex) -> Result<CellComplex> {
        if !self.compatible(other) {
            return Err(Error::Domain("cannot refine complexes over different cones or transforms".into()));
        }
        let axes = self.axes.iter().zip(&other.axes).map(|(a, b)| a.union(b)).collect();
        Ok(CellComplex { axes, ..self.clone() })
    }

    /// Refinement of several complexes; panics on an empty list.
    pub fn refine_all<'a>(cs: impl IntoIterator<Item = &'a CellComplex>) -> Result<CellComplex> {
        let mut it = cs.into_iter();
        let mut acc = it.next().expect("at least one complex").clone();
        for c in it {
            acc = acc.common_refinement(c)?;
        }
        Ok(acc)
    }

    /// For each cell of `fine` (a refinement of `self`), the cell of `self`
    /// containing it.
    pub fn coarse_map(&self, fine: &CellComplex) -> Vec<Cell> {
        fine.cells().map(|c| self.cell_of_grid(&fine.representative(&c))).collect()
    }

    /// Whether every breakpoint of `self` is a breakpoint of `other`.
    pub fn is_refined_by(&self, other: &CellComplex) -> bool {
        self.compatible(other)
            && self
                .axes
                .iter()
                .zip(&other.axes)
                .all(|(a, b)| a.breakpoints.iter().all(|x| b.breakpoints.binary_search(x).is_ok()))
    }

    /// Complex for the translate `τ_v`: breakpoints move by `-Tv`, so that
    /// reading the shifted structure at `y` reads the original at `y + Tv`.
    pub fn shift_grid(&self, tv: &[Rat]) -> CellComplex {
        let axes = self.axes.iter().zip(tv).map(|(a, t)| a.translate(&-t)).collect();
        CellComplex { axes, ..self.clone() }
    }

    pub fn shift_complex(&self, v: &[Rat]) -> Result<CellComplex> {
        Ok(self.shift_grid(&self.to_grid(v)?))
    }

    /// Adds breakpoints at the grid coordinates of `y`.
    pub fn with_point(&self, y: &[Rat]) -> CellComplex {
        let axes = self
            .axes
            .iter()
            .zip(y)
            .map(|(a, v)| a.union(&AxisGrid { breakpoints: vec![v.clone()] }))
            .collect();
        CellComplex { axes, ..self.clone() }
    }

    /// Whether every grid coordinate of `y` is a breakpoint.
    pub fn on_lattice(&self, y: &[Rat]) -> bool {
        self.axes.iter().zip(y).all(|(a, v)| a.breakpoints.binary_search(v).is_ok())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rvec;

    fn grid(bs: &[i64]) -> AxisGrid {
        AxisGrid::new(rvec(bs)).unwrap()
    }

    #[test]
    fn cell_of_examples() {
        let c = CellComplex::line(&rvec(&[0]));
        assert_eq!(c.cell_of(&rvec(&[0])).unwrap(), Cell(vec![1]));
        assert_eq!(c.cell_of(&rvec(&[-5])).unwrap(), Cell(vec![0]));
        let c2 = CellComplex::new(ConeSpec::nonpositive_orthant(2), vec![grid(&[0]), grid(&[1])]).unwrap();
        assert_eq!(c2.cell_of(&rvec(&[0, 2])).unwrap(), Cell(vec![1, 2]));
    }

    #[test]
    fn cell_order_examples() {
        let c = CellComplex::line(&rvec(&[0]));
        assert!(c.cell_leq(&Cell(vec![1]), &Cell(vec![2])));
        assert!(c.cell_leq(&Cell(vec![0]), &Cell(vec![1])));
        assert!(!c.cell_leq(&Cell(vec![2]), &Cell(vec![1])));
        let c2 = CellComplex::new(ConeSpec::nonpositive_orthant(2), vec![grid(&[0]), grid(&[0])]).unwrap();
        let a = Cell(vec![1, 0]);
        let b = Cell(vec![2, 1]);
        assert!(c2.cell_leq(&a, &b));
        let a = Cell(vec![1, 0]);
        let b = Cell(vec![2, 0]);
        assert!(c2.cell_leq(&a, &b));
        let a = Cell(vec![1, 0]);
        let b = Cell(vec![0, 1]);
        assert!(!c2.cell_leq(&a, &b) && !c2.cell_leq(&b, &a));
    }

    #[test]
    fn reversed_orientation() {
        let c = CellComplex::new(ConeSpec::signed_orthant(&[1]), vec![grid(&[0])]).unwrap();
        // γ = [0, ∞): larger coordinates are smaller in the cone order
        assert!(c.cell_leq(&Cell(vec![2]), &Cell(vec![1])));
        assert_eq!(c.just_inside(&Cell(vec![1]), Approach::Interior), Cell(vec![2]));
    }

    #[test]
    fn just_inside_examples() {
        let c = CellComplex::line(&rvec(&[0, 1]));
        assert_eq!(c.just_inside(&Cell(vec![1]), Approach::Interior), Cell(vec![0]));
        assert_eq!(c.just_inside(&Cell(vec![2]), Approach::Interior), Cell(vec![2]));
        assert_eq!(c.just_inside(&Cell(vec![2]), Approach::AntipodalInterior), Cell(vec![2]));
        assert_eq!(c.just_inside(&Cell(vec![1]), Approach::AntipodalInterior), Cell(vec![2]));
    }

    #[test]
    fn refinement_examples() {
        let a = CellComplex::line(&rvec(&[0]));
        let b = CellComplex::line(&rvec(&[1]));
        let r = a.common_refinement(&b).unwrap();
        assert_eq!(r.axes()[0].breakpoints(), &rvec(&[0, 1])[..]);
        assert_eq!(r.num_cells(), 5);
        assert_eq!(a.common_refinement(&a).unwrap(), a);
        assert_eq!(a.coarse_map(&a), a.cells().collect::<Vec<_>>());
        let h = CellComplex::line(&[Rat::new(1, 2)]);
        assert_eq!(a.common_refinement(&h).unwrap().axes()[0].breakpoints(), &[Rat::zero(), Rat::new(1, 2)][..]);
        let other = CellComplex::new(ConeSpec::signed_orthant(&[1]), vec![grid(&[0])]).unwrap();
        assert!(a.common_refinement(&other).is_err());
    }

    #[test]
    fn shift_examples() {
        let a = CellComplex::line(&rvec(&[0]));
        assert_eq!(a.shift_complex(&rvec(&[0])).unwrap(), a);
        assert_eq!(a.shift_complex(&rvec(&[1])).unwrap().axes()[0].breakpoints(), &rvec(&[-1])[..]);
        let back = a.shift_complex(&rvec(&[3])).unwrap().shift_complex(&rvec(&[-3])).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn skew_cone_transform() {
        // γ = {x : x1 <= 0, x1 + x2 <= 0}: simplicial but not axis-aligned
        let cone = ConeSpec::from_normals(2, vec![rvec(&[-1, 0]), rvec(&[-1, -1])]).unwrap();
        let c = CellComplex::new(cone.clone(), vec![grid(&[0]), grid(&[0])]).unwrap();
        assert_eq!(c.signs(), &[1, 1]);
        let x = rvec(&[-1, -1]);
        let y = rvec(&[0, 0]);
        assert!(cone.leq(&x, &y).unwrap());
        let (cx, cy) = (c.cell_of(&x).unwrap(), c.cell_of(&y).unwrap());
        assert!(c.cell_leq(&cx, &cy));
        assert!(CellComplex::with_transform(cone, identity(2), vec![grid(&[]), grid(&[])]).is_err());
    }
}
