//! Persistence modules presented on cell arrangements.
//!
//! A module stores a space on every cell and, for every cell `a` and axis
//! `k` along which `a` has an upper cover `b`, the structure map `F(b) ->
//! F(a)` (restriction orientation). Inside a cell the structure map is the
//! identity, so the value at a point `x` is the space of the cell holding
//! `T x`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arrangement::{AxisGrid, Cell, CellComplex};
use crate::cone::ConeSpec;
use crate::error::{Error, Result};
use crate::exactla::{BlockEquation, BlockSystem, Diagram, FieldMat, Term};
use crate::rat::{vadd, Rat};

/// Why a module or morphism fails its invariants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    Shape { cell: Cell, axis: usize },
    Square { cell: Cell, axes: (usize, usize) },
    Naturality { cell: Cell, axis: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Shape { cell, axis } => {
                write!(f, "map into cell {:?} along axis {axis} has the wrong shape", cell.0)
            }
            Violation::Square { cell, axes } => write!(
                f,
                "square at cell {:?} spanned by axes {} and {} does not commute",
                cell.0, axes.0, axes.1
            ),
            Violation::Naturality { cell, axis } => {
                write!(f, "naturality fails at cell {:?} along axis {axis}", cell.0)
            }
        }
    }
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::Invariant(v.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrModule {
    complex: CellComplex,
    p: u32,
    dims: Vec<usize>,
    /// `maps[lin * n + k]`: upper cover of `lin` along `k`, mapped into `lin`.
    maps: Vec<Option<FieldMat>>,
}

impl ArrModule {
    /// Checks sizes and shapes; functoriality is left to [`ArrModule::validate`].
    pub fn new(complex: CellComplex, p: u32, dims: Vec<usize>, maps: Vec<Option<FieldMat>>) -> Result<Self> {
        let n = complex.dim();
        if dims.len() != complex.num_cells() || maps.len() != complex.num_cells() * n {
            return Err(Error::Invariant("module data does not match the complex size".into()));
        }
        let m = ArrModule { complex, p, dims, maps };
        m.check_shapes().map_err(Error::from)?;
        Ok(m)
    }

    /// Builds from per-cell dimensions and a map for every cover pair
    /// `(upper, lower, axis)`, then validates.
    pub fn from_fn(
        complex: CellComplex,
        p: u32,
        dim: impl Fn(&Cell) -> usize,
        map: impl Fn(&Cell, &Cell, usize) -> FieldMat,
    ) -> Result<Self> {
        let n = complex.dim();
        let dims: Vec<usize> = complex.cells().map(|c| dim(&c)).collect();
        let mut maps = Vec::with_capacity(dims.len() * n);
        for a in complex.cells() {
            for k in 0..n {
                maps.push(complex.upper_cover(&a, k).map(|b| map(&b, &a, k)));
            }
        }
        let m = Self::new(complex, p, dims, maps)?;
        m.validate()?;
        Ok(m)
    }

    pub fn zero(complex: CellComplex, p: u32) -> Self {
        Self::from_fn(complex, p, |_| 0, |_, _, _| FieldMat::zeros(p, 0, 0)).expect("zero module")
    }

    pub fn complex(&self) -> &CellComplex {
        &self.complex
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim_at(&self, c: &Cell) -> usize {
        self.dims[self.complex.linear(c)]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.dims.iter().all(|&d| d == 0)
    }

    /// Structure map from the upper cover of `c` along `axis` into `c`.
    pub fn cover_map(&self, c: &Cell, axis: usize) -> Option<&FieldMat> {
        self.maps[self.complex.linear(c) * self.complex.dim() + axis].as_ref()
    }

    /// Value at an ambient point.
    pub fn value_at(&self, x: &[Rat]) -> Result<usize> {
        Ok(self.dim_at(&self.complex.cell_of(x)?))
    }

    fn check_shapes(&self) -> std::result::Result<(), Violation> {
        let n = self.complex.dim();
        for a in self.complex.cells() {
            let la = self.complex.linear(&a);
            for k in 0..n {
                let up = self.complex.upper_cover(&a, k);
                let ok = match (&self.maps[la * n + k], up) {
                    (None, None) => true,
                    (Some(m), Some(b)) => m.p() == self.p && m.shape() == (self.dims[la], self.dim_at(&b)),
                    _ => false,
                };
                if !ok {
                    return Err(Violation::Shape { cell: a, axis: k });
                }
            }
        }
        Ok(())
    }

    /// Shapes, then commutativity of every elementary square.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        self.check_shapes()?;
        let n = self.complex.dim();
        for a in self.complex.cells() {
            for k in 0..n {
                let Some(bk) = self.complex.upper_cover(&a, k) else { continue };
                for l in k + 1..n {
                    let Some(bl) = self.complex.upper_cover(&a, l) else { continue };
                    let via_k = self.cover_map(&a, k).unwrap().mul(self.cover_map(&bk, l).unwrap());
                    let via_l = self.cover_map(&a, l).unwrap().mul(self.cover_map(&bl, k).unwrap());
                    if via_k != via_l {
                        return Err(Violation::Square { cell: a, axes: (k, l) });
                    }
                }
            }
        }
        Ok(())
    }

    /// Composite structure map `F(hi) -> F(lo)` for `lo <= hi`.
    pub fn map_between(&self, hi: &Cell, lo: &Cell) -> Result<FieldMat> {
        if !self.complex.cell_leq(lo, hi) {
            return Err(Error::Domain(format!("cell {:?} is not below {:?}", lo.0, hi.0)));
        }
        let mut cur = hi.clone();
        let mut m = FieldMat::identity(self.p, self.dim_at(hi));
        for k in 0..self.complex.dim() {
            while cur.0[k] != lo.0[k] {
                let next = self.complex.lower_cover(&cur, k).expect("cells are comparable");
                m = self.cover_map(&next, k).unwrap().mul(&m);
                cur = next;
            }
        }
        Ok(m)
    }

    /// Structure map `F(y) -> F(x)` between ambient points with `x <= y`.
    pub fn structure_map(&self, y: &[Rat], x: &[Rat]) -> Result<FieldMat> {
        if !self.complex.cone().leq(x, y)? {
            return Err(Error::Domain("structure maps need x <= y".into()));
        }
        self.map_between(&self.complex.cell_of(y)?, &self.complex.cell_of(x)?)
    }

    /// Translate in grid coordinates: the result at `y` reads `self` at `y + tv`.
    pub fn shift_grid(&self, tv: &[Rat]) -> ArrModule {
        ArrModule { complex: self.complex.shift_grid(tv), ..self.clone() }
    }

    /// Pullback to a refinement of the underlying complex.
    pub fn refine_to(&self, fine: &CellComplex) -> Result<ArrModule> {
        if !self.complex.is_refined_by(fine) {
            return Err(Error::Domain("target complex does not refine the module's complex".into()));
        }
        if *fine == self.complex {
            return Ok(self.clone());
        }
        let coarse = self.complex.coarse_map(fine);
        let n = fine.dim();
        let dims = coarse.iter().map(|c| self.dim_at(c)).collect();
        let mut maps = Vec::with_capacity(fine.num_cells() * n);
        for (la, a) in fine.cells().enumerate() {
            for k in 0..n {
                maps.push(match fine.upper_cover(&a, k) {
                    Some(b) => Some(self.map_between(&coarse[fine.linear(&b)], &coarse[la])?),
                    None => None,
                });
            }
        }
        Ok(ArrModule { complex: fine.clone(), p: self.p, dims, maps })
    }

    /// The module as a finite diagram, arrows running from larger to
    /// smaller cells.
    pub fn to_diagram(&self) -> Result<Diagram> {
        let n = self.complex.dim();
        let mut arrows = Vec::new();
        for a in self.complex.cells() {
            for k in 0..n {
                if let Some(b) = self.complex.upper_cover(&a, k) {
                    let m = self.cover_map(&a, k).unwrap().clone();
                    arrows.push((self.complex.linear(&b), self.complex.linear(&a), m));
                }
            }
        }
        Diagram::new(self.p, self.dims.clone(), arrows)
    }

    /// Same module on a different complex shape; used by the functors.
    pub(crate) fn reindex(&self, pick: impl Fn(&Cell) -> Cell) -> ArrModule {
        let c = &self.complex;
        let n = c.dim();
        let dims = c.cells().map(|a| self.dim_at(&pick(&a))).collect();
        let mut maps = Vec::with_capacity(c.num_cells() * n);
        for a in c.cells() {
            for k in 0..n {
                maps.push(
                    c.upper_cover(&a, k)
                        .map(|b| self.map_between(&pick(&b), &pick(&a)).expect("monotone reindexing")),
                );
            }
        }
        ArrModule { complex: c.clone(), p: self.p, dims, maps }
    }
}

fn zero_or_identity(p: u32, lower: usize, upper: usize) -> FieldMat {
    if lower == upper {
        FieldMat::identity(p, lower)
    } else {
        FieldMat::zeros(p, lower, upper)
    }
}

/// Dimension one on `support`, identity maps inside it. Functorial exactly
/// when the support is convex in the cell order.
pub fn indicator_module(c: CellComplex, p: u32, support: impl Fn(&Cell) -> bool) -> Result<ArrModule> {
    ArrModule::from_fn(
        c,
        p,
        |a| support(a) as usize,
        |b, a, _| zero_or_identity(p, support(a) as usize, support(b) as usize),
    )
}

/// Indicator of the principal open `x + γ`. The complex is refined so that
/// `x` lies on its breakpoint lattice.
pub fn principal_module(c: &CellComplex, x: &[Rat], p: u32) -> Result<ArrModule> {
    let y = c.to_grid(x)?;
    let c = if c.on_lattice(&y) { c.clone() } else { c.with_point(&y) };
    let top = c.cell_of_grid(&y);
    let cc = c.clone();
    indicator_module(c, p, move |a| cc.cell_leq(a, &top))
}

/// Dimension one on the vertex cell `{x}` only.
pub fn point_module(c: &CellComplex, x: &[Rat], p: u32) -> Result<ArrModule> {
    let y = c.to_grid(x)?;
    if !c.on_lattice(&y) {
        return Err(Error::Domain("point module needs a vertex of the arrangement".into()));
    }
    let at = c.cell_of_grid(&y);
    indicator_module(c.clone(), p, move |a| *a == at)
}

fn same_setting(f: &ArrModule, g: &ArrModule) -> Result<()> {
    if f.p != g.p {
        return Err(Error::Domain(format!("field mismatch: F_{} vs F_{}", f.p, g.p)));
    }
    if !f.complex.compatible(&g.complex) {
        return Err(Error::Domain("modules live over different cones or transforms".into()));
    }
    Ok(())
}

/// Brings both modules onto their common refinement.
pub fn common_pair(f: &ArrModule, g: &ArrModule) -> Result<(ArrModule, ArrModule)> {
    same_setting(f, g)?;
    let r = f.complex.common_refinement(&g.complex)?;
    Ok((f.refine_to(&r)?, g.refine_to(&r)?))
}

pub fn direct_sum(f: &ArrModule, g: &ArrModule) -> Result<ArrModule> {
    let (f, g) = common_pair(f, g)?;
    let dims = f.dims.iter().zip(&g.dims).map(|(a, b)| a + b).collect();
    let maps = f
        .maps
        .iter()
        .zip(&g.maps)
        .map(|(a, b)| match (a, b) {
            (Some(a), Some(b)) => Some(a.block_diag(b)),
            _ => None,
        })
        .collect();
    Ok(ArrModule { complex: f.complex, p: f.p, dims, maps })
}

/// `τ_v` pushforward: the value at `x` is the value of `f` at `x + v`.
pub fn shift(f: &ArrModule, v: &[Rat]) -> Result<ArrModule> {
    Ok(f.shift_grid(&f.complex.to_grid(v)?))
}

/// A cellwise family of maps between two modules on one complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMorphism {
    src: ArrModule,
    dst: ArrModule,
    comps: Vec<FieldMat>,
}

impl ModMorphism {
    pub fn new(src: ArrModule, dst: ArrModule, comps: Vec<FieldMat>) -> Result<Self> {
        if src.complex != dst.complex || src.p != dst.p {
            return Err(Error::Domain("morphism ends live on different complexes".into()));
        }
        if comps.len() != src.dims.len() {
            return Err(Error::Invariant("wrong number of components".into()));
        }
        for (i, m) in comps.iter().enumerate() {
            if m.shape() != (dst.dims[i], src.dims[i]) || m.p() != src.p {
                return Err(Error::Invariant(format!(
                    "component at cell {:?} has the wrong shape",
                    src.complex.cell_at(i).0
                )));
            }
        }
        Ok(ModMorphism { src, dst, comps })
    }

    pub fn checked(src: ArrModule, dst: ArrModule, comps: Vec<FieldMat>) -> Result<Self> {
        let f = Self::new(src, dst, comps)?;
        f.validate()?;
        Ok(f)
    }

    pub fn identity(f: &ArrModule) -> Self {
        let comps = f.dims.iter().map(|&d| FieldMat::identity(f.p, d)).collect();
        ModMorphism { src: f.clone(), dst: f.clone(), comps }
    }

    pub fn zero(src: &ArrModule, dst: &ArrModule) -> Result<Self> {
        let comps = src.dims.iter().zip(&dst.dims).map(|(&a, &b)| FieldMat::zeros(src.p, b, a)).collect();
        Self::new(src.clone(), dst.clone(), comps)
    }

    pub fn src(&self) -> &ArrModule {
        &self.src
    }

    pub fn dst(&self) -> &ArrModule {
        &self.dst
    }

    pub fn complex(&self) -> &CellComplex {
        &self.src.complex
    }

    pub fn components(&self) -> &[FieldMat] {
        &self.comps
    }

    pub fn component(&self, c: &Cell) -> &FieldMat {
        &self.comps[self.src.complex.linear(c)]
    }

    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let c = &self.src.complex;
        for a in c.cells() {
            for k in 0..c.dim() {
                let Some(b) = c.upper_cover(&a, k) else { continue };
                let lhs = self.component(&a).mul(self.src.cover_map(&a, k).unwrap());
                let rhs = self.dst.cover_map(&a, k).unwrap().mul(self.component(&b));
                if lhs != rhs {
                    return Err(Violation::Naturality { cell: a, axis: k });
                }
            }
        }
        Ok(())
    }

    /// `self ∘ f`.
    pub fn after(&self, f: &ModMorphism) -> Result<ModMorphism> {
        if f.dst != self.src {
            return Err(Error::Domain("morphisms are not composable".into()));
        }
        let comps = self.comps.iter().zip(&f.comps).map(|(g, f)| g.mul(f)).collect();
        Ok(ModMorphism { src: f.src.clone(), dst: self.dst.clone(), comps })
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|m| m.is_zero())
    }

    pub fn shift_grid(&self, tv: &[Rat]) -> ModMorphism {
        ModMorphism { src: self.src.shift_grid(tv), dst: self.dst.shift_grid(tv), comps: self.comps.clone() }
    }

    pub fn shift(&self, v: &[Rat]) -> Result<ModMorphism> {
        Ok(self.shift_grid(&self.complex().to_grid(v)?))
    }

    pub fn refine_to(&self, fine: &CellComplex) -> Result<ModMorphism> {
        let coarse = self.complex().coarse_map(fine);
        let comps = coarse.iter().map(|c| self.component(c).clone()).collect();
        Ok(ModMorphism { src: self.src.refine_to(fine)?, dst: self.dst.refine_to(fine)?, comps })
    }

    pub(crate) fn reindex(&self, pick: impl Fn(&Cell) -> Cell + Copy) -> ModMorphism {
        let c = self.complex();
        let comps = c.cells().map(|a| self.component(&pick(&a)).clone()).collect();
        ModMorphism { src: self.src.reindex(pick), dst: self.dst.reindex(pick), comps }
    }
}

/// `g ∘ f`.
pub fn morphism_compose(g: &ModMorphism, f: &ModMorphism) -> Result<ModMorphism> {
    g.after(f)
}

pub fn morphism_equal(f: &ModMorphism, g: &ModMorphism) -> bool {
    f == g
}

pub fn is_zero_morphism(f: &ModMorphism) -> bool {
    f.is_zero()
}

/// Smoothing `χ_{v,w}: τ_v F -> τ_w F` for `w <=_γ v`, on the common
/// refinement of the two translates.
pub fn smoothing(f: &ArrModule, v: &[Rat], w: &[Rat]) -> Result<ModMorphism> {
    let c = &f.complex;
    if !c.cone().leq(w, v)? {
        return Err(Error::Domain("smoothing needs w <= v in the cone order".into()));
    }
    let (tv, tw) = (c.to_grid(v)?, c.to_grid(w)?);
    smoothing_grid(f, &tv, &tw)
}

pub(crate) fn smoothing_grid(f: &ArrModule, tv: &[Rat], tw: &[Rat]) -> Result<ModMorphism> {
    let (a, b) = (f.shift_grid(tv), f.shift_grid(tw));
    let r = a.complex.common_refinement(&b.complex)?;
    let comps = r
        .cells()
        .map(|cell| {
            let y = r.representative(&cell);
            let hi = f.complex.cell_of_grid(&vadd(&y, tv));
            let lo = f.complex.cell_of_grid(&vadd(&y, tw));
            f.map_between(&hi, &lo)
        })
        .collect::<Result<Vec<_>>>()?;
    ModMorphism::new(a.refine_to(&r)?, b.refine_to(&r)?, comps)
}

/// Pivot columns of `m`, spanning its image.
fn column_basis(m: &FieldMat) -> FieldMat {
    let (r, rank) = m.rref();
    let pivots: Vec<usize> = (0..rank).map(|i| (0..m.cols()).find(|&c| r.get(i, c) != 0).unwrap()).collect();
    m.select_cols(&pivots)
}

/// Builds the module whose space at each cell is the column span of
/// `basis[cell]` inside `ambient`, with the induced maps.
fn submodule(ambient: &ArrModule, basis: &[FieldMat]) -> ArrModule {
    let c = &ambient.complex;
    let n = c.dim();
    let dims = basis.iter().map(|b| b.cols()).collect();
    let mut maps = Vec::with_capacity(c.num_cells() * n);
    for a in c.cells() {
        for k in 0..n {
            maps.push(c.upper_cover(&a, k).map(|b| {
                let pushed = ambient.cover_map(&a, k).unwrap().mul(&basis[c.linear(&b)]);
                basis[c.linear(&a)].solve_matrix(&pushed).expect("subspace is preserved")
            }));
        }
    }
    ArrModule { complex: c.clone(), p: ambient.p, dims, maps }
}

/// Cellwise kernel and its inclusion into the source.
pub fn pointwise_kernel(f: &ModMorphism) -> Result<(ArrModule, ModMorphism)> {
    let basis: Vec<FieldMat> = f.comps.iter().map(|m| m.kernel_basis()).collect();
    let k = submodule(&f.src, &basis);
    let incl = ModMorphism::new(k.clone(), f.src.clone(), basis)?;
    Ok((k, incl))
}

/// Cellwise image, with the factorization `src -> im -> dst`.
pub fn pointwise_image(f: &ModMorphism) -> Result<(ArrModule, ModMorphism, ModMorphism)> {
    let basis: Vec<FieldMat> = f.comps.iter().map(column_basis).collect();
    let im = submodule(&f.dst, &basis);
    let onto = basis.iter().zip(&f.comps).map(|(b, m)| b.solve_matrix(m).expect("image")).collect();
    let onto = ModMorphism::new(f.src.clone(), im.clone(), onto)?;
    let incl = ModMorphism::new(im.clone(), f.dst.clone(), basis)?;
    Ok((im, onto, incl))
}

/// Cellwise cokernel and the quotient map from the target.
pub fn pointwise_cokernel(f: &ModMorphism) -> Result<(ArrModule, ModMorphism)> {
    let quot: Vec<FieldMat> = f.comps.iter().map(|m| m.left_kernel()).collect();
    let c = f.complex();
    let n = c.dim();
    let dims = quot.iter().map(|q| q.rows()).collect();
    let mut maps = Vec::with_capacity(c.num_cells() * n);
    for a in c.cells() {
        for k in 0..n {
            maps.push(c.upper_cover(&a, k).map(|b| {
                // X q_b = q_a B(b -> a)
                let rhs = quot[c.linear(&a)].mul(f.dst.cover_map(&a, k).unwrap());
                quot[c.linear(&b)]
                    .transpose()
                    .solve_matrix(&rhs.transpose())
                    .expect("map descends to the cokernel")
                    .transpose()
            }));
        }
    }
    let q = ArrModule { complex: c.clone(), p: f.src.p, dims, maps };
    let proj = ModMorphism::new(f.dst.clone(), q.clone(), quot)?;
    Ok((q, proj))
}

/// Parameters for [`random_module`].
#[derive(Clone, Debug)]
pub struct RandomSpec {
    pub cone: ConeSpec,
    pub p: u32,
    pub max_breakpoints: usize,
    /// Breakpoints are drawn from the half-integers in `[-range, range]`.
    pub range: i64,
    pub max_dim: usize,
    pub max_total_dim: usize,
}

impl RandomSpec {
    pub fn line() -> Self {
        RandomSpec {
            cone: ConeSpec::nonpositive_orthant(1),
            p: 2,
            max_breakpoints: 2,
            range: 3,
            max_dim: 2,
            max_total_dim: 6,
        }
    }

    pub fn plane() -> Self {
        RandomSpec {
            cone: ConeSpec::nonpositive_orthant(2),
            p: 2,
            max_breakpoints: 1,
            range: 2,
            max_dim: 2,
            max_total_dim: 6,
        }
    }
}

pub fn random_grid(rng: &mut impl Rng, max_breakpoints: usize, range: i64) -> AxisGrid {
    let k = rng.gen_range(0..=max_breakpoints);
    let mut b: Vec<Rat> = (0..k).map(|_| Rat::new(rng.gen_range(-2 * range..=2 * range), 2)).collect();
    b.sort();
    b.dedup();
    AxisGrid::new(b).expect("sorted")
}

pub fn random_complex(rng: &mut impl Rng, spec: &RandomSpec) -> CellComplex {
    let axes = (0..spec.cone.dim()).map(|_| random_grid(rng, spec.max_breakpoints, spec.range)).collect();
    CellComplex::new(spec.cone.clone(), axes).expect("random complex")
}

/// A uniformly random element of the solution space of `sys`.
pub(crate) fn random_solution(rng: &mut impl Rng, sys: &BlockSystem) -> Vec<FieldMat> {
    let sol = sys.solve();
    let coeffs: Vec<u32> = (0..sol.dim()).map(|_| rng.gen_range(0..sys.p)).collect();
    sol.unflatten(&sol.point(&coeffs).expect("homogeneous system"))
}

/// Random dimensions on `c` followed by random functorial maps: cells are
/// visited from the top of the cell order down, and the maps out of the
/// upper covers of each cell are a random solution of its square
/// constraints. The zero map always solves them, so nothing is rejected.
pub fn random_module_on(rng: &mut impl Rng, c: CellComplex, spec: &RandomSpec) -> ArrModule {
    let p = spec.p;
    let n = c.dim();
    let mut dims: Vec<usize> = (0..c.num_cells()).map(|_| rng.gen_range(0..=spec.max_dim)).collect();
    while dims.iter().sum::<usize>() > spec.max_total_dim {
        let i = rng.gen_range(0..dims.len());
        dims[i] = dims[i].saturating_sub(1);
    }
    let height = |a: &Cell| -> usize {
        (0..n)
            .map(|k| if c.signs()[k] < 0 { a.0[k] } else { c.axes()[k].num_cells() - 1 - a.0[k] })
            .sum()
    };
    let mut order: Vec<Cell> = c.cells().collect();
    order.sort_by_key(|a| std::cmp::Reverse(height(a)));
    let mut maps: Vec<Option<FieldMat>> = vec![None; c.num_cells() * n];
    for a in &order {
        let la = c.linear(a);
        let ups: Vec<(usize, Cell)> = (0..n).filter_map(|k| c.upper_cover(a, k).map(|b| (k, b))).collect();
        if ups.is_empty() {
            continue;
        }
        let shapes = ups.iter().map(|(_, b)| (dims[la], dims[c.linear(b)])).collect();
        let mut sys = BlockSystem::new(p, shapes);
        for i in 0..ups.len() {
            for j in i + 1..ups.len() {
                let (k, bk) = &ups[i];
                let (l, bl) = &ups[j];
                let fk = maps[c.linear(bk) * n + l].clone().expect("processed");
                let fl = maps[c.linear(bl) * n + k].clone().expect("processed");
                let top = fk.cols();
                sys.push(BlockEquation {
                    terms: vec![
                        Term { left: FieldMat::identity(p, dims[la]), unknown: i, right: fk },
                        Term { left: FieldMat::identity(p, dims[la]).neg(), unknown: j, right: fl },
                    ],
                    rhs: FieldMat::zeros(p, dims[la], top),
                });
            }
        }
        for ((k, _), m) in ups.iter().zip(random_solution(rng, &sys)) {
            maps[la * n + k] = Some(m);
        }
    }
    ArrModule::new(c, p, dims, maps).expect("generated shapes")
}

/// Deterministic random module for a seed.
pub fn random_module(seed: u64, spec: &RandomSpec) -> ArrModule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = random_complex(&mut rng, spec);
    random_module_on(&mut rng, c, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rvec;

    fn line(bs: &[i64]) -> CellComplex {
        CellComplex::line(&rvec(bs))
    }

    fn plane(b0: &[i64], b1: &[i64]) -> CellComplex {
        CellComplex::new(
            ConeSpec::nonpositive_orthant(2),
            vec![AxisGrid::new(rvec(b0)).unwrap(), AxisGrid::new(rvec(b1)).unwrap()],
        )
        .unwrap()
    }

    #[test]
    fn principal_examples() {
        let f = principal_module(&line(&[]), &rvec(&[0]), 2).unwrap();
        assert!(f.validate().is_ok());
        assert_eq!(f.value_at(&rvec(&[-4])).unwrap(), 1);
        assert_eq!(f.value_at(&rvec(&[0])).unwrap(), 1);
        assert_eq!(f.value_at(&rvec(&[1])).unwrap(), 0);
        let g = principal_module(&plane(&[], &[]), &rvec(&[0, 0]), 2).unwrap();
        assert_eq!(g.total_dim(), 4);
        assert_eq!(g.value_at(&rvec(&[-1, 0])).unwrap(), 1);
        assert_eq!(g.value_at(&rvec(&[-1, 1])).unwrap(), 0);
    }

    #[test]
    fn broken_square_is_named() {
        let c = plane(&[0], &[0]);
        let p = 2;
        // ones everywhere, identity maps except one zero map into the origin
        let origin = Cell(vec![1, 1]);
        let bad = ArrModule::new(
            c.clone(),
            p,
            vec![1; 9],
            c.cells()
                .flat_map(|a| {
                    let c = c.clone();
                    let origin = origin.clone();
                    (0..2).map(move |k| {
                        c.upper_cover(&a, k).map(|_| {
                            if a == origin && k == 0 {
                                FieldMat::zeros(p, 1, 1)
                            } else {
                                FieldMat::identity(p, 1)
                            }
                        })
                    })
                })
                .collect(),
        )
        .unwrap();
        match bad.validate() {
            Err(Violation::Square { cell, axes }) => {
                // the first square (in cell order) containing the broken map
                assert_eq!(cell, Cell(vec![1, 0]));
                assert_eq!(axes, (0, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(bad.to_diagram().is_err());
        assert!(ArrModule::zero(c, p).validate().is_ok());
    }

    #[test]
    fn point_module_requires_vertex() {
        let c = line(&[0]);
        let f = point_module(&c, &rvec(&[0]), 2).unwrap();
        assert_eq!(f.dims(), &[0, 1, 0]);
        assert!(point_module(&c, &rvec(&[1]), 2).is_err());
    }

    #[test]
    fn direct_sum_examples() {
        let f = principal_module(&line(&[]), &rvec(&[0]), 2).unwrap();
        let z = ArrModule::zero(line(&[]), 2);
        assert_eq!(direct_sum(&f, &z).unwrap(), f);
        let g = principal_module(&line(&[]), &rvec(&[1]), 2).unwrap();
        let s = direct_sum(&f, &g).unwrap();
        assert!(s.validate().is_ok());
        assert_eq!(s.value_at(&rvec(&[-1])).unwrap(), 2);
        assert_eq!(s.value_at(&rvec(&[1])).unwrap(), 1);
    }

    #[test]
    fn shift_examples() {
        let f = principal_module(&line(&[]), &rvec(&[0]), 2).unwrap();
        assert_eq!(shift(&f, &rvec(&[0])).unwrap(), f);
        let g = shift(&f, &rvec(&[1])).unwrap();
        let h = principal_module(&line(&[]), &rvec(&[-1]), 2).unwrap();
        for x in [-3, -1, 0, 2] {
            let x = rvec(&[x]);
            assert_eq!(g.value_at(&x).unwrap(), h.value_at(&x).unwrap());
        }
        let two = shift(&shift(&f, &rvec(&[1])).unwrap(), &rvec(&[2])).unwrap();
        assert_eq!(two, shift(&f, &rvec(&[3])).unwrap());
    }

    #[test]
    fn smoothing_examples() {
        let f = random_module(7, &RandomSpec::plane());
        let v = rvec(&[1, 1]);
        let id = smoothing(&f, &v, &v).unwrap();
        assert_eq!(id, ModMorphism::identity(&shift(&f, &v).unwrap()));
        assert!(smoothing(&f, &rvec(&[0, 0]), &v).is_err());
        let pt = point_module(&line(&[0]), &rvec(&[0]), 2).unwrap();
        assert!(smoothing(&pt, &rvec(&[2]), &rvec(&[0])).unwrap().is_zero());
    }

    #[test]
    fn morphism_algebra() {
        let f = random_module(3, &RandomSpec::line());
        let id = ModMorphism::identity(&f);
        assert_eq!(id.after(&id).unwrap(), id);
        let z = ModMorphism::zero(&f, &f).unwrap();
        assert!(id.after(&z).unwrap().is_zero());
        let (k, _) = pointwise_kernel(&id).unwrap();
        assert!(k.is_zero());
        let zero_src = ArrModule::zero(f.complex().clone(), 2);
        let (q, _) = pointwise_cokernel(&ModMorphism::zero(&zero_src, &f).unwrap()).unwrap();
        assert_eq!(q.dims(), f.dims());
        assert!(q.validate().is_ok());
    }

    #[test]
    fn random_module_is_deterministic_and_valid() {
        for seed in 0..200 {
            for spec in [RandomSpec::line(), RandomSpec::plane()] {
                let f = random_module(seed, &spec);
                assert_eq!(f, random_module(seed, &spec));
                assert!(f.validate().is_ok(), "seed {seed}");
                assert!(f.dims().iter().all(|&d| d <= spec.max_dim));
                assert!(f.total_dim() <= spec.max_total_dim);
            }
        }
    }
}
