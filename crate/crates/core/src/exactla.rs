//! Exact linear algebra over a prime field `F_p`, and limits/colimits of
//! finite poset diagrams of finite-dimensional spaces.
//!
//! Matrices act on column vectors. All elimination happens on dense rows of
//! residues; for `p = 2` the row update degenerates to an XOR, which is the
//! hot path for every property suite.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// A dense matrix over `F_p`, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FieldMat {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for FieldMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}{:?}", self.p, self.to_rows())
    }
}

pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while (d as u64) * (d as u64) <= p as u64 {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn inv_mod(a: u32, p: u32) -> u32 {
    // Fermat: a^(p-2)
    let mut base = a as u64 % p as u64;
    let mut e = p as u64 - 2;
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u64;
        }
        base = base * base % p as u64;
        e >>= 1;
    }
    acc as u32
}

#[inline]
fn axpy(row: &mut [u32], f: u32, piv: &[u32], p: u32) {
    if p == 2 {
        if f & 1 == 1 {
            for (a, b) in row.iter_mut().zip(piv) {
                *a ^= *b;
            }
        }
        return;
    }
    let (f, p64) = (f as u64, p as u64);
    for (a, b) in row.iter_mut().zip(piv) {
        *a = ((*a as u64 + f * *b as u64) % p64) as u32;
    }
}

/// Row echelon data shared by `rref`, `kernel_basis` and `solve`.
struct Echelon {
    rows: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

/// `F_2` elimination on rows packed 64 entries per word.
fn echelon_f2(rows: Vec<Vec<u32>>, width: usize) -> Echelon {
    let words = width.div_ceil(64);
    let mut packed: Vec<Vec<u64>> = rows
        .iter()
        .map(|row| {
            let mut w = vec![0u64; words];
            for (c, &x) in row.iter().enumerate() {
                if x & 1 == 1 {
                    w[c / 64] |= 1 << (c % 64);
                }
            }
            w
        })
        .collect();
    let bit = |row: &[u64], c: usize| (row[c / 64] >> (c % 64)) & 1 == 1;
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        if r == packed.len() {
            break;
        }
        let Some(sel) = (r..packed.len()).find(|&i| bit(&packed[i], c)) else {
            continue;
        };
        packed.swap(r, sel);
        let piv = std::mem::take(&mut packed[r]);
        let w0 = c / 64;
        for (i, row) in packed.iter_mut().enumerate() {
            if i != r && bit(row, c) {
                for (a, b) in row[w0..].iter_mut().zip(&piv[w0..]) {
                    *a ^= *b;
                }
            }
        }
        packed[r] = piv;
        pivots.push(c);
        r += 1;
    }
    packed.truncate(r);
    let rows = packed
        .iter()
        .map(|w| (0..width).map(|c| bit(w, c) as u32).collect())
        .collect();
    Echelon { rows, pivots }
}

/// Reduced row echelon form of a list of rows of width `width`.
fn echelon(mut rows: Vec<Vec<u32>>, width: usize, p: u32) -> Echelon {
    if p == 2 {
        return echelon_f2(rows, width);
    }
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..width {
        let Some(sel) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, sel);
        let inv = inv_mod(rows[r][c], p);
        if inv != 1 {
            for x in rows[r][c..].iter_mut() {
                *x = ((*x as u64 * inv as u64) % p as u64) as u32;
            }
        }
        let piv = std::mem::take(&mut rows[r]);
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && row[c] != 0 {
                let f = p - row[c];
                axpy(&mut row[c..], f, &piv[c..], p);
            }
        }
        rows[r] = piv;
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    Echelon { rows, pivots }
}

impl FieldMat {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FieldMat { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = Self::zeros(p, n, n);
        for i in 0..n {
            m.data[i * n + i] = 1;
        }
        m
    }

    /// Builds from row vectors, reducing every entry mod `p`.
    pub fn from_rows(p: u32, rows: usize, cols: usize, entries: &[Vec<i64>]) -> Result<Self> {
        if entries.len() != rows || entries.iter().any(|r| r.len() != cols) {
            return Err(Error::Invariant(format!("matrix entries do not have shape {rows}x{cols}")));
        }
        let data = entries
            .iter()
            .flatten()
            .map(|&x| x.rem_euclid(p as i64) as u32)
            .collect();
        Ok(FieldMat { p, rows, cols, data })
    }

    /// Builds from residues that must already lie in `0..p`.
    pub fn from_residues(p: u32, rows: usize, cols: usize, data: Vec<u32>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Invariant(format!("expected {} entries, got {}", rows * cols, data.len())));
        }
        if let Some(x) = data.iter().find(|&&x| x >= p) {
            return Err(Error::Invariant(format!("entry {x} is not a residue mod {p}")));
        }
        Ok(FieldMat { p, rows, cols, data })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn is_identity(&self) -> bool {
        self.rows == self.cols && *self == Self::identity(self.p, self.rows)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.p, self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                t.data[c * self.rows + r] = self.get(r, c);
            }
        }
        t
    }

    /// `self * rhs`; panics on shape mismatch.
    pub fn mul(&self, rhs: &FieldMat) -> FieldMat {
        assert_eq!(self.cols, rhs.rows, "matrix product shape mismatch");
        let mut out = FieldMat::zeros(self.p, self.rows, rhs.cols);
        for r in 0..self.rows {
            let orow = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0 {
                    continue;
                }
                axpy(orow, a, rhs.row(k), self.p);
            }
        }
        out
    }

    pub fn checked_mul(&self, rhs: &FieldMat) -> Result<FieldMat> {
        if self.cols != rhs.rows || self.p != rhs.p {
            return Err(Error::Invariant(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.mul(rhs))
    }

    pub fn add(&self, rhs: &FieldMat) -> FieldMat {
        assert_eq!(self.shape(), rhs.shape());
        let p = self.p;
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| ((*a as u64 + *b as u64) % p as u64) as u32)
            .collect();
        FieldMat { p, rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> FieldMat {
        let p = self.p;
        let data = self.data.iter().map(|&a| if a == 0 { 0 } else { p - a }).collect();
        FieldMat { p, rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, rhs: &FieldMat) -> FieldMat {
        self.add(&rhs.neg())
    }

    pub fn scale(&self, s: u32) -> FieldMat {
        let p = self.p as u64;
        let data = self.data.iter().map(|&a| (a as u64 * s as u64 % p) as u32).collect();
        FieldMat { p: self.p, rows: self.rows, cols: self.cols, data }
    }

    /// Columns `[self | rhs]`.
    pub fn hstack(&self, rhs: &FieldMat) -> FieldMat {
        assert_eq!(self.rows, rhs.rows);
        let cols = self.cols + rhs.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(self.row(r));
            data.extend_from_slice(rhs.row(r));
        }
        FieldMat { p: self.p, rows: self.rows, cols, data }
    }

    pub fn vstack(&self, rhs: &FieldMat) -> FieldMat {
        assert_eq!(self.cols, rhs.cols);
        let mut data = self.data.clone();
        data.extend_from_slice(&rhs.data);
        FieldMat { p: self.p, rows: self.rows + rhs.rows, cols: self.cols, data }
    }

    pub fn block_diag(&self, rhs: &FieldMat) -> FieldMat {
        let mut out = FieldMat::zeros(self.p, self.rows + rhs.rows, self.cols + rhs.cols);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, rhs);
        out
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, blk: &FieldMat) {
        for r in 0..blk.rows {
            for c in 0..blk.cols {
                self.data[(r0 + r) * self.cols + c0 + c] = blk.get(r, c);
            }
        }
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> FieldMat {
        let mut out = FieldMat::zeros(self.p, rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.data[r * cols + c] = self.get(r0 + r, c0 + c);
            }
        }
        out
    }

    /// Columns `idx` of `self`, in order.
    pub fn select_cols(&self, idx: &[usize]) -> FieldMat {
        let mut out = FieldMat::zeros(self.p, self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                out.data[r * idx.len() + j] = self.get(r, c);
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[u32]) -> Vec<u32> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .fold(0u64, |acc, (a, b)| (acc + *a as u64 * *b as u64) % self.p as u64)
                    as u32
            })
            .collect()
    }

    /// Reduced row echelon form and rank.
    pub fn rref(&self) -> (FieldMat, usize) {
        let e = echelon(self.to_rows(), self.cols, self.p);
        let rank = e.rows.len();
        let mut out = FieldMat::zeros(self.p, self.rows, self.cols);
        for (i, row) in e.rows.iter().enumerate() {
            out.data[i * self.cols..(i + 1) * self.cols].copy_from_slice(row);
        }
        (out, rank)
    }

    pub fn rank(&self) -> usize {
        echelon(self.to_rows(), self.cols, self.p).rows.len()
    }

    /// A matrix whose columns form a basis of the null space.
    pub fn kernel_basis(&self) -> FieldMat {
        let e = echelon(self.to_rows(), self.cols, self.p);
        let free = free_columns(&e.pivots, self.cols);
        let mut out = FieldMat::zeros(self.p, self.cols, free.len());
        for (j, &fc) in free.iter().enumerate() {
            out.data[fc * free.len() + j] = 1;
            for (row, &pc) in e.rows.iter().zip(&e.pivots) {
                let v = row[fc];
                if v != 0 {
                    out.data[pc * free.len() + j] = self.p - v;
                }
            }
        }
        out
    }

    /// Some `x` with `self * x = b`, if one exists.
    pub fn solve(&self, b: &[u32]) -> Option<Vec<u32>> {
        assert_eq!(b.len(), self.rows);
        let rows: Vec<Vec<u32>> = (0..self.rows)
            .map(|r| {
                let mut row = self.row(r).to_vec();
                row.push(b[r] % self.p);
                row
            })
            .collect();
        let e = echelon(rows, self.cols + 1, self.p);
        if e.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![0; self.cols];
        for (row, &pc) in e.rows.iter().zip(&e.pivots) {
            x[pc] = row[self.cols];
        }
        Some(x)
    }

    /// Some `X` with `self * X = rhs`, if one exists.
    pub fn solve_matrix(&self, rhs: &FieldMat) -> Option<FieldMat> {
        assert_eq!(self.rows, rhs.rows);
        let mut out = FieldMat::zeros(self.p, self.cols, rhs.cols);
        for c in 0..rhs.cols {
            let b: Vec<u32> = (0..rhs.rows).map(|r| rhs.get(r, c)).collect();
            let x = self.solve(&b)?;
            for (r, v) in x.into_iter().enumerate() {
                out.data[r * rhs.cols + c] = v;
            }
        }
        Some(out)
    }

    /// Rows spanning `{y : y * self = 0}`, as a matrix with one such row per
    /// basis vector.
    pub fn left_kernel(&self) -> FieldMat {
        self.transpose().kernel_basis().transpose()
    }
}

fn free_columns(pivots: &[usize], width: usize) -> Vec<usize> {
    let mut is_piv = vec![false; width];
    for &c in pivots {
        is_piv[c] = true;
    }
    (0..width).filter(|&c| !is_piv[c]).collect()
}

/// Finite poset diagram. Arrows run from smaller to larger elements and are
/// stored on cover pairs only.
#[derive(Clone, Debug)]
pub struct Diagram {
    p: u32,
    dims: Vec<usize>,
    /// `(a, b, m)` with `a ⋖ b` and `m : V_a -> V_b`.
    arrows: Vec<(usize, usize, FieldMat)>,
}

#[derive(Clone, Debug)]
pub struct LimitData {
    pub space_dim: usize,
    /// Projection from the limit to each node.
    pub projections: Vec<FieldMat>,
}

#[derive(Clone, Debug)]
pub struct ColimitData {
    pub space_dim: usize,
    /// Injection from each node into the colimit.
    pub injections: Vec<FieldMat>,
}

impl Diagram {
    /// Validates shapes, acyclicity and functoriality.
    pub fn new(p: u32, dims: Vec<usize>, arrows: Vec<(usize, usize, FieldMat)>) -> Result<Self> {
        let n = dims.len();
        for (a, b, m) in &arrows {
            if *a >= n || *b >= n || a == b {
                return Err(Error::Invariant(format!("arrow {a}->{b} is not between distinct nodes")));
            }
            if m.shape() != (dims[*b], dims[*a]) || m.p() != p {
                return Err(Error::Invariant(format!("arrow {a}->{b} has wrong shape")));
            }
        }
        let d = Diagram { p, dims, arrows };
        d.check_functorial()?;
        Ok(d)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    fn topo_order(&self) -> Result<Vec<usize>> {
        let n = self.dims.len();
        let mut indeg = vec![0usize; n];
        for (_, b, _) in &self.arrows {
            indeg[*b] += 1;
        }
        let mut stack: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(a) = stack.pop() {
            order.push(a);
            for (s, b, _) in &self.arrows {
                if *s == a {
                    indeg[*b] -= 1;
                    if indeg[*b] == 0 {
                        stack.push(*b);
                    }
                }
            }
        }
        if order.len() != n {
            return Err(Error::Invariant("arrows contain a cycle".into()));
        }
        Ok(order)
    }

    /// Every pair of cover paths between the same endpoints must compose to
    /// the same map.
    fn check_functorial(&self) -> Result<()> {
        let order = self.topo_order()?;
        for &src in &order {
            let mut comp: BTreeMap<usize, FieldMat> = BTreeMap::new();
            comp.insert(src, FieldMat::identity(self.p, self.dims[src]));
            for &b in &order {
                if b == src {
                    continue;
                }
                for (a, bb, m) in &self.arrows {
                    if *bb != b {
                        continue;
                    }
                    let Some(ca) = comp.get(a) else { continue };
                    let via = m.mul(ca);
                    match comp.get(&b) {
                        Some(prev) if *prev != via => {
                            return Err(Error::Invariant(format!(
                                "paths from {src} to {b} compose to different maps"
                            )));
                        }
                        Some(_) => {}
                        None => {
                            comp.insert(b, via);
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.dims.len() + 1);
        let mut acc = 0;
        for &d in &self.dims {
            off.push(acc);
            acc += d;
        }
        off.push(acc);
        off
    }

    /// Families `(x_n)` with `arrow(a->b) x_a = x_b` on every cover pair.
    pub fn limit(&self) -> LimitData {
        let off = self.offsets();
        let total = off[self.dims.len()];
        let nrows: usize = self.arrows.iter().map(|(_, b, _)| self.dims[*b]).sum();
        let mut sys = FieldMat::zeros(self.p, nrows, total);
        let mut r0 = 0;
        for (a, b, m) in &self.arrows {
            sys.set_block(r0, off[*a], m);
            sys.set_block(r0, off[*b], &FieldMat::identity(self.p, self.dims[*b]).neg());
            r0 += self.dims[*b];
        }
        let k = sys.kernel_basis();
        let projections = (0..self.dims.len())
            .map(|n| k.block(off[n], 0, self.dims[n], k.cols()))
            .collect();
        LimitData { space_dim: k.cols(), projections }
    }

    /// Direct sum of the node spaces modulo `x_a ~ arrow(a->b) x_a`.
    pub fn colimit(&self) -> ColimitData {
        let off = self.offsets();
        let total = off[self.dims.len()];
        let ncols: usize = self.arrows.iter().map(|(a, _, _)| self.dims[*a]).sum();
        let mut rel = FieldMat::zeros(self.p, total, ncols);
        let mut c0 = 0;
        for (a, b, m) in &self.arrows {
            rel.set_block(off[*a], c0, &FieldMat::identity(self.p, self.dims[*a]));
            rel.set_block(off[*b], c0, &m.neg());
            c0 += self.dims[*a];
        }
        // quotient map: rows spanning the annihilator of the relations
        let q = rel.left_kernel();
        let injections = (0..self.dims.len())
            .map(|n| q.block(0, off[n], q.rows(), self.dims[n]))
            .collect();
        ColimitData { space_dim: q.rows(), injections }
    }

    pub fn arrows(&self) -> &[(usize, usize, FieldMat)] {
        &self.arrows
    }
}

/// One term `left * X[unknown] * right` of a block matrix equation.
#[derive(Clone, Debug)]
pub struct Term {
    pub left: FieldMat,
    pub unknown: usize,
    pub right: FieldMat,
}

/// `sum of terms = rhs`.
#[derive(Clone, Debug)]
pub struct BlockEquation {
    pub terms: Vec<Term>,
    pub rhs: FieldMat,
}

/// A linear system whose unknowns are matrices of fixed shapes.
#[derive(Clone, Debug)]
pub struct BlockSystem {
    pub p: u32,
    pub shapes: Vec<(usize, usize)>,
    pub equations: Vec<BlockEquation>,
}

/// Solution set `particular + span(basis)` in the vectorized unknowns.
#[derive(Clone, Debug)]
pub struct AffineSpace {
    pub p: u32,
    pub shapes: Vec<(usize, usize)>,
    pub particular: Option<Vec<u32>>,
    pub basis: Vec<Vec<u32>>,
}

impl BlockSystem {
    pub fn new(p: u32, shapes: Vec<(usize, usize)>) -> Self {
        BlockSystem { p, shapes, equations: Vec::new() }
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.shapes.len() + 1);
        let mut acc = 0;
        for (r, c) in &self.shapes {
            off.push(acc);
            acc += r * c;
        }
        off.push(acc);
        off
    }

    pub fn num_vars(&self) -> usize {
        self.shapes.iter().map(|(r, c)| r * c).sum()
    }

    pub fn push(&mut self, eq: BlockEquation) {
        self.equations.push(eq);
    }

    /// Vectorized rows `[coefficients | rhs]`, skipping identically zero rows.
    fn dense_rows(&self) -> Vec<Vec<u32>> {
        let off = self.offsets();
        let nv = off[self.shapes.len()];
        let p = self.p as u64;
        let mut rows = Vec::new();
        for eq in &self.equations {
            let (er, ec) = eq.rhs.shape();
            for r in 0..er {
                for c in 0..ec {
                    let mut row = vec![0u32; nv + 1];
                    for t in &eq.terms {
                        let (ur, uc) = self.shapes[t.unknown];
                        debug_assert_eq!(t.left.shape(), (er, ur));
                        debug_assert_eq!(t.right.shape(), (uc, ec));
                        for i in 0..ur {
                            let l = t.left.get(r, i);
                            if l == 0 {
                                continue;
                            }
                            for j in 0..uc {
                                let rr = t.right.get(j, c);
                                if rr == 0 {
                                    continue;
                                }
                                let k = off[t.unknown] + i * uc + j;
                                row[k] = ((row[k] as u64 + l as u64 * rr as u64) % p) as u32;
                            }
                        }
                    }
                    row[nv] = eq.rhs.get(r, c);
                    if row.iter().any(|&x| x != 0) {
                        rows.push(row);
                    }
                }
            }
        }
        rows
    }

    /// Parameterizes every assignment of the unknowns satisfying all equations.
    pub fn solve(&self) -> AffineSpace {
        let nv = self.num_vars();
        let e = echelon(self.dense_rows(), nv + 1, self.p);
        let consistent = e.pivots.last() != Some(&nv);
        let piv: Vec<usize> = e.pivots.iter().copied().filter(|&c| c < nv).collect();
        let free = free_columns(&piv, nv);
        let particular = consistent.then(|| {
            let mut x = vec![0; nv];
            for (row, &pc) in e.rows.iter().zip(&piv) {
                x[pc] = row[nv];
            }
            x
        });
        let basis = free
            .iter()
            .map(|&fc| {
                let mut x = vec![0; nv];
                x[fc] = 1;
                for (row, &pc) in e.rows.iter().zip(&piv) {
                    if row[fc] != 0 {
                        x[pc] = self.p - row[fc];
                    }
                }
                x
            })
            .collect();
        AffineSpace { p: self.p, shapes: self.shapes.clone(), particular, basis }
    }
}

impl AffineSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particular.is_none()
    }

    /// Splits a vectorized point into its unknown matrices.
    pub fn unflatten(&self, x: &[u32]) -> Vec<FieldMat> {
        let mut out = Vec::with_capacity(self.shapes.len());
        let mut at = 0;
        for &(r, c) in &self.shapes {
            out.push(FieldMat::from_residues(self.p, r, c, x[at..at + r * c].to_vec()).expect("residues"));
            at += r * c;
        }
        out
    }

    /// `particular + sum coeffs[i] * basis[i]`.
    pub fn point(&self, coeffs: &[u32]) -> Option<Vec<u32>> {
        let mut x = self.particular.clone()?;
        for (c, b) in coeffs.iter().zip(&self.basis) {
            if *c != 0 {
                axpy(&mut x, *c, b, self.p);
            }
        }
        Some(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2(rows: &[Vec<i64>]) -> FieldMat {
        FieldMat::from_rows(2, rows.len(), rows.first().map_or(0, |r| r.len()), rows).unwrap()
    }

    #[test]
    fn rref_examples() {
        let (r, k) = FieldMat::identity(2, 3).rref();
        assert!(r.is_identity());
        assert_eq!(k, 3);
        let (r, k) = FieldMat::zeros(2, 2, 2).rref();
        assert!(r.is_zero());
        assert_eq!(k, 0);
        let (r, k) = m2(&[vec![1, 1], vec![1, 1]]).rref();
        assert_eq!(r, m2(&[vec![1, 1], vec![0, 0]]));
        assert_eq!(k, 1);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(FieldMat::identity(2, 3).kernel_basis().cols(), 0);
        assert_eq!(FieldMat::zeros(2, 2, 2).kernel_basis().cols(), 2);
        let k = m2(&[vec![1, 1]]).kernel_basis();
        assert_eq!(k, m2(&[vec![1], vec![1]]));
    }

    #[test]
    fn solve_examples() {
        let id = FieldMat::identity(5, 2);
        assert_eq!(id.solve(&[3, 4]), Some(vec![3, 4]));
        assert_eq!(FieldMat::zeros(2, 1, 1).solve(&[1]), None);
        let x = m2(&[vec![1, 1]]).solve(&[1]).unwrap();
        assert!(x == vec![1, 0] || x == vec![0, 1]);
    }

    #[test]
    fn mod_p_arithmetic() {
        let a = FieldMat::from_rows(5, 2, 2, &[vec![2, 3], vec![1, 1]]).unwrap();
        let (r, k) = a.rref();
        assert_eq!(k, 2);
        assert!(r.is_identity());
        let inv = a.solve_matrix(&FieldMat::identity(5, 2)).unwrap();
        assert!(a.mul(&inv).is_identity());
    }

    #[test]
    fn left_kernel_annihilates() {
        let a = m2(&[vec![1, 0], vec![1, 0], vec![0, 1]]);
        let l = a.left_kernel();
        assert_eq!(l.rows(), 1);
        assert!(l.mul(&a).is_zero());
    }

    #[test]
    fn limit_of_discrete_diagram_is_product() {
        let d = Diagram::new(2, vec![1, 2], vec![]).unwrap();
        assert_eq!(d.limit().space_dim, 3);
        assert_eq!(d.colimit().space_dim, 3);
    }

    #[test]
    fn limit_with_initial_node() {
        // a -> b with zero map: initial object a
        let d = Diagram::new(2, vec![1, 1], vec![(0, 1, FieldMat::zeros(2, 1, 1))]).unwrap();
        let l = d.limit();
        assert_eq!(l.space_dim, 1);
        assert!(l.projections[0].is_identity());
        let c = d.colimit();
        assert_eq!(c.space_dim, 1);
        assert!(c.injections[1].is_identity());
    }

    #[test]
    fn non_commuting_square_rejected() {
        let one = FieldMat::identity(2, 1);
        let zero = FieldMat::zeros(2, 1, 1);
        let err = Diagram::new(
            2,
            vec![1, 1, 1, 1],
            vec![(0, 1, one.clone()), (0, 2, one.clone()), (1, 3, one), (2, 3, zero)],
        );
        assert!(err.is_err());
    }

    #[test]
    fn affine_space_examples() {
        let sys = BlockSystem::new(2, vec![(1, 1)]);
        let s = sys.solve();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.particular, Some(vec![0]));

        let mut sys = BlockSystem::new(2, vec![(1, 1)]);
        sys.push(BlockEquation {
            terms: vec![Term { left: FieldMat::identity(2, 1), unknown: 0, right: FieldMat::identity(2, 1) }],
            rhs: FieldMat::zeros(2, 1, 1),
        });
        let s = sys.solve();
        assert_eq!(s.dim(), 0);
        assert_eq!(s.particular, Some(vec![0]));
    }

    #[test]
    fn inconsistent_system_has_no_particular() {
        let mut sys = BlockSystem::new(2, vec![(1, 1)]);
        sys.push(BlockEquation {
            terms: vec![Term { left: FieldMat::zeros(2, 1, 1), unknown: 0, right: FieldMat::identity(2, 1) }],
            rhs: FieldMat::identity(2, 1),
        });
        assert!(sys.solve().is_empty());
    }
}
