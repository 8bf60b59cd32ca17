//! JSON document format for cones, modules, ray sheaves, morphisms and
//! interleaving witnesses. Rationals are strings, matrices are arrays of
//! residue rows, unknown keys are rejected.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::arrangement::{AxisGrid, Cell, CellComplex};
use crate::cone::ConeSpec;
use crate::conv1d::RaySheaf;
use crate::error::{Error, Result};
use crate::exactla::FieldMat;
use crate::interleave::InterleavingWitness;
use crate::persist::{ArrModule, ModMorphism};
use crate::rat::{RVec, Rat};
use crate::sites::GammaModule;

pub const VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeDoc {
    pub dimension: usize,
    pub normals: Vec<RVec>,
    pub generators: Vec<RVec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleConeDoc {
    pub normals: Vec<RVec>,
    pub generators: Vec<RVec>,
    pub transform: Vec<RVec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellDoc {
    pub index: Vec<usize>,
    /// `vertex`, `open` or `mixed`.
    pub kind: String,
    pub dim: usize,
}

/// Structure map from the upper cover `from` into `to`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub matrix: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDoc {
    pub field: u32,
    pub dimension: usize,
    pub cone: ModuleConeDoc,
    pub axes: Vec<Vec<Rat>>,
    pub cells: Vec<CellDoc>,
    #[serde(default)]
    pub maps: Vec<MapDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentDoc {
    pub index: Vec<usize>,
    pub matrix: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDoc {
    pub src: ModuleDoc,
    pub dst: ModuleDoc,
    #[serde(default)]
    pub components: Vec<ComponentDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDoc {
    pub direction: RVec,
    pub f: MorphismDoc,
    pub g: MorphismDoc,
}

#[derive(Clone, Debug, PartialEq, Eq)]
#[allow(clippy::large_enum_variant)]
pub enum Payload {
    Cone(ConeDoc),
    ArrModule(ModuleDoc),
    GammaModule(ModuleDoc),
    RaySheaf(RaySheaf),
    Morphism(MorphismDoc),
    Witness(WitnessDoc),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Cone(_) => "cone",
            Payload::ArrModule(_) => "arr-module",
            Payload::GammaModule(_) => "gamma-module",
            Payload::RaySheaf(_) => "ray-sheaf",
            Payload::Morphism(_) => "morphism",
            Payload::Witness(_) => "witness",
        }
    }
}

/// A versioned, typed document.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub payload: Payload,
}

impl Serialize for Document {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Document", 3)?;
        st.serialize_field("version", VERSION)?;
        st.serialize_field("kind", self.payload.kind())?;
        match &self.payload {
            Payload::Cone(x) => st.serialize_field("payload", x)?,
            Payload::ArrModule(x) | Payload::GammaModule(x) => st.serialize_field("payload", x)?,
            Payload::RaySheaf(x) => st.serialize_field("payload", x)?,
            Payload::Morphism(x) => st.serialize_field("payload", x)?,
            Payload::Witness(x) => st.serialize_field("payload", x)?,
        }
        st.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDocument {
    version: String,
    kind: String,
    payload: serde_json::Value,
}

fn parse_err(e: serde_json::Error) -> Error {
    Error::Parse(e.to_string())
}

impl Document {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawDocument = serde_json::from_str(text).map_err(parse_err)?;
        if raw.version != VERSION {
            return Err(Error::Parse(format!("unsupported document version {:?}", raw.version)));
        }
        let v = raw.payload;
        let payload = match raw.kind.as_str() {
            "cone" => Payload::Cone(serde_json::from_value(v).map_err(parse_err)?),
            "arr-module" => Payload::ArrModule(serde_json::from_value(v).map_err(parse_err)?),
            "gamma-module" => Payload::GammaModule(serde_json::from_value(v).map_err(parse_err)?),
            "ray-sheaf" => Payload::RaySheaf(serde_json::from_value(v).map_err(parse_err)?),
            "morphism" => Payload::Morphism(serde_json::from_value(v).map_err(parse_err)?),
            "witness" => Payload::Witness(serde_json::from_value(v).map_err(parse_err)?),
            k => return Err(Error::Parse(format!("unknown document kind {k:?}"))),
        };
        Ok(Document { payload })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn kind(&self) -> &'static str {
        self.payload.kind()
    }

    pub fn cone(c: &ConeSpec) -> Self {
        Document {
            payload: Payload::Cone(ConeDoc {
                dimension: c.dim(),
                normals: c.normals().to_vec(),
                generators: c.generators().to_vec(),
            }),
        }
    }

    pub fn arr_module(m: &ArrModule) -> Self {
        Document { payload: Payload::ArrModule(module_to_doc(m)) }
    }

    pub fn gamma_module(g: &GammaModule) -> Self {
        Document { payload: Payload::GammaModule(module_to_doc(g.module())) }
    }

    pub fn ray_sheaf(f: &RaySheaf) -> Self {
        Document { payload: Payload::RaySheaf(f.clone()) }
    }

    pub fn morphism(f: &ModMorphism) -> Self {
        Document { payload: Payload::Morphism(morphism_to_doc(f)) }
    }

    pub fn witness(w: &InterleavingWitness) -> Self {
        Document {
            payload: Payload::Witness(WitnessDoc {
                direction: w.v.clone(),
                f: morphism_to_doc(&w.f),
                g: morphism_to_doc(&w.g),
            }),
        }
    }

    /// Checks every invariant the payload carries.
    pub fn validate(&self) -> Result<()> {
        match &self.payload {
            Payload::Cone(c) => cone_from_doc(c).map(|_| ()),
            Payload::ArrModule(m) => module_from_doc(m).map(|_| ()),
            Payload::GammaModule(m) => GammaModule::new(module_from_doc(m)?).map(|_| ()),
            Payload::RaySheaf(_) => Ok(()),
            Payload::Morphism(m) => morphism_from_doc(m).map(|_| ()),
            Payload::Witness(w) => witness_from_doc(w).map(|_| ()),
        }
    }
}

pub fn cone_from_doc(d: &ConeDoc) -> Result<ConeSpec> {
    ConeSpec::new(d.dimension, d.normals.clone(), d.generators.clone())
}

fn cell_kind(c: &Cell) -> &'static str {
    if c.is_vertex() {
        "vertex"
    } else if c.is_fully_open() {
        "open"
    } else {
        "mixed"
    }
}

fn matrix_rows(m: &FieldMat) -> Vec<Vec<u32>> {
    m.to_rows()
}

fn matrix_from_rows(p: u32, rows: usize, cols: usize, data: &[Vec<u32>], what: &str) -> Result<FieldMat> {
    let empty_ok = rows * cols == 0 && data.iter().all(|r| r.is_empty()) && (data.is_empty() || data.len() == rows);
    if empty_ok {
        return Ok(FieldMat::zeros(p, rows, cols));
    }
    if data.len() != rows || data.iter().any(|r| r.len() != cols) {
        return Err(Error::Invariant(format!("{what}: matrix must be {rows}x{cols}")));
    }
    FieldMat::from_residues(p, rows, cols, data.concat()).map_err(|e| Error::Invariant(format!("{what}: {e}")))
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

pub fn module_to_doc(m: &ArrModule) -> ModuleDoc {
    let c = m.complex();
    let cone = c.cone();
    let cells = c.cells().map(|a| CellDoc { kind: cell_kind(&a).into(), dim: m.dim_at(&a), index: a.0 }).collect();
    let mut maps = Vec::new();
    for a in c.cells() {
        for k in 0..c.dim() {
            let (Some(b), Some(mat)) = (c.upper_cover(&a, k), m.cover_map(&a, k)) else { continue };
            if mat.rows() * mat.cols() == 0 {
                continue;
            }
            maps.push(MapDoc { from: b.0, to: a.0.clone(), matrix: matrix_rows(mat) });
        }
    }
    ModuleDoc {
        field: m.p(),
        dimension: c.dim(),
        cone: ModuleConeDoc {
            normals: cone.normals().to_vec(),
            generators: cone.generators().to_vec(),
            transform: c.transform().to_vec(),
        },
        axes: c.axes().iter().map(|a| a.breakpoints().to_vec()).collect(),
        cells,
        maps,
    }
}

fn complex_from_doc(d: &ModuleDoc) -> Result<CellComplex> {
    let cone = ConeSpec::new(d.dimension, d.cone.normals.clone(), d.cone.generators.clone())?;
    if d.axes.len() != d.dimension {
        return Err(Error::Dimension { expected: d.dimension, got: d.axes.len() });
    }
    let axes = d.axes.iter().map(|b| AxisGrid::new(b.clone())).collect::<Result<Vec<_>>>()?;
    CellComplex::with_transform(cone, d.cone.transform.clone(), axes)
}

fn cell_in(c: &CellComplex, idx: &[usize]) -> Result<Cell> {
    if idx.len() != c.dim() || idx.iter().zip(c.axes()).any(|(&i, a)| i >= a.num_cells()) {
        return Err(Error::Invariant(format!("cell {idx:?} is outside the arrangement")));
    }
    Ok(Cell(idx.to_vec()))
}

/// Cells left out have dimension zero; structure maps left out are zero.
pub fn module_from_doc(d: &ModuleDoc) -> Result<ArrModule> {
    if !is_prime(d.field) {
        return Err(Error::Invariant(format!("field size {} is not prime", d.field)));
    }
    let p = d.field;
    let c = complex_from_doc(d)?;
    let n = c.dim();
    let mut dims = vec![0usize; c.num_cells()];
    let mut seen = vec![false; c.num_cells()];
    for cd in &d.cells {
        let a = cell_in(&c, &cd.index)?;
        let lin = c.linear(&a);
        if seen[lin] {
            return Err(Error::Invariant(format!("cell {:?} listed twice", cd.index)));
        }
        if cd.kind != cell_kind(&a) {
            return Err(Error::Invariant(format!("cell {:?} is {}, not {}", cd.index, cell_kind(&a), cd.kind)));
        }
        seen[lin] = true;
        dims[lin] = cd.dim;
    }
    let mut maps: Vec<Option<FieldMat>> = Vec::with_capacity(dims.len() * n);
    for a in c.cells() {
        for k in 0..n {
            maps.push(c.upper_cover(&a, k).map(|b| FieldMat::zeros(p, dims[c.linear(&a)], dims[c.linear(&b)])));
        }
    }
    let mut given = vec![false; maps.len()];
    for md in &d.maps {
        let (from, to) = (cell_in(&c, &md.from)?, cell_in(&c, &md.to)?);
        let k = (0..n)
            .find(|&k| c.upper_cover(&to, k).as_ref() == Some(&from))
            .ok_or_else(|| Error::Invariant(format!("{:?} -> {:?} is not a cover pair", md.from, md.to)))?;
        let slot = c.linear(&to) * n + k;
        if given[slot] {
            return Err(Error::Invariant(format!("map {:?} -> {:?} listed twice", md.from, md.to)));
        }
        given[slot] = true;
        let what = format!("map {:?} -> {:?}", md.from, md.to);
        maps[slot] = Some(matrix_from_rows(p, dims[c.linear(&to)], dims[c.linear(&from)], &md.matrix, &what)?);
    }
    let m = ArrModule::new(c, p, dims, maps)?;
    m.validate()?;
    Ok(m)
}

pub fn morphism_to_doc(f: &ModMorphism) -> MorphismDoc {
    let c = f.complex();
    let components = c
        .cells()
        .filter_map(|a| {
            let m = f.component(&a);
            (m.rows() * m.cols() > 0).then(|| ComponentDoc { matrix: matrix_rows(m), index: a.0 })
        })
        .collect();
    MorphismDoc { src: module_to_doc(f.src()), dst: module_to_doc(f.dst()), components }
}

/// Components left out are zero.
pub fn morphism_from_doc(d: &MorphismDoc) -> Result<ModMorphism> {
    let (src, dst) = (module_from_doc(&d.src)?, module_from_doc(&d.dst)?);
    let c = src.complex().clone();
    let mut comps: Vec<Option<FieldMat>> = vec![None; c.num_cells()];
    for cd in &d.components {
        let a = cell_in(&c, &cd.index)?;
        let lin = c.linear(&a);
        if comps[lin].is_some() {
            return Err(Error::Invariant(format!("component {:?} listed twice", cd.index)));
        }
        let what = format!("component {:?}", cd.index);
        comps[lin] = Some(matrix_from_rows(src.p(), dst.dim_at(&a), src.dim_at(&a), &cd.matrix, &what)?);
    }
    let comps = c
        .cells()
        .zip(comps)
        .map(|(a, m)| m.unwrap_or_else(|| FieldMat::zeros(src.p(), dst.dim_at(&a), src.dim_at(&a))))
        .collect();
    ModMorphism::checked(src, dst, comps)
}

pub fn witness_from_doc(d: &WitnessDoc) -> Result<InterleavingWitness> {
    Ok(InterleavingWitness { v: d.direction.clone(), f: morphism_from_doc(&d.f)?, g: morphism_from_doc(&d.g)? })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::persist::{principal_module, random_module, RandomSpec};
    use crate::rat::rvec;

    #[test]
    fn module_round_trip() {
        for seed in 0..20 {
            let spec = if seed % 2 == 0 { RandomSpec::line() } else { RandomSpec::plane() };
            let m = random_module(seed, &spec);
            let text = Document::arr_module(&m).to_json();
            let back = Document::from_json(&text).unwrap();
            let Payload::ArrModule(d) = &back.payload else { panic!() };
            assert_eq!(module_from_doc(d).unwrap(), m);
            assert_eq!(back.to_json(), text);
        }
    }

    #[test]
    fn rejects_bad_input() {
        let m = principal_module(&CellComplex::line(&[]), &rvec(&[0]), 2).unwrap();
        let text = Document::arr_module(&m).to_json();
        let bad = text.replacen("\"0\"", "\"1/0\"", 1);
        assert!(matches!(Document::from_json(&bad), Err(Error::Parse(_))));
        let extra = text.replacen("\"field\"", "\"colour\": 1, \"field\"", 1);
        assert!(matches!(Document::from_json(&extra), Err(Error::Parse(_))));
    }

    #[test]
    fn key_order_is_fixed() {
        let t = Document::ray_sheaf(&RaySheaf::new(rvec(&[3, 0]))).to_json();
        let (v, k, p) = (t.find("version").unwrap(), t.find("kind").unwrap(), t.find("payload").unwrap());
        assert!(v < k && k < p);
        assert!(t.contains("\"0\""));
    }
}
