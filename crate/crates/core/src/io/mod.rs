//! File formats: JSON for problems and solutions, sparse SDPA for export.
//!
//! Floats are always written with 17 significant digits so that a save and
//! load round trip is exact.

mod sdpa;

use std::fs;
use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::embed_primal::StructuralIndex;
use crate::error::{Error, Result};
use crate::linalg::{SymMatrix, DEFAULT_TOL};
use crate::sdo::{DualSplit, EmbeddingMeta, Provenance, SdoProblem, SdoSolution, Side};
use crate::soco::{SocoProblem, SocoSolution};

pub use sdpa::{export_sdpa, write_sdpa};

/// Pretty JSON whose floats carry 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{:.16e}", f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes any value with the 17-digit formatter.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Parse(e.to_string()))?;
    buf.push(b'\n');
    String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemFile {
    cones: Vec<usize>,
    m: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<Vec<f64>>>,
    b: Vec<f64>,
    c: Vec<Vec<f64>>,
}

pub fn problem_to_json(p: &SocoProblem) -> Result<String> {
    to_json(&ProblemFile {
        cones: p.cone_dims().to_vec(),
        m: p.num_rows(),
        a: p.a_blocks().to_vec(),
        b: p.b().to_vec(),
        c: p.c_blocks().to_vec(),
    })
}

pub fn problem_from_json(text: &str) -> Result<SocoProblem> {
    let f: ProblemFile = from_json(text)?;
    if f.b.len() != f.m {
        return Err(Error::Shape(format!("\"b\" has length {}, but \"m\" is {}", f.b.len(), f.m)));
    }
    SocoProblem::new(f.cones, f.a, f.c, f.b)
}

pub fn load_problem(path: impl AsRef<Path>) -> Result<SocoProblem> {
    problem_from_json(&read(path.as_ref())?)
}

pub fn save_problem(path: impl AsRef<Path>, p: &SocoProblem) -> Result<()> {
    write(path.as_ref(), &problem_to_json(p)?)
}

pub fn solution_to_json(sol: &SocoSolution) -> Result<String> {
    to_json(sol)
}

pub fn solution_from_json(text: &str) -> Result<SocoSolution> {
    from_json(text)
}

pub fn load_solution(path: impl AsRef<Path>) -> Result<SocoSolution> {
    solution_from_json(&read(path.as_ref())?)
}

pub fn save_solution(path: impl AsRef<Path>, sol: &SocoSolution) -> Result<()> {
    write(path.as_ref(), &solution_to_json(sol)?)
}

type Triplets = Vec<(usize, usize, f64)>;

fn triplets(m: &SymMatrix) -> Triplets {
    m.upper_nonzeros().collect()
}

fn from_triplets(dim: usize, entries: &[(usize, usize, f64)]) -> Result<SymMatrix> {
    let mut m = SymMatrix::zeros(dim);
    for &(i, j, v) in entries {
        if i >= dim || j >= dim {
            return Err(Error::Shape(format!("entry ({i}, {j}) outside order {dim}")));
        }
        m.set(i, j, v);
    }
    Ok(m)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingFile {
    side: String,
    cone_dims: Vec<usize>,
    num_original_rows: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SdoProblemFile {
    dim: usize,
    /// Upper-triangle `[i, j, value]`, 0-based.
    #[serde(rename = "C")]
    c: Triplets,
    #[serde(rename = "A")]
    constraints: Vec<Triplets>,
    b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    embedding: Option<EmbeddingFile>,
}

pub fn sdo_problem_to_json(p: &SdoProblem) -> Result<String> {
    let embedding = p.meta().map(|m| EmbeddingFile {
        side: m.side.name().to_string(),
        cone_dims: m.cone_dims.clone(),
        num_original_rows: m.num_original_rows,
    });
    to_json(&SdoProblemFile {
        dim: p.dim(),
        c: triplets(p.c()),
        constraints: p.constraints().iter().map(triplets).collect(),
        b: p.b().to_vec(),
        embedding,
    })
}

pub fn sdo_problem_from_json(text: &str) -> Result<SdoProblem> {
    let f: SdoProblemFile = from_json(text)?;
    let c = from_triplets(f.dim, &f.c)?;
    let constraints = f
        .constraints
        .iter()
        .map(|a| from_triplets(f.dim, a))
        .collect::<Result<Vec<_>>>()?;
    let provenance = match f.embedding {
        None => Provenance::Generic,
        Some(e) => {
            let side: Side = e.side.parse()?;
            let structure = (side == Side::Primal).then(|| StructuralIndex::new(&e.cone_dims));
            Provenance::Embedding(EmbeddingMeta {
                side,
                cone_dims: e.cone_dims,
                num_original_rows: e.num_original_rows,
                structure,
            })
        }
    };
    SdoProblem::new(c, constraints, f.b, provenance)
}

pub fn load_sdo_problem(path: impl AsRef<Path>) -> Result<SdoProblem> {
    sdo_problem_from_json(&read(path.as_ref())?)
}

pub fn save_sdo_problem(path: impl AsRef<Path>, p: &SdoProblem) -> Result<()> {
    write(path.as_ref(), &sdo_problem_to_json(p)?)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DualSplitFile {
    v: Vec<f64>,
    /// `[h, l, value]`, 0-based.
    w: Vec<(usize, usize, f64)>,
    /// `[k, value]`, 0-based.
    u: Vec<(usize, f64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SdoSolutionFile {
    #[serde(rename = "X", default, skip_serializing_if = "Option::is_none")]
    x: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y: Option<Vec<f64>>,
    #[serde(rename = "S", default, skip_serializing_if = "Option::is_none")]
    s: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dual_split: Option<DualSplitFile>,
}

pub fn sdo_solution_to_json(sol: &SdoSolution) -> Result<String> {
    to_json(&SdoSolutionFile {
        x: sol.x.as_ref().map(SymMatrix::rows),
        y: sol.y.clone(),
        s: sol.s.as_ref().map(SymMatrix::rows),
        dual_split: sol.dual_split.as_ref().map(|d| DualSplitFile {
            v: d.v.clone(),
            w: d.w.iter().map(|&((h, l), v)| (h, l, v)).collect(),
            u: d.u.clone(),
        }),
    })
}

pub fn sdo_solution_from_json(text: &str) -> Result<SdoSolution> {
    let f: SdoSolutionFile = from_json(text)?;
    let matrix = |rows: Option<Vec<Vec<f64>>>| rows.map(|r| SymMatrix::from_rows(&r, DEFAULT_TOL)).transpose();
    Ok(SdoSolution {
        x: matrix(f.x)?,
        y: f.y,
        s: matrix(f.s)?,
        dual_split: f.dual_split.map(|d| DualSplit {
            v: d.v,
            w: d.w.into_iter().map(|(h, l, v)| ((h, l), v)).collect(),
            u: d.u,
        }),
    })
}

pub fn load_sdo_solution(path: impl AsRef<Path>) -> Result<SdoSolution> {
    sdo_solution_from_json(&read(path.as_ref())?)
}

pub fn save_sdo_solution(path: impl AsRef<Path>, sol: &SdoSolution) -> Result<()> {
    write(path.as_ref(), &sdo_solution_to_json(sol)?)
}
