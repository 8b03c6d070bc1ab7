//! Standard-form semidefinite problems and their feasibility checks.
//!
//! `min Tr(CX)  s.t.  Tr(AᵢX) = bᵢ,  X ⪰ 0` with dual
//! `max bᵀy  s.t.  Σ yᵢAᵢ + S = C,  S ⪰ 0`.

use crate::embed_primal::StructuralIndex;
use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Arrow-head structure on the dual slack `S`.
    Dual,
    /// Arrow-head structure enforced on `X` by extra constraints.
    Primal,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Dual => "dual",
            Side::Primal => "primal",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dual" => Ok(Side::Dual),
            "primal" => Ok(Side::Primal),
            other => Err(Error::InvalidArgument(format!(
                "side must be `dual` or `primal`, got `{other}`"
            ))),
        }
    }
}

/// What a constraint row of an embedding stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    /// Row `j` of the original SOCO system.
    Original(usize),
    /// Forces `X(h, l) = 0` (0-based, `h < l`).
    OffArrow(usize, usize),
    /// Ties `X(k, k)` to the leading diagonal entry of its block (0-based).
    DiagonalTie(usize),
}

/// Geometry an inverse map needs to undo an embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingMeta {
    pub side: Side,
    pub cone_dims: Vec<usize>,
    pub num_original_rows: usize,
    /// Present for primal-side embeddings.
    pub structure: Option<StructuralIndex>,
}

impl EmbeddingMeta {
    pub fn offsets(&self) -> Vec<usize> {
        crate::soco::block_offsets(&self.cone_dims)
    }

    pub fn total_dim(&self) -> usize {
        self.cone_dims.iter().sum()
    }

    /// Row bookkeeping: originals, then off-arrow rows, then diagonal ties.
    pub fn row_kinds(&self) -> Vec<RowKind> {
        let mut kinds: Vec<RowKind> = (0..self.num_original_rows).map(RowKind::Original).collect();
        if let Some(st) = &self.structure {
            kinds.extend(st.zero_pairs.iter().map(|&(h, l)| RowKind::OffArrow(h, l)));
            kinds.extend(st.tied_diagonals.iter().map(|&k| RowKind::DiagonalTie(k)));
        }
        kinds
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Generic,
    Embedding(EmbeddingMeta),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SdoProblem {
    c: SymMatrix,
    constraints: Vec<SymMatrix>,
    b: Vec<f64>,
    provenance: Provenance,
}

impl SdoProblem {
    pub fn new(
        c: SymMatrix,
        constraints: Vec<SymMatrix>,
        b: Vec<f64>,
        provenance: Provenance,
    ) -> Result<Self> {
        if constraints.len() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "SdoProblem constraints vs b",
                expected: constraints.len(),
                found: b.len(),
            });
        }
        if let Some(a) = constraints.iter().find(|a| a.dim() != c.dim()) {
            return Err(Error::DimensionMismatch {
                context: "SdoProblem constraint order",
                expected: c.dim(),
                found: a.dim(),
            });
        }
        if let Provenance::Embedding(meta) = &provenance {
            if meta.total_dim() != c.dim() {
                return Err(Error::DimensionMismatch {
                    context: "SdoProblem embedding order",
                    expected: meta.total_dim(),
                    found: c.dim(),
                });
            }
            if meta.row_kinds().len() != b.len() {
                return Err(Error::DimensionMismatch {
                    context: "SdoProblem embedding rows",
                    expected: meta.row_kinds().len(),
                    found: b.len(),
                });
            }
        }
        Ok(SdoProblem {
            c,
            constraints,
            b,
            provenance,
        })
    }

    pub fn dim(&self) -> usize {
        self.c.dim()
    }

    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    pub fn c(&self) -> &SymMatrix {
        &self.c
    }

    pub fn constraints(&self) -> &[SymMatrix] {
        &self.constraints
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn meta(&self) -> Option<&EmbeddingMeta> {
        match &self.provenance {
            Provenance::Embedding(m) => Some(m),
            Provenance::Generic => None,
        }
    }
}

/// Split of the dual vector of a primal-side embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSplit {
    /// Multipliers of the original rows.
    pub v: Vec<f64>,
    /// Multipliers of the off-arrow rows, keyed by 0-based `(h, l)`.
    pub w: Vec<((usize, usize), f64)>,
    /// Multipliers of the diagonal ties, keyed by 0-based `k`.
    pub u: Vec<(usize, f64)>,
}

impl DualSplit {
    /// Concatenation in constraint order.
    pub fn assemble(&self) -> Vec<f64> {
        self.v
            .iter()
            .copied()
            .chain(self.w.iter().map(|(_, x)| *x))
            .chain(self.u.iter().map(|(_, x)| *x))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SdoSolution {
    pub x: Option<SymMatrix>,
    pub y: Option<Vec<f64>>,
    pub s: Option<SymMatrix>,
    pub dual_split: Option<DualSplit>,
}

impl SdoSolution {
    pub fn x(&self) -> Result<&SymMatrix> {
        self.x.as_ref().ok_or(Error::MissingPart("X"))
    }

    pub fn y(&self) -> Result<&[f64]> {
        self.y.as_deref().ok_or(Error::MissingPart("y"))
    }

    pub fn s(&self) -> Result<&SymMatrix> {
        self.s.as_ref().ok_or(Error::MissingPart("S"))
    }

    pub fn check_shape(&self, p: &SdoProblem) -> Result<()> {
        for (name, m) in [("X", &self.x), ("S", &self.s)] {
            if let Some(m) = m {
                if m.dim() != p.dim() {
                    return Err(Error::Shape(format!(
                        "{name} has order {}, expected {}",
                        m.dim(),
                        p.dim()
                    )));
                }
            }
        }
        if let Some(y) = &self.y {
            if y.len() != p.num_constraints() {
                return Err(Error::Shape(format!(
                    "y has length {}, expected {}",
                    y.len(),
                    p.num_constraints()
                )));
            }
        }
        if let (Some(split), Some(y)) = (&self.dual_split, &self.y) {
            if &split.assemble() != y {
                return Err(Error::Shape("dual split does not reassemble to y".into()));
            }
        }
        Ok(())
    }
}

/// `maxᵢ |Tr(AᵢX) − bᵢ|`.
pub fn sdo_primal_residual(p: &SdoProblem, sol: &SdoSolution) -> Result<f64> {
    let x = sol.x()?;
    sol.check_shape(p)?;
    let mut worst = 0.0f64;
    for (a, &b) in p.constraints().iter().zip(p.b()) {
        worst = worst.max((linalg::trace_inner(a, x)? - b).abs());
    }
    Ok(worst)
}

/// `‖C − Σ yᵢAᵢ − S‖∞` (largest absolute entry).
pub fn sdo_dual_residual(p: &SdoProblem, sol: &SdoSolution) -> Result<f64> {
    let y = sol.y()?;
    let s = sol.s()?;
    sol.check_shape(p)?;
    let mut r = p.c().sub(s)?;
    for (a, &yi) in p.constraints().iter().zip(y) {
        if yi != 0.0 {
            r.axpy(-yi, a)?;
        }
    }
    Ok(r.max_abs())
}

/// `Tr(CX) − bᵀy`.
pub fn sdo_gap(p: &SdoProblem, sol: &SdoSolution) -> Result<f64> {
    let x = sol.x()?;
    let y = sol.y()?;
    sol.check_shape(p)?;
    Ok(linalg::trace_inner(p.c(), x)? - linalg::dot(p.b(), y))
}

pub fn sdo_primal_objective(p: &SdoProblem, x: &SymMatrix) -> Result<f64> {
    linalg::trace_inner(p.c(), x)
}
