//! Primal-side embedding: `X = DArw(x̄)` is enforced by extra linear rows,
//! and the dual slack becomes a PSD matrix reproducing `s̄` through its
//! block traces and first rows.

use crate::embed_dual::{self, darw_inv, map_blocks, trace_first_row, RankSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::sdo::{DualSplit, EmbeddingMeta, Provenance, SdoProblem, SdoSolution, Side};
use crate::soco::{self, block_offsets, SocoProblem, SocoSolution};

/// Index sets of the extra rows, all 0-based in the embedded coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuralIndex {
    /// Upper-triangle pairs `(h, l)` forced to zero, lexicographic.
    pub zero_pairs: Vec<(usize, usize)>,
    /// Non-leading diagonal positions tied to their block's leading entry.
    pub tied_diagonals: Vec<usize>,
    /// Owning cone of every coordinate.
    pub cone_of: Vec<usize>,
    offsets: Vec<usize>,
}

impl StructuralIndex {
    pub fn new(cone_dims: &[usize]) -> Self {
        let offsets = block_offsets(cone_dims);
        let mut cone_of = Vec::new();
        for (i, &n) in cone_dims.iter().enumerate() {
            cone_of.extend(std::iter::repeat(i).take(n));
        }
        let total = cone_of.len();
        let mut zero_pairs = Vec::new();
        for h in 0..total {
            let lead = offsets[cone_of[h]];
            for l in (h + 1)..total {
                let same_block = cone_of[l] == cone_of[h];
                if !same_block || h != lead {
                    zero_pairs.push((h, l));
                }
            }
        }
        let tied_diagonals = (0..total).filter(|&k| k != offsets[cone_of[k]]).collect();
        StructuralIndex {
            zero_pairs,
            tied_diagonals,
            cone_of,
            offsets,
        }
    }

    /// Leading coordinate of the block containing `k`.
    pub fn lead(&self, k: usize) -> usize {
        self.offsets[self.cone_of[k]]
    }

    pub fn num_extra_rows(&self) -> usize {
        self.zero_pairs.len() + self.tied_diagonals.len()
    }
}

/// `Arw(v₁/n, v₂/2, …, vₙ/2)`.
fn scaled_arw(v: &[f64]) -> SymMatrix {
    let n = v.len();
    let mut w = Vec::with_capacity(n);
    w.push(v[0] / n as f64);
    w.extend(v[1..].iter().map(|x| 0.5 * x));
    soco::arw(&w)
}

fn scaled_darw(blocks: &[&[f64]]) -> SymMatrix {
    let mats: Vec<SymMatrix> = blocks.iter().map(|v| scaled_arw(v)).collect();
    SymMatrix::block_diag(&mats)
}

pub fn build_primal_embedding(p: &SocoProblem) -> SdoProblem {
    let st = StructuralIndex::new(p.cone_dims());
    let n = p.total_dim();
    let c_refs: Vec<&[f64]> = p.c_blocks().iter().map(|v| v.as_slice()).collect();
    let c = scaled_darw(&c_refs);

    let mut constraints = Vec::with_capacity(p.num_rows() + st.num_extra_rows());
    for j in 0..p.num_rows() {
        let rows: Vec<&[f64]> = (0..p.num_cones()).map(|i| p.a_row(i, j)).collect();
        constraints.push(scaled_darw(&rows));
    }
    for &(h, l) in &st.zero_pairs {
        let mut a = SymMatrix::zeros(n);
        a.set(h, l, 1.0);
        constraints.push(a);
    }
    for &k in &st.tied_diagonals {
        let mut a = SymMatrix::zeros(n);
        let lead = st.lead(k);
        a.set(lead, lead, 1.0);
        a.set(k, k, -1.0);
        constraints.push(a);
    }
    let mut b = p.b().to_vec();
    b.resize(constraints.len(), 0.0);

    let meta = EmbeddingMeta {
        side: Side::Primal,
        cone_dims: p.cone_dims().to_vec(),
        num_original_rows: p.num_rows(),
        structure: Some(st),
    };
    SdoProblem::new(c, constraints, b, Provenance::Embedding(meta))
        .expect("primal embedding shapes are consistent by construction")
}

/// Rank-one slack map `ηηᵀ`; the same construction as the dual-side `dmr1`.
pub fn pmr1(s: &[f64], tol: f64) -> Result<SymMatrix> {
    embed_dual::dmr1(s, tol)
}

/// `(u, w)` for one block: `u_k = S(k,k) − s₁/n` for `k ≥ 1` and
/// `w_hl = −S(h,l)` for `1 ≤ h < l`, in lexicographic order.
pub fn recover_uw(s_block: &SymMatrix, s: &[f64], tol: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = s.len();
    if s_block.dim() != n {
        return Err(Error::DimensionMismatch {
            context: "recover_uw block order",
            expected: n,
            found: s_block.dim(),
        });
    }
    check_template(s_block, s, 0, tol)?;
    let u = (1..n).map(|k| s_block.get(k, k) - s[0] / n as f64).collect();
    let mut w = Vec::new();
    for h in 1..n {
        for l in (h + 1)..n {
            w.push(-s_block.get(h, l));
        }
    }
    Ok((u, w))
}

fn check_template(m: &SymMatrix, s: &[f64], offset: usize, tol: f64) -> Result<()> {
    let n = s.len();
    let band = tol * (1.0 + linalg::max_abs(s));
    let trace_dev = ((0..n).map(|k| m.get(offset + k, offset + k)).sum::<f64>() - s[0]).abs();
    if trace_dev > band {
        return Err(Error::TemplateViolation {
            row: offset,
            col: offset,
            deviation: trace_dev,
        });
    }
    for (j, &sj) in s.iter().enumerate().skip(1) {
        let dev = (m.get(offset, offset + j) - 0.5 * sj).abs();
        if dev > band {
            return Err(Error::TemplateViolation {
                row: offset,
                col: offset + j,
                deviation: dev,
            });
        }
    }
    Ok(())
}

/// Multipliers of the extra rows read off a templated slack.
fn split_from_slack(
    st: &StructuralIndex,
    cone_dims: &[usize],
    s_mat: &SymMatrix,
    s_blocks: &[Vec<f64>],
    v: Vec<f64>,
    tol: f64,
) -> Result<DualSplit> {
    let offsets = block_offsets(cone_dims);
    for (i, s) in s_blocks.iter().enumerate() {
        check_template(s_mat, s, offsets[i], tol)?;
    }
    let w = st
        .zero_pairs
        .iter()
        .map(|&(h, l)| ((h, l), -s_mat.get(h, l)))
        .collect();
    let u = st
        .tied_diagonals
        .iter()
        .map(|&k| {
            let cone = st.cone_of[k];
            (k, s_mat.get(k, k) - s_blocks[cone][0] / cone_dims[cone] as f64)
        })
        .collect();
    Ok(DualSplit { v, w, u })
}

/// Forward map. `spec` selects the per-cone construction of the slack.
/// When `s̄` is absent but `ȳ` is present, `s̄ = c − Aᵀȳ` is used.
pub fn map_solution_primal(
    p: &SocoProblem,
    sol: &SocoSolution,
    spec: &RankSpec,
    tol: f64,
) -> Result<SdoSolution> {
    sol.check_shape(p)?;
    let x = sol.x_blocks.as_deref().map(soco::darw);
    let s_blocks = match (&sol.s_blocks, &sol.y) {
        (Some(s), _) => Some(s.clone()),
        (None, Some(y)) => Some(p.dual_slack(y)?),
        (None, None) => None,
    };
    let s = s_blocks
        .as_deref()
        .map(|s| map_blocks(s, spec, tol))
        .transpose()?;
    let (y, dual_split) = match (&sol.y, &s, &s_blocks) {
        (Some(ybar), Some(s_mat), Some(s_blocks)) => {
            let st = StructuralIndex::new(p.cone_dims());
            let split = split_from_slack(&st, p.cone_dims(), s_mat, s_blocks, ybar.clone(), tol)?;
            (Some(split.assemble()), Some(split))
        }
        _ => (None, None),
    };
    Ok(SdoSolution {
        x,
        y,
        s,
        dual_split,
    })
}

/// Inverse map. `s̄` comes from the block traces and first rows of `S`,
/// cross-checked against `c − Aᵀv` when `y` is present.
pub fn inverse_map_primal(
    p: &SocoProblem,
    meta: &EmbeddingMeta,
    sol: &SdoSolution,
    tol: f64,
) -> Result<SocoSolution> {
    if meta.side != Side::Primal {
        return Err(Error::ProvenanceMismatch(format!(
            "expected a primal-side embedding, got {}-side",
            meta.side.name()
        )));
    }
    if meta.cone_dims != p.cone_dims() || meta.num_original_rows != p.num_rows() {
        return Err(Error::ProvenanceMismatch(
            "cone dimensions or row count differ from the SOCO problem".into(),
        ));
    }
    let dims = p.cone_dims();
    let x_blocks = sol.x.as_ref().map(|x| darw_inv(x, dims, tol)).transpose()?;
    let v = match &sol.y {
        Some(y) => {
            let expected = p.num_rows() + meta.structure.as_ref().map_or(0, |s| s.num_extra_rows());
            if y.len() != expected {
                return Err(Error::Shape(format!(
                    "y has length {}, expected {expected}",
                    y.len()
                )));
            }
            Some(y[..p.num_rows()].to_vec())
        }
        None => None,
    };
    let from_v = v.as_deref().map(|v| p.dual_slack(v)).transpose()?;
    let s_blocks = match (&sol.s, from_v) {
        (Some(s), from_v) => {
            if s.dim() != p.total_dim() {
                return Err(Error::Shape(format!(
                    "S has order {}, expected {}",
                    s.dim(),
                    p.total_dim()
                )));
            }
            let recovered = trace_first_row(s, dims);
            if let Some(expected) = from_v {
                let mut deviation = 0.0f64;
                let mut scale = 0.0f64;
                for (a, b) in recovered.iter().flatten().zip(expected.iter().flatten()) {
                    deviation = deviation.max((a - b).abs());
                    scale = scale.max(b.abs());
                }
                if deviation > tol * (1.0 + scale) {
                    return Err(Error::InconsistentDual { deviation });
                }
            }
            Some(recovered)
        }
        (None, from_v) => from_v,
    };
    Ok(SocoSolution {
        x_blocks,
        y: v,
        s_blocks,
    })
}
