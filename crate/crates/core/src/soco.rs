//! Second-order conic problems, Lorentz-cone geometry and the arrow-head
//! operators.
//!
//! Multi-block vectors are always carried as explicit block lists; nothing in
//! this module flattens them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};

/// `min Σ cⁱᵀxⁱ  s.t.  Σ Aⁱxⁱ = b,  xⁱ ∈ L^{nᵢ}` and its dual.
#[derive(Clone, Debug, PartialEq)]
pub struct SocoProblem {
    cone_dims: Vec<usize>,
    /// One `m × nᵢ` matrix per cone, stored as rows.
    a_blocks: Vec<Vec<Vec<f64>>>,
    c_blocks: Vec<Vec<f64>>,
    b: Vec<f64>,
}

impl SocoProblem {
    pub fn new(
        cone_dims: Vec<usize>,
        a_blocks: Vec<Vec<Vec<f64>>>,
        c_blocks: Vec<Vec<f64>>,
        b: Vec<f64>,
    ) -> Result<Self> {
        if cone_dims.is_empty() {
            return Err(Error::Shape("at least one cone is required".into()));
        }
        if let Some(i) = cone_dims.iter().position(|&n| n == 0) {
            return Err(Error::Shape(format!("cone {i} has dimension 0")));
        }
        let m = b.len();
        if m == 0 {
            return Err(Error::Shape("at least one constraint row is required".into()));
        }
        if a_blocks.len() != cone_dims.len() || c_blocks.len() != cone_dims.len() {
            return Err(Error::Shape(format!(
                "{} cones but {} A blocks and {} c blocks",
                cone_dims.len(),
                a_blocks.len(),
                c_blocks.len()
            )));
        }
        for (i, &n) in cone_dims.iter().enumerate() {
            if a_blocks[i].len() != m {
                return Err(Error::Shape(format!(
                    "A block {i} has {} rows, expected {m}",
                    a_blocks[i].len()
                )));
            }
            if let Some(r) = a_blocks[i].iter().position(|row| row.len() != n) {
                return Err(Error::Shape(format!(
                    "A block {i} row {r} has {} columns, expected {n}",
                    a_blocks[i][r].len()
                )));
            }
            if c_blocks[i].len() != n {
                return Err(Error::Shape(format!(
                    "c block {i} has length {}, expected {n}",
                    c_blocks[i].len()
                )));
            }
        }
        Ok(SocoProblem {
            cone_dims,
            a_blocks,
            c_blocks,
            b,
        })
    }

    pub fn cone_dims(&self) -> &[usize] {
        &self.cone_dims
    }

    pub fn num_cones(&self) -> usize {
        self.cone_dims.len()
    }

    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    /// `n̄ = Σ nᵢ`.
    pub fn total_dim(&self) -> usize {
        self.cone_dims.iter().sum()
    }

    /// Zero-based offset of each cone's first coordinate in the stacked vector.
    pub fn offsets(&self) -> Vec<usize> {
        block_offsets(&self.cone_dims)
    }

    pub fn a_block(&self, cone: usize) -> &[Vec<f64>] {
        &self.a_blocks[cone]
    }

    pub fn a_blocks(&self) -> &[Vec<Vec<f64>>] {
        &self.a_blocks
    }

    pub fn c_block(&self, cone: usize) -> &[f64] {
        &self.c_blocks[cone]
    }

    pub fn c_blocks(&self) -> &[Vec<f64>] {
        &self.c_blocks
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Row `j` of block `Aⁱ`.
    pub fn a_row(&self, cone: usize, row: usize) -> &[f64] {
        &self.a_blocks[cone][row]
    }

    /// `(Aⁱ)ᵀ y` for one cone.
    pub fn a_transpose_times(&self, cone: usize, y: &[f64]) -> Vec<f64> {
        let n = self.cone_dims[cone];
        let mut out = vec![0.0; n];
        for (row, &yj) in self.a_blocks[cone].iter().zip(y) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += a * yj;
            }
        }
        out
    }

    /// `cⁱ - (Aⁱ)ᵀ y` for every cone.
    pub fn dual_slack(&self, y: &[f64]) -> Result<Vec<Vec<f64>>> {
        if y.len() != self.num_rows() {
            return Err(Error::DimensionMismatch {
                context: "dual_slack",
                expected: self.num_rows(),
                found: y.len(),
            });
        }
        Ok((0..self.num_cones())
            .map(|i| {
                let aty = self.a_transpose_times(i, y);
                self.c_blocks[i].iter().zip(aty).map(|(c, a)| c - a).collect()
            })
            .collect())
    }

    pub fn with_b(&self, b: Vec<f64>) -> Result<Self> {
        Self::new(
            self.cone_dims.clone(),
            self.a_blocks.clone(),
            self.c_blocks.clone(),
            b,
        )
    }

    pub fn with_c(&self, c_blocks: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(
            self.cone_dims.clone(),
            self.a_blocks.clone(),
            c_blocks,
            self.b.clone(),
        )
    }
}

pub(crate) fn block_offsets(dims: &[usize]) -> Vec<usize> {
    dims.iter()
        .scan(0, |acc, &n| {
            let start = *acc;
            *acc += n;
            Some(start)
        })
        .collect()
}

/// Primal blocks, dual vector and dual slack blocks; any part may be absent.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SocoSolution {
    #[serde(rename = "x", default, skip_serializing_if = "Option::is_none")]
    pub x_blocks: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(rename = "s", default, skip_serializing_if = "Option::is_none")]
    pub s_blocks: Option<Vec<Vec<f64>>>,
}

impl SocoSolution {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<f64>, s: Vec<Vec<f64>>) -> Self {
        SocoSolution {
            x_blocks: Some(x),
            y: Some(y),
            s_blocks: Some(s),
        }
    }

    pub fn x(&self) -> Result<&[Vec<f64>]> {
        self.x_blocks.as_deref().ok_or(Error::MissingPart("x"))
    }

    pub fn y(&self) -> Result<&[f64]> {
        self.y.as_deref().ok_or(Error::MissingPart("y"))
    }

    pub fn s(&self) -> Result<&[Vec<f64>]> {
        self.s_blocks.as_deref().ok_or(Error::MissingPart("s"))
    }

    /// Checks that every present part matches the problem's shape.
    pub fn check_shape(&self, p: &SocoProblem) -> Result<()> {
        let check_blocks = |name: &str, blocks: &Option<Vec<Vec<f64>>>| -> Result<()> {
            if let Some(blocks) = blocks {
                if blocks.len() != p.num_cones() {
                    return Err(Error::Shape(format!(
                        "{name} has {} blocks, expected {}",
                        blocks.len(),
                        p.num_cones()
                    )));
                }
                for (i, (blk, &n)) in blocks.iter().zip(p.cone_dims()).enumerate() {
                    if blk.len() != n {
                        return Err(Error::Shape(format!(
                            "{name} block {i} has length {}, expected {n}",
                            blk.len()
                        )));
                    }
                }
            }
            Ok(())
        };
        check_blocks("x", &self.x_blocks)?;
        check_blocks("s", &self.s_blocks)?;
        if let Some(y) = &self.y {
            if y.len() != p.num_rows() {
                return Err(Error::Shape(format!(
                    "y has length {}, expected {}",
                    y.len(),
                    p.num_rows()
                )));
            }
        }
        Ok(())
    }
}

/// Where a vector sits relative to the Lorentz cone.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConePosition {
    Zero,
    BoundaryNonzero,
    Interior,
    Outside,
}

impl ConePosition {
    pub fn in_cone(self) -> bool {
        !matches!(self, ConePosition::Outside)
    }
}

/// `‖v_{2:n}‖₂`, zero for `n = 1`.
pub fn tail_norm(v: &[f64]) -> f64 {
    linalg::norm2(&v[1..])
}

/// Classifies `v`. The boundary band is `tol * (1 + ‖v‖∞)` wide.
pub fn cone_position(v: &[f64], tol: f64) -> ConePosition {
    let inf = linalg::max_abs(v);
    if inf <= tol {
        return ConePosition::Zero;
    }
    let gap = v[0] - tail_norm(v);
    let band = tol * (1.0 + inf);
    if gap > band {
        ConePosition::Interior
    } else if gap.abs() <= band && v[0] > tol {
        ConePosition::BoundaryNonzero
    } else {
        ConePosition::Outside
    }
}

/// Arrow-head matrix: `v₁` on the diagonal, `v_{2:n}` along the first row
/// and column.
pub fn arw(v: &[f64]) -> SymMatrix {
    assert!(!v.is_empty(), "arw of an empty vector");
    let mut m = SymMatrix::zeros(v.len());
    for i in 0..v.len() {
        m.set(i, i, v[0]);
    }
    for (j, &vj) in v.iter().enumerate().skip(1) {
        m.set(0, j, vj);
    }
    m
}

/// Inverse of [`arw`], after checking the arrow-head pattern within `tol`.
pub fn arw_inv(m: &SymMatrix, tol: f64) -> Result<Vec<f64>> {
    let n = m.dim();
    let lead = m.get(0, 0);
    let mut worst: Option<(usize, usize, f64)> = None;
    let mut note = |i: usize, j: usize, dev: f64| {
        if dev > tol && worst.map_or(true, |(_, _, w)| dev > w) {
            worst = Some((i, j, dev));
        }
    };
    for i in 1..n {
        note(i, i, (m.get(i, i) - lead).abs());
        for j in (i + 1)..n {
            note(i, j, m.get(i, j).abs());
        }
    }
    if let Some((row, col, deviation)) = worst {
        return Err(Error::NotArrowHead {
            row,
            col,
            deviation,
        });
    }
    Ok((0..n).map(|j| m.get(0, j)).collect())
}

/// Block-diagonal matrix of arrow-heads.
pub fn darw(vs: &[Vec<f64>]) -> SymMatrix {
    let blocks: Vec<SymMatrix> = vs.iter().map(|v| arw(v)).collect();
    SymMatrix::block_diag(&blocks)
}

/// `x ∘ s = (xᵀs; x₁ s_{2:n} + s₁ x_{2:n})`.
pub fn jordan_product(x: &[f64], s: &[f64]) -> Result<Vec<f64>> {
    if x.len() != s.len() || x.is_empty() {
        return Err(Error::DimensionMismatch {
            context: "jordan_product",
            expected: x.len(),
            found: s.len(),
        });
    }
    let mut out = Vec::with_capacity(x.len());
    out.push(linalg::dot(x, s));
    for j in 1..x.len() {
        out.push(x[0] * s[j] + s[0] * x[j]);
    }
    Ok(out)
}

/// Block-wise Jordan product, concatenated.
pub fn jordan_product_blocks(x: &[Vec<f64>], s: &[Vec<f64>]) -> Result<Vec<f64>> {
    if x.len() != s.len() {
        return Err(Error::DimensionMismatch {
            context: "jordan_product_blocks",
            expected: x.len(),
            found: s.len(),
        });
    }
    let mut out = Vec::new();
    for (xi, si) in x.iter().zip(s) {
        out.extend(jordan_product(xi, si)?);
    }
    Ok(out)
}

/// `‖Σ Aⁱxⁱ − b‖∞`.
pub fn primal_residual(p: &SocoProblem, sol: &SocoSolution) -> Result<f64> {
    let x = sol.x()?;
    sol.check_shape(p)?;
    let mut r: Vec<f64> = p.b().iter().map(|b| -b).collect();
    for (i, xi) in x.iter().enumerate() {
        for (rj, row) in r.iter_mut().zip(p.a_block(i)) {
            *rj += linalg::dot(row, xi);
        }
    }
    Ok(linalg::max_abs(&r))
}

/// `maxᵢ ‖(Aⁱ)ᵀy + sⁱ − cⁱ‖∞`.
pub fn dual_residual(p: &SocoProblem, sol: &SocoSolution) -> Result<f64> {
    let y = sol.y()?;
    let s = sol.s()?;
    sol.check_shape(p)?;
    let slack = p.dual_slack(y)?;
    Ok(slack
        .iter()
        .zip(s)
        .flat_map(|(expected, si)| expected.iter().zip(si).map(|(e, v)| (e - v).abs()))
        .fold(0.0, f64::max))
}

/// `cᵀx − bᵀy`.
pub fn duality_gap(p: &SocoProblem, sol: &SocoSolution) -> Result<f64> {
    let x = sol.x()?;
    let y = sol.y()?;
    sol.check_shape(p)?;
    Ok(primal_objective(p, x) - linalg::dot(p.b(), y))
}

pub fn primal_objective(p: &SocoProblem, x: &[Vec<f64>]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, xi)| linalg::dot(p.c_block(i), xi))
        .sum()
}
