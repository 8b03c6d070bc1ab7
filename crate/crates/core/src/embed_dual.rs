//! Dual-side embedding: the dual slack keeps its arrow-head form and the
//! primal matrix is any PSD `X` whose per-block trace and first row reproduce
//! `x̄`.
//!
//! The per-cone constructions here (rank one, Sim–Zhao, rank `k`, full rank)
//! only depend on the two linear conditions `Σ diag = v₁` and
//! `M(1, j) = v_j / 2`, so the primal-side embedding reuses them for its
//! dual slack.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix, RANK_TOL};
use crate::sdo::{EmbeddingMeta, Provenance, SdoProblem, SdoSolution, Side};
use crate::soco::{self, cone_position, tail_norm, ConePosition, SocoProblem, SocoSolution};

/// Relative gap `v₁ − ‖v_{2:n}‖` under which a vector is treated as exactly on
/// the boundary by the maps. Much tighter than the classification band so
/// that snapping never costs more than rounding noise.
pub const BOUNDARY_SNAP: f64 = 1e-12;

/// Halvings of ε tried by [`frm`] before giving up.
pub const FRM_MAX_HALVINGS: usize = 40;

/// Per-cone choice of forward map.
#[derive(Clone, Debug, PartialEq)]
pub enum RankChoice {
    /// `ββᵀ`, rank one on every nonzero point.
    RankOne,
    /// The Sim–Zhao map: full rank on the interior, rank one on the boundary.
    SimZhao,
    /// Total rank `k`: the leading Sim–Zhao direction plus `k − 1` coordinate
    /// directions. `subset` holds those coordinates (0-based, each in
    /// `1..n`); `None` picks `1..k`.
    RankK { k: usize, subset: Option<Vec<usize>> },
    /// Full-rank mapping built by successive halving; `eps` defaults to
    /// `(v₁ − ‖v_{2:n}‖) / (2(n − 1))`.
    FullRank { eps: Option<f64> },
}

impl fmt::Display for RankChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RankChoice::RankOne => write!(f, "one"),
            RankChoice::SimZhao => write!(f, "simzhao"),
            RankChoice::RankK { k, .. } => write!(f, "k:{k}"),
            RankChoice::FullRank { .. } => write!(f, "full"),
        }
    }
}

/// Rank choice for every cone of a problem.
#[derive(Clone, Debug, PartialEq)]
pub enum RankSpec {
    Uniform(RankChoice),
    PerCone(Vec<RankChoice>),
}

impl RankSpec {
    pub fn choice_for(&self, cone: usize) -> Result<&RankChoice> {
        match self {
            RankSpec::Uniform(c) => Ok(c),
            RankSpec::PerCone(cs) => cs.get(cone).ok_or_else(|| {
                Error::InvalidArgument(format!("rank spec has no entry for cone {cone}"))
            }),
        }
    }

    fn check_len(&self, cones: usize) -> Result<()> {
        if let RankSpec::PerCone(cs) = self {
            if cs.len() != cones {
                return Err(Error::InvalidArgument(format!(
                    "rank spec lists {} cones, problem has {cones}",
                    cs.len()
                )));
            }
        }
        Ok(())
    }
}

impl FromStr for RankSpec {
    type Err = Error;

    /// `one`, `simzhao`, `full`, `k:<k>` or `k:<k1>,<k2>,...` (one per cone).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one" => Ok(RankSpec::Uniform(RankChoice::RankOne)),
            "simzhao" => Ok(RankSpec::Uniform(RankChoice::SimZhao)),
            "full" => Ok(RankSpec::Uniform(RankChoice::FullRank { eps: None })),
            _ => {
                let list = s.strip_prefix("k:").ok_or_else(|| {
                    Error::InvalidArgument(format!(
                        "rank must be one|simzhao|full|k:<k>[,<k>...], got `{s}`"
                    ))
                })?;
                let ks = list
                    .split(',')
                    .map(|t| {
                        t.trim().parse::<usize>().map_err(|_| {
                            Error::InvalidArgument(format!("bad rank `{t}` in `{s}`"))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let choices: Vec<RankChoice> = ks
                    .into_iter()
                    .map(|k| RankChoice::RankK { k, subset: None })
                    .collect();
                if choices.len() == 1 {
                    Ok(RankSpec::Uniform(choices.into_iter().next().unwrap()))
                } else {
                    Ok(RankSpec::PerCone(choices))
                }
            }
        }
    }
}

fn is_snapped_boundary(v: &[f64]) -> bool {
    v[0] - tail_norm(v) <= BOUNDARY_SNAP * (1.0 + linalg::max_abs(v))
}

fn require_in_cone(v: &[f64], tol: f64) -> Result<ConePosition> {
    let pos = cone_position(v, tol);
    if pos == ConePosition::Outside {
        return Err(Error::OutsideCone);
    }
    Ok(pos)
}

/// `δ = √(v₁² − ‖v_{2:n}‖²)`, snapped to zero on the boundary.
fn rank_one_delta(v: &[f64]) -> f64 {
    if is_snapped_boundary(v) {
        return 0.0;
    }
    let t = tail_norm(v);
    ((v[0] - t) * (v[0] + t)).max(0.0).sqrt()
}

/// `β = (v₁ + δ, v_{2:n}) / √(2(v₁ + δ))` with `δ = √(v₁² − ‖v_{2:n}‖²)`;
/// `None` for the zero vector.
fn rank_one_factor(v: &[f64]) -> Option<Vec<f64>> {
    let lead = v[0] + rank_one_delta(v);
    if lead <= 0.0 {
        return None;
    }
    let scale = 1.0 / (2.0 * lead).sqrt();
    let mut beta = Vec::with_capacity(v.len());
    beta.push(lead * scale);
    beta.extend(v[1..].iter().map(|x| x * scale));
    Some(beta)
}

/// Rank-one map `ββᵀ`; zero matrix for `v = 0`.
pub fn dmr1(x: &[f64], tol: f64) -> Result<SymMatrix> {
    require_in_cone(x, tol)?;
    let n = x.len();
    let lead = x[0] + rank_one_delta(x);
    if lead <= 0.0 {
        return Ok(SymMatrix::zeros(n));
    }
    // entries of ββᵀ formed directly, which keeps the first row exact
    Ok(SymMatrix::from_fn(n, |i, j| match (i, j) {
        (0, 0) => 0.5 * lead,
        (0, k) | (k, 0) => 0.5 * x[k],
        (a, b) => x[a] * x[b] / (2.0 * lead),
    }))
}

/// `θ = v₁ + ‖t‖ + √((v₁ + ‖t‖)² − 4‖t‖²)` and the leading direction
/// `ν¹ = (θ/2, v_{2:n}) / √θ`, shared by the Sim–Zhao and rank-`k` maps.
fn leading_direction(v: &[f64]) -> Option<Vec<f64>> {
    let t = tail_norm(v);
    let disc = ((v[0] - t) * (v[0] + 3.0 * t)).max(0.0);
    let theta = v[0] + t + disc.sqrt();
    if theta <= 0.0 {
        return None;
    }
    let scale = 1.0 / theta.sqrt();
    let mut nu = Vec::with_capacity(v.len());
    nu.push(0.5 * theta * scale);
    nu.extend(v[1..].iter().map(|x| x * scale));
    Some(nu)
}

/// Sum of `ν¹ν¹ᵀ` and `c · e_j e_jᵀ` over `directions`, where
/// `c = (v₁ − ‖t‖) / (2 · |directions|)`.
fn leading_plus_coordinates(v: &[f64], directions: &[usize]) -> SymMatrix {
    let n = v.len();
    let Some(nu) = leading_direction(v) else {
        return SymMatrix::zeros(n);
    };
    let mut m = SymMatrix::outer(&nu);
    if !directions.is_empty() {
        let c = (v[0] - tail_norm(v)) / (2.0 * directions.len() as f64);
        for &j in directions {
            m.add_to(j, j, c);
        }
    }
    m
}

/// Sim–Zhao map. Equals [`dmr1`] on the boundary.
pub fn mr_simzhao(x: &[f64], tol: f64) -> Result<SymMatrix> {
    require_in_cone(x, tol)?;
    if x.len() == 1 || is_snapped_boundary(x) {
        return dmr1(x, tol);
    }
    let directions: Vec<usize> = (1..x.len()).collect();
    Ok(leading_plus_coordinates(x, &directions))
}

/// Rank-`k` map with `subset` as the `k − 1` extra coordinate directions.
pub fn mr_rank_k(x: &[f64], k: usize, subset: Option<&[usize]>, tol: f64) -> Result<SymMatrix> {
    let n = x.len();
    if k == 0 || k > n {
        return Err(Error::BadSubset(format!("rank {k} is outside 1..={n}")));
    }
    let directions: Vec<usize> = match subset {
        Some(s) => s.to_vec(),
        None => (1..k).collect(),
    };
    if directions.len() != k - 1 {
        return Err(Error::BadSubset(format!(
            "rank {k} needs {} extra directions, got {}",
            k - 1,
            directions.len()
        )));
    }
    let mut seen = vec![false; n];
    for &j in &directions {
        if j == 0 || j >= n {
            return Err(Error::BadSubset(format!("direction {j} is outside 1..{n}")));
        }
        if std::mem::replace(&mut seen[j], true) {
            return Err(Error::BadSubset(format!("direction {j} repeated")));
        }
    }

    let pos = require_in_cone(x, tol)?;
    if k == 1 {
        if pos == ConePosition::Interior && n > 1 {
            return Err(Error::BadSubset(
                "rank 1 of the Sim–Zhao family is only defined on the boundary".into(),
            ));
        }
        return dmr1(x, tol);
    }
    if pos != ConePosition::Interior {
        return Err(Error::NotInterior);
    }
    Ok(leading_plus_coordinates(x, &directions))
}

fn frm_attempt(x: &[f64], eps: f64) -> Option<Vec<Vec<f64>>> {
    let n = x.len();
    let mut pi = x.to_vec();
    let mut betas = Vec::with_capacity(n);
    let in_interior = |v: &[f64]| v[0] > 0.0 && v[0] > tail_norm(v);
    for k in 0..n.saturating_sub(1) {
        let mut tau: Vec<f64> = pi.iter().map(|p| 0.5 * p).collect();
        if pi[k + 1] >= 0.0 {
            tau[k + 1] += eps;
        } else {
            tau[k + 1] -= eps;
        }
        if !in_interior(&tau) {
            return None;
        }
        betas.push(rank_one_factor(&tau)?);
        for (p, t) in pi.iter_mut().zip(&tau) {
            *p -= t;
        }
    }
    if !in_interior(&pi) {
        return None;
    }
    betas.push(rank_one_factor(&pi)?);
    Some(betas)
}

fn gram_sum(n: usize, betas: &[Vec<f64>]) -> SymMatrix {
    let mut m = SymMatrix::zeros(n);
    for b in betas {
        m.axpy(1.0, &SymMatrix::outer(b)).expect("factor length");
    }
    m
}

/// Trace and first-row conditions of a per-cone map, largest violation.
pub fn block_condition_violation(m: &SymMatrix, v: &[f64]) -> f64 {
    let mut worst = (m.trace() - v[0]).abs();
    for (j, &vj) in v.iter().enumerate().skip(1) {
        worst = worst.max((m.get(0, j) - 0.5 * vj).abs());
    }
    worst
}

/// Full-rank mapping: `n` factors whose Gram sum satisfies the block
/// conditions and has rank `n`. Retries with halved ε until the result
/// checks out.
pub fn frm(x: &[f64], eps: Option<f64>, tol: f64) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    if cone_position(x, tol) != ConePosition::Interior {
        return Err(Error::NotInterior);
    }
    let mut eps = match eps {
        Some(e) => e,
        None if n > 1 => (x[0] - tail_norm(x)) / (2.0 * (n - 1) as f64),
        None => 0.0,
    };
    let check_tol = tol * (1.0 + linalg::max_abs(x));
    for _ in 0..=FRM_MAX_HALVINGS {
        if let Some(betas) = frm_attempt(x, eps) {
            let m = gram_sum(n, &betas);
            let ok = block_condition_violation(&m, x) <= check_tol
                && linalg::psd_status(&m, tol)?.is_psd()
                && linalg::numeric_rank(&m, RANK_TOL)? == n;
            if ok {
                return Ok(betas);
            }
        }
        eps *= 0.5;
    }
    Err(Error::EpsilonInvalid { eps })
}

/// Applies one rank choice to one cone vector.
pub fn map_cone(v: &[f64], choice: &RankChoice, tol: f64) -> Result<SymMatrix> {
    if v.len() == 1 {
        // every family collapses to [v₁] on the nonnegative ray
        if let RankChoice::RankK { k, .. } = choice {
            if *k != 1 {
                return Err(Error::BadSubset(format!("rank {k} on a 1-dimensional cone")));
            }
        }
        return dmr1(v, tol);
    }
    match choice {
        RankChoice::RankOne => dmr1(v, tol),
        RankChoice::SimZhao => mr_simzhao(v, tol),
        RankChoice::RankK { k, subset } => mr_rank_k(v, *k, subset.as_deref(), tol),
        RankChoice::FullRank { eps } => {
            let betas = frm(v, *eps, tol)?;
            Ok(gram_sum(v.len(), &betas))
        }
    }
}

/// Whether `choice` attains the maximal admissible rank for a vector at `pos`.
pub fn is_proper_choice(choice: &RankChoice, pos: ConePosition, n: usize) -> bool {
    if n == 1 || pos != ConePosition::Interior {
        return true;
    }
    match choice {
        RankChoice::RankOne => false,
        RankChoice::SimZhao | RankChoice::FullRank { .. } => true,
        RankChoice::RankK { k, .. } => *k == n,
    }
}

/// `C̃ = DArw(c¹, …, cʳ)`, `Ãⱼ = DArw(A¹ⱼ, …, Aʳⱼ)`, `b` unchanged.
pub fn build_dual_embedding(p: &SocoProblem) -> SdoProblem {
    let c = soco::darw(p.c_blocks());
    let constraints = (0..p.num_rows())
        .map(|j| {
            let rows: Vec<Vec<f64>> = (0..p.num_cones()).map(|i| p.a_row(i, j).to_vec()).collect();
            soco::darw(&rows)
        })
        .collect();
    let meta = EmbeddingMeta {
        side: Side::Dual,
        cone_dims: p.cone_dims().to_vec(),
        num_original_rows: p.num_rows(),
        structure: None,
    };
    SdoProblem::new(c, constraints, p.b().to_vec(), Provenance::Embedding(meta))
        .expect("dual embedding shapes are consistent by construction")
}

/// Block-diagonal assembly of per-cone maps.
pub(crate) fn map_blocks(blocks: &[Vec<f64>], spec: &RankSpec, tol: f64) -> Result<SymMatrix> {
    spec.check_len(blocks.len())?;
    let mapped = blocks
        .iter()
        .enumerate()
        .map(|(i, v)| map_cone(v, spec.choice_for(i)?, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(SymMatrix::block_diag(&mapped))
}

/// Forward map `(x̄, ȳ, s̄) ↦ (X̃, ỹ, S̃)`. Cross-cone blocks of `X̃` are zero.
pub fn map_solution_dual(
    p: &SocoProblem,
    sol: &SocoSolution,
    spec: &RankSpec,
    tol: f64,
) -> Result<SdoSolution> {
    sol.check_shape(p)?;
    let x = sol
        .x_blocks
        .as_deref()
        .map(|x| map_blocks(x, spec, tol))
        .transpose()?;
    Ok(SdoSolution {
        x,
        y: sol.y.clone(),
        s: sol.s_blocks.as_deref().map(soco::darw),
        dual_split: None,
    })
}

fn check_side(meta: &EmbeddingMeta, side: Side) -> Result<()> {
    if meta.side != side {
        return Err(Error::ProvenanceMismatch(format!(
            "expected a {}-side embedding, got {}-side",
            side.name(),
            meta.side.name()
        )));
    }
    Ok(())
}

/// Largest off-block entry of a matrix partitioned by `dims`.
pub(crate) fn off_block_violation(m: &SymMatrix, dims: &[usize]) -> Option<(usize, usize, f64)> {
    let offsets = soco::block_offsets(dims);
    let mut cone_of = Vec::with_capacity(m.dim());
    for (i, &n) in dims.iter().enumerate() {
        cone_of.extend(std::iter::repeat(i).take(n));
    }
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..m.dim() {
        for j in (offsets[cone_of[i]] + dims[cone_of[i]])..m.dim() {
            let v = m.get(i, j).abs();
            if worst.map_or(v > 0.0, |(_, _, w)| v > w) {
                worst = Some((i, j, v));
            }
        }
    }
    worst
}

/// Reads arrow-head blocks back off a block-diagonal matrix.
pub(crate) fn darw_inv(m: &SymMatrix, dims: &[usize], tol: f64) -> Result<Vec<Vec<f64>>> {
    let scale = 1.0 + m.max_abs();
    if let Some((row, col, deviation)) = off_block_violation(m, dims) {
        if deviation > tol * scale {
            return Err(Error::NotArrowHead { row, col, deviation });
        }
    }
    soco::block_offsets(dims)
        .iter()
        .zip(dims)
        .map(|(&off, &n)| {
            soco::arw_inv(&m.block(off, n), tol * scale).map_err(|e| match e {
                Error::NotArrowHead { row, col, deviation } => Error::NotArrowHead {
                    row: row + off,
                    col: col + off,
                    deviation,
                },
                other => other,
            })
        })
        .collect()
}

/// `(Σ diag, 2·first row)` of each diagonal block.
pub(crate) fn trace_first_row(m: &SymMatrix, dims: &[usize]) -> Vec<Vec<f64>> {
    soco::block_offsets(dims)
        .iter()
        .zip(dims)
        .map(|(&off, &n)| {
            let mut v = Vec::with_capacity(n);
            v.push((0..n).map(|j| m.get(off + j, off + j)).sum());
            v.extend((1..n).map(|j| 2.0 * m.get(off, off + j)));
            v
        })
        .collect()
}

/// Inverse map `(X̃, ỹ, S̃) ↦ (x̄, ȳ, s̄)`.
pub fn inverse_map_dual(meta: &EmbeddingMeta, sol: &SdoSolution, tol: f64) -> Result<SocoSolution> {
    check_side(meta, Side::Dual)?;
    let dims = &meta.cone_dims;
    let x_blocks = match &sol.x {
        Some(x) => {
            if x.dim() != meta.total_dim() {
                return Err(Error::Shape(format!(
                    "X has order {}, expected {}",
                    x.dim(),
                    meta.total_dim()
                )));
            }
            let lambda_min = linalg::min_eigenvalue(x, tol * 1e-3)?;
            if lambda_min < -tol * (1.0 + x.max_abs()) {
                return Err(Error::NotPsd {
                    min_eigenvalue: lambda_min,
                });
            }
            Some(trace_first_row(x, dims))
        }
        None => None,
    };
    let s_blocks = sol.s.as_ref().map(|s| darw_inv(s, dims, tol)).transpose()?;
    Ok(SocoSolution {
        x_blocks,
        y: sol.y.clone(),
        s_blocks,
    })
}
