//! Optimal partitions on both sides of an embedding.
//!
//! Labels are computed from a single supplied pair; whether that pair is
//! maximally complementary is the caller's assertion.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embed_dual::{is_proper_choice, RankSpec};
use crate::error::{Error, Result};
use crate::linalg::{self, EigenDecomposition, Matrix, SymMatrix, RANK_TOL};
use crate::sdo::Side;
use crate::soco::{cone_position, jordan_product, tail_norm, ConePosition, SocoProblem, SocoSolution};

/// Per-cone class of the SOCO optimal partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ConePartitionLabel {
    /// `x` interior, `s = 0`.
    B,
    /// `x = 0`, `s` interior.
    N,
    /// Both on the boundary, nonzero.
    R,
    /// Both zero.
    T1,
    /// `x` on the boundary, `s = 0`.
    T2,
    /// `x = 0`, `s` on the boundary.
    T3,
}

impl ConePartitionLabel {
    pub const ALL: [ConePartitionLabel; 6] = [
        ConePartitionLabel::B,
        ConePartitionLabel::N,
        ConePartitionLabel::R,
        ConePartitionLabel::T1,
        ConePartitionLabel::T2,
        ConePartitionLabel::T3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConePartitionLabel::B => "B",
            ConePartitionLabel::N => "N",
            ConePartitionLabel::R => "R",
            ConePartitionLabel::T1 => "T1",
            ConePartitionLabel::T2 => "T2",
            ConePartitionLabel::T3 => "T3",
        }
    }

    /// Whether a nonzero boundary vector is needed on some side.
    pub fn needs_boundary(self) -> bool {
        matches!(
            self,
            ConePartitionLabel::R | ConePartitionLabel::T2 | ConePartitionLabel::T3
        )
    }

    fn from_positions(x: ConePosition, s: ConePosition) -> Option<Self> {
        use ConePosition::*;
        Some(match (x, s) {
            (Interior, Zero) => ConePartitionLabel::B,
            (Zero, Interior) => ConePartitionLabel::N,
            (BoundaryNonzero, BoundaryNonzero) => ConePartitionLabel::R,
            (Zero, Zero) => ConePartitionLabel::T1,
            (BoundaryNonzero, Zero) => ConePartitionLabel::T2,
            (Zero, BoundaryNonzero) => ConePartitionLabel::T3,
            _ => return None,
        })
    }
}

impl fmt::Display for ConePartitionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConePartitionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|l| l.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::InvalidArgument(format!("label must be one of B,N,R,T1,T2,T3, got `{s}`"))
            })
    }
}

/// Orthonormal bases of `(B, N, T)`, each a list of column vectors.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SdoPartition {
    #[serde(rename = "B")]
    pub b_basis: Vec<Vec<f64>>,
    #[serde(rename = "N")]
    pub n_basis: Vec<Vec<f64>>,
    #[serde(rename = "T")]
    pub t_basis: Vec<Vec<f64>>,
}

impl SdoPartition {
    /// `(dim B, dim N, dim T)`.
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.b_basis.len(), self.n_basis.len(), self.t_basis.len())
    }

    /// Largest principal-angle sine over the three subspaces.
    pub fn distance(&self, other: &SdoPartition) -> f64 {
        linalg::subspace_distance(&self.b_basis, &other.b_basis)
            .max(linalg::subspace_distance(&self.n_basis, &other.n_basis))
            .max(linalg::subspace_distance(&self.t_basis, &other.t_basis))
    }
}

/// Eigenpairs of `Arw(v)` in closed form, ascending.
///
/// Eigenvalues are `v₁ − ‖t‖`, `v₁` (multiplicity `n − 2`) and `v₁ + ‖t‖`
/// for `t = v_{2:n}`. The extreme eigenvectors are `(1, ∓t/‖t‖)/√2`; the
/// middle ones span the complement of `t`. With `t = 0` the basis is the
/// standard one.
pub fn arrowhead_eigensystem(v: &[f64]) -> EigenDecomposition {
    let n = v.len();
    let t = tail_norm(v);
    if n == 1 || t == 0.0 {
        return EigenDecomposition {
            eigenvalues: vec![v[0]; n],
            eigenvectors: Matrix::identity(n),
        };
    }
    let dir: Vec<f64> = v[1..].iter().map(|x| x / t).collect();
    let complement = householder_complement(&dir);
    let r = std::f64::consts::FRAC_1_SQRT_2;

    let mut columns = Vec::with_capacity(n);
    let mut low = vec![r];
    low.extend(dir.iter().map(|d| -r * d));
    columns.push(low);
    for c in complement {
        let mut col = vec![0.0];
        col.extend(c);
        columns.push(col);
    }
    let mut high = vec![r];
    high.extend(dir.iter().map(|d| r * d));
    columns.push(high);

    let mut eigenvalues = vec![v[0]; n];
    eigenvalues[0] = v[0] - t;
    eigenvalues[n - 1] = v[0] + t;
    EigenDecomposition {
        eigenvalues,
        eigenvectors: Matrix::from_columns(n, &columns),
    }
}

/// Orthonormal basis of the complement of the unit vector `d`, from the
/// Householder reflector that maps `e₁` onto `±d`.
fn householder_complement(d: &[f64]) -> Vec<Vec<f64>> {
    let k = d.len();
    let sign = if d[0] >= 0.0 { 1.0 } else { -1.0 };
    let mut w = d.to_vec();
    w[0] += sign;
    let ww = linalg::dot(&w, &w);
    (1..k)
        .map(|j| {
            // column j of I − 2wwᵀ/(wᵀw)
            (0..k)
                .map(|i| f64::from(u8::from(i == j)) - 2.0 * w[i] * w[j] / ww)
                .collect()
        })
        .collect()
}

/// Labels from the positions of each `(x̄ⁱ, s̄ⁱ)`.
pub fn classify_cones(
    p: &SocoProblem,
    sol: &SocoSolution,
    tol: f64,
) -> Result<Vec<ConePartitionLabel>> {
    sol.check_shape(p)?;
    let x = sol.x()?;
    let s = sol.s()?;
    x.iter()
        .zip(s)
        .enumerate()
        .map(|(cone, (xi, si))| {
            let px = cone_position(xi, tol);
            let ps = cone_position(si, tol);
            if !px.in_cone() || !ps.in_cone() {
                return Err(Error::OutsideCone);
            }
            let inconsistent = Error::InconsistentPair { cone, x: px, s: ps };
            let jordan = linalg::max_abs(&jordan_product(xi, si)?);
            let scale = 1.0 + linalg::max_abs(xi) * linalg::max_abs(si);
            if jordan > tol * scale {
                return Err(inconsistent);
            }
            ConePartitionLabel::from_positions(px, ps).ok_or(inconsistent)
        })
        .collect()
}

/// Errors with `NotProper` on the first cone whose rank choice falls short
/// of the maximal rank for the vector that side maps.
pub fn check_proper(
    p: &SocoProblem,
    sol: &SocoSolution,
    side: Side,
    spec: &RankSpec,
    tol: f64,
) -> Result<()> {
    let mapped = match side {
        Side::Dual => sol.x()?,
        Side::Primal => sol.s()?,
    };
    for (cone, v) in mapped.iter().enumerate() {
        let pos = cone_position(v, tol);
        if !is_proper_choice(spec.choice_for(cone)?, pos, p.cone_dims()[cone]) {
            return Err(Error::NotProper { cone });
        }
    }
    Ok(())
}

#[derive(Clone, Copy)]
enum Dest {
    B,
    N,
    T,
}

/// Per-block routing: every column of `basis` goes to `dest(index)`.
struct Routed {
    basis: Matrix,
    route: Box<dyn Fn(usize) -> Dest>,
}

fn whole(n: usize, dest: Dest) -> Routed {
    Routed {
        basis: Matrix::identity(n),
        route: Box::new(move |_| dest),
    }
}

/// The first column (`lowest eigenvalue`) goes to `first`, the rest to `rest`.
fn split_low(v: &[f64], first: Dest, rest: Dest) -> Routed {
    Routed {
        basis: arrowhead_eigensystem(v).eigenvectors,
        route: Box::new(move |j| if j == 0 { first } else { rest }),
    }
}

/// The last column (`highest eigenvalue`) goes to `last`, the rest to `rest`.
fn split_high(v: &[f64], last: Dest, rest: Dest) -> Routed {
    let n = v.len();
    Routed {
        basis: arrowhead_eigensystem(v).eigenvectors,
        route: Box::new(move |j| if j + 1 == n { last } else { rest }),
    }
}

/// Table-driven `(B, N, T)` for the image of a labelled pair under a proper
/// map of `side`.
pub fn map_partition(
    p: &SocoProblem,
    sol: &SocoSolution,
    labels: &[ConePartitionLabel],
    side: Side,
    spec: &RankSpec,
    tol: f64,
) -> Result<SdoPartition> {
    let actual = classify_cones(p, sol, tol)?;
    if actual.len() != labels.len() {
        return Err(Error::LabelMismatch(format!(
            "{} labels for {} cones",
            labels.len(),
            actual.len()
        )));
    }
    if let Some((cone, (want, got))) = labels.iter().zip(&actual).enumerate().find(|(_, (a, b))| a != b) {
        return Err(Error::LabelMismatch(format!(
            "cone {cone} labelled {want} but the solution gives {got}"
        )));
    }
    check_proper(p, sol, side, spec, tol)?;

    let x = sol.x()?;
    let s = sol.s()?;
    let total = p.total_dim();
    let mut out = SdoPartition::default();
    for ((i, &label), &off) in labels.iter().enumerate().zip(&p.offsets()) {
        let n = p.cone_dims()[i];
        use ConePartitionLabel as L;
        let routed = match (side, label) {
            (_, L::B) => whole(n, Dest::B),
            (_, L::N) => whole(n, Dest::N),
            (_, L::T1) => whole(n, Dest::T),
            // zero direction of Arw(s) is the range of the rank-one X block
            (Side::Dual, L::R) => split_low(&s[i], Dest::B, Dest::N),
            (Side::Dual, L::T2) => split_high(&x[i], Dest::B, Dest::T),
            (Side::Dual, L::T3) => split_low(&s[i], Dest::T, Dest::N),
            // zero direction of Arw(x) is the range of the rank-one S block
            (Side::Primal, L::R) => split_low(&x[i], Dest::N, Dest::B),
            (Side::Primal, L::T2) => split_low(&x[i], Dest::T, Dest::B),
            (Side::Primal, L::T3) => split_high(&s[i], Dest::N, Dest::T),
        };
        for j in 0..n {
            let mut col = vec![0.0; total];
            for k in 0..n {
                col[off + k] = routed.basis.get(k, j);
            }
            match (routed.route)(j) {
                Dest::B => out.b_basis.push(col),
                Dest::N => out.n_basis.push(col),
                Dest::T => out.t_basis.push(col),
            }
        }
    }
    Ok(out)
}

/// Eigen tolerance for the direct partition; tight so eigenvectors are
/// accurate well beyond the span comparison threshold.
const PARTITION_EIG_TOL: f64 = 1e-13;

fn range_basis(m: &SymMatrix) -> Result<Vec<Vec<f64>>> {
    let eig = linalg::eigh(m, PARTITION_EIG_TOL)?;
    let scale = eig.eigenvalues.iter().fold(1.0f64, |a, l| a.max(l.abs()));
    Ok(eig.vectors_where(|l| l > RANK_TOL * scale))
}

/// `(B, N, T)` straight from a complementary pair: `B = R(X)`, `N = R(S)`,
/// `T` their orthogonal complement.
pub fn sdo_partition_from_solution(x: &SymMatrix, s: &SymMatrix, tol: f64) -> Result<SdoPartition> {
    if x.dim() != s.dim() {
        return Err(Error::DimensionMismatch {
            context: "partition X vs S",
            expected: x.dim(),
            found: s.dim(),
        });
    }
    for m in [x, s] {
        let lambda_min = linalg::min_eigenvalue(m, PARTITION_EIG_TOL)?;
        if lambda_min < -tol * (1.0 + m.max_abs()) {
            return Err(Error::NotPsd {
                min_eigenvalue: lambda_min,
            });
        }
    }
    let value = linalg::trace_inner(x, s)?;
    if value.abs() > tol * (1.0 + x.max_abs() * s.max_abs()) {
        return Err(Error::NotComplementary { value });
    }

    let b_basis = range_basis(x)?;
    let n_basis = range_basis(s)?;
    let cross = b_basis
        .iter()
        .flat_map(|b| n_basis.iter().map(move |n| linalg::dot(b, n).abs()))
        .fold(0.0f64, f64::max);
    if cross > tol.sqrt() {
        return Err(Error::NotComplementary { value: cross });
    }

    let n = x.dim();
    let mut projector = SymMatrix::zeros(n);
    for v in b_basis.iter().chain(&n_basis) {
        projector.axpy(1.0, &SymMatrix::outer(v))?;
    }
    let t_basis = linalg::eigh(&projector, PARTITION_EIG_TOL)?.vectors_where(|l| l < 0.5);
    Ok(SdoPartition {
        b_basis,
        n_basis,
        t_basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed_dual::RankChoice;
    use crate::linalg::{eigh, DEFAULT_TOL};
    use crate::soco::arw;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const TOL: f64 = DEFAULT_TOL;

    #[test]
    fn eigensystem_examples() {
        assert_eq!(arrowhead_eigensystem(&[2.0, 1.0, 0.0]).eigenvalues, vec![1.0, 2.0, 3.0]);
        let e = arrowhead_eigensystem(&[1.0, 0.0, 0.0]);
        assert_eq!(e.eigenvalues, vec![1.0; 3]);
        assert_eq!(e.eigenvectors, Matrix::identity(3));
        assert_eq!(arrowhead_eigensystem(&[1.0, 1.0]).eigenvalues, vec![0.0, 2.0]);
        assert_eq!(arrowhead_eigensystem(&[4.0]).eigenvalues, vec![4.0]);
    }

    #[test]
    fn label_parsing() {
        for l in ConePartitionLabel::ALL {
            assert_eq!(l.name().parse::<ConePartitionLabel>().unwrap(), l);
        }
        assert_eq!("t2".parse::<ConePartitionLabel>().unwrap(), ConePartitionLabel::T2);
        assert!("Q".parse::<ConePartitionLabel>().is_err());
    }

    fn one_cone_pair(x: Vec<f64>, s: Vec<f64>) -> (SocoProblem, SocoSolution) {
        let n = x.len();
        let mut a = vec![0.0; n];
        a[0] = 1.0;
        let p = SocoProblem::new(vec![n], vec![vec![a]], vec![s.clone()], vec![x[0]]).unwrap();
        (p, SocoSolution::new(vec![x], vec![0.0], vec![s]))
    }

    #[test]
    fn classify_examples() {
        let (p, sol) = one_cone_pair(vec![2.0, 1.0, 0.0], vec![0.0; 3]);
        assert_eq!(classify_cones(&p, &sol, TOL).unwrap(), vec![ConePartitionLabel::B]);
        let (p, sol) = one_cone_pair(vec![1.0, 1.0], vec![1.0, -1.0]);
        assert_eq!(classify_cones(&p, &sol, TOL).unwrap(), vec![ConePartitionLabel::R]);
        let (p, sol) = one_cone_pair(vec![1.0, 1.0], vec![1.0, 1.0]);
        assert!(matches!(
            classify_cones(&p, &sol, TOL),
            Err(Error::InconsistentPair { cone: 0, .. })
        ));
        let (p, sol) = one_cone_pair(vec![2.0, 1.0, 0.0], vec![3.0, 0.0, 0.0]);
        assert!(matches!(classify_cones(&p, &sol, TOL), Err(Error::InconsistentPair { .. })));
        let (p, sol) = one_cone_pair(vec![0.0, 1.0], vec![0.0, 0.0]);
        assert_eq!(classify_cones(&p, &sol, TOL).unwrap_err(), Error::OutsideCone);
    }

    #[test]
    fn table_routing_examples() {
        let full = RankSpec::Uniform(RankChoice::SimZhao);
        let (p, sol) = one_cone_pair(vec![2.0, 1.0, 0.0], vec![0.0; 3]);
        let part = map_partition(&p, &sol, &[ConePartitionLabel::B], Side::Dual, &full, TOL).unwrap();
        assert_eq!(part.dims(), (3, 0, 0));

        let (p, sol) = one_cone_pair(vec![0.0; 3], vec![0.0; 3]);
        let part = map_partition(&p, &sol, &[ConePartitionLabel::T1], Side::Dual, &full, TOL).unwrap();
        assert_eq!(part.dims(), (0, 0, 3));

        let (p, sol) = one_cone_pair(vec![1.0, 0.6, 0.8], vec![2.0, -1.2, -1.6]);
        let part = map_partition(&p, &sol, &[ConePartitionLabel::R], Side::Primal, &full, TOL).unwrap();
        assert_eq!(part.dims(), (2, 1, 0));
        // N is the zero direction of Arw(x)
        let expected = vec![std::f64::consts::FRAC_1_SQRT_2, -0.6 * 0.5f64.sqrt(), -0.8 * 0.5f64.sqrt()];
        assert!(linalg::subspace_distance(&part.n_basis, &[expected]) < 1e-14);
    }

    #[test]
    fn improper_and_mismatched_inputs_are_refused() {
        let (p, sol) = one_cone_pair(vec![2.0, 1.0, 0.0], vec![0.0; 3]);
        let one = RankSpec::Uniform(RankChoice::RankOne);
        assert_eq!(
            map_partition(&p, &sol, &[ConePartitionLabel::B], Side::Dual, &one, TOL).unwrap_err(),
            Error::NotProper { cone: 0 }
        );
        // primal side maps s = 0, so any choice is proper there
        assert!(map_partition(&p, &sol, &[ConePartitionLabel::B], Side::Primal, &one, TOL).is_ok());
        let sz = RankSpec::Uniform(RankChoice::SimZhao);
        assert!(matches!(
            map_partition(&p, &sol, &[ConePartitionLabel::N], Side::Dual, &sz, TOL),
            Err(Error::LabelMismatch(_))
        ));
    }

    #[test]
    fn direct_partition_examples() {
        let part = sdo_partition_from_solution(
            &SymMatrix::from_diag(&[1.0, 0.0]),
            &SymMatrix::from_diag(&[0.0, 1.0]),
            TOL,
        )
        .unwrap();
        assert_eq!(part.dims(), (1, 1, 0));
        assert!(linalg::subspace_distance(&part.b_basis, &[vec![1.0, 0.0]]) < 1e-15);

        let zero = SymMatrix::zeros(3);
        assert_eq!(sdo_partition_from_solution(&zero, &zero, TOL).unwrap().dims(), (0, 0, 3));

        let eye = SymMatrix::identity(2);
        assert!(matches!(
            sdo_partition_from_solution(&eye, &eye, TOL),
            Err(Error::NotComplementary { .. })
        ));
        assert!(matches!(
            sdo_partition_from_solution(&SymMatrix::from_diag(&[1.0, -1.0]), &zero.block(0, 2), TOL),
            Err(Error::NotPsd { .. })
        ));
    }

    fn cone_vector() -> impl Strategy<Value = Vec<f64>> {
        (1usize..9).prop_flat_map(|n| {
            (proptest::collection::vec(-1.0f64..1.0, n - 1), 0.0f64..1.5).prop_map(|(t, margin)| {
                let mut v = vec![linalg::norm2(&t) + margin];
                v.extend(t);
                v
            })
        })
    }

    proptest! {
        #[test]
        fn closed_form_matches_jacobi(v in cone_vector()) {
            let closed = arrowhead_eigensystem(&v);
            let m = arw(&v);
            let jac = eigh(&m, 1e-14).unwrap();
            for (a, b) in closed.eigenvalues.iter().zip(&jac.eigenvalues) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
            prop_assert!(closed.reconstruct().sub(&m).unwrap().max_abs() <= 1e-12);
            let q = &closed.eigenvectors;
            let gram = q.gram();
            prop_assert!(gram.sub(&SymMatrix::identity(v.len())).unwrap().max_abs() <= 1e-12);
        }
    }

    #[test]
    fn eigenvalues_ascend_with_negative_leading_tail() {
        let v = [3.0, -1.0, 2.0, 0.5];
        let e = arrowhead_eigensystem(&v);
        assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        let t = tail_norm(&v);
        assert_abs_diff_eq!(e.eigenvalues[0], 3.0 - t, epsilon = 1e-15);
    }
}
