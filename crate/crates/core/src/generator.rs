//! Seeded SOCO instances with a known optimal pair of prescribed labels.
//!
//! Draws come from ChaCha8 seeded with the given `u64`, so a seed fixes the
//! instance on every platform. The pair is assumed, not proven, to be
//! maximally complementary: a random instance could in principle admit a
//! larger optimal set, but only on a measure-zero set of draws.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, RANK_TOL};
use crate::partition::ConePartitionLabel;
use crate::soco::{SocoProblem, SocoSolution};

/// Attempts per random draw before `DegenerateDraw`.
pub const MAX_DRAW_ATTEMPTS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedInstance {
    pub problem: SocoProblem,
    pub solution: SocoSolution,
    pub labels: Vec<ConePartitionLabel>,
    pub seed: u64,
}

struct Draws {
    rng: ChaCha8Rng,
}

impl Draws {
    fn new(seed: u64) -> Self {
        Draws {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    fn unit(&mut self) -> f64 {
        self.rng.gen_range(-1.0..=1.0)
    }

    fn vec(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.unit()).collect()
    }

    fn scale(&mut self) -> f64 {
        self.rng.gen_range(0.5..1.5)
    }

    /// Tail uniform in `[−1, 1]`, leading entry `‖tail‖ + U(0.5, 1.5)`.
    fn interior(&mut self, n: usize) -> Vec<f64> {
        let tail = self.vec(n - 1);
        let mut v = vec![linalg::norm2(&tail) + self.scale()];
        v.extend(tail);
        v
    }

    fn direction(&mut self, k: usize) -> Result<Vec<f64>> {
        for _ in 0..MAX_DRAW_ATTEMPTS {
            let w = self.vec(k);
            let norm = linalg::norm2(&w);
            if norm > 1e-3 {
                return Ok(w.into_iter().map(|v| v / norm).collect());
            }
        }
        Err(Error::DegenerateDraw(MAX_DRAW_ATTEMPTS))
    }

    /// Scale times `(1, sign · d)`.
    fn ray(&mut self, d: &[f64], sign: f64) -> Vec<f64> {
        let alpha = self.scale();
        std::iter::once(alpha).chain(d.iter().map(|v| alpha * sign * v)).collect()
    }
}

/// Instance with `m` rows over `cone_dims` whose optimal pair realizes
/// `labels`; `b = Σ Aⁱx̄ⁱ` and `cⁱ = (Aⁱ)ᵀȳ + s̄ⁱ`.
pub fn generate_instance(
    cone_dims: &[usize],
    labels: &[ConePartitionLabel],
    m: usize,
    seed: u64,
) -> Result<GeneratedInstance> {
    if cone_dims.is_empty() || cone_dims.contains(&0) {
        return Err(Error::InvalidArgument("every cone needs dimension ≥ 1".into()));
    }
    if labels.len() != cone_dims.len() {
        return Err(Error::InvalidArgument(format!(
            "{} labels for {} cones",
            labels.len(),
            cone_dims.len()
        )));
    }
    let total: usize = cone_dims.iter().sum();
    if m == 0 || m > total {
        return Err(Error::InvalidArgument(format!(
            "m must lie in 1..={total} for a full-row-rank A, got {m}"
        )));
    }
    if let Some(i) = (0..labels.len()).find(|&i| cone_dims[i] == 1 && labels[i].needs_boundary()) {
        return Err(Error::InvalidArgument(format!(
            "cone {i} has dimension 1, which has no nonzero boundary point for label {}",
            labels[i]
        )));
    }

    let mut draws = Draws::new(seed);
    let mut x = Vec::with_capacity(cone_dims.len());
    let mut s = Vec::with_capacity(cone_dims.len());
    for (&n, &label) in cone_dims.iter().zip(labels) {
        use ConePartitionLabel as L;
        let zero = vec![0.0; n];
        let (xi, si) = match label {
            L::B => (draws.interior(n), zero),
            L::N => (zero, draws.interior(n)),
            L::T1 => (zero.clone(), zero),
            L::R => {
                let d = draws.direction(n - 1)?;
                (draws.ray(&d, 1.0), draws.ray(&d, -1.0))
            }
            L::T2 => {
                let d = draws.direction(n - 1)?;
                (draws.ray(&d, 1.0), zero)
            }
            L::T3 => {
                let d = draws.direction(n - 1)?;
                (zero, draws.ray(&d, -1.0))
            }
        };
        x.push(xi);
        s.push(si);
    }

    let a = draw_full_rank(&mut draws, m, total)?;
    let y = draws.vec(m);

    let mut a_blocks = Vec::with_capacity(cone_dims.len());
    let mut off = 0;
    for &n in cone_dims {
        a_blocks.push(
            (0..m)
                .map(|j| (0..n).map(|k| a.get(j, off + k)).collect())
                .collect::<Vec<Vec<f64>>>(),
        );
        off += n;
    }
    let b: Vec<f64> = (0..m)
        .map(|j| {
            a_blocks
                .iter()
                .zip(&x)
                .map(|(blk, xi): (&Vec<Vec<f64>>, &Vec<f64>)| linalg::dot(&blk[j], xi))
                .sum()
        })
        .collect();
    let c: Vec<Vec<f64>> = a_blocks
        .iter()
        .zip(&s)
        .map(|(blk, si)| {
            (0..si.len())
                .map(|k| (0..m).map(|j| blk[j][k] * y[j]).sum::<f64>() + si[k])
                .collect()
        })
        .collect();

    let problem = SocoProblem::new(cone_dims.to_vec(), a_blocks, c, b)?;
    Ok(GeneratedInstance {
        problem,
        solution: SocoSolution::new(x, y, s),
        labels: labels.to_vec(),
        seed,
    })
}

fn draw_full_rank(draws: &mut Draws, m: usize, n: usize) -> Result<Matrix> {
    for _ in 0..MAX_DRAW_ATTEMPTS {
        let a = Matrix::from_fn(m, n, |_, _| draws.unit());
        if linalg::numeric_rank(&a.transpose().gram(), RANK_TOL)? == m {
            return Ok(a);
        }
    }
    Err(Error::DegenerateDraw(MAX_DRAW_ATTEMPTS))
}

/// Shifts `s̄ⁱ₁` and `cⁱ₁` by `δ / Σᵢ x̄ⁱ₁` so the pair stays feasible with
/// duality gap exactly `δ` in exact arithmetic.
pub fn with_duality_gap(inst: &GeneratedInstance, delta: f64) -> Result<(SocoProblem, SocoSolution)> {
    let x = inst.solution.x()?;
    let lead_sum: f64 = x.iter().map(|v| v[0]).sum();
    if lead_sum <= 0.0 {
        return Err(Error::InvalidArgument(
            "a gap shift needs some cone with x̄₁ > 0".into(),
        ));
    }
    let t = delta / lead_sum;
    let shift = |blocks: &[Vec<f64>]| -> Vec<Vec<f64>> {
        blocks
            .iter()
            .map(|v| {
                let mut v = v.clone();
                v[0] += t;
                v
            })
            .collect()
    };
    let problem = inst.problem.with_c(shift(inst.problem.c_blocks()))?;
    let solution = SocoSolution {
        s_blocks: Some(shift(inst.solution.s()?)),
        ..inst.solution.clone()
    };
    Ok((problem, solution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partition::classify_cones;
    use crate::soco::{duality_gap, dual_residual, jordan_product_blocks, primal_residual};
    use ConePartitionLabel as L;

    #[test]
    fn seven_seed_instance_has_zero_gap() {
        let g = generate_instance(&[3, 3], &[L::B, L::R], 4, 7).unwrap();
        assert!(duality_gap(&g.problem, &g.solution).unwrap().abs() <= 1e-12);
        assert!(primal_residual(&g.problem, &g.solution).unwrap() <= 1e-12);
        assert!(dual_residual(&g.problem, &g.solution).unwrap() <= 1e-12);
        assert_eq!(classify_cones(&g.problem, &g.solution, 1e-8).unwrap(), vec![L::B, L::R]);
    }

    #[test]
    fn all_zero_pair() {
        let g = generate_instance(&[4], &[L::T1], 2, 3).unwrap();
        assert_eq!(g.solution.x().unwrap(), &[vec![0.0; 4]]);
        assert_eq!(g.problem.b(), &[0.0, 0.0]);
        let y = g.solution.y().unwrap();
        let expected = g.problem.a_transpose_times(0, y);
        assert_eq!(g.problem.c_block(0), expected.as_slice());
    }

    #[test]
    fn same_seed_same_instance() {
        let a = generate_instance(&[2, 5, 1], &[L::T2, L::N, L::B], 3, 99).unwrap();
        let b = generate_instance(&[2, 5, 1], &[L::T2, L::N, L::B], 3, 99).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(&[2, 5, 1], &[L::T2, L::N, L::B], 3, 100).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn every_label_is_realized() {
        for (seed, &label) in L::ALL.iter().enumerate() {
            let g = generate_instance(&[5, 3], &[label, L::T3], 2, seed as u64).unwrap();
            let jordan = jordan_product_blocks(g.solution.x().unwrap(), g.solution.s().unwrap()).unwrap();
            assert!(linalg::max_abs(&jordan) <= 1e-12);
            assert_eq!(classify_cones(&g.problem, &g.solution, 1e-8).unwrap(), vec![label, L::T3]);
        }
    }

    #[test]
    fn invalid_requests() {
        assert!(generate_instance(&[2], &[L::B], 3, 0).is_err());
        assert!(generate_instance(&[2], &[L::B], 0, 0).is_err());
        assert!(generate_instance(&[1], &[L::R], 1, 0).is_err());
        assert!(generate_instance(&[2, 2], &[L::B], 1, 0).is_err());
    }

    #[test]
    fn gap_shift() {
        let g = generate_instance(&[3, 2], &[L::B, L::T2], 2, 11).unwrap();
        let (p, sol) = with_duality_gap(&g, 0.25).unwrap();
        assert!((duality_gap(&p, &sol).unwrap() - 0.25).abs() <= 1e-12);
        assert!(dual_residual(&p, &sol).unwrap() <= 1e-12);
        let zero = generate_instance(&[3], &[L::N], 1, 1).unwrap();
        assert!(with_duality_gap(&zero, 0.25).is_err());
    }
}
