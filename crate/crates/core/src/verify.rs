//! Admissibility reports and the double-arrow-head counterexample.

use std::fmt;

use serde::Serialize;

use crate::embed_dual;
use crate::error::{Error, Result};
use crate::linalg::{self, SymMatrix};
use crate::sdo::{self, SdoProblem, SdoSolution};
use crate::soco::{self, SocoProblem, SocoSolution};

/// Residuals of a mapped pair against the SOCO pair it came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    /// `maxᵢ |Tr(AᵢX) − bᵢ|`.
    pub primal_residual: f64,
    /// `‖C − Σ yᵢAᵢ − S‖∞`.
    pub dual_residual: f64,
    /// `|cᵀx̄ − Tr(CX)|`.
    pub primal_obj_gap: f64,
    /// `|bᵀȳ − b̃ᵀy|`.
    pub dual_obj_gap: f64,
    /// `‖x̄ ∘ s̄‖∞` over all blocks.
    pub soco_complementarity: f64,
    /// `Tr(XS)`.
    pub sdo_trace: f64,
    /// `‖XS‖∞` (largest absolute entry).
    pub sdo_product_max: f64,
    pub tol: f64,
}

impl AdmissibilityReport {
    /// `(name, value, passed)` for every check.
    pub fn checks(&self) -> Vec<(&'static str, f64, bool)> {
        let within = |v: f64| v <= self.tol;
        let complementary_soco = within(self.soco_complementarity);
        let complementary_sdo = within(self.sdo_trace.abs());
        vec![
            ("primal_residual", self.primal_residual, within(self.primal_residual)),
            ("dual_residual", self.dual_residual, within(self.dual_residual)),
            ("primal_obj_gap", self.primal_obj_gap, within(self.primal_obj_gap)),
            ("dual_obj_gap", self.dual_obj_gap, within(self.dual_obj_gap)),
            (
                "complementarity_preserved",
                self.sdo_trace,
                complementary_soco == complementary_sdo,
            ),
        ]
    }

    pub fn passed(&self) -> bool {
        self.checks().iter().all(|c| c.2)
    }
}

impl fmt::Display for AdmissibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, value, ok) in self.checks() {
            writeln!(f, "{name:<26} {value:>12.3e}  {}", if ok { "ok" } else { "FAIL" })?;
        }
        writeln!(f, "{:<26} {:>12.3e}", "soco_complementarity", self.soco_complementarity)?;
        writeln!(f, "{:<26} {:>12.3e}", "sdo_product_max", self.sdo_product_max)?;
        write!(
            f,
            "verdict: {} (tol {:e})",
            if self.passed() { "admissible" } else { "NOT admissible" },
            self.tol
        )
    }
}

/// Builds the report. `sdo_p` must be an embedding of `p`.
pub fn check_admissibility(
    p: &SocoProblem,
    soco_sol: &SocoSolution,
    sdo_p: &SdoProblem,
    sdo_sol: &SdoSolution,
    tol: f64,
) -> Result<AdmissibilityReport> {
    let meta = sdo_p
        .meta()
        .ok_or_else(|| Error::ProvenanceMismatch("SDO problem is not an embedding".into()))?;
    if meta.cone_dims != p.cone_dims() || meta.num_original_rows != p.num_rows() {
        return Err(Error::ProvenanceMismatch(
            "cone dimensions or row count differ from the SOCO problem".into(),
        ));
    }
    soco_sol.check_shape(p)?;
    sdo_sol.check_shape(sdo_p)?;

    let x = sdo_sol.x()?;
    let s = sdo_sol.s()?;
    let y = sdo_sol.y()?;
    let xbar = soco_sol.x()?;
    let ybar = soco_sol.y()?;
    let sbar = soco_sol.s()?;

    let primal_obj_gap =
        (soco::primal_objective(p, xbar) - sdo::sdo_primal_objective(sdo_p, x)?).abs();
    let dual_obj_gap = (linalg::dot(p.b(), ybar) - linalg::dot(sdo_p.b(), y)).abs();
    let soco_complementarity = linalg::max_abs(&soco::jordan_product_blocks(xbar, sbar)?);

    Ok(AdmissibilityReport {
        primal_residual: sdo::sdo_primal_residual(sdo_p, sdo_sol)?,
        dual_residual: sdo::sdo_dual_residual(sdo_p, sdo_sol)?,
        primal_obj_gap,
        dual_obj_gap,
        soco_complementarity,
        sdo_trace: linalg::trace_inner(x, s)?,
        sdo_product_max: x.mul(s)?.max_abs(),
        tol,
    })
}

/// `X = Arw((1, u))`, `S = Arw((1, −u))`: Jordan-complementary, yet
/// `XS ≠ 0`.
#[derive(Clone, Debug)]
pub struct Example1 {
    pub x: SymMatrix,
    pub s: SymMatrix,
    /// `‖XS‖∞`.
    pub residual: f64,
    /// `‖x ∘ s‖∞`.
    pub jordan_residual: f64,
    /// `|Tr(M(x) Arw(s))|` with the rank-one admissible map `M`.
    pub admissible_trace: f64,
}

/// Counterexample for `n ≥ 3` and a unit `u ∈ ℝⁿ⁻¹`.
pub fn example1_counterexample(n: usize, u: &[f64]) -> Result<Example1> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "n must be at least 3, got {n} (for n = 2 the product vanishes)"
        )));
    }
    if u.len() != n - 1 {
        return Err(Error::DimensionMismatch {
            context: "example1 direction",
            expected: n - 1,
            found: u.len(),
        });
    }
    let norm = linalg::norm2(u);
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "direction must be a unit vector, has norm {norm}"
        )));
    }
    let xv: Vec<f64> = std::iter::once(1.0).chain(u.iter().copied()).collect();
    let sv: Vec<f64> = std::iter::once(1.0).chain(u.iter().map(|v| -v)).collect();
    let x = soco::arw(&xv);
    let s = soco::arw(&sv);
    let residual = x.mul(&s)?.max_abs();
    let jordan_residual = linalg::max_abs(&soco::jordan_product(&xv, &sv)?);
    let mapped = embed_dual::dmr1(&xv, linalg::DEFAULT_TOL)?;
    let admissible_trace = linalg::trace_inner(&mapped, &s)?.abs();
    Ok(Example1 {
        x,
        s,
        residual,
        jordan_residual,
        admissible_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed_dual::{build_dual_embedding, map_solution_dual, RankChoice, RankSpec};
    use crate::embed_primal::{build_primal_embedding, map_solution_primal};
    use approx::assert_abs_diff_eq;

    fn instance() -> (SocoProblem, SocoSolution) {
        let x = vec![1.0, 0.6, 0.8];
        let s = vec![2.0, -1.2, -1.6];
        let a = vec![vec![1.0, -0.5, 2.0]];
        let y = vec![0.5];
        let c: Vec<f64> = (0..3).map(|k| a[0][k] * y[0] + s[k]).collect();
        let b = vec![linalg::dot(&a[0], &x)];
        (
            SocoProblem::new(vec![3], vec![a], vec![c], b).unwrap(),
            SocoSolution::new(vec![x], y, vec![s]),
        )
    }

    #[test]
    fn mapped_images_pass_on_both_sides() {
        let (p, sol) = instance();
        let spec = RankSpec::Uniform(RankChoice::RankOne);
        let d = build_dual_embedding(&p);
        let m = map_solution_dual(&p, &sol, &spec, 1e-8).unwrap();
        let r = check_admissibility(&p, &sol, &d, &m, 1e-8).unwrap();
        assert!(r.passed(), "{r}");
        let pe = build_primal_embedding(&p);
        let m = map_solution_primal(&p, &sol, &spec, 1e-8).unwrap();
        assert!(check_admissibility(&p, &sol, &pe, &m, 1e-8).unwrap().passed());
    }

    #[test]
    fn perturbed_x_fails_with_linear_residual() {
        let (p, sol) = instance();
        let d = build_dual_embedding(&p);
        let mut m = map_solution_dual(&p, &sol, &RankSpec::Uniform(RankChoice::RankOne), 1e-8).unwrap();
        m.x.as_mut().unwrap().add_to(0, 1, 0.1);
        let r = check_admissibility(&p, &sol, &d, &m, 1e-8).unwrap();
        assert!(!r.passed());
        // Tr(A E) for E = 0.1 (e₁e₂ᵀ + e₂e₁ᵀ) is 0.2 · A(1,2) = 0.2 · a₂
        assert_abs_diff_eq!(r.primal_residual, 0.2 * 0.5, epsilon = 1e-14);
    }

    #[test]
    fn generic_sdo_problem_is_a_provenance_mismatch() {
        let (p, sol) = instance();
        let d = build_dual_embedding(&p);
        let generic = SdoProblem::new(
            d.c().clone(),
            d.constraints().to_vec(),
            d.b().to_vec(),
            crate::sdo::Provenance::Generic,
        )
        .unwrap();
        let m = map_solution_dual(&p, &sol, &RankSpec::Uniform(RankChoice::RankOne), 1e-8).unwrap();
        assert!(matches!(
            check_admissibility(&p, &sol, &generic, &m, 1e-8),
            Err(Error::ProvenanceMismatch(_))
        ));
    }

    #[test]
    fn example1_cases() {
        let e = example1_counterexample(3, &[1.0, 0.0]).unwrap();
        assert_eq!(e.residual, 1.0);
        assert_eq!(e.jordan_residual, 0.0);
        assert!(e.admissible_trace < 1e-15);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let e = example1_counterexample(3, &[h, h]).unwrap();
        let xs = e.x.mul(&e.s).unwrap();
        assert_abs_diff_eq!(xs.get(1, 1), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(xs.get(1, 2), -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(xs.get(0, 0), 0.0, epsilon = 1e-15);

        assert!(matches!(example1_counterexample(2, &[1.0]), Err(Error::InvalidArgument(_))));
        assert!(matches!(example1_counterexample(3, &[1.0, 1.0]), Err(Error::InvalidArgument(_))));
    }
}
