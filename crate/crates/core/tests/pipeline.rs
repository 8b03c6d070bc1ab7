//! Whole-pipeline checks against hand-built instances with known answers.

use approx::assert_abs_diff_eq;

use conic_embed::embed_dual::{build_dual_embedding, inverse_map_dual, map_solution_dual};
use conic_embed::embed_primal::{build_primal_embedding, inverse_map_primal, map_solution_primal};
use conic_embed::generator::{generate_instance, with_duality_gap};
use conic_embed::linalg::{trace_inner, DEFAULT_TOL};
use conic_embed::partition::{classify_cones, map_partition, sdo_partition_from_solution};
use conic_embed::sdo::{sdo_dual_residual, sdo_primal_residual};
use conic_embed::verify::check_admissibility;
use conic_embed::{io, ConePartitionLabel as L, Error, RankChoice, RankSpec, Side, SocoProblem, SocoSolution};

const TOL: f64 = DEFAULT_TOL;

/// `min x₁ s.t. x₂ = 1, x ∈ L³`: optimum `x = (1, 1, 0)`, `y = 1`,
/// `s = (1, −1, 0)`, objective 1.
fn hand_instance() -> (SocoProblem, SocoSolution) {
    let p = SocoProblem::new(
        vec![3],
        vec![vec![vec![0.0, 1.0, 0.0]]],
        vec![vec![1.0, 0.0, 0.0]],
        vec![1.0],
    )
    .unwrap();
    let sol = SocoSolution::new(vec![vec![1.0, 1.0, 0.0]], vec![1.0], vec![vec![1.0, -1.0, 0.0]]);
    (p, sol)
}

#[test]
fn hand_instance_maps_on_both_sides() {
    let (p, sol) = hand_instance();
    assert_eq!(classify_cones(&p, &sol, TOL).unwrap(), vec![L::R]);
    for spec in ["one", "simzhao", "k:1"] {
        let spec: RankSpec = spec.parse().unwrap();

        let d = build_dual_embedding(&p);
        let m = map_solution_dual(&p, &sol, &spec, TOL).unwrap();
        let r = check_admissibility(&p, &sol, &d, &m, TOL).unwrap();
        assert!(r.passed(), "{r}");
        assert_abs_diff_eq!(trace_inner(d.c(), m.x().unwrap()).unwrap(), 1.0, epsilon = 1e-15);

        let e = build_primal_embedding(&p);
        let m = map_solution_primal(&p, &sol, &spec, TOL).unwrap();
        let r = check_admissibility(&p, &sol, &e, &m, TOL).unwrap();
        assert!(r.passed(), "{r}");
        // X = Arw(x) exactly on the primal side
        assert_eq!(m.x().unwrap().get(0, 1), 1.0);
        assert_eq!(m.x().unwrap().get(2, 2), 1.0);
    }
}

#[test]
fn full_rank_is_refused_on_the_boundary() {
    let (p, sol) = hand_instance();
    let spec: RankSpec = "full".parse().unwrap();
    assert_eq!(map_solution_dual(&p, &sol, &spec, TOL).unwrap_err(), Error::NotInterior);
    assert_eq!(map_solution_primal(&p, &sol, &spec, TOL).unwrap_err(), Error::NotInterior);
}

#[test]
fn interior_dual_block_gets_full_rank_image() {
    let g = generate_instance(&[4, 3], &[L::B, L::N], 3, 21).unwrap();
    // the N cone has x = 0, so only the first block can take a full-rank image
    let specs = [
        RankSpec::Uniform(RankChoice::SimZhao),
        RankSpec::PerCone(vec![RankChoice::FullRank { eps: None }, RankChoice::RankOne]),
        "k:4,1".parse().unwrap(),
    ];
    for spec in specs {
        let d = build_dual_embedding(&g.problem);
        let m = map_solution_dual(&g.problem, &g.solution, &spec, TOL).unwrap();
        assert!(check_admissibility(&g.problem, &g.solution, &d, &m, TOL).unwrap().passed());
        let back = inverse_map_dual(d.meta().unwrap(), &m, TOL).unwrap();
        for (a, b) in back.x().unwrap().iter().flatten().zip(g.solution.x().unwrap().iter().flatten()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}

#[test]
fn gap_family_transfers_its_gap() {
    let g = generate_instance(&[5, 2], &[L::B, L::T3], 2, 3).unwrap();
    for delta in [1e-6, 0.3, 2.0] {
        let (p, sol) = with_duality_gap(&g, delta).unwrap();
        for side in [Side::Dual, Side::Primal] {
            let spec = RankSpec::Uniform(RankChoice::SimZhao);
            let m = match side {
                Side::Dual => map_solution_dual(&p, &sol, &spec, TOL),
                Side::Primal => map_solution_primal(&p, &sol, &spec, TOL),
            }
            .unwrap();
            let tr = trace_inner(m.x().unwrap(), m.s().unwrap()).unwrap();
            assert_abs_diff_eq!(tr, delta, epsilon = 1e-12);
        }
    }
}

#[test]
fn primal_side_recovers_slack_from_dual_vector_alone() {
    let g = generate_instance(&[3, 3], &[L::R, L::N], 2, 5).unwrap();
    let without_s = SocoSolution {
        s_blocks: None,
        ..g.solution.clone()
    };
    let spec = RankSpec::Uniform(RankChoice::SimZhao);
    let e = build_primal_embedding(&g.problem);
    let m = map_solution_primal(&g.problem, &without_s, &spec, TOL).unwrap();
    assert!(sdo_primal_residual(&e, &m).unwrap() < 1e-12);
    assert!(sdo_dual_residual(&e, &m).unwrap() < 1e-12);
    let back = inverse_map_primal(&g.problem, e.meta().unwrap(), &m, TOL).unwrap();
    for (a, b) in back.s().unwrap().iter().flatten().zip(g.solution.s().unwrap().iter().flatten()) {
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
    }
}

#[test]
fn table_partitions_match_direct_ones() {
    let g = generate_instance(&[3, 4, 2, 5, 3, 1], &[L::B, L::N, L::R, L::T1, L::T2, L::N], 5, 17)
        .unwrap();
    let labels = classify_cones(&g.problem, &g.solution, TOL).unwrap();
    for side in [Side::Dual, Side::Primal] {
        let spec = RankSpec::Uniform(RankChoice::SimZhao);
        let table = map_partition(&g.problem, &g.solution, &labels, side, &spec, TOL).unwrap();
        let m = match side {
            Side::Dual => map_solution_dual(&g.problem, &g.solution, &spec, TOL),
            Side::Primal => map_solution_primal(&g.problem, &g.solution, &spec, TOL),
        }
        .unwrap();
        let direct = sdo_partition_from_solution(m.x().unwrap(), m.s().unwrap(), TOL).unwrap();
        assert!(table.distance(&direct) < 1e-9);
        let (b, n, t) = table.dims();
        assert_eq!(b + n + t, 18);
    }
}

#[test]
fn files_carry_a_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let g = generate_instance(&[3, 2], &[L::T2, L::B], 2, 12).unwrap();
    io::save_problem(dir.path().join("p.json"), &g.problem).unwrap();
    io::save_solution(dir.path().join("s.json"), &g.solution).unwrap();
    let p = io::load_problem(dir.path().join("p.json")).unwrap();
    let sol = io::load_solution(dir.path().join("s.json")).unwrap();
    assert_eq!(p, g.problem);
    let e = build_primal_embedding(&p);
    let m = map_solution_primal(&p, &sol, &RankSpec::Uniform(RankChoice::RankOne), TOL).unwrap();
    io::save_sdo_solution(dir.path().join("m.json"), &m).unwrap();
    let m2 = io::load_sdo_solution(dir.path().join("m.json")).unwrap();
    assert_eq!(m, m2);
    assert!(check_admissibility(&p, &sol, &e, &m2, TOL).unwrap().passed());
}
