use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use conic_embed::embed_dual::{build_dual_embedding, inverse_map_dual, map_solution_dual};
use conic_embed::embed_primal::{build_primal_embedding, inverse_map_primal, map_solution_primal};
use conic_embed::generator::generate_instance;
use conic_embed::partition::{classify_cones, map_partition, sdo_partition_from_solution};
use conic_embed::verify::{check_admissibility, example1_counterexample};
use conic_embed::{io, ConePartitionLabel, Error, RankSpec, Result, SdoProblem, SdoSolution, Side, SocoProblem, SocoSolution};

#[derive(Parser)]
#[command(name = "conic-embed", version, about = "Embed second-order conic problems into semidefinite form")]
struct Cli {
    /// Tolerance for every numerical check.
    #[arg(long, global = true, env = "CONIC_EMBED_TOL", default_value_t = 1e-8)]
    tol: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the SDO embedding of a SOCO problem.
    Embed {
        #[arg(long)]
        side: Side,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also write sparse SDPA.
        #[arg(long)]
        sdpa: Option<PathBuf>,
        /// One SDPA block per cone.
        #[arg(long, requires = "sdpa")]
        split_blocks: bool,
    },
    /// Map a SOCO solution into the embedding.
    Map {
        #[arg(long)]
        side: Side,
        /// one, simzhao, full, k:<k> or k:<k1>,<k2>,...
        #[arg(long)]
        rank: RankSpec,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Map an SDO solution back to the SOCO problem.
    Inverse {
        #[arg(long)]
        side: Side,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        sdo_solution: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check that a mapped solution is admissible; exit code 1 if not.
    Verify {
        #[arg(long)]
        side: Side,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        mapped: PathBuf,
    },
    /// Per-cone partition labels of a solution pair.
    Classify {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        solution: PathBuf,
    },
    /// SDO optimal partition of the mapped pair.
    Partition {
        #[arg(long)]
        side: Side,
        #[arg(long)]
        problem: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// simzhao or full
        #[arg(long)]
        rank: RankSpec,
        /// Write the B/N/T bases as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate an instance with a known optimal pair.
    Gen {
        #[arg(long, value_delimiter = ',', required = true)]
        cones: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        labels: Vec<ConePartitionLabel>,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        sol_out: PathBuf,
    },
    /// Jordan-complementary pair whose arrow-head matrices do not commute to zero.
    Example1 {
        #[arg(long)]
        n: usize,
        /// Unit direction in ℝⁿ⁻¹; defaults to the first coordinate vector.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        direction: Option<Vec<f64>>,
    },
}

fn embed(p: &SocoProblem, side: Side) -> SdoProblem {
    match side {
        Side::Dual => build_dual_embedding(p),
        Side::Primal => build_primal_embedding(p),
    }
}

fn map(p: &SocoProblem, sol: &SocoSolution, side: Side, spec: &RankSpec, tol: f64) -> Result<SdoSolution> {
    match side {
        Side::Dual => map_solution_dual(p, sol, spec, tol),
        Side::Primal => map_solution_primal(p, sol, spec, tol),
    }
}

fn run(cli: Cli) -> Result<bool> {
    let tol = cli.tol;
    match cli.command {
        Command::Embed {
            side,
            input,
            out,
            sdpa,
            split_blocks,
        } => {
            let p = io::load_problem(&input)?;
            let e = embed(&p, side);
            io::save_sdo_problem(&out, &e)?;
            if let Some(path) = sdpa {
                io::write_sdpa(&e, path, split_blocks)?;
            }
            println!(
                "{}-side embedding: order {}, {} constraints",
                side.name(),
                e.dim(),
                e.num_constraints()
            );
        }
        Command::Map {
            side,
            rank,
            problem,
            solution,
            out,
        } => {
            let p = io::load_problem(&problem)?;
            let sol = io::load_solution(&solution)?;
            io::save_sdo_solution(&out, &map(&p, &sol, side, &rank, tol)?)?;
        }
        Command::Inverse {
            side,
            problem,
            sdo_solution,
            out,
        } => {
            let p = io::load_problem(&problem)?;
            let e = embed(&p, side);
            let meta = e.meta().expect("embeddings carry their meta");
            let m = io::load_sdo_solution(&sdo_solution)?;
            let back = match side {
                Side::Dual => inverse_map_dual(meta, &m, tol)?,
                Side::Primal => inverse_map_primal(&p, meta, &m, tol)?,
            };
            io::save_solution(&out, &back)?;
        }
        Command::Verify {
            side,
            problem,
            solution,
            mapped,
        } => {
            let p = io::load_problem(&problem)?;
            let sol = io::load_solution(&solution)?;
            let m = io::load_sdo_solution(&mapped)?;
            let report = check_admissibility(&p, &sol, &embed(&p, side), &m, tol)?;
            println!("{report}");
            return Ok(report.passed());
        }
        Command::Classify { problem, solution } => {
            let p = io::load_problem(&problem)?;
            let sol = io::load_solution(&solution)?;
            for (i, label) in classify_cones(&p, &sol, tol)?.iter().enumerate() {
                println!("cone {i}: {label}");
            }
        }
        Command::Partition {
            side,
            problem,
            solution,
            rank,
            out,
        } => {
            let p = io::load_problem(&problem)?;
            let sol = io::load_solution(&solution)?;
            let labels = classify_cones(&p, &sol, tol)?;
            let table = map_partition(&p, &sol, &labels, side, &rank, tol)?;
            let m = map(&p, &sol, side, &rank, tol)?;
            let direct = sdo_partition_from_solution(m.x()?, m.s()?, tol)?;
            let (b, n, t) = table.dims();
            println!("dim B = {b}, dim N = {n}, dim T = {t}");
            println!("largest principal angle (sin) vs eigen-computed spans: {:.3e}", table.distance(&direct));
            if let Some(path) = out {
                std::fs::write(&path, io::to_json(&table)?)
                    .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
            }
        }
        Command::Gen {
            cones,
            labels,
            m,
            seed,
            out,
            sol_out,
        } => {
            let g = generate_instance(&cones, &labels, m, seed)?;
            io::save_problem(&out, &g.problem)?;
            io::save_solution(&sol_out, &g.solution)?;
        }
        Command::Example1 { n, direction } => {
            let u = direction.unwrap_or_else(|| {
                let mut u = vec![0.0; n.saturating_sub(1)];
                if let Some(first) = u.first_mut() {
                    *first = 1.0;
                }
                u
            });
            let e = example1_counterexample(n, &u)?;
            println!("||x o s||_inf            = {:e}", e.jordan_residual);
            println!("||Arw(x) Arw(s)||_inf    = {}", e.residual);
            println!("|Tr(dmr1(x) Arw(s))|     = {:e}", e.admissible_trace);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
