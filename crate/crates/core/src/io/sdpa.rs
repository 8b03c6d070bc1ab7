//! Sparse SDPA (`.dat-s`) writer.
//!
//! Layout: number of constraints, number of blocks, block sizes, the right
//! hand side, then one `matno blkno i j value` line per upper-triangle
//! nonzero with 1-based indices. Matrix 0 is the objective `C` as stored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::sdo::SdoProblem;
use crate::soco::block_offsets;

fn block_layout(p: &SdoProblem, split_blocks: bool) -> Result<Vec<usize>> {
    if !split_blocks {
        return Ok(vec![p.dim()]);
    }
    let meta = p.meta().ok_or_else(|| {
        Error::InvalidArgument("--split-blocks needs an embedding with known cone blocks".into())
    })?;
    let dims = meta.cone_dims.clone();
    let offsets = block_offsets(&dims);
    let mut owner = Vec::with_capacity(p.dim());
    for (i, &n) in dims.iter().enumerate() {
        owner.extend(std::iter::repeat(i).take(n));
    }
    for (matno, m) in std::iter::once(p.c()).chain(p.constraints()).enumerate() {
        if let Some((i, j, _)) = m.upper_nonzeros().find(|&(i, j, _)| owner[i] != owner[j]) {
            return Err(Error::InvalidArgument(format!(
                "matrix {matno} has an off-block entry at ({i}, {j}); export without --split-blocks"
            )));
        }
    }
    debug_assert_eq!(offsets.len(), dims.len());
    Ok(dims)
}

fn push_entries(out: &mut Vec<(usize, usize, usize, usize, f64)>, matno: usize, m: &SymMatrix, dims: &[usize]) {
    let offsets = block_offsets(dims);
    for (i, j, v) in m.upper_nonzeros() {
        let blk = offsets.partition_point(|&o| o <= i) - 1;
        let off = offsets[blk];
        out.push((matno, blk + 1, i - off + 1, j - off + 1, v));
    }
}

/// Renders `p` as sparse SDPA text. With `split_blocks`, every cone becomes
/// its own block; that requires block-diagonal data.
pub fn export_sdpa(p: &SdoProblem, split_blocks: bool) -> Result<String> {
    let dims = block_layout(p, split_blocks)?;
    let mut entries = Vec::new();
    push_entries(&mut entries, 0, p.c(), &dims);
    for (k, a) in p.constraints().iter().enumerate() {
        push_entries(&mut entries, k + 1, a, &dims);
    }
    entries.sort_by(|a, b| (a.0, a.1, a.2, a.3).cmp(&(b.0, b.1, b.2, b.3)));

    let mut s = String::new();
    let join = |xs: Vec<String>| xs.join(" ");
    writeln!(s, "{}", p.num_constraints()).unwrap();
    writeln!(s, "{}", dims.len()).unwrap();
    writeln!(s, "{}", join(dims.iter().map(|d| d.to_string()).collect())).unwrap();
    writeln!(s, "{}", join(p.b().iter().map(|b| format!("{b:.16e}")).collect())).unwrap();
    for (matno, blk, i, j, v) in entries {
        writeln!(s, "{matno} {blk} {i} {j} {v:.16e}").unwrap();
    }
    Ok(s)
}

pub fn write_sdpa(p: &SdoProblem, path: impl AsRef<Path>, split_blocks: bool) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, export_sdpa(p, split_blocks)?)
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed_dual::build_dual_embedding;
    use crate::embed_primal::build_primal_embedding;
    use crate::sdo::Provenance;
    use crate::soco::SocoProblem;

    fn dim2() -> SocoProblem {
        SocoProblem::new(vec![2], vec![vec![vec![1.0, 0.0]]], vec![vec![1.0, 0.0]], vec![1.0]).unwrap()
    }

    #[test]
    fn dual_embedding_of_dim_two() {
        let text = export_sdpa(&build_dual_embedding(&dim2()), false).unwrap();
        let expected = "1\n1\n2\n1.0000000000000000e0\n\
            0 1 1 1 1.0000000000000000e0\n\
            0 1 2 2 1.0000000000000000e0\n\
            1 1 1 1 1.0000000000000000e0\n\
            1 1 2 2 1.0000000000000000e0\n";
        assert_eq!(text, expected);
    }

    #[test]
    fn empty_rows_emit_nothing() {
        let p = SdoProblem::new(
            SymMatrix::identity(2),
            vec![SymMatrix::zeros(2)],
            vec![0.0],
            Provenance::Generic,
        )
        .unwrap();
        let text = export_sdpa(&p, false).unwrap();
        assert!(!text.lines().any(|l| l.starts_with("1 ")));
    }

    #[test]
    fn split_blocks() {
        let p = SocoProblem::new(
            vec![2, 3],
            vec![vec![vec![1.0, 2.0]], vec![vec![3.0, 0.0, 4.0]]],
            vec![vec![1.0, 0.0], vec![2.0, 0.0, -1.0]],
            vec![1.0],
        )
        .unwrap();
        let d = build_dual_embedding(&p);
        let text = export_sdpa(&d, true).unwrap();
        assert_eq!(text.lines().nth(2), Some("2 3"));
        assert!(text.contains("\n0 2 1 3 -1.0000000000000000e0\n"));
        assert_eq!(export_sdpa(&d, true).unwrap(), text);

        // the primal embedding carries cross-block zero constraints
        let pe = build_primal_embedding(&p);
        assert!(matches!(export_sdpa(&pe, true), Err(Error::InvalidArgument(_))));
        assert!(export_sdpa(&pe, false).is_ok());
    }
}
