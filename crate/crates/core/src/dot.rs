//! Graphviz export of 𝒢_p for small p.

use std::fmt::Write;

use thiserror::Error;

use crate::field::Prime;
use crate::surface::{SurfaceError, VertexSet, VietaMove};

/// Largest p exported without `force`.
pub const DOT_SIZE_GUARD: u64 = 13;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DotError {
    #[error("p = {p} exceeds the export limit of {limit}; pass --force to export anyway")]
    TooLarge { p: u64, limit: u64 },
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// Undirected graph text: one node per vertex labeled `x1,x2,x3`, one edge
/// per unordered pair per connecting move (labeled with the move), self
/// loops included. Nodes appear in ascending code order.
pub fn export_dot(p: Prime, force: bool) -> Result<String, DotError> {
    if p.get() > DOT_SIZE_GUARD && !force {
        return Err(DotError::TooLarge {
            p: p.get(),
            limit: DOT_SIZE_GUARD,
        });
    }
    let set = VertexSet::enumerate(p)?;
    let mut out = String::new();
    writeln!(out, "graph markoff_{p} {{").unwrap();
    for pos in 0..set.len() as u32 {
        let [a, b, c] = set.coords(pos);
        writeln!(out, "  v{} [label=\"{a},{b},{c}\"];", set.code(pos)).unwrap();
    }
    for pos in 0..set.len() as u32 {
        let here = set.code(pos);
        for (slot, next) in set.neighbor_positions(pos).into_iter().enumerate() {
            let there = set.code(next);
            if there >= here {
                let m = VietaMove::from_slot(slot);
                writeln!(out, "  v{here} -- v{there} [label=\"{m}\"];").unwrap();
            }
        }
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(text: &str, needle: &str) -> usize {
        text.lines().filter(|l| l.contains(needle)).count()
    }

    #[test]
    fn p2_has_a_self_loop_on_110() {
        let dot = export_dot(Prime::new(2).unwrap(), false).unwrap();
        assert_eq!(count(&dot, "[label=\"") - count(&dot, " -- "), 4);
        // (1,1,0) has code 6
        assert!(dot.contains("  v6 [label=\"1,1,0\"];"));
        assert!(dot.contains("  v6 -- v6 [label=\"1\"];"));
        assert_eq!(count(&dot, " -- "), 9);
    }

    #[test]
    fn p3_is_a_cube() {
        let dot = export_dot(Prime::new(3).unwrap(), false).unwrap();
        assert_eq!(count(&dot, " -- "), 12);
        assert_eq!(count(&dot, "[label=\"") - 12, 8);
    }

    #[test]
    fn p5_node_count_and_guard() {
        let dot = export_dot(Prime::new(5).unwrap(), false).unwrap();
        assert_eq!(count(&dot, "[label=\"") - count(&dot, " -- "), 40);
        assert!(dot.starts_with("graph markoff_5 {\n"));
        assert!(dot.ends_with("}\n"));
        assert_eq!(
            export_dot(Prime::new(17).unwrap(), false),
            Err(DotError::TooLarge { p: 17, limit: 13 })
        );
        assert!(export_dot(Prime::new(17).unwrap(), true).is_ok());
    }
}
