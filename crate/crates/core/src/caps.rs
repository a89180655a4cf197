/// Size limits for the exhaustive enumerations.
///
/// Everything in this crate that enumerates a family (spanning trees, forests,
/// transversals, permutations) checks the relevant limit first and fails with
/// [`crate::Error::CapExceeded`] instead of running for hours.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumCaps {
    /// Largest edge count for forest enumeration.
    pub max_edges: usize,
    /// Largest vertex count for spanning-tree enumeration.
    pub max_vertices: usize,
    /// Largest side of a bipartite graph for brute-force matching counts.
    pub max_side: usize,
    /// Largest order for the permutation-sum mixed discriminant.
    pub max_md_order: usize,
    /// Largest number of subsets for transversal or unconstrained enumeration.
    pub max_subsets: usize,
}

impl Default for EnumCaps {
    fn default() -> Self {
        EnumCaps {
            max_edges: 24,
            max_vertices: 12,
            max_side: 10,
            max_md_order: 7,
            max_subsets: 1 << 22,
        }
    }
}

impl EnumCaps {
    /// Caps sized for the reduction gadgets, whose graphs have `n + n² + 1` vertices.
    pub fn gadget() -> Self {
        EnumCaps {
            max_edges: 32,
            max_vertices: 40,
            ..Self::default()
        }
    }

    /// Overrides both graph caps with one value.
    pub fn with_graph_cap(self, cap: usize) -> Self {
        EnumCaps {
            max_edges: cap,
            max_vertices: cap,
            ..self
        }
    }

    pub(crate) fn check(what: &'static str, size: usize, cap: usize) -> crate::Result<()> {
        if size > cap {
            Err(crate::Error::CapExceeded { what, size, cap })
        } else {
            Ok(())
        }
    }
}
