//! Mixed discriminants and their encoding as a partition-constrained DPP normalizer.

use num_traits::{One, Zero};

use crate::caps::EnumCaps;
use crate::error::{Error, Result};
use crate::linalg::{det_bareiss, Label, SymMatrix, WeightedPSD};
use crate::rational::Rational;

/// `n` PSD matrices of order `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MDInstance {
    matrices: Vec<SymMatrix>,
}

impl MDInstance {
    pub fn new(matrices: Vec<SymMatrix>) -> Result<Self> {
        let n = matrices.len();
        for k in &matrices {
            if k.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: k.dim(),
                });
            }
            if !k.is_psd() {
                return Err(Error::NotPsd);
            }
        }
        Ok(MDInstance { matrices })
    }

    pub fn order(&self) -> usize {
        self.matrices.len()
    }

    pub fn matrices(&self) -> &[SymMatrix] {
        &self.matrices
    }

    /// `D(K¹, ..., Kⁿ)`, the coefficient of `x_1⋯x_n` in `det(Σ x_i Kⁱ)`.
    ///
    /// Expanding the determinant multilinearly in its columns, that coefficient is the sum
    /// over permutations `σ` of the determinant whose `j`-th column is column `j` of `K^σ(j)`.
    pub fn mixed_discriminant(&self, caps: &EnumCaps) -> Result<Rational> {
        let n = self.order();
        EnumCaps::check("mixed discriminant order", n, caps.max_md_order)?;
        let mut total = Rational::zero();
        for_each_permutation(n, |sigma| {
            let m: Vec<Vec<Rational>> = (0..n)
                .map(|r| (0..n).map(|c| self.matrices[sigma[c]].get(r, c).clone()).collect())
                .collect();
            total += det_bareiss(&m).expect("square");
        });
        Ok(total)
    }
}

/// Heap's algorithm; `visit` sees each permutation of `0..n` once.
fn for_each_permutation<F: FnMut(&[usize])>(n: usize, mut visit: F) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    visit(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            visit(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// A weighted PSD matrix on `n²` labels with an equal-sized partition into `n` parts, such
/// that the transversal sum of principal minors equals `scale · D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartitionInstance {
    pub matrix: WeightedPSD,
    pub parts: Vec<Vec<Label>>,
    pub scale: Rational,
}

impl PartitionInstance {
    pub fn new(matrix: WeightedPSD, parts: Vec<Vec<Label>>, scale: Rational) -> Result<Self> {
        let n = parts.len();
        if parts.iter().any(|p| p.len() != n) || matrix.dim() != n * n {
            return Err(Error::InvalidPartition(format!(
                "expected {n} parts of size {n} over {} labels",
                n * n
            )));
        }
        let mut seen = vec![false; matrix.dim()];
        for label in parts.iter().flatten() {
            let i = matrix
                .index_of(label)
                .ok_or_else(|| Error::InvalidPartition(format!("unknown label `{label}`")))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidPartition(format!("label `{label}` repeated")));
            }
        }
        Ok(PartitionInstance { matrix, parts, scale })
    }

    pub fn order(&self) -> usize {
        self.parts.len()
    }
}

/// Label of the `j`-th factor vector of `Kⁱ` (both 1-based).
pub fn pair_label(i: usize, j: usize) -> Label {
    format!("{i}.{j}")
}

/// Encodes `D(K¹..Kⁿ)` as a partition-constrained sum.
///
/// Each `Kⁱ = Σ_j d_j u_j u_jᵀ` by LDLᵀ. Label `(i, j)` gets the vector `u_j` of `Kⁱ` and
/// weight `d_j`; the base matrix is the Gram matrix of all `n²` vectors and part `i` holds
/// the labels of `Kⁱ`. By multilinearity and Cauchy–Binet, a transversal
/// `(1, j_1), ..., (n, j_n)` has minor `Π d_{j_i} det[u_{j_1} ⋯ u_{j_n}]²`, and these sum to
/// `D`, so `scale = 1`. Zero pivots get a zero vector and unit weight.
pub fn build_partition_instance(k: &MDInstance) -> Result<PartitionInstance> {
    let n = k.order();
    let mut labels = Vec::with_capacity(n * n);
    let mut vectors = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    let mut parts = Vec::with_capacity(n);
    for (i, ki) in k.matrices().iter().enumerate() {
        let f = ki.ldlt()?;
        let mut part = Vec::with_capacity(n);
        for (j, (u, d)) in f.factor_vectors().into_iter().zip(f.d).enumerate() {
            let label = pair_label(i + 1, j + 1);
            if d.is_zero() {
                vectors.push(vec![Rational::zero(); n]);
                weights.push(Rational::one());
            } else {
                vectors.push(u);
                weights.push(d);
            }
            labels.push(label.clone());
            part.push(label);
        }
        parts.push(part);
    }
    let base = SymMatrix::gram(labels, &vectors)?;
    let matrix = WeightedPSD::new(base, weights)?;
    PartitionInstance::new(matrix, parts, Rational::one())
}
