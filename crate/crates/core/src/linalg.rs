//! Exact dense linear algebra over the rationals.
//!
//! Everything here is exact: determinants use fraction-free (Bareiss) elimination on
//! integer-scaled rows, characteristic polynomials use the division-free Berkowitz
//! recurrence, and positive semi-definiteness is decided from the signs of the
//! characteristic polynomial coefficients rather than from (irrational) eigenvalues.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub type Label = String;

/// Square matrix rows. Used for intermediate, not necessarily symmetric, matrices.
pub type Rows = Vec<Vec<Rational>>;

/// A symmetric rational matrix indexed by a set of unique labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymMatrix {
    labels: Vec<Label>,
    entries: Rows,
    index: HashMap<Label, usize>,
}

impl SymMatrix {
    pub fn new(labels: Vec<Label>, entries: Rows) -> Result<Self> {
        let n = entries.len();
        if labels.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: labels.len(),
            });
        }
        for row in &entries {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        let index = label_index(&labels)?;
        Ok(SymMatrix {
            labels,
            entries,
            index,
        })
    }

    /// Matrix with default labels `"1"`, `"2"`, ...
    pub fn from_rows(entries: Rows) -> Result<Self> {
        let labels = (1..=entries.len()).map(|i| i.to_string()).collect();
        Self::new(labels, entries)
    }

    pub fn from_i64(rows: &[&[i64]]) -> Result<Self> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from_integer(v.into())).collect())
                .collect(),
        )
    }

    pub fn identity(labels: Vec<Label>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, identity_rows(n))
    }

    pub fn zeros(labels: Vec<Label>) -> Result<Self> {
        let n = labels.len();
        Self::new(labels, vec![vec![Rational::zero(); n]; n])
    }

    /// Gram matrix `V Vᵀ` of the given row vectors.
    pub fn gram(labels: Vec<Label>, vectors: &[Vec<Rational>]) -> Result<Self> {
        let n = vectors.len();
        let mut entries = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in i..n {
                let dot = dot(&vectors[i], &vectors[j]);
                entries[j][i] = dot.clone();
                entries[i][j] = dot;
            }
        }
        Self::new(labels, entries)
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn rows(&self) -> &Rows {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels
            .iter()
            .map(|l| {
                self.index_of(l.as_ref())
                    .ok_or_else(|| Error::UnknownLabel(l.as_ref().to_string()))
            })
            .collect()
    }

    pub fn submatrix(&self, idx: &[usize]) -> Rows {
        idx.iter()
            .map(|&i| idx.iter().map(|&j| self.entries[i][j].clone()).collect())
            .collect()
    }

    /// Restriction to the given indices, keeping their labels.
    pub fn restrict(&self, idx: &[usize]) -> SymMatrix {
        let labels = idx.iter().map(|&i| self.labels[i].clone()).collect();
        SymMatrix::new(labels, self.submatrix(idx)).expect("restriction of a valid matrix")
    }

    pub fn det(&self) -> Rational {
        det_bareiss(&self.entries).expect("square by construction")
    }

    /// `e_1..e_n`, where `e_k` is the sum of all `k x k` principal minors.
    pub fn char_poly_coeffs(&self) -> Vec<Rational> {
        // det(λI - M) = λⁿ + c_1 λⁿ⁻¹ + ... + c_n and e_k = (-1)^k c_k.
        berkowitz(&self.entries)
            .into_iter()
            .skip(1)
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { -c } else { c })
            .collect()
    }

    pub fn is_psd(&self) -> bool {
        self.char_poly_coeffs().iter().all(|e| !e.is_negative())
    }

    pub fn ldlt(&self) -> Result<Ldlt> {
        ldlt(self)
    }
}

fn label_index(labels: &[Label]) -> Result<HashMap<Label, usize>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.clone(), i).is_some() {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(index)
}

pub fn identity_rows(n: usize) -> Rows {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                .collect()
        })
        .collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mat_mul(a: &Rows, b: &Rows) -> Rows {
    let inner = b.len();
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| (0..inner).map(|k| &row[k] * &b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn transpose(a: &Rows) -> Rows {
    let cols = a.first().map_or(0, Vec::len);
    (0..cols)
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

fn check_square(m: &Rows) -> Result<usize> {
    let n = m.len();
    match m.iter().find(|r| r.len() != n) {
        Some(r) => Err(Error::NotSquare {
            rows: n,
            cols: r.len(),
        }),
        None => Ok(n),
    }
}

/// Exact determinant by fraction-free Bareiss elimination.
///
/// Rows are first scaled to integers by the lcm of their denominators. Pivoting takes the
/// first nonzero entry of the column; each row swap flips the sign. The empty matrix has
/// determinant 1.
pub fn det_bareiss(m: &Rows) -> Result<Rational> {
    let n = check_square(m)?;
    if n == 0 {
        return Ok(Rational::one());
    }
    let mut scale = BigInt::one();
    let mut a: Vec<Vec<BigInt>> = Vec::with_capacity(n);
    for row in m {
        let lcm = row
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        a.push(
            row.iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect(),
        );
        scale *= lcm;
    }

    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    negate = !negate;
                }
                None => return Ok(Rational::zero()),
            }
        }
        let (top, bottom) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in bottom.iter_mut() {
            for j in k + 1..n {
                let v = &row[j] * &pivot_row[k] - &row[k] * &pivot_row[j];
                // Exact by Sylvester's identity.
                row[j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let det = a[n - 1][n - 1].clone();
    let det = if negate { -det } else { det };
    Ok(Rational::new(det, scale))
}

/// Coefficients `(1, c_1, ..., c_n)` of `det(λI - M)` by the Berkowitz recurrence.
///
/// Division-free; works for any square matrix.
pub fn berkowitz(m: &Rows) -> Vec<Rational> {
    let n = m.len();
    let mut poly = vec![Rational::one()];
    for r in 0..n {
        // Leading block M_r (r x r), column c = M[0..r][r], row s = M[r][0..r], a = M[r][r].
        let a = &m[r][r];
        let mut toeplitz = Vec::with_capacity(r + 2);
        toeplitz.push(Rational::one());
        toeplitz.push(-a.clone());
        let mut v: Vec<Rational> = (0..r).map(|i| m[i][r].clone()).collect();
        for _ in 0..r {
            let sv: Rational = (0..r).map(|j| &m[r][j] * &v[j]).sum();
            toeplitz.push(-sv);
            v = (0..r)
                .map(|i| (0..r).map(|j| &m[i][j] * &v[j]).sum())
                .collect();
        }
        let mut next = vec![Rational::zero(); r + 2];
        for (i, slot) in next.iter_mut().enumerate() {
            for (j, p) in poly.iter().enumerate() {
                if i >= j {
                    *slot += &toeplitz[i - j] * p;
                }
            }
        }
        poly = next;
    }
    poly
}

/// `P M Pᵀ = L diag(d) Lᵀ` with `L` unit lower triangular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ldlt {
    pub l: Rows,
    pub d: Vec<Rational>,
    /// `perm[k]` is the original index placed at position `k`.
    pub perm: Vec<usize>,
}

impl Ldlt {
    /// `L diag(d) Lᵀ`, i.e. the permuted input.
    pub fn reconstruct_permuted(&self) -> Rows {
        let n = self.d.len();
        let mut out = vec![vec![Rational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                out[i][j] = (0..n)
                    .map(|k| &self.l[i][k] * &self.d[k] * &self.l[j][k])
                    .sum();
            }
        }
        out
    }

    /// Vectors `u_k` (in original coordinates) with `M = Σ_k d_k u_k u_kᵀ`.
    pub fn factor_vectors(&self) -> Vec<Vec<Rational>> {
        let n = self.d.len();
        (0..n)
            .map(|k| {
                let mut u = vec![Rational::zero(); n];
                for pos in 0..n {
                    u[self.perm[pos]] = self.l[pos][k].clone();
                }
                u
            })
            .collect()
    }

    pub fn rank(&self) -> usize {
        self.d.iter().filter(|x| !x.is_zero()).count()
    }
}

/// Symmetric-pivoted LDLᵀ of a PSD matrix.
///
/// The pivot is the largest remaining diagonal entry, ties broken by the lowest original
/// index. Once the largest remaining diagonal is zero the rest of the matrix must vanish;
/// the remaining `d` are zero and the corresponding columns of `L` are unit columns.
pub fn ldlt(m: &SymMatrix) -> Result<Ldlt> {
    let n = m.dim();
    let mut work = m.rows().clone();
    let mut l = identity_rows(n);
    let mut d = vec![Rational::zero(); n];
    let mut perm: Vec<usize> = (0..n).collect();

    for k in 0..n {
        let mut best = k;
        for i in k + 1..n {
            let better = work[i][i] > work[best][best]
                || (work[i][i] == work[best][best] && perm[i] < perm[best]);
            if better {
                best = i;
            }
        }
        if work[best][best].is_negative() {
            return Err(Error::NotPsd);
        }
        if work[best][best].is_zero() {
            let rest_zero = (k..n).all(|i| (k..n).all(|j| work[i][j].is_zero()));
            if !rest_zero {
                return Err(Error::NotPsd);
            }
            break;
        }
        if best != k {
            work.swap(k, best);
            for row in work.iter_mut() {
                row.swap(k, best);
            }
            for c in 0..k {
                let tmp = l[k][c].clone();
                l[k][c] = std::mem::replace(&mut l[best][c], tmp);
            }
            perm.swap(k, best);
        }
        let pivot = work[k][k].clone();
        for i in k + 1..n {
            l[i][k] = &work[i][k] / &pivot;
        }
        for i in k + 1..n {
            if work[i][k].is_zero() {
                continue;
            }
            let factor = &l[i][k];
            for j in k + 1..n {
                let delta = factor * &work[k][j];
                work[i][j] -= delta;
            }
        }
        for i in k + 1..n {
            work[i][k] = Rational::zero();
            work[k][i] = Rational::zero();
        }
        d[k] = pivot;
    }
    Ok(Ldlt { l, d, perm })
}

/// A PSD base matrix together with positive per-index weights.
///
/// Represents `W^{1/2} A W^{1/2}` for `W = diag(weights)` without taking square roots: every
/// principal minor is `(Π_{a∈S} w_a) det(A_S)`, which stays rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedPSD {
    base: SymMatrix,
    weights: Vec<Rational>,
}

impl WeightedPSD {
    pub fn new(base: SymMatrix, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                found: weights.len(),
            });
        }
        if let Some(i) = weights.iter().position(|w| !w.is_positive()) {
            return Err(Error::NonPositiveWeight(base.labels()[i].clone()));
        }
        if !base.is_psd() {
            return Err(Error::NotPsd);
        }
        Ok(WeightedPSD { base, weights })
    }

    pub fn unit(base: SymMatrix) -> Result<Self> {
        let n = base.dim();
        Self::new(base, vec![Rational::one(); n])
    }

    pub fn base(&self) -> &SymMatrix {
        &self.base
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.base.dim()
    }

    pub fn labels(&self) -> &[Label] {
        self.base.labels()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.base.index_of(label)
    }

    /// Principal minor on a set of labels.
    pub fn principal_minor<S: AsRef<str>>(&self, subset: &[S]) -> Result<Rational> {
        let idx = self.base.indices_of(subset)?;
        Ok(self.principal_minor_idx(&idx))
    }

    /// Principal minor on a set of indices (assumed distinct and in range).
    pub fn principal_minor_idx(&self, idx: &[usize]) -> Rational {
        let det = det_bareiss(&self.base.submatrix(idx)).expect("square");
        if det.is_zero() {
            return det;
        }
        idx.iter().fold(det, |acc, &i| acc * &self.weights[i])
    }

    /// `det(W^{1/2} A W^{1/2} + I)`, computed as `det(A W + I)`.
    pub fn unconstrained_normalizer(&self) -> Rational {
        let n = self.dim();
        let mut m = self.base.rows().clone();
        for (i, row) in m.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x *= &self.weights[j];
                if i == j {
                    *x += Rational::one();
                }
            }
        }
        debug_assert_eq!(m.len(), n);
        det_bareiss(&m).expect("square")
    }

    /// Same base, every weight multiplied by `factor`.
    pub fn scale_weights(&self, factor: &Rational) -> Result<Self> {
        if !factor.is_positive() {
            return Err(Error::NonPositiveFactor(factor.to_string()));
        }
        Ok(WeightedPSD {
            base: self.base.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
        })
    }

    /// Same base, weight of index `i` multiplied by `factors[i]`.
    pub fn reweight(&self, factors: &[Rational]) -> Result<Self> {
        if factors.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: factors.len(),
            });
        }
        if let Some(f) = factors.iter().find(|f| !f.is_positive()) {
            return Err(Error::NonPositiveFactor(f.to_string()));
        }
        Ok(WeightedPSD {
            base: self.base.clone(),
            weights: self.weights.iter().zip(factors).map(|(w, f)| w * f).collect(),
        })
    }

    /// Restriction to a subset of indices.
    pub fn restrict(&self, idx: &[usize]) -> WeightedPSD {
        WeightedPSD {
            base: self.base.restrict(idx),
            weights: idx.iter().map(|&i| self.weights[i].clone()).collect(),
        }
    }
}
