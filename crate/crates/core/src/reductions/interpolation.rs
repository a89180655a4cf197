use num_traits::Zero;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::WeightedPSD;
use crate::rational::{int, Rational};

use super::oracle::{Family, NormalizerOracle};

/// Coefficient of `x^degree_bound` in the polynomial of degree at most `degree_bound`
/// through the given points.
///
/// The first `degree_bound + 1` points determine the polynomial; any further points must
/// lie on it.
pub fn lagrange_leading_coeff(points: &[(Rational, Rational)], degree_bound: usize) -> Result<Rational> {
    let k = degree_bound + 1;
    if points.len() < k {
        return Err(Error::Interpolation(format!(
            "need {k} points for degree {degree_bound}, got {}",
            points.len()
        )));
    }
    for (i, (xi, _)) in points.iter().enumerate() {
        if points[..i].iter().any(|(xj, _)| xj == xi) {
            return Err(Error::Interpolation(format!("duplicate x = {xi}")));
        }
    }
    let basis = &points[..k];
    let leading: Rational = basis
        .iter()
        .enumerate()
        .map(|(i, (xi, yi))| {
            let denom: Rational = basis
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, (xj, _))| xi - xj)
                .product();
            yi / denom
        })
        .sum();
    for (x, y) in &points[k..] {
        if evaluate(basis, x) != *y {
            return Err(Error::Interpolation(format!("point ({x}, {y}) is off the interpolant")));
        }
    }
    Ok(leading)
}

/// Lagrange form evaluated at `x`.
fn evaluate(basis: &[(Rational, Rational)], x: &Rational) -> Rational {
    basis
        .iter()
        .enumerate()
        .map(|(i, (xi, yi))| {
            basis
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .fold(yi.clone(), |acc, (_, (xj, _))| acc * (x - xj) / (xi - xj))
        })
        .sum()
}

/// `Z_T(A, G)` from `Z_F(xA, G)` at `x = 1..|V|`.
///
/// `Z_F(xA, G) = Σ_{S ∈ F} x^{|S|} det(A_S)` has degree at most `|V| - 1`, and its top
/// coefficient collects exactly the spanning trees.
pub fn zt_via_zf(a: &WeightedPSD, g: &Graph, oracle: &mut dyn NormalizerOracle) -> Result<Rational> {
    if !oracle.is_exact() {
        return Err(Error::InexactOracle);
    }
    if oracle.family() != Family::Forest {
        return Err(Error::MalformedOracle("interpolation needs a forest oracle".into()));
    }
    let n = g.vertex_count().max(1);
    let mut points = Vec::with_capacity(n);
    for x in 1..=n {
        let x = int(x as i64);
        let scaled = a.scale_weights(&x)?;
        let z = oracle.query(&scaled, g, &Rational::zero())?;
        points.push((x, z));
    }
    lagrange_leading_coeff(&points, n - 1)
}
