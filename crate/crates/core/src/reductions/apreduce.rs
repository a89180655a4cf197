//! Approximation-preserving reductions from the mixed discriminant to `Z_T` and `Z_F`.
//!
//! Both reductions build the md-gadget, find a positive witness tree by matroid
//! intersection, pick weights large enough that the monomials of the wanted trees dominate
//! the normalizer, call the oracle once at tolerance `ε/2`, and rescale.

use num_traits::{One, Signed, Zero};

use crate::caps::EnumCaps;
use crate::error::{Error, Result};
use crate::linalg::Label;
use crate::matroid::find_witness;
use crate::mixed::{build_partition_instance, MDInstance};
use crate::rational::{exp_lower, exp_upper, int, pow, Rational};

use super::gadget::{build_md_gadget, reweight_rank_one, GadgetInstance};
use super::oracle::{Family, NormalizerOracle};

/// Exact reference comparison for a reduction estimate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsCheck {
    /// `D` computed by the permutation expansion.
    pub reference: Rational,
    /// `scale · D`, the weight of the dominant monomial class.
    pub sigma: Rational,
    /// Rational inner bounds of the band `[e^{-ε} D, e^{ε} D]`.
    pub lower: Rational,
    pub upper: Rational,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionReport {
    pub witness: Vec<Label>,
    pub x: Rational,
    /// Only the forest reduction uses `y`; the tree reduction reports 1.
    pub y: Rational,
    pub oracle_value: Rational,
    pub estimate: Rational,
    pub epsilon: Rational,
    pub tolerance: Rational,
    pub bounds_check: Option<BoundsCheck>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReductionOutcome {
    /// No positive witness exists, so `D = 0`.
    Zero,
    Estimate(ReductionReport),
}

impl ReductionOutcome {
    pub fn value(&self) -> Rational {
        match self {
            ReductionOutcome::Zero => Rational::zero(),
            ReductionOutcome::Estimate(r) => r.estimate.clone(),
        }
    }
}

struct Prepared {
    gadget: GadgetInstance,
    witness: Vec<Label>,
    /// `det(B + I) / det(B_S̃)`
    ratio: Rational,
}

fn prepare(k: &MDInstance, epsilon: &Rational, oracle: &dyn NormalizerOracle, want: Family) -> Result<Option<Prepared>> {
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(Error::EpsilonOutOfRange(epsilon.to_string()));
    }
    if oracle.family() != want {
        return Err(Error::MalformedOracle(format!("expected a {want:?} oracle")));
    }
    let p = build_partition_instance(k)?;
    let gadget = build_md_gadget(&p)?;
    let Some(witness) = find_witness(&gadget)? else {
        return Ok(None);
    };
    let ratio = gadget.matrix.unconstrained_normalizer() / gadget.matrix.principal_minor(&witness)?;
    Ok(Some(Prepared { gadget, witness, ratio }))
}

fn bounds_check(k: &MDInstance, scale: &Rational, estimate: &Rational, epsilon: &Rational, caps: &EnumCaps) -> Option<BoundsCheck> {
    let reference = k.mixed_discriminant(caps).ok()?;
    let lower = &reference * exp_upper(&-epsilon);
    let upper = &reference * exp_lower(epsilon);
    let pass = &lower <= estimate && estimate <= &upper;
    Some(BoundsCheck {
        sigma: scale * &reference,
        reference,
        lower,
        upper,
        pass,
    })
}

/// Estimate `D(K¹..Kⁿ)` with one call to a `Z_T` oracle.
///
/// `x = det(B+I)/det(B_S̃) · 2/ε`, the oracle sees `B` with right-edge weights scaled by
/// `x²`, and the estimate is `Ẑ / (x^{2m} · scale)`. With an exact oracle the estimate lies
/// in `[D, e^{ε/2} D]`.
pub fn apreduce_md_to_zt(
    k: &MDInstance,
    epsilon: &Rational,
    oracle: &mut dyn NormalizerOracle,
    caps: &EnumCaps,
) -> Result<ReductionOutcome> {
    let Some(prep) = prepare(k, epsilon, oracle, Family::SpanningTree)? else {
        return Ok(ReductionOutcome::Zero);
    };
    let m = prep.gadget.m();
    let x = &prep.ratio * int(2) / epsilon;
    let weighted = reweight_rank_one(&prep.gadget, &Rational::one(), &x)?;
    let tolerance = epsilon / int(2);
    let z_hat = oracle.query(&weighted.matrix, &weighted.graph, &tolerance)?;
    let estimate = &z_hat / (pow(&x, 2 * m) * &prep.gadget.scale);
    Ok(ReductionOutcome::Estimate(ReductionReport {
        bounds_check: bounds_check(k, &prep.gadget.scale, &estimate, epsilon, caps),
        witness: prep.witness,
        x,
        y: Rational::one(),
        oracle_value: z_hat,
        estimate,
        epsilon: epsilon.clone(),
        tolerance,
    }))
}

/// Estimate `D(K¹..Kⁿ)` with one call to a `Z_F` oracle.
///
/// `y = r · 4/ε` and `x = r · y^{2m-2n} · 4/ε` with `r = det(B+I)/det(B_S̃)`; left weights
/// scale by `y²`, right weights by `x²`, and the estimate is `Ẑ / (x^{2m} y^{2n} · scale)`.
pub fn apreduce_md_to_zf(
    k: &MDInstance,
    epsilon: &Rational,
    oracle: &mut dyn NormalizerOracle,
    caps: &EnumCaps,
) -> Result<ReductionOutcome> {
    let Some(prep) = prepare(k, epsilon, oracle, Family::Forest)? else {
        return Ok(ReductionOutcome::Zero);
    };
    let (m, n) = (prep.gadget.m(), prep.gadget.n());
    let four_over_eps = int(4) / epsilon;
    let y = &prep.ratio * &four_over_eps;
    let x = &prep.ratio * pow(&y, 2 * m - 2 * n) * &four_over_eps;
    let weighted = reweight_rank_one(&prep.gadget, &y, &x)?;
    let tolerance = epsilon / int(2);
    let z_hat = oracle.query(&weighted.matrix, &weighted.graph, &tolerance)?;
    let estimate = &z_hat / (pow(&x, 2 * m) * pow(&y, 2 * n) * &prep.gadget.scale);
    Ok(ReductionOutcome::Estimate(ReductionReport {
        bounds_check: bounds_check(k, &prep.gadget.scale, &estimate, epsilon, caps),
        witness: prep.witness,
        x,
        y,
        oracle_value: z_hat,
        estimate,
        epsilon: epsilon.clone(),
        tolerance,
    }))
}

/// Which of the three monomial classes a forest falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForestCase {
    /// `E_r ⊆ S` and `|S ∩ E_ℓ| = n`: monomial `x^{2m} y^{2n}`.
    Dominant,
    /// `E_r ⊆ S` and `|S ∩ E_ℓ| < n`: at most `x^{2m} y^{2n-2}`.
    ShortLeft,
    /// `E_r ⊄ S`: at most `x^{2m-2} y^{2m}`.
    MissingRight,
}

/// Classifies a forest by `(|S ∩ E_r|, |S ∩ E_ℓ|)` in a gadget with `m` left edges and
/// `n` parts. `None` means the pair is impossible for a forest (more than `n` left edges with
/// all of `E_r`).
pub fn classify_forest(right: usize, left: usize, m: usize, n: usize) -> Option<ForestCase> {
    match (right == m, left.cmp(&n)) {
        (true, std::cmp::Ordering::Equal) => Some(ForestCase::Dominant),
        (true, std::cmp::Ordering::Less) => Some(ForestCase::ShortLeft),
        (true, std::cmp::Ordering::Greater) => None,
        (false, _) => Some(ForestCase::MissingRight),
    }
}

/// Checks that every forest of the gadget lands in exactly one case, that its monomial is
/// bounded by that case's cap, and that `x^{2m} y^{2n}` beats both non-dominant caps.
pub fn check_forest_cases(gadget: &GadgetInstance, x: &Rational, y: &Rational, caps: &EnumCaps) -> Result<bool> {
    let (m, n) = (gadget.m(), gadget.n());
    let right: Vec<bool> = gadget.graph.edges().iter().map(|e| gadget.is_right_edge(&e.id)).collect();
    let dominant = pow(x, 2 * m) * pow(y, 2 * n);
    let short_cap = pow(x, 2 * m) * pow(y, 2 * n - 2);
    let missing_cap = if m == 0 {
        Rational::zero()
    } else {
        pow(x, 2 * m - 2) * pow(y, 2 * m)
    };
    if short_cap > dominant || missing_cap > dominant {
        return Ok(false);
    }
    // Monomials depend only on the exponent pair, so evaluate each pair once.
    let mut pairs = std::collections::BTreeSet::new();
    gadget.graph.visit_forests(caps, |s| {
        let r = s.iter().filter(|&&e| right[e]).count();
        pairs.insert((r, s.len() - r));
    })?;
    let ok = pairs.into_iter().all(|(r, l)| {
        let mono = pow(x, 2 * r) * pow(y, 2 * l);
        match classify_forest(r, l, m, n) {
            Some(ForestCase::Dominant) => mono == dominant,
            Some(ForestCase::ShortLeft) => mono <= short_cap,
            Some(ForestCase::MissingRight) => mono <= missing_cap,
            None => false,
        }
    });
    Ok(ok)
}
