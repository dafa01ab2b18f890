//! Polynomial identities on the hyperplane `ξ₁ + ξ₂ + ξ₃ = 0`.
//!
//! The exact side works in big rationals and never touches floating point:
//! the factorization
//!
//! ```text
//!   ξ₁^{2k+1} + ξ₂^{2k+1} + ξ₃^{2k+1}
//!     = ξ₁ξ₂ξ₃ Σ_{i+j=2k-2} ( ξ₁^i(-ξ₂)^j + ξ₁^i(-ξ₃)^j + ξ₂^i(-ξ₃)^j )
//! ```
//!
//! is checked both pointwise over integer triads and as an identity of
//! homogeneous polynomials in `(ξ₁, ξ₂)` after eliminating `ξ₃`.
//!
//! The floating side evaluates the symmetrized trilinear weight series
//! `Σ_{k≥1} (2σ)^{2k}/(2k)! · (ξ₁^{2k+1}+ξ₂^{2k+1}+ξ₃^{2k+1})`, the
//! comparison function `Ψ`, and samples the resulting
//! `σ^{3/2}|ξ₁ξ₂ξ₃|^{5/6}e^{σΣ|ξᵢ|}` bound.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;

/// Hard cap on series terms before declaring divergence.
pub const SERIES_K_MAX: u32 = 200;
/// Relative tail target for series evaluation.
pub const SERIES_REL_TOL: f64 = 1e-12;
/// Once consecutive term-magnitude bounds shrink by at least this ratio the
/// remaining tail is bounded by twice the first omitted term.
pub const GEOMETRIC_RATIO: f64 = 0.5;

/// Exact frequency triad on the hyperplane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triad {
    xi: [BigRational; 3],
}

impl Triad {
    /// `ξ₃` is set to `-ξ₁-ξ₂`.
    pub fn new(xi1: BigRational, xi2: BigRational) -> Self {
        let xi3 = -(&xi1 + &xi2);
        Self {
            xi: [xi1, xi2, xi3],
        }
    }

    pub fn from_ints(xi1: i64, xi2: i64) -> Self {
        Self::new(
            BigRational::from_integer(xi1.into()),
            BigRational::from_integer(xi2.into()),
        )
    }

    pub fn try_from_three(xi1: BigRational, xi2: BigRational, xi3: BigRational) -> Result<Self> {
        if !(&xi1 + &xi2 + &xi3).is_zero() {
            return Err(Error::InvalidInput(format!(
                "triad ({xi1}, {xi2}, {xi3}) is off the hyperplane"
            )));
        }
        Ok(Self {
            xi: [xi1, xi2, xi3],
        })
    }

    pub fn coords(&self) -> &[BigRational; 3] {
        &self.xi
    }

    pub fn to_f64(&self) -> FreqTriad {
        let f = |q: &BigRational| q.to_f64().unwrap_or(f64::NAN);
        FreqTriad([f(&self.xi[0]), f(&self.xi[1]), f(&self.xi[2])])
    }
}

/// `ξ₁^{2k+1} + ξ₂^{2k+1} + ξ₃^{2k+1}`, exactly.
pub fn power_sum(t: &Triad, k: u32) -> BigRational {
    let e = (2 * k + 1) as i32;
    t.xi.iter().map(|x| num_traits::pow::Pow::pow(x, e)).sum()
}

fn powers(x: &BigRational, max: usize) -> Vec<BigRational> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(BigRational::one());
    for i in 1..=max {
        let next = &out[i - 1] * x;
        out.push(next);
    }
    out
}

/// Right-hand side of the factorization, exactly. Requires `k >= 1`.
pub fn factored_form(t: &Triad, k: u32) -> BigRational {
    assert!(k >= 1, "factorization is stated for k >= 1");
    let d = (2 * k - 2) as usize;
    let [a, b, c] = &t.xi;
    let pa = powers(a, d);
    let pb = powers(b, d);
    let nb = powers(&-b, d);
    let nc = powers(&-c, d);
    let mut s = BigRational::zero();
    for i in 0..=d {
        let j = d - i;
        s += &pa[i] * &nb[j] + &pa[i] * &nc[j] + &pb[i] * &nc[j];
    }
    a * b * c * s
}

/// `3ξ₁ξ₂ξ₃`, the k = 1 case.
pub fn special_case_k1(t: &Triad) -> BigRational {
    let [a, b, c] = &t.xi;
    BigRational::from_integer(3.into()) * a * b * c
}

/// `-5ξ₁ξ₂ξ₃(ξ₁ξ₂ + ξ₁ξ₃ + ξ₂ξ₃)`, the k = 2 case.
pub fn special_case_k2(t: &Triad) -> BigRational {
    let [a, b, c] = &t.xi;
    let e2 = a * b + a * c + b * c;
    BigRational::from_integer((-5).into()) * a * b * c * e2
}

/// Homogeneous polynomial in `(ξ₁, ξ₂)` of fixed degree: `coeffs[i]` is the
/// coefficient of `ξ₁^i ξ₂^{deg-i}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomPoly {
    coeffs: Vec<BigInt>,
}

impl HomPoly {
    fn constant(c: i64) -> Self {
        Self {
            coeffs: vec![BigInt::from(c)],
        }
    }

    /// `a ξ₁ + b ξ₂`.
    fn linear(a: i64, b: i64) -> Self {
        Self {
            coeffs: vec![BigInt::from(b), BigInt::from(a)],
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    fn mul(&self, other: &HomPoly) -> HomPoly {
        let mut coeffs = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        HomPoly { coeffs }
    }

    fn add(&self, other: &HomPoly) -> HomPoly {
        assert_eq!(self.degree(), other.degree(), "homogeneous degrees differ");
        HomPoly {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    fn pow(&self, e: usize) -> HomPoly {
        let mut out = HomPoly::constant(1);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    fn powers(&self, max: usize) -> Vec<HomPoly> {
        let mut out = vec![HomPoly::constant(1)];
        for i in 1..=max {
            let next = out[i - 1].mul(self);
            out.push(next);
        }
        out
    }
}

/// Both sides of the factorization expanded in `(ξ₁, ξ₂)` with
/// `ξ₃ = -ξ₁ - ξ₂`.
pub fn symbolic_sides(k: u32) -> (HomPoly, HomPoly) {
    assert!(k >= 1);
    let x1 = HomPoly::linear(1, 0);
    let x2 = HomPoly::linear(0, 1);
    let x3 = HomPoly::linear(-1, -1);
    let e = (2 * k + 1) as usize;
    let lhs = x1.pow(e).add(&x2.pow(e)).add(&x3.pow(e));

    let d = (2 * k - 2) as usize;
    let p1 = x1.powers(d);
    let p2 = x2.powers(d);
    let n2 = HomPoly::linear(0, -1).powers(d);
    let n3 = HomPoly::linear(1, 1).powers(d);
    let mut sum: Option<HomPoly> = None;
    for i in 0..=d {
        let j = d - i;
        let term = p1[i]
            .mul(&n2[j])
            .add(&p1[i].mul(&n3[j]))
            .add(&p2[i].mul(&n3[j]));
        sum = Some(match sum {
            None => term,
            Some(s) => s.add(&term),
        });
    }
    let rhs = x1.mul(&x2).mul(&x3).mul(&sum.expect("d >= 0"));
    (lhs, rhs)
}

/// Named special case checked alongside the general identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialCase {
    pub k: u32,
    pub label: String,
    pub holds: bool,
}

/// Outcome of the exhaustive + symbolic verification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub k_max: u32,
    pub coordinate_range: i64,
    pub triads_tested: usize,
    pub evaluations: usize,
    pub all_equal: bool,
    /// Largest |lhs - rhs| seen, as an exact rational string (must be "0").
    pub max_defect: String,
    pub symbolic_k_max: u32,
    pub symbolic_equal: bool,
    pub special_cases: Vec<SpecialCase>,
}

/// All integer triads on the hyperplane with every |ξᵢ| <= range.
pub fn integer_triads(range: i64) -> Vec<(i64, i64)> {
    let mut out = Vec::new();
    for a in -range..=range {
        for b in -range..=range {
            if (a + b).abs() <= range {
                out.push((a, b));
            }
        }
    }
    out
}

/// Check `power_sum == factored_form` for every integer triad with
/// coordinates in `[-range, range]` and every `k = 1..=k_max`, and compare
/// the two sides as polynomials for the same `k` range. Errors with the
/// first counterexample if anything differs.
pub fn verify_factor_identity(k_max: u32, coordinate_range: i64) -> Result<IdentityReport> {
    if k_max < 1 {
        return Err(Error::InvalidInput("k_max must be >= 1".into()));
    }
    if coordinate_range < 0 {
        return Err(Error::InvalidInput("coordinate_range must be >= 0".into()));
    }
    let triads = integer_triads(coordinate_range);
    // One task per triad; each returns its worst defect or a counterexample.
    let results: Vec<std::result::Result<BigRational, (u32, Triad)>> =
        par::map_slice(&triads, |&(a, b)| {
            let t = Triad::from_ints(a, b);
            let mut worst = BigRational::zero();
            for k in 1..=k_max {
                let diff = (power_sum(&t, k) - factored_form(&t, k)).abs();
                if !diff.is_zero() {
                    return Err((k, t));
                }
                if diff > worst {
                    worst = diff;
                }
            }
            let k1 = power_sum(&t, 1) - special_case_k1(&t);
            let k2 = if k_max >= 2 {
                power_sum(&t, 2) - special_case_k2(&t)
            } else {
                BigRational::zero()
            };
            if !k1.is_zero() {
                return Err((1, t));
            }
            if !k2.is_zero() {
                return Err((2, t));
            }
            Ok(worst)
        });
    let mut max_defect = BigRational::zero();
    for r in results {
        match r {
            Ok(d) => {
                if d > max_defect {
                    max_defect = d;
                }
            }
            Err((k, t)) => {
                let [a, b, c] = t.coords();
                return Err(Error::IdentityViolation {
                    k,
                    xi1: a.to_string(),
                    xi2: b.to_string(),
                    xi3: c.to_string(),
                });
            }
        }
    }

    let symbolic: Vec<bool> = par::map_range(k_max as usize, |i| {
        let (l, r) = symbolic_sides(i as u32 + 1);
        l == r
    });
    if let Some(bad) = symbolic.iter().position(|ok| !ok) {
        return Err(Error::IdentityViolation {
            k: bad as u32 + 1,
            xi1: "ξ₁".into(),
            xi2: "ξ₂".into(),
            xi3: "-ξ₁-ξ₂".into(),
        });
    }
    let special_cases = vec![
        SpecialCase {
            k: 1,
            label: "3·ξ₁ξ₂ξ₃".into(),
            holds: symbolic_special_k1(),
        },
        SpecialCase {
            k: 2,
            label: "−5·ξ₁ξ₂ξ₃·e₂".into(),
            holds: symbolic_special_k2(),
        },
    ];

    Ok(IdentityReport {
        k_max,
        coordinate_range,
        triads_tested: triads.len(),
        evaluations: triads.len() * k_max as usize,
        all_equal: max_defect.is_zero(),
        max_defect: max_defect.to_string(),
        symbolic_k_max: k_max,
        symbolic_equal: true,
        special_cases,
    })
}

fn symbolic_special_k1() -> bool {
    let (lhs, _) = symbolic_sides(1);
    let x1 = HomPoly::linear(1, 0);
    let x2 = HomPoly::linear(0, 1);
    let x3 = HomPoly::linear(-1, -1);
    let rhs = HomPoly::constant(3).mul(&x1).mul(&x2).mul(&x3);
    lhs == rhs
}

fn symbolic_special_k2() -> bool {
    let (lhs, _) = symbolic_sides(2);
    let x1 = HomPoly::linear(1, 0);
    let x2 = HomPoly::linear(0, 1);
    let x3 = HomPoly::linear(-1, -1);
    let e2 = x1.mul(&x2).add(&x1.mul(&x3)).add(&x2.mul(&x3));
    let rhs = HomPoly::constant(-5).mul(&x1).mul(&x2).mul(&x3).mul(&e2);
    lhs == rhs
}

/// Floating-point triad with `ξ₃ = -ξ₁ - ξ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreqTriad(pub [f64; 3]);

impl FreqTriad {
    pub fn new(xi1: f64, xi2: f64) -> Self {
        Self([xi1, xi2, -(xi1 + xi2)])
    }

    pub fn product(&self) -> f64 {
        self.0[0] * self.0[1] * self.0[2]
    }

    pub fn abs_sum(&self) -> f64 {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.0.contains(&0.0)
    }
}

/// A truncated series with its certified tail bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Index of the last term included.
    pub last_k: u32,
    pub tail_bound: f64,
}

/// Sum `Σ_{k≥k0} Σ_i term_i(k)` where each component obeys
/// `term_i(k) = term_i(k-1) · ratio_i(k)`. Terms are added until at least
/// `k_cut` is reached, the bound on component magnitudes decays by
/// [`GEOMETRIC_RATIO`] per step, and twice the next bound is below
/// [`SERIES_REL_TOL`] times the partial sum.
fn sum_component_series<R>(first: [f64; 3], k0: u32, k_cut: u32, ratio: R) -> Result<SeriesValue>
where
    R: Fn(usize, u32) -> f64,
{
    let mut terms = first;
    let mut value: f64 = terms.iter().sum();
    let mut k = k0;
    loop {
        let next: [f64; 3] = [
            terms[0] * ratio(0, k + 1),
            terms[1] * ratio(1, k + 1),
            terms[2] * ratio(2, k + 1),
        ];
        let bound_now: f64 = terms.iter().map(|t| t.abs()).sum();
        let bound_next: f64 = next.iter().map(|t| t.abs()).sum();
        if !(bound_next.is_finite() && value.is_finite()) {
            return Err(Error::SeriesDivergence { k_max: k });
        }
        let geometric = bound_next <= GEOMETRIC_RATIO * bound_now;
        let tail = 2.0 * bound_next;
        if k >= k_cut && geometric && tail <= SERIES_REL_TOL * value.abs() {
            return Ok(SeriesValue {
                value,
                last_k: k,
                tail_bound: tail,
            });
        }
        if bound_next == 0.0 && k >= k_cut {
            return Ok(SeriesValue {
                value,
                last_k: k,
                tail_bound: 0.0,
            });
        }
        if k >= SERIES_K_MAX {
            return Err(Error::SeriesDivergence {
                k_max: SERIES_K_MAX,
            });
        }
        k += 1;
        terms = next;
        value += terms.iter().sum::<f64>();
    }
}

/// `Σ_{k≥1} (2σ)^{2k}/(2k)! (ξ₁^{2k+1}+ξ₂^{2k+1}+ξ₃^{2k+1})`, summed at
/// least through `k_cut` and then until the certified tail is below
/// `1e-12` of the partial sum.
pub fn series_symmetrized(t: FreqTriad, sigma: f64, k_cut: u32) -> Result<SeriesValue> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "sigma must be >= 0, got {sigma}"
        )));
    }
    if sigma == 0.0 || t.is_degenerate() && t.0.iter().all(|&x| x == 0.0) {
        return Ok(SeriesValue {
            value: 0.0,
            last_k: 0,
            tail_bound: 0.0,
        });
    }
    let z: [f64; 3] = [
        (2.0 * sigma * t.0[0]).powi(2),
        (2.0 * sigma * t.0[1]).powi(2),
        (2.0 * sigma * t.0[2]).powi(2),
    ];
    // k = 1 component: ξ (2σξ)²/2!.
    let first = [
        t.0[0] * z[0] / 2.0,
        t.0[1] * z[1] / 2.0,
        t.0[2] * z[2] / 2.0,
    ];
    sum_component_series(first, 1, k_cut.max(1), |i, k| {
        let kk = k as f64;
        z[i] / ((2.0 * kk) * (2.0 * kk - 1.0))
    })
}

/// `Ψ(ξ) = Σ_{k≥0} 2^{2k}/(2k+1)! |ξ₁ξ₂ξ₃|^{1/6} (ξ₁^{2k}+ξ₂^{2k}+ξ₃^{2k})`.
pub fn psi(t: FreqTriad) -> f64 {
    let prefactor = t.product().abs().powf(1.0 / 6.0);
    if prefactor == 0.0 {
        return 0.0;
    }
    let z: [f64; 3] = [
        (2.0 * t.0[0]).powi(2),
        (2.0 * t.0[1]).powi(2),
        (2.0 * t.0[2]).powi(2),
    ];
    let s = sum_component_series([1.0, 1.0, 1.0], 0, 0, |i, k| {
        let kk = k as f64;
        z[i] / ((2.0 * kk) * (2.0 * kk + 1.0))
    });
    // Terms are positive and factorially decaying; if the cap is hit the
    // argument is far outside f64 range anyway.
    match s {
        Ok(v) => prefactor * v.value,
        Err(_) => f64::INFINITY,
    }
}

/// Seeded hyperplane triads: ξ₁, ξ₂ uniform on `[-range, range]`.
pub fn sample_triads(samples: usize, range: f64, seed: u64) -> Vec<FreqTriad> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let a = rng.random_range(-range..=range);
            let b = rng.random_range(-range..=range);
            FreqTriad::new(a, b)
        })
        .collect()
}

/// Default seed for triad sampling.
pub const TRIAD_SEED: u64 = 0x5eed_3a3b;
/// Default coordinate range for triad sampling.
pub const TRIAD_RANGE: f64 = 20.0;

/// Empirical constant of `|series| <= C σ^{3/2}|ξ₁ξ₂ξ₃|^{5/6}e^{σΣ|ξᵢ|}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FabBoundRecord {
    pub sigma: f64,
    pub samples: usize,
    pub used: usize,
    pub skipped_degenerate: usize,
    pub max_ratio: f64,
    pub argmax: [f64; 3],
    pub seed: u64,
    pub range: f64,
}

/// Sample triads and report the largest
/// `|series| / (σ^{3/2}|ξ₁ξ₂ξ₃|^{5/6}e^{σΣ|ξᵢ|})`. Triads with a zero
/// coordinate make both sides vanish and are skipped.
pub fn check_fab_bound(
    samples: usize,
    sigma: f64,
    seed: u64,
    range: f64,
) -> Result<FabBoundRecord> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidInput(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let triads = sample_triads(samples, range, seed);
    let ratios: Vec<Result<Option<f64>>> = par::map_slice(&triads, |t| {
        if t.is_degenerate() {
            return Ok(None);
        }
        let s = series_symmetrized(*t, sigma, 1)?;
        let denom =
            sigma.powf(1.5) * t.product().abs().powf(5.0 / 6.0) * (sigma * t.abs_sum()).exp();
        Ok(Some(s.value.abs() / denom))
    });
    let mut used = 0;
    let mut skipped = 0;
    let mut best = (0.0, [0.0; 3]);
    for (r, t) in ratios.into_iter().zip(&triads) {
        match r? {
            None => skipped += 1,
            Some(v) => {
                used += 1;
                if v > best.0 {
                    best = (v, t.0);
                }
            }
        }
    }
    Ok(FabBoundRecord {
        sigma,
        samples,
        used,
        skipped_degenerate: skipped,
        max_ratio: best.0,
        argmax: best.1,
        seed,
        range,
    })
}

/// Largest `Ψ(ξ) / e^{Σ|ξᵢ|}` over seeded triads.
pub fn psi_constant(samples: usize, seed: u64, range: f64) -> f64 {
    let triads = sample_triads(samples, range, seed);
    par::map_slice(&triads, |t| psi(*t) / t.abs_sum().exp())
        .into_iter()
        .fold(0.0, f64::max)
}

/// Exponents of the fractional almost conservation law and radius bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundExponents {
    pub epsilon0: f64,
    /// Defect exponent: energy grows by at most `C δ σ^β ‖Iu₀‖³`.
    pub beta: f64,
    /// Radius decay exponent: `σ(t) >= c t^{-μ}`.
    pub mu: f64,
}

/// Knee where the exponents switch branch.
pub const ALPHA_KNEE: f64 = 7.0 / 3.0;

pub fn fractional_bound_exponents(alpha: f64) -> Result<BoundExponents> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "alpha must exceed 1, got {alpha}"
        )));
    }
    let epsilon0 = (alpha / 2.0 - 1.0 / 6.0).min(1.0);
    let (beta, mu) = if alpha < ALPHA_KNEE {
        (1.5 * (alpha - 1.0), 2.0 / (3.0 * (alpha - 1.0)))
    } else {
        (2.0, 0.5)
    };
    Ok(BoundExponents { epsilon0, beta, mu })
}
