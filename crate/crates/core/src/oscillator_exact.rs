//! Closed-form spectra of `-α Δ + |x|²` in `d` dimensions,
//! `E = √α (2 j₁ + … + 2 j_d + d)`, and the Riesz means at threshold 1,
//! `p_σ(α) = α^{d/2} Σ_{E_j(α) < 1} (1 - E_j(α))^σ`, whose derivative
//! changes sign at the level crossings `α = (d + 2k)^{-2}` when `σ < 2`.

use serde::{Deserialize, Serialize};

use crate::eigensolve::{Source, Spectrum};
use crate::error::{Error, Result};
use crate::moments::MomentCurve;
use crate::special::binomial;

/// Values below this magnitude classify as [`Sign::Zero`].
pub const ZERO_THRESHOLD: f64 = 1e-8;
/// Refuse to materialize more levels than this.
pub const MAX_STATES: usize = 10_000_000;
const RICHARDSON_LEVELS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorModel {
    dimension: usize,
    alpha: f64,
}

impl OscillatorModel {
    pub fn new(dimension: usize, alpha: f64) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(Self { dimension, alpha })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `√α (2m + d)`
    pub fn level(&self, m: usize) -> f64 {
        self.alpha.sqrt() * (2 * m + self.dimension) as f64
    }

    /// Number of multi-indices with `j₁ + … + j_d = m`.
    pub fn multiplicity(&self, m: usize) -> usize {
        level_multiplicity(m, self.dimension)
    }
}

/// `C(m + d - 1, d - 1)`
pub fn level_multiplicity(m: usize, dimension: usize) -> usize {
    binomial((m + dimension - 1) as u64, (dimension - 1) as u64).round() as usize
}

/// All eigenvalues `≤ cutoff`, with multiplicity, ascending.
pub fn ho_spectrum(model: &OscillatorModel, cutoff: f64) -> Result<Spectrum> {
    let mut eigenvalues = Vec::new();
    let mut m = 0;
    while model.level(m) <= cutoff {
        let mult = model.multiplicity(m);
        if eigenvalues.len() + mult > MAX_STATES {
            return Err(Error::Config(format!(
                "cutoff {cutoff} admits more than {MAX_STATES} oscillator states"
            )));
        }
        eigenvalues.extend(std::iter::repeat_n(model.level(m), mult));
        m += 1;
    }
    Ok(Spectrum::eigenvalues_only(
        eigenvalues,
        model.alpha,
        Source::ExactModel,
        model.dimension,
    ))
}

/// `Σ_{E < 1} (1 - E)^σ` summed level by level with multiplicities.
pub fn s_sigma(model: &OscillatorModel, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    let mut sum = 0.0;
    let mut m = 0;
    while model.level(m) < 1.0 {
        let gap = 1.0 - model.level(m);
        let term = if sigma == 0.0 { 1.0 } else { gap.powf(sigma) };
        sum += model.multiplicity(m) as f64 * term;
        m += 1;
    }
    Ok(sum)
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("sigma must be >= 0, got {sigma}")))
    }
}

/// `p_σ(α) = α^{d/2} S_σ(α)`
pub fn p_sigma(dimension: usize, sigma: f64, alpha: f64) -> Result<f64> {
    let model = OscillatorModel::new(dimension, alpha)?;
    Ok(alpha.powf(0.5 * dimension as f64) * s_sigma(&model, sigma)?)
}

/// `α_k = (d + 2k)^{-2}`, where level `k` crosses the threshold 1.
pub fn breakpoint(dimension: usize, k: usize) -> f64 {
    ((dimension + 2 * k) as f64).powi(-2)
}

/// The smooth piece of `p_σ` with levels `0..active` contributing, continued
/// to wherever those levels stay at or below 1.
fn p_branch(dimension: usize, sigma: f64, alpha: f64, active: usize) -> f64 {
    let root = alpha.sqrt();
    let sum: f64 = (0..active)
        .map(|m| {
            let gap = (1.0 - root * (2 * m + dimension) as f64).max(0.0);
            let term = if sigma == 0.0 { 1.0 } else { gap.powf(sigma) };
            level_multiplicity(m, dimension) as f64 * term
        })
        .sum();
    alpha.powf(0.5 * dimension as f64) * sum
}

/// Levels strictly below 1 at `alpha`.
fn active_levels(dimension: usize, alpha: f64) -> usize {
    let root = alpha.sqrt();
    (0..).take_while(|&m| root * ((2 * m + dimension) as f64) < 1.0).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeSide {
    Central,
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

impl Sign {
    pub fn classify(value: f64) -> Self {
        if value.abs() <= ZERO_THRESHOLD {
            Sign::Zero
        } else if value > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeSign {
    pub dimension: usize,
    pub sigma: f64,
    pub alpha: f64,
    pub side: DerivativeSide,
    pub value: f64,
    /// Spread of the last two Richardson columns.
    pub error_estimate: f64,
    pub sign: Sign,
}

/// Index `k` if `alpha` coincides with `(d + 2k)^{-2}` to relative 1e-12.
pub fn breakpoint_index(dimension: usize, alpha: f64) -> Option<usize> {
    let k = (alpha.sqrt().recip() - dimension as f64) / 2.0;
    let k = k.round();
    if k < 0.0 {
        return None;
    }
    let k = k as usize;
    ((breakpoint(dimension, k) - alpha).abs() <= 1e-12 * alpha).then_some(k)
}

/// Richardson extrapolation of difference quotients with steps
/// `step / 2^i`; `order` is the leading error power and `stride` its
/// increment (1 for one-sided, 2 for central quotients).
fn richardson<F: Fn(f64) -> f64>(quotient: F, step: f64, order: i32, stride: i32) -> (f64, f64) {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(RICHARDSON_LEVELS);
    for i in 0..RICHARDSON_LEVELS {
        let mut row = vec![quotient(step / 2f64.powi(i as i32))];
        for j in 1..=i {
            let factor = 2f64.powi(order + stride * (j as i32 - 1));
            let prev = &table[i - 1];
            row.push(row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0));
        }
        table.push(row);
    }
    let last = &table[RICHARDSON_LEVELS - 1];
    let value = last[RICHARDSON_LEVELS - 1];
    let prev = table[RICHARDSON_LEVELS - 2][RICHARDSON_LEVELS - 2];
    (value, (value - prev).abs())
}

/// `p_σ'(α)` from Richardson-extrapolated differences of the closed form.
///
/// One-sided derivatives at a crossing `(d + 2k)^{-2}` use the smooth piece
/// on that side: levels `0..k` to the right, `0..=k` to the left. A central
/// derivative whose stencil touches a crossing is refused.
pub fn p_derivative(dimension: usize, sigma: f64, alpha: f64, step: f64, side: DerivativeSide) -> Result<DerivativeSign> {
    check_sigma(sigma)?;
    OscillatorModel::new(dimension, alpha)?;
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::Config(format!("step must be positive, got {step}")));
    }
    let at_break = breakpoint_index(dimension, alpha);
    let active = match (side, at_break) {
        (DerivativeSide::Central, Some(_)) => return Err(Error::Breakpoint { alpha }),
        (DerivativeSide::Right, Some(k)) => k,
        (DerivativeSide::Left, Some(k)) => k + 1,
        (_, None) => active_levels(dimension, alpha),
    };
    // keep the stencil inside the smooth piece
    let lower = breakpoint(dimension, active);
    let upper = if active == 0 { f64::INFINITY } else { breakpoint(dimension, active - 1) };
    let room = match side {
        DerivativeSide::Right => upper - alpha,
        DerivativeSide::Left => alpha - lower,
        DerivativeSide::Central => (alpha - lower).min(upper - alpha),
    };
    if at_break.is_none() && side == DerivativeSide::Central && room <= 0.0 {
        return Err(Error::Breakpoint { alpha });
    }
    let step = step.min(0.25 * room).min(0.5 * alpha);
    let f = |a: f64| p_branch(dimension, sigma, a, active);
    let (value, error_estimate) = match side {
        DerivativeSide::Right => richardson(|s| (f(alpha + s) - f(alpha)) / s, step, 1, 1),
        DerivativeSide::Left => richardson(|s| (f(alpha) - f(alpha - s)) / s, step, 1, 1),
        DerivativeSide::Central => richardson(|s| (f(alpha + s) - f(alpha - s)) / (2.0 * s), step, 2, 2),
    };
    Ok(DerivativeSign {
        dimension,
        sigma,
        alpha,
        side,
        value,
        error_estimate,
        sign: Sign::classify(value),
    })
}

pub fn p_derivative_sign(dimension: usize, sigma: f64, alpha: f64, step: f64, side: DerivativeSide) -> Result<Sign> {
    Ok(p_derivative(dimension, sigma, alpha, step, side)?.sign)
}

/// Exact curve `α ↦ α^{d/2} Σ (z - E_j(α))₊^σ` on a grid.
pub fn oscillator_riesz_curve(dimension: usize, sigma: f64, z: f64, alpha_grid: &[f64]) -> Result<MomentCurve> {
    let spectra = alpha_grid
        .iter()
        .map(|&a| ho_spectrum(&OscillatorModel::new(dimension, a)?, z))
        .collect::<Result<Vec<_>>>()?;
    MomentCurve::from_spectra(sigma, z, dimension, Source::ExactModel, &spectra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{check_monotonicity, geometric_grid, riesz_mean};
    use proptest::prelude::*;

    #[test]
    fn spectrum_examples() {
        let one = ho_spectrum(&OscillatorModel::new(1, 1.0).unwrap(), 6.0).unwrap();
        assert_eq!(one.eigenvalues(), &[1.0, 3.0, 5.0]);
        assert_eq!(one.source(), Source::ExactModel);
        let two = ho_spectrum(&OscillatorModel::new(2, 1.0).unwrap(), 5.0).unwrap();
        assert_eq!(two.eigenvalues(), &[2.0, 4.0, 4.0]);
        let quarter = ho_spectrum(&OscillatorModel::new(1, 0.25).unwrap(), 1.0).unwrap();
        assert_eq!(quarter.eigenvalues(), &[0.5]);
    }

    #[test]
    fn multiplicity_matches_enumeration() {
        for d in 1..=4usize {
            let mut counts = [0usize; 7];
            let mut idx = vec![0usize; d];
            loop {
                let m: usize = idx.iter().sum();
                if m < counts.len() {
                    counts[m] += 1;
                }
                // odometer over [0, 7)^d
                let mut pos = 0;
                while pos < d {
                    idx[pos] += 1;
                    if idx[pos] < 7 {
                        break;
                    }
                    idx[pos] = 0;
                    pos += 1;
                }
                if pos == d {
                    break;
                }
            }
            for (m, &c) in counts.iter().enumerate() {
                assert_eq!(level_multiplicity(m, d), c, "d = {d}, m = {m}");
            }
            assert_eq!(level_multiplicity(1, d), d);
        }
    }

    #[test]
    fn s_sigma_piecewise_forms() {
        for &sigma in &[0.0, 0.5, 1.0, 2.0, 3.5] {
            for &alpha in &[0.12, 0.3, 0.9] {
                let m = OscillatorModel::new(1, alpha).unwrap();
                let expected = (1.0 - alpha.sqrt()).powf(sigma);
                assert!((s_sigma(&m, sigma).unwrap() - expected).abs() < 1e-14);
            }
            for &alpha in &[0.045, 0.08, 0.11] {
                let m = OscillatorModel::new(1, alpha).unwrap();
                let r = alpha.sqrt();
                let expected = (1.0 - r).powf(sigma) + (1.0 - 3.0 * r).powf(sigma);
                assert!((s_sigma(&m, sigma).unwrap() - expected).abs() < 1e-14);
            }
            assert_eq!(s_sigma(&OscillatorModel::new(3, 1.0 / 9.0).unwrap(), sigma).unwrap(), 0.0);
            assert_eq!(s_sigma(&OscillatorModel::new(2, 2.0).unwrap(), sigma).unwrap(), 0.0);
        }
    }

    #[test]
    fn first_breakpoint_value_for_sigma_one() {
        let r = p_derivative(1, 1.0, 1.0 / 9.0, 1e-3, DerivativeSide::Right).unwrap();
        assert!((r.value - 0.5).abs() < 1e-10, "{r:?}");
        assert_eq!(r.sign, Sign::Positive);
    }

    #[test]
    fn breakpoint_signs() {
        for d in 1..=3 {
            for k in [1, 2] {
                let a = breakpoint(d, k);
                for sigma in [0.0, 0.5, 1.0, 1.5, 1.99] {
                    let s = p_derivative_sign(d, sigma, a, 1e-3 * a, DerivativeSide::Right).unwrap();
                    assert_eq!(s, Sign::Positive, "d {d} k {k} sigma {sigma}");
                }
                let zero = p_derivative(d, 2.0, a, 1e-3 * a, DerivativeSide::Right).unwrap();
                assert_eq!(zero.sign, Sign::Zero, "{zero:?}");
            }
        }
    }

    #[test]
    fn right_derivative_closed_form() {
        // d/2 α^{d/2-1} (1 - d√α)^{σ-1} (2 - σ) / (d + 2) at α = (d+2)^{-2}
        for d in 1..=3usize {
            for sigma in [0.5, 1.0, 1.5] {
                let a = breakpoint(d, 1);
                let df = d as f64;
                let expected =
                    0.5 * df * a.powf(0.5 * df - 1.0) * (1.0 - df * a.sqrt()).powf(sigma - 1.0) * (2.0 - sigma) / (df + 2.0);
                let got = p_derivative(d, sigma, a, 1e-3 * a, DerivativeSide::Right).unwrap().value;
                assert!((got - expected).abs() < 1e-9 * expected.abs().max(1.0), "d {d} sigma {sigma}");
            }
        }
    }

    #[test]
    fn central_derivative_refused_at_breakpoint() {
        let err = p_derivative(1, 1.0, 1.0 / 25.0, 1e-4, DerivativeSide::Central).unwrap_err();
        assert!(matches!(err, Error::Breakpoint { .. }));
        // away from crossings the central quotient agrees with p' = 1/(2√α) - 1
        let r = p_derivative(1, 1.0, 0.25, 1e-3, DerivativeSide::Central).unwrap();
        assert!((r.value - 0.0).abs() < 1e-10);
        let r = p_derivative(1, 1.0, 0.16, 1e-3, DerivativeSide::Central).unwrap();
        assert!((r.value - 0.25).abs() < 1e-10);
    }

    #[test]
    fn riesz_curve_detects_increase_below_sigma_two() {
        let grid = geometric_grid(1.0 / 9.0, 0.2, 20).unwrap();
        let c = oscillator_riesz_curve(1, 1.0, 1.0, &grid).unwrap();
        let v = check_monotonicity(&c, 0.0);
        assert!(!v.non_increasing);
        assert!(v.max_violation > 0.0);
    }

    proptest! {
        #[test]
        fn level_path_matches_spectrum_path(d in 1usize..4, alpha in 0.002f64..1.5, sigma in 0.0f64..4.0) {
            let m = OscillatorModel::new(d, alpha).unwrap();
            let s = ho_spectrum(&m, 1.0).unwrap();
            let a = s_sigma(&m, sigma).unwrap();
            let b = riesz_mean(&s, sigma, 1.0).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
        }
    }
}
