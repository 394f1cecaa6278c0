//! Riesz means `Σ (z - E_j)₊^σ`, scaled moment curves
//! `α ↦ α^{d/2} Σ (z - E_j(α))₊^σ` and the checks built on them: monotonicity
//! verdicts, the sharp Lieb-Thirring ratio, Feynman-Hellmann derivatives and
//! the Beta-function identity that lifts `σ = 2` statements to `σ > 2`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{build_hamiltonian, DiscretizationConfig};
use crate::eigensolve::{
    count_below, default_tolerance, eigenpairs, eigenvalues_by_index, spectrum_below, Source, Spectrum,
};
use crate::error::{Error, Result};
use crate::matrix_elements::{central_difference, discrete_kinetic_energy};
use crate::potentials::{sech_squared_levels, ClassicalBound, PotentialKind, PotentialSpec};
use crate::quadrature::{integrate, integrate_with_breaks, QuadratureConfig};
use crate::special::beta;

/// `Σ_{E_j < z} (z - E_j)^σ` over raw eigenvalues. `σ = 0` counts states.
pub fn riesz_sum(eigenvalues: &[f64], sigma: f64, z: f64) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&e| e < z)
        .map(|&e| if sigma == 0.0 { 1.0 } else { (z - e).powf(sigma) })
        .sum()
}

pub fn riesz_mean(spectrum: &Spectrum, sigma: f64, z: f64) -> Result<f64> {
    check_sigma(sigma)?;
    Ok(riesz_sum(spectrum.eigenvalues(), sigma, z))
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma >= 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("sigma must be >= 0, got {sigma}")))
    }
}

/// `points` values from `min` to `max`, equally spaced in `ln α`.
pub fn geometric_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max > min && min.is_finite() && max.is_finite()) {
        return Err(Error::Config(format!("need 0 < alpha-min < alpha-max, got [{min}, {max}]")));
    }
    if points < 2 {
        return Err(Error::Config(format!("need at least 2 grid points, got {points}")));
    }
    let ratio = (max / min).ln() / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| min * (ratio * i as f64).exp()).collect();
    grid[points - 1] = max;
    Ok(grid)
}

fn check_alpha_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("alpha grid is empty".into()));
    }
    if grid.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
        return Err(Error::Config("alpha values must be positive and finite".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("alpha grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Interval of consecutive grid couplings across which the number of states
/// below the threshold changes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchPoint {
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub count_lo: usize,
    pub count_hi: usize,
}

fn branch_points(alpha: &[f64], counts: &[usize]) -> Vec<BranchPoint> {
    alpha
        .windows(2)
        .zip(counts.windows(2))
        .filter(|(_, c)| c[0] != c[1])
        .map(|(a, c)| BranchPoint {
            alpha_lo: a[0],
            alpha_hi: a[1],
            count_lo: c[0],
            count_hi: c[1],
        })
        .collect()
}

/// Anything sampled on an `α` grid.
pub trait AlphaCurve {
    fn alpha_grid(&self) -> &[f64];
    fn values(&self) -> &[f64];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentCurve {
    pub sigma: f64,
    pub dimension: usize,
    pub z: f64,
    pub alpha_grid: Vec<f64>,
    /// `α^{d/2} Σ (z - E_j)₊^σ`
    pub values: Vec<f64>,
    pub bound_state_counts: Vec<usize>,
    pub source: Source,
    /// Per point: the shallowest state touches the box walls.
    pub boundary_limited: Vec<bool>,
    pub branch_points: Vec<BranchPoint>,
}

impl AlphaCurve for MomentCurve {
    fn alpha_grid(&self) -> &[f64] {
        &self.alpha_grid
    }

    fn values(&self) -> &[f64] {
        &self.values
    }
}

impl MomentCurve {
    /// Assembles a curve from per-point spectra.
    pub fn from_spectra(sigma: f64, z: f64, dimension: usize, source: Source, spectra: &[Spectrum]) -> Result<Self> {
        check_sigma(sigma)?;
        let alpha_grid: Vec<f64> = spectra.iter().map(Spectrum::alpha).collect();
        check_alpha_grid(&alpha_grid)?;
        let d = dimension as f64;
        let values = spectra
            .iter()
            .map(|s| s.alpha().powf(0.5 * d) * riesz_sum(s.eigenvalues(), sigma, z))
            .collect();
        let bound_state_counts: Vec<usize> = spectra
            .iter()
            .map(|s| s.eigenvalues().iter().filter(|&&e| e < z).count())
            .collect();
        Ok(Self {
            sigma,
            dimension,
            z,
            branch_points: branch_points(&alpha_grid, &bound_state_counts),
            alpha_grid,
            values,
            bound_state_counts,
            source,
            boundary_limited: spectra.iter().map(Spectrum::boundary_limited).collect(),
        })
    }

    /// CSV with columns `alpha,value,bound_state_count`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["alpha", "value", "bound_state_count"])?;
        for ((a, v), c) in self.alpha_grid.iter().zip(&self.values).zip(&self.bound_state_counts) {
            w.write_record([format!("{a:e}"), format!("{v:e}"), c.to_string()])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn check(&self, slack: f64) -> MonotonicityVerdict {
        check_monotonicity(self, slack)
    }
}

/// Numeric curve: per `α`, every eigenvalue below `z` (composed from the
/// factors when `d > 1`), then `α^{d/2}` times the Riesz mean.
pub fn moment_curve(
    spec: &PotentialSpec,
    sigma: f64,
    alpha_grid: &[f64],
    config: &DiscretizationConfig,
    z: f64,
) -> Result<MomentCurve> {
    check_sigma(sigma)?;
    check_alpha_grid(alpha_grid)?;
    if !z.is_finite() {
        return Err(Error::Config(format!("threshold must be finite, got {z}")));
    }
    let spectra = alpha_grid
        .par_iter()
        .map(|&a| spectrum_below(spec, a, config, z, false).map_err(|e| e.at_alpha(a)))
        .collect::<Result<Vec<_>>>()?;
    MomentCurve::from_spectra(sigma, z, spec.dimension(), Source::Numeric, &spectra)
}

/// Closed-form curve for the well `-g sech²x` in one dimension.
pub fn sech_squared_curve(depth: f64, sigma: f64, alpha_grid: &[f64], z: f64) -> Result<MomentCurve> {
    if !(depth > 0.0) {
        return Err(Error::Domain(format!("depth must be positive, got {depth}")));
    }
    if z > 0.0 {
        return Err(Error::Domain("closed form covers bound states only (z <= 0)".into()));
    }
    check_alpha_grid(alpha_grid)?;
    let spectra: Vec<Spectrum> = alpha_grid
        .iter()
        .map(|&a| Spectrum::eigenvalues_only(sech_squared_levels(depth, a), a, Source::ExactModel, 1))
        .collect();
    MomentCurve::from_spectra(sigma, z, 1, Source::ExactModel, &spectra)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityVerdict {
    pub non_increasing: bool,
    /// Largest positive successive difference (0 if none).
    pub max_violation: f64,
    pub violation_location: Option<(f64, f64)>,
    pub slack_used: f64,
}

/// Non-increase up to an additive `slack` between successive points.
pub fn check_monotonicity(curve: &impl AlphaCurve, slack: f64) -> MonotonicityVerdict {
    let slack = slack.max(0.0);
    let mut max_violation = 0.0f64;
    let mut violation_location = None;
    let alpha = curve.alpha_grid();
    for (i, w) in curve.values().windows(2).enumerate() {
        let step = w[1] - w[0];
        if step > max_violation {
            max_violation = step;
            violation_location = Some((alpha[i], alpha[i + 1]));
        }
    }
    MonotonicityVerdict {
        non_increasing: max_violation <= slack,
        max_violation,
        violation_location,
        slack_used: slack,
    }
}

/// Slack for numeric curves: ten times the largest change of the scaled
/// moment under `h → h/2` at the two ends of the grid.
pub fn refinement_slack(
    spec: &PotentialSpec,
    sigma: f64,
    alpha_grid: &[f64],
    config: &DiscretizationConfig,
    z: f64,
) -> Result<f64> {
    check_alpha_grid(alpha_grid)?;
    let mut ends = vec![alpha_grid[0]];
    if alpha_grid.len() > 1 {
        ends.push(alpha_grid[alpha_grid.len() - 1]);
    }
    let coarse = moment_curve(spec, sigma, &ends, config, z)?;
    let refined = moment_curve(spec, sigma, &ends, &config.refined(), z)?;
    let worst = coarse
        .values
        .iter()
        .zip(&refined.values)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    Ok(10.0 * worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiebThirringCheck {
    pub sigma: f64,
    pub alpha: f64,
    pub dimension: usize,
    pub scaled_moment: f64,
    pub classical_bound: f64,
    pub ratio: f64,
    pub bound_states: usize,
    pub boundary_limited: bool,
}

/// `α^{d/2} Σ (-E_j)^σ` against `L^cl_{σ,d} ∫ (-V)^{σ+d/2}` for `σ ≥ 2`.
pub fn lt_check(
    spec: &PotentialSpec,
    sigma: f64,
    alpha: f64,
    config: &DiscretizationConfig,
    quad: &QuadratureConfig,
) -> Result<LiebThirringCheck> {
    if !(sigma >= 2.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!(
            "the sharp bound with the classical constant is only available for sigma >= 2, got {sigma}"
        )));
    }
    if spec.kind() != PotentialKind::Decaying {
        return Err(Error::Domain("Lieb-Thirring comparison needs a decaying well".into()));
    }
    let bound = ClassicalBound::new(spec, sigma, quad)?;
    let spectrum = spectrum_below(spec, alpha, config, 0.0, false)?;
    let d = spec.dimension() as f64;
    let scaled_moment = alpha.powf(0.5 * d) * riesz_sum(spectrum.eigenvalues(), sigma, 0.0);
    Ok(LiebThirringCheck {
        sigma,
        alpha,
        dimension: spec.dimension(),
        scaled_moment,
        classical_bound: bound.bound,
        ratio: scaled_moment / bound.bound,
        bound_states: spectrum.len(),
        boundary_limited: spectrum.boundary_limited(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeynmanHellmann {
    pub alpha: f64,
    pub index: usize,
    pub delta: f64,
    pub eigenvalue: f64,
    /// `(E_j(α+δ) - E_j(α-δ)) / 2δ`
    pub derivative: f64,
    /// `T_j = ⟨D_c φ_j, D_c φ_j⟩`
    pub kinetic: f64,
    /// `⟨-Δ_h φ_j, φ_j⟩`, the exact derivative of the discrete eigenvalue.
    pub discrete_kinetic: f64,
    /// `|derivative - T_j|`
    pub residual: f64,
    /// `|derivative - ⟨-Δ_h φ_j, φ_j⟩|`, which is `O(δ²)` only.
    pub discrete_residual: f64,
}

/// Central difference of `E_j(α)` against the kinetic energy `T_j`.
///
/// `T_j` is the row sum of the kinetic matrix, evaluated through
/// completeness as `‖D_c φ_j‖²` from the single eigenvector. For decaying
/// wells the number of bound states must be the same at `α - δ`, `α` and
/// `α + δ`.
pub fn feynman_hellmann_residual(
    spec: &PotentialSpec,
    alpha: f64,
    j: usize,
    delta: f64,
    config: &DiscretizationConfig,
) -> Result<FeynmanHellmann> {
    if !(delta > 0.0 && delta < alpha) {
        return Err(Error::Config(format!("need 0 < delta < alpha, got delta = {delta}")));
    }
    let lo = build_hamiltonian(spec, alpha - delta, config)?;
    let mid = build_hamiltonian(spec, alpha, config)?;
    let hi = build_hamiltonian(spec, alpha + delta, config)?;
    if j >= mid.len() {
        return Err(Error::Config(format!("state index {j} out of range")));
    }
    if spec.kind() == PotentialKind::Decaying {
        let counts = [count_below(&lo, 0.0), count_below(&mid, 0.0), count_below(&hi, 0.0)];
        if counts[0] != counts[2] || counts[0] != counts[1] {
            return Err(Error::BranchCrossing {
                alpha_lo: alpha - delta,
                alpha_hi: alpha + delta,
                count_lo: counts[0],
                count_hi: counts[2],
            });
        }
        if j >= counts[1] {
            return Err(Error::Domain(format!(
                "state {j} is not bound at alpha = {alpha} ({} bound states)",
                counts[1]
            )));
        }
    }
    let level = |h: &crate::discretize::Hamiltonian1D| eigenvalues_by_index(h, j..j + 1, default_tolerance(h))[0];
    let e_lo = level(&lo);
    let e_hi = level(&hi);
    let e = level(&mid);
    let vector = eigenpairs(&mid, &[e], j)?;
    let phi = vector.row(0);
    let h = mid.spacing();
    let grad = central_difference(phi, h);
    let kinetic = h * grad.dot(&grad);
    let discrete_kinetic = discrete_kinetic_energy(phi, h, 1.0);
    let derivative = (e_hi - e_lo) / (2.0 * delta);
    Ok(FeynmanHellmann {
        alpha,
        index: j,
        delta,
        eigenvalue: e,
        derivative,
        kinetic,
        discrete_kinetic,
        residual: (derivative - kinetic).abs(),
        discrete_residual: (derivative - discrete_kinetic).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AizenmanLieb {
    pub energy: f64,
    pub sigma: f64,
    /// `(-E)₊^σ`
    pub lhs: f64,
    /// `B(σ-2, 3)^{-1} ∫₀^∞ τ^{σ-3} (-E-τ)₊² dτ`
    pub rhs: f64,
    /// `|lhs - rhs| / lhs` (absolute when `lhs = 0`).
    pub residual: f64,
}

fn check_lift_sigma(sigma: f64) -> Result<()> {
    if sigma > 2.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("the Beta-function lift needs sigma > 2, got {sigma}")))
    }
}

/// `∫₀^a τ^{σ-3} g(τ) dτ` with the substitution `τ = a w^{1/(σ-2)}`, which
/// absorbs the power: the integrand becomes `a^{σ-2} g(τ(w)) / (σ-2)`.
fn power_weighted_integral<F: Fn(f64) -> f64>(a: f64, sigma: f64, g: F, quad: &QuadratureConfig) -> Result<f64> {
    let p = sigma - 2.0;
    let q = integrate(|w: f64| g(a * w.powf(1.0 / p)), 0.0, 1.0, quad)?;
    Ok(a.powf(p) * q.value / p)
}

/// `(-E)^σ = B(σ-2, 3)^{-1} ∫₀^∞ τ^{σ-3} (-E-τ)₊² dτ` by quadrature.
pub fn aizenman_lieb_identity(energy: f64, sigma: f64, quad: &QuadratureConfig) -> Result<AizenmanLieb> {
    check_lift_sigma(sigma)?;
    if !energy.is_finite() {
        return Err(Error::Config(format!("energy must be finite, got {energy}")));
    }
    let depth = (-energy).max(0.0);
    let lhs = if depth > 0.0 { depth.powf(sigma) } else { 0.0 };
    let rhs = if depth > 0.0 {
        power_weighted_integral(depth, sigma, |tau| (depth - tau).max(0.0).powi(2), quad)? / beta(sigma - 2.0, 3.0)
    } else {
        0.0
    };
    let diff = (lhs - rhs).abs();
    Ok(AizenmanLieb {
        energy,
        sigma,
        lhs,
        rhs,
        residual: if lhs > 0.0 { diff / lhs } else { diff },
    })
}

/// `B(σ-2, 3)^{-1} ∫₀^∞ τ^{σ-3} Σ_j (-τ - E_j)₊² dτ`: the `σ`-moment at
/// `z = 0` rebuilt from the `σ = 2` Riesz means at every threshold `-τ`.
pub fn aizenman_lieb_lift(eigenvalues: &[f64], sigma: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_lift_sigma(sigma)?;
    let depth = eigenvalues.iter().fold(0.0f64, |m, &e| m.max(-e));
    if depth == 0.0 {
        return Ok(0.0);
    }
    let p = sigma - 2.0;
    // breaks where a state leaves the sum, mapped to w = (τ/depth)^p
    let mut breaks: Vec<f64> = eigenvalues
        .iter()
        .filter(|&&e| e < 0.0)
        .map(|&e| (-e / depth).powf(p))
        .chain([0.0, 1.0])
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let q = integrate_with_breaks(
        |w: f64| riesz_sum(eigenvalues, 2.0, -depth * w.powf(1.0 / p)),
        &breaks,
        quad,
    )?;
    Ok(depth.powf(p) * q.value / p / beta(p, 3.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    #[test]
    fn riesz_examples() {
        let empty = Spectrum::eigenvalues_only(vec![], 1.0, Source::ExactModel, 1);
        assert_eq!(riesz_mean(&empty, 2.0, 0.0).unwrap(), 0.0);
        let pt = Spectrum::eigenvalues_only(vec![-4.0, -1.0], 1.0, Source::ExactModel, 1);
        assert_eq!(riesz_mean(&pt, 2.0, 0.0).unwrap(), 17.0);
        assert_eq!(riesz_mean(&pt, 0.0, 0.0).unwrap(), 2.0);
        let osc = Spectrum::eigenvalues_only(vec![0.5, 1.5], 0.25, Source::ExactModel, 1);
        assert_eq!(riesz_mean(&osc, 1.0, 1.0).unwrap(), 0.5);
        assert!(riesz_mean(&osc, -1.0, 1.0).is_err());
    }

    #[test]
    fn geometric_grid_endpoints() {
        let g = geometric_grid(0.05, 5.0, 50).unwrap();
        assert_eq!(g.len(), 50);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[49], 5.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!((g[1] / g[0] - g[49] / g[48]).abs() < 1e-12);
        assert!(geometric_grid(1.0, 1.0, 3).is_err());
    }

    #[test]
    fn numeric_curve_matches_closed_form() {
        let spec = PotentialSpec::sech_squared(6.0).unwrap();
        let cfg = DiscretizationConfig::standard_well();
        let c = moment_curve(&spec, 2.0, &[1.0], &cfg, 0.0).unwrap();
        assert!((c.values[0] - 17.0).abs() < 2e-3);
        assert_eq!(c.bound_state_counts, vec![2]);
        // no bound state at all for a square well this shallow in a box
        let sq = PotentialSpec::square(1.0, 1.0).unwrap();
        let coarse = DiscretizationConfig::new(20.0, 399).unwrap();
        let c = moment_curve(&sq, 2.0, &[1e4], &coarse, 0.0).unwrap();
        assert_eq!(c.values, vec![0.0]);
    }

    #[test]
    fn semiclassical_value_from_closed_form() {
        let c = sech_squared_curve(6.0, 2.0, &[0.01], 0.0).unwrap();
        let limit = 6f64.powf(2.5) / 5.0;
        assert!(c.values[0] < limit);
        assert!(c.values[0] > 0.95 * limit);
        assert_eq!(c.bound_state_counts[0], 24);
    }

    #[test]
    fn exact_sech_squared_curve_is_monotone() {
        let grid = geometric_grid(0.05, 5.0, 50).unwrap();
        let c = sech_squared_curve(6.0, 2.0, &grid, 0.0).unwrap();
        let v = c.check(0.0);
        assert!(v.non_increasing, "{v:?}");
        assert!(!c.branch_points.is_empty());
        for b in &c.branch_points {
            assert!(b.count_lo > b.count_hi);
        }
    }

    #[test]
    fn increasing_curve_is_flagged() {
        let c = MomentCurve {
            sigma: 2.0,
            dimension: 1,
            z: 0.0,
            alpha_grid: vec![1.0, 2.0, 3.0, 4.0],
            values: vec![1.0, 1.5, 3.0, 3.25],
            bound_state_counts: vec![1; 4],
            source: Source::ExactModel,
            boundary_limited: vec![false; 4],
            branch_points: vec![],
        };
        let v = check_monotonicity(&c, 0.0);
        assert!(!v.non_increasing);
        assert_eq!(v.max_violation, 1.5);
        assert_eq!(v.violation_location, Some((2.0, 3.0)));
        assert!(check_monotonicity(&c, 1.5).non_increasing);
    }

    #[test]
    fn numeric_curve_with_refinement_slack() {
        let spec = PotentialSpec::sech_squared(6.0).unwrap();
        let cfg = DiscretizationConfig::new(20.0, 999).unwrap();
        let grid = geometric_grid(0.2, 5.0, 12).unwrap();
        for sigma in [2.0, 3.0] {
            let slack = refinement_slack(&spec, sigma, &grid, &cfg, 0.0).unwrap();
            let c = moment_curve(&spec, sigma, &grid, &cfg, 0.0).unwrap();
            let v = c.check(slack);
            assert!(v.non_increasing, "sigma {sigma}: {v:?}");
            assert!(slack > 0.0 && slack < 0.01 * c.values[0], "slack {slack}");
        }
    }

    #[test]
    fn lt_examples() {
        let spec = PotentialSpec::sech_squared(6.0).unwrap();
        let cfg = DiscretizationConfig::standard_well();
        let at_one = lt_check(&spec, 2.0, 1.0, &cfg, &quad()).unwrap();
        assert!((at_one.ratio - 17.0 / 17.636_326).abs() < 2e-3);
        let at_four = lt_check(&spec, 2.0, 4.0, &cfg, &quad()).unwrap();
        assert!(at_four.ratio <= at_one.ratio && at_four.ratio <= 1.0);
        let none = lt_check(&spec, 2.0, 1e5, &DiscretizationConfig::new(20.0, 399).unwrap(), &quad()).unwrap();
        assert_eq!(none.ratio, 0.0);
        assert!(matches!(lt_check(&spec, 1.5, 1.0, &cfg, &quad()), Err(Error::Domain(_))));
        let osc = PotentialSpec::harmonic(1.0).unwrap();
        assert!(lt_check(&osc, 2.0, 1.0, &cfg, &quad()).is_err());
    }

    #[test]
    fn feynman_hellmann_examples() {
        let spec = PotentialSpec::sech_squared(6.0).unwrap();
        let cfg = DiscretizationConfig::standard_well();
        let fh = feynman_hellmann_residual(&spec, 1.0, 0, 1e-3, &cfg).unwrap();
        assert!((fh.derivative - 0.8).abs() < 1e-3);
        assert!(fh.residual < 1e-3);
        let osc = PotentialSpec::harmonic(1.0).unwrap();
        let fh = feynman_hellmann_residual(&osc, 1.0, 0, 1e-3, &DiscretizationConfig::standard_confining()).unwrap();
        assert!((fh.kinetic - 0.5).abs() < 1e-4);
        assert!((fh.derivative - 0.5).abs() < 1e-4);
    }

    #[test]
    fn feynman_hellmann_second_order_in_delta() {
        let spec = PotentialSpec::sech_squared(6.0).unwrap();
        let cfg = DiscretizationConfig::new(20.0, 999).unwrap();
        // two bound states throughout [1.6, 2.4]
        let a = feynman_hellmann_residual(&spec, 2.0, 1, 0.2, &cfg).unwrap();
        let b = feynman_hellmann_residual(&spec, 2.0, 1, 0.1, &cfg).unwrap();
        let ratio = a.discrete_residual / b.discrete_residual;
        assert!((3.5..=4.5).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn feynman_hellmann_detects_branch_crossing() {
        // a second state appears at alpha = 3 for g = 6
        let spec = PotentialSpec::sech_squared(6.0).unwrap();
        let cfg = DiscretizationConfig::new(20.0, 999).unwrap();
        let err = feynman_hellmann_residual(&spec, 2.5, 0, 1.0, &cfg).unwrap_err();
        assert!(matches!(err, Error::BranchCrossing { .. }), "{err}");
    }

    #[test]
    fn aizenman_lieb_examples() {
        let r = aizenman_lieb_identity(-2.0, 3.0, &quad()).unwrap();
        assert!((r.lhs - 8.0).abs() < 1e-12);
        assert!((r.rhs - 8.0).abs() < 1e-9);
        for sigma in [2.5, 3.0, 4.0, 7.3] {
            let r = aizenman_lieb_identity(-1.0, sigma, &quad()).unwrap();
            assert!(r.residual < 1e-8, "{r:?}");
        }
        let r = aizenman_lieb_identity(-1e-12, 3.0, &quad()).unwrap();
        assert!(r.lhs < 1e-30 && r.rhs < 1e-30);
        assert!(matches!(aizenman_lieb_identity(-1.0, 2.0, &quad()), Err(Error::Domain(_))));
    }

    #[test]
    fn lift_reproduces_higher_moments() {
        let levels = sech_squared_levels(6.0, 0.3);
        for sigma in [2.5, 3.0, 4.0] {
            let direct = riesz_sum(&levels, sigma, 0.0);
            let lifted = aizenman_lieb_lift(&levels, sigma, &quad()).unwrap();
            assert!((direct - lifted).abs() < 1e-9 * direct, "sigma {sigma}");
        }
    }

    proptest! {
        #[test]
        fn aizenman_lieb_holds_on_random_inputs(e in -20.0f64..-1e-3, sigma in 2.05f64..8.0) {
            let r = aizenman_lieb_identity(e, sigma, &quad()).unwrap();
            prop_assert!(r.residual < 1e-8);
        }

        #[test]
        fn riesz_sum_is_monotone_in_threshold(
            mut levels in proptest::collection::vec(-10.0f64..10.0, 0..12),
            z in -5.0f64..5.0,
            dz in 0.0f64..3.0,
            sigma in 0.0f64..4.0,
        ) {
            levels.sort_by(f64::total_cmp);
            prop_assert!(riesz_sum(&levels, sigma, z) <= riesz_sum(&levels, sigma, z + dz) + 1e-12);
            prop_assert!(riesz_sum(&levels, sigma, z) >= 0.0);
        }
    }
}
