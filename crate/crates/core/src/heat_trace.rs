//! Heat traces `tr e^{-tH(α)}` of confining problems with a certified
//! truncation bound, the Golden-Thompson comparison
//! `tr e^{-tH} ≤ (4παt)^{-d/2} ∫ e^{-tV}`, and scaled curves
//! `α ↦ α^{d/2} tr e^{-tH(α)}`.
//!
//! On a grid of `n` points, every eigenvalue above the cutoff contributes at
//! most `e^{-t·cutoff}`, and there are `n - N(cutoff)` of them by the Sturm
//! count, so the neglected part of the (finite) grid trace is bounded by
//! `(n - N(cutoff)) e^{-t·cutoff}`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{build_hamiltonian, DiscretizationConfig};
use crate::eigensolve::{count_below, default_tolerance, eigenvalues_by_index, eigenvalues_in, Source};
use crate::error::{Error, Result};
use crate::moments::{check_monotonicity, AlphaCurve, MonotonicityVerdict};
use crate::oscillator_exact::OscillatorModel;
use crate::potentials::{laplace_integral, PotentialKind, PotentialSpec};
use crate::quadrature::QuadratureConfig;

/// Largest admissible ratio of tail bound to trace.
pub const TAIL_TOLERANCE: f64 = 1e-10;
/// `t (cutoff - E₀)` chosen by the automatic cutoff, on top of `ln n`.
const AUTO_CUTOFF_MARGIN: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatTrace {
    pub alpha: f64,
    pub t: f64,
    pub dimension: usize,
    pub trace: f64,
    /// Upper bound on the omitted part of the trace.
    pub tail_bound: f64,
    pub cutoff: f64,
    pub states: usize,
    pub source: Source,
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must be positive, got {t}")))
    }
}

fn heat_trace_1d(spec: &PotentialSpec, alpha: f64, t: f64, config: &DiscretizationConfig, cutoff: Option<f64>) -> Result<HeatTrace> {
    let h = build_hamiltonian(spec, alpha, config)?;
    let tol = default_tolerance(&h);
    let ground = eigenvalues_by_index(&h, 0..1, tol)[0];
    let n = h.len();
    let cutoff = cutoff.unwrap_or(ground + ((n as f64).ln() + AUTO_CUTOFF_MARGIN) / t);
    let (glo, _) = h.gershgorin();
    let lo = glo - 1e-12 * h.scale() - f64::MIN_POSITIVE;
    let levels = eigenvalues_in(&h, lo, cutoff, tol);
    // largest first keeps the summation error small
    let trace: f64 = levels.iter().rev().map(|&e| (-t * e).exp()).sum();
    let above = n - count_below(&h, cutoff);
    let tail_bound = if above == 0 { 0.0 } else { above as f64 * (-t * cutoff).exp() };
    if tail_bound > TAIL_TOLERANCE * trace {
        let suggested = ground + ((n as f64).ln() + AUTO_CUTOFF_MARGIN) / t;
        return Err(Error::CutoffTooLow {
            cutoff,
            tail_bound,
            tolerance: TAIL_TOLERANCE * trace,
            suggested: suggested.max(cutoff + 1.0 / t),
        });
    }
    Ok(HeatTrace {
        alpha,
        t,
        dimension: 1,
        trace,
        tail_bound,
        cutoff,
        states: levels.len(),
        source: Source::Numeric,
    })
}

/// `Σ_{E_j ≤ cutoff} e^{-t E_j}` over the grid spectrum with its tail bound.
/// Without an explicit cutoff one is chosen so that the tail is below
/// `e^{-40}` of the trace. Separable potentials multiply factor traces and
/// the cutoff applies per factor.
pub fn heat_trace(
    spec: &PotentialSpec,
    alpha: f64,
    t: f64,
    config: &DiscretizationConfig,
    cutoff: Option<f64>,
) -> Result<HeatTrace> {
    check_t(t)?;
    if spec.kind() != PotentialKind::Confining {
        return Err(Error::Domain(
            "heat traces are only defined here for confining potentials".into(),
        ));
    }
    if spec.dimension() == 1 {
        return heat_trace_1d(spec, alpha, t, config, cutoff);
    }
    let parts = spec
        .factors()
        .into_iter()
        .map(|f| heat_trace_1d(f, alpha, t, config, cutoff))
        .collect::<Result<Vec<_>>>()?;
    let trace: f64 = parts.iter().map(|p| p.trace).product();
    let upper: f64 = parts.iter().map(|p| p.trace + p.tail_bound).product();
    let states = parts.iter().map(|p| p.states).product();
    let cutoff = parts.iter().map(|p| p.cutoff).fold(f64::INFINITY, f64::min);
    Ok(HeatTrace {
        alpha,
        t,
        dimension: spec.dimension(),
        trace,
        tail_bound: upper - trace,
        cutoff,
        states,
        source: Source::Numeric,
    })
}

/// Exact trace of `-α Δ + |x|²` by summing levels with multiplicities until
/// a geometric bound on the remainder is below `1e-15` of the sum.
pub fn oscillator_heat_trace(model: &OscillatorModel, t: f64) -> Result<HeatTrace> {
    check_t(t)?;
    let d = model.dimension() as f64;
    let q = (-2.0 * t * model.alpha().sqrt()).exp();
    let mut sum = 0.0;
    let mut m = 0usize;
    let tail_bound = loop {
        let term = model.multiplicity(m) as f64 * (-t * model.level(m)).exp();
        sum += term;
        // term ratio (m + d)/(m + 1) q, decreasing in m
        let rho = (m as f64 + d) / (m as f64 + 1.0) * q;
        if rho < 1.0 {
            let tail = term * rho / (1.0 - rho);
            if tail <= 1e-15 * sum || tail == 0.0 {
                break tail;
            }
        }
        m += 1;
        if m > 100_000_000 {
            return Err(Error::Truncation("oscillator heat trace did not converge".into()));
        }
    };
    Ok(HeatTrace {
        alpha: model.alpha(),
        t,
        dimension: model.dimension(),
        trace: sum,
        tail_bound,
        cutoff: model.level(m),
        states: (0..=m).map(|k| model.multiplicity(k)).sum(),
        source: Source::ExactModel,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoldenThompson {
    pub alpha: f64,
    pub t: f64,
    pub dimension: usize,
    pub trace: f64,
    pub tail_bound: f64,
    /// `(4παt)^{-d/2} ∫ e^{-tV}`
    pub bound: f64,
    /// `(trace + tail_bound) / bound`
    pub ratio: f64,
}

/// Golden-Thompson comparison on the grid spectrum. The ratio uses the
/// upper end `trace + tail_bound` so that truncation cannot hide a
/// violation.
pub fn golden_thompson_check(
    spec: &PotentialSpec,
    alpha: f64,
    t: f64,
    config: &DiscretizationConfig,
    quad: &QuadratureConfig,
) -> Result<GoldenThompson> {
    let ht = heat_trace(spec, alpha, t, config, None)?;
    let bound = golden_thompson_bound(spec, alpha, t, quad)?;
    Ok(GoldenThompson {
        alpha,
        t,
        dimension: ht.dimension,
        trace: ht.trace,
        tail_bound: ht.tail_bound,
        bound,
        ratio: (ht.trace + ht.tail_bound) / bound,
    })
}

/// `(4παt)^{-d/2} ∫_{R^d} e^{-tV}`
pub fn golden_thompson_bound(spec: &PotentialSpec, alpha: f64, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    check_t(t)?;
    let d = spec.dimension() as f64;
    Ok((4.0 * std::f64::consts::PI * alpha * t).powf(-0.5 * d) * laplace_integral(spec, t, quad)?)
}

/// Exact oscillator version: for `V = |x|²` the bound is `(2t√α)^{-d}`.
pub fn oscillator_golden_thompson(model: &OscillatorModel, t: f64) -> Result<GoldenThompson> {
    let ht = oscillator_heat_trace(model, t)?;
    let d = model.dimension() as i32;
    let bound = (2.0 * t * model.alpha().sqrt()).powi(-d);
    Ok(GoldenThompson {
        alpha: model.alpha(),
        t,
        dimension: model.dimension(),
        trace: ht.trace,
        tail_bound: ht.tail_bound,
        bound,
        ratio: (ht.trace + ht.tail_bound) / bound,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatTraceCurve {
    pub t: f64,
    pub dimension: usize,
    pub alpha_grid: Vec<f64>,
    /// `α^{d/2} tr e^{-tH(α)}`
    pub values: Vec<f64>,
    /// Largest scaled tail bound over the grid.
    pub truncation_tail_bound: f64,
    pub source: Source,
}

impl AlphaCurve for HeatTraceCurve {
    fn alpha_grid(&self) -> &[f64] {
        &self.alpha_grid
    }

    fn values(&self) -> &[f64] {
        &self.values
    }
}

impl HeatTraceCurve {
    fn from_traces(t: f64, dimension: usize, source: Source, traces: &[HeatTrace]) -> Self {
        let scale = |h: &HeatTrace| h.alpha.powf(0.5 * dimension as f64);
        Self {
            t,
            dimension,
            alpha_grid: traces.iter().map(|h| h.alpha).collect(),
            values: traces.iter().map(|h| scale(h) * h.trace).collect(),
            truncation_tail_bound: traces.iter().map(|h| scale(h) * h.tail_bound).fold(0.0, f64::max),
            source,
        }
    }

    /// CSV with columns `alpha,value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["alpha", "value"])?;
        for (a, v) in self.alpha_grid.iter().zip(&self.values) {
            w.write_record([format!("{a:e}"), format!("{v:e}")])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn check_grid(alpha_grid: &[f64]) -> Result<()> {
    if alpha_grid.is_empty() || alpha_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("alpha grid must be non-empty and strictly increasing".into()));
    }
    Ok(())
}

/// Numeric scaled heat-trace curve and its verdict under `slack`.
pub fn scaled_heat_curve(
    spec: &PotentialSpec,
    t: f64,
    alpha_grid: &[f64],
    config: &DiscretizationConfig,
    slack: f64,
) -> Result<(HeatTraceCurve, MonotonicityVerdict)> {
    check_grid(alpha_grid)?;
    let traces = alpha_grid
        .par_iter()
        .map(|&a| heat_trace(spec, a, t, config, None).map_err(|e| e.at_alpha(a)))
        .collect::<Result<Vec<_>>>()?;
    let curve = HeatTraceCurve::from_traces(t, spec.dimension(), Source::Numeric, &traces);
    let verdict = check_monotonicity(&curve, slack);
    Ok((curve, verdict))
}

/// Exact oscillator curve, judged with slack 0.
pub fn oscillator_heat_curve(dimension: usize, t: f64, alpha_grid: &[f64]) -> Result<(HeatTraceCurve, MonotonicityVerdict)> {
    check_grid(alpha_grid)?;
    let traces = alpha_grid
        .iter()
        .map(|&a| oscillator_heat_trace(&OscillatorModel::new(dimension, a)?, t))
        .collect::<Result<Vec<_>>>()?;
    let curve = HeatTraceCurve::from_traces(t, dimension, Source::ExactModel, &traces);
    let verdict = check_monotonicity(&curve, 0.0);
    Ok((curve, verdict))
}

/// Ten times the largest change of the scaled trace under `h → h/2` at the
/// two ends of the grid.
pub fn heat_refinement_slack(spec: &PotentialSpec, t: f64, alpha_grid: &[f64], config: &DiscretizationConfig) -> Result<f64> {
    check_grid(alpha_grid)?;
    let mut ends = vec![alpha_grid[0]];
    if alpha_grid.len() > 1 {
        ends.push(alpha_grid[alpha_grid.len() - 1]);
    }
    let fine = config.refined();
    let d = 0.5 * spec.dimension() as f64;
    let mut worst = 0.0f64;
    for a in ends {
        let coarse = heat_trace(spec, a, t, config, None)?.trace;
        let refined = heat_trace(spec, a, t, &fine, None)?.trace;
        worst = worst.max(a.powf(d) * (coarse - refined).abs());
    }
    Ok(10.0 * worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::geometric_grid;

    fn quad() -> QuadratureConfig {
        QuadratureConfig::default()
    }

    fn exact(alpha: f64, t: f64) -> f64 {
        0.5 / (t * alpha.sqrt()).sinh()
    }

    #[test]
    fn numeric_oscillator_traces() {
        let spec = PotentialSpec::harmonic(1.0).unwrap();
        let cfg = DiscretizationConfig::standard_confining();
        let one = heat_trace(&spec, 1.0, 1.0, &cfg, None).unwrap();
        assert!((one.trace - 0.425_459_0).abs() < 1e-5);
        assert!(one.tail_bound < 1e-8 * one.trace);
        let two = heat_trace(&spec, 1.0, 2.0, &cfg, None).unwrap();
        assert!((two.trace - 0.137_860_28).abs() < 1e-5);
        let cold = heat_trace(&spec, 1.0, 20.0, &cfg, None).unwrap();
        let ground = (-20.0f64).exp();
        assert!((cold.trace - ground).abs() < 1e-3 * ground);
        // the next level is e^{-40} smaller
        let one_term = heat_trace(&spec, 1.0, 20.0, &cfg, Some(2.0)).unwrap_err();
        assert!(matches!(one_term, Error::CutoffTooLow { .. }));
    }

    #[test]
    fn cutoff_too_low_suggests_a_working_cutoff() {
        let spec = PotentialSpec::harmonic(1.0).unwrap();
        let cfg = DiscretizationConfig::new(12.0, 599).unwrap();
        let Err(Error::CutoffTooLow { suggested, .. }) = heat_trace(&spec, 1.0, 1.0, &cfg, Some(4.0)) else {
            panic!("expected cutoff error");
        };
        assert!(heat_trace(&spec, 1.0, 1.0, &cfg, Some(suggested)).is_ok());
    }

    #[test]
    fn exact_trace_matches_closed_form() {
        for alpha in [0.25, 0.7, 1.0, 2.5, 4.0] {
            for t in [0.5, 1.0, 1.5, 2.0] {
                let ht = oscillator_heat_trace(&OscillatorModel::new(1, alpha).unwrap(), t).unwrap();
                assert!((ht.trace - exact(alpha, t)).abs() < 1e-12 * exact(alpha, t));
                let three = oscillator_heat_trace(&OscillatorModel::new(3, alpha).unwrap(), t).unwrap();
                assert!((three.trace - exact(alpha, t).powi(3)).abs() < 1e-12 * three.trace);
            }
        }
    }

    #[test]
    fn golden_thompson_examples() {
        let spec = PotentialSpec::harmonic(1.0).unwrap();
        let cfg = DiscretizationConfig::standard_confining();
        let gt = golden_thompson_check(&spec, 1.0, 1.0, &cfg, &quad()).unwrap();
        assert!((gt.bound - 0.5).abs() < 1e-12);
        assert!((gt.ratio - 0.8509).abs() < 1e-4);
        let small = golden_thompson_check(&spec, 1.0, 0.1, &cfg, &quad()).unwrap();
        assert!((small.ratio - 0.1 / 0.1f64.sinh()).abs() < 1e-4);
        let quartic = PotentialSpec::quartic(1.0).unwrap();
        let q = golden_thompson_check(&quartic, 1.0, 1.0, &cfg, &quad()).unwrap();
        assert!(q.ratio <= 1.0);
        let well = PotentialSpec::sech_squared(6.0).unwrap();
        assert!(golden_thompson_check(&well, 1.0, 1.0, &cfg, &quad()).is_err());
    }

    #[test]
    fn exact_golden_thompson_sharpens_as_t_shrinks() {
        let mut last = 0.0;
        for t in [2.0, 1.0, 0.5, 0.25, 0.1, 0.01] {
            let gt = oscillator_golden_thompson(&OscillatorModel::new(1, 1.0).unwrap(), t).unwrap();
            assert!(gt.ratio <= 1.0 && gt.ratio > last);
            last = gt.ratio;
        }
        assert!(last > 0.9999);
        let gt = oscillator_golden_thompson(&OscillatorModel::new(2, 4.0).unwrap(), 0.5).unwrap();
        let expected = (1.0f64 / 1.0f64.sinh()).powi(2);
        assert!((gt.ratio - expected).abs() < 1e-12);
    }

    #[test]
    fn separable_trace_is_a_product() {
        let one = PotentialSpec::harmonic(1.0).unwrap();
        let two = PotentialSpec::isotropic(one.family().clone(), 2).unwrap();
        let cfg = DiscretizationConfig::new(12.0, 1199).unwrap();
        let a = heat_trace(&one, 1.0, 1.0, &cfg, None).unwrap();
        let b = heat_trace(&two, 1.0, 1.0, &cfg, None).unwrap();
        assert!((b.trace - a.trace * a.trace).abs() < 1e-14);
        let gt = golden_thompson_check(&two, 1.0, 1.0, &cfg, &quad()).unwrap();
        assert!((gt.bound - 0.25).abs() < 1e-12);
        assert!(gt.ratio < 1.0);
    }

    #[test]
    fn curves_are_non_increasing() {
        let grid = geometric_grid(0.1, 10.0, 30).unwrap();
        for t in [1.0, 2.0] {
            let (curve, verdict) = oscillator_heat_curve(1, t, &grid).unwrap();
            assert!(verdict.non_increasing, "{verdict:?}");
            for (a, v) in curve.alpha_grid.iter().zip(&curve.values) {
                let g = a.sqrt() * exact(*a, t);
                assert!((v - g).abs() < 1e-12 * g);
            }
        }
        let quartic = PotentialSpec::quartic(1.0).unwrap();
        let cfg = DiscretizationConfig::new(12.0, 799).unwrap();
        let grid = geometric_grid(0.25, 4.0, 20).unwrap();
        let slack = heat_refinement_slack(&quartic, 1.0, &grid, &cfg).unwrap();
        let (curve, verdict) = scaled_heat_curve(&quartic, 1.0, &grid, &cfg, slack).unwrap();
        assert!(verdict.non_increasing, "{verdict:?}");
        assert!(curve.truncation_tail_bound < 1e-8 * curve.values.iter().cloned().fold(f64::INFINITY, f64::min));
    }
}
