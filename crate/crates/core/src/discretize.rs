//! Finite-difference representation of `H(α) = -α d²/dx² + V` on a
//! truncated interval with Dirichlet ends, and composition of separable
//! multi-dimensional spectra from one-dimensional ones.

use serde::{Deserialize, Serialize};

use crate::eigensolve::{Source, Spectrum};
use crate::error::{Error, Result};
use crate::potentials::{PotentialKind, PotentialSpec};

/// Domain `[-L, L]` with `n` interior points, spacing `h = 2L/(n+1)`,
/// Dirichlet boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationConfig {
    pub half_width: f64,
    pub points: usize,
}

impl DiscretizationConfig {
    /// Half-width used for decaying wells.
    pub const WELL_HALF_WIDTH: f64 = 20.0;
    /// Half-width used for confining potentials.
    pub const CONFINING_HALF_WIDTH: f64 = 12.0;

    pub fn new(half_width: f64, points: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::Config(format!("half-width must be positive, got {half_width}")));
        }
        if points < 3 {
            return Err(Error::Config(format!("need at least 3 interior points, got {points}")));
        }
        Ok(Self { half_width, points })
    }

    /// `L = 20`, `n = 3999` (h = 0.01).
    pub fn standard_well() -> Self {
        Self {
            half_width: Self::WELL_HALF_WIDTH,
            points: 3999,
        }
    }

    /// `L = 12`, `n = 2399` (h = 0.01).
    pub fn standard_confining() -> Self {
        Self {
            half_width: Self::CONFINING_HALF_WIDTH,
            points: 2399,
        }
    }

    /// Default grid for the potential's family.
    pub fn standard_for(spec: &PotentialSpec) -> Self {
        match spec.kind() {
            PotentialKind::Confining => Self::standard_confining(),
            _ => Self::standard_well(),
        }
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.points + 1) as f64
    }

    /// Abscissa of interior point `i` (zero-based): `-L + (i+1) h`.
    pub fn abscissa(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.spacing()
    }

    pub fn abscissae(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.abscissa(i)).collect()
    }

    /// Same interval with the spacing halved (`n → 2n + 1`).
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            points: 2 * self.points + 1,
        }
    }

    /// Same interval with the spacing doubled (`n → (n - 1) / 2`).
    pub fn coarsened(&self) -> Result<Self> {
        Self::new(self.half_width, (self.points - 1) / 2)
    }
}

/// Symmetric tridiagonal matrix of the discretized operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian1D {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
    spacing: f64,
    half_width: f64,
    alpha: f64,
    potential: PotentialSpec,
}

impl Hamiltonian1D {
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn potential(&self) -> &PotentialSpec {
        &self.potential
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.spacing
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off_diagonal[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off_diagonal[i].abs() } else { 0.0 };
            lo = lo.min(self.diagonal[i] - left - right);
            hi = hi.max(self.diagonal[i] + left + right);
        }
        (lo, hi)
    }

    /// Magnitude used to make tolerances relative: `max(|lo|, |hi|)` of
    /// the Gershgorin enclosure.
    pub fn scale(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    /// `y = H v`
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.len();
        assert_eq!(v.len(), n, "vector length must match matrix order");
        (0..n)
            .map(|i| {
                let mut y = self.diagonal[i] * v[i];
                if i > 0 {
                    y += self.off_diagonal[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    y += self.off_diagonal[i] * v[i + 1];
                }
                y
            })
            .collect()
    }
}

/// Second-order central-difference matrix of `-α d²/dx² + V` on
/// `config`'s grid: `diag_i = 2α/h² + V(x_i)`, `off_i = -α/h²`.
pub fn build_hamiltonian(spec: &PotentialSpec, alpha: f64, config: &DiscretizationConfig) -> Result<Hamiltonian1D> {
    spec.require_one_dimensional()?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::Config(format!("alpha must be positive, got {alpha}")));
    }
    let config = DiscretizationConfig::new(config.half_width, config.points)?;
    let h = config.spacing();
    let kinetic = alpha / (h * h);
    let diagonal = (0..config.points)
        .map(|i| spec.evaluate_1d(config.abscissa(i)).map(|v| 2.0 * kinetic + v))
        .collect::<Result<Vec<_>>>()?;
    Ok(Hamiltonian1D {
        diagonal,
        off_diagonal: vec![-kinetic; config.points - 1],
        spacing: h,
        half_width: config.half_width,
        alpha,
        potential: spec.clone(),
    })
}

/// All sums `E = Σ_i E^{(i)}_{j_i} ≤ cutoff` over the Cartesian product of
/// the factor spectra, with multiplicity, sorted ascending.
pub fn compose_separable(factors: &[Spectrum], cutoff: f64) -> Result<Spectrum> {
    let Some(first) = factors.first() else {
        return Err(Error::Config("need at least one factor spectrum".into()));
    };
    for f in factors {
        if f.eigenvalues().windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::Contract("factor spectra must be sorted ascending".into()));
        }
    }
    // suffix_min[i] = smallest possible contribution of factors i..
    let mut suffix_min = vec![0.0; factors.len() + 1];
    for i in (0..factors.len()).rev() {
        let lowest = factors[i].eigenvalues().first().copied().unwrap_or(f64::INFINITY);
        suffix_min[i] = suffix_min[i + 1] + lowest;
    }
    let mut out = Vec::new();
    fn recurse(factors: &[Spectrum], suffix_min: &[f64], depth: usize, partial: f64, cutoff: f64, out: &mut Vec<f64>) {
        if depth == factors.len() {
            out.push(partial);
            return;
        }
        for &e in factors[depth].eigenvalues() {
            if partial + e + suffix_min[depth + 1] > cutoff {
                break;
            }
            recurse(factors, suffix_min, depth + 1, partial + e, cutoff, out);
        }
    }
    if suffix_min[0] <= cutoff {
        recurse(factors, &suffix_min, 0, 0.0, cutoff, &mut out);
    }
    out.sort_by(f64::total_cmp);
    let source = if factors.iter().any(|f| f.source() == Source::Numeric) {
        Source::Numeric
    } else {
        Source::ExactModel
    };
    let dimension = factors.iter().map(|f| f.dimension()).sum();
    Ok(Spectrum::eigenvalues_only(out, first.alpha(), source, dimension))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn exact(values: Vec<f64>) -> Spectrum {
        Spectrum::eigenvalues_only(values, 1.0, Source::ExactModel, 1)
    }

    #[test]
    fn config_validation() {
        assert!(DiscretizationConfig::new(1.0, 2).is_err());
        assert!(DiscretizationConfig::new(0.0, 10).is_err());
        let c = DiscretizationConfig::new(20.0, 3999).unwrap();
        assert_relative_eq!(c.spacing(), 0.01, max_relative = 1e-15);
        assert_relative_eq!(c.abscissa(0), -19.99, max_relative = 1e-14);
        assert_relative_eq!(c.refined().spacing(), 0.005, max_relative = 1e-15);
    }

    #[test]
    fn matrix_entries() {
        let spec = PotentialSpec::harmonic(1.0).unwrap();
        let cfg = DiscretizationConfig::new(2.0, 3).unwrap();
        let h = build_hamiltonian(&spec, 0.5, &cfg).unwrap();
        assert_eq!(h.len(), 3);
        // h = 1, x = -1, 0, 1
        assert_eq!(h.diagonal(), &[2.0, 1.0, 2.0]);
        assert_eq!(h.off_diagonal(), &[-0.5, -0.5]);
        assert!(h.off_diagonal().iter().all(|&e| e < 0.0));
        assert_eq!(h.apply(&[1.0, 0.0, 0.0]), vec![2.0, -0.5, 0.0]);
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = PotentialSpec::harmonic(1.0).unwrap();
        let cfg = DiscretizationConfig::standard_confining();
        assert!(build_hamiltonian(&spec, 0.0, &cfg).is_err());
        let bad = DiscretizationConfig { half_width: 1.0, points: 2 };
        assert!(matches!(build_hamiltonian(&spec, 1.0, &bad), Err(Error::Config(_))));
        let d2 = PotentialSpec::isotropic(spec.family().clone(), 2).unwrap();
        assert!(build_hamiltonian(&d2, 1.0, &cfg).is_err());
    }

    #[test]
    fn grid_potential_must_cover_interval() {
        let spec = PotentialSpec::zero(5.0).unwrap();
        let cfg = DiscretizationConfig::new(8.0, 7).unwrap();
        assert!(matches!(build_hamiltonian(&spec, 1.0, &cfg), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn compose_examples() {
        let odd = exact(vec![1.0, 3.0, 5.0, 7.0]);
        let s = compose_separable(&[odd.clone(), odd.clone()], 4.5).unwrap();
        assert_eq!(s.eigenvalues(), &[2.0, 4.0, 4.0]);
        let s = compose_separable(std::slice::from_ref(&odd), 4.0).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 3.0]);
        let bound = exact(vec![-4.0, -1.0]);
        let s = compose_separable(&[bound.clone(), bound], 0.0).unwrap();
        assert_eq!(s.eigenvalues(), &[-8.0, -5.0, -5.0, -2.0]);
        assert_eq!(s.dimension(), 2);
        let s = compose_separable(&[odd.clone(), odd], 1.0).unwrap();
        assert!(s.eigenvalues().is_empty());
    }

    proptest! {
        #[test]
        fn compose_matches_brute_force(
            a in proptest::collection::vec(-5.0f64..5.0, 0..6),
            b in proptest::collection::vec(-5.0f64..5.0, 0..6),
            c in proptest::collection::vec(-5.0f64..5.0, 0..4),
            cutoff in -6.0f64..8.0,
        ) {
            let sorted = |mut v: Vec<f64>| { v.sort_by(f64::total_cmp); v };
            let (a, b, c) = (sorted(a), sorted(b), sorted(c));
            let mut brute = Vec::new();
            for &x in &a { for &y in &b { for &z in &c {
                if x + y + z <= cutoff { brute.push(x + y + z); }
            }}}
            brute.sort_by(f64::total_cmp);
            let s = compose_separable(&[exact(a), exact(b), exact(c)], cutoff).unwrap();
            prop_assert_eq!(s.eigenvalues().len(), brute.len());
            for (u, v) in s.eigenvalues().iter().zip(&brute) {
                prop_assert!((u - v).abs() < 1e-12);
            }
        }
    }
}
