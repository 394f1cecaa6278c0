//! Kinetic matrix elements `T_jk = ⟨φ_j, D_c φ_k⟩²` over a full discrete
//! eigenbasis and the identities they satisfy: the gap formula, the
//! sum rule (continuum form and its exact discrete correction), the trace
//! formula and the quadratic identity.
//!
//! `D_c` is the central difference `(v_{i+1} - v_{i-1}) / 2h` with zero ghost
//! values. On the grid `[H, X] = -2α D_c` holds exactly, so the gap formula
//! and the corrected sum rule are rounding-level identities while the
//! continuum sum rule carries an `O(h²)` defect equal to `h² K_j / 2α`.

use ndarray::{Array1, Array2, ArrayView1, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::Spectrum;
use crate::error::{Error, Result};

/// Pairs with `|E_k - E_j|` below this multiple of `max |E|` are treated as
/// degenerate. Bisection resolves eigenvalues to `4 ε` of the matrix scale,
/// so anything closer is indistinguishable from an exact tie. Resolved
/// tunnelling pairs near the top of the grid spectrum sit just above this
/// and must stay in the sums.
pub const DEGENERATE_REL: f64 = 32.0 * f64::EPSILON;
/// Relative gap below which the trace formula switches to `f'(E_j)`.
pub const MIDPOINT_REL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Identity {
    GapFormula,
    SumRule,
    SumRuleDiscreteCorrected,
    TraceFormula,
    QuadraticIdentity,
}

/// Outcome of one identity evaluation. `residual` is an absolute value and
/// `scale` the magnitude of the largest term, so `residual / scale` is the
/// relative defect.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityResidual {
    pub identity: Identity,
    pub indices: Vec<usize>,
    pub residual: f64,
    pub scale: f64,
    pub spacing: f64,
    /// The computed side of the identity (e.g. `4α Σ T_jk/(E_k-E_j)`).
    pub value: f64,
    /// Degenerate pairs left out of the sums.
    pub excluded: Vec<(usize, usize)>,
}

impl IdentityResidual {
    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.residual / self.scale
        } else {
            self.residual
        }
    }
}

/// `D_c v` with Dirichlet ghosts.
pub fn central_difference(v: ArrayView1<f64>, h: f64) -> Array1<f64> {
    let n = v.len();
    Array1::from_shape_fn(n, |i| {
        let right = if i + 1 < n { v[i + 1] } else { 0.0 };
        let left = if i > 0 { v[i - 1] } else { 0.0 };
        (right - left) / (2.0 * h)
    })
}

/// `⟨-α Δ_h v, v⟩` in the grid inner product.
pub fn discrete_kinetic_energy(v: ArrayView1<f64>, h: f64, alpha: f64) -> f64 {
    let n = v.len();
    let mut sum = 0.0;
    for i in 0..n {
        let left = if i > 0 { v[i - 1] } else { 0.0 };
        let right = if i + 1 < n { v[i + 1] } else { 0.0 };
        sum += v[i] * (2.0 * v[i] - left - right);
    }
    alpha * sum / h
}

/// Symmetric matrix `T_jk` (packed upper triangle) with the diagonal kinetic
/// energies `K_j`, tied to the spectrum it was computed from.
#[derive(Debug, Clone)]
pub struct KineticMatrix {
    n: usize,
    packed: Vec<f64>,
    diagonal_kinetic: Vec<f64>,
    gradient_norms: Vec<f64>,
    spectrum: Spectrum,
}

fn packed_index(n: usize, j: usize, k: usize) -> usize {
    let (a, b) = if j <= k { (j, k) } else { (k, j) };
    a * n - a * (a + 1) / 2 + b
}

/// Matrix `G_jk = ⟨φ_j, D_c φ_k⟩` over the basis, antisymmetric up to
/// rounding.
fn gradient_matrix(spectrum: &Spectrum) -> Result<Array2<f64>> {
    let grid = full_grid(spectrum)?;
    let h = grid.spacing();
    let phi = grid.vectors();
    let mut dphi = Array2::<f64>::zeros(phi.raw_dim());
    for (mut out, v) in dphi.axis_iter_mut(Axis(0)).zip(phi.axis_iter(Axis(0))) {
        out.assign(&central_difference(v, h));
    }
    Ok(phi.dot(&dphi.t()) * h)
}

fn full_grid(spectrum: &Spectrum) -> Result<&crate::eigensolve::GridVectors> {
    if !spectrum.has_full_basis() {
        return Err(Error::Contract(
            "a full eigenbasis (all n eigenvectors) is required".into(),
        ));
    }
    Ok(spectrum.grid().expect("full basis implies vectors"))
}

impl KineticMatrix {
    pub fn new(spectrum: Spectrum) -> Result<Self> {
        let g = gradient_matrix(&spectrum)?;
        let grid = spectrum.grid().expect("checked by gradient_matrix");
        let h = grid.spacing();
        let n = g.nrows();
        let mut packed = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for k in j..n {
                // antisymmetrize before squaring; the diagonal is zero
                let m = if j == k { 0.0 } else { 0.5 * (g[[j, k]] - g[[k, j]]) };
                packed.push(m * m);
            }
        }
        let alpha = spectrum.alpha();
        let diagonal_kinetic = grid
            .vectors()
            .axis_iter(Axis(0))
            .map(|v| discrete_kinetic_energy(v, h, alpha))
            .collect();
        let gradient_norms = grid
            .vectors()
            .axis_iter(Axis(0))
            .map(|v| {
                let d = central_difference(v, h);
                h * d.dot(&d)
            })
            .collect();
        Ok(Self {
            n,
            packed,
            diagonal_kinetic,
            gradient_norms,
            spectrum,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, j: usize, k: usize) -> f64 {
        assert!(j < self.n && k < self.n, "index out of range");
        self.packed[packed_index(self.n, j, k)]
    }

    /// `K_j = ⟨-α Δ_h φ_j, φ_j⟩`.
    pub fn diagonal_kinetic(&self) -> &[f64] {
        &self.diagonal_kinetic
    }

    /// `⟨D_c φ_j, D_c φ_j⟩`, which the row sums reproduce by completeness.
    pub fn gradient_norms(&self) -> &[f64] {
        &self.gradient_norms
    }

    /// `T_j = Σ_k T_jk`.
    pub fn row_sum(&self, j: usize) -> f64 {
        (0..self.n).map(|k| self.get(j, k)).sum()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn eigenvalues(&self) -> &[f64] {
        self.spectrum.eigenvalues()
    }

    pub fn alpha(&self) -> f64 {
        self.spectrum.alpha()
    }

    pub fn spacing(&self) -> f64 {
        self.spectrum.spacing().expect("kinetic matrix holds a full basis")
    }

    /// `max |E|`, the reference magnitude for degeneracy tests.
    pub fn energy_scale(&self) -> f64 {
        self.eigenvalues()
            .iter()
            .fold(0.0f64, |m, e| m.max(e.abs()))
            .max(f64::MIN_POSITIVE)
    }
}

pub fn kinetic_matrix(spectrum: Spectrum) -> Result<KineticMatrix> {
    KineticMatrix::new(spectrum)
}

fn position_element(grid: &crate::eigensolve::GridVectors, j: usize, k: usize) -> f64 {
    let phi = grid.vectors();
    let h = grid.spacing();
    let (a, b) = (phi.row(j), phi.row(k));
    (0..a.len()).map(|i| grid.abscissa(i) * a[i] * b[i]).sum::<f64>() * h
}

/// Reference magnitude of the matrix-level commutator `HX - XH`:
/// `max|E| · L`, the size of the largest entries of either product.
fn commutator_scale(spectrum: &Spectrum) -> f64 {
    let grid = spectrum.grid().expect("caller checked");
    let emax = spectrum.eigenvalues().iter().fold(0.0f64, |m, e| m.max(e.abs()));
    (emax * grid.half_width()).max(f64::MIN_POSITIVE)
}

/// `|(E_k - E_j)⟨xφ_j, φ_k⟩ + 2α⟨D_c φ_j, φ_k⟩|` for one pair.
pub fn gap_formula_residual(spectrum: &Spectrum, j: usize, k: usize) -> Result<IdentityResidual> {
    let grid = full_grid(spectrum)?;
    let n = spectrum.len();
    if j >= n || k >= n {
        return Err(Error::Config(format!("state index out of range (have {n})")));
    }
    let e = spectrum.eigenvalues();
    let h = grid.spacing();
    let x_jk = position_element(grid, j, k);
    let d = central_difference(grid.vectors().row(j), h);
    let d_jk = h * d.dot(&grid.vectors().row(k));
    let left = (e[k] - e[j]) * x_jk;
    let right = -2.0 * spectrum.alpha() * d_jk;
    Ok(IdentityResidual {
        identity: Identity::GapFormula,
        indices: vec![j, k],
        residual: (left - right).abs(),
        scale: commutator_scale(spectrum),
        spacing: h,
        value: left,
        excluded: Vec::new(),
    })
}

/// Largest gap-formula residual over all pairs, computed with two dense
/// products. Returns the worst pair.
pub fn gap_formula_all_pairs(spectrum: &Spectrum) -> Result<IdentityResidual> {
    let grid = full_grid(spectrum)?;
    let h = grid.spacing();
    let phi = grid.vectors();
    let x = Array1::from_shape_fn(phi.ncols(), |i| grid.abscissa(i));
    let xphi = phi * &x.view().insert_axis(Axis(0));
    let xm = phi.dot(&xphi.t()) * h;
    let g = gradient_matrix(spectrum)?;
    let e = spectrum.eigenvalues();
    let two_alpha = 2.0 * spectrum.alpha();
    let n = e.len();
    let (mut worst, mut at, mut value) = (0.0f64, (0, 0), 0.0);
    for j in 0..n {
        for k in 0..n {
            // ⟨D_c φ_j, φ_k⟩ = G_kj
            let left = (e[k] - e[j]) * xm[[j, k]];
            let r = (left + two_alpha * g[[k, j]]).abs();
            if r > worst || (j, k) == (0, 0) {
                worst = r;
                at = (j, k);
                value = left;
            }
        }
    }
    Ok(IdentityResidual {
        identity: Identity::GapFormula,
        indices: vec![at.0, at.1],
        residual: worst,
        scale: commutator_scale(spectrum),
        spacing: h,
        value,
        excluded: Vec::new(),
    })
}

struct SumRuleParts {
    sum: f64,
    largest_term: f64,
    excluded: Vec<(usize, usize)>,
}

fn sum_rule_parts(kin: &KineticMatrix, j: usize) -> SumRuleParts {
    let e = kin.eigenvalues();
    let threshold = DEGENERATE_REL * kin.energy_scale();
    let four_alpha = 4.0 * kin.alpha();
    let mut sum = 0.0;
    let mut largest_term = 0.0f64;
    let mut excluded = Vec::new();
    for k in 0..kin.len() {
        if k == j {
            continue;
        }
        let gap = e[k] - e[j];
        if gap.abs() < threshold {
            excluded.push((j, k));
            continue;
        }
        let term = four_alpha * kin.get(j, k) / gap;
        sum += term;
        largest_term = largest_term.max(term.abs());
    }
    SumRuleParts {
        sum,
        largest_term,
        excluded,
    }
}

fn check_index(kin: &KineticMatrix, j: usize) -> Result<()> {
    if j >= kin.len() {
        return Err(Error::Config(format!("state index {j} out of range (have {})", kin.len())));
    }
    Ok(())
}

/// `|1 - 4α Σ_{k≠j} T_jk/(E_k - E_j)|`, the one-dimensional sum rule.
pub fn sum_rule_residual(kin: &KineticMatrix, j: usize) -> Result<IdentityResidual> {
    check_index(kin, j)?;
    let parts = sum_rule_parts(kin, j);
    Ok(IdentityResidual {
        identity: Identity::SumRule,
        indices: vec![j],
        residual: (1.0 - parts.sum).abs(),
        scale: parts.largest_term.max(1.0),
        spacing: kin.spacing(),
        value: parts.sum,
        excluded: parts.excluded,
    })
}

/// `|(1 - h²K_j/2α) - 4α Σ_{k≠j} T_jk/(E_k - E_j)|`, exact on the grid.
pub fn sum_rule_discrete_corrected(kin: &KineticMatrix, j: usize) -> Result<IdentityResidual> {
    check_index(kin, j)?;
    let parts = sum_rule_parts(kin, j);
    let h = kin.spacing();
    let target = 1.0 - h * h * kin.diagonal_kinetic()[j] / (2.0 * kin.alpha());
    Ok(IdentityResidual {
        identity: Identity::SumRuleDiscreteCorrected,
        indices: vec![j],
        residual: (target - parts.sum).abs(),
        scale: parts.largest_term.max(target.abs()).max(1.0),
        spacing: h,
        value: parts.sum,
        excluded: parts.excluded,
    })
}

/// Admissible test functions for the trace formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `e^{-tE}`; meant for confining problems.
    Exponential { t: f64 },
    /// `(z - E)₊^σ` with `σ ≥ 2`.
    RieszPower { z: f64, sigma: f64 },
    /// `p(E) (c - E)₊²` with `p` given by ascending coefficients.
    PolynomialCutoff { coefficients: Vec<f64>, cutoff: f64 },
}

impl TestFunction {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Exponential { t } => t.is_finite() && *t > 0.0,
            Self::RieszPower { z, sigma } => z.is_finite() && sigma.is_finite() && *sigma >= 2.0,
            Self::PolynomialCutoff { coefficients, cutoff } => {
                cutoff.is_finite() && coefficients.iter().all(|c| c.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "unsupported test function {self:?}: need t > 0, sigma >= 2 and finite parameters"
            )))
        }
    }

    pub fn value(&self, e: f64) -> f64 {
        match self {
            Self::Exponential { t } => (-t * e).exp(),
            Self::RieszPower { z, sigma } => {
                let gap = z - e;
                if gap > 0.0 {
                    gap.powf(*sigma)
                } else {
                    0.0
                }
            }
            Self::PolynomialCutoff { coefficients, cutoff } => {
                let gap = cutoff - e;
                if gap > 0.0 {
                    horner(coefficients, e) * gap * gap
                } else {
                    0.0
                }
            }
        }
    }

    pub fn derivative(&self, e: f64) -> f64 {
        match self {
            Self::Exponential { t } => -t * (-t * e).exp(),
            Self::RieszPower { z, sigma } => {
                let gap = z - e;
                if gap > 0.0 {
                    -sigma * gap.powf(sigma - 1.0)
                } else {
                    0.0
                }
            }
            Self::PolynomialCutoff { coefficients, cutoff } => {
                let gap = cutoff - e;
                if gap > 0.0 {
                    let derived: Vec<f64> = coefficients
                        .iter()
                        .enumerate()
                        .skip(1)
                        .map(|(i, c)| i as f64 * c)
                        .collect();
                    horner(&derived, e) * gap * gap - 2.0 * horner(coefficients, e) * gap
                } else {
                    0.0
                }
            }
        }
    }

    /// Energy above which `f` vanishes identically, if any.
    pub fn support_end(&self) -> Option<f64> {
        match self {
            Self::Exponential { .. } => None,
            Self::RieszPower { z, .. } => Some(*z),
            Self::PolynomialCutoff { cutoff, .. } => Some(*cutoff),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Self::PolynomialCutoff { coefficients, .. } if coefficients.iter().all(|c| *c == 0.0))
    }
}

fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// `|d Σ_j f(E_j) + 2α Σ_j Σ_k T_jk ∫₀¹ f'(sE_j + (1-s)E_k) ds|` with `d = 1`.
///
/// The divided difference is used for distinct eigenvalues and `f'(E_j)`
/// when the gap is below [`MIDPOINT_REL`] of the spectral scale. The
/// truncation is symmetric: a pair `(j, k)` contributes when
/// `min(E_j, E_k) ≤ energy_cutoff`, and the single sum runs over
/// `E_j ≤ energy_cutoff`. Pairs with both energies above the cutoff are
/// dropped, which is exact for functions supported below the cutoff.
/// `scale` is `d Σ |f(E_j)|` over the retained states.
pub fn trace_formula_residual(kin: &KineticMatrix, f: &TestFunction, energy_cutoff: f64) -> Result<IdentityResidual> {
    f.validate()?;
    if energy_cutoff.is_nan() {
        return Err(Error::Config("energy cutoff must not be NaN".into()));
    }
    let h = kin.spacing();
    if f.is_zero() {
        return Ok(IdentityResidual {
            identity: Identity::TraceFormula,
            indices: Vec::new(),
            residual: 0.0,
            scale: 0.0,
            spacing: h,
            value: 0.0,
            excluded: Vec::new(),
        });
    }
    let e = kin.eigenvalues();
    let n = e.len();
    let fe: Vec<f64> = e.iter().map(|&x| f.value(x)).collect();
    let inside: Vec<usize> = (0..n).filter(|&j| e[j] <= energy_cutoff).collect();
    let midpoint = MIDPOINT_REL * kin.energy_scale();
    let single: f64 = inside.iter().map(|&j| fe[j]).sum();
    let scale: f64 = inside.iter().map(|&j| fe[j].abs()).sum();
    // each unordered pair once, doubled; j in the retained set, any k
    let pair_sum: f64 = inside
        .par_iter()
        .map(|&j| {
            let mut acc = 0.0;
            for k in 0..n {
                if k == j {
                    continue;
                }
                // the pair (j, k) with both retained is visited twice
                let weight = if e[k] <= energy_cutoff { 1.0 } else { 2.0 };
                let gap = e[k] - e[j];
                let divided = if gap.abs() <= midpoint {
                    f.derivative(e[j])
                } else {
                    (fe[k] - fe[j]) / gap
                };
                acc += weight * kin.get(j, k) * divided;
            }
            acc
        })
        .sum();
    let value = single + 2.0 * kin.alpha() * pair_sum;
    Ok(IdentityResidual {
        identity: Identity::TraceFormula,
        indices: inside,
        residual: value.abs(),
        scale,
        spacing: h,
        value,
        excluded: Vec::new(),
    })
}

/// Both sides of the quadratic identity at threshold `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCheck {
    pub z: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Largest single term on either side.
    pub scale: f64,
    pub states_below: usize,
    pub rhs_nonpositive: bool,
}

/// `Σ_{E_j<z} d(z-E_j)² - 4α(z-E_j)T_j` against
/// `4 Σ_{E_j<z} Σ_{E_k≥z} T_jk (z-E_j)(z-E_k)/(E_k-E_j)` with `d = 1`.
pub fn quadratic_identity_check(kin: &KineticMatrix, z: f64) -> Result<QuadraticCheck> {
    if !z.is_finite() {
        return Err(Error::Config(format!("threshold must be finite, got {z}")));
    }
    let e = kin.eigenvalues();
    let four_alpha = 4.0 * kin.alpha();
    let below: Vec<usize> = (0..e.len()).filter(|&j| e[j] < z).collect();
    let mut lhs = 0.0;
    let mut rhs = 0.0;
    let mut scale = 0.0f64;
    for &j in &below {
        let a = z - e[j];
        let first = a * a;
        let second = four_alpha * a * kin.row_sum(j);
        lhs += first - second;
        scale = scale.max(first).max(second.abs());
        for k in 0..e.len() {
            if e[k] < z {
                continue;
            }
            let term = 4.0 * kin.get(j, k) * a * (z - e[k]) / (e[k] - e[j]);
            rhs += term;
            scale = scale.max(term.abs());
        }
    }
    Ok(QuadraticCheck {
        z,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        scale,
        states_below: below.len(),
        rhs_nonpositive: rhs <= 0.0,
    })
}
