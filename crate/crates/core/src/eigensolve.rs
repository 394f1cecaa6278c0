//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for
//! eigenvalues, inverse iteration for eigenvectors.
//!
//! Eigenvalue counts come from the signs of the `LDLᵀ` pivots of `H - λ`.
//! A pivot that vanishes is replaced by `-pivmin`, with
//! `pivmin = MIN_POSITIVE · max(1, max e_i²)`, i.e. `λ` is nudged by an
//! amount far below any tolerance used here.
//!
//! Inverse iteration starts from a pseudo-random vector drawn from ChaCha8
//! seeded with [`START_SEED`] plus the eigenvalue index, so results are
//! bit-reproducible. Eigenvalues closer than [`CLUSTER_REL`]·scale are
//! treated as a cluster and their iterates are re-orthogonalized.

use ndarray::{Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretize::{build_hamiltonian, compose_separable, DiscretizationConfig, Hamiltonian1D};
use crate::error::{Error, Result};
use crate::potentials::{PotentialKind, PotentialSpec};

pub const START_SEED: u64 = 0x5EED_0FB1_5EC7;
/// Relative gap below which consecutive eigenvalues form a cluster.
pub const CLUSTER_REL: f64 = 1e-8;
/// Required `‖Hv - λv‖ / (‖v‖ · scale)`.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Inverse-iteration cap per eigenvector.
pub const MAX_INVERSE_ITERATIONS: usize = 10;
/// Largest order for which a full eigenbasis is computed without an override.
pub const FULL_BASIS_CAP: usize = 2400;
/// Relative boundary amplitude above which a state is considered
/// affected by the Dirichlet truncation.
pub const BOUNDARY_AMPLITUDE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    Numeric,
    ExactModel,
}

/// Eigenvectors on the interior grid, one per row, normalized so that
/// `h Σ_i v_i² = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridVectors {
    vectors: Array2<f64>,
    spacing: f64,
    half_width: f64,
}

impl GridVectors {
    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn abscissa(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.spacing
    }

    /// Grid inner product `h Σ a_i b_i`.
    pub fn inner(&self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
        self.spacing * a.dot(&b)
    }
}

/// Ordered eigenvalues with optional grid eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    vectors: Option<GridVectors>,
    alpha: f64,
    source: Source,
    dimension: usize,
    boundary_limited: bool,
}

impl Spectrum {
    pub fn eigenvalues_only(mut eigenvalues: Vec<f64>, alpha: f64, source: Source, dimension: usize) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self {
            eigenvalues,
            vectors: None,
            alpha,
            source,
            dimension,
            boundary_limited: false,
        }
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn grid(&self) -> Option<&GridVectors> {
        self.vectors.as_ref()
    }

    pub fn eigenvector(&self, j: usize) -> Option<ArrayView1<'_, f64>> {
        self.vectors.as_ref().map(|g| g.vectors.row(j))
    }

    pub fn spacing(&self) -> Option<f64> {
        self.vectors.as_ref().map(|g| g.spacing)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn source(&self) -> Source {
        self.source
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// True when the shallowest reported state still has a relative
    /// amplitude above [`BOUNDARY_AMPLITUDE_TOL`] at the Dirichlet ends, so
    /// its eigenvalue is pushed up by the truncation.
    pub fn boundary_limited(&self) -> bool {
        self.boundary_limited
    }

    /// Whether the eigenvectors form a complete basis of the grid space.
    pub fn has_full_basis(&self) -> bool {
        self.vectors
            .as_ref()
            .is_some_and(|g| g.vectors.nrows() == g.vectors.ncols())
    }
}

/// Number of eigenvalues of `diag/off` strictly below `lambda`.
pub fn sturm_count(diagonal: &[f64], off_diagonal: &[f64], lambda: f64) -> usize {
    let n = diagonal.len();
    if n == 0 {
        return 0;
    }
    let max_e2 = off_diagonal.iter().fold(1.0f64, |m, e| m.max(e * e));
    let pivmin = f64::MIN_POSITIVE * max_e2;
    let mut count = 0;
    let mut q = diagonal[0] - lambda;
    for i in 0..n {
        if i > 0 {
            q = diagonal[i] - lambda - off_diagonal[i - 1] * off_diagonal[i - 1] / q;
        }
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Number of eigenvalues of `h` strictly below `lambda`.
pub fn count_below(h: &Hamiltonian1D, lambda: f64) -> usize {
    sturm_count(h.diagonal(), h.off_diagonal(), lambda)
}

fn bisect_index(h: &Hamiltonian1D, k: usize, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    // invariant: count_below(lo) <= k < count_below(hi)
    for _ in 0..256 {
        let mid = 0.5 * (lo + hi);
        let width = hi - lo;
        if width <= tol || width <= 2.0 * f64::EPSILON * mid.abs() || mid <= lo || mid >= hi {
            break;
        }
        if count_below(h, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Eigenvalues in `[lo, hi)`, each bracketed to width `tol`, ascending.
pub fn eigenvalues_in(h: &Hamiltonian1D, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    if !(lo < hi) {
        return Vec::new();
    }
    let tol = tol.max(0.0);
    let first = count_below(h, lo);
    let last = count_below(h, hi);
    let mut out: Vec<f64> = (first..last)
        .into_par_iter()
        .map(|k| bisect_index(h, k, lo, hi, tol))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// The eigenvalues with indices `range` (ascending order, zero-based).
pub fn eigenvalues_by_index(h: &Hamiltonian1D, range: std::ops::Range<usize>, tol: f64) -> Vec<f64> {
    let (glo, ghi) = h.gershgorin();
    let pad = 1e-12 * h.scale() + f64::MIN_POSITIVE;
    let (lo, hi) = (glo - pad, ghi + pad);
    let end = range.end.min(h.len());
    let mut out: Vec<f64> = (range.start..end)
        .into_par_iter()
        .map(|k| bisect_index(h, k, lo, hi, tol))
        .collect();
    out.sort_by(f64::total_cmp);
    out
}

/// Default bisection width: a few ulps of the matrix scale.
pub fn default_tolerance(h: &Hamiltonian1D) -> f64 {
    4.0 * f64::EPSILON * h.scale()
}

/// LU factorization with partial pivoting of `T - λI` for tridiagonal `T`.
struct TridiagonalLu {
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    multipliers: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(diag: &[f64], off: &[f64], lambda: f64, pivot_floor: f64) -> Self {
        let n = diag.len();
        let mut u0 = vec![0.0; n];
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut multipliers = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        let guard = |p: f64| {
            if p.abs() < pivot_floor {
                if p < 0.0 {
                    -pivot_floor
                } else {
                    pivot_floor
                }
            } else {
                p
            }
        };
        // current pivot row: entries at columns k, k+1, k+2
        let (mut c0, mut c1, mut c2) = (diag[0] - lambda, if n > 1 { off[0] } else { 0.0 }, 0.0);
        for k in 0..n - 1 {
            let sub = off[k];
            let nd = diag[k + 1] - lambda;
            let ns = if k + 2 < n { off[k + 1] } else { 0.0 };
            if c0.abs() >= sub.abs() {
                let p = guard(c0);
                let m = sub / p;
                u0[k] = p;
                u1[k] = c1;
                u2[k] = c2;
                multipliers[k] = m;
                c0 = nd - m * c1;
                c1 = ns - m * c2;
            } else {
                let m = c0 / sub;
                u0[k] = sub;
                u1[k] = nd;
                u2[k] = ns;
                multipliers[k] = m;
                swapped[k] = true;
                c0 = c1 - m * nd;
                c1 = c2 - m * ns;
            }
            c2 = 0.0;
        }
        u0[n - 1] = guard(c0);
        Self {
            u0,
            u1,
            u2,
            multipliers,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for k in 0..n - 1 {
            if self.swapped[k] {
                b.swap(k, k + 1);
            }
            b[k + 1] -= self.multipliers[k] * b[k];
        }
        for k in (0..n).rev() {
            let mut s = b[k];
            if k + 1 < n {
                s -= self.u1[k] * b[k + 1];
            }
            if k + 2 < n {
                s -= self.u2[k] * b[k + 2];
            }
            b[k] = s / self.u0[k];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn residual_norm(h: &Hamiltonian1D, lambda: f64, v: &[f64]) -> f64 {
    let hv = h.apply(v);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Relative residual `‖Hv - λv‖ / (‖v‖ · scale)`.
pub fn relative_residual(h: &Hamiltonian1D, lambda: f64, v: &[f64]) -> f64 {
    residual_norm(h, lambda, v) / (dot(v, v).sqrt() * h.scale())
}

fn start_vector(n: usize, index: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED.wrapping_add(index));
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Euclidean-normalized eigenvector for `lambda`, orthogonal to `against`.
fn inverse_iteration(h: &Hamiltonian1D, lambda: f64, index: u64, against: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = h.len();
    let scale = h.scale();
    let lu = TridiagonalLu::factor(h.diagonal(), h.off_diagonal(), lambda, f64::EPSILON * scale);
    let mut v = start_vector(n, index);
    normalize(&mut v);
    let mut converged_steps = 0;
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_INVERSE_ITERATIONS {
        lu.solve(&mut v);
        for _ in 0..2 {
            for u in against {
                let c = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        if normalize(&mut v) == 0.0 || v.iter().any(|x| !x.is_finite()) {
            v = start_vector(n, index.wrapping_add(0x9E37_79B9));
            normalize(&mut v);
            continue;
        }
        residual = residual_norm(h, lambda, &v) / scale;
        if residual <= RESIDUAL_TOL {
            converged_steps += 1;
            // one extra sweep after convergence
            if converged_steps >= 2 {
                break;
            }
        }
    }
    if residual > RESIDUAL_TOL {
        return Err(Error::Solver {
            message: format!("inverse iteration for eigenvalue {lambda} did not converge"),
            residual,
        });
    }
    Ok(v)
}

fn to_grid_normalized(mut v: Vec<f64>, spacing: f64) -> Vec<f64> {
    let norm = (spacing * dot(&v, &v)).sqrt();
    let pivot = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
    let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
    v.iter_mut().for_each(|x| *x *= sign / norm);
    v
}

/// Grid-normalized eigenvector for an eigenvalue located by bisection.
pub fn eigenvector(h: &Hamiltonian1D, eigenvalue: f64) -> Result<Vec<f64>> {
    let v = inverse_iteration(h, eigenvalue, 0, &[])?;
    Ok(to_grid_normalized(v, h.spacing()))
}

/// Splits ascending eigenvalues into runs whose consecutive gaps are
/// below `CLUSTER_REL · scale`.
fn clusters(eigenvalues: &[f64], scale: f64) -> Vec<std::ops::Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=eigenvalues.len() {
        if i == eigenvalues.len() || eigenvalues[i] - eigenvalues[i - 1] >= CLUSTER_REL * scale {
            out.push(start..i);
            start = i;
        }
    }
    out
}

/// Grid-normalized eigenvectors (one per row) for ascending eigenvalues
/// of `h`. `first_index` offsets the start-vector seeds.
pub fn eigenpairs(h: &Hamiltonian1D, eigenvalues: &[f64], first_index: usize) -> Result<Array2<f64>> {
    let n = h.len();
    let scale = h.scale();
    let groups = clusters(eigenvalues, scale);
    let blocks: Vec<Vec<Vec<f64>>> = groups
        .par_iter()
        .map(|range| {
            let mut found: Vec<Vec<f64>> = Vec::with_capacity(range.len());
            for i in range.clone() {
                let v = inverse_iteration(h, eigenvalues[i], (first_index + i) as u64, &found)?;
                found.push(v);
            }
            Ok(found)
        })
        .collect::<Result<_>>()?;
    let mut out = Array2::zeros((eigenvalues.len(), n));
    for (mut row, v) in out.axis_iter_mut(Axis(0)).zip(blocks.into_iter().flatten()) {
        let v = to_grid_normalized(v, h.spacing());
        row.assign(&ArrayView1::from(&v[..]));
    }
    Ok(out)
}

fn boundary_ratio(v: ArrayView1<f64>) -> f64 {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let edge = v[0].abs().max(v[v.len() - 1].abs());
    if max > 0.0 {
        edge / max
    } else {
        0.0
    }
}

fn numeric_spectrum_1d(
    spec: &PotentialSpec,
    alpha: f64,
    config: &DiscretizationConfig,
    cutoff: f64,
    with_vectors: bool,
) -> Result<Spectrum> {
    let h = build_hamiltonian(spec, alpha, config)?;
    let (glo, _) = h.gershgorin();
    let lo = glo - 1e-12 * h.scale() - f64::MIN_POSITIVE;
    let eigenvalues = eigenvalues_in(&h, lo, cutoff, default_tolerance(&h));
    let (vectors, boundary_limited) = if with_vectors {
        let v = eigenpairs(&h, &eigenvalues, 0)?;
        let limited = v.nrows() > 0 && boundary_ratio(v.row(v.nrows() - 1)) > BOUNDARY_AMPLITUDE_TOL;
        (
            Some(GridVectors {
                vectors: v,
                spacing: h.spacing(),
                half_width: h.half_width(),
            }),
            limited,
        )
    } else if let Some(&top) = eigenvalues.last() {
        let v = eigenvector(&h, top)?;
        (None, boundary_ratio(ArrayView1::from(&v)) > BOUNDARY_AMPLITUDE_TOL)
    } else {
        (None, false)
    };
    Ok(Spectrum {
        eigenvalues,
        vectors,
        alpha,
        source: Source::Numeric,
        dimension: 1,
        boundary_limited,
    })
}

/// All eigenvalues strictly below `cutoff`. One-dimensional specs are
/// solved directly; separable specs are composed from their factors
/// (eigenvalues only). Decaying factors contribute bound states only.
pub fn spectrum_below(
    spec: &PotentialSpec,
    alpha: f64,
    config: &DiscretizationConfig,
    cutoff: f64,
    with_vectors: bool,
) -> Result<Spectrum> {
    if spec.dimension() == 1 {
        return numeric_spectrum_1d(spec, alpha, config, cutoff, with_vectors);
    }
    let factors = spec.factors();
    let lowest = factors
        .iter()
        .map(|f| {
            let h = build_hamiltonian(f, alpha, config)?;
            Ok(eigenvalues_by_index(&h, 0..1, default_tolerance(&h))[0])
        })
        .collect::<Result<Vec<f64>>>()?;
    let total_lowest: f64 = lowest.iter().sum();
    let factor_spectra = factors
        .iter()
        .zip(&lowest)
        .map(|(f, low)| {
            let mut own_cutoff = cutoff - (total_lowest - low);
            if f.kind() == PotentialKind::Decaying {
                own_cutoff = own_cutoff.min(0.0);
            }
            // strict inequality at the composed level is applied below
            numeric_spectrum_1d(f, alpha, config, own_cutoff + 1e-12 * own_cutoff.abs().max(1.0), false)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut composed = compose_separable(&factor_spectra, cutoff)?;
    composed.eigenvalues.retain(|&e| e < cutoff);
    composed.boundary_limited = factor_spectra.iter().any(|s| s.boundary_limited);
    Ok(composed)
}

/// All eigenvalues `E < 0` of a decaying well.
pub fn negative_spectrum(
    spec: &PotentialSpec,
    alpha: f64,
    config: &DiscretizationConfig,
    with_vectors: bool,
) -> Result<Spectrum> {
    if spec.kind() != PotentialKind::Decaying {
        return Err(Error::Domain(
            "negative spectrum is defined for decaying wells (V <= 0, V -> 0)".into(),
        ));
    }
    spectrum_below(spec, alpha, config, 0.0, with_vectors)
}

/// Eigenvalues below `cutoff` extrapolated to `h → 0` from `config` and
/// its coarsening by one halving: `(4 E(h) - E(2h)) / 3`, which cancels the
/// `O(h²)` error of the three-point stencil. Both grids must hold the same
/// number of states below the cutoff.
pub fn extrapolated_spectrum_below(
    spec: &PotentialSpec,
    alpha: f64,
    config: &DiscretizationConfig,
    cutoff: f64,
) -> Result<Spectrum> {
    let fine = spectrum_below(spec, alpha, config, cutoff, false)?;
    let coarse = spectrum_below(spec, alpha, &config.coarsened()?, cutoff, false)?;
    if fine.len() != coarse.len() {
        return Err(Error::Truncation(format!(
            "state count below {cutoff} differs between grids ({} vs {}); refine or move the cutoff",
            coarse.len(),
            fine.len()
        )));
    }
    let values = fine
        .eigenvalues()
        .iter()
        .zip(coarse.eigenvalues())
        .map(|(f, c)| (4.0 * f - c) / 3.0)
        .collect();
    let mut out = Spectrum::eigenvalues_only(values, alpha, Source::Numeric, spec.dimension());
    out.boundary_limited = fine.boundary_limited || coarse.boundary_limited;
    Ok(out)
}

/// [`extrapolated_spectrum_below`] at cutoff 0 for a decaying well.
pub fn extrapolated_negative_spectrum(spec: &PotentialSpec, alpha: f64, config: &DiscretizationConfig) -> Result<Spectrum> {
    if spec.kind() != PotentialKind::Decaying {
        return Err(Error::Domain(
            "negative spectrum is defined for decaying wells (V <= 0, V -> 0)".into(),
        ));
    }
    extrapolated_spectrum_below(spec, alpha, config, 0.0)
}

/// Every eigenpair of the discretized operator. Orders above
/// [`FULL_BASIS_CAP`] need `allow_large`.
pub fn full_eigenbasis(
    spec: &PotentialSpec,
    alpha: f64,
    config: &DiscretizationConfig,
    allow_large: bool,
) -> Result<Spectrum> {
    if config.points > FULL_BASIS_CAP && !allow_large {
        return Err(Error::Config(format!(
            "full eigenbasis of order {} exceeds the cap {FULL_BASIS_CAP}; pass the override to proceed",
            config.points
        )));
    }
    let h = build_hamiltonian(spec, alpha, config)?;
    full_eigenbasis_of(&h)
}

/// Every eigenpair of an already assembled matrix.
pub fn full_eigenbasis_of(h: &Hamiltonian1D) -> Result<Spectrum> {
    let eigenvalues = eigenvalues_by_index(h, 0..h.len(), default_tolerance(h));
    let vectors = eigenpairs(h, &eigenvalues, 0)?;
    Ok(Spectrum {
        eigenvalues,
        vectors: Some(GridVectors {
            vectors,
            spacing: h.spacing(),
            half_width: h.half_width(),
        }),
        alpha: h.alpha(),
        source: Source::Numeric,
        dimension: 1,
        boundary_limited: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn free(alpha: f64, n: usize) -> Hamiltonian1D {
        let cfg = DiscretizationConfig::new(1.0, n).unwrap();
        build_hamiltonian(&PotentialSpec::zero(1.0).unwrap(), alpha, &cfg).unwrap()
    }

    #[test]
    fn count_examples() {
        let h = free(1.0, 50);
        assert_eq!(count_below(&h, 0.0), 0);
        let (_, hi) = h.gershgorin();
        assert_eq!(count_below(&h, hi + 1.0), 50);
        let pt = build_hamiltonian(
            &PotentialSpec::sech_squared(6.0).unwrap(),
            1.0,
            &DiscretizationConfig::standard_well(),
        )
        .unwrap();
        assert_eq!(count_below(&pt, 0.0), 2);
    }

    #[test]
    fn free_matrix_matches_toeplitz_closed_form() {
        let alpha = 0.7;
        let n = 301;
        let h = free(alpha, n);
        let eigs = eigenvalues_by_index(&h, 0..n, default_tolerance(&h));
        let hs = h.spacing();
        for (k, e) in eigs.iter().enumerate() {
            let exact = 2.0 * alpha / (hs * hs) * (1.0 - ((k + 1) as f64 * PI / (n + 1) as f64).cos());
            assert!((e - exact).abs() <= 1e-12 * h.scale(), "k={k}: {e} vs {exact}");
        }
    }

    #[test]
    fn eigenvalues_in_respects_counts_and_windows() {
        let spec = PotentialSpec::harmonic(1.0).unwrap();
        let cfg = DiscretizationConfig::standard_confining();
        let h = build_hamiltonian(&spec, 1.0, &cfg).unwrap();
        let eigs = eigenvalues_in(&h, 0.0, 6.0, 1e-10);
        assert_eq!(eigs.len(), 3);
        for (e, exact) in eigs.iter().zip([1.0, 3.0, 5.0]) {
            assert!((e - exact).abs() < 1e-4);
        }
        // window strictly between the first two levels
        assert!(eigenvalues_in(&h, 1.5, 2.5, 1e-10).is_empty());
        for &(lo, hi) in &[(-3.0, 0.5), (0.5, 40.0), (2.0, 1e4)] {
            let n = eigenvalues_in(&h, lo, hi, 1e-9).len();
            assert_eq!(n, count_below(&h, hi) - count_below(&h, lo));
        }
    }

    #[test]
    fn harmonic_ground_state_vector() {
        let spec = PotentialSpec::harmonic(1.0).unwrap();
        let cfg = DiscretizationConfig::standard_confining();
        let h = build_hamiltonian(&spec, 1.0, &cfg).unwrap();
        let e0 = eigenvalues_by_index(&h, 0..1, default_tolerance(&h))[0];
        assert!((e0 - 1.0).abs() < 1e-5);
        let v = eigenvector(&h, e0).unwrap();
        assert!(relative_residual(&h, e0, &v) <= RESIDUAL_TOL);
        let norm = h.spacing() * dot(&v, &v);
        assert!((norm - 1.0).abs() < 1e-12);
        for (i, vi) in v.iter().enumerate() {
            let x = h.abscissa(i);
            let exact = PI.powf(-0.25) * (-0.5 * x * x).exp();
            assert!((vi - exact).abs() < 1e-4, "x={x}");
        }
    }

    #[test]
    fn sech_squared_ground_state_is_nodeless() {
        let spec = PotentialSpec::sech_squared(6.0).unwrap();
        let s = negative_spectrum(&spec, 1.0, &DiscretizationConfig::new(20.0, 1999).unwrap(), true).unwrap();
        assert_eq!(s.len(), 2);
        let ground = s.eigenvector(0).unwrap();
        assert!(ground.iter().all(|&x| x > 0.0));
        let excited = s.eigenvector(1).unwrap();
        let significant: Vec<f64> = excited.iter().copied().filter(|x| x.abs() > 1e-10).collect();
        let sign_changes = significant.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
        assert_eq!(sign_changes, 1);
    }

    #[test]
    fn negative_spectrum_poschl_teller() {
        let spec = PotentialSpec::sech_squared(6.0).unwrap();
        let cfg = DiscretizationConfig::standard_well();
        let s = negative_spectrum(&spec, 1.0, &cfg, false).unwrap();
        assert_eq!(s.source(), Source::Numeric);
        assert!((s.eigenvalues()[0] + 4.0).abs() < 1e-4);
        assert!((s.eigenvalues()[1] + 1.0).abs() < 1e-4);
        assert!(!s.boundary_limited());

        // s(100) < 1: a single shallow state whose decay length (~18)
        // is comparable to the box, so the truncation lifts it and flags it
        let shallow = negative_spectrum(&spec, 100.0, &cfg, false).unwrap();
        let exact = crate::potentials::sech_squared_levels(6.0, 100.0);
        assert_eq!(exact.len(), 1);
        assert_eq!(shallow.len(), 1);
        assert!(shallow.boundary_limited());
        assert!(shallow.eigenvalues()[0] >= exact[0]);
        let wide = DiscretizationConfig::new(80.0, 15999).unwrap();
        let resolved = negative_spectrum(&spec, 100.0, &wide, false).unwrap();
        assert!((resolved.eigenvalues()[0] - exact[0]).abs() < 5e-4);
    }

    #[test]
    fn extrapolation_removes_second_order_error() {
        let spec = PotentialSpec::sech_squared(6.0).unwrap();
        let exact = crate::potentials::sech_squared_levels(6.0, 0.25);
        let worst = |s: &Spectrum| s.eigenvalues().iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let coarse = DiscretizationConfig::new(20.0, 1999).unwrap();
        let fine = DiscretizationConfig::new(20.0, 3999).unwrap();
        let raw = worst(&negative_spectrum(&spec, 0.25, &fine, false).unwrap());
        let rich_coarse = extrapolated_negative_spectrum(&spec, 0.25, &coarse).unwrap();
        let rich_fine = extrapolated_negative_spectrum(&spec, 0.25, &fine).unwrap();
        assert_eq!(rich_fine.len(), exact.len());
        assert!(raw > 1e-4, "{raw}");
        // the leftover error is fourth order: halving h divides it by about 16
        let ratio = worst(&rich_coarse) / worst(&rich_fine);
        assert!(ratio > 12.0, "{ratio}");
        assert!(worst(&rich_fine) < 1e-6, "{}", worst(&rich_fine));
    }

    #[test]
    fn negative_spectrum_rejects_confining() {
        let spec = PotentialSpec::harmonic(1.0).unwrap();
        let cfg = DiscretizationConfig::standard_confining();
        assert!(matches!(negative_spectrum(&spec, 1.0, &cfg, false), Err(Error::Domain(_))));
    }

    /// Even ground state of the finite square well from
    /// `k tan(k a) = κ`, `k = √((V0 + E)/α)`, `κ = √(-E/α)`.
    fn square_well_ground_state(depth: f64, a: f64, alpha: f64) -> f64 {
        let f = |e: f64| {
            let k = ((depth + e) / alpha).sqrt();
            let kappa = (-e / alpha).sqrt();
            k * (k * a).sin() - kappa * (k * a).cos()
        };
        // ka < π/2 on the ground-state branch
        let e_max = (alpha * (PI / (2.0 * a)).powi(2) - depth).min(-1e-300);
        let e_min = -depth + 1e-15;
        let (mut lo, mut hi) = (e_min, e_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn shallow_square_well_is_flagged() {
        let spec = PotentialSpec::square(1.0, 1.0).unwrap();
        let cfg = DiscretizationConfig::standard_well();
        // deep regime: well resolved, not flagged; the jump in V limits
        // the difference scheme to first order
        let deep = negative_spectrum(&spec, 0.05, &cfg, false).unwrap();
        let exact = square_well_ground_state(1.0, 1.0, 0.05);
        assert!((deep.eigenvalues()[0] - exact).abs() < 2e-3);
        assert!(!deep.boundary_limited());
        // shallow regime: exact bound state is barely bound; box truncation
        // either lifts it above zero or leaves it flagged
        let alpha = 10.0;
        let exact = square_well_ground_state(1.0, 1.0, alpha);
        assert!(exact < 0.0 && exact > -0.1);
        let shallow = negative_spectrum(&spec, alpha, &cfg, false).unwrap();
        assert!(shallow.is_empty() || shallow.boundary_limited());
        if let Some(&e) = shallow.eigenvalues().first() {
            assert!(e >= exact);
        }
    }

    #[test]
    fn full_basis_is_orthonormal() {
        let spec = PotentialSpec::sech_squared(6.0).unwrap();
        let cfg = DiscretizationConfig::new(20.0, 400).unwrap();
        let s = full_eigenbasis(&spec, 1.0, &cfg, false).unwrap();
        let g = s.grid().unwrap();
        let v = g.vectors();
        let gram = v.dot(&v.t()) * g.spacing();
        for j in 0..v.nrows() {
            for k in 0..v.nrows() {
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((gram[[j, k]] - expected).abs() < 1e-8, "({j},{k}) = {}", gram[[j, k]]);
            }
        }
        let h = build_hamiltonian(&spec, 1.0, &cfg).unwrap();
        for j in 0..v.nrows() {
            let row: Vec<f64> = v.row(j).to_vec();
            assert!(relative_residual(&h, s.eigenvalues()[j], &row) <= RESIDUAL_TOL);
        }
    }

    #[test]
    fn full_basis_cap() {
        let spec = PotentialSpec::sech_squared(6.0).unwrap();
        let cfg = DiscretizationConfig::standard_well();
        assert!(matches!(full_eigenbasis(&spec, 1.0, &cfg, false), Err(Error::Config(_))));
    }

    #[test]
    fn separable_oscillator_spectrum() {
        let spec = PotentialSpec::isotropic(crate::potentials::Family::HarmonicWell { stiffness: 1.0 }, 2).unwrap();
        let cfg = DiscretizationConfig::standard_confining();
        let s = spectrum_below(&spec, 1.0, &cfg, 5.0, false).unwrap();
        assert_eq!(s.dimension(), 2);
        assert_eq!(s.len(), 3);
        for (e, exact) in s.eigenvalues().iter().zip([2.0, 4.0, 4.0]) {
            assert_relative_eq!(*e, exact, epsilon = 1e-4);
        }
    }

    #[test]
    fn lu_solves_tridiagonal_systems() {
        let diag = [1e-3, 2.0, -1.0, 4.0, 0.5];
        let off = [3.0, -1.0, 2.0, 0.25];
        let lu = TridiagonalLu::factor(&diag, &off, 0.0, 1e-300);
        let x = [1.0, -2.0, 0.5, 3.0, -1.0];
        let mut b: Vec<f64> = (0..5)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += off[i - 1] * x[i - 1];
                }
                if i < 4 {
                    s += off[i] * x[i + 1];
                }
                s
            })
            .collect();
        lu.solve(&mut b);
        for (a, e) in b.iter().zip(x) {
            assert!((a - e).abs() < 1e-12);
        }
    }
}
