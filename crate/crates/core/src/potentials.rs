//! Potential families, their evaluation, and the classical phase-space
//! quantities that bound eigenvalue moments and heat traces.
//!
//! Quadrature over the real line is truncated to `[-R, R]`, with `R` chosen
//! from each family's analytic decay so that the neglected tail is below
//! `TAIL_REL_TOL` of the integral:
//!
//! | family            | integrand bound beyond `R`           | `R`                         |
//! |-------------------|--------------------------------------|-----------------------------|
//! | sech² well        | `(4g)^p e^{-2p|x|}`                  | `(p ln 4 + 32) / 2p + 1`    |
//! | Gaussian well     | `depth^p e^{-p x²/w²}`               | `w (√(32/p) + 1)`           |
//! | square well       | zero outside the well                | half-width                  |
//! | harmonic well     | `e^{-t ω² x²}`                       | `√(32/(t ω²)) + 1`          |
//! | quartic well      | `e^{-t c x⁴}`                        | `(32/(t c))^{1/4} + 1`      |
//!
//! Every truncation is re-checked against a closed-form tail bound after
//! integration; a violation is reported as [`Error::Truncation`].

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, trapezoid, QuadratureConfig};
use crate::special::gamma_ratio;

/// Relative size of the neglected tail of a truncated integral.
pub const TAIL_REL_TOL: f64 = 1e-10;

const TAIL_EXPONENT: f64 = 32.0;

/// Piecewise-linear potential given on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPotential {
    abscissae: Vec<f64>,
    values: Vec<f64>,
}

impl GridPotential {
    pub fn new(abscissae: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if abscissae.len() != values.len() {
            return Err(Error::Config(format!(
                "grid potential has {} abscissae but {} values",
                abscissae.len(),
                values.len()
            )));
        }
        if abscissae.len() < 2 {
            return Err(Error::Config("grid potential needs at least two samples".into()));
        }
        if abscissae.iter().chain(values.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Config("grid potential contains non-finite samples".into()));
        }
        if abscissae.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("grid abscissae must be strictly increasing".into()));
        }
        Ok(Self { abscissae, values })
    }

    /// Reads two comma-separated columns `(abscissa, value)`. A first row
    /// that does not parse as numbers is taken as a header.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (row, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() < 2 {
                return Err(Error::Parse(format!("row {}: expected two columns", row + 1)));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(v)) => {
                    xs.push(x);
                    vs.push(v);
                }
                _ if row == 0 => continue,
                _ => {
                    return Err(Error::Parse(format!(
                        "row {}: cannot parse '{}', '{}' as numbers",
                        row + 1,
                        &record[0],
                        &record[1]
                    )))
                }
            }
        }
        Self::new(xs, vs)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_csv_reader(file)
    }

    pub fn abscissae(&self) -> &[f64] {
        &self.abscissae
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn range(&self) -> (f64, f64) {
        (self.abscissae[0], *self.abscissae.last().unwrap())
    }

    pub fn interpolate(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.range();
        if !(lo..=hi).contains(&x) {
            return Err(Error::OutOfRange { x, lo, hi });
        }
        let i = self.abscissae.partition_point(|&a| a <= x).clamp(1, self.abscissae.len() - 1);
        let (x0, x1) = (self.abscissae[i - 1], self.abscissae[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        let w = (x - x0) / (x1 - x0);
        Ok(v0 + w * (v1 - v0))
    }
}

/// One-dimensional potential shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `ω² x²`
    HarmonicWell { stiffness: f64 },
    /// `-g sech²(x)`
    SechSquaredWell { depth: f64 },
    /// `-depth` on `|x| < half_width`, zero outside.
    SquareWell { depth: f64, half_width: f64 },
    /// `-depth exp(-(x/width)²)`
    GaussianWell { depth: f64, width: f64 },
    /// `c x⁴`
    QuarticWell { coefficient: f64 },
    GridSampled(GridPotential),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PotentialKind {
    /// `V ≤ 0`, `V → 0` at infinity.
    Decaying,
    /// `V ≥ 0`, `V → ∞` at infinity.
    Confining,
    /// Grid data with mixed signs.
    Unclassified,
}

impl Family {
    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        match *self {
            Family::HarmonicWell { stiffness } => positive("stiffness", stiffness),
            Family::SechSquaredWell { depth } => positive("depth", depth),
            Family::SquareWell { depth, half_width } => {
                positive("depth", depth)?;
                positive("half_width", half_width)
            }
            Family::GaussianWell { depth, width } => {
                positive("depth", depth)?;
                positive("width", width)
            }
            Family::QuarticWell { coefficient } => positive("coefficient", coefficient),
            Family::GridSampled(_) => Ok(()),
        }
    }

    pub fn kind(&self) -> PotentialKind {
        match self {
            Family::HarmonicWell { .. } | Family::QuarticWell { .. } => PotentialKind::Confining,
            Family::SechSquaredWell { .. } | Family::SquareWell { .. } | Family::GaussianWell { .. } => {
                PotentialKind::Decaying
            }
            Family::GridSampled(g) => {
                if g.values.iter().all(|&v| v <= 0.0) {
                    PotentialKind::Decaying
                } else if g.values.iter().all(|&v| v >= 0.0) {
                    PotentialKind::Confining
                } else {
                    PotentialKind::Unclassified
                }
            }
        }
    }

    pub fn evaluate(&self, x: f64) -> Result<f64> {
        Ok(match self {
            Family::HarmonicWell { stiffness } => stiffness * x * x,
            Family::SechSquaredWell { depth } => {
                let s = 1.0 / x.cosh();
                -depth * s * s
            }
            Family::SquareWell { depth, half_width } => {
                if x.abs() < *half_width {
                    -depth
                } else {
                    0.0
                }
            }
            Family::GaussianWell { depth, width } => -depth * (-(x / width).powi(2)).exp(),
            Family::QuarticWell { coefficient } => coefficient * x.powi(4),
            Family::GridSampled(g) => return g.interpolate(x),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::HarmonicWell { .. } => "harmonic",
            Family::SechSquaredWell { .. } => "sech2",
            Family::SquareWell { .. } => "square",
            Family::GaussianWell { .. } => "gauss",
            Family::QuarticWell { .. } => "quartic",
            Family::GridSampled(_) => "grid",
        }
    }
}

/// A potential on `R^d`. For `d > 1` the potential is the coordinate-wise
/// sum of one-dimensional factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    family: Family,
    dimension: usize,
    separable_factors: Option<Vec<PotentialSpec>>,
}

impl PotentialSpec {
    pub fn one_dimensional(family: Family) -> Result<Self> {
        family.validate()?;
        Ok(Self {
            family,
            dimension: 1,
            separable_factors: None,
        })
    }

    /// `V(x) = Σ_i V_i(x_i)`. The first factor's family is recorded as
    /// the spec's nominal family.
    pub fn separable(factors: Vec<PotentialSpec>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Config("separable potential needs at least one factor".into()));
        }
        if factors.iter().any(|f| f.dimension != 1) {
            return Err(Error::Config("separable factors must be one-dimensional".into()));
        }
        if factors.len() == 1 {
            return Ok(factors.into_iter().next().unwrap());
        }
        Ok(Self {
            family: factors[0].family.clone(),
            dimension: factors.len(),
            separable_factors: Some(factors),
        })
    }

    /// The same one-dimensional family in each of `d` coordinates.
    pub fn isotropic(family: Family, dimension: usize) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Config("dimension must be at least 1".into()));
        }
        let factor = Self::one_dimensional(family)?;
        Self::separable(vec![factor; dimension])
    }

    pub fn harmonic(stiffness: f64) -> Result<Self> {
        Self::one_dimensional(Family::HarmonicWell { stiffness })
    }

    pub fn sech_squared(depth: f64) -> Result<Self> {
        Self::one_dimensional(Family::SechSquaredWell { depth })
    }

    pub fn square(depth: f64, half_width: f64) -> Result<Self> {
        Self::one_dimensional(Family::SquareWell { depth, half_width })
    }

    pub fn gaussian(depth: f64, width: f64) -> Result<Self> {
        Self::one_dimensional(Family::GaussianWell { depth, width })
    }

    pub fn quartic(coefficient: f64) -> Result<Self> {
        Self::one_dimensional(Family::QuarticWell { coefficient })
    }

    pub fn grid(grid: GridPotential) -> Result<Self> {
        Self::one_dimensional(Family::GridSampled(grid))
    }

    /// `V ≡ 0` sampled on `[-half_width, half_width]`.
    pub fn zero(half_width: f64) -> Result<Self> {
        Self::grid(GridPotential::new(vec![-half_width, half_width], vec![0.0, 0.0])?)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// The one-dimensional factors; a one-dimensional spec is its own
    /// single factor.
    pub fn factors(&self) -> Vec<&PotentialSpec> {
        match &self.separable_factors {
            Some(f) => f.iter().collect(),
            None => vec![self],
        }
    }

    pub fn kind(&self) -> PotentialKind {
        let kinds: Vec<_> = self.factors().iter().map(|f| f.family.kind()).collect();
        if kinds.iter().all(|&k| k == PotentialKind::Confining) {
            PotentialKind::Confining
        } else if kinds.iter().all(|&k| k == PotentialKind::Decaying) {
            PotentialKind::Decaying
        } else {
            PotentialKind::Unclassified
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dimension {
            return Err(Error::Config(format!(
                "point has {} coordinates, potential is {}-dimensional",
                x.len(),
                self.dimension
            )));
        }
        match &self.separable_factors {
            None => self.family.evaluate(x[0]),
            Some(factors) => factors
                .iter()
                .zip(x)
                .map(|(f, &xi)| f.family.evaluate(xi))
                .sum(),
        }
    }

    /// Shorthand for one-dimensional specs.
    pub fn evaluate_1d(&self, x: f64) -> Result<f64> {
        self.evaluate(&[x])
    }

    pub(crate) fn require_one_dimensional(&self) -> Result<()> {
        if self.dimension == 1 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "operation needs a one-dimensional potential, got d = {}",
                self.dimension
            )))
        }
    }
}

/// `L^cl_{σ,d} = (4π)^{-d/2} Γ(σ+1) / Γ(σ+d/2+1)`.
pub fn classical_constant(sigma: f64, dimension: usize) -> Result<f64> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("sigma must be >= 0, got {sigma}")));
    }
    if dimension == 0 {
        return Err(Error::Domain("dimension must be at least 1".into()));
    }
    let d = dimension as f64;
    Ok((4.0 * PI).powf(-0.5 * d) * gamma_ratio(sigma + 1.0, sigma + 0.5 * d + 1.0))
}

/// Right-hand side of the sharp Lieb-Thirring inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalBound {
    pub sigma: f64,
    pub dimension: usize,
    pub classical_constant: f64,
    /// `∫ (-V)^{σ + d/2}`
    pub phase_space_integral: f64,
    pub bound: f64,
}

impl ClassicalBound {
    pub fn new(spec: &PotentialSpec, sigma: f64, quad: &QuadratureConfig) -> Result<Self> {
        let d = spec.dimension();
        let classical_constant = classical_constant(sigma, d)?;
        let phase_space_integral = phase_space_integral(spec, sigma + 0.5 * d as f64, quad)?;
        Ok(Self {
            sigma,
            dimension: d,
            classical_constant,
            phase_space_integral,
            bound: classical_constant * phase_space_integral,
        })
    }
}

fn checked_tail(value: f64, tail: f64, what: &str) -> Result<f64> {
    if tail > TAIL_REL_TOL * value.abs() {
        Err(Error::Truncation(format!(
            "{what}: tail bound {tail:e} exceeds {TAIL_REL_TOL:e} of integral {value:e}"
        )))
    } else {
        Ok(value)
    }
}

/// `∫_{R^d} (-V)^exponent dx` for a decaying well.
pub fn phase_space_integral(spec: &PotentialSpec, exponent: f64, quad: &QuadratureConfig) -> Result<f64> {
    if !(exponent > 0.0) {
        return Err(Error::Domain(format!("exponent must be positive, got {exponent}")));
    }
    match spec.kind() {
        PotentialKind::Decaying => {}
        PotentialKind::Confining => {
            return Err(Error::Domain(
                "phase-space integral is defined for decaying wells, not confining potentials".into(),
            ))
        }
        PotentialKind::Unclassified => {
            return Err(Error::Domain("phase-space integral needs V <= 0 everywhere".into()))
        }
    }
    if spec.dimension() > 1 {
        // (-Σ V_i(x_i))^p does not decay along the coordinate axes.
        return Err(Error::Truncation(format!(
            "separable well in d = {} does not vanish at infinity; the phase-space integral diverges",
            spec.dimension()
        )));
    }
    let p = exponent;
    match spec.family() {
        Family::SechSquaredWell { depth } => {
            let r = (p * 4f64.ln() + TAIL_EXPONENT) / (2.0 * p) + 1.0;
            let q = integrate_with_breaks(
                |x: f64| {
                    let s = 1.0 / x.cosh();
                    (depth * s * s).powf(p)
                },
                &[-r, 0.0, r],
                quad,
            )?;
            let tail = 2.0 * (4.0 * depth).powf(p) * (-2.0 * p * r).exp() / (2.0 * p);
            checked_tail(q.value, tail, "sech2 phase-space integral")
        }
        Family::GaussianWell { depth, width } => {
            let r = width * ((TAIL_EXPONENT / p).sqrt() + 1.0);
            let q = integrate_with_breaks(
                |x: f64| depth.powf(p) * (-p * (x / width).powi(2)).exp(),
                &[-r, 0.0, r],
                quad,
            )?;
            // ∫_R^∞ e^{-p x²/w²} ≤ w² e^{-p R²/w²} / (2 p R)
            let tail = 2.0 * depth.powf(p) * width * width * (-p * (r / width).powi(2)).exp() / (2.0 * p * r);
            checked_tail(q.value, tail, "gaussian phase-space integral")
        }
        Family::SquareWell { depth, half_width } => {
            let q = integrate_with_breaks(|_| depth.powf(p), &[-half_width, *half_width], quad)?;
            Ok(q.value)
        }
        Family::GridSampled(g) => {
            let y: Vec<f64> = g.values().iter().map(|v| (-v).max(0.0).powf(p)).collect();
            Ok(trapezoid(g.abscissae(), &y))
        }
        Family::HarmonicWell { .. } | Family::QuarticWell { .. } => unreachable!("confining"),
    }
}

/// `∫_{R^d} e^{-tV} dx` for a confining potential. Separable potentials
/// factor into a product of one-dimensional integrals. Grid-sampled
/// potentials are integrated over their sampled range.
pub fn laplace_integral(spec: &PotentialSpec, t: f64, quad: &QuadratureConfig) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    if spec.kind() != PotentialKind::Confining {
        return Err(Error::Domain(
            "Laplace integral of e^{-tV} diverges unless V is confining".into(),
        ));
    }
    if spec.dimension() > 1 {
        return spec
            .factors()
            .into_iter()
            .map(|f| laplace_integral(f, t, quad))
            .product();
    }
    match spec.family() {
        Family::HarmonicWell { stiffness } => {
            let a = t * stiffness;
            let r = (TAIL_EXPONENT / a).sqrt() + 1.0;
            let q = integrate_with_breaks(|x: f64| (-a * x * x).exp(), &[-r, 0.0, r], quad)?;
            let tail = 2.0 * (-a * r * r).exp() / (2.0 * a * r);
            checked_tail(q.value, tail, "harmonic Laplace integral")
        }
        Family::QuarticWell { coefficient } => {
            let a = t * coefficient;
            let r = (TAIL_EXPONENT / a).powf(0.25) + 1.0;
            let q = integrate_with_breaks(|x: f64| (-a * x.powi(4)).exp(), &[-r, 0.0, r], quad)?;
            // ∫_R^∞ e^{-a x⁴} ≤ e^{-a R⁴} / (4 a R³)
            let tail = 2.0 * (-a * r.powi(4)).exp() / (4.0 * a * r.powi(3));
            checked_tail(q.value, tail, "quartic Laplace integral")
        }
        Family::GridSampled(g) => {
            let y: Vec<f64> = g.values().iter().map(|v| (-t * v).exp()).collect();
            Ok(trapezoid(g.abscissae(), &y))
        }
        _ => unreachable!("decaying families rejected above"),
    }
}

/// Closed-form bound states of `-α d²/dx² - g sech²(x)`:
/// `E_n = -α (s - n)²` for integers `0 ≤ n < s`, where
/// `s = (-1 + √(1 + 4g/α)) / 2`.
pub fn sech_squared_levels(depth: f64, alpha: f64) -> Vec<f64> {
    let s = sech_squared_parameter(depth, alpha);
    (0..)
        .map(|n| n as f64)
        .take_while(|&n| n < s)
        .map(|n| -alpha * (s - n).powi(2))
        .collect()
}

/// `s(α) = (-1 + √(1 + 4g/α)) / 2`
pub fn sech_squared_parameter(depth: f64, alpha: f64) -> f64 {
    0.5 * (-1.0 + (1.0 + 4.0 * depth / alpha).sqrt())
}

/// Parses the command-line potential grammar
///
/// ```text
/// potential := family [ ":" param { "," param } ]
/// param     := key "=" value
/// ```
///
/// | family     | keys (default)                        |
/// |------------|---------------------------------------|
/// | `harmonic` | `w2` (1)                              |
/// | `sech2`    | `g` (6)                               |
/// | `square`   | `depth` (1), `half_width` (1)         |
/// | `gauss`    | `depth` (1), `width` (1)              |
/// | `quartic`  | `c` (1)                               |
/// | `grid`     | `file` (required): CSV of `x,V` rows   |
///
/// Unknown families or keys are configuration errors.
pub fn parse_family(text: &str) -> Result<Family> {
    let text = text.trim();
    let (name, rest) = match text.split_once(':') {
        Some((name, rest)) => (name.trim(), rest.trim()),
        None => (text, ""),
    };
    let mut params: Vec<(&str, &str)> = Vec::new();
    for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("potential parameter {item:?} is not key=value")))?;
        let k = k.trim();
        if params.iter().any(|(seen, _)| *seen == k) {
            return Err(Error::Config(format!("potential parameter {k:?} given twice")));
        }
        params.push((k, v.trim()));
    }
    let allowed: &[&str] = match name {
        "harmonic" => &["w2"],
        "sech2" => &["g"],
        "square" => &["depth", "half_width"],
        "gauss" => &["depth", "width"],
        "quartic" => &["c"],
        "grid" => &["file"],
        _ => {
            return Err(Error::Config(format!(
                "unknown potential {name:?}; expected harmonic, sech2, square, gauss, quartic or grid"
            )))
        }
    };
    if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
        return Err(Error::Config(format!(
            "unknown parameter {k:?} for potential {name}; allowed: {}",
            allowed.join(", ")
        )));
    }
    let raw = |key: &str| params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v);
    let num = |key: &str, default: f64| -> Result<f64> {
        match raw(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("parameter {key} of {name}: {v:?} is not a number"))),
        }
    };
    let family = match name {
        "harmonic" => Family::HarmonicWell { stiffness: num("w2", 1.0)? },
        "sech2" => Family::SechSquaredWell { depth: num("g", 6.0)? },
        "square" => Family::SquareWell {
            depth: num("depth", 1.0)?,
            half_width: num("half_width", 1.0)?,
        },
        "gauss" => Family::GaussianWell {
            depth: num("depth", 1.0)?,
            width: num("width", 1.0)?,
        },
        "quartic" => Family::QuarticWell { coefficient: num("c", 1.0)? },
        _ => {
            let file = raw("file").ok_or_else(|| Error::Config("potential grid needs file=<path>".into()))?;
            Family::GridSampled(GridPotential::from_csv_path(file)?)
        }
    };
    family.validate()?;
    Ok(family)
}

/// [`parse_family`] lifted to `d` dimensions as an isotropic separable sum.
pub fn parse_potential(text: &str, dimension: usize) -> Result<PotentialSpec> {
    PotentialSpec::isotropic(parse_family(text)?, dimension)
}
