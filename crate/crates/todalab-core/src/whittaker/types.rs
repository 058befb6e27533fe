//! Parameter, contour, and pattern-law types shared across the
//! Whittaker-function operations.

use crate::error::{LabError, Result};
use crate::path::DriftVector;
use num_complex::Complex64;

/// Spectral parameter lambda in C^N.
///
/// Holds the complex parameter of a Whittaker function. Real drift vectors nu
/// and the single kernel parameter theta are carried as specializations.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralParam {
    values: Vec<Complex64>,
}

impl SpectralParam {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(LabError::invalid("spectral parameter needs at least one component"));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(LabError::invalid("spectral parameter components must be finite"));
        }
        Ok(Self { values })
    }

    /// Real parameter (the drift specialization).
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Purely imaginary parameter with the given imaginary parts.
    pub fn from_imaginary(imag: &[f64]) -> Result<Self> {
        Self::new(imag.iter().map(|&v| Complex64::new(0.0, v)).collect())
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn component(&self, i: usize) -> Complex64 {
        self.values[i]
    }

    /// True when every component has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    /// True when every component has zero real part.
    pub fn is_imaginary(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0)
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    pub fn min_re(&self) -> f64 {
        self.values.iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    pub fn negated(&self) -> Self {
        Self { values: self.values.iter().map(|v| -v).collect() }
    }

    /// Componentwise sum with another parameter of the same size.
    pub fn shifted(&self, other: &SpectralParam) -> Result<Self> {
        if self.n() != other.n() {
            return Err(LabError::invalid(format!(
                "cannot add spectral parameters of sizes {} and {}",
                self.n(),
                other.n()
            )));
        }
        Self::new(self.values.iter().zip(other.values()).map(|(a, b)| a + b).collect())
    }

    /// Componentwise scaling by a real factor.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * factor).collect())
    }
}

impl From<&DriftVector> for SpectralParam {
    fn from(nu: &DriftVector) -> Self {
        Self { values: nu.0.iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }
}

/// A product of vertical lines Re z_j = abscissas[j], |Im z_j| <= half_width,
/// discretized with `points` equally spaced nodes per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct ContourSpec {
    abscissas: Vec<f64>,
    half_width: f64,
    points: usize,
}

impl ContourSpec {
    pub fn new(abscissas: Vec<f64>, half_width: f64, points: usize) -> Result<Self> {
        if abscissas.is_empty() || abscissas.iter().any(|a| !a.is_finite()) {
            return Err(LabError::invalid("contour abscissas must be finite and nonempty"));
        }
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(LabError::invalid(format!(
                "contour half-width must be positive and finite, got {half_width}"
            )));
        }
        if points < 16 {
            return Err(LabError::invalid(format!(
                "contour needs at least 16 points per dimension, got {points}"
            )));
        }
        Ok(Self { abscissas, half_width, points })
    }

    /// Contour with the same abscissa in every dimension.
    pub fn uniform(abscissa: f64, dims: usize, half_width: f64, points: usize) -> Result<Self> {
        Self::new(vec![abscissa; dims], half_width, points)
    }

    /// Default contour for the Gamma-kernel recursion one level below
    /// `lambda`: every abscissa sits one unit left of the smallest Re lambda.
    pub fn recursion_default(lambda: &SpectralParam) -> Result<Self> {
        let dims = lambda.n().saturating_sub(1).max(1);
        Self::uniform(lambda.min_re() - 1.0, dims, 30.0, 400)
    }

    /// Default contour for the Laplace-transform moment integral.
    pub fn moment_default(dims: usize) -> Result<Self> {
        Self::uniform(-0.5, dims, 30.0, 400)
    }

    pub fn dims(&self) -> usize {
        self.abscissas.len()
    }

    pub fn abscissas(&self) -> &[f64] {
        &self.abscissas
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Node spacing along the imaginary direction.
    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.points - 1) as f64
    }

    /// k-th node on dimension j.
    pub fn node(&self, j: usize, k: usize) -> Complex64 {
        Complex64::new(self.abscissas[j], -self.half_width + self.step() * k as f64)
    }

    /// Trapezoid weight of node k (times the spacing).
    pub fn weight(&self, k: usize) -> f64 {
        if k == 0 || k + 1 == self.points {
            0.5 * self.step()
        } else {
            self.step()
        }
    }

    /// Same contour with the half-width doubled and the spacing kept, used
    /// for truncation-error estimates.
    pub fn widened(&self) -> Self {
        Self {
            abscissas: self.abscissas.clone(),
            half_width: 2.0 * self.half_width,
            points: 2 * self.points - 1,
        }
    }
}

/// The Gibbs law on triangular patterns with fixed bottom row x: density
/// proportional to exp(F_nu(T)) over patterns T with T_{N,.} = x.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsPatternLaw {
    x: Vec<f64>,
    nu: DriftVector,
}

impl GibbsPatternLaw {
    pub fn new(x: Vec<f64>, nu: DriftVector) -> Result<Self> {
        if x.is_empty() {
            return Err(LabError::invalid("pattern law needs at least one coordinate"));
        }
        if x.len() != nu.0.len() {
            return Err(LabError::invalid(format!(
                "bottom row has {} coordinates but the drift has {}",
                x.len(),
                nu.0.len()
            )));
        }
        if x.iter().chain(nu.0.iter()).any(|v| !v.is_finite()) {
            return Err(LabError::invalid("pattern law parameters must be finite"));
        }
        Ok(Self { x, nu })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn nu(&self) -> &DriftVector {
        &self.nu
    }
}
