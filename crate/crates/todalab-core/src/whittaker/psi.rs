//! Whittaker functions of gl_N for N <= 3.
//!
//! Three independent evaluation routes are provided and cross-checked:
//!
//! * closed forms for N = 1 (a plain exponential) and N = 2 (a Macdonald
//!   function of the coordinate difference),
//! * the pattern integral: psi_lambda(x) integrates exp(F_lambda(T)) over all
//!   triangular arrays T with bottom row x, where F_lambda couples a linear
//!   statistic of the row sums with exponential bonds between adjacent rows,
//! * a Gamma-kernel contour recursion that lowers N by one through an
//!   integral over a vertical-line contour.
//!
//! The pattern integrand is log-concave with a unique interior maximum, so
//! the quadrature for the pattern integral is centered there and scaled by
//! the Cholesky factor of the Hessian; in those coordinates the mass sits in
//! an O(1) ball regardless of how far apart the bottom-row entries are pushed
//! (as long as they stay at desk scale; widely separated rows flatten the
//! Hessian and are served by the closed forms instead).

use crate::array::TriangularArray;
use crate::error::{LabError, Result};
use crate::special::{log_gamma_complex, log_macdonald_k, macdonald_k};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::types::{ContourSpec, SpectralParam};

/// Evaluation route for [`whittaker_psi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiMethod {
    /// Exponential (N=1) or Macdonald (N=2) closed form.
    ClosedForm,
    /// Pattern integral over the free triangular entries.
    Givental,
    /// Gamma-kernel contour recursion.
    MellinBarnes,
    /// Closed form for N <= 2, pattern integral for N = 3.
    Auto,
}

/// Quadrature settings for the pattern integral: `points` nodes per free
/// axis spanning `[-half_width, half_width]` in Hessian-scaled coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GiventalConfig {
    pub half_width: f64,
    pub points: usize,
}

impl Default for GiventalConfig {
    fn default() -> Self {
        Self { half_width: 9.0, points: 181 }
    }
}

/// Result of a detailed evaluation: the value, the route actually used, and
/// a relative error estimate (grid-halving for the pattern integral,
/// contour-widening for the recursion, nominal 1e-12 for closed forms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiEvaluation {
    pub value_re: f64,
    pub value_im: f64,
    pub method: PsiMethod,
    pub est_error: f64,
}

impl PsiEvaluation {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.value_re, self.value_im)
    }
}

// ---------------------------------------------------------------------------
// flat pattern layout
//
// The free entries of a pattern with n rows are rows 1..n-1 stored row-major:
// row k (1-based, k entries) starts at offset k(k-1)/2. Row n is the fixed
// bottom row x.
// ---------------------------------------------------------------------------

pub(super) fn row_offset(k: usize) -> usize {
    k * (k - 1) / 2
}

fn row<'a>(free: &'a [f64], x: &'a [f64], k: usize, n: usize) -> &'a [f64] {
    if k == n {
        x
    } else {
        &free[row_offset(k)..row_offset(k) + k]
    }
}

/// Total bond energy sum_{k<n} sum_i [e^{T_{k,i}-T_{k+1,i}} + e^{T_{k+1,i+1}-T_{k,i}}],
/// the convex function whose minimizer is the critical pattern.
pub(super) fn bond_energy(free: &[f64], x: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for k in 1..n {
        let lo = row(free, x, k, n);
        let hi = row(free, x, k + 1, n);
        for i in 0..k {
            total += (lo[i] - hi[i]).exp() + (hi[i + 1] - lo[i]).exp();
        }
    }
    total
}

/// Bond energy together with its gradient in the free entries.
pub(super) fn bond_energy_grad(free: &[f64], x: &[f64], grad: &mut [f64]) -> f64 {
    let n = x.len();
    grad.fill(0.0);
    let mut total = 0.0;
    for k in 1..n {
        let lo_off = row_offset(k);
        let hi_off = row_offset(k + 1);
        let hi_free = k + 1 < n;
        for i in 0..k {
            let lo_v = free[lo_off + i];
            let hi_i = if hi_free { free[hi_off + i] } else { x[i] };
            let hi_i1 = if hi_free { free[hi_off + i + 1] } else { x[i + 1] };
            let up = (lo_v - hi_i).exp();
            let down = (hi_i1 - lo_v).exp();
            total += up + down;
            grad[lo_off + i] += up - down;
            if hi_free {
                grad[hi_off + i] -= up;
                grad[hi_off + i + 1] += down;
            }
        }
    }
    total
}

/// Dense Hessian of the bond energy in the free entries (row-major d*d).
fn bond_energy_hessian(free: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let d = free.len();
    let mut h = vec![0.0; d * d];
    let mut add = |a: Option<usize>, b: Option<usize>, e: f64| {
        if let Some(a) = a {
            h[a * d + a] += e;
        }
        if let Some(b) = b {
            h[b * d + b] += e;
        }
        if let (Some(a), Some(b)) = (a, b) {
            h[a * d + b] -= e;
            h[b * d + a] -= e;
        }
    };
    for k in 1..n {
        let lo_off = row_offset(k);
        let hi_off = row_offset(k + 1);
        let hi_free = k + 1 < n;
        for i in 0..k {
            let lo_v = free[lo_off + i];
            let hi_i = if hi_free { free[hi_off + i] } else { x[i] };
            let hi_i1 = if hi_free { free[hi_off + i + 1] } else { x[i + 1] };
            // bond e^{a-b} contributes +e to (a,a),(b,b) and -e to (a,b)
            add(Some(lo_off + i), hi_free.then(|| hi_off + i), (lo_v - hi_i).exp());
            add(hi_free.then(|| hi_off + i + 1), Some(lo_off + i), (hi_i1 - lo_v).exp());
        }
    }
    h
}

/// Row sums of the pattern (index k-1 holds the sum of row k; row n is x).
fn row_sums(free: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut sums = Vec::with_capacity(n);
    for k in 1..=n {
        sums.push(row(free, x, k, n).iter().sum());
    }
    sums
}

// ---------------------------------------------------------------------------
// dense Cholesky (patterns have at most a handful of free entries)
// ---------------------------------------------------------------------------

/// Cholesky factor L (lower, row-major) of a symmetric positive definite
/// matrix given in row-major order.
fn cholesky(a: &[f64], d: usize) -> Result<Vec<f64>> {
    let mut l = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..=i {
            let mut s = a[i * d + j];
            for k in 0..j {
                s -= l[i * d + k] * l[j * d + k];
            }
            if i == j {
                if s <= 0.0 {
                    return Err(LabError::Numerical(
                        "pattern Hessian lost positive definiteness".into(),
                    ));
                }
                l[i * d + i] = s.sqrt();
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    Ok(l)
}

/// Solve (L L^T) s = b given the Cholesky factor.
fn cholesky_solve(l: &[f64], d: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..d {
        for k in 0..i {
            y[i] -= l[i * d + k] * y[k];
        }
        y[i] /= l[i * d + i];
    }
    for i in (0..d).rev() {
        for k in i + 1..d {
            y[i] -= l[k * d + i] * y[k];
        }
        y[i] /= l[i * d + i];
    }
    y
}

/// Columns of (L^T)^{-1}: upper-triangular row-major matrix m with
/// T = T* + m v mapping scaled coordinates back to pattern entries.
fn inverse_transpose(l: &[f64], d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    for col in 0..d {
        // solve L^T w = e_col by back substitution
        let mut w = vec![0.0; d];
        w[col] = 1.0;
        for i in (0..=col).rev() {
            let mut s = w[i];
            for k in i + 1..d {
                s -= l[k * d + i] * w[k];
            }
            w[i] = s / l[i * d + i];
        }
        for rowi in 0..d {
            m[rowi * d + col] = w[rowi];
        }
    }
    m
}

// ---------------------------------------------------------------------------
// critical point
// ---------------------------------------------------------------------------

/// Unique minimizer of the bond energy over patterns with bottom row x,
/// found by Newton iteration with backtracking. The gradient sup-norm at the
/// returned pattern is at most 1e-10, and the mean of every row equals the
/// mean of x up to the same tolerance.
pub fn critical_point(x: &[f64]) -> Result<TriangularArray> {
    if x.is_empty() {
        return Err(LabError::invalid("critical point needs at least one coordinate"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LabError::invalid("critical point needs finite coordinates"));
    }
    let n = x.len();
    let d = n * (n - 1) / 2;
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut free = vec![mean; d];
    let mut grad = vec![0.0; d];
    if d > 0 {
        let mut converged = false;
        for _ in 0..200 {
            let value = bond_energy_grad(&free, x, &mut grad);
            let gnorm = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
            if gnorm <= 1e-12 {
                converged = true;
                break;
            }
            let hess = bond_energy_hessian(&free, x);
            let l = cholesky(&hess, d)?;
            let step = cholesky_solve(&l, d, &grad);
            let descent: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
            let mut alpha = 1.0;
            let mut moved = false;
            while alpha >= 1e-12 {
                let trial: Vec<f64> =
                    free.iter().zip(&step).map(|(f, s)| f - alpha * s).collect();
                if bond_energy(&trial, x) <= value - 1e-4 * alpha * descent {
                    free = trial;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if !converged {
            let value = bond_energy_grad(&free, x, &mut grad);
            let gnorm = grad.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
            let _ = value;
            if gnorm > 1e-10 {
                return Err(LabError::Numerical(format!(
                    "critical point iteration stalled with gradient norm {gnorm:.3e}"
                )));
            }
        }
    }
    let mut pattern = TriangularArray::zeros(n)?;
    for k in 1..n {
        for i in 1..=k {
            pattern.set(k, i, free[row_offset(k) + i - 1])?;
        }
    }
    for (i, &v) in x.iter().enumerate() {
        pattern.set(n, i + 1, v)?;
    }
    Ok(pattern)
}

// ---------------------------------------------------------------------------
// closed forms
// ---------------------------------------------------------------------------

fn validate_args(x: &[f64], lambda: &SpectralParam) -> Result<()> {
    if x.len() != lambda.n() {
        return Err(LabError::invalid(format!(
            "coordinate vector has {} entries but the spectral parameter has {}",
            x.len(),
            lambda.n()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(LabError::invalid("coordinates must be finite"));
    }
    Ok(())
}

/// Closed-form value for N <= 2.
pub fn closed_form_psi(x: &[f64], lambda: &SpectralParam) -> Result<Complex64> {
    Ok(closed_form_log_psi(x, lambda)?.exp())
}

/// Log of the closed form, valid for widely separated coordinates where the
/// value itself would underflow. Complex orders are served by the direct
/// Macdonald evaluation and therefore need a moderate argument.
pub(super) fn closed_form_log_psi(x: &[f64], lambda: &SpectralParam) -> Result<Complex64> {
    validate_args(x, lambda)?;
    match x.len() {
        1 => Ok(lambda.component(0) * x[0]),
        2 => {
            let order = lambda.component(0) - lambda.component(1);
            let z = 2.0 * ((x[1] - x[0]) / 2.0).exp();
            let log_k = if order.im == 0.0 {
                Complex64::new(log_macdonald_k(order.re, z)?, 0.0)
            } else {
                if z > 600.0 {
                    return Err(LabError::Numerical(format!(
                        "Macdonald argument {z:.1} too large for a complex order"
                    )));
                }
                macdonald_k(order, z)?.ln()
            };
            let half_sum = 0.5 * (lambda.component(0) + lambda.component(1)) * (x[0] + x[1]);
            Ok(Complex64::new(std::f64::consts::LN_2, 0.0) + half_sum + log_k)
        }
        n => Err(LabError::UnsupportedSize(format!("no closed form for {n} coordinates"))),
    }
}

// ---------------------------------------------------------------------------
// pattern integral
// ---------------------------------------------------------------------------

pub(super) struct PatternQuadrature {
    pub(super) log_value: Complex64,
    pub(super) est_error: f64,
}

/// Log of the pattern integral together with a grid-halving error estimate.
pub(super) fn pattern_log_psi(
    x: &[f64],
    lambda: &SpectralParam,
    cfg: &GiventalConfig,
) -> Result<PatternQuadrature> {
    validate_args(x, lambda)?;
    let n = x.len();
    if n > 3 {
        return Err(LabError::UnsupportedSize(format!(
            "pattern integral implemented for up to 3 coordinates, got {n}"
        )));
    }
    if !(cfg.half_width > 0.0) || cfg.points < 33 {
        return Err(LabError::invalid(
            "pattern quadrature needs a positive half-width and at least 33 points",
        ));
    }
    if n == 1 {
        return Ok(PatternQuadrature { log_value: lambda.component(0) * x[0], est_error: 0.0 });
    }

    let crit = critical_point(x)?;
    let d = n * (n - 1) / 2;
    let mut center = vec![0.0; d];
    for k in 1..n {
        center[row_offset(k)..row_offset(k) + k].copy_from_slice(crit.row(k));
    }
    let hess = bond_energy_hessian(&center, x);
    let l = cholesky(&hess, d)?;
    let m = inverse_transpose(&l, d);
    let mut log_jacobian = 0.0;
    for i in 0..d {
        log_jacobian -= l[i * d + i].ln();
    }

    // grid with an odd point count so the halved grid spans the same range
    let points = cfg.points | 1;
    let h = 2.0 * cfg.half_width / (points - 1) as f64;
    let lam = lambda.values();

    // exponent at pattern T: -bond energy + sum_k lambda_k (rowsum_k - rowsum_{k-1})
    let exponent = |free: &[f64]| -> Complex64 {
        let sums = row_sums(free, x);
        let mut lin = Complex64::new(0.0, 0.0);
        let mut prev = 0.0;
        for (k, &s) in sums.iter().enumerate() {
            lin += lam[k] * (s - prev);
            prev = s;
        }
        lin - bond_energy(free, x)
    };

    // map scaled coordinates v to pattern entries
    let to_pattern = |v: &[f64], out: &mut [f64]| {
        for i in 0..d {
            let mut t = center[i];
            for j in i..d {
                t += m[i * d + j] * v[j];
            }
            out[i] = t;
        }
    };

    // pass 1: maximum of the real part over the grid
    let mut vbuf = vec![0.0; d];
    let mut tbuf = vec![0.0; d];
    let mut max_re = f64::NEG_INFINITY;
    let mut walk = GridWalk::new(d, points);
    while walk.next(&mut vbuf, cfg.half_width, h) {
        to_pattern(&vbuf, &mut tbuf);
        let re = exponent(&tbuf).re;
        if re > max_re {
            max_re = re;
        }
    }

    // pass 2: accumulate on the full grid and on the even-index subgrid
    let mut fine = Complex64::new(0.0, 0.0);
    let mut coarse = Complex64::new(0.0, 0.0);
    let mut walk = GridWalk::new(d, points);
    while walk.next(&mut vbuf, cfg.half_width, h) {
        to_pattern(&vbuf, &mut tbuf);
        let e = exponent(&tbuf);
        if e.re - max_re < -46.0 {
            continue;
        }
        let w = (e - max_re).exp();
        fine += w;
        if walk.all_even() {
            coarse += w;
        }
    }
    let fine_val = fine * h.powi(d as i32);
    let coarse_val = coarse * (2.0 * h).powi(d as i32);
    let est_error = if fine_val.norm() > 0.0 {
        (fine_val - coarse_val).norm() / fine_val.norm()
    } else {
        f64::INFINITY
    };
    if fine_val.norm() == 0.0 {
        return Err(LabError::Numerical("pattern integral collapsed to zero".into()));
    }
    Ok(PatternQuadrature {
        log_value: Complex64::new(max_re + log_jacobian, 0.0) + fine_val.ln(),
        est_error,
    })
}

/// Odometer over a d-dimensional tensor grid.
struct GridWalk {
    idx: Vec<usize>,
    points: usize,
    started: bool,
    done: bool,
}

impl GridWalk {
    fn new(d: usize, points: usize) -> Self {
        Self { idx: vec![0; d], points, started: false, done: false }
    }

    fn next(&mut self, v: &mut [f64], half_width: f64, h: f64) -> bool {
        if self.done {
            return false;
        }
        if self.started {
            let mut axis = 0;
            loop {
                if axis == self.idx.len() {
                    self.done = true;
                    return false;
                }
                self.idx[axis] += 1;
                if self.idx[axis] < self.points {
                    break;
                }
                self.idx[axis] = 0;
                axis += 1;
            }
        }
        self.started = true;
        for (slot, &i) in v.iter_mut().zip(&self.idx) {
            *slot = -half_width + h * i as f64;
        }
        true
    }

    fn all_even(&self) -> bool {
        self.idx.iter().all(|i| i % 2 == 0)
    }
}

/// Pattern-integral value with the default quadrature.
pub fn givental_psi(x: &[f64], lambda: &SpectralParam) -> Result<Complex64> {
    givental_psi_with(x, lambda, &GiventalConfig::default())
}

/// Pattern-integral value with explicit quadrature settings.
pub fn givental_psi_with(
    x: &[f64],
    lambda: &SpectralParam,
    cfg: &GiventalConfig,
) -> Result<Complex64> {
    Ok(pattern_log_psi(x, lambda, cfg)?.log_value.exp())
}

/// Log of psi by the best log-domain route: closed form for N <= 2 (exact in
/// the exponent even when the value underflows) and the pattern integral for
/// N = 3.
pub fn log_whittaker_psi(x: &[f64], lambda: &SpectralParam) -> Result<Complex64> {
    validate_args(x, lambda)?;
    match x.len() {
        1 | 2 => closed_form_log_psi(x, lambda),
        3 => Ok(pattern_log_psi(x, lambda, &GiventalConfig::default())?.log_value),
        n => Err(LabError::UnsupportedSize(format!(
            "log evaluation implemented for up to 3 coordinates, got {n}"
        ))),
    }
}

// ---------------------------------------------------------------------------
// contour recursion
// ---------------------------------------------------------------------------

/// Contour-recursion value with the default contour (abscissas one unit left
/// of the smallest Re lambda, half-width 30, 400 points per axis).
pub fn mellin_barnes_psi(x: &[f64], lambda: &SpectralParam) -> Result<Complex64> {
    let contour = ContourSpec::recursion_default(lambda)?;
    mellin_barnes_psi_with(x, lambda, &contour)
}

/// Contour-recursion value with an explicit contour one level down.
pub fn mellin_barnes_psi_with(
    x: &[f64],
    lambda: &SpectralParam,
    contour: &ContourSpec,
) -> Result<Complex64> {
    validate_args(x, lambda)?;
    match x.len() {
        1 => Ok((lambda.component(0) * x[0]).exp()),
        2 => mb_level2(x, lambda, contour),
        3 => mb_level3(x, lambda, contour),
        n => Err(LabError::UnsupportedSize(format!(
            "contour recursion implemented for up to 3 coordinates, got {n}"
        ))),
    }
}

fn check_contour(lambda: &SpectralParam, contour: &ContourSpec, dims: usize) -> Result<()> {
    if contour.dims() != dims {
        return Err(LabError::invalid(format!(
            "recursion one level below {} coordinates needs a {}-dimensional contour, got {}",
            lambda.n(),
            dims,
            contour.dims()
        )));
    }
    let min_re = lambda.min_re();
    for &a in contour.abscissas() {
        if a >= min_re {
            return Err(LabError::Contour(format!(
                "abscissa {a} does not sit strictly left of every Re lambda (min {min_re})"
            )));
        }
    }
    Ok(())
}

/// N=2 recursion: (1/2pi) int e^{x1(lam1+lam2-g)} Gamma(lam1-g)Gamma(lam2-g) e^{g x2} du.
fn mb_level2(x: &[f64], lambda: &SpectralParam, contour: &ContourSpec) -> Result<Complex64> {
    check_contour(lambda, contour, 1)?;
    let (l1, l2) = (lambda.component(0), lambda.component(1));
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..contour.points() {
        let g = contour.node(0, k);
        let log_term = x[0] * (l1 + l2 - g)
            + log_gamma_complex(l1 - g)?
            + log_gamma_complex(l2 - g)?
            + g * x[1];
        acc += contour.weight(k) * log_term.exp();
    }
    Ok(acc / (2.0 * std::f64::consts::PI))
}

/// N=3 recursion with the N=2 closed form inside: equal abscissas make the
/// inner Macdonald order purely imaginary, so the coupling factor
/// K_{i v}(z) v sinh(pi v)/pi depends only on the node-index difference and
/// is cached along the diagonal.
fn mb_level3(x: &[f64], lambda: &SpectralParam, contour: &ContourSpec) -> Result<Complex64> {
    check_contour(lambda, contour, 2)?;
    let a = contour.abscissas();
    if (a[0] - a[1]).abs() > 1e-12 {
        return Err(LabError::invalid(
            "the three-coordinate recursion requires equal contour abscissas",
        ));
    }
    let points = contour.points();
    let h = contour.step();
    let z = 2.0 * ((x[2] - x[1]) / 2.0).exp();
    let lam_sum = lambda.sum();

    // per-node factor: everything except the difference coupling
    let mut factor = Vec::with_capacity(points);
    for k in 0..points {
        let g = contour.node(0, k);
        let mut log_term = x[0] * (0.5 * lam_sum - g) + g * (x[1] + x[2]) * 0.5;
        for i in 0..3 {
            log_term += log_gamma_complex(lambda.component(i) - g)?;
        }
        factor.push(Complex64::from(contour.weight(k)) * log_term.exp());
    }

    // coupling along the index difference, via the cancellation-free product
    let mut coupling = vec![0.0; points];
    for didx in 1..points {
        let v = didx as f64 * h;
        coupling[didx] =
            2.0 * super::contour::coupling_product(v, z)? / std::f64::consts::PI;
    }

    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..points {
        for k in 0..points {
            let didx = j.abs_diff(k);
            if didx == 0 {
                continue;
            }
            acc += factor[j] * factor[k] * coupling[didx];
        }
    }
    Ok(acc / (8.0 * std::f64::consts::PI.powi(2)))
}

// ---------------------------------------------------------------------------
// dispatch
// ---------------------------------------------------------------------------

/// Whittaker function value by the requested route.
pub fn whittaker_psi(x: &[f64], lambda: &SpectralParam, method: PsiMethod) -> Result<Complex64> {
    Ok(whittaker_psi_detailed(x, lambda, method)?.value())
}

/// Whittaker function value with the resolved route and an error estimate.
pub fn whittaker_psi_detailed(
    x: &[f64],
    lambda: &SpectralParam,
    method: PsiMethod,
) -> Result<PsiEvaluation> {
    validate_args(x, lambda)?;
    let resolved = match method {
        PsiMethod::Auto => {
            if x.len() <= 2 {
                PsiMethod::ClosedForm
            } else {
                PsiMethod::Givental
            }
        }
        other => other,
    };
    match resolved {
        PsiMethod::ClosedForm => {
            let value = closed_form_psi(x, lambda)?;
            Ok(PsiEvaluation {
                value_re: value.re,
                value_im: value.im,
                method: resolved,
                est_error: 1e-12,
            })
        }
        PsiMethod::Givental => {
            let q = pattern_log_psi(x, lambda, &GiventalConfig::default())?;
            let value = q.log_value.exp();
            Ok(PsiEvaluation {
                value_re: value.re,
                value_im: value.im,
                method: resolved,
                est_error: q.est_error,
            })
        }
        PsiMethod::MellinBarnes => {
            let contour = ContourSpec::recursion_default(lambda)?;
            let value = mellin_barnes_psi_with(x, lambda, &contour)?;
            let wide = mellin_barnes_psi_with(x, lambda, &contour.widened())?;
            let est = (value - wide).norm() / value.norm().max(f64::MIN_POSITIVE);
            Ok(PsiEvaluation {
                value_re: value.re,
                value_im: value.im,
                method: resolved,
                est_error: est,
            })
        }
        PsiMethod::Auto => unreachable!("auto resolved above"),
    }
}

/// MGF of the linear pattern statistic under the Gibbs law: the ratio
/// psi_{nu+lambda}(x) / psi_nu(x), computed as a difference of log values so
/// that lambda = 0 returns exactly one.
pub fn conditional_mgf(
    x: &[f64],
    nu: &crate::path::DriftVector,
    lambda: &SpectralParam,
) -> Result<Complex64> {
    let nu_param = SpectralParam::from(nu);
    let shifted = nu_param.shifted(lambda)?;
    let log_num = log_whittaker_psi(x, &shifted)?;
    let log_den = log_whittaker_psi(x, &nu_param)?;
    Ok((log_num - log_den).exp())
}

/// Row-sum increments (rowsum_k - rowsum_{k-1}) of a pattern, the linear
/// statistic whose moment generating function under the Gibbs pattern law is
/// [`conditional_mgf`].
pub fn pattern_type(t: &TriangularArray) -> Vec<f64> {
    let n = t.n();
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for k in 1..=n {
        let s: f64 = t.row(k).iter().sum();
        out.push(s - prev);
        prev = s;
    }
    out
}

/// Log of the unnormalized Gibbs weight of a pattern under the given law:
/// the drift pairs with the row-sum increments and every adjacent-row bond
/// contributes a negative exponential.
pub fn pattern_log_weight(
    law: &super::types::GibbsPatternLaw,
    t: &TriangularArray,
) -> Result<f64> {
    let n = law.n();
    if t.n() != n {
        return Err(LabError::invalid(format!(
            "pattern has {} rows but the law expects {}",
            t.n(),
            n
        )));
    }
    for (&got, &want) in t.bottom_row().iter().zip(law.x()) {
        if (got - want).abs() > 1e-12 {
            return Err(LabError::invalid(
                "pattern bottom row does not match the law's coordinate vector",
            ));
        }
    }
    let d = n * (n - 1) / 2;
    let mut free = vec![0.0; d];
    for k in 1..n {
        free[row_offset(k)..row_offset(k) + k].copy_from_slice(t.row(k));
    }
    let kinds = pattern_type(t);
    let linear: f64 = law.nu().0.iter().zip(&kinds).map(|(nu, inc)| nu * inc).sum();
    Ok(linear - bond_energy(&free, law.x()))
}

/// Log of the two-row kernel with parameter theta linking a row x of length
/// m to a row y of length m-1.
pub fn log_row_kernel(theta: Complex64, x: &[f64], y: &[f64]) -> Result<Complex64> {
    if x.len() != y.len() + 1 {
        return Err(LabError::invalid(format!(
            "row kernel needs |x| = |y| + 1, got |x| = {}, |y| = {}",
            x.len(),
            y.len()
        )));
    }
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let mut pot = 0.0;
    for i in 0..y.len() {
        pot += (y[i] - x[i]).exp() + (x[i + 1] - y[i]).exp();
    }
    Ok(theta * (sx - sy) - pot)
}
