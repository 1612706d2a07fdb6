//! Dispersal-kernel zoo and standing-assumption checks.
//!
//! Kernels are probability densities on `R^d` (`d` is 1 or 2 for the grid
//! solver; the closed-form families are dimension-generic). Each family knows
//! its pointwise density, its directional exponential moment
//! `A_xi(lambda) = int a(x) exp(lambda x.xi) dx`, the abscissa
//! `sigma_xi = sup { lambda : A_xi(lambda) < inf }`, first moments and the 1D
//! marginal along a direction. Quadrature backs the families without closed
//! forms and doubles as the cross-check oracle.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::ext::{check_unit, dot, ExtReal};
use crate::quad;

const SQRT_2PI: f64 = 2.5066282746310002;

/// Model constants of the evolution equation.
///
/// `kappa_minus = kappa_l + kappa_nl` must be positive; the dichotomy
/// constant `theta = (kappa_plus - m)/kappa_minus` is positive exactly when
/// assumption (A1) `kappa_plus > m` holds. Construction does not enforce
/// (A1) — degenerate parameter sets are legitimate inputs for the linear
/// solver — so operations that need it check it themselves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kappa_plus: f64,
    pub m: f64,
    pub kappa_l: f64,
    pub kappa_nl: f64,
}

impl ModelParams {
    pub fn new(kappa_plus: f64, m: f64, kappa_l: f64, kappa_nl: f64) -> Result<Self> {
        if !(kappa_plus > 0.0 && kappa_plus.is_finite()) {
            return Err(Error::config(format!("kappa_plus must be positive, got {kappa_plus}")));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::config(format!("m must be positive, got {m}")));
        }
        if !(kappa_l >= 0.0 && kappa_nl >= 0.0) {
            return Err(Error::config("kappa_l and kappa_nl must be nonnegative".to_string()));
        }
        if kappa_l + kappa_nl <= 0.0 {
            return Err(Error::config("kappa_minus = kappa_l + kappa_nl must be positive".to_string()));
        }
        Ok(ModelParams { kappa_plus, m, kappa_l, kappa_nl })
    }

    pub fn kappa_minus(&self) -> f64 {
        self.kappa_l + self.kappa_nl
    }

    /// The positive constant stationary state `(kappa_plus - m)/kappa_minus`.
    pub fn theta(&self) -> f64 {
        (self.kappa_plus - self.m) / self.kappa_minus()
    }

    /// Assumption (A1): `kappa_plus > m`.
    pub fn satisfies_a1(&self) -> bool {
        self.kappa_plus > self.m
    }
}

/// A tabulated kernel: samples on a uniform node grid over a compact
/// support box, evaluated by multilinear interpolation (which preserves
/// nonnegativity) and zero outside the box.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedKernel {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// Nodes per axis, endpoints included; every entry at least 2.
    pub shape: Vec<usize>,
    /// Row-major samples (`shape[0]` rows of `shape[1]` in 2D).
    pub values: Vec<f64>,
}

impl TabulatedKernel {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let d = lo.len();
        if d == 0 || d > 2 || hi.len() != d || shape.len() != d {
            return Err(Error::config("tabulated kernel must be 1D or 2D with matching shapes"));
        }
        for i in 0..d {
            if !(hi[i] > lo[i]) || shape[i] < 2 {
                return Err(Error::config("tabulated kernel support box is degenerate"));
            }
        }
        let n: usize = shape.iter().product();
        if values.len() != n {
            return Err(Error::config(format!(
                "tabulated kernel has {} samples, expected {}",
                values.len(),
                n
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::config("tabulated kernel samples must be finite and nonnegative"));
        }
        Ok(TabulatedKernel { lo, hi, shape, values })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn step(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.shape[axis] - 1) as f64
    }

    pub fn node(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + self.step(axis) * i as f64
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self.dim() {
            1 => self.interp1(x[0]),
            2 => self.interp2(x[0], x[1]),
            _ => unreachable!(),
        }
    }

    fn cell(&self, axis: usize, x: f64) -> Option<(usize, f64)> {
        if x < self.lo[axis] || x > self.hi[axis] {
            return None;
        }
        let h = self.step(axis);
        let t = (x - self.lo[axis]) / h;
        let i = (t.floor() as usize).min(self.shape[axis] - 2);
        Some((i, t - i as f64))
    }

    fn interp1(&self, x: f64) -> f64 {
        match self.cell(0, x) {
            None => 0.0,
            Some((i, w)) => self.values[i] * (1.0 - w) + self.values[i + 1] * w,
        }
    }

    fn interp2(&self, x: f64, y: f64) -> f64 {
        let (Some((i, wx)), Some((j, wy))) = (self.cell(0, x), self.cell(1, y)) else {
            return 0.0;
        };
        let m = self.shape[1];
        let v = |a: usize, b: usize| self.values[a * m + b];
        v(i, j) * (1.0 - wx) * (1.0 - wy)
            + v(i + 1, j) * wx * (1.0 - wy)
            + v(i, j + 1) * (1.0 - wx) * wy
            + v(i + 1, j + 1) * wx * wy
    }

    /// Exact integral of the multilinear interpolant (trapezoidal mass).
    pub fn mass(&self) -> f64 {
        let w1 = |n: usize, i: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        match self.dim() {
            1 => {
                let n = self.shape[0];
                let s: f64 = (0..n).map(|i| w1(n, i) * self.values[i]).sum();
                s * self.step(0)
            }
            2 => {
                let (n, m) = (self.shape[0], self.shape[1]);
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..m {
                        s += w1(n, i) * w1(m, j) * self.values[i * m + j];
                    }
                }
                s * self.step(0) * self.step(1)
            }
            _ => unreachable!(),
        }
    }

    /// Loads from a plain-text grid file with a one-line header
    /// `# support: xmin xmax [ymin ymax] n [m]`, followed by `x value` pairs
    /// (1D) or `n` rows of `m` whitespace-separated samples (2D).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::config(format!("{}: empty kernel file", path.display())))?;
        let header = header
            .trim()
            .strip_prefix("# support:")
            .ok_or_else(|| Error::config(format!("{}: missing `# support:` header", path.display())))?;
        let nums: Vec<f64> = header
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| Error::config(format!("bad header token `{t}`"))))
            .collect::<Result<_>>()?;
        match nums.len() {
            3 => {
                let (lo, hi, n) = (nums[0], nums[1], nums[2] as usize);
                let mut values = Vec::with_capacity(n);
                for line in lines {
                    let mut it = line.split_whitespace();
                    let _x = it.next();
                    let v = it
                        .next()
                        .ok_or_else(|| Error::config("1D kernel file rows need two columns"))?;
                    values.push(v.parse::<f64>().map_err(|_| Error::config(format!("bad sample `{v}`")))?);
                }
                TabulatedKernel::new(vec![lo], vec![hi], vec![n], values)
            }
            6 => {
                let (n, m) = (nums[4] as usize, nums[5] as usize);
                let mut values = Vec::with_capacity(n * m);
                for line in lines {
                    for t in line.split_whitespace() {
                        values.push(t.parse::<f64>().map_err(|_| Error::config(format!("bad sample `{t}`")))?);
                    }
                }
                TabulatedKernel::new(vec![nums[0], nums[2]], vec![nums[1], nums[3]], vec![n, m], values)
            }
            k => Err(Error::config(format!("header must carry 3 (1D) or 6 (2D) numbers, got {k}"))),
        }
    }
}

/// Parametric dispersal/competition kernel.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// Isotropic centered Gaussian with standard deviation `sigma`.
    Gaussian { sigma: f64, dim: usize },
    /// Product of 1D double-exponentials `(mu/2) exp(-mu |x_i|)` per axis.
    Laplace { mu: f64, dim: usize },
    /// Uniform density on the centered ball of the given radius.
    UniformBall { radius: f64, dim: usize },
    /// Centered Gaussian with axis-aligned standard deviations.
    AnisotropicGaussian { sigmas: Vec<f64> },
    /// Isotropic Gaussian centered at `mean`.
    ShiftedGaussian { mean: Vec<f64>, sigma: f64 },
    /// Polynomial tails `c (1+|x|)^(-(d+alpha))`; every exponential moment
    /// diverges, the first absolute moment is finite for `alpha > 1`.
    ParetoTail { alpha: f64, dim: usize },
    Tabulated(TabulatedKernel),
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Gaussian { sigma, dim } => write!(f, "gaussian(sigma={sigma}, d={dim})"),
            KernelSpec::Laplace { mu, dim } => write!(f, "laplace(mu={mu}, d={dim})"),
            KernelSpec::UniformBall { radius, dim } => write!(f, "uniform_ball(r={radius}, d={dim})"),
            KernelSpec::AnisotropicGaussian { sigmas } => write!(f, "anisotropic_gaussian({sigmas:?})"),
            KernelSpec::ShiftedGaussian { mean, sigma } => {
                write!(f, "shifted_gaussian(mean={mean:?}, sigma={sigma})")
            }
            KernelSpec::ParetoTail { alpha, dim } => write!(f, "pareto_tail(alpha={alpha}, d={dim})"),
            KernelSpec::Tabulated(t) => write!(f, "tabulated(d={})", t.dim()),
        }
    }
}

impl KernelSpec {
    pub fn dim(&self) -> usize {
        match self {
            KernelSpec::Gaussian { dim, .. }
            | KernelSpec::Laplace { dim, .. }
            | KernelSpec::UniformBall { dim, .. }
            | KernelSpec::ParetoTail { dim, .. } => *dim,
            KernelSpec::AnisotropicGaussian { sigmas } => sigmas.len(),
            KernelSpec::ShiftedGaussian { mean, .. } => mean.len(),
            KernelSpec::Tabulated(t) => t.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64, name: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        };
        let dim_ok = |d: usize| {
            if d >= 1 {
                Ok(())
            } else {
                Err(Error::config("kernel dimension must be at least 1"))
            }
        };
        match self {
            KernelSpec::Gaussian { sigma, dim } => {
                positive(*sigma, "sigma")?;
                dim_ok(*dim)
            }
            KernelSpec::Laplace { mu, dim } => {
                positive(*mu, "mu")?;
                dim_ok(*dim)
            }
            KernelSpec::UniformBall { radius, dim } => {
                positive(*radius, "radius")?;
                if *dim > 2 {
                    return Err(Error::config("uniform_ball supports d <= 2"));
                }
                dim_ok(*dim)
            }
            KernelSpec::AnisotropicGaussian { sigmas } => {
                dim_ok(sigmas.len())?;
                for s in sigmas {
                    positive(*s, "sigma")?;
                }
                Ok(())
            }
            KernelSpec::ShiftedGaussian { mean, sigma } => {
                dim_ok(mean.len())?;
                if mean.iter().any(|v| !v.is_finite()) {
                    return Err(Error::config("shift mean must be finite"));
                }
                positive(*sigma, "sigma")
            }
            KernelSpec::ParetoTail { alpha, dim } => {
                positive(*alpha, "alpha")?;
                if *dim > 2 {
                    return Err(Error::config("pareto_tail supports d <= 2"));
                }
                dim_ok(*dim)
            }
            KernelSpec::Tabulated(_) => Ok(()),
        }
    }

    /// Pointwise density value.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        match self {
            KernelSpec::Gaussian { sigma, .. } => {
                let q: f64 = x.iter().map(|v| v * v).sum();
                let z = SQRT_2PI * sigma;
                (-0.5 * q / (sigma * sigma)).exp() / z.powi(x.len() as i32)
            }
            KernelSpec::Laplace { mu, .. } => x
                .iter()
                .map(|v| 0.5 * mu * (-mu * v.abs()).exp())
                .product(),
            KernelSpec::UniformBall { radius, dim } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                if r2 > radius * radius {
                    0.0
                } else {
                    match dim {
                        1 => 0.5 / radius,
                        2 => 1.0 / (std::f64::consts::PI * radius * radius),
                        _ => unreachable!(),
                    }
                }
            }
            KernelSpec::AnisotropicGaussian { sigmas } => x
                .iter()
                .zip(sigmas)
                .map(|(v, s)| (-0.5 * v * v / (s * s)).exp() / (SQRT_2PI * s))
                .product(),
            KernelSpec::ShiftedGaussian { mean, sigma } => {
                let q: f64 = x.iter().zip(mean).map(|(v, c)| (v - c) * (v - c)).sum();
                let z = SQRT_2PI * sigma;
                (-0.5 * q / (sigma * sigma)).exp() / z.powi(x.len() as i32)
            }
            KernelSpec::ParetoTail { alpha, dim } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let c = match dim {
                    1 => 0.5 * alpha,
                    2 => alpha * (alpha + 1.0) / (2.0 * std::f64::consts::PI),
                    _ => unreachable!(),
                };
                c * (1.0 + r).powf(-(*dim as f64 + alpha))
            }
            KernelSpec::Tabulated(t) => t.evaluate(x),
        }
    }

    /// `ln a(x)`, with `-inf` outside the support. Exponential-moment
    /// integrands must be assembled in log space: past moderate `|x|` the
    /// density underflows while `exp(lambda x.xi)` overflows, and their
    /// product is garbage even where the true integrand is order one.
    pub fn log_evaluate(&self, x: &[f64]) -> f64 {
        match self {
            KernelSpec::Gaussian { sigma, .. } => {
                let q: f64 = x.iter().map(|v| v * v).sum();
                -0.5 * q / (sigma * sigma) - x.len() as f64 * (SQRT_2PI * sigma).ln()
            }
            KernelSpec::Laplace { mu, .. } => {
                let s: f64 = x.iter().map(|v| v.abs()).sum();
                -mu * s + x.len() as f64 * (0.5 * mu).ln()
            }
            KernelSpec::AnisotropicGaussian { sigmas } => x
                .iter()
                .zip(sigmas)
                .map(|(v, s)| -0.5 * v * v / (s * s) - (SQRT_2PI * s).ln())
                .sum(),
            KernelSpec::ShiftedGaussian { mean, sigma } => {
                let q: f64 = x.iter().zip(mean).map(|(v, c)| (v - c) * (v - c)).sum();
                -0.5 * q / (sigma * sigma) - x.len() as f64 * (SQRT_2PI * sigma).ln()
            }
            KernelSpec::ParetoTail { alpha, dim } => {
                let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                let c = match dim {
                    1 => 0.5 * alpha,
                    2 => alpha * (alpha + 1.0) / (2.0 * std::f64::consts::PI),
                    _ => unreachable!(),
                };
                c.ln() - (*dim as f64 + alpha) * (1.0 + r).ln()
            }
            // Compact supports cannot underflow inside their box.
            _ => {
                let v = self.evaluate(x);
                if v > 0.0 {
                    v.ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
        }
    }

    /// Upper bound for the density (assumption (A3) diagnostic).
    pub fn sup_value(&self) -> f64 {
        match self {
            KernelSpec::ShiftedGaussian { mean, .. } => self.evaluate(mean),
            KernelSpec::Tabulated(t) => t.values.iter().cloned().fold(0.0, f64::max),
            _ => self.evaluate(&vec![0.0; self.dim()]),
        }
    }

    /// True when the density is even, `a(-x) = a(x)`.
    pub fn is_symmetric(&self) -> bool {
        match self {
            KernelSpec::ShiftedGaussian { mean, .. } => mean.iter().all(|v| *v == 0.0),
            KernelSpec::Tabulated(_) => false,
            _ => true,
        }
    }

    /// Radius beyond which the per-axis tail mass is below roughly `1e-12`.
    /// Used by grids to check that wrap-around contamination is negligible.
    pub fn truncation_radius(&self, axis: usize) -> f64 {
        match self {
            KernelSpec::Gaussian { sigma, .. } => 7.2 * sigma,
            KernelSpec::Laplace { mu, .. } => 27.7 / mu,
            KernelSpec::UniformBall { radius, .. } => *radius,
            KernelSpec::AnisotropicGaussian { sigmas } => 7.2 * sigmas[axis],
            KernelSpec::ShiftedGaussian { mean, sigma } => 7.2 * sigma + mean[axis].abs(),
            KernelSpec::ParetoTail { alpha, .. } => 1e12f64.powf(1.0 / alpha),
            KernelSpec::Tabulated(t) => t.lo[axis].abs().max(t.hi[axis].abs()),
        }
    }

    /// Kernel mean (zero for the symmetric families).
    pub fn mean(&self) -> Result<Vec<f64>> {
        match self {
            KernelSpec::ShiftedGaussian { mean, .. } => Ok(mean.clone()),
            KernelSpec::Tabulated(_) => {
                let d = self.dim();
                let mut out = Vec::with_capacity(d);
                for axis in 0..d {
                    let mut e = vec![0.0; d];
                    e[axis] = 1.0;
                    out.push(self.raw_first_moment(&e)?);
                }
                Ok(out)
            }
            KernelSpec::ParetoTail { alpha, .. } if *alpha <= 1.0 => {
                Err(Error::domain("pareto_tail first moment diverges for alpha <= 1"))
            }
            _ => Ok(vec![0.0; self.dim()]),
        }
    }

    /// `int (x.xi) a(x) dx` without the `kappa_plus` factor.
    fn raw_first_moment(&self, xi: &[f64]) -> Result<f64> {
        match self {
            KernelSpec::ShiftedGaussian { mean, .. } => Ok(dot(mean, xi)),
            KernelSpec::ParetoTail { alpha, .. } => {
                if *alpha > 1.0 {
                    Ok(0.0)
                } else {
                    Err(Error::domain("pareto_tail first moment diverges for alpha <= 1"))
                }
            }
            KernelSpec::Tabulated(t) => match t.dim() {
                1 => quad::integrate(
                    |x| x * xi[0] * t.evaluate(&[x]),
                    t.lo[0],
                    t.hi[0],
                    1e-10,
                    1e-13,
                ),
                2 => quad::integrate_box(
                    |x, y| (x * xi[0] + y * xi[1]) * t.evaluate(&[x, y]),
                    [t.lo[0], t.lo[1]],
                    [t.hi[0], t.hi[1]],
                    1e-9,
                    1e-12,
                ),
                _ => unreachable!(),
            },
            // Centered even densities: odd integrand.
            _ => Ok(0.0),
        }
    }

    /// `int |x.xi| a(x) dx` for the (A4) diagnostic; `PosInf` when divergent.
    pub fn abs_first_moment(&self, xi: &[f64]) -> ExtReal {
        match self {
            KernelSpec::Gaussian { sigma, .. } | KernelSpec::ShiftedGaussian { sigma, .. } => {
                let shift = match self {
                    KernelSpec::ShiftedGaussian { mean, .. } => dot(mean, xi),
                    _ => 0.0,
                };
                // E|Z| for Z ~ N(shift, sigma^2), folded-normal mean.
                let s = *sigma;
                let z = shift / s;
                let val = s * (2.0 / std::f64::consts::PI).sqrt() * (-0.5 * z * z).exp()
                    + shift * erf(z / std::f64::consts::SQRT_2);
                ExtReal::Finite(val)
            }
            KernelSpec::ParetoTail { alpha, dim } => {
                if *alpha <= 1.0 {
                    ExtReal::PosInf
                } else {
                    let v = match dim {
                        1 => 1.0 / (alpha - 1.0),
                        2 => 4.0 / (std::f64::consts::PI * (alpha - 1.0)),
                        _ => unreachable!(),
                    };
                    ExtReal::Finite(v)
                }
            }
            _ => {
                // Remaining families have compact support or exponential
                // tails: quadrature of |x.xi| a(x) in rotated coordinates.
                let v = match self.dim() {
                    1 => {
                        let r = self.truncation_radius(0) * 1.5;
                        quad::integrate(|s| (s * xi[0]).abs() * self.evaluate(&[s]), -r, r, 1e-9, 1e-12)
                    }
                    2 => {
                        let perp = [-xi[1], xi[0]];
                        let scale = self.scale_hint();
                        let inner = |s: f64| {
                            quad::integrate_line(
                                |t| self.evaluate(&[s * xi[0] + t * perp[0], s * xi[1] + t * perp[1]]),
                                0.0,
                                scale,
                                1e-10,
                                1e-14,
                            )
                            .map(|v| s.abs() * v)
                            .unwrap_or(f64::NAN)
                        };
                        quad::integrate_line(inner, 0.0, scale, 1e-9, 1e-12)
                    }
                    _ => return ExtReal::PosInf,
                };
                match v {
                    Ok(v) if v.is_finite() => ExtReal::Finite(v),
                    _ => ExtReal::PosInf,
                }
            }
        }
    }

    /// Directional exponential moment `A_xi(lambda)`, with `PosInf` as a
    /// tagged value past the abscissa.
    pub fn mgf_directional(&self, xi: &[f64], lambda: f64) -> Result<ExtReal> {
        check_unit(xi, self.dim())?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
        }
        let v = match self {
            KernelSpec::Gaussian { sigma, .. } => {
                ExtReal::Finite((0.5 * lambda * lambda * sigma * sigma).exp())
            }
            KernelSpec::Laplace { mu, .. } => {
                let mut prod = 1.0;
                for c in xi {
                    let t = lambda * c;
                    if t.abs() >= *mu {
                        return Ok(ExtReal::PosInf);
                    }
                    prod *= mu * mu / (mu * mu - t * t);
                }
                ExtReal::Finite(prod)
            }
            KernelSpec::UniformBall { radius, dim } => {
                let z = lambda * radius;
                let v = match dim {
                    1 => z.sinh() / z,
                    2 => 2.0 * bessel_i1(z) / z,
                    _ => unreachable!(),
                };
                ExtReal::Finite(v)
            }
            KernelSpec::AnisotropicGaussian { sigmas } => {
                let s2: f64 = sigmas.iter().zip(xi).map(|(s, c)| s * s * c * c).sum();
                ExtReal::Finite((0.5 * lambda * lambda * s2).exp())
            }
            KernelSpec::ShiftedGaussian { mean, sigma } => {
                ExtReal::Finite((lambda * dot(mean, xi) + 0.5 * lambda * lambda * sigma * sigma).exp())
            }
            KernelSpec::ParetoTail { .. } => ExtReal::PosInf,
            KernelSpec::Tabulated(_) => {
                ExtReal::Finite(self.mgf_directional_quadrature(xi, lambda)?)
            }
        };
        Ok(v)
    }

    /// Quadrature route for `A_xi(lambda)`: the oracle for the closed forms
    /// and the implementation for tabulated kernels. Only valid below the
    /// abscissa; the integrand must decay.
    pub fn mgf_directional_quadrature(&self, xi: &[f64], lambda: f64) -> Result<f64> {
        check_unit(xi, self.dim())?;
        match self.dim() {
            1 => {
                let f = |x: f64| (self.log_evaluate(&[x]) + lambda * x * xi[0]).exp();
                match self {
                    KernelSpec::Tabulated(t) => quad::integrate(f, t.lo[0], t.hi[0], 1e-10, 1e-14),
                    KernelSpec::UniformBall { radius, .. } => {
                        quad::integrate(f, -*radius, *radius, 1e-10, 1e-14)
                    }
                    _ => quad::integrate_line(f, 0.0, self.scale_hint(), 1e-10, 1e-14),
                }
            }
            2 => {
                let perp = [-xi[1], xi[0]];
                let eval = |s: f64, t: f64| {
                    let x = [s * xi[0] + t * perp[0], s * xi[1] + t * perp[1]];
                    (self.log_evaluate(&x) + lambda * s).exp()
                };
                let scale = self.scale_hint();
                let inner = |s: f64| {
                    quad::integrate_line(|t| eval(s, t), 0.0, scale, 1e-11, 1e-15)
                        .unwrap_or(f64::NAN)
                };
                let v = quad::integrate_line(inner, 0.0, scale, 1e-10, 1e-14)?;
                if !v.is_finite() {
                    return Err(Error::numerical("2D directional moment quadrature failed"));
                }
                Ok(v)
            }
            d => Err(Error::config(format!("quadrature moments not implemented for d = {d}"))),
        }
    }

    fn scale_hint(&self) -> f64 {
        match self {
            KernelSpec::Gaussian { sigma, .. } | KernelSpec::ShiftedGaussian { sigma, .. } => *sigma,
            KernelSpec::Laplace { mu, .. } => 1.0 / mu,
            KernelSpec::UniformBall { radius, .. } => *radius,
            KernelSpec::AnisotropicGaussian { sigmas } => {
                sigmas.iter().cloned().fold(f64::MIN, f64::max)
            }
            KernelSpec::ParetoTail { .. } => 1.0,
            KernelSpec::Tabulated(t) => (0..t.dim()).map(|a| t.hi[a] - t.lo[a]).fold(f64::MIN, f64::max),
        }
    }

    /// Abscissa `sigma_xi` of the directional exponential moment.
    pub fn abscissa(&self, xi: &[f64]) -> Result<ExtReal> {
        check_unit(xi, self.dim())?;
        let v = match self {
            KernelSpec::Laplace { mu, .. } => {
                let proj = xi.iter().map(|c| c.abs()).fold(0.0, f64::max);
                ExtReal::Finite(mu / proj)
            }
            KernelSpec::ParetoTail { .. } => ExtReal::Finite(0.0),
            // Gaussian tails and compact supports keep every exponential moment finite.
            _ => ExtReal::PosInf,
        };
        Ok(v)
    }

    /// 1D marginal along `xi`: the density of `x.xi`. Gaussian families
    /// project in closed form; the rest are tabulated on a uniform grid and
    /// renormalized to unit trapezoidal mass.
    pub fn marginal_1d(&self, xi: &[f64]) -> Result<KernelSpec> {
        check_unit(xi, self.dim())?;
        if self.dim() == 1 {
            return Ok(self.clone());
        }
        match self {
            KernelSpec::Gaussian { sigma, .. } => Ok(KernelSpec::Gaussian { sigma: *sigma, dim: 1 }),
            KernelSpec::AnisotropicGaussian { sigmas } => {
                let s2: f64 = sigmas.iter().zip(xi).map(|(s, c)| s * s * c * c).sum();
                Ok(KernelSpec::Gaussian { sigma: s2.sqrt(), dim: 1 })
            }
            KernelSpec::ShiftedGaussian { mean, sigma } => Ok(KernelSpec::ShiftedGaussian {
                mean: vec![dot(mean, xi)],
                sigma: *sigma,
            }),
            KernelSpec::UniformBall { radius, .. } => {
                // Chord density 2 sqrt(r^2 - s^2) / (pi r^2).
                let r = *radius;
                let n = 4097;
                let h = 2.0 * r / (n - 1) as f64;
                let values: Vec<f64> = (0..n)
                    .map(|i| {
                        let s = -r + h * i as f64;
                        2.0 * (r * r - s * s).max(0.0).sqrt() / (std::f64::consts::PI * r * r)
                    })
                    .collect();
                tabulated_marginal(-r, r, values)
            }
            _ => {
                let radius = self.marginal_radius(xi);
                let n = 4097;
                let h = 2.0 * radius / (n - 1) as f64;
                let perp = [-xi[1], xi[0]];
                let scale = self.scale_hint();
                let mut values = Vec::with_capacity(n);
                for i in 0..n {
                    let s = -radius + h * i as f64;
                    let f = |t: f64| self.evaluate(&[s * xi[0] + t * perp[0], s * xi[1] + t * perp[1]]);
                    let v = quad::integrate_line(f, 0.0, scale, 1e-10, 1e-15)?;
                    values.push(v.max(0.0));
                }
                tabulated_marginal(-radius, radius, values)
            }
        }
    }

    fn marginal_radius(&self, xi: &[f64]) -> f64 {
        match self {
            KernelSpec::Tabulated(t) => {
                // Support box corners projected onto xi.
                let corners = [
                    [t.lo[0], t.lo[1]],
                    [t.lo[0], t.hi[1]],
                    [t.hi[0], t.lo[1]],
                    [t.hi[0], t.hi[1]],
                ];
                corners.iter().map(|c| dot(c, xi).abs()).fold(0.0, f64::max)
            }
            _ => (0..self.dim()).map(|a| self.truncation_radius(a)).fold(0.0, f64::max) * 1.3,
        }
    }
}

fn tabulated_marginal(lo: f64, hi: f64, mut values: Vec<f64>) -> Result<KernelSpec> {
    let n = values.len();
    let h = (hi - lo) / (n - 1) as f64;
    let mass: f64 = values
        .iter()
        .enumerate()
        .map(|(i, v)| if i == 0 || i == n - 1 { 0.5 * v } else { *v })
        .sum::<f64>()
        * h;
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::numerical(format!("marginal mass {mass} is not positive")));
    }
    for v in &mut values {
        *v /= mass;
    }
    Ok(KernelSpec::Tabulated(TabulatedKernel::new(
        vec![lo],
        vec![hi],
        vec![n],
        values,
    )?))
}

/// Series evaluation of the modified Bessel function `I_1`.
fn bessel_i1(z: f64) -> f64 {
    let half = 0.5 * z;
    let mut term = half;
    let mut sum = term;
    for k in 1..200 {
        term *= half * half / (k as f64 * (k as f64 + 1.0));
        sum += term;
        if term < sum.abs() * 1e-17 {
            break;
        }
    }
    sum
}

fn erf(x: f64) -> f64 {
    // A&S 7.1.26 rational approximation, |err| < 1.5e-7. Feeds diagnostics only.
    let sign = x.signum();
    let x = x.abs();
    let t = 1.0 / (1.0 + 0.3275911 * x);
    let poly = t
        * (0.254829592 + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    sign * (1.0 - poly * (-x * x).exp())
}

// ---------------------------------------------------------------------------
// Spec operations
// ---------------------------------------------------------------------------

/// Pointwise density access.
pub fn evaluate(kernel: &KernelSpec, x: &[f64]) -> f64 {
    kernel.evaluate(x)
}

/// `A_xi(lambda)`.
pub fn mgf_directional(kernel: &KernelSpec, xi: &[f64], lambda: f64) -> Result<ExtReal> {
    kernel.mgf_directional(xi, lambda)
}

/// `sigma_xi`.
pub fn abscissa(kernel: &KernelSpec, xi: &[f64]) -> Result<ExtReal> {
    kernel.abscissa(xi)
}

/// Directional first moment `m_xi = kappa_plus int (x.xi) a(x) dx`.
pub fn first_moment_directional(kernel: &KernelSpec, params: &ModelParams, xi: &[f64]) -> Result<f64> {
    check_unit(xi, kernel.dim())?;
    Ok(params.kappa_plus * kernel.raw_first_moment(xi)?)
}

/// Full first moment vector `kappa_plus int x a(x) dx`.
pub fn full_first_moment(kernel: &KernelSpec, params: &ModelParams) -> Result<Vec<f64>> {
    let d = kernel.dim();
    let mut out = Vec::with_capacity(d);
    for axis in 0..d {
        let mut e = vec![0.0; d];
        e[axis] = 1.0;
        out.push(first_moment_directional(kernel, params, &e)?);
    }
    Ok(out)
}

/// 1D marginal kernel along `xi`.
pub fn marginal_1d(kernel: &KernelSpec, xi: &[f64]) -> Result<KernelSpec> {
    kernel.marginal_1d(xi)
}

/// Per-direction assumption outcome with a diagnostic scalar.
#[derive(Debug, Clone, Serialize)]
pub struct DirectionCheck {
    pub xi: Vec<f64>,
    pub ok: bool,
    pub value: f64,
}

/// Boolean + diagnostic record of the standing assumptions.
#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    /// (A1) `kappa_plus > m`, margin `kappa_plus - m`.
    pub a1_beta: bool,
    pub a1_margin: f64,
    /// (A2) `kappa_plus a+ - kappa_nl theta a- >= 0`, minimum over the scan grid.
    pub a2_comparison: bool,
    pub a2_min_margin: f64,
    /// (A3) bounded dispersal density, observed sup.
    pub a3_bounded: bool,
    pub a3_sup: f64,
    /// (A4) per-direction absolute first moment; value is the moment.
    pub a4_first_moment: Vec<DirectionCheck>,
    /// (A5) comparison margin bounded below near the origin.
    pub a5_nondeg: bool,
    pub a5_rho: f64,
    pub a5_delta: f64,
    /// (A6) per-direction exponential integrability; value is `sigma_xi`.
    pub a6_exp_integrable: Vec<DirectionCheck>,
}

impl AssumptionReport {
    /// (A1)-(A5) jointly: what simulation kinds need before trusting the tube.
    pub fn core_ok(&self) -> bool {
        self.a1_beta
            && self.a2_comparison
            && self.a3_bounded
            && self.a4_first_moment.iter().all(|c| c.ok)
            && self.a5_nondeg
    }

    pub fn a6_all(&self) -> bool {
        self.a6_exp_integrable.iter().all(|c| c.ok)
    }
}

impl fmt::Display for AssumptionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "A1 (kappa+ > m):        {} (margin {:.6e})", self.a1_beta, self.a1_margin)?;
        writeln!(f, "A2 (comparison):        {} (min margin {:.6e})", self.a2_comparison, self.a2_min_margin)?;
        writeln!(f, "A3 (bounded kernel):    {} (sup {:.6e})", self.a3_bounded, self.a3_sup)?;
        let a4ok = self.a4_first_moment.iter().all(|c| c.ok);
        writeln!(f, "A4 (first moments):     {a4ok}")?;
        writeln!(
            f,
            "A5 (nondegeneracy at 0): {} (rho {:.6e}, delta {:.4})",
            self.a5_nondeg, self.a5_rho, self.a5_delta
        )?;
        let a6ok = self.a6_all();
        writeln!(f, "A6 (exp integrability): {a6ok}")?;
        for c in &self.a6_exp_integrable {
            writeln!(f, "    xi = {:?}: sigma = {:.6e}", c.xi, c.value)?;
        }
        Ok(())
    }
}

/// Evaluates the standing assumptions on a deterministic sample grid.
///
/// Failures are report entries, never errors. (A2) is scanned over a box
/// sized by both kernels' truncation radii; (A5) searches the comparison
/// margin over shrinking balls around the origin; the "almost every x" of
/// the continuum statements is read as "every sampled x".
pub fn check_assumptions(
    kernel_plus: &KernelSpec,
    kernel_minus: &KernelSpec,
    params: &ModelParams,
    directions: &[Vec<f64>],
) -> Result<AssumptionReport> {
    kernel_plus.validate()?;
    kernel_minus.validate()?;
    if directions.is_empty() {
        return Err(Error::domain("check_assumptions needs at least one direction"));
    }
    let dim = kernel_plus.dim();
    if kernel_minus.dim() != dim {
        return Err(Error::config("kernel dimensions disagree"));
    }
    for xi in directions {
        check_unit(xi, dim)?;
    }

    let a1_margin = params.kappa_plus - params.m;
    let a1_beta = a1_margin > 0.0;
    let theta = if a1_beta { params.theta() } else { 0.0 };

    // (A2): margin kappa+ a+ - kappa_nl theta a- on a scan box.
    let coeff = params.kappa_nl * theta;
    let radius: f64 = (0..dim)
        .map(|a| kernel_plus.truncation_radius(a).max(kernel_minus.truncation_radius(a)))
        .fold(0.0, f64::max)
        .min(1e3);
    let margin = |x: &[f64]| params.kappa_plus * kernel_plus.evaluate(x) - coeff * kernel_minus.evaluate(x);
    let mut a2_min = f64::INFINITY;
    let samples_per_axis = if dim == 1 { 4001 } else { 251 };
    let scan_spacing = 2.0 * radius / (samples_per_axis - 1) as f64;
    match dim {
        1 => {
            let h = scan_spacing;
            for i in 0..samples_per_axis {
                a2_min = a2_min.min(margin(&[-radius + h * i as f64]));
            }
        }
        2 => {
            let h = scan_spacing;
            for i in 0..samples_per_axis {
                for j in 0..samples_per_axis {
                    a2_min = a2_min.min(margin(&[-radius + h * i as f64, -radius + h * j as f64]));
                }
            }
        }
        _ => return Err(Error::config("assumption scan supports d <= 2")),
    }
    let a2_comparison = a2_min >= 0.0;

    let a3_sup = kernel_plus.sup_value();
    let a3_bounded = a3_sup.is_finite();

    let a4: Vec<DirectionCheck> = directions
        .iter()
        .map(|xi| {
            let m = kernel_plus.abs_first_moment(xi);
            DirectionCheck { xi: xi.clone(), ok: m.is_finite(), value: m.as_f64() }
        })
        .collect();

    // (A5): search over delta in scan_spacing * {1, 2, 4, 8}, keep the
    // largest ball on which the margin stays strictly positive.
    let mut a5_rho = f64::NEG_INFINITY;
    let mut a5_delta = 0.0;
    for k in [1.0, 2.0, 4.0, 8.0] {
        let delta = scan_spacing * k;
        let mut rho = f64::INFINITY;
        let nb = 17;
        match dim {
            1 => {
                for i in 0..nb {
                    let x = -delta + 2.0 * delta * i as f64 / (nb - 1) as f64;
                    rho = rho.min(margin(&[x]));
                }
            }
            2 => {
                for i in 0..nb {
                    for j in 0..nb {
                        let x = -delta + 2.0 * delta * i as f64 / (nb - 1) as f64;
                        let y = -delta + 2.0 * delta * j as f64 / (nb - 1) as f64;
                        if x * x + y * y <= delta * delta {
                            rho = rho.min(margin(&[x, y]));
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        if rho > 0.0 {
            a5_rho = rho;
            a5_delta = delta;
        }
    }
    let a5_nondeg = a5_delta > 0.0;

    let a6: Vec<DirectionCheck> = directions
        .iter()
        .map(|xi| {
            let s = kernel_plus.abscissa(xi).expect("validated direction");
            DirectionCheck {
                xi: xi.clone(),
                ok: s.as_f64() > 0.0,
                value: s.as_f64(),
            }
        })
        .collect();

    Ok(AssumptionReport {
        a1_beta,
        a1_margin,
        a2_comparison,
        a2_min_margin: a2_min,
        a3_bounded,
        a3_sup,
        a4_first_moment: a4,
        a5_nondeg,
        a5_rho,
        a5_delta,
        a6_exp_integrable: a6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ext::default_directions;

    fn p(kp: f64, m: f64, kl: f64, kn: f64) -> ModelParams {
        ModelParams::new(kp, m, kl, kn).unwrap()
    }

    #[test]
    fn theta_and_kappa_minus() {
        let params = p(2.0, 1.0, 0.25, 0.75);
        assert_eq!(params.kappa_minus(), 1.0);
        assert!((params.theta() - 1.0).abs() < 1e-15);
        assert!(params.satisfies_a1());
        assert!(ModelParams::new(2.0, 1.0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(-1.0, 1.0, 1.0, 0.0).is_err());
        // A1 violation is allowed at construction (degenerate linear runs).
        assert!(!p(1.0, 1.0, 1.0, 0.0).satisfies_a1());
    }

    #[test]
    fn evaluate_known_values() {
        let g = KernelSpec::Gaussian { sigma: 1.0, dim: 1 };
        assert!((g.evaluate(&[0.0]) - 0.3989422804014327).abs() < 1e-15);
        let l = KernelSpec::Laplace { mu: 1.0, dim: 1 };
        assert!((l.evaluate(&[0.0]) - 0.5).abs() < 1e-15);
        let b = KernelSpec::UniformBall { radius: 1.0, dim: 2 };
        assert_eq!(b.evaluate(&[2.0, 0.0]), 0.0);
        assert!((b.evaluate(&[0.3, 0.2]) - 1.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(KernelSpec::Gaussian { sigma: -1.0, dim: 1 }.validate().is_err());
        assert!(KernelSpec::Laplace { mu: 0.0, dim: 2 }.validate().is_err());
        assert!(KernelSpec::AnisotropicGaussian { sigmas: vec![1.0, -0.5] }.validate().is_err());
    }

    #[test]
    fn densities_integrate_to_one() {
        // 1D families by adaptive quadrature on the line.
        for k in [
            KernelSpec::Gaussian { sigma: 0.7, dim: 1 },
            KernelSpec::Laplace { mu: 2.0, dim: 1 },
            KernelSpec::UniformBall { radius: 1.3, dim: 1 },
            KernelSpec::ShiftedGaussian { mean: vec![0.4], sigma: 1.1 },
            KernelSpec::ParetoTail { alpha: 2.0, dim: 1 },
        ] {
            let mass = quad::integrate_line(|x| k.evaluate(&[x]), 0.0, 2.0, 1e-10, 1e-12).unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "{k}: mass = {mass}");
        }
        // 2D spot checks over generous boxes.
        for k in [
            KernelSpec::AnisotropicGaussian { sigmas: vec![1.0, 0.5] },
            KernelSpec::UniformBall { radius: 1.0, dim: 2 },
            KernelSpec::Laplace { mu: 1.5, dim: 2 },
        ] {
            let mass =
                quad::integrate_box(|x, y| k.evaluate(&[x, y]), [-12.0, -12.0], [12.0, 12.0], 1e-9, 1e-11)
                    .unwrap();
            assert!((mass - 1.0).abs() < 1e-7, "{k}: mass = {mass}");
        }
    }

    #[test]
    fn mgf_normalization_limit() {
        let dirs = [vec![1.0], vec![-1.0]];
        for k in [
            KernelSpec::Gaussian { sigma: 1.0, dim: 1 },
            KernelSpec::Laplace { mu: 2.0, dim: 1 },
            KernelSpec::UniformBall { radius: 1.0, dim: 1 },
        ] {
            for xi in &dirs {
                let a = k.mgf_directional(xi, 1e-8).unwrap().finite().unwrap();
                assert!((a - 1.0).abs() < 1e-6, "{k}: A(0+) = {a}");
            }
        }
    }

    #[test]
    fn mgf_closed_forms() {
        let l = KernelSpec::Laplace { mu: 2.0, dim: 1 };
        let a = l.mgf_directional(&[1.0], 1.0).unwrap().finite().unwrap();
        assert!((a - 4.0 / 3.0).abs() < 1e-14);
        let q = l.mgf_directional_quadrature(&[1.0], 1.0).unwrap();
        assert!((q - 4.0 / 3.0).abs() < 1e-9, "quadrature {q}");

        let g = KernelSpec::Gaussian { sigma: 1.0, dim: 1 };
        let a = g.mgf_directional(&[1.0], 2.0).unwrap().finite().unwrap();
        assert!((a - (2.0f64).exp()).abs() < 1e-12);
        let q = g.mgf_directional_quadrature(&[1.0], 2.0).unwrap();
        assert!((q - a).abs() / a < 1e-9);

        let pt = KernelSpec::ParetoTail { alpha: 2.0, dim: 1 };
        assert_eq!(pt.mgf_directional(&[1.0], 0.3).unwrap(), ExtReal::PosInf);
    }

    #[test]
    fn mgf_quadrature_matches_closed_forms_randomized() {
        // 50 random draws across families and admissible lambdas.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..50 {
            let pick = trial % 5;
            let (kernel, xi): (KernelSpec, Vec<f64>) = match pick {
                0 => (
                    KernelSpec::Gaussian { sigma: rng.random_range(0.3..2.0), dim: 1 },
                    vec![[1.0, -1.0][usize::from(rng.random_bool(0.5))]],
                ),
                1 => (
                    KernelSpec::Laplace { mu: rng.random_range(0.8..3.0), dim: 1 },
                    vec![[1.0, -1.0][usize::from(rng.random_bool(0.5))]],
                ),
                2 => (
                    KernelSpec::UniformBall { radius: rng.random_range(0.5..2.0), dim: 1 },
                    vec![1.0],
                ),
                3 => (
                    KernelSpec::ShiftedGaussian {
                        mean: vec![rng.random_range(-1.0..1.0)],
                        sigma: rng.random_range(0.4..1.5),
                    },
                    vec![1.0],
                ),
                _ => {
                    let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    (
                        KernelSpec::AnisotropicGaussian {
                            sigmas: vec![rng.random_range(0.4..1.5), rng.random_range(0.4..1.5)],
                        },
                        vec![phi.cos(), phi.sin()],
                    )
                }
            };
            let sigma = kernel.abscissa(&xi).unwrap().as_f64();
            let lambda = rng.random_range(0.05..(2.0f64).min(0.8 * sigma));
            let closed = kernel.mgf_directional(&xi, lambda).unwrap().finite().unwrap();
            let quadv = kernel.mgf_directional_quadrature(&xi, lambda).unwrap();
            let rel = (closed - quadv).abs() / closed.abs();
            assert!(rel < 1e-8, "{kernel} lambda={lambda}: closed {closed} vs quad {quadv}");
        }
    }

    #[test]
    fn mgf_log_convex_in_lambda() {
        let kernels = [
            KernelSpec::Gaussian { sigma: 1.0, dim: 1 },
            KernelSpec::Laplace { mu: 2.0, dim: 1 },
            KernelSpec::UniformBall { radius: 1.0, dim: 1 },
        ];
        for k in kernels {
            let sigma = k.abscissa(&[1.0]).unwrap().as_f64().min(4.0);
            let grid: Vec<f64> = (1..40).map(|i| sigma * i as f64 / 40.0).collect();
            for w in grid.windows(2) {
                let (l1, l2) = (w[0], w[1]);
                let mid = 0.5 * (l1 + l2);
                let a1 = k.mgf_directional(&[1.0], l1).unwrap().finite().unwrap().ln();
                let a2 = k.mgf_directional(&[1.0], l2).unwrap().finite().unwrap().ln();
                let am = k.mgf_directional(&[1.0], mid).unwrap().finite().unwrap().ln();
                assert!(am <= 0.5 * (a1 + a2) + 1e-12, "{k}: log-convexity fails at {mid}");
            }
        }
    }

    #[test]
    fn abscissa_values_and_consistency() {
        let g = KernelSpec::Gaussian { sigma: 1.0, dim: 1 };
        assert_eq!(g.abscissa(&[1.0]).unwrap(), ExtReal::PosInf);
        let l = KernelSpec::Laplace { mu: 3.0, dim: 1 };
        assert_eq!(l.abscissa(&[1.0]).unwrap(), ExtReal::Finite(3.0));
        let pt = KernelSpec::ParetoTail { alpha: 2.0, dim: 1 };
        assert_eq!(pt.abscissa(&[1.0]).unwrap(), ExtReal::Finite(0.0));

        // finite-abscissa family: finite just below, infinite just above
        let s = 3.0;
        assert!(l.mgf_directional(&[1.0], 0.99 * s).unwrap().is_finite());
        assert!(!l.mgf_directional(&[1.0], 1.01 * s).unwrap().is_finite());

        // bisection on quadrature finiteness agrees with the closed form
        let mut lo = 0.1;
        let mut hi = 8.0;
        let finite = |lam: f64| l.mgf_directional_quadrature(&[1.0], lam).is_ok();
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            if finite(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((lo - 3.0).abs() < 1e-3, "bisection abscissa {lo}");

        // laplace product in 2D: projection rule mu / max|xi_i|
        let l2 = KernelSpec::Laplace { mu: 2.0, dim: 2 };
        let xi = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
        let s = l2.abscissa(&xi).unwrap().finite().unwrap();
        assert!((s - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn first_moments() {
        let params = p(2.0, 1.0, 1.0, 0.0);
        let g = KernelSpec::Gaussian { sigma: 1.0, dim: 2 };
        let xi = [0.6, 0.8];
        assert_eq!(first_moment_directional(&g, &params, &xi).unwrap(), 0.0);

        let s = KernelSpec::ShiftedGaussian { mean: vec![1.0, 0.0], sigma: 1.0 };
        let m = first_moment_directional(&s, &params, &[1.0, 0.0]).unwrap();
        assert!((m - 2.0).abs() < 1e-12);
        assert_eq!(first_moment_directional(&s, &params, &[0.0, 1.0]).unwrap(), 0.0);

        let s2 = KernelSpec::ShiftedGaussian { mean: vec![1.0, -0.5], sigma: 1.0 };
        let one = ModelParams::new(1.0, 0.5, 1.0, 0.0).unwrap();
        let mm = full_first_moment(&s2, &one).unwrap();
        assert!((mm[0] - 1.0).abs() < 1e-12 && (mm[1] + 0.5).abs() < 1e-12);

        let b = KernelSpec::UniformBall { radius: 1.0, dim: 2 };
        let mb = full_first_moment(&b, &one).unwrap();
        assert!(mb.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn first_moment_quadrature_oracle() {
        // quadrature of (x.xi) a(x) against the closed forms
        let s = KernelSpec::ShiftedGaussian { mean: vec![1.0, 0.0], sigma: 1.0 };
        let xi = [1.0, 0.0];
        let perp = [0.0, 1.0];
        let f = |u: f64, t: f64| {
            let x = [u * xi[0] + t * perp[0], u * xi[1] + t * perp[1]];
            u * s.evaluate(&x)
        };
        let inner = |u: f64| quad::integrate_line(|t| f(u, t), 0.0, 1.0, 1e-11, 1e-14).unwrap();
        let v = quad::integrate_line(inner, 1.0, 1.0, 1e-10, 1e-13).unwrap();
        assert!((v - 1.0).abs() < 1e-8, "quadrature moment {v}");
    }

    #[test]
    fn first_moment_matches_mgf_derivative() {
        // m_xi / kappa+ = d/dlambda A_xi(lambda) at 0+, central difference
        // through A_{-xi} for the negative arm.
        let params = p(1.0, 0.5, 1.0, 0.0);
        let kernels = [
            KernelSpec::ShiftedGaussian { mean: vec![0.7], sigma: 0.9 },
            KernelSpec::Gaussian { sigma: 1.0, dim: 1 },
            KernelSpec::Laplace { mu: 2.0, dim: 1 },
        ];
        for k in kernels {
            let h = 1e-4;
            let plus = k.mgf_directional(&[1.0], h).unwrap().finite().unwrap();
            let minus = k.mgf_directional(&[-1.0], h).unwrap().finite().unwrap();
            let fd = (plus - minus) / (2.0 * h);
            let m = first_moment_directional(&k, &params, &[1.0]).unwrap();
            assert!(
                (fd - m).abs() <= 1e-5 * (1.0 + m.abs()),
                "{k}: fd {fd} vs moment {m}"
            );
        }
    }

    #[test]
    fn marginal_identity_in_1d() {
        let l = KernelSpec::Laplace { mu: 2.0, dim: 1 };
        assert_eq!(l.marginal_1d(&[1.0]).unwrap(), l);
    }

    #[test]
    fn marginal_of_isotropic_gaussian() {
        let g = KernelSpec::Gaussian { sigma: 1.0, dim: 2 };
        let xi = [0.6, 0.8];
        let marg = g.marginal_1d(&xi).unwrap();
        assert_eq!(marg, KernelSpec::Gaussian { sigma: 1.0, dim: 1 });

        // cross-check against transverse quadrature at a few points
        for s in [-1.5, 0.0, 0.7] {
            let perp = [-xi[1], xi[0]];
            let q = quad::integrate_line(
                |t| g.evaluate(&[s * xi[0] + t * perp[0], s * xi[1] + t * perp[1]]),
                0.0,
                1.0,
                1e-11,
                1e-14,
            )
            .unwrap();
            assert!((q - marg.evaluate(&[s])).abs() < 1e-10);
        }
    }

    #[test]
    fn marginal_of_uniform_ball_is_chord_density() {
        let b = KernelSpec::UniformBall { radius: 1.0, dim: 2 };
        let marg = b.marginal_1d(&[1.0, 0.0]).unwrap();
        let KernelSpec::Tabulated(t) = &marg else { panic!("expected tabulated marginal") };
        // integrates to one
        assert!((t.mass() - 1.0).abs() < 1e-8);
        // chord formula at interior points, cross-checked by quadrature
        for s in [-0.6f64, 0.0, 0.25, 0.8] {
            let chord = 2.0 * (1.0 - s * s).max(0.0).sqrt() / std::f64::consts::PI;
            assert!((marg.evaluate(&[s]) - chord).abs() < 1e-6, "s = {s}");
            let q = quad::integrate(
                |t2: f64| b.evaluate(&[s, t2]),
                -1.1,
                1.1,
                1e-11,
                1e-14,
            )
            .unwrap();
            assert!((q - chord).abs() < 1e-9);
        }
    }

    #[test]
    fn marginal_is_probability_density() {
        let kernels = [
            KernelSpec::Laplace { mu: 1.5, dim: 2 },
            KernelSpec::AnisotropicGaussian { sigmas: vec![1.0, 0.5] },
            KernelSpec::UniformBall { radius: 1.0, dim: 2 },
        ];
        let xi = [0.8, -0.6];
        for k in kernels {
            let marg = k.marginal_1d(&xi).unwrap();
            match &marg {
                KernelSpec::Tabulated(t) => {
                    assert!(t.values.iter().all(|v| *v >= 0.0));
                    assert!((t.mass() - 1.0).abs() < 1e-8, "{k}");
                }
                KernelSpec::Gaussian { .. } => {}
                other => panic!("unexpected marginal {other}"),
            }
        }
    }

    #[test]
    fn check_assumptions_identical_gaussians() {
        let g = KernelSpec::Gaussian { sigma: 1.0, dim: 1 };
        let params = p(2.0, 1.0, 0.0, 1.0); // theta = 1
        let dirs = default_directions(1, 64);
        let rep = check_assumptions(&g, &g, &params, &dirs).unwrap();
        assert!(rep.a1_beta && rep.a2_comparison && rep.a3_bounded);
        assert!(rep.a2_min_margin >= 0.0);
        assert!(rep.a5_nondeg && rep.a5_rho > 0.0);
        assert!(rep.a4_first_moment.iter().all(|c| c.ok));
        assert!(rep.a6_all());
        assert!(rep.core_ok());

        let tight = p(1.2, 0.2, 0.0, 1.0); // theta = 1, margin 0.2 a+
        let rep = check_assumptions(&g, &g, &tight, &dirs).unwrap();
        assert!(rep.a2_comparison);
    }

    #[test]
    fn check_assumptions_tail_violation() {
        // wider competition kernel with large kappa_nl theta: margin goes
        // negative in the tails
        let aplus = KernelSpec::Gaussian { sigma: 1.0, dim: 1 };
        let aminus = KernelSpec::Gaussian { sigma: 2.0, dim: 1 };
        let params = p(2.0, 1.0, 0.0, 1.0); // kappa_nl theta = 1... margin 2 a+ - a-
        let dirs = default_directions(1, 2);
        let rep = check_assumptions(&aplus, &aminus, &params, &dirs).unwrap();
        assert!(!rep.a2_comparison, "expected tail failure, margin {}", rep.a2_min_margin);
        assert!(rep.a2_min_margin < 0.0);
        // near the origin the narrow kernel still wins
        assert!(rep.a5_nondeg);
        // grid-scan oracle: locate a point where the margin is negative
        let bad = (0..4000)
            .map(|i| -10.0 + 20.0 * i as f64 / 3999.0)
            .find(|x| 2.0 * aplus.evaluate(&[*x]) - aminus.evaluate(&[*x]) < 0.0);
        assert!(bad.is_some());
    }

    #[test]
    fn pareto_a6_fails_a4_depends_on_alpha() {
        let pt = KernelSpec::ParetoTail { alpha: 2.0, dim: 1 };
        let params = p(2.0, 1.0, 1.0, 0.0);
        let dirs = default_directions(1, 2);
        let rep = check_assumptions(&pt, &pt, &params, &dirs).unwrap();
        assert!(!rep.a6_all());
        assert!(rep.a4_first_moment.iter().all(|c| c.ok));
        assert!((rep.a4_first_moment[0].value - 1.0).abs() < 1e-12); // 1/(alpha-1)

        let heavy = KernelSpec::ParetoTail { alpha: 0.8, dim: 1 };
        let rep = check_assumptions(&heavy, &heavy, &params, &dirs).unwrap();
        assert!(!rep.a4_first_moment[0].ok);
    }

    #[test]
    fn tabulated_roundtrip_and_interpolation() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kern1d.txt");
        // hat density on [-1, 1]
        let n = 201;
        let mut text = format!("# support: -1 1 {n}\n");
        for i in 0..n {
            let x = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let v = (1.0 - x.abs()).max(0.0);
            text.push_str(&format!("{x} {v}\n"));
        }
        std::fs::write(&path, text).unwrap();
        let t = TabulatedKernel::load(&path).unwrap();
        assert_eq!(t.shape, vec![201]);
        let k = KernelSpec::Tabulated(t.clone());
        assert_eq!(k.evaluate(&[2.0]), 0.0);
        assert!((k.evaluate(&[0.0]) - 1.0).abs() < 1e-14);
        assert!((k.evaluate(&[0.505]) - 0.495).abs() < 1e-12);
        assert!((t.mass() - 1.0).abs() < 1e-10);
        assert_eq!(k.abscissa(&[1.0]).unwrap(), ExtReal::PosInf);
        let a = k.mgf_directional(&[1.0], 1.0).unwrap().finite().unwrap();
        // int (1-|x|) e^x dx over [-1,1] = e + 1/e - 2
        let exact = std::f64::consts::E + (-1.0f64).exp() - 2.0;
        assert!((a - exact).abs() < 1e-8, "tabulated mgf {a} vs {exact}");
    }

    #[test]
    fn tabulated_2d_load() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("kern2d.txt");
        let (n, m) = (41, 21);
        let mut text = format!("# support: -2 2 -1 1 {n} {m}\n");
        for i in 0..n {
            let x = -2.0 + 4.0 * i as f64 / (n - 1) as f64;
            let row: Vec<String> = (0..m)
                .map(|j| {
                    let y = -1.0 + 2.0 * j as f64 / (m - 1) as f64;
                    format!("{}", (2.0 - x.abs()).max(0.0) * (1.0 - y.abs()).max(0.0) / 4.0)
                })
                .collect();
            text.push_str(&row.join(" "));
            text.push('\n');
        }
        std::fs::write(&path, text).unwrap();
        let t = TabulatedKernel::load(&path).unwrap();
        assert_eq!(t.shape, vec![41, 21]);
        assert!((t.mass() - 1.0).abs() < 1e-10);
        let k = KernelSpec::Tabulated(t);
        assert_eq!(k.evaluate(&[0.0, 3.0]), 0.0);
        assert!((k.evaluate(&[0.0, 0.0]) - 0.5).abs() < 1e-12);
    }
}
