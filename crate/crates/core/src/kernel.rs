//! The planar Cauchy-semigroup kernel: closed form, integral oracle,
//! truncated windows and the principal-value convolution on a periodic grid.
//!
//! With `p_t(x) = t / (π(t² + x²))` the kernel is
//! `K(x, y) = ∫₀^∞ ∂_t p_t(x) p_t(y) dt`. As a distribution its Fourier
//! transform is `−|ξ₁|/(|ξ₁| + |ξ₂|)`; the principal-value part carries the
//! symbol `½ − |ξ₁|/(|ξ₁| + |ξ₂|)`, so the power multiplier with `α = 1` acts
//! as `f ↦ ½f − pv(K * f)` on mean-zero functions.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{
    gauss_legendre_on, integrate_to_infinity, integrate_with_breaks, QuadOptions,
};
use crate::transform::GridFunction;

const PI2: f64 = PI * PI;

/// Half-width, in `|log(y/x)|`, of the band around `|x| = |y|` where the
/// closed form switches to its series expansion.
pub const DIAGONAL_BAND: f64 = 0.05;

/// The one-dimensional Cauchy density at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyDensity {
    t: f64,
}

impl CauchyDensity {
    pub fn new(t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(invalid(format!("Cauchy time must be positive, got {t}")));
        }
        Ok(Self { t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn density(&self, x: f64) -> f64 {
        self.t / (PI * (self.t * self.t + x * x))
    }

    /// `∂_t p_t(x) = (x² − t²) / (π(t² + x²)²)`.
    pub fn time_derivative(&self, x: f64) -> f64 {
        let t2 = self.t * self.t;
        let s = t2 + x * x;
        (x * x - t2) / (PI * s * s)
    }
}

pub fn cauchy_density(t: f64, x: f64) -> Result<f64> {
    Ok(CauchyDensity::new(t)?.density(x))
}

pub fn cauchy_density_dt(t: f64, x: f64) -> Result<f64> {
    Ok(CauchyDensity::new(t)?.time_derivative(x))
}

fn check_point(x: f64, y: f64) -> Result<()> {
    if !(x.is_finite() && y.is_finite()) {
        return Err(invalid("kernel arguments must be finite"));
    }
    if x == 0.0 && y == 0.0 {
        return Err(Error::SingularPoint(
            "kernel is singular at the origin".into(),
        ));
    }
    if x == 0.0 || y == 0.0 {
        return Err(Error::SingularPoint(format!(
            "kernel has a logarithmic singularity on the axes, got ({x}, {y})"
        )));
    }
    Ok(())
}

/// `sinh u − u cosh u` by its Taylor series `−Σ_{n≥1} 2n u^{2n+1}/(2n+1)!`.
fn sinh_minus_u_cosh_series(u: f64) -> f64 {
    let u2 = u * u;
    let mut term = u; // u^{2n+1}/(2n+1)! at n = 0
    let mut sum = 0.0;
    for n in 1..40 {
        let k = 2 * n;
        term *= u2 / ((k * (k + 1)) as f64);
        let add = k as f64 * term;
        sum += add;
        if add.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    -sum
}

/// `K(x, y) = (−x² + y² + x² log|x/y| − y² log|y/x|) / (π²(x² − y²)²)`.
///
/// Near `|x| = |y|` the value is computed from `u = log|y/x|` as
/// `(sinh u − u cosh u) / (2π² x² e^u sinh² u)` with the numerator expanded
/// in series; the diagonal itself gives 0.
pub fn kernel_closed_form(x: f64, y: f64) -> Result<f64> {
    check_point(x, y)?;
    let (ax, ay) = (x.abs(), y.abs());
    let u = (ay / ax).ln();
    if u.abs() < DIAGONAL_BAND {
        if u == 0.0 {
            return Ok(0.0);
        }
        let s = u.sinh();
        return Ok(sinh_minus_u_cosh_series(u) / (2.0 * PI2 * ax * ax * u.exp() * s * s));
    }
    let (x2, y2) = (ax * ax, ay * ay);
    let num = y2 - x2 - (x2 + y2) * u;
    let diff = x2 - y2;
    Ok(num / (PI2 * diff * diff))
}

/// `K(x, y)` as the quadrature `∫₀^∞ ∂_t p_t(x) p_t(y) dt`, split at `|x|`
/// and `|y|` with the tail beyond `max(|x|, |y|)` mapped by `t = 1/s`.
pub fn kernel_numeric(x: f64, y: f64, tol: f64) -> Result<f64> {
    check_point(x, y)?;
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    let (x2, y2) = (x * x, y * y);
    let (ax, ay) = (x.abs(), y.abs());
    let (lo, hi) = (ax.min(ay), ax.max(ay));
    let near = |t: f64| {
        let t2 = t * t;
        let s = t2 + x2;
        t * (x2 - t2) / (s * s * (t2 + y2))
    };
    let far = |s: f64| {
        let s2 = s * s;
        let a = 1.0 + x2 * s2;
        s * (x2 * s2 - 1.0) / (a * a * (1.0 + y2 * s2))
    };
    let opts = QuadOptions::absolute(0.5 * tol * PI2);
    let head = integrate_with_breaks(near, &[0.0, lo, hi], opts)?;
    let tail = integrate_with_breaks(far, &[0.0, 1.0 / hi], opts)?;
    Ok((head.value + tail.value) / PI2)
}

/// `∫_ε^T ∂_t p_t(x) p_t(y) dt`. `T` may be infinite; `ε = T` gives 0.
pub fn kernel_truncated(eps: f64, t_max: f64, x: f64, y: f64, tol: f64) -> Result<f64> {
    if !(eps >= 0.0 && eps.is_finite()) || t_max.is_nan() {
        return Err(invalid("truncation window needs finite ε >= 0"));
    }
    if eps > t_max {
        return Err(invalid(format!(
            "truncation window needs ε <= T, got ε={eps}, T={t_max}"
        )));
    }
    if !(tol > 0.0) {
        return Err(invalid("tolerance must be positive"));
    }
    if !(x.is_finite() && y.is_finite()) {
        return Err(invalid("kernel arguments must be finite"));
    }
    if eps == t_max {
        return Ok(0.0);
    }
    if eps == 0.0 {
        check_point(x, y)?;
    }
    let (x2, y2) = (x * x, y * y);
    let integrand = |t: f64| {
        let t2 = t * t;
        let s = t2 + x2;
        t * (x2 - t2) / (s * s * (t2 + y2))
    };
    let opts = QuadOptions::absolute(0.5 * tol * PI2);
    let mut breaks = vec![eps];
    for b in [x.abs(), y.abs()] {
        if b > eps && b < t_max {
            breaks.push(b);
        }
    }
    breaks.sort_by(f64::total_cmp);
    if t_max.is_finite() {
        breaks.push(t_max);
    }
    let mut value = integrate_with_breaks(integrand, &breaks, opts)?.value;
    if t_max.is_infinite() {
        let start = *breaks.last().expect("non-empty");
        value += integrate_to_infinity(integrand, start, opts)?.value;
    }
    Ok(value / PI2)
}

/// Which closed-form kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    ClosedForm,
    Truncated { eps: f64, t_max: f64 },
}

/// A kernel variant together with its evaluation tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularKernel {
    pub kind: KernelKind,
    pub tol: f64,
}

impl SingularKernel {
    pub fn closed_form() -> Self {
        Self {
            kind: KernelKind::ClosedForm,
            tol: 1e-12,
        }
    }

    pub fn truncated(eps: f64, t_max: f64, tol: f64) -> Result<Self> {
        if !(eps >= 0.0) || eps > t_max {
            return Err(invalid(format!(
                "truncation window needs 0 <= ε <= T, got ε={eps}, T={t_max}"
            )));
        }
        Ok(Self {
            kind: KernelKind::Truncated { eps, t_max },
            tol,
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        match self.kind {
            KernelKind::ClosedForm => kernel_closed_form(x, y),
            KernelKind::Truncated { eps, t_max } => kernel_truncated(eps, t_max, x, y, self.tol),
        }
    }

    /// CSV rows `x,y,K` over the product of the two coordinate lists.
    /// Points where the kernel is singular are written with an empty value.
    pub fn write_table<W: Write>(&self, mut w: W, xs: &[f64], ys: &[f64]) -> Result<()> {
        writeln!(w, "x,y,K")?;
        for &x in xs {
            for &y in ys {
                match self.eval(x, y) {
                    Ok(k) => writeln!(w, "{x},{y},{k}")?,
                    Err(Error::SingularPoint(_)) => writeln!(w, "{x},{y},")?,
                    Err(e) => return Err(e),
                }
            }
        }
        Ok(())
    }
}

/// `∫_{[a,b]×[c,d]} K = ∫₀^∞ ∂_t P_t[a,b] · P_t[c,d] dt`, with `P_t[a,b]`
/// the Cauchy mass of the interval. Finite for every cell, including those
/// crossing the axes.
pub fn kernel_cell_integral(a: f64, b: f64, c: f64, d: f64, tol: f64) -> Result<f64> {
    if !(a < b && c < d) {
        return Err(invalid("cell bounds must be increasing"));
    }
    let integrand = |t: f64| {
        let t2 = t * t;
        // a/(t²+a²) − b/(t²+b²), arranged to avoid cancellation at large t
        let dx = (a - b) * (t2 - a * b) / ((t2 + a * a) * (t2 + b * b));
        // atan(d/t) − atan(c/t)
        let dy = ((d - c) * t).atan2(t2 + c * d);
        dx * dy
    };
    let mut breaks: Vec<f64> = vec![0.0];
    let mut scales: Vec<f64> = [a, b, c, d]
        .iter()
        .map(|v| v.abs())
        .filter(|v| *v > 0.0)
        .collect();
    scales.sort_by(f64::total_cmp);
    scales.dedup();
    breaks.extend(&scales);
    let opts = QuadOptions::absolute(0.5 * tol * PI2);
    let head = integrate_with_breaks(integrand, &breaks, opts)?;
    let tail = integrate_to_infinity(integrand, *breaks.last().expect("non-empty"), opts)?;
    Ok((head.value + tail.value) / PI2)
}

/// How the principal-value weights are discretized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PvScheme {
    /// Exact cell integrals of the periodized kernel, obtained from the
    /// periodized Cauchy density `P_t(x) = Σ_n p_t(x + nL)` in closed form.
    PeriodicCells {
        /// Gauss–Legendre nodes per octave of the time variable.
        order: usize,
    },
    /// Midpoint samples `h² K(z)` over `images` periodic copies on each
    /// side; cells within `band` rows of an axis use exact cell integrals.
    Midpoint {
        images: usize,
        band: usize,
        cell_tol: f64,
    },
}

/// Discretization parameters of [`pv_convolve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PvOptions {
    /// Radius of the excluded ball around the origin.
    pub rho: f64,
    /// Axis carrying `|ξ_j|` in the numerator of the symbol (0 or 1).
    pub axis: usize,
    pub scheme: PvScheme,
}

impl PvOptions {
    pub fn new(rho: f64) -> Self {
        Self {
            rho,
            axis: 0,
            scheme: PvScheme::PeriodicCells { order: 10 },
        }
    }

    pub fn midpoint(rho: f64, images: usize) -> Self {
        Self {
            rho,
            axis: 0,
            scheme: PvScheme::Midpoint {
                images,
                band: 2,
                cell_tol: 1e-10,
            },
        }
    }

    pub fn with_axis(mut self, axis: usize) -> Self {
        self.axis = axis;
        self
    }
}

fn square_grid(f: &GridFunction) -> Result<(usize, f64)> {
    if f.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: f.dim(),
        });
    }
    let (n, l) = (f.dims()[0], f.period()[0]);
    if f.dims()[1] != n || f.period()[1] != l {
        return Err(invalid(
            "principal-value convolution needs a square grid with equal periods",
        ));
    }
    Ok((n, l))
}

/// The periodized Cauchy density on `[0, L)`:
/// `P_t(x) = sinh τ / (L(cosh τ − cos θ))` with `τ = 2πt/L`, `θ = 2πx/L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicCauchy {
    pub period: f64,
}

impl PeriodicCauchy {
    pub fn density(&self, t: f64, x: f64) -> f64 {
        let l = self.period;
        let tau = 2.0 * PI * t / l;
        let half = (PI * x / l).sin();
        // cosh τ − cos θ = 2 sinh²(τ/2) + 2 sin²(θ/2)
        let sh = (0.5 * tau).sinh();
        tau.sinh() / (l * 2.0 * (sh * sh + half * half))
    }

    /// Mass of the interval `[a, b]`, `b − a < L`.
    pub fn mass(&self, t: f64, a: f64, b: f64) -> f64 {
        let l = self.period;
        // reduce a to [−L/2, L/2)
        let shift = ((a + 0.5 * l) / l).floor() * l;
        let (a, b) = (a - shift, b - shift);
        if b > 0.5 * l {
            return self.mass_inside(t, a, 0.5 * l) + self.mass_inside(t, -0.5 * l, b - l);
        }
        self.mass_inside(t, a, b)
    }

    /// `(1/π)[atan(C tan(θ_b/2)) − atan(C tan(θ_a/2))]` with `C = coth(τ/2)`,
    /// for `−L/2 ≤ a < b ≤ L/2`.
    fn mass_inside(&self, t: f64, a: f64, b: f64) -> f64 {
        let l = self.period;
        let c = 1.0 / (PI * t / l).tanh();
        let ua = c * (PI * a / l).tan();
        let ub = c * (PI * b / l).tan();
        let diff = if ua.is_finite() && ub.is_finite() && ua * ub >= 0.0 {
            (ub - ua).atan2(1.0 + ua * ub)
        } else {
            ub.atan() - ua.atan()
        };
        diff / PI
    }

    /// `∂_t` of [`mass`](Self::mass).
    pub fn mass_dt(&self, t: f64, a: f64, b: f64) -> f64 {
        let l = self.period;
        let q = (-2.0 * PI * t / l).exp();
        let one_minus_q = -(-2.0 * PI * t / l).exp_m1();
        let term = |x: f64| {
            let theta = 2.0 * PI * x / l;
            let sh = (0.5 * theta).sin();
            theta.sin() / (one_minus_q * one_minus_q + 4.0 * q * sh * sh)
        };
        -2.0 * q / l * (term(b) - term(a))
    }
}

/// Periodized principal-value weights `W(m)` on an `N × N` grid of period
/// `L`, so that `pv(K * f)(x_i) ≈ Σ_m W(m) f(x_{i−m})`. Offsets whose cell
/// centre lies in the ball `|z| < ρ` get weight zero.
pub fn pv_weights(n: usize, period: f64, opts: &PvOptions) -> Result<Vec<f64>> {
    let h = period / n as f64;
    if opts.axis > 1 {
        return Err(invalid(format!(
            "kernel axis must be 0 or 1, got {}",
            opts.axis
        )));
    }
    if !(opts.rho >= h) {
        return Err(invalid(format!(
            "cutoff radius {} is smaller than the grid cell {h}",
            opts.rho
        )));
    }
    if opts.rho >= 0.5 * period {
        return Err(invalid("cutoff radius must be below half the period"));
    }
    let mut w = match opts.scheme {
        PvScheme::PeriodicCells { order } => periodic_cell_weights(n, period, order)?,
        PvScheme::Midpoint {
            images,
            band,
            cell_tol,
        } => midpoint_weights(n, period, images, band, cell_tol)?,
    };
    let signed = |m: usize| {
        if m >= n / 2 {
            m as i64 - n as i64
        } else {
            m as i64
        }
    };
    let rho2 = opts.rho * opts.rho;
    for (flat, v) in w.iter_mut().enumerate() {
        let (i, j) = (signed(flat / n), signed(flat % n));
        if ((i * i + j * j) as f64) * h * h < rho2 {
            *v = 0.0;
        }
    }
    if opts.axis == 1 {
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                t[j * n + i] = w[i * n + j];
            }
        }
        w = t;
    }
    Ok(w)
}

/// `W(i, j) = ∫₀^∞ ∂_t A_i(t) A_j(t) dt` with `A_i` the periodized Cauchy
/// mass of cell `i`, on a shared log-spaced Gauss–Legendre rule in `t`.
fn periodic_cell_weights(n: usize, period: f64, order: usize) -> Result<Vec<f64>> {
    if order < 2 {
        return Err(invalid("time quadrature order must be at least 2"));
    }
    let h = period / n as f64;
    let (t_min, t_max) = (1e-4 * h, 8.0 * period);
    let octaves = (t_max / t_min).log2().ceil() as usize;
    let mut rule = Vec::with_capacity((octaves + 1) * order);
    // On cells touching an axis the antisymmetrized integrand tends to a
    // nonzero constant as t → 0, so the first panel is linear in t.
    rule.extend(gauss_legendre_on(order, 0.0, t_min));
    for k in 0..octaves {
        let (lo, hi) = (
            (t_min * 2f64.powi(k as i32)).ln(),
            (t_min * 2f64.powi(k as i32 + 1)).ln(),
        );
        for (s, ws) in gauss_legendre_on(order, lo, hi) {
            let t = s.exp();
            rule.push((t, ws * t));
        }
    }
    let pc = PeriodicCauchy { period };
    let centre = |m: usize| {
        (if m >= n / 2 {
            m as f64 - n as f64
        } else {
            m as f64
        }) * h
    };
    let mut da = vec![0.0; rule.len() * n];
    let mut ma = vec![0.0; rule.len() * n];
    for (q, &(t, _)) in rule.iter().enumerate() {
        for m in 0..n {
            let x = centre(m);
            da[q * n + m] = pc.mass_dt(t, x - 0.5 * h, x + 0.5 * h);
            ma[q * n + m] = pc.mass(t, x - 0.5 * h, x + 0.5 * h);
        }
    }
    // ½∫(∂_t A_i A_j − A_i ∂_t A_j) dt: the symmetric part integrates to the
    // constant (h/L)², which only touches the zero frequency.
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = vec![0.0; n];
            for (q, &(_, wq)) in rule.iter().enumerate() {
                let (di, mi) = (da[q * n + i], ma[q * n + i]);
                let dq = &da[q * n..(q + 1) * n];
                let mq = &ma[q * n..(q + 1) * n];
                for ((r, dj), mj) in row.iter_mut().zip(dq).zip(mq) {
                    *r += 0.5 * wq * (di * mj - mi * dj);
                }
            }
            row
        })
        .collect();
    Ok(rows.concat())
}

fn midpoint_weights(
    n: usize,
    period: f64,
    images: usize,
    band: usize,
    cell_tol: f64,
) -> Result<Vec<f64>> {
    let h = period / n as f64;
    let ni = n as i64;
    let reach = (2 * images as i64 + 1) * ni; // 2·(images + ½)·N
    let band = band as i64;
    let cell_tol = cell_tol * h * h;
    // Lattice coordinates congruent to m, at half weight on the boundary of
    // the square |·|_∞ ≤ (images + ½)N.
    let lifts = |m: i64| -> Vec<(i64, f64)> {
        let r = images as i64 + 1;
        (-r..=r)
            .map(|k| m + k * ni)
            .filter_map(|j| {
                let twice = 2 * j.abs();
                if twice < reach {
                    Some((j, 1.0))
                } else if twice == reach {
                    Some((j, 0.5))
                } else {
                    None
                }
            })
            .collect()
    };
    let cell = |i: i64, j: i64| -> Result<f64> {
        let (xc, yc) = (i as f64 * h, j as f64 * h);
        if i.abs() <= band || j.abs() <= band {
            kernel_cell_integral(
                xc - 0.5 * h,
                xc + 0.5 * h,
                yc - 0.5 * h,
                yc + 0.5 * h,
                cell_tol,
            )
        } else {
            Ok(h * h * kernel_closed_form(xc, yc)?)
        }
    };
    (0..n * n)
        .into_par_iter()
        .map(|flat| {
            let (m0, m1) = ((flat / n) as i64, (flat % n) as i64);
            let mut acc = 0.0;
            for (i, wi) in lifts(m0) {
                for (j, wj) in lifts(m1) {
                    if i == 0 && j == 0 {
                        continue;
                    }
                    acc += wi * wj * cell(i, j)?;
                }
            }
            Ok(acc)
        })
        .collect()
}

/// Circular convolution `Σ_m W(m) f(x_{i−m})` computed with the FFT.
pub fn convolve_weights(f: &GridFunction, weights: &[f64]) -> Result<GridFunction> {
    if weights.len() != f.len() {
        return Err(invalid("weights and grid function differ in size"));
    }
    let w: Vec<Complex64> = weights.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let kernel = GridFunction::new(f.dims().to_vec(), f.period().to_vec(), w)?;
    let wk = kernel.forward();
    let mut spec = f.forward();
    spec.iter_mut().zip(&wk).for_each(|(a, b)| *a *= b);
    GridFunction::from_spectrum(f.dims().to_vec(), f.period().to_vec(), spec)
}

/// The same circular convolution by direct summation, `O(N⁴)`.
pub fn convolve_weights_direct(f: &GridFunction, weights: &[f64]) -> Result<GridFunction> {
    if weights.len() != f.len() || f.dim() != 2 {
        return Err(invalid(
            "direct convolution needs a 2-d grid and matching weights",
        ));
    }
    let (n0, n1) = (f.dims()[0], f.dims()[1]);
    let s = f.samples();
    let out: Vec<Complex64> = (0..n0 * n1)
        .into_par_iter()
        .map(|flat| {
            let (i0, i1) = (flat / n1, flat % n1);
            let mut acc = Complex64::new(0.0, 0.0);
            for m0 in 0..n0 {
                for m1 in 0..n1 {
                    let src = ((i0 + n0 - m0) % n0) * n1 + (i1 + n1 - m1) % n1;
                    acc += weights[m0 * n1 + m1] * s[src];
                }
            }
            acc
        })
        .collect();
    GridFunction::new(f.dims().to_vec(), f.period().to_vec(), out)
}

/// Discrete principal-value convolution `pv(K * f)` on a square periodic grid.
pub fn pv_convolve(f: &GridFunction, opts: &PvOptions) -> Result<GridFunction> {
    let (n, l) = square_grid(f)?;
    let weights = pv_weights(n, l, opts)?;
    convolve_weights(f, &weights)
}

/// The power multiplier with `α = 1` computed in space as `½f − pv(K * f)`.
///
/// On the zero frequency this gives `½ f̂(0)` whereas the spectral symbol is
/// 0 there, so the two routes are comparable on mean-zero functions.
pub fn spatial_cauchy_multiplier(f: &GridFunction, opts: &PvOptions) -> Result<GridFunction> {
    let pv = pv_convolve(f, opts)?;
    f.scale(Complex64::new(0.5, 0.0)).sub(&pv)
}
